//! Sun position, cloud-modulated direct and diffuse radiation, and PV power.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::rng::RandomStream;
use crate::weather::WeatherTrace;
use crate::{ensure_finite, Error, Result, SECONDS_PER_HOUR};
// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarSite {
    /// Latitude (rad), positive north.
    pub latitude: f64,
    /// Longitude (rad), positive east.
    pub longitude: f64,
    /// Day of year, 1..=365.
    pub day_of_year: u32,
    /// Offset of local clock time from UTC (h).
    pub utc_offset: f64,
}

impl SolarSite {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("latitude", self.latitude)?;
        ensure_finite("longitude", self.longitude)?;
        ensure_finite("utc offset", self.utc_offset)?;
        if self.latitude.abs() > PI / 2.0 {
            return Err(Error::OutOfDomain {
                name: "latitude",
                value: self.latitude,
                domain: "[-pi/2, pi/2]",
            });
        }
        if !(1..=365).contains(&self.day_of_year) {
            return Err(Error::OutOfDomain {
                name: "day of year",
                value: self.day_of_year as f64,
                domain: "1..=365",
            });
        }
        Ok(())
    }
}

/// Solar declination (rad) for a day of the year.
pub fn declination(day_of_year: u32) -> f64 {
    (23.45_f64).to_radians() * (2.0 * PI * (284.0 + day_of_year as f64) / 365.0).sin()
}

/// Sun elevation angle (rad) at local clock time `t` seconds after midnight.
///
/// The hour angle is measured from solar noon using the site longitude and
/// UTC offset; the equation of time is neglected.
pub fn sun_elevation(site: &SolarSite, t: f64) -> f64 {
    let delta = declination(site.day_of_year);
    let clock_h = t / SECONDS_PER_HOUR;
    let solar_h = clock_h - site.utc_offset + site.longitude.to_degrees() / 15.0;
    let omega = (15.0 * (solar_h - 12.0)).to_radians();
    let phi = site.latitude;
    let s = phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega.cos();
    s.clamp(-1.0, 1.0).asin()
}

/// Unit in which the clear-sky attenuation coefficients expect elevation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElevationUnit {
    Degrees,
    Radians,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationParams {
    pub a_n: f64,
    pub b_n: f64,
    pub r_n: f64,
    pub alpha_n: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub c_prime: f64,
    pub a_d: f64,
    pub b_d: f64,
    pub c_d: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub a2: f64,
    pub alpha_d: f64,
    pub r_d: f64,
    /// `σ_N` per integer okta 0..=8, linearly interpolated in between.
    pub sigma_n_by_okta: [f64; 9],
    /// `σ_D` per integer okta 0..=8.
    pub sigma_d_by_okta: [f64; 9],
    pub elevation_unit: ElevationUnit,
    /// Below this elevation (rad) all radiation is zero.
    pub min_elevation: f64,
    /// Direct radiation is capped at this multiple of its clear-sky value.
    pub direct_cap: f64,
    /// Time unit (s) of the noise variance rates.
    pub noise_time_unit_s: f64,
}

impl Default for RadiationParams {
    fn default() -> Self {
        Self {
            a_n: 842.3,
            b_n: 0.0614,
            r_n: 1.0430,
            alpha_n: 4.6368,
            a_prime: 1.1354,
            b_prime: 0.1965,
            c_prime: -0.2571,
            a_d: 161.1,
            b_d: 0.0333,
            c_d: 3.68,
            r1: 0.7067,
            r2: -0.2456,
            r3: 0.5625,
            k1: 0.1946,
            k2: 0.1549,
            k3: 0.6034,
            a2: 6.7033,
            alpha_d: 2.2993,
            r_d: 1.0170,
            sigma_n_by_okta: [0.05; 9],
            sigma_d_by_okta: [0.05; 9],
            elevation_unit: ElevationUnit::Degrees,
            min_elevation: 5.0_f64.to_radians(),
            direct_cap: 1.2,
            noise_time_unit_s: SECONDS_PER_HOUR,
        }
    }
}

impl RadiationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a_N", self.a_n),
            ("b_N", self.b_n),
            ("a_D", self.a_d),
            ("b_D", self.b_d),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::OutOfDomain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        for &s in self
            .sigma_n_by_okta
            .iter()
            .chain(self.sigma_d_by_okta.iter())
        {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::OutOfDomain {
                    name: "radiation noise table",
                    value: s,
                    domain: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    fn elevation_in_unit(&self, h: f64) -> f64 {
        match self.elevation_unit {
            ElevationUnit::Degrees => h.to_degrees(),
            ElevationUnit::Radians => h,
        }
    }
}

fn okta_lookup(table: &[f64; 9], okta: f64) -> f64 {
    let o = okta.clamp(0.0, 8.0);
    let i = (o.floor() as usize).min(7);
    let w = o - i as f64;
    table[i] * (1.0 - w) + table[i + 1] * w
}

fn check_okta(okta: f64) -> Result<f64> {
    ensure_finite("okta", okta)?;
    if !(0.0..=8.0).contains(&okta) {
        return Err(Error::OutOfDomain {
            name: "okta",
            value: okta,
            domain: "[0, 8]",
        });
    }
    Ok(okta)
}

fn seasonal(d_t: u32, amplitude: f64, phase: f64) -> f64 {
    amplitude * (2.0 * PI * d_t as f64 / 365.0 + phase).cos()
}

/// Clear-sky direct radiation (W/m²); zero when the sun is not up.
pub fn clear_sky_direct(h: f64, p: &RadiationParams) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    p.a_n * (1.0 - (-p.b_n * p.elevation_in_unit(h)).exp())
}

/// Clear-sky diffuse radiation (W/m²); zero when the sun is not up.
pub fn clear_sky_diffuse(h: f64, p: &RadiationParams) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    p.c_d + p.a_d * (1.0 - (-p.b_d * p.elevation_in_unit(h)).exp())
}

/// Cloud attenuation of direct radiation.
pub fn direct_cloud_factor(okta: f64, d_t: u32, p: &RadiationParams) -> f64 {
    (p.a_prime + seasonal(d_t, p.b_prime, p.c_prime)) / (1.0 + (okta - p.alpha_n).exp())
}

/// Cloud modulation of diffuse radiation.
pub fn diffuse_cloud_factor(okta: f64, d_t: u32, p: &RadiationParams) -> f64 {
    let a0 = p.r1 + seasonal(d_t, p.r2, p.r3);
    let a1 = p.k1 + seasonal(d_t, p.k2, p.k3);
    let c = okta / 8.0;
    a0 + a1 * (1.0 - c) + p.a2 * c.powf(p.alpha_d) * (1.0 - c)
}

/// Standard deviation per unit Brownian increment of the direct noise term
/// `ε_N`. The `1/sin h` factor uses `sin h` floored at `sin(min_elevation)`.
pub fn direct_noise_scale(okta: f64, h: f64, p: &RadiationParams) -> f64 {
    let i0 = clear_sky_direct(h, p);
    if i0 <= 0.0 {
        return 0.0;
    }
    let sin_h = h.sin().max(p.min_elevation.sin());
    p.r_n * okta_lookup(&p.sigma_d_by_okta, okta) / (sin_h * i0)
}

/// Direct (beam) radiation (W/m²).
///
/// `dw` is a Brownian increment with variance `dt / noise_time_unit_s`.
pub fn direct_radiation(okta: f64, h: f64, d_t: u32, p: &RadiationParams, dw: f64) -> Result<f64> {
    let okta = check_okta(okta)?;
    ensure_finite("elevation", h)?;
    ensure_finite("dw", dw)?;
    if h <= p.min_elevation {
        return Ok(0.0);
    }
    let i0 = clear_sky_direct(h, p);
    let eps = direct_noise_scale(okta, h, p) * dw;
    let value = i0 * (direct_cloud_factor(okta, d_t, p) + eps);
    Ok(value.clamp(0.0, p.direct_cap * i0))
}

/// Diffuse radiation (W/m²).
///
/// `dw` is a Brownian increment with variance `dt / noise_time_unit_s`.
pub fn diffuse_radiation(okta: f64, h: f64, d_t: u32, p: &RadiationParams, dw: f64) -> Result<f64> {
    let okta = check_okta(okta)?;
    ensure_finite("elevation", h)?;
    ensure_finite("dw", dw)?;
    if h <= p.min_elevation {
        return Ok(0.0);
    }
    let eps = okta_lookup(&p.sigma_n_by_okta, okta) * p.r_d * dw;
    let value = clear_sky_diffuse(h, p) * (diffuse_cloud_factor(okta, d_t, p) + eps);
    Ok(value.max(0.0))
}

/// Global horizontal radiation (W/m²).
pub fn global_radiation(direct: f64, diffuse: f64, h: f64) -> f64 {
    (direct * h.sin() + diffuse).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvParams {
    /// Panel area (m²).
    pub area: f64,
    /// Conversion efficiency (-).
    pub efficiency: f64,
}

impl Default for PvParams {
    fn default() -> Self {
        Self {
            area: 30_000.0,
            efficiency: 0.2,
        }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("pv area", self.area)?;
        ensure_finite("pv efficiency", self.efficiency)?;
        if self.area < 0.0 {
            return Err(Error::OutOfDomain {
                name: "pv area",
                value: self.area,
                domain: "[0, inf)",
            });
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::OutOfDomain {
                name: "pv efficiency",
                value: self.efficiency,
                domain: "[0, 1]",
            });
        }
        Ok(())
    }
}

/// PV park output (W).
pub fn pv_power(global: f64, p: &PvParams) -> f64 {
    p.efficiency * p.area * global.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrradianceTrace {
    pub time: Vec<f64>,
    pub elevation: Vec<f64>,
    pub direct: Vec<f64>,
    pub diffuse: Vec<f64>,
    pub global: Vec<f64>,
    pub pv_power: Vec<f64>,
}

/// Radiation and PV power along a weather trace.
///
/// Trace time zero is local midnight at the start of `site.day_of_year`. The
/// day index is held within a day and advances at midnight, wrapping after
/// day 365. Noise uses substream 2 of `seed`.
pub fn simulate_irradiance(
    weather: &WeatherTrace,
    site: &SolarSite,
    radiation: &RadiationParams,
    pv: &PvParams,
    seed: u64,
) -> Result<IrradianceTrace> {
    site.validate()?;
    radiation.validate()?;
    pv.validate()?;
    let mut noise = RandomStream::substream(seed, 2);
    let mut out = IrradianceTrace::default();
    let mut prev_t = 0.0;
    for (i, &t) in weather.time.iter().enumerate() {
        let dt = if i == 0 { 0.0 } else { t - prev_t };
        prev_t = t;
        let day_offset = (t / 86_400.0).floor() as u32;
        let day = (site.day_of_year - 1 + day_offset) % 365 + 1;
        let local = SolarSite {
            day_of_year: day,
            ..*site
        };
        let h = sun_elevation(&local, t - day_offset as f64 * 86_400.0);
        let okta = weather.okta(i);
        let var = dt / radiation.noise_time_unit_s;
        let dw_n = noise.wiener_increment(var);
        let dw_d = noise.wiener_increment(var);
        let direct = direct_radiation(okta, h, day, radiation, dw_n)?;
        let diffuse = diffuse_radiation(okta, h, day, radiation, dw_d)?;
        let global = global_radiation(direct, diffuse, h);
        out.time.push(t);
        out.elevation.push(h);
        out.direct.push(direct);
        out.diffuse.push(diffuse);
        out.global.push(global);
        out.pv_power.push(pv_power(global, pv));
    }
    Ok(out)
}
