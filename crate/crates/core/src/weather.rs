//! Stochastic weather drivers: wind speed and cloud cover.
//!
//! The wind speed is the sum of a slowly drifting mean component and an
//! Ornstein–Uhlenbeck turbulent component whose reversion rate and intensity
//! both scale with the mean. Cloud cover is a bounded mean-reverting process
//! on `[0, 1]` whose attractor is a logistic transform of a Legendre series.
//! Both are integrated with fixed-step Euler–Maruyama.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::rng::RandomStream;
use crate::{ensure_finite, Error, Result, SECONDS_PER_HOUR};
// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Smallest distance cloud cover keeps from the boundaries of `[0, 1]`.
pub const CLOUD_EPS: f64 = 1e-9;

/// Time unit of the mean wind diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma2Unit {
    /// m·s^-3/2: increments `σ₂·dW` with `dW ~ N(0, dt[s])`.
    PerSecond,
    /// m·s^-1·h^-1/2: increments `σ₂·dW` with `dW ~ N(0, dt[h])`.
    PerHour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindParams {
    /// Turbulence length scale (m).
    pub turbulence_length: f64,
    /// Turbulence intensity (-).
    pub turbulence_intensity: f64,
    /// Mean wind diffusion.
    pub sigma2: f64,
    pub sigma2_unit: Sigma2Unit,
    /// Hold the mean wind speed at this value (m/s) instead of integrating it.
    pub fixed_mean: Option<f64>,
}

impl Default for WindParams {
    fn default() -> Self {
        Self {
            turbulence_length: 170.1,
            turbulence_intensity: 0.2,
            sigma2: (4.0_f64 / 600.0).sqrt(),
            sigma2_unit: Sigma2Unit::PerSecond,
            fixed_mean: None,
        }
    }
}

impl WindParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("turbulence_length", self.turbulence_length)?;
        ensure_finite("turbulence_intensity", self.turbulence_intensity)?;
        ensure_finite("sigma2", self.sigma2)?;
        if self.turbulence_length <= 0.0 {
            return Err(Error::OutOfDomain {
                name: "turbulence_length",
                value: self.turbulence_length,
                domain: "(0, inf)",
            });
        }
        if self.turbulence_intensity <= 0.0 {
            return Err(Error::OutOfDomain {
                name: "turbulence_intensity",
                value: self.turbulence_intensity,
                domain: "(0, inf)",
            });
        }
        if self.sigma2 < 0.0 {
            return Err(Error::OutOfDomain {
                name: "sigma2",
                value: self.sigma2,
                domain: "[0, inf)",
            });
        }
        if let Some(v) = self.fixed_mean {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfDomain {
                    name: "fixed_mean",
                    value: v,
                    domain: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    /// Mean wind diffusion expressed per square-root second.
    pub fn sigma2_per_sqrt_second(&self) -> f64 {
        match self.sigma2_unit {
            Sigma2Unit::PerSecond => self.sigma2,
            Sigma2Unit::PerHour => self.sigma2 / SECONDS_PER_HOUR.sqrt(),
        }
    }

    /// Reversion rate `a` and noise intensity `b` of the turbulent component.
    pub fn turbulence_coefficients(&self, mean_speed: f64) -> (f64, f64) {
        let vm = mean_speed.max(0.0);
        let l = self.turbulence_length;
        let ti = self.turbulence_intensity;
        let rate = PI * vm / (2.0 * l);
        let intensity = (PI * vm * vm * vm * ti * ti / l).sqrt();
        (rate, intensity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindState {
    /// Mean wind speed (m/s).
    pub mean: f64,
    /// Turbulent wind speed (m/s).
    pub turbulent: f64,
}

impl WindState {
    pub fn new(mean: f64, turbulent: f64) -> Self {
        Self { mean, turbulent }
    }

    /// Total wind speed, floored at zero.
    pub fn speed(&self) -> f64 {
        (self.mean + self.turbulent).max(0.0)
    }
}

/// One Euler–Maruyama step of the wind model.
///
/// `dw1` and `dw2` are Brownian increments with variance `dt` (seconds).
pub fn step_wind(
    state: WindState,
    params: &WindParams,
    dt: f64,
    dw1: f64,
    dw2: f64,
) -> Result<WindState> {
    ensure_finite("wind mean", state.mean)?;
    ensure_finite("wind turbulent", state.turbulent)?;
    ensure_finite("dt", dt)?;
    ensure_finite("dw1", dw1)?;
    ensure_finite("dw2", dw2)?;
    if dt <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "dt",
            value: dt,
            domain: "(0, inf)",
        });
    }
    let (rate, intensity) = params.turbulence_coefficients(state.mean);
    let turbulent = state.turbulent - rate * state.turbulent * dt + intensity * dw1;
    let mean = match params.fixed_mean {
        Some(v) => v,
        None => (state.mean + params.sigma2_per_sqrt_second() * dw2).max(0.0),
    };
    Ok(WindState { mean, turbulent })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudParams {
    /// Reversion scale `θ̃` per `time_unit_s`.
    pub reversion: f64,
    /// Diffusion `σ` per square-root `time_unit_s`.
    pub diffusion: f64,
    /// Coefficients of Legendre polynomials of degree 1 through 7.
    pub legendre: [f64; 7],
    /// Hold the attractor at this value instead of the Legendre form.
    pub fixed_mean: Option<f64>,
    /// Time unit (seconds) the rates above refer to.
    pub time_unit_s: f64,
}

impl Default for CloudParams {
    fn default() -> Self {
        Self {
            reversion: 0.187,
            diffusion: 0.835,
            legendre: [-53.1, 14.6, -42.3, 8.8, -58.1, -30.3, -45.7],
            fixed_mean: None,
            time_unit_s: SECONDS_PER_HOUR,
        }
    }
}

impl CloudParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("cloud reversion", self.reversion)?;
        ensure_finite("cloud diffusion", self.diffusion)?;
        for &p in &self.legendre {
            ensure_finite("legendre coefficient", p)?;
        }
        if self.reversion < 0.0 {
            return Err(Error::OutOfDomain {
                name: "cloud reversion",
                value: self.reversion,
                domain: "[0, inf)",
            });
        }
        if self.diffusion < 0.0 {
            return Err(Error::OutOfDomain {
                name: "cloud diffusion",
                value: self.diffusion,
                domain: "[0, inf)",
            });
        }
        if !(self.time_unit_s > 0.0 && self.time_unit_s.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "cloud time unit",
                value: self.time_unit_s,
                domain: "(0, inf)",
            });
        }
        if let Some(mu) = self.fixed_mean {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::OutOfDomain {
                    name: "cloud fixed mean",
                    value: mu,
                    domain: "[0, 1]",
                });
            }
        }
        Ok(())
    }
}

/// Legendre polynomial of degree `n` at `x` by the Bonnet recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn check_fraction(name: &'static str, kappa: f64) -> Result<f64> {
    ensure_finite(name, kappa)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::OutOfDomain {
            name,
            value: kappa,
            domain: "[0, 1]",
        });
    }
    Ok(kappa)
}

/// Attractor of the cloud cover process.
///
/// The Legendre series is evaluated on `2κ − 1 ∈ [−1, 1]`. The logistic is
/// kept inside `[CLOUD_EPS, 1 − CLOUD_EPS]` so the result is strictly inside
/// `(0, 1)` even when the series saturates it in floating point.
pub fn cloud_mean(kappa: f64, params: &CloudParams) -> Result<f64> {
    let kappa = check_fraction("cloud cover", kappa)?;
    if let Some(mu) = params.fixed_mean {
        return Ok(mu);
    }
    let x = 2.0 * kappa - 1.0;
    let series: f64 = params
        .legendre
        .iter()
        .enumerate()
        .map(|(i, p)| p * legendre(i + 1, x))
        .sum();
    Ok(logistic(series).clamp(CLOUD_EPS, 1.0 - CLOUD_EPS))
}

/// One Euler–Maruyama step of cloud cover.
///
/// `dt` is in seconds; `dw` is a Brownian increment with variance
/// `dt / params.time_unit_s`. A state exactly on 0 or 1 has zero drift and
/// diffusion and stays there; any other result is clamped to
/// `[CLOUD_EPS, 1 − CLOUD_EPS]`.
pub fn step_cloud(kappa: f64, params: &CloudParams, dt: f64, dw: f64) -> Result<f64> {
    let kappa = check_fraction("cloud cover", kappa)?;
    ensure_finite("dt", dt)?;
    ensure_finite("dw", dw)?;
    if dt <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "dt",
            value: dt,
            domain: "(0, inf)",
        });
    }
    if kappa == 0.0 || kappa == 1.0 {
        return Ok(kappa);
    }
    let h = dt / params.time_unit_s;
    let spread = kappa * (1.0 - kappa);
    let theta = params.reversion * spread.sqrt();
    let mu = cloud_mean(kappa, params)?;
    let next = kappa + theta * (mu - kappa) * h + params.diffusion * spread * dw;
    Ok(next.clamp(CLOUD_EPS, 1.0 - CLOUD_EPS))
}

/// Cloud fraction to the continuous okta scale.
pub fn to_okta(kappa: f64) -> f64 {
    8.0 * kappa
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatherConfig {
    pub wind: WindParams,
    pub cloud: CloudParams,
    pub initial_mean_wind: f64,
    pub initial_cloud: f64,
    /// Simulated span (s).
    pub horizon: f64,
    /// Sampling interval of the trace (s).
    pub dt: f64,
    /// Largest Euler step of the wind model (s). The turbulent component
    /// decorrelates within seconds, so it is integrated on a finer grid than
    /// the trace is sampled.
    pub wind_substep: f64,
}

impl Default for WeatherConfig {
    fn default() -> Self {
        Self {
            wind: WindParams::default(),
            cloud: CloudParams::default(),
            initial_mean_wind: 10.0,
            initial_cloud: 0.5,
            horizon: 3.0 * 86_400.0,
            dt: 600.0,
            wind_substep: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeatherTrace {
    pub time: Vec<f64>,
    pub mean_wind: Vec<f64>,
    pub turbulent_wind: Vec<f64>,
    pub wind_speed: Vec<f64>,
    pub cloud_cover: Vec<f64>,
}

impl WeatherTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn okta(&self, i: usize) -> f64 {
        to_okta(self.cloud_cover[i])
    }

    fn push(&mut self, t: f64, wind: WindState, kappa: f64) {
        self.time.push(t);
        self.mean_wind.push(wind.mean);
        self.turbulent_wind.push(wind.turbulent);
        self.wind_speed.push(wind.speed());
        self.cloud_cover.push(kappa);
    }
}

/// Largest number of samples a trace may hold.
pub const MAX_SAMPLES: usize = 1 << 28;

/// Number of `dt` steps in `horizon`, requiring an integer ratio.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    ensure_finite("horizon", horizon)?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "dt",
            value: dt,
            domain: "(0, inf)",
        });
    }
    if horizon < 0.0 {
        return Err(Error::OutOfDomain {
            name: "horizon",
            value: horizon,
            domain: "[0, inf)",
        });
    }
    let ratio = horizon / dt;
    if ratio >= MAX_SAMPLES as f64 {
        return Err(Error::InvalidParameter(alloc::format!(
            "horizon/dt = {ratio} exceeds {MAX_SAMPLES} samples"
        )));
    }
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "dt = {dt} does not divide horizon = {horizon}"
        )));
    }
    Ok(n as usize)
}

/// Simulates wind and cloud cover on a regular grid.
///
/// Wind uses substream 0 and cloud cover substream 1 of `seed`, so the trace
/// is a deterministic function of `(config, seed)`.
pub fn simulate_weather(config: &WeatherConfig, seed: u64) -> Result<WeatherTrace> {
    config.wind.validate()?;
    config.cloud.validate()?;
    let steps = step_count(config.horizon, config.dt)?;
    check_fraction("initial cloud cover", config.initial_cloud)?;
    ensure_finite("initial mean wind", config.initial_mean_wind)?;
    ensure_finite("wind substep", config.wind_substep)?;
    if config.wind_substep <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "wind substep",
            value: config.wind_substep,
            domain: "(0, inf)",
        });
    }
    let substeps = (config.dt / config.wind_substep).ceil().max(1.0) as usize;
    let h = config.dt / substeps as f64;

    let mut wind_noise = RandomStream::substream(seed, 0);
    let mut cloud_noise = RandomStream::substream(seed, 1);
    let mut wind = WindState::new(
        config
            .wind
            .fixed_mean
            .unwrap_or(config.initial_mean_wind.max(0.0)),
        0.0,
    );
    let mut kappa = config.initial_cloud;
    let mut trace = WeatherTrace::default();
    trace.push(0.0, wind, kappa);
    let cloud_dt = config.dt / config.cloud.time_unit_s;
    for k in 1..=steps {
        for _ in 0..substeps {
            let dw1 = wind_noise.wiener_increment(h);
            let dw2 = wind_noise.wiener_increment(h);
            wind = step_wind(wind, &config.wind, h, dw1, dw2)?;
        }
        let dw = cloud_noise.wiener_increment(cloud_dt);
        kappa = step_cloud(kappa, &config.cloud, config.dt, dw)?;
        trace.push(k as f64 * config.dt, wind, kappa);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parameters_load() {
        let p = WindParams::default();
        assert_eq!(p.turbulence_length, 170.1);
        assert_eq!(p.turbulence_intensity, 0.2);
        assert_eq!(p.sigma2, (4.0_f64 / 600.0).sqrt());
        let c = CloudParams::default();
        assert_eq!(c.reversion, 0.187);
        assert_eq!(c.diffusion, 0.835);
        assert_eq!(c.legendre, [-53.1, 14.6, -42.3, 8.8, -58.1, -30.3, -45.7]);
    }

    #[test]
    fn calm_turbulence_is_a_fixed_point() {
        let p = WindParams::default();
        for dt in [0.1, 1.0, 600.0] {
            let s = step_wind(WindState::new(10.0, 0.0), &p, dt, 0.0, 0.0).unwrap();
            assert_eq!(s, WindState::new(10.0, 0.0));
        }
    }

    #[test]
    fn turbulence_decays_without_noise() {
        let p = WindParams::default();
        let mut s = WindState::new(10.0, 3.0);
        for _ in 0..50 {
            let next = step_wind(s, &p, 1.0, 0.0, 0.0).unwrap();
            assert!(next.turbulent.abs() < s.turbulent.abs());
            assert!(next.turbulent > 0.0);
            s = next;
        }
    }

    #[test]
    fn mean_wind_clamps_and_fixes() {
        let p = WindParams::default();
        let s = step_wind(WindState::new(0.1, 0.0), &p, 1.0, 0.0, -10.0).unwrap();
        assert_eq!(s.mean, 0.0);
        let fixed = WindParams {
            fixed_mean: Some(8.0),
            ..WindParams::default()
        };
        let s = step_wind(WindState::new(8.0, 0.0), &fixed, 1.0, 0.0, 5.0).unwrap();
        assert_eq!(s.mean, 8.0);
        assert_eq!(WindState::new(2.0, -5.0).speed(), 0.0);
    }

    #[test]
    fn per_hour_sigma_scales() {
        let p = WindParams {
            sigma2: 60.0,
            sigma2_unit: Sigma2Unit::PerHour,
            ..WindParams::default()
        };
        assert!((p.sigma2_per_sqrt_second() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let p = WindParams::default();
        assert!(step_wind(WindState::new(f64::NAN, 0.0), &p, 1.0, 0.0, 0.0).is_err());
        assert!(step_wind(WindState::new(1.0, 0.0), &p, 1.0, f64::INFINITY, 0.0).is_err());
        assert!(step_wind(WindState::new(1.0, 0.0), &p, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn legendre_matches_closed_forms() {
        let closed: [fn(f64) -> f64; 8] = [
            |_| 1.0,
            |x| x,
            |x| 0.5 * (3.0 * x * x - 1.0),
            |x| 0.5 * (5.0 * x.powi(3) - 3.0 * x),
            |x| (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0,
            |x| (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0,
            |x| (231.0 * x.powi(6) - 315.0 * x.powi(4) + 105.0 * x * x - 5.0) / 16.0,
            |x| (429.0 * x.powi(7) - 693.0 * x.powi(5) + 315.0 * x.powi(3) - 35.0 * x) / 16.0,
        ];
        for (n, f) in closed.iter().enumerate() {
            for i in 0..=20 {
                let x = -1.0 + 0.1 * i as f64;
                assert!((legendre(n, x) - f(x)).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn cloud_mean_zero_coefficients_is_half() {
        let p = CloudParams {
            legendre: [0.0; 7],
            ..CloudParams::default()
        };
        assert_eq!(cloud_mean(0.3, &p).unwrap(), 0.5);
    }

    #[test]
    fn cloud_mean_at_half_matches_hand_evaluation() {
        // At x = 0 the odd polynomials vanish; P2 = -1/2, P4 = 3/8, P6 = -5/16.
        let series: f64 = 14.6 * -0.5 + 8.8 * 0.375 + -30.3 * -0.3125;
        let expected = 1.0 / (1.0 + (-series).exp());
        let mu = cloud_mean(0.5, &CloudParams::default()).unwrap();
        assert!((mu - expected).abs() < 1e-14);
        assert!((mu - 0.995_803).abs() < 1e-5);
    }

    #[test]
    fn cloud_boundaries_absorb() {
        let p = CloudParams::default();
        assert_eq!(step_cloud(0.0, &p, 600.0, 3.0).unwrap(), 0.0);
        assert_eq!(step_cloud(1.0, &p, 600.0, -3.0).unwrap(), 1.0);
        assert!(step_cloud(1.2, &p, 600.0, 0.0).is_err());
        assert!(step_cloud(-0.1, &p, 600.0, 0.0).is_err());
    }

    #[test]
    fn cloud_drift_moves_toward_attractor() {
        let p = CloudParams::default();
        let mu = cloud_mean(0.5, &p).unwrap();
        let next = step_cloud(0.5, &p, 600.0, 0.0).unwrap();
        let expected = 0.5 + p.reversion * 0.5 * (mu - 0.5) * (600.0 / 3600.0);
        assert!((next - expected).abs() < 1e-15);
        assert!(next > 0.5);
    }

    #[test]
    fn okta_scale() {
        assert_eq!(to_okta(0.0), 0.0);
        assert_eq!(to_okta(1.0), 8.0);
        assert_eq!(to_okta(0.5), 4.0);
    }

    #[test]
    fn trace_lengths_and_determinism() {
        let mut cfg = WeatherConfig {
            horizon: 0.0,
            ..WeatherConfig::default()
        };
        let t = simulate_weather(&cfg, 1).unwrap();
        assert_eq!(t.len(), 1);
        cfg.horizon = 3.0 * 86_400.0;
        let a = simulate_weather(&cfg, 5).unwrap();
        let b = simulate_weather(&cfg, 5).unwrap();
        assert_eq!(a.len(), 433);
        assert_eq!(a, b);
        let c = simulate_weather(&cfg, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn horizon_must_be_a_multiple_of_dt() {
        let cfg = WeatherConfig {
            horizon: 1000.0,
            dt: 600.0,
            ..WeatherConfig::default()
        };
        assert!(simulate_weather(&cfg, 1).is_err());
        assert!(step_count(1e300, 1e-300).is_err());
    }

    proptest::proptest! {
        #[test]
        fn cloud_mean_stays_inside_unit_interval(kappa in 0.0f64..=1.0) {
            let mu = cloud_mean(kappa, &CloudParams::default()).unwrap();
            proptest::prop_assert!(mu > 0.0 && mu < 1.0);
        }

        #[test]
        fn cloud_step_stays_inside_unit_interval(kappa in 0.0f64..=1.0, dw in -50.0f64..50.0) {
            let next = step_cloud(kappa, &CloudParams::default(), 600.0, dw).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&next));
        }
    }
}
