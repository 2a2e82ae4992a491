//! Wind turbine power extraction and the stationary pitch/tip-speed optimum.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{ensure_finite, Error, Result};
// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Betz limit, 16/27.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

pub fn rpm_to_rad_per_s(rpm: f64) -> f64 {
    rpm * 2.0 * PI / 60.0
}

pub fn rad_per_s_to_rpm(omega: f64) -> f64 {
    omega * 60.0 / (2.0 * PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurbineParams {
    /// Air density (kg/m³).
    pub air_density: f64,
    /// Rotor radius (m).
    pub rotor_radius: f64,
    pub generator_efficiency: f64,
    pub cut_in: f64,
    pub rated_speed: f64,
    pub cut_out: f64,
    /// Rotor speed limits (rad/s).
    pub omega_min: f64,
    pub omega_max: f64,
    /// Pitch limits (deg).
    pub pitch_min: f64,
    pub pitch_max: f64,
    /// Generator power rating (W).
    pub rated_power: f64,
}

impl Default for TurbineParams {
    /// NREL 5 MW reference turbine.
    fn default() -> Self {
        Self {
            air_density: 1.225,
            rotor_radius: 62.94,
            generator_efficiency: 0.944,
            cut_in: 3.0,
            rated_speed: 11.4,
            cut_out: 25.0,
            omega_min: rpm_to_rad_per_s(6.9),
            omega_max: rpm_to_rad_per_s(12.1),
            pitch_min: -5.0,
            pitch_max: 25.0,
            rated_power: 5.0e6,
        }
    }
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("air density", self.air_density),
            ("rotor radius", self.rotor_radius),
            ("generator efficiency", self.generator_efficiency),
            ("rated power", self.rated_power),
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
        if !(self.cut_in < self.rated_speed && self.rated_speed < self.cut_out) {
            return Err(Error::InvalidParameter(alloc::format!(
                "wind speeds must satisfy cut-in {} < rated {} < cut-out {}",
                self.cut_in,
                self.rated_speed,
                self.cut_out
            )));
        }
        if !(0.0 < self.omega_min && self.omega_min < self.omega_max) {
            return Err(Error::InvalidParameter(alloc::format!(
                "rotor speed limits must satisfy 0 < {} < {}",
                self.omega_min,
                self.omega_max
            )));
        }
        if self.pitch_min >= self.pitch_max {
            return Err(Error::InvalidParameter(alloc::format!(
                "pitch limits must satisfy {} < {}",
                self.pitch_min,
                self.pitch_max
            )));
        }
        Ok(())
    }

    /// Tip-speed-ratio interval reachable at wind speed `v`.
    pub fn lambda_bounds(&self, v: f64) -> (f64, f64) {
        (
            self.rotor_radius * self.omega_min / v,
            self.rotor_radius * self.omega_max / v,
        )
    }
}

/// Power carried by the wind through the rotor disc (W).
pub fn available_power(v: f64, p: &TurbineParams) -> f64 {
    let v = v.max(0.0);
    0.5 * p.air_density * PI * p.rotor_radius * p.rotor_radius * v * v * v
}

pub fn tip_speed_ratio(omega: f64, v: f64, radius: f64) -> Result<f64> {
    ensure_finite("rotor speed", omega)?;
    ensure_finite("wind speed", v)?;
    if v <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "wind speed",
            value: v,
            domain: "(0, inf)",
        });
    }
    Ok(radius * omega / v)
}

/// Tabulated power coefficient over tip speed ratio and pitch (deg).
///
/// Values are stored pitch-major: `values[i_theta * lambda.len() + i_lambda]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpSurface {
    lambda: Vec<f64>,
    theta: Vec<f64>,
    values: Vec<f64>,
}

fn check_axis(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "{name} grid needs at least 2 points, got {}",
            grid.len()
        )));
    }
    for w in grid.windows(2) {
        ensure_finite(name, w[0])?;
        ensure_finite(name, w[1])?;
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter(alloc::format!(
                "{name} grid must be strictly ascending"
            )));
        }
    }
    Ok(())
}

impl CpSurface {
    pub fn new(lambda: Vec<f64>, theta: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("lambda", &lambda)?;
        check_axis("theta", &theta)?;
        if values.len() != lambda.len() * theta.len() {
            return Err(Error::LengthMismatch {
                name: "power coefficient table",
                expected: lambda.len() * theta.len(),
                found: values.len(),
            });
        }
        for &c in &values {
            ensure_finite("power coefficient", c)?;
            if c > BETZ_LIMIT {
                return Err(Error::OutOfDomain {
                    name: "power coefficient",
                    value: c,
                    domain: "(-inf, 16/27]",
                });
            }
        }
        Ok(Self {
            lambda,
            theta,
            values,
        })
    }

    /// Samples an analytic surface on a regular grid.
    pub fn from_fn(
        lambda: (f64, f64, usize),
        theta: (f64, f64, usize),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let axis = |(lo, hi, n): (f64, f64, usize)| -> Vec<f64> {
            let n = n.max(2);
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let lambda = axis(lambda);
        let theta = axis(theta);
        let mut values = Vec::with_capacity(lambda.len() * theta.len());
        for &th in &theta {
            for &la in &lambda {
                values.push(f(la, th).max(0.0));
            }
        }
        Self::new(lambda, theta, values)
    }

    /// Default surface: the widely used exponential HAWT fit sampled on
    /// λ ∈ [0.5, 27] and θ ∈ [−5°, 25°] in steps of 0.1.
    pub fn analytic_default() -> Self {
        Self::from_fn((0.5, 27.0, 266), (-5.0, 25.0, 301), analytic_cp)
            .expect("analytic surface is valid")
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, i_theta: usize, i_lambda: usize) -> f64 {
        self.values[i_theta * self.lambda.len() + i_lambda]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Bilinear interpolation, clamped to the grid and floored at zero.
    pub fn lookup(&self, lambda: f64, theta: f64) -> f64 {
        let (i, wl) = locate(&self.lambda, lambda);
        let (j, wt) = locate(&self.theta, theta);
        let c00 = self.value_at(j, i);
        let c01 = self.value_at(j, i + 1);
        let c10 = self.value_at(j + 1, i);
        let c11 = self.value_at(j + 1, i + 1);
        let v = (1.0 - wt) * ((1.0 - wl) * c00 + wl * c01) + wt * ((1.0 - wl) * c10 + wl * c11);
        v.max(0.0)
    }
}

/// Cell index and interpolation weight for `x` on an ascending grid.
fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let n = grid.len();
    let x = x.clamp(grid[0], grid[n - 1]);
    let upper = grid.partition_point(|&g| g <= x).clamp(1, n - 1);
    let i = upper - 1;
    let w = (x - grid[i]) / (grid[i + 1] - grid[i]);
    (i, w.clamp(0.0, 1.0))
}

/// Exponential power coefficient fit with pitch in degrees.
///
/// The fit has a pole at θ = −1° from its `1/(θ³ + 1)` term and exceeds the
/// Betz limit just below it, so it is taken as zero for θ ≤ −1°.
pub fn analytic_cp(lambda: f64, theta: f64) -> f64 {
    const C: [f64; 6] = [0.5176, 116.0, 0.4, 5.0, 21.0, 0.0068];
    if theta <= -1.0 || lambda <= 0.0 {
        return 0.0;
    }
    let inv_li = 1.0 / (lambda + 0.08 * theta) - 0.035 / (theta * theta * theta + 1.0);
    let cp = C[0] * (C[1] * inv_li - C[2] * theta - C[3]) * (-C[4] * inv_li).exp() + C[5] * lambda;
    cp.max(0.0)
}

pub fn cp_lookup(surface: &CpSurface, lambda: f64, theta: f64) -> f64 {
    surface.lookup(lambda, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OperatingPoint {
    pub wind_speed: f64,
    /// Pitch (deg).
    pub theta: f64,
    pub lambda: f64,
    pub cp: f64,
    /// Rotor speed (rad/s).
    pub omega: f64,
    /// Rotor power (W).
    pub rotor_power: f64,
    /// Generator power (W).
    pub generator_power: f64,
    /// Rotor torque (N·m).
    pub torque: f64,
}

/// Points per axis of the coarse scan in [`optimize_stationary`].
pub const SCAN_POINTS: usize = 240;

/// Maximizes the power coefficient over the pitch and tip-speed-ratio box
/// reachable at wind speed `v`, then derives powers, rotor speed and torque.
///
/// A dense scan locates the best cell and a coordinate search with halving
/// steps refines it inside the box. Generator power is capped at the rating;
/// rotor power is reduced to match. Outside the cut-in/cut-out range the
/// turbine is parked and produces nothing.
pub fn optimize_stationary(
    v: f64,
    params: &TurbineParams,
    surface: &CpSurface,
) -> Result<OperatingPoint> {
    ensure_finite("wind speed", v)?;
    if v < params.cut_in || v > params.cut_out {
        return Ok(OperatingPoint {
            wind_speed: v,
            theta: params.pitch_max,
            ..OperatingPoint::default()
        });
    }
    let (l_lo, l_hi) = params.lambda_bounds(v);
    let (t_lo, t_hi) = (params.pitch_min, params.pitch_max);
    let n = SCAN_POINTS;
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;

    let mut best = (f64::NEG_INFINITY, l_lo, t_lo);
    for i in 0..n {
        let th = at(t_lo, t_hi, i);
        for j in 0..n {
            let la = at(l_lo, l_hi, j);
            let c = surface.lookup(la, th);
            if c > best.0 {
                best = (c, la, th);
            }
        }
    }

    let (mut cp, mut la, mut th) = best;
    let mut step_l = (l_hi - l_lo) / (n - 1) as f64;
    let mut step_t = (t_hi - t_lo) / (n - 1) as f64;
    let min_step_l = 1e-9 * (l_hi - l_lo).max(1e-12);
    let min_step_t = 1e-9 * (t_hi - t_lo);
    while step_l > min_step_l || step_t > min_step_t {
        let mut improved = false;
        for (dl, dt) in [(step_l, 0.0), (-step_l, 0.0), (0.0, step_t), (0.0, -step_t)] {
            let cl = (la + dl).clamp(l_lo, l_hi);
            let ct = (th + dt).clamp(t_lo, t_hi);
            let c = surface.lookup(cl, ct);
            if c > cp {
                cp = c;
                la = cl;
                th = ct;
                improved = true;
            }
        }
        if !improved {
            step_l *= 0.5;
            step_t *= 0.5;
        }
    }

    let p_w = available_power(v, params);
    let rotor_power = (p_w * cp).min(params.rated_power / params.generator_efficiency);
    let generator_power = params.generator_efficiency * rotor_power;
    let omega = la * v / params.rotor_radius;
    let torque = if omega > 0.0 {
        rotor_power / omega
    } else {
        0.0
    };
    Ok(OperatingPoint {
        wind_speed: v,
        theta: th,
        lambda: la,
        cp,
        omega,
        rotor_power,
        generator_power,
        torque,
    })
}

/// Stationary optimum for every wind speed in `speeds`.
pub fn power_curve(
    params: &TurbineParams,
    surface: &CpSurface,
    speeds: &[f64],
) -> Result<Vec<OperatingPoint>> {
    speeds
        .iter()
        .map(|&v| optimize_stationary(v, params, surface))
        .collect()
}

/// Generator power (W) at wind speed `v`.
pub fn generator_power(v: f64, params: &TurbineParams, surface: &CpSurface) -> Result<f64> {
    Ok(optimize_stationary(v, params, surface)?.generator_power)
}
