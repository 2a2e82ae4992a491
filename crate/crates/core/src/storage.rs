//! Battery and sensible thermal storage energy balances.

use crate::{ensure_finite, ensure_non_negative, Error, Result};

/// Result of a clamped integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub value: f64,
    /// The unclamped step left the admissible interval.
    pub saturated: bool,
}

fn clamp_step(value: f64, lo: f64, hi: f64) -> StepOutcome {
    let clamped = value.clamp(lo, hi);
    StepOutcome {
        value: clamped,
        saturated: clamped != value,
    }
}

fn check_dt(dt: f64) -> Result<()> {
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "dt",
            value: dt,
            domain: "(0, inf)",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryParams {
    /// Self-discharge rate (1/s).
    pub self_discharge: f64,
    pub eta_in: f64,
    pub eta_out: f64,
    /// Energy bounds (J).
    pub e_min: f64,
    pub e_max: f64,
}

impl Default for BatteryParams {
    /// 5 MWh battery.
    fn default() -> Self {
        Self {
            self_discharge: 1e-7,
            eta_in: 0.95,
            eta_out: 0.95,
            e_min: 0.0,
            e_max: 5.0 * crate::J_PER_MWH,
        }
    }
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("self discharge", self.self_discharge)?;
        for (name, eta) in [("eta_in", self.eta_in), ("eta_out", self.eta_out)] {
            ensure_finite(name, eta)?;
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::OutOfDomain {
                    name,
                    value: eta,
                    domain: "(0, 1]",
                });
            }
        }
        ensure_finite("e_min", self.e_min)?;
        ensure_finite("e_max", self.e_max)?;
        if self.e_min >= self.e_max {
            return Err(Error::InvalidParameter(alloc::format!(
                "battery bounds must satisfy e_min {} < e_max {}",
                self.e_min,
                self.e_max
            )));
        }
        Ok(())
    }
}

/// Rate of change of stored battery energy (W).
pub fn battery_rhs(energy: f64, p_in: f64, p_out: f64, p: &BatteryParams) -> Result<f64> {
    ensure_finite("battery energy", energy)?;
    ensure_non_negative("battery charge power", p_in)?;
    ensure_non_negative("battery discharge power", p_out)?;
    Ok(-p.self_discharge * energy + p.eta_in * p_in - p_out / p.eta_out)
}

/// Explicit Euler step of the battery, clamped to its energy bounds.
pub fn step_battery(
    energy: f64,
    p_in: f64,
    p_out: f64,
    dt: f64,
    p: &BatteryParams,
) -> Result<StepOutcome> {
    check_dt(dt)?;
    let next = energy + dt * battery_rhs(energy, p_in, p_out, p)?;
    Ok(clamp_step(next, p.e_min, p.e_max))
}

/// Specific heat of the storage medium (J/(kg·K)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecificHeat {
    Constant(f64),
    /// `intercept + slope·T`, T in kelvin.
    Affine {
        intercept: f64,
        slope: f64,
    },
}

impl SpecificHeat {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Affine { intercept, slope } => intercept + slope * t,
        }
    }

    /// `d c_p / dT`.
    pub fn slope(&self) -> f64 {
        match *self {
            Self::Constant(_) => 0.0,
            Self::Affine { slope, .. } => slope,
        }
    }

    /// Closed-form `∫ c_p dT` from `t0` to `t1`.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            Self::Constant(c) => c * (t1 - t0),
            Self::Affine { intercept, slope } => {
                intercept * (t1 - t0) + 0.5 * slope * (t1 * t1 - t0 * t0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    /// Storage medium mass (kg).
    pub mass: f64,
    pub specific_heat: SpecificHeat,
    /// Overall loss conductance to ambient (W/K).
    pub ua: f64,
    pub eta_in: f64,
    /// Temperature bounds (K).
    pub t_min: f64,
    pub t_max: f64,
    /// Ambient temperature (K).
    pub t_ambient: f64,
}

impl Default for ThermalParams {
    /// Solar-salt-like medium sized for 50 MWh between the temperature bounds.
    fn default() -> Self {
        let mut p = Self {
            mass: 1.0,
            specific_heat: SpecificHeat::Constant(1500.0),
            ua: 500.0,
            eta_in: 0.99,
            t_min: 533.0,
            t_max: 838.0,
            t_ambient: 288.0,
        };
        p.mass = mass_for_capacity(50.0 * crate::J_PER_MWH, &p);
        p
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("mass", self.mass)?;
        if self.mass <= 0.0 {
            return Err(Error::OutOfDomain {
                name: "mass",
                value: self.mass,
                domain: "(0, inf)",
            });
        }
        ensure_non_negative("UA", self.ua)?;
        ensure_finite("eta_in", self.eta_in)?;
        if !(0.0..=1.0).contains(&self.eta_in) {
            return Err(Error::OutOfDomain {
                name: "thermal eta_in",
                value: self.eta_in,
                domain: "[0, 1]",
            });
        }
        ensure_finite("t_min", self.t_min)?;
        ensure_finite("t_max", self.t_max)?;
        ensure_finite("t_ambient", self.t_ambient)?;
        if self.t_min >= self.t_max {
            return Err(Error::InvalidParameter(alloc::format!(
                "thermal bounds must satisfy t_min {} < t_max {}",
                self.t_min,
                self.t_max
            )));
        }
        let (lo, hi) = (
            self.specific_heat.at(self.t_min),
            self.specific_heat.at(self.t_max),
        );
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "specific heat must be positive on [{}, {}]",
                self.t_min,
                self.t_max
            )));
        }
        Ok(())
    }

    /// Heat capacity `m·c_p(T)` (J/K).
    pub fn heat_capacity(&self, t: f64) -> f64 {
        self.mass * self.specific_heat.at(t)
    }
}

/// Rate of change of storage temperature (K/s).
pub fn thermal_rhs(t: f64, p_in: f64, q_out: f64, p: &ThermalParams) -> Result<f64> {
    ensure_finite("temperature", t)?;
    ensure_non_negative("thermal charge power", p_in)?;
    ensure_non_negative("thermal heat output", q_out)?;
    Ok((p.eta_in * p_in - p.ua * (t - p.t_ambient) - q_out) / p.heat_capacity(t))
}

/// Explicit Euler step of the thermal store, clamped to its temperature bounds.
pub fn step_thermal(
    t: f64,
    p_in: f64,
    q_out: f64,
    dt: f64,
    p: &ThermalParams,
) -> Result<StepOutcome> {
    check_dt(dt)?;
    let next = t + dt * thermal_rhs(t, p_in, q_out, p)?;
    Ok(clamp_step(next, p.t_min, p.t_max))
}

/// Panels of the composite Simpson rule in [`specific_storage_capacity`].
const SIMPSON_PANELS: usize = 64;

/// Energy stored per kilogram between the temperature bounds (J/kg), by
/// composite Simpson quadrature of the specific heat.
pub fn specific_storage_capacity(p: &ThermalParams) -> f64 {
    let (a, b) = (p.t_min, p.t_max);
    let n = SIMPSON_PANELS;
    let h = (b - a) / n as f64;
    let mut sum = p.specific_heat.at(a) + p.specific_heat.at(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * p.specific_heat.at(a + h * i as f64);
    }
    sum * h / 3.0
}

/// Medium mass (kg) storing `energy` joules between the temperature bounds.
pub fn mass_for_capacity(energy: f64, p: &ThermalParams) -> f64 {
    energy / specific_storage_capacity(p)
}

/// Heat stored above `t_min` (J) at temperature `t`.
pub fn stored_heat(t: f64, p: &ThermalParams) -> f64 {
    p.mass * p.specific_heat.integral(p.t_min, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorageState {
    /// Battery energy (J).
    pub battery_energy: f64,
    /// Thermal store temperature (K).
    pub temperature: f64,
}
