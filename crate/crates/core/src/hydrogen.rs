//! Alkaline electrolysis, hydrogen storage and fuel-cell reconversion.

use crate::{ensure_finite, ensure_non_negative, Error, Result};
// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

pub const FARADAY: f64 = 96_485.0;
pub const ELECTRONS_PER_H2: f64 = 2.0;
/// Molar mass of hydrogen (kg/mol).
pub const MOLAR_MASS_H2: f64 = 0.002016;
pub const GAS_CONSTANT: f64 = 8.314_462_618;
/// Heating value used for fuel-cell reconversion (J/kg).
pub const H2_HEATING_VALUE: f64 = 141_800.0e3;

/// Reaction enthalpy and Gibbs energy of water splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoConstants {
    /// J/mol.
    pub enthalpy: f64,
    /// J/mol.
    pub gibbs: f64,
}

impl Default for ThermoConstants {
    /// Standard conditions.
    fn default() -> Self {
        Self {
            enthalpy: 285_800.0,
            gibbs: 237_200.0,
        }
    }
}

impl ThermoConstants {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("enthalpy", self.enthalpy)?;
        ensure_finite("gibbs", self.gibbs)?;
        if !(self.enthalpy > self.gibbs && self.gibbs > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "need enthalpy {} > gibbs {} > 0",
                self.enthalpy,
                self.gibbs
            )));
        }
        Ok(())
    }

    /// Heat absorbed per mole, `T·ΔS = ΔH − ΔG` (J/mol).
    pub fn heat_demand(&self) -> f64 {
        self.enthalpy - self.gibbs
    }
}

pub fn reversible_voltage(c: &ThermoConstants) -> f64 {
    c.gibbs / (ELECTRONS_PER_H2 * FARADAY)
}

pub fn thermoneutral_voltage(c: &ThermoConstants) -> f64 {
    c.enthalpy / (ELECTRONS_PER_H2 * FARADAY)
}

/// Empirical alkaline stack model. Currents in A, areas in cm², temperature in °C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectrolyzerParams {
    /// Ω·cm².
    pub r1: f64,
    /// Ω·cm²/°C.
    pub r2: f64,
    /// V.
    pub s: f64,
    /// cm²/A.
    pub t1: f64,
    /// cm²·°C/A.
    pub t2: f64,
    /// cm²·°C²/A.
    pub t3: f64,
    /// mA²/cm⁴.
    pub f1: f64,
    pub f2: f64,
    /// Cell area (cm²).
    pub area: f64,
    pub cells: f64,
    /// °C.
    pub temperature: f64,
    /// W.
    pub rated_power: f64,
    pub thermo: ThermoConstants,
    /// Replaces `ΔG/(zF)` when set.
    pub reversible_voltage_override: Option<f64>,
}

impl Default for ElectrolyzerParams {
    /// 2.4 MW stack of 2500 cm² cells sized at 0.4 A/cm².
    fn default() -> Self {
        Self::sized(Self::unsized_defaults(), 2.4e6, 0.4)
    }
}

impl ElectrolyzerParams {
    fn unsized_defaults() -> Self {
        Self {
            r1: 0.8,
            r2: -0.00763,
            s: 0.1795,
            t1: 20.0,
            t2: 0.1,
            t3: 3.5e5,
            f1: 250.0,
            f2: 0.980,
            area: 2500.0,
            cells: 1.0,
            temperature: 80.0,
            rated_power: 2.4e6,
            thermo: ThermoConstants::default(),
            reversible_voltage_override: None,
        }
    }

    /// Sets `rated_power` and picks the cell count so that the stack draws
    /// about `rated_power` at `design_density` (A/cm²).
    pub fn sized(mut base: Self, rated_power: f64, design_density: f64) -> Self {
        base.rated_power = rated_power;
        base.cells = 1.0;
        let current = design_density * base.area;
        let per_cell = current * cell_voltage_unchecked(current, &base);
        base.cells = (rated_power / per_cell).round().max(1.0);
        base
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("s", self.s),
            ("t1", self.t1),
            ("t2", self.t2),
            ("t3", self.t3),
            ("f1", self.f1),
            ("electrolyzer temperature", self.temperature),
        ] {
            ensure_finite(name, v)?;
        }
        self.thermo.validate()?;
        if !(self.area > 0.0) {
            return Err(Error::OutOfDomain {
                name: "cell area",
                value: self.area,
                domain: "(0, inf)",
            });
        }
        if !(self.cells >= 1.0) || self.cells.fract() != 0.0 {
            return Err(Error::OutOfDomain {
                name: "cell count",
                value: self.cells,
                domain: "integer >= 1",
            });
        }
        if !(self.f2 > 0.0 && self.f2 <= 1.0) {
            return Err(Error::OutOfDomain {
                name: "f2",
                value: self.f2,
                domain: "(0, 1]",
            });
        }
        if !(self.f1 > 0.0) {
            return Err(Error::OutOfDomain {
                name: "f1",
                value: self.f1,
                domain: "(0, inf)",
            });
        }
        if !(self.rated_power > 0.0 && self.rated_power.is_finite()) {
            return Err(Error::OutOfDomain {
                name: "electrolyzer rated power",
                value: self.rated_power,
                domain: "(0, inf)",
            });
        }
        if let Some(u) = self.reversible_voltage_override {
            ensure_finite("reversible voltage", u)?;
        }
        if self.r1 + self.r2 * self.temperature <= 0.0 || self.activation_coefficient() <= 0.0 {
            return Err(Error::InvalidParameter(
                "ohmic and activation coefficients must be positive at the operating temperature"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn reversible_voltage(&self) -> f64 {
        self.reversible_voltage_override
            .unwrap_or_else(|| reversible_voltage(&self.thermo))
    }

    /// `t1 + t2/T + t3/T²` (cm²/A).
    pub fn activation_coefficient(&self) -> f64 {
        let t = self.temperature;
        self.t1 + self.t2 / t + self.t3 / (t * t)
    }

    /// Current at rated power (A).
    pub fn max_current(&self) -> Result<f64> {
        current_from_power(self.rated_power, self)
    }
}

fn check_current(i: f64) -> Result<f64> {
    ensure_finite("current", i)?;
    if i < 0.0 {
        return Err(Error::OutOfDomain {
            name: "current",
            value: i,
            domain: "[0, inf)",
        });
    }
    Ok(i)
}

/// Ohmic overvoltage (V).
pub fn ohmic_overvoltage(i: f64, p: &ElectrolyzerParams) -> f64 {
    (p.r1 + p.r2 * p.temperature) * i / p.area
}

/// Activation overvoltage (V), base-10 logarithm.
pub fn activation_overvoltage(i: f64, p: &ElectrolyzerParams) -> f64 {
    p.s * (p.activation_coefficient() * i / p.area + 1.0).log10()
}

fn cell_voltage_unchecked(i: f64, p: &ElectrolyzerParams) -> f64 {
    p.reversible_voltage() + ohmic_overvoltage(i, p) + activation_overvoltage(i, p)
}

/// Cell voltage (V); concentration overvoltage is neglected.
pub fn cell_voltage(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    Ok(cell_voltage_unchecked(check_current(i)?, p))
}

/// First and second derivatives of the cell voltage with respect to current.
fn cell_voltage_derivatives(i: f64, p: &ElectrolyzerParams) -> (f64, f64) {
    let c = p.activation_coefficient() / p.area;
    let arg = c * i + 1.0;
    let k = p.s / core::f64::consts::LN_10;
    let d1 = (p.r1 + p.r2 * p.temperature) / p.area + k * c / arg;
    let d2 = -k * c * c / (arg * arg);
    (d1, d2)
}

/// Stack electrical power (W).
pub fn stack_power(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    let i = check_current(i)?;
    Ok(i * p.cells * cell_voltage_unchecked(i, p))
}

/// `(P, dP/dI, d²P/dI²)` for a non-negative current.
pub fn stack_power_derivatives(i: f64, p: &ElectrolyzerParams) -> Result<(f64, f64, f64)> {
    let i = check_current(i)?;
    let u = cell_voltage_unchecked(i, p);
    let (d1, d2) = cell_voltage_derivatives(i, p);
    Ok((
        p.cells * i * u,
        p.cells * (u + i * d1),
        p.cells * (2.0 * d1 + i * d2),
    ))
}

/// Relative power tolerance of [`current_from_power`].
pub const POWER_INVERSION_TOL: f64 = 1e-9;

/// Inverts [`stack_power`] by safeguarded Newton iteration on a bisection bracket.
pub fn current_from_power(power: f64, p: &ElectrolyzerParams) -> Result<f64> {
    ensure_finite("electrolyzer power", power)?;
    if power < 0.0 {
        return Err(Error::OutOfDomain {
            name: "electrolyzer power",
            value: power,
            domain: "[0, inf)",
        });
    }
    if power == 0.0 {
        return Ok(0.0);
    }
    let tol = POWER_INVERSION_TOL * power.max(1.0);
    let mut lo = 0.0;
    let mut hi = power / (p.cells * p.reversible_voltage().max(1e-3));
    while stack_power(hi, p)? < power {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Solver("cannot bracket electrolyzer current".into()));
        }
    }
    let mut i = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df, _) = stack_power_derivatives(i, p)?;
        let r = f - power;
        if r.abs() <= tol {
            return Ok(i);
        }
        if r > 0.0 {
            hi = i;
        } else {
            lo = i;
        }
        let newton = i - r / df;
        i = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Solver(
        "electrolyzer power inversion did not converge".into(),
    ))
}

/// Faraday efficiency; the current density enters in mA/cm².
pub fn faraday_efficiency(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    let i = check_current(i)?;
    let j = 1000.0 * i / p.area;
    let q = j * j;
    Ok(q / (p.f1 + q) * p.f2)
}

/// Hydrogen production (mol/s).
pub fn hydrogen_rate(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    let eta = faraday_efficiency(i, p)?;
    Ok(p.cells * eta * i / (ELECTRONS_PER_H2 * FARADAY))
}

/// `(f, df/dI, d²f/dI²)` of [`hydrogen_rate`].
pub fn hydrogen_rate_derivatives(i: f64, p: &ElectrolyzerParams) -> Result<(f64, f64, f64)> {
    let i = check_current(i)?;
    let k = 1000.0 / p.area;
    let q = k * k * i * i;
    let f1 = p.f1;
    let scale = p.cells * p.f2 / (ELECTRONS_PER_H2 * FARADAY);
    let den = f1 + q;
    let g = i * q / den;
    let g1 = q * (3.0 * f1 + q) / (den * den);
    let g2 = 2.0 * k * k * i * f1 * (3.0 * f1 - q) / (den * den * den);
    Ok((scale * g, scale * g1, scale * g2))
}

/// Oxygen production (mol/s).
pub fn oxygen_rate(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    Ok(0.5 * hydrogen_rate(i, p)?)
}

/// Heat generated by the overvoltage above thermoneutral (W); negative below it.
pub fn generated_heat(i: f64, p: &ElectrolyzerParams) -> Result<f64> {
    let u = cell_voltage(i, p)?;
    Ok(p.cells * (u - thermoneutral_voltage(&p.thermo)) * i)
}

/// Peng–Robinson equation of state for a pure gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PengRobinson {
    /// K.
    pub critical_temperature: f64,
    /// Pa.
    pub critical_pressure: f64,
    pub acentric_factor: f64,
}

impl Default for PengRobinson {
    /// Hydrogen.
    fn default() -> Self {
        Self {
            critical_temperature: 33.19,
            critical_pressure: 1.313e6,
            acentric_factor: -0.216,
        }
    }
}

impl PengRobinson {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("acentric factor", self.acentric_factor)?;
        for (name, v) in [
            ("critical temperature", self.critical_temperature),
            ("critical pressure", self.critical_pressure),
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
        Ok(())
    }

    /// Co-volume `b` (m³/mol).
    pub fn covolume(&self) -> f64 {
        0.07780 * GAS_CONSTANT * self.critical_temperature / self.critical_pressure
    }

    /// Temperature-dependent attraction `a·α(T)` (Pa·m⁶/mol²).
    pub fn attraction(&self, t: f64) -> f64 {
        let tc = self.critical_temperature;
        let a = 0.45724 * GAS_CONSTANT * GAS_CONSTANT * tc * tc / self.critical_pressure;
        let w = self.acentric_factor;
        let kappa = 0.37464 + 1.54226 * w - 0.26992 * w * w;
        let root = 1.0 + kappa * (1.0 - (t / tc).sqrt());
        a * root * root
    }

    /// Pressure (Pa) at molar volume `vm` (m³/mol) and temperature `t` (K).
    pub fn pressure(&self, vm: f64, t: f64) -> Result<f64> {
        ensure_finite("molar volume", vm)?;
        ensure_finite("temperature", t)?;
        let b = self.covolume();
        if vm <= b {
            return Err(Error::OutOfDomain {
                name: "molar volume",
                value: vm,
                domain: "(b, inf)",
            });
        }
        Ok(GAS_CONSTANT * t / (vm - b) - self.attraction(t) / (vm * vm + 2.0 * b * vm - b * b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankParams {
    /// m³.
    pub volume: f64,
    /// K.
    pub temperature: f64,
    /// mol.
    pub capacity: f64,
    pub eos: PengRobinson,
}

impl Default for TankParams {
    /// 1000 kg in 30 m³ at 25 °C.
    fn default() -> Self {
        Self {
            volume: 30.0,
            temperature: 298.15,
            capacity: 1000.0 / MOLAR_MASS_H2,
            eos: PengRobinson::default(),
        }
    }
}

impl TankParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tank volume", self.volume),
            ("tank temperature", self.temperature),
            ("tank capacity", self.capacity),
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
        self.eos.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankState {
    /// mol.
    pub amount: f64,
    /// The last step was clamped to `[0, capacity]`.
    pub saturated: bool,
}

/// Explicit Euler step of the tank mass balance.
pub fn tank_step(amount: f64, f_in: f64, f_out: f64, dt: f64, p: &TankParams) -> Result<TankState> {
    ensure_finite("tank amount", amount)?;
    ensure_non_negative("hydrogen inflow", f_in)?;
    ensure_non_negative("hydrogen outflow", f_out)?;
    ensure_non_negative("dt", dt)?;
    let raw = amount + dt * (f_in - f_out);
    let next = raw.clamp(0.0, p.capacity);
    Ok(TankState {
        amount: next,
        saturated: next != raw,
    })
}

/// Tank pressure (Pa) from the cubic equation of state.
pub fn tank_pressure(amount: f64, p: &TankParams) -> Result<f64> {
    ensure_finite("tank amount", amount)?;
    if amount <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "tank amount",
            value: amount,
            domain: "(0, inf)",
        });
    }
    p.eos.pressure(p.volume / amount, p.temperature)
}

/// Ideal-gas tank pressure (Pa).
pub fn ideal_gas_pressure(amount: f64, p: &TankParams) -> f64 {
    amount * GAS_CONSTANT * p.temperature / p.volume
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelCellParams {
    pub efficiency: f64,
}

impl Default for FuelCellParams {
    fn default() -> Self {
        Self { efficiency: 0.5 }
    }
}

impl FuelCellParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("fuel cell efficiency", self.efficiency)?;
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::OutOfDomain {
                name: "fuel cell efficiency",
                value: self.efficiency,
                domain: "(0, 1]",
            });
        }
        Ok(())
    }

    /// Electrical energy per mole of hydrogen (J/mol).
    pub fn energy_per_mol(&self) -> f64 {
        H2_HEATING_VALUE * self.efficiency * MOLAR_MASS_H2
    }
}

/// Fuel-cell electrical output (W) for a hydrogen draw in mol/s.
pub fn fuel_cell_power(d_h2: f64, p: &FuelCellParams) -> Result<f64> {
    ensure_non_negative("hydrogen draw", d_h2)?;
    Ok(p.energy_per_mol() * d_h2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ElectrolyzerParams {
        ElectrolyzerParams::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn standard_voltages() {
        let c = ThermoConstants::default();
        assert!(close(reversible_voltage(&c), 1.229, 1e-3));
        assert!(close(thermoneutral_voltage(&c), 1.481, 1e-3));
        let doubled = ThermoConstants {
            gibbs: 2.0 * c.gibbs,
            enthalpy: 3.0 * c.gibbs,
        };
        assert!(close(
            reversible_voltage(&doubled),
            2.0 * reversible_voltage(&c),
            1e-12
        ));
        let unit = ThermoConstants {
            gibbs: 192_970.0,
            enthalpy: 200_000.0,
        };
        assert!(close(reversible_voltage(&unit), 1.0, 1e-15));
        let gap = thermoneutral_voltage(&c) - reversible_voltage(&c);
        assert!(close(gap, 48_600.0 / 192_970.0, 1e-12));
        assert!(close(gap, 0.252, 1e-3));
        assert!(ThermoConstants {
            enthalpy: 1.0,
            gibbs: 2.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn overvoltages_at_reference_density() {
        let p = params();
        let i = 0.2 * p.area;
        assert!(close(ohmic_overvoltage(i, &p), 0.03792, 1e-9));
        assert!(close(activation_overvoltage(i, &p), 0.2158, 5e-4));
        let expected_act = 0.1795 * (74.688_75_f64 * 0.2 + 1.0).log10();
        assert!(close(activation_overvoltage(i, &p), expected_act, 1e-9));
        assert_eq!(cell_voltage(0.0, &p).unwrap(), p.reversible_voltage());
        assert!(cell_voltage(-1.0, &p).is_err());
    }

    #[test]
    fn default_sizing_hits_rated_power() {
        let p = params();
        p.validate().unwrap();
        let design = stack_power(0.4 * p.area, &p).unwrap();
        let per_cell = design / p.cells;
        assert!((design - 2.4e6).abs() <= 0.5 * per_cell);
        let i_max = p.max_current().unwrap();
        assert!(i_max > 0.0 && (i_max - 1000.0).abs() < 5.0);
    }

    #[test]
    fn stack_power_scaling_and_monotonicity() {
        let p = params();
        assert_eq!(stack_power(0.0, &p).unwrap(), 0.0);
        let doubled = ElectrolyzerParams {
            cells: 2.0 * p.cells,
            ..p
        };
        assert!(close(
            stack_power(500.0, &doubled).unwrap(),
            2.0 * stack_power(500.0, &p).unwrap(),
            1e-6
        ));
        let mut prev_p = -1.0;
        let mut prev_u = 0.0;
        for k in 0..=2000 {
            let i = k as f64;
            let pw = stack_power(i, &p).unwrap();
            let u = cell_voltage(i, &p).unwrap();
            assert!(pw > prev_p);
            assert!(u >= prev_u && u >= p.reversible_voltage());
            prev_p = pw;
            prev_u = u;
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = params();
        for &i in &[5.0, 80.0, 250.0, 700.0, 1200.0] {
            let h = 1e-3 * i;
            let (_, d1, d2) = stack_power_derivatives(i, &p).unwrap();
            let fd1 =
                (stack_power(i + h, &p).unwrap() - stack_power(i - h, &p).unwrap()) / (2.0 * h);
            let fd2 = (stack_power(i + h, &p).unwrap() - 2.0 * stack_power(i, &p).unwrap()
                + stack_power(i - h, &p).unwrap())
                / (h * h);
            assert!((d1 - fd1).abs() <= 1e-6 * d1.abs());
            assert!((d2 - fd2).abs() <= 1e-3 * d2.abs().max(1e-3));
            let (_, g1, g2) = hydrogen_rate_derivatives(i, &p).unwrap();
            let f = |x: f64| hydrogen_rate(x, &p).unwrap();
            let fg1 = (f(i + h) - f(i - h)) / (2.0 * h);
            let fg2 = (f(i + h) - 2.0 * f(i) + f(i - h)) / (h * h);
            assert!((g1 - fg1).abs() <= 1e-6 * g1.abs());
            assert!((g2 - fg2).abs() <= 1e-3 * g2.abs().max(1e-12));
        }
    }

    #[test]
    fn power_inversion_cases() {
        let p = params();
        assert_eq!(current_from_power(0.0, &p).unwrap(), 0.0);
        assert!(current_from_power(-1.0, &p).is_err());
        assert!(current_from_power(f64::NAN, &p).is_err());
        let i_max = p.max_current().unwrap();
        let target = stack_power(i_max, &p).unwrap();
        assert!((target - p.rated_power).abs() <= 1e-9 * p.rated_power);
    }

    #[test]
    fn faraday_efficiency_cases() {
        let p = params();
        assert_eq!(faraday_efficiency(0.0, &p).unwrap(), 0.0);
        let i = 0.1 * p.area;
        assert!(close(faraday_efficiency(i, &p).unwrap(), 0.9561, 1e-4));
        assert!(close(
            faraday_efficiency(i, &p).unwrap(),
            1e4 / (250.0 + 1e4) * 0.98,
            1e-12
        ));
        assert!(close(faraday_efficiency(1e9, &p).unwrap(), 0.98, 1e-9));
    }

    #[test]
    fn hydrogen_rate_cases() {
        let p = ElectrolyzerParams {
            cells: 1.0,
            f1: 1e-30,
            f2: 1.0,
            ..params()
        };
        assert!(close(hydrogen_rate(100.0, &p).unwrap(), 5.1822e-4, 1e-8));
        assert_eq!(hydrogen_rate(0.0, &p).unwrap(), 0.0);
        let q = params();
        for &i in &[1.0, 50.0, 900.0] {
            assert!(close(
                oxygen_rate(i, &q).unwrap(),
                hydrogen_rate(i, &q).unwrap() / 2.0,
                1e-18
            ));
        }
    }

    #[test]
    fn heat_generation_sign() {
        let p = params();
        let mut seen_positive = false;
        for k in 0..=200 {
            let i = 10.0 * k as f64;
            let u = cell_voltage(i, &p).unwrap();
            let q = generated_heat(i, &p).unwrap();
            if u >= thermoneutral_voltage(&p.thermo) {
                assert!(q >= 0.0);
                seen_positive |= q > 0.0;
            } else {
                assert!(q <= 0.0);
            }
        }
        assert!(seen_positive);
    }

    #[test]
    fn tank_balance_cases() {
        let t = TankParams::default();
        let s = tank_step(100.0, 2.0, 2.0, 600.0, &t).unwrap();
        assert_eq!(s.amount, 100.0);
        assert!(!s.saturated);
        let s = tank_step(0.0, 1.0, 0.0, 600.0, &t).unwrap();
        assert_eq!(s.amount, 600.0);
        let s = tank_step(0.0, 0.0, 1.0, 600.0, &t).unwrap();
        assert_eq!(s.amount, 0.0);
        assert!(s.saturated);
        assert!(tank_step(0.0, -1.0, 0.0, 600.0, &t).is_err());
    }

    #[test]
    fn peng_robinson_limits() {
        let t = TankParams::default();
        let dilute = 10.0;
        assert!(t.volume / dilute > 1.0);
        let pr = tank_pressure(dilute, &t).unwrap();
        let ideal = ideal_gas_pressure(dilute, &t);
        assert!((pr - ideal).abs() / ideal < 5e-3);
        let full = 496_032.0;
        let ideal_full = ideal_gas_pressure(full, &t);
        assert!(close(ideal_full, 41.0e6, 0.05e6));
        assert!(tank_pressure(full, &t).unwrap() > ideal_full);
        let mut prev = 0.0;
        for k in 1..=100 {
            let n = 6000.0 * k as f64;
            let pr = tank_pressure(n, &t).unwrap();
            assert!(pr > prev);
            prev = pr;
        }
        assert!(tank_pressure(0.0, &t).is_err());
        let b = t.eos.covolume();
        assert!(t.eos.pressure(b, 300.0).is_err());
    }

    #[test]
    fn fuel_cell_cases() {
        let p = FuelCellParams { efficiency: 0.6 };
        assert_eq!(fuel_cell_power(0.0, &p).unwrap(), 0.0);
        assert!(close(fuel_cell_power(1.0, &p).unwrap(), 171_521.28, 1e-6));
        let ideal = FuelCellParams { efficiency: 1.0 };
        let mwh = fuel_cell_power(1000.0 / MOLAR_MASS_H2, &ideal).unwrap() / crate::J_PER_MWH;
        assert!(close(mwh, 39.39, 0.01));
        assert!(FuelCellParams { efficiency: 0.0 }.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn power_round_trip(frac in 0.0f64..=1.0) {
            let p = params();
            let target = frac * p.rated_power;
            let i = current_from_power(target, &p).unwrap();
            let back = stack_power(i, &p).unwrap();
            proptest::prop_assert!((back - target).abs() <= 1e-9 * target.max(1.0));
        }

        #[test]
        fn faraday_bounded_monotone(i in 0.0f64..5000.0, d in 0.0f64..100.0) {
            let p = params();
            let a = faraday_efficiency(i, &p).unwrap();
            let b = faraday_efficiency(i + d, &p).unwrap();
            proptest::prop_assert!((0.0..=p.f2).contains(&a));
            proptest::prop_assert!(b >= a);
        }

        #[test]
        fn tank_conserves_mass(flows in proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..50)) {
            let t = TankParams { capacity: 1e12, ..TankParams::default() };
            let n0 = 1e6;
            let mut n = n0;
            let mut net = 0.0;
            for (fi, fo) in flows {
                n = tank_step(n, fi, fo, 600.0, &t).unwrap().amount;
                net += 600.0 * (fi - fo);
            }
            proptest::prop_assert!(((n - n0) - net).abs() <= 1e-6);
        }
    }
}
