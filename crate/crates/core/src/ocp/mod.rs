//! Economic dispatch of the storage plant: disturbances, prices, the optimal
//! control problem, its transcription and open-loop replay.
//!
//! Market controls (battery sale and purchase, heat sale, hydrogen sale) are
//! held over each control interval. Allocations of surplus and deficit
//! (`P_b_in`, `P_t_in`, `P_el`, `I`, `d_b`, `d_t`, `d_H2`, `s_d`) are decided
//! per sample, since the surplus they must match changes every sample.

mod transcription;

use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::hydrogen::{
    current_from_power, hydrogen_rate, ElectrolyzerParams, FuelCellParams, TankParams,
    MOLAR_MASS_H2,
};
use crate::nlp::{self, NlpSolution, SolverOptions};
use crate::rng::RandomStream;
use crate::storage::{battery_rhs, stored_heat, thermal_rhs, BatteryParams, ThermalParams};
use crate::{ensure_finite, Error, Result, J_PER_MWH, SECONDS_PER_HOUR};

pub use transcription::TranscribedOcp;

/// Random stream index used for price generation.
pub const PRICE_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    pub battery: BatteryParams,
    pub thermal: ThermalParams,
    pub electrolyzer: ElectrolyzerParams,
    pub tank: TankParams,
    pub fuel_cell: FuelCellParams,
    /// Heat-to-electricity efficiency of the steam turbine.
    pub steam_efficiency: f64,
}

impl Default for PlantModel {
    fn default() -> Self {
        Self {
            battery: BatteryParams::default(),
            thermal: ThermalParams::default(),
            electrolyzer: ElectrolyzerParams::default(),
            tank: TankParams::default(),
            fuel_cell: FuelCellParams::default(),
            steam_efficiency: 0.4,
        }
    }
}

impl PlantModel {
    pub fn validate(&self) -> Result<()> {
        self.battery.validate()?;
        self.thermal.validate()?;
        self.electrolyzer.validate()?;
        self.tank.validate()?;
        self.fuel_cell.validate()?;
        ensure_finite("steam efficiency", self.steam_efficiency)?;
        if !(self.steam_efficiency > 0.0 && self.steam_efficiency <= 1.0) {
            return Err(Error::OutOfDomain {
                name: "steam efficiency",
                value: self.steam_efficiency,
                domain: "(0, 1]",
            });
        }
        Ok(())
    }

    pub fn check_state(&self, x: &PlantState) -> Result<()> {
        let checks = [
            (
                "initial battery energy",
                x.battery_energy,
                self.battery.e_min,
                self.battery.e_max,
            ),
            (
                "initial temperature",
                x.temperature,
                self.thermal.t_min,
                self.thermal.t_max,
            ),
            ("initial hydrogen", x.hydrogen, 0.0, self.tank.capacity),
        ];
        for (name, v, lo, hi) in checks {
            ensure_finite(name, v)?;
            if v < lo || v > hi {
                return Err(Error::OutOfDomain {
                    name,
                    value: v,
                    domain: "state bounds",
                });
            }
        }
        Ok(())
    }
}

/// Storage contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    /// J.
    pub battery_energy: f64,
    /// K.
    pub temperature: f64,
    /// mol.
    pub hydrogen: f64,
}

impl Default for PlantState {
    /// Half-full battery, warm thermal store, 200 kg of hydrogen.
    fn default() -> Self {
        Self {
            battery_energy: 2.5 * J_PER_MWH,
            temperature: 700.0,
            hydrogen: 200.0 / MOLAR_MASS_H2,
        }
    }
}

/// Upper limits of the control variables; all lower limits are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLimits {
    /// W.
    pub battery_charge: f64,
    /// W.
    pub thermal_charge: f64,
    /// W.
    pub battery_sell: f64,
    /// Grid import into the battery (W).
    pub battery_buy: f64,
    /// W.
    pub heat_sell: f64,
    /// mol/s.
    pub hydrogen_sell: f64,
    /// Battery discharge to cover demand (W).
    pub battery_discharge: f64,
    /// Steam-turbine electrical output (W).
    pub steam_turbine: f64,
    /// Hydrogen draw of the fuel cell (mol/s).
    pub fuel_cell_draw: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            battery_charge: 5e6,
            thermal_charge: 10e6,
            battery_sell: 10e6,
            battery_buy: 2e6,
            heat_sell: 10e6,
            hydrogen_sell: 10.0,
            battery_discharge: 10e6,
            steam_turbine: 5e6,
            fuel_cell_draw: 20.0,
        }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("battery charge limit", self.battery_charge),
            ("thermal charge limit", self.thermal_charge),
            ("battery sell limit", self.battery_sell),
            ("battery buy limit", self.battery_buy),
            ("heat sell limit", self.heat_sell),
            ("hydrogen sell limit", self.hydrogen_sell),
            ("battery discharge limit", self.battery_discharge),
            ("steam turbine limit", self.steam_turbine),
            ("fuel cell draw limit", self.fuel_cell_draw),
        ] {
            crate::ensure_non_negative(name, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcpConfig {
    /// s.
    pub horizon: f64,
    /// s.
    pub dt_sample: f64,
    /// s.
    pub dt_control: f64,
    pub limits: ControlLimits,
    /// Penalty on unmet demand (currency/MWh); `None` uses ten times the
    /// highest electricity price.
    pub slack_penalty: Option<f64>,
    /// Value storage contents left at the end of the horizon.
    pub terminal_value: bool,
}

impl Default for OcpConfig {
    fn default() -> Self {
        Self {
            horizon: 3.0 * 86_400.0,
            dt_sample: 600.0,
            dt_control: 3600.0,
            limits: ControlLimits::default(),
            slack_penalty: None,
            terminal_value: true,
        }
    }
}

fn integer_ratio(name: &'static str, num: f64, den: f64) -> Result<usize> {
    let r = num / den;
    let k = r.round();
    if !(r.is_finite() && (r - k).abs() <= 1e-9 * r.abs().max(1.0) && k >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "{name}: {num} is not an integer multiple of {den}"
        )));
    }
    Ok(k as usize)
}

impl OcpConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt_sample", self.dt_sample),
            ("dt_control", self.dt_control),
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
        crate::ensure_non_negative("horizon", self.horizon)?;
        if let Some(p) = self.slack_penalty {
            crate::ensure_non_negative("slack penalty", p)?;
        }
        self.limits.validate()?;
        let per = integer_ratio("control interval", self.dt_control, self.dt_sample)?;
        if per == 0 {
            return Err(Error::InvalidParameter(
                "control interval shorter than the sample time".into(),
            ));
        }
        integer_ratio("horizon", self.horizon, self.dt_control)?;
        Ok(())
    }

    pub fn samples_per_interval(&self) -> Result<usize> {
        self.validate()?;
        integer_ratio("control interval", self.dt_control, self.dt_sample)
    }

    pub fn intervals(&self) -> Result<usize> {
        self.validate()?;
        integer_ratio("horizon", self.horizon, self.dt_control)
    }

    pub fn samples(&self) -> Result<usize> {
        Ok(self.intervals()? * self.samples_per_interval()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceSeries {
    pub mean: f64,
    pub std: f64,
}

/// Hourly Gaussian price draws, floored at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceConfig {
    /// currency/MWh.
    pub electricity: PriceSeries,
    /// currency/MWh of heat.
    pub heat: PriceSeries,
    /// currency/kg.
    pub hydrogen: PriceSeries,
}

impl Default for PriceConfig {
    fn default() -> Self {
        Self {
            electricity: PriceSeries {
                mean: 50.0,
                std: 10.0,
            },
            heat: PriceSeries {
                mean: 20.0,
                std: 5.0,
            },
            hydrogen: PriceSeries {
                mean: 3.0,
                std: 0.5,
            },
        }
    }
}

/// Per-sample prices.
#[derive(Debug, Clone, PartialEq)]
pub struct Prices {
    pub electricity: Vec<f64>,
    pub heat: Vec<f64>,
    pub hydrogen: Vec<f64>,
}

/// Draws one price per hour and holds it over the samples of that hour.
pub fn generate_prices(
    cfg: &PriceConfig,
    samples: usize,
    samples_per_hour: usize,
    seed: u64,
) -> Result<Prices> {
    for (name, s) in [
        ("electricity price", cfg.electricity),
        ("heat price", cfg.heat),
        ("hydrogen price", cfg.hydrogen),
    ] {
        ensure_finite(name, s.mean)?;
        crate::ensure_non_negative(name, s.std)?;
    }
    if samples_per_hour == 0 {
        return Err(Error::InvalidParameter(
            "samples per hour must be positive".into(),
        ));
    }
    let mut rng = RandomStream::substream(seed, PRICE_STREAM);
    let mut out = Prices {
        electricity: Vec::with_capacity(samples),
        heat: Vec::with_capacity(samples),
        hydrogen: Vec::with_capacity(samples),
    };
    let mut current = [0.0; 3];
    for k in 0..samples {
        if k % samples_per_hour == 0 {
            for (slot, s) in current
                .iter_mut()
                .zip([cfg.electricity, cfg.heat, cfg.hydrogen])
            {
                *slot = rng.normal(s.mean, s.std).max(0.0);
            }
        }
        out.electricity.push(current[0]);
        out.heat.push(current[1]);
        out.hydrogen.push(current[2]);
    }
    Ok(out)
}

/// Exogenous inputs per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceTrajectory {
    /// Wind plus solar production (W).
    pub production: Vec<f64>,
    /// Electricity demand (W).
    pub demand: Vec<f64>,
    /// Production above demand, to be stored (W).
    pub surplus: Vec<f64>,
    /// Demand above production, to be withdrawn from storage (W).
    pub deficit: Vec<f64>,
    /// currency/MWh.
    pub electricity_price: Vec<f64>,
    /// currency/MWh.
    pub heat_price: Vec<f64>,
    /// currency/kg.
    pub hydrogen_price: Vec<f64>,
}

impl DisturbanceTrajectory {
    pub fn len(&self) -> usize {
        self.surplus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surplus.is_empty()
    }

    /// Same trajectory with every price multiplied by `factor`.
    pub fn with_scaled_prices(&self, factor: f64) -> Self {
        let scale = |v: &[f64]| v.iter().map(|p| p * factor).collect();
        Self {
            electricity_price: scale(&self.electricity_price),
            heat_price: scale(&self.heat_price),
            hydrogen_price: scale(&self.hydrogen_price),
            ..self.clone()
        }
    }
}

fn check_len(name: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            name,
            expected,
            found,
        });
    }
    Ok(())
}

/// Splits production against demand into surplus and deficit.
pub fn build_disturbances(
    production: &[f64],
    demand: &[f64],
    prices: &Prices,
) -> Result<DisturbanceTrajectory> {
    let n = production.len();
    check_len("demand", n, demand.len())?;
    check_len("electricity price", n, prices.electricity.len())?;
    check_len("heat price", n, prices.heat.len())?;
    check_len("hydrogen price", n, prices.hydrogen.len())?;
    for (&p, &d) in production.iter().zip(demand) {
        crate::ensure_non_negative("production", p)?;
        crate::ensure_non_negative("demand", d)?;
    }
    for v in prices
        .electricity
        .iter()
        .chain(&prices.heat)
        .chain(&prices.hydrogen)
    {
        ensure_finite("price", *v)?;
    }
    Ok(DisturbanceTrajectory {
        surplus: production
            .iter()
            .zip(demand)
            .map(|(p, d)| (p - d).max(0.0))
            .collect(),
        deficit: production
            .iter()
            .zip(demand)
            .map(|(p, d)| (d - p).max(0.0))
            .collect(),
        production: production.to_vec(),
        demand: demand.to_vec(),
        electricity_price: prices.electricity.clone(),
        heat_price: prices.heat.clone(),
        hydrogen_price: prices.hydrogen.clone(),
    })
}

/// Per-sample controls in SI units; market controls repeat within an interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlTrajectory {
    /// `P_b,in` (W).
    pub battery_charge: Vec<f64>,
    /// `P_t,in` (W).
    pub thermal_charge: Vec<f64>,
    /// `P_el` (W).
    pub electrolyzer_power: Vec<f64>,
    /// `P_b,out` (W).
    pub battery_sell: Vec<f64>,
    /// `P_b,bo` (W).
    pub battery_buy: Vec<f64>,
    /// `Q_t,out` (W).
    pub heat_sell: Vec<f64>,
    /// `f_H2,out` (mol/s).
    pub hydrogen_sell: Vec<f64>,
    /// `I` (A).
    pub current: Vec<f64>,
    /// `d_b` (W).
    pub battery_discharge: Vec<f64>,
    /// `d_t` (W).
    pub steam_power: Vec<f64>,
    /// `d_H2` (mol/s).
    pub fuel_cell_draw: Vec<f64>,
    /// `d_fc` (W).
    pub fuel_cell_power: Vec<f64>,
    /// Unmet demand `s_d` (W).
    pub slack: Vec<f64>,
}

impl ControlTrajectory {
    pub fn zeros(samples: usize) -> Self {
        let z = vec![0.0; samples];
        Self {
            battery_charge: z.clone(),
            thermal_charge: z.clone(),
            electrolyzer_power: z.clone(),
            battery_sell: z.clone(),
            battery_buy: z.clone(),
            heat_sell: z.clone(),
            hydrogen_sell: z.clone(),
            current: z.clone(),
            battery_discharge: z.clone(),
            steam_power: z.clone(),
            fuel_cell_draw: z.clone(),
            fuel_cell_power: z.clone(),
            slack: z,
        }
    }

    pub fn len(&self) -> usize {
        self.battery_charge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.battery_charge.is_empty()
    }

    fn columns(&self) -> [&Vec<f64>; 13] {
        [
            &self.battery_charge,
            &self.thermal_charge,
            &self.electrolyzer_power,
            &self.battery_sell,
            &self.battery_buy,
            &self.heat_sell,
            &self.hydrogen_sell,
            &self.current,
            &self.battery_discharge,
            &self.steam_power,
            &self.fuel_cell_draw,
            &self.fuel_cell_power,
            &self.slack,
        ]
    }

    fn check(&self, samples: usize) -> Result<()> {
        for col in self.columns() {
            check_len("control trajectory", samples, col.len())?;
        }
        Ok(())
    }
}

/// States at the `N + 1` sample boundaries, SI units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateTrajectory {
    /// s from the start of the horizon.
    pub time: Vec<f64>,
    /// J.
    pub battery_energy: Vec<f64>,
    /// K.
    pub temperature: Vec<f64>,
    /// mol.
    pub hydrogen: Vec<f64>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn state(&self, k: usize) -> PlantState {
        PlantState {
            battery_energy: self.battery_energy[k],
            temperature: self.temperature[k],
            hydrogen: self.hydrogen[k],
        }
    }

    fn push(&mut self, t: f64, x: PlantState) {
        self.time.push(t);
        self.battery_energy.push(x.battery_energy);
        self.temperature.push(x.temperature);
        self.hydrogen.push(x.hydrogen);
    }
}

/// Demand penalty actually used (currency/MWh).
pub fn slack_penalty(cfg: &OcpConfig, d: &DisturbanceTrajectory) -> f64 {
    cfg.slack_penalty.unwrap_or_else(|| {
        let max = d.electricity_price.iter().fold(0.0_f64, |m, p| m.max(*p));
        if max > 0.0 {
            10.0 * max
        } else {
            1.0
        }
    })
}

/// Price applied to the terminal storage contents (currency/MWh); zero when
/// the terminal value is disabled.
pub fn terminal_price(cfg: &OcpConfig, d: &DisturbanceTrajectory) -> f64 {
    if !cfg.terminal_value || d.is_empty() {
        return 0.0;
    }
    d.electricity_price.iter().sum::<f64>() / d.len() as f64
}

/// Electricity recoverable from the storage contents (J).
pub fn usable_energy(model: &PlantModel, x: &PlantState) -> f64 {
    model.battery.eta_out * x.battery_energy
        + model.steam_efficiency * stored_heat(x.temperature, &model.thermal)
        + model.fuel_cell.energy_per_mol() * x.hydrogen
}

/// Profit over the horizon (currency), rectangle-rule quadrature.
pub fn objective(
    model: &PlantModel,
    cfg: &OcpConfig,
    d: &DisturbanceTrajectory,
    controls: &ControlTrajectory,
    states: &StateTrajectory,
) -> Result<f64> {
    let n = d.len();
    controls.check(n)?;
    check_len("state trajectory", n + 1, states.len())?;
    let h = cfg.dt_sample / SECONDS_PER_HOUR;
    let penalty = slack_penalty(cfg, d);
    let mw = 1e6;
    let mut profit = 0.0;
    for k in 0..n {
        let sell = controls.battery_sell[k] - controls.battery_buy[k];
        profit += h * d.electricity_price[k] * sell / mw;
        profit += h * d.heat_price[k] * controls.heat_sell[k] / mw;
        profit += cfg.dt_sample * d.hydrogen_price[k] * MOLAR_MASS_H2 * controls.hydrogen_sell[k];
        profit -= h * penalty * controls.slack[k] / mw;
    }
    let end = states.state(n);
    profit += terminal_price(cfg, d) * usable_energy(model, &end) / J_PER_MWH;
    Ok(profit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcpSolution {
    pub controls: ControlTrajectory,
    pub states: StateTrajectory,
    pub profit: f64,
    pub nlp: NlpSolution,
}

/// Transcribes and solves the dispatch problem.
pub fn solve_ocp(
    model: &PlantModel,
    cfg: &OcpConfig,
    d: &DisturbanceTrajectory,
    x0: &PlantState,
    options: &SolverOptions,
) -> Result<OcpSolution> {
    let problem = TranscribedOcp::new(model, cfg, d, x0)?;
    let nlp = nlp::solve(&problem, options)?;
    let (controls, states) = problem.unpack(&nlp.x);
    let profit = objective(model, cfg, d, &controls, &states)?;
    Ok(OcpSolution {
        controls,
        states,
        profit,
        nlp,
    })
}

/// Largest excursion of each state beyond its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundViolation {
    /// J.
    pub battery_energy: f64,
    /// K.
    pub temperature: f64,
    /// mol.
    pub hydrogen: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenLoopReport {
    pub states: StateTrajectory,
    /// `d_el − (min(P_tot, d_el) + d_b + d_t + d_fc)` per sample (W).
    pub coverage_residual: Vec<f64>,
    pub max_bound_violation: BoundViolation,
    /// Samples where the battery charges and discharges by more than 1 kW each.
    pub simultaneous_battery_use: usize,
}

/// Power above which a flow counts as active in [`OpenLoopReport`].
const ACTIVE_FLOW: f64 = 1e3;

/// Re-integrates the storage dynamics under `controls` with the same explicit
/// Euler scheme as the transcription, without clamping.
pub fn simulate_open_loop(
    model: &PlantModel,
    cfg: &OcpConfig,
    controls: &ControlTrajectory,
    d: &DisturbanceTrajectory,
    x0: &PlantState,
) -> Result<OpenLoopReport> {
    model.validate()?;
    let n = d.len();
    controls.check(n)?;
    let dt = cfg.dt_sample;
    let mut states = StateTrajectory::default();
    let mut x = *x0;
    states.push(0.0, x);
    let mut coverage_residual = Vec::with_capacity(n);
    let mut simultaneous = 0;
    for k in 0..n {
        let charge = controls.battery_charge[k] + controls.battery_buy[k];
        let discharge = controls.battery_sell[k] + controls.battery_discharge[k];
        if charge > ACTIVE_FLOW && discharge > ACTIVE_FLOW {
            simultaneous += 1;
        }
        let e_rate = battery_rhs(x.battery_energy, charge, discharge, &model.battery)?;
        let heat_out = controls.heat_sell[k] + controls.steam_power[k] / model.steam_efficiency;
        let t_rate = thermal_rhs(
            x.temperature,
            controls.thermal_charge[k],
            heat_out,
            &model.thermal,
        )?;
        let inflow = hydrogen_rate(controls.current[k].max(0.0), &model.electrolyzer)?;
        let n_rate = inflow - controls.hydrogen_sell[k] - controls.fuel_cell_draw[k];
        x = PlantState {
            battery_energy: x.battery_energy + dt * e_rate,
            temperature: x.temperature + dt * t_rate,
            hydrogen: x.hydrogen + dt * n_rate,
        };
        states.push((k + 1) as f64 * dt, x);
        let to_grid = d.production[k].min(d.demand[k]);
        coverage_residual.push(
            d.demand[k]
                - to_grid
                - controls.battery_discharge[k]
                - controls.steam_power[k]
                - controls.fuel_cell_power[k],
        );
    }
    let excess = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
    let mut viol = BoundViolation::default();
    for k in 0..states.len() {
        viol.battery_energy = viol.battery_energy.max(excess(
            states.battery_energy[k],
            model.battery.e_min,
            model.battery.e_max,
        ));
        viol.temperature = viol.temperature.max(excess(
            states.temperature[k],
            model.thermal.t_min,
            model.thermal.t_max,
        ));
        viol.hydrogen = viol
            .hydrogen
            .max(excess(states.hydrogen[k], 0.0, model.tank.capacity));
    }
    Ok(OpenLoopReport {
        states,
        coverage_residual,
        max_bound_violation: viol,
        simultaneous_battery_use: simultaneous,
    })
}

/// Electrolyzer current at rated power (A).
pub(crate) fn rated_current(p: &ElectrolyzerParams) -> Result<f64> {
    current_from_power(p.rated_power, p)
}

#[cfg(test)]
mod tests;
