//! Scenario orchestration: weather, production, prices, optimal dispatch,
//! open-loop replay and file outputs.

use std::fmt;
use std::path::{Path, PathBuf};

use hybrid_plant_core::hydrogen::{tank_pressure, MOLAR_MASS_H2};
use hybrid_plant_core::ocp::{
    build_disturbances, generate_prices, simulate_open_loop, solve_ocp, DisturbanceTrajectory,
    OcpSolution, OpenLoopReport,
};
use hybrid_plant_core::solar::{simulate_irradiance, IrradianceTrace};
use hybrid_plant_core::turbine::{generator_power, CpSurface};
use hybrid_plant_core::weather::{simulate_weather, WeatherTrace};
use hybrid_plant_core::{J_PER_MWH, SECONDS_PER_HOUR};
use serde::{Deserialize, Serialize};

use crate::config::{Resolved, ScenarioConfig};
use crate::curves;
use crate::tables::{self, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Weather,
    Irradiance,
    Wind,
    Prices,
    Disturbances,
    Optimization,
    Replay,
    Curves,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Weather => "weather",
            Stage::Irradiance => "irradiance",
            Stage::Wind => "wind power",
            Stage::Prices => "prices",
            Stage::Disturbances => "disturbances",
            Stage::Optimization => "optimization",
            Stage::Replay => "open-loop replay",
            Stage::Curves => "curves",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage: {source}")]
pub struct ScenarioError {
    pub stage: Stage,
    #[source]
    pub source: Box<dyn std::error::Error + Send + Sync + 'static>,
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, ScenarioError>;
}

impl<T, E> StageExt<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn stage(self, stage: Stage) -> Result<T, ScenarioError> {
        self.map_err(|e| ScenarioError {
            stage,
            source: Box::new(e),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    /// Data rows for CSV files.
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTotals {
    pub wind_mwh: f64,
    pub pv_mwh: f64,
    pub production_mwh: f64,
    pub demand_mwh: f64,
    pub surplus_mwh: f64,
    pub storage_demand_mwh: f64,
    pub battery_charge_mwh: f64,
    pub thermal_charge_mwh: f64,
    pub electrolyzer_mwh: f64,
    pub electricity_sold_mwh: f64,
    pub electricity_bought_mwh: f64,
    pub heat_sold_mwh: f64,
    pub hydrogen_sold_kg: f64,
    pub hydrogen_produced_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub deficit_samples: usize,
    /// Battery, steam turbine and fuel cell output toward demand.
    pub storage_supplied_mwh: f64,
    pub unmet_mwh: f64,
    /// Fraction of the storage demand met by storage.
    pub covered_fraction: f64,
    /// Largest replayed coverage residual (W).
    pub max_residual_w: f64,
    /// Largest replayed coverage residual minus planned slack (W).
    pub max_residual_over_slack_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSummary {
    pub final_battery_mwh: f64,
    pub final_temperature_k: f64,
    pub final_hydrogen_kg: f64,
    /// Largest planned versus replayed state differences.
    pub replay_battery_gap_j: f64,
    pub replay_temperature_gap_k: f64,
    pub replay_hydrogen_gap_mol: f64,
    pub bound_violation_battery_j: f64,
    pub bound_violation_temperature_k: f64,
    pub bound_violation_hydrogen_mol: f64,
    pub simultaneous_battery_use: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: String,
    pub converged: bool,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    pub constraint_violation: f64,
    pub objective_scaling: f64,
    pub variables: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub samples: usize,
    pub intervals: usize,
    pub profit: f64,
    pub energy: EnergyTotals,
    pub coverage: CoverageStats,
    pub storage: StorageSummary,
    pub solver: SolverSummary,
    pub files: Vec<ManifestEntry>,
}

/// In-memory results of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub weather: WeatherTrace,
    pub irradiance: IrradianceTrace,
    pub wind_power: Vec<f64>,
    pub disturbances: DisturbanceTrajectory,
    pub solution: OcpSolution,
    pub replay: OpenLoopReport,
    pub report: RunReport,
}

#[derive(Debug, thiserror::Error)]
#[error("sample interval {0} s does not divide one hour")]
struct SampleRate(f64);

fn samples_per_hour(dt: f64) -> Result<usize, SampleRate> {
    let r = SECONDS_PER_HOUR / dt;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= 1e-9 * r {
        Ok(k as usize)
    } else {
        Err(SampleRate(dt))
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Runs every stage without touching the filesystem.
pub fn execute(r: &Resolved, seed: u64) -> Result<ScenarioRun, ScenarioError> {
    let weather = simulate_weather(&r.weather, seed).stage(Stage::Weather)?;
    let irradiance = simulate_irradiance(&weather, &r.site, &r.radiation, &r.pv, seed)
        .stage(Stage::Irradiance)?;
    let n = r.ocp.samples().stage(Stage::Config)?;
    let intervals = r.ocp.intervals().stage(Stage::Config)?;

    let surface = CpSurface::analytic_default();
    let speeds = if r.production_uses_mean_wind {
        &weather.mean_wind
    } else {
        &weather.wind_speed
    };
    let wind_power = speeds[..n]
        .iter()
        .map(|&v| {
            generator_power(v.max(0.0), &r.turbine, &surface)
                .map(|p| p * f64::from(r.turbine_count))
        })
        .collect::<Result<Vec<_>, _>>()
        .stage(Stage::Wind)?;
    let production: Vec<f64> = wind_power
        .iter()
        .zip(&irradiance.pv_power)
        .map(|(w, s)| w + s)
        .collect();

    let per_hour = samples_per_hour(r.ocp.dt_sample).stage(Stage::Prices)?;
    let prices = generate_prices(&r.prices, n, per_hour, seed).stage(Stage::Prices)?;
    let d =
        build_disturbances(&production, &vec![r.demand; n], &prices).stage(Stage::Disturbances)?;

    let solution =
        solve_ocp(&r.model, &r.ocp, &d, &r.initial_state, &r.solver).stage(Stage::Optimization)?;
    let replay = simulate_open_loop(&r.model, &r.ocp, &solution.controls, &d, &r.initial_state)
        .stage(Stage::Replay)?;

    let report = summarize(
        r,
        seed,
        intervals,
        &wind_power,
        &irradiance,
        &d,
        &solution,
        &replay,
    );
    Ok(ScenarioRun {
        weather,
        irradiance,
        wind_power,
        disturbances: d,
        solution,
        replay,
        report,
    })
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    r: &Resolved,
    seed: u64,
    intervals: usize,
    wind_power: &[f64],
    irradiance: &IrradianceTrace,
    d: &DisturbanceTrajectory,
    sol: &OcpSolution,
    replay: &OpenLoopReport,
) -> RunReport {
    let n = d.len();
    let dt = r.ocp.dt_sample;
    let mwh = |v: &[f64]| v.iter().sum::<f64>() * dt / J_PER_MWH;
    let kg = |v: &[f64]| v.iter().sum::<f64>() * dt * MOLAR_MASS_H2;
    let c = &sol.controls;

    let supplied: Vec<f64> = (0..n)
        .map(|k| c.battery_discharge[k] + c.steam_power[k] + c.fuel_cell_power[k])
        .collect();
    let storage_demand = mwh(&d.deficit);
    let storage_supplied = mwh(&supplied);
    let hydrogen_rate: Vec<f64> = c
        .current
        .iter()
        .map(|&i| {
            hybrid_plant_core::hydrogen::hydrogen_rate(i, &r.model.electrolyzer).unwrap_or(0.0)
        })
        .collect();

    let last = sol.states.len() - 1;
    let v = replay.max_bound_violation;
    RunReport {
        seed,
        samples: n,
        intervals,
        profit: sol.profit,
        energy: EnergyTotals {
            wind_mwh: mwh(wind_power),
            pv_mwh: mwh(&irradiance.pv_power[..n]),
            production_mwh: mwh(&d.production),
            demand_mwh: mwh(&d.demand),
            surplus_mwh: mwh(&d.surplus),
            storage_demand_mwh: storage_demand,
            battery_charge_mwh: mwh(&c.battery_charge),
            thermal_charge_mwh: mwh(&c.thermal_charge),
            electrolyzer_mwh: mwh(&c.electrolyzer_power),
            electricity_sold_mwh: mwh(&c.battery_sell),
            electricity_bought_mwh: mwh(&c.battery_buy),
            heat_sold_mwh: mwh(&c.heat_sell),
            hydrogen_sold_kg: kg(&c.hydrogen_sell),
            hydrogen_produced_kg: kg(&hydrogen_rate),
        },
        coverage: CoverageStats {
            deficit_samples: d.deficit.iter().filter(|&&x| x > 0.0).count(),
            storage_supplied_mwh: storage_supplied,
            unmet_mwh: mwh(&c.slack),
            covered_fraction: if storage_demand > 0.0 {
                storage_supplied / storage_demand
            } else {
                1.0
            },
            max_residual_w: replay.coverage_residual.iter().copied().fold(0.0, f64::max),
            max_residual_over_slack_w: replay
                .coverage_residual
                .iter()
                .zip(&c.slack)
                .map(|(res, s)| res - s)
                .fold(f64::NEG_INFINITY, f64::max),
        },
        storage: StorageSummary {
            final_battery_mwh: sol.states.battery_energy[last] / J_PER_MWH,
            final_temperature_k: sol.states.temperature[last],
            final_hydrogen_kg: sol.states.hydrogen[last] * MOLAR_MASS_H2,
            replay_battery_gap_j: max_gap(
                &sol.states.battery_energy,
                &replay.states.battery_energy,
            ),
            replay_temperature_gap_k: max_gap(&sol.states.temperature, &replay.states.temperature),
            replay_hydrogen_gap_mol: max_gap(&sol.states.hydrogen, &replay.states.hydrogen),
            bound_violation_battery_j: v.battery_energy,
            bound_violation_temperature_k: v.temperature,
            bound_violation_hydrogen_mol: v.hydrogen,
            simultaneous_battery_use: replay.simultaneous_battery_use,
        },
        solver: SolverSummary {
            status: sol.nlp.status.as_str().to_string(),
            converged: sol.nlp.status.converged(),
            iterations: sol.nlp.iterations,
            kkt_residual: sol.nlp.kkt_residual,
            dual_infeasibility: sol.nlp.dual_infeasibility,
            complementarity: sol.nlp.complementarity,
            constraint_violation: sol.nlp.constraint_violation,
            objective_scaling: sol.nlp.objective_scaling,
            variables: sol.nlp.x.len(),
        },
        files: Vec::new(),
    }
}

fn production_table(run: &ScenarioRun, dt: f64) -> Table {
    let d = &run.disturbances;
    let n = d.len();
    let mut t = Table::new(tables::PRODUCTION);
    t.columns = vec![
        (0..n).map(|k| k as f64 * dt).collect(),
        run.wind_power.clone(),
        run.irradiance.pv_power[..n].to_vec(),
        d.production.clone(),
        d.demand.clone(),
        d.surplus.clone(),
        d.deficit.clone(),
        d.electricity_price.clone(),
        d.heat_price.clone(),
        d.hydrogen_price.clone(),
    ];
    t
}

fn controls_table(run: &ScenarioRun, dt: f64) -> Table {
    let c = &run.solution.controls;
    let n = c.len();
    let mut t = Table::new(tables::CONTROLS);
    t.columns = vec![
        (0..n).map(|k| k as f64 * dt).collect(),
        c.battery_charge.clone(),
        c.thermal_charge.clone(),
        c.electrolyzer_power.clone(),
        c.battery_sell.clone(),
        c.battery_buy.clone(),
        c.heat_sell.clone(),
        c.hydrogen_sell.clone(),
        c.current.clone(),
        c.battery_discharge.clone(),
        c.steam_power.clone(),
        c.fuel_cell_draw.clone(),
        c.fuel_cell_power.clone(),
        c.slack.clone(),
        run.replay.coverage_residual.clone(),
    ];
    t
}

fn states_table(run: &ScenarioRun, r: &Resolved) -> Result<Table, hybrid_plant_core::Error> {
    let s = &run.solution.states;
    let o = &run.replay.states;
    let pressure = s
        .hydrogen
        .iter()
        .map(|&n| {
            if n > 0.0 {
                tank_pressure(n, &r.model.tank)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(tables::STATES);
    t.columns = vec![
        s.time.clone(),
        s.battery_energy.clone(),
        s.temperature.clone(),
        s.hydrogen.clone(),
        pressure,
        o.battery_energy.clone(),
        o.temperature.clone(),
        o.hydrogen.clone(),
    ];
    Ok(t)
}

fn solver_log_table(run: &ScenarioRun) -> Table {
    let mut t = Table::new(tables::SOLVER_LOG);
    for l in &run.solution.nlp.log {
        t.push_row(&[
            l.iteration as f64,
            l.objective,
            l.primal_infeasibility,
            l.dual_infeasibility,
            l.mu,
            l.regularization,
            l.alpha_primal,
            l.alpha_dual,
            l.line_search_trials as f64,
        ]);
    }
    t
}

fn write_table(dir: &Path, name: &str, t: &Table) -> Result<ManifestEntry, ScenarioError> {
    let rows = t.write(&dir.join(name)).stage(Stage::Output)?;
    Ok(ManifestEntry {
        file: name.to_string(),
        rows: Some(rows),
    })
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<ManifestEntry, ScenarioError> {
    std::fs::write(dir.join(name), text).stage(Stage::Output)?;
    Ok(ManifestEntry {
        file: name.to_string(),
        rows: None,
    })
}

fn create_dir(dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).stage(Stage::Output)
}

pub const REPORT_FILE: &str = "report.json";

/// Runs the full scenario and writes its CSVs, the resolved config and
/// `report.json` into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<ScenarioRun, ScenarioError> {
    let r = cfg.resolve().stage(Stage::Config)?;
    let mut run = execute(&r, cfg.seed)?;
    create_dir(out)?;
    let dt = r.ocp.dt_sample;
    let states = states_table(&run, &r).stage(Stage::Output)?;
    let files = vec![
        write_text(out, "config.toml", &cfg.to_toml())?,
        write_table(out, "weather.csv", &curves::weather_table(&run.weather))?,
        write_table(
            out,
            "irradiance.csv",
            &curves::irradiance_table(&run.irradiance),
        )?,
        write_table(out, "production.csv", &production_table(&run, dt))?,
        write_table(out, "controls.csv", &controls_table(&run, dt))?,
        write_table(out, "states.csv", &states)?,
        write_table(out, "solver_log.csv", &solver_log_table(&run))?,
        ManifestEntry {
            file: REPORT_FILE.to_string(),
            rows: None,
        },
    ];
    run.report.files = files;
    let json = serde_json::to_string_pretty(&run.report).stage(Stage::Output)?;
    write_text(out, REPORT_FILE, &json)?;
    Ok(run)
}

/// Writes `weather.csv` and `irradiance.csv` for the configured horizon.
pub fn export_weather(
    cfg: &ScenarioConfig,
    out: &Path,
) -> Result<Vec<ManifestEntry>, ScenarioError> {
    let weather_cfg = cfg.weather().stage(Stage::Config)?;
    let site = cfg.site().stage(Stage::Config)?;
    let pv = cfg.pv().stage(Stage::Config)?;
    let weather = simulate_weather(&weather_cfg, cfg.seed).stage(Stage::Weather)?;
    let radiation = hybrid_plant_core::solar::RadiationParams::default();
    let irradiance =
        simulate_irradiance(&weather, &site, &radiation, &pv, cfg.seed).stage(Stage::Irradiance)?;
    create_dir(out)?;
    Ok(vec![
        write_table(out, "weather.csv", &curves::weather_table(&weather))?,
        write_table(
            out,
            "irradiance.csv",
            &curves::irradiance_table(&irradiance),
        )?,
    ])
}

/// Writes `power_curve.csv` over 0 to 27 m/s.
pub fn export_power_curve(
    cfg: &ScenarioConfig,
    out: &Path,
) -> Result<ManifestEntry, ScenarioError> {
    let params = cfg.turbine().stage(Stage::Config)?;
    let t =
        curves::power_curve_table(&params, &CpSurface::analytic_default()).stage(Stage::Curves)?;
    create_dir(out)?;
    write_table(out, "power_curve.csv", &t)
}

/// Writes `electrolyzer_curve.csv` from zero to rated current.
pub fn export_electrolyzer_curve(
    cfg: &ScenarioConfig,
    out: &Path,
    points: usize,
) -> Result<ManifestEntry, ScenarioError> {
    let params = cfg.electrolyzer().stage(Stage::Config)?;
    let t = curves::electrolyzer_table(&params, points).stage(Stage::Curves)?;
    create_dir(out)?;
    write_table(out, "electrolyzer_curve.csv", &t)
}

/// Output directory: the override if given, else the configured one.
pub fn output_dir(cfg: &ScenarioConfig, overridden: Option<&Path>) -> PathBuf {
    overridden.map_or_else(|| cfg.output_dir.clone(), Path::to_path_buf)
}
