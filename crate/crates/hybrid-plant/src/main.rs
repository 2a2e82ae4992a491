use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hybrid_plant::scenario::{
    export_electrolyzer_curve, export_power_curve, export_weather, output_dir, REPORT_FILE,
};
use hybrid_plant::{run_scenario, ScenarioConfig};

/// Hybrid wind/solar plant with battery, thermal and hydrogen storage.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Scenario TOML file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wind and cloud cover traces with the resulting irradiance.
    SimulateWeather,
    /// Stationary turbine optimum over 0 to 27 m/s.
    PowerCurve,
    /// Cell voltage, Faraday efficiency and hydrogen rate over the current range.
    ElectrolyzerCurve {
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Full scenario: weather, production, optimal dispatch and replay.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => {
            ScenarioConfig::load(path).map_err(|e| anyhow::anyhow!("config stage: {e}"))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = output_dir(&cfg, cli.out.as_deref());
    match cli.command {
        Command::SimulateWeather => {
            for f in export_weather(&cfg, &out)? {
                println!(
                    "{} ({} rows)",
                    out.join(&f.file).display(),
                    f.rows.unwrap_or(0)
                );
            }
        }
        Command::PowerCurve => {
            let f = export_power_curve(&cfg, &out)?;
            println!("{}", out.join(f.file).display());
        }
        Command::ElectrolyzerCurve { points } => {
            let f = export_electrolyzer_curve(&cfg, &out, points)?;
            println!("{}", out.join(f.file).display());
        }
        Command::Run => {
            let start = Instant::now();
            let run = run_scenario(&cfg, &out)?;
            let r = &run.report;
            println!(
                "solver: {} after {} iterations, KKT residual {:.3e}",
                r.solver.status, r.solver.iterations, r.solver.kkt_residual
            );
            println!("profit: {:.2}", r.profit);
            println!(
                "production {:.2} MWh, demand {:.2} MWh, storage demand {:.2} MWh",
                r.energy.production_mwh, r.energy.demand_mwh, r.energy.storage_demand_mwh
            );
            println!(
                "sold {:.2} MWh electricity, {:.2} MWh heat, {:.1} kg hydrogen; bought {:.2} MWh",
                r.energy.electricity_sold_mwh,
                r.energy.heat_sold_mwh,
                r.energy.hydrogen_sold_kg,
                r.energy.electricity_bought_mwh
            );
            println!(
                "storage covered {:.2} MWh, unmet {:.3} MWh",
                r.coverage.storage_supplied_mwh, r.coverage.unmet_mwh
            );
            println!(
                "{} written in {:.1} s",
                out.join(REPORT_FILE).display(),
                start.elapsed().as_secs_f64()
            );
            if !r.solver.converged {
                anyhow::bail!("optimization stage: solver status {}", r.solver.status);
            }
        }
    }
    Ok(())
}
