use super::*;
use crate::nlp::{check_derivatives, NlpProblem, SolveStatus};
use crate::storage::SpecificHeat;

fn prices(n: usize, e: f64, h: f64, g: f64) -> Prices {
    Prices {
        electricity: vec![e; n],
        heat: vec![h; n],
        hydrogen: vec![g; n],
    }
}

fn short_config(hours: f64) -> OcpConfig {
    OcpConfig {
        horizon: hours * 3600.0,
        ..OcpConfig::default()
    }
}

fn no_limits() -> ControlLimits {
    ControlLimits {
        battery_charge: 0.0,
        thermal_charge: 0.0,
        battery_sell: 0.0,
        battery_buy: 0.0,
        heat_sell: 0.0,
        hydrogen_sell: 0.0,
        battery_discharge: 0.0,
        steam_turbine: 0.0,
        fuel_cell_draw: 0.0,
    }
}

#[test]
fn disturbance_split_cases() {
    let p = prices(3, 50.0, 20.0, 3.0);
    let d = build_disturbances(&[4e6, 6e6, 1e6], &[4e6; 3], &p).unwrap();
    assert_eq!(d.surplus, vec![0.0, 2e6, 0.0]);
    assert_eq!(d.deficit, vec![0.0, 0.0, 3e6]);
    for k in 0..3 {
        assert_eq!(d.surplus[k] * d.deficit[k], 0.0);
    }
    assert!(matches!(
        build_disturbances(&[1.0, 2.0], &[1.0], &p),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn price_generation_cases() {
    let flat = PriceConfig {
        electricity: PriceSeries {
            mean: 42.0,
            std: 0.0,
        },
        ..PriceConfig::default()
    };
    let p = generate_prices(&flat, 12, 6, 1).unwrap();
    assert!(p.electricity.iter().all(|&v| v == 42.0));
    let cfg = PriceConfig::default();
    let a = generate_prices(&cfg, 60, 6, 9).unwrap();
    assert_eq!(a, generate_prices(&cfg, 60, 6, 9).unwrap());
    assert_ne!(a, generate_prices(&cfg, 60, 6, 10).unwrap());
    for hour in a.electricity.chunks(6) {
        assert!(hour.iter().all(|&v| v == hour[0]));
    }
    let n = 10_000;
    let many = generate_prices(&cfg, n, 1, 3).unwrap();
    let mean = many.electricity.iter().sum::<f64>() / n as f64;
    assert!((mean - 50.0).abs() < 3.0 * 10.0 / (n as f64).sqrt());
    assert!(many.heat.iter().chain(&many.hydrogen).all(|&v| v >= 0.0));
}

#[test]
fn three_day_dimensions() {
    let cfg = OcpConfig::default();
    assert_eq!(cfg.intervals().unwrap(), 72);
    assert_eq!(cfg.samples().unwrap(), 432);
    let d = build_disturbances(&[5e6; 432], &[4e6; 432], &prices(432, 50.0, 20.0, 3.0)).unwrap();
    let ocp =
        TranscribedOcp::new(&PlantModel::default(), &cfg, &d, &PlantState::default()).unwrap();
    assert_eq!(ocp.num_constraints(), 6 * 432);
    assert_eq!(ocp.num_variables(), 72 * 4 + 432 * 11);
    let bad = OcpConfig {
        dt_control: 1000.0,
        ..cfg
    };
    assert!(bad.validate().is_err());
}

#[test]
fn zero_horizon_problem() {
    let cfg = OcpConfig {
        horizon: 0.0,
        terminal_value: false,
        ..OcpConfig::default()
    };
    let d = build_disturbances(&[], &[], &prices(0, 0.0, 0.0, 0.0)).unwrap();
    let ocp =
        TranscribedOcp::new(&PlantModel::default(), &cfg, &d, &PlantState::default()).unwrap();
    assert_eq!(ocp.num_constraints(), 0);
    assert_eq!(ocp.num_variables(), 0);
    assert_eq!(ocp.objective(&[]), 0.0);
}

#[test]
fn out_of_bounds_initial_state_rejected() {
    let cfg = short_config(1.0);
    let d = build_disturbances(&[0.0; 6], &[0.0; 6], &prices(6, 1.0, 1.0, 1.0)).unwrap();
    let x0 = PlantState {
        temperature: 100.0,
        ..PlantState::default()
    };
    assert!(TranscribedOcp::new(&PlantModel::default(), &cfg, &d, &x0).is_err());
}

fn idle_model() -> PlantModel {
    let mut m = PlantModel::default();
    m.battery.self_discharge = 0.0;
    m.thermal.t_min = 250.0;
    m
}

#[test]
fn hand_built_feasible_point() {
    let model = idle_model();
    let cfg = short_config(2.0);
    let n = 12;
    let d = build_disturbances(&vec![3e6; n], &vec![3e6; n], &prices(n, 50.0, 20.0, 3.0)).unwrap();
    let x0 = PlantState {
        battery_energy: 1e9,
        temperature: model.thermal.t_ambient,
        hydrogen: 1000.0,
    };
    let ocp = TranscribedOcp::new(&model, &cfg, &d, &x0).unwrap();
    let controls = ControlTrajectory::zeros(n);
    let mut states = StateTrajectory::default();
    for k in 0..=n {
        states.push(600.0 * k as f64, x0);
    }
    let x = ocp.pack(&controls, &states).unwrap();
    let mut c = vec![0.0; ocp.num_constraints()];
    ocp.constraints(&x, &mut c);
    assert!(c.iter().all(|v| v.abs() < 1e-12), "{c:?}");
}

fn mixed_instance(cp: SpecificHeat) -> TranscribedOcp {
    let mut model = PlantModel::default();
    model.thermal.specific_heat = cp;
    let cfg = short_config(2.0);
    let n = 12;
    let production: Vec<f64> = (0..n).map(|k| if k % 3 == 0 { 1e6 } else { 6e6 }).collect();
    let d = build_disturbances(&production, &vec![4e6; n], &prices(n, 55.0, 20.0, 3.0)).unwrap();
    TranscribedOcp::new(&model, &cfg, &d, &PlantState::default()).unwrap()
}

#[test]
fn transcription_derivatives_match_differences() {
    for cp in [
        SpecificHeat::Constant(1500.0),
        SpecificHeat::Affine {
            intercept: 1400.0,
            slope: 0.2,
        },
    ] {
        let ocp = mixed_instance(cp);
        let n = ocp.num_variables();
        let m = ocp.num_constraints();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        ocp.bounds(&mut lower, &mut upper);
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let frac = 0.2 + 0.6 * ((i * 7919 % 101) as f64 / 101.0);
                if upper[i].is_finite() && upper[i] > lower[i] {
                    lower[i] + frac * (upper[i] - lower[i])
                } else {
                    lower[i] + frac
                }
            })
            .collect();
        let lambda: Vec<f64> = (0..m).map(|r| ((r * 31 % 17) as f64 - 8.0) / 4.0).collect();
        let check = check_derivatives(&ocp, &x, &lambda, 0.7, 1e-6);
        assert!(check.gradient < 1e-6, "{check:?}");
        assert!(check.jacobian < 1e-6, "{check:?}");
        assert!(check.hessian < 1e-4, "{check:?}");
    }
}

#[test]
fn nlp_objective_is_negated_profit() {
    let ocp = mixed_instance(SpecificHeat::Affine {
        intercept: 1400.0,
        slope: 0.2,
    });
    let mut model = PlantModel::default();
    model.thermal.specific_heat = SpecificHeat::Affine {
        intercept: 1400.0,
        slope: 0.2,
    };
    let n = ocp.num_variables();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    ocp.bounds(&mut lower, &mut upper);
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let u = if upper[i].is_finite() { upper[i] } else { 1.0 };
            lower[i] + 0.37 * (u - lower[i])
        })
        .collect();
    let (controls, states) = ocp.unpack(&x);
    let production: Vec<f64> = (0..12)
        .map(|k| if k % 3 == 0 { 1e6 } else { 6e6 })
        .collect();
    let d = build_disturbances(&production, &[4e6; 12], &prices(12, 55.0, 20.0, 3.0)).unwrap();
    let profit = objective(&model, &short_config(2.0), &d, &controls, &states).unwrap();
    assert!((profit + ocp.objective(&x)).abs() < 1e-9 * profit.abs().max(1.0));
}

#[test]
fn objective_examples() {
    let model = PlantModel::default();
    let cfg = OcpConfig {
        horizon: 3600.0,
        dt_sample: 3600.0,
        dt_control: 3600.0,
        terminal_value: false,
        ..OcpConfig::default()
    };
    let d = build_disturbances(&[0.0], &[0.0], &prices(1, 50.0, 20.0, 3.0)).unwrap();
    let mut states = StateTrajectory::default();
    states.push(0.0, PlantState::default());
    states.push(3600.0, PlantState::default());
    let mut controls = ControlTrajectory::zeros(1);
    assert_eq!(
        objective(&model, &cfg, &d, &controls, &states).unwrap(),
        0.0
    );
    controls.battery_sell[0] = 1e6;
    let sold = objective(&model, &cfg, &d, &controls, &states).unwrap();
    assert!((sold - 50.0).abs() < 1e-12);

    controls.heat_sell[0] = 2e6;
    controls.hydrogen_sell[0] = 1.0;
    controls.slack[0] = 1e5;
    let with_terminal = OcpConfig {
        terminal_value: true,
        ..cfg
    };
    let base = objective(&model, &with_terminal, &d, &controls, &states).unwrap();
    let doubled = objective(
        &model,
        &with_terminal,
        &d.with_scaled_prices(2.0),
        &controls,
        &states,
    )
    .unwrap();
    assert!((doubled - 2.0 * base).abs() < 1e-9 * base.abs());
}

#[test]
fn surplus_goes_to_the_only_efficient_store() {
    let mut model = PlantModel::default();
    model.battery.eta_in = 1.0;
    model.battery.e_max = 10.0 * J_PER_MWH;
    model.thermal.eta_in = 0.0;
    model.fuel_cell.efficiency = 0.05;
    let cfg = short_config(1.0);
    let n = 6;
    let d = build_disturbances(&vec![5e6; n], &vec![4e6; n], &prices(n, 50.0, 20.0, 0.0)).unwrap();
    let x0 = PlantState {
        battery_energy: J_PER_MWH,
        ..PlantState::default()
    };
    let sol = solve_ocp(&model, &cfg, &d, &x0, &SolverOptions::default()).unwrap();
    assert!(sol.nlp.status.converged(), "{:?}", sol.nlp.status);
    for k in 0..n {
        assert!(
            (sol.controls.battery_charge[k] - 1e6).abs() < 10.0,
            "sample {k}: {}",
            sol.controls.battery_charge[k]
        );
    }
}

struct Oracle {
    model: PlantModel,
    cfg: OcpConfig,
    d: DisturbanceTrajectory,
    x0: PlantState,
}

fn battery_oracle() -> Oracle {
    let mut model = PlantModel::default();
    model.battery.self_discharge = 1e-6;
    let cfg = OcpConfig {
        horizon: 7200.0,
        limits: ControlLimits {
            battery_sell: 2e6,
            ..no_limits()
        },
        terminal_value: false,
        ..OcpConfig::default()
    };
    let mut p = prices(12, 30.0, 20.0, 3.0);
    for v in &mut p.electricity[6..] {
        *v = 80.0;
    }
    let d = build_disturbances(&[0.0; 12], &[0.0; 12], &p).unwrap();
    let x0 = PlantState {
        battery_energy: 1.5 * J_PER_MWH,
        ..PlantState::default()
    };
    Oracle { model, cfg, d, x0 }
}

fn grid_search(o: &Oracle, steps: usize) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=steps {
        for j in 0..=steps {
            let (p1, p2) = (2e6 * i as f64 / steps as f64, 2e6 * j as f64 / steps as f64);
            let mut c = ControlTrajectory::zeros(12);
            for k in 0..12 {
                c.battery_sell[k] = if k < 6 { p1 } else { p2 };
            }
            let rep = simulate_open_loop(&o.model, &o.cfg, &c, &o.d, &o.x0).unwrap();
            if rep.max_bound_violation.battery_energy > 0.0 {
                continue;
            }
            let v = objective(&o.model, &o.cfg, &o.d, &c, &rep.states).unwrap();
            if v > best.0 {
                best = (v, p1, p2);
            }
        }
    }
    best
}

#[test]
fn battery_only_instance_matches_grid_search() {
    let o = battery_oracle();
    let sol = solve_ocp(&o.model, &o.cfg, &o.d, &o.x0, &SolverOptions::default()).unwrap();
    assert_eq!(sol.nlp.status, SolveStatus::Solved);
    let (best, _, p2) = grid_search(&o, 200);
    assert!(best > 0.0);
    assert!(
        (sol.profit - best).abs() <= 0.01 * best,
        "{} vs {best}",
        sol.profit
    );
    assert!(sol.profit >= best - 1e-6);
    assert!((sol.controls.battery_sell[6] - p2).abs() < 2e6 / 200.0);

    let zero = ControlTrajectory::zeros(12);
    let rep = simulate_open_loop(&o.model, &o.cfg, &zero, &o.d, &o.x0).unwrap();
    let idle = objective(&o.model, &o.cfg, &o.d, &zero, &rep.states).unwrap();
    assert!(sol.profit >= idle);

    let scaled = o.d.with_scaled_prices(3.0);
    let sol3 = solve_ocp(&o.model, &o.cfg, &scaled, &o.x0, &SolverOptions::default()).unwrap();
    assert!((sol3.profit - 3.0 * sol.profit).abs() < 1e-6 * sol.profit.abs());
    for k in 0..12 {
        assert!((sol3.controls.battery_sell[k] - sol.controls.battery_sell[k]).abs() < 1.0);
    }
}

#[test]
fn open_loop_replay_matches_solution() {
    let ocp = mixed_instance(SpecificHeat::Constant(1500.0));
    let model = PlantModel::default();
    let cfg = short_config(2.0);
    let production: Vec<f64> = (0..12)
        .map(|k| if k % 3 == 0 { 1e6 } else { 6e6 })
        .collect();
    let d = build_disturbances(&production, &[4e6; 12], &prices(12, 55.0, 20.0, 3.0)).unwrap();
    let x0 = PlantState::default();
    let sol = solve_ocp(&model, &cfg, &d, &x0, &SolverOptions::default()).unwrap();
    assert!(sol.nlp.status.converged());
    assert!(sol.nlp.constraint_violation < 1e-6);
    assert_eq!(ocp.num_variables(), sol.nlp.x.len());
    let rep = simulate_open_loop(&model, &cfg, &sol.controls, &d, &x0).unwrap();
    for k in 0..=12 {
        let (a, b) = (rep.states.state(k), sol.states.state(k));
        assert!(
            (a.battery_energy - b.battery_energy).abs() <= 1e-6 * b.battery_energy.max(1.0) + 1.0
        );
        assert!((a.temperature - b.temperature).abs() <= 1e-6 * b.temperature);
        assert!((a.hydrogen - b.hydrogen).abs() <= 1e-6 * b.hydrogen.max(1.0) + 1e-3);
    }
    for k in 0..12 {
        assert!(rep.coverage_residual[k] <= sol.controls.slack[k] + 1.0);
        let dispatch = sol.controls.battery_charge[k]
            + sol.controls.thermal_charge[k]
            + sol.controls.electrolyzer_power[k];
        assert!((dispatch - d.surplus[k]).abs() <= 1e-6 * d.surplus[k].max(1e6));
    }
}

#[test]
fn empty_storage_leaves_deficit_unmet() {
    let mut model = PlantModel::default();
    model.battery.self_discharge = 0.0;
    model.thermal.ua = 0.0;
    let cfg = OcpConfig {
        horizon: 3600.0,
        limits: ControlLimits {
            battery_buy: 0.0,
            ..ControlLimits::default()
        },
        ..OcpConfig::default()
    };
    let d = build_disturbances(&[2e6; 6], &[4e6; 6], &prices(6, 50.0, 20.0, 3.0)).unwrap();
    let x0 = PlantState {
        battery_energy: model.battery.e_min,
        temperature: model.thermal.t_min,
        hydrogen: 0.0,
    };
    let sol = solve_ocp(&model, &cfg, &d, &x0, &SolverOptions::default()).unwrap();
    assert!(sol.nlp.status.converged());
    let rep = simulate_open_loop(&model, &cfg, &sol.controls, &d, &x0).unwrap();
    for k in 0..6 {
        assert!((rep.coverage_residual[k] - d.deficit[k]).abs() < 1.0);
        assert!((sol.controls.slack[k] - d.deficit[k]).abs() < 1.0);
    }
}
