use hybrid_plant_core::nlp::SolverOptions;
use hybrid_plant_core::ocp::{
    build_disturbances, generate_prices, simulate_open_loop, solve_ocp, OcpConfig, PlantModel,
    PlantState, PriceConfig,
};
use hybrid_plant_core::solar::{simulate_irradiance, PvParams, RadiationParams, SolarSite};
use hybrid_plant_core::turbine::{generator_power, CpSurface, TurbineParams};
use hybrid_plant_core::weather::{simulate_weather, WeatherConfig};

const HORIZON: f64 = 12.0 * 3600.0;

fn site() -> SolarSite {
    SolarSite {
        latitude: 55.7_f64.to_radians(),
        longitude: 12.6_f64.to_radians(),
        day_of_year: 172,
        utc_offset: 1.0,
    }
}

#[test]
fn weather_to_dispatch_pipeline() {
    let seed = 11;
    let weather = simulate_weather(
        &WeatherConfig {
            horizon: HORIZON,
            ..WeatherConfig::default()
        },
        seed,
    )
    .unwrap();
    let irr = simulate_irradiance(
        &weather,
        &site(),
        &RadiationParams::default(),
        &PvParams::default(),
        seed,
    )
    .unwrap();
    assert_eq!(irr.time, weather.time);

    let cfg = OcpConfig {
        horizon: HORIZON,
        ..OcpConfig::default()
    };
    let n = cfg.samples().unwrap();
    let turbine = TurbineParams::default();
    let surface = CpSurface::analytic_default();
    let production: Vec<f64> = (0..n)
        .map(|k| {
            generator_power(weather.mean_wind[k], &turbine, &surface).unwrap() + irr.pv_power[k]
        })
        .collect();
    let demand = vec![4e6; n];
    let prices = generate_prices(&PriceConfig::default(), n, 6, seed).unwrap();
    let d = build_disturbances(&production, &demand, &prices).unwrap();

    let model = PlantModel::default();
    let x0 = PlantState::default();
    let sol = solve_ocp(&model, &cfg, &d, &x0, &SolverOptions::default()).unwrap();
    assert!(sol.nlp.status.converged(), "{:?}", sol.nlp.status);
    assert_eq!(sol.states.len(), n + 1);

    let replay = simulate_open_loop(&model, &cfg, &sol.controls, &d, &x0).unwrap();
    for k in 0..=n {
        let (a, b) = (sol.states.state(k), replay.states.state(k));
        assert!((a.battery_energy - b.battery_energy).abs() <= 1e-6 * model.battery.e_max);
        assert!((a.temperature - b.temperature).abs() <= 1e-6);
        assert!((a.hydrogen - b.hydrogen).abs() <= 1e-6 * a.hydrogen.max(1.0));
    }
    for (r, s) in replay.coverage_residual.iter().zip(&sol.controls.slack) {
        assert!(r - s <= 1e-3, "{r} vs slack {s}");
    }
}

#[test]
fn same_seed_reproduces_traces() {
    let cfg = WeatherConfig {
        horizon: HORIZON,
        ..WeatherConfig::default()
    };
    let a = simulate_weather(&cfg, 3).unwrap();
    let b = simulate_weather(&cfg, 3).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_weather(&cfg, 4).unwrap());
    let ia = simulate_irradiance(
        &a,
        &site(),
        &RadiationParams::default(),
        &PvParams::default(),
        3,
    );
    let ib = simulate_irradiance(
        &b,
        &site(),
        &RadiationParams::default(),
        &PvParams::default(),
        3,
    );
    assert_eq!(ia.unwrap(), ib.unwrap());
}
