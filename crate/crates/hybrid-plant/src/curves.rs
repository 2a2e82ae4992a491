//! Standalone curve and trace exports.

use hybrid_plant_core::hydrogen::{
    activation_overvoltage, cell_voltage, faraday_efficiency, hydrogen_rate, ohmic_overvoltage,
    stack_power, ElectrolyzerParams,
};
use hybrid_plant_core::solar::IrradianceTrace;
use hybrid_plant_core::turbine::{power_curve, CpSurface, TurbineParams};
use hybrid_plant_core::weather::WeatherTrace;
use hybrid_plant_core::Result;

use crate::tables::{self, Table};

/// Wind speeds of the exported power curve (m/s).
pub fn power_curve_speeds() -> Vec<f64> {
    (0..=270).map(|i| i as f64 * 0.1).collect()
}

pub fn power_curve_table(params: &TurbineParams, surface: &CpSurface) -> Result<Table> {
    let mut t = Table::new(tables::POWER_CURVE);
    for p in power_curve(params, surface, &power_curve_speeds())? {
        t.push_row(&[
            p.wind_speed,
            p.theta,
            p.lambda,
            p.cp,
            p.omega,
            p.rotor_power,
            p.generator_power,
            p.torque,
        ]);
    }
    Ok(t)
}

/// U–I and Faraday efficiency curve from zero to the rated current.
pub fn electrolyzer_table(params: &ElectrolyzerParams, points: usize) -> Result<Table> {
    let i_max = params.max_current()?;
    let mut t = Table::new(tables::ELECTROLYZER_CURVE);
    let last = points.max(2) - 1;
    for k in 0..=last {
        let i = i_max * k as f64 / last as f64;
        t.push_row(&[
            i,
            i / params.area,
            cell_voltage(i, params)?,
            ohmic_overvoltage(i, params),
            activation_overvoltage(i, params),
            faraday_efficiency(i, params)?,
            stack_power(i, params)?,
            hydrogen_rate(i, params)?,
        ]);
    }
    Ok(t)
}

pub fn weather_table(w: &WeatherTrace) -> Table {
    let mut t = Table::new(tables::WEATHER);
    t.columns = vec![
        w.time.clone(),
        w.mean_wind.clone(),
        w.turbulent_wind.clone(),
        w.wind_speed.clone(),
        w.cloud_cover.clone(),
        (0..w.len()).map(|i| w.okta(i)).collect(),
    ];
    t
}

pub fn irradiance_table(r: &IrradianceTrace) -> Table {
    let mut t = Table::new(tables::IRRADIANCE);
    t.columns = vec![
        r.time.clone(),
        r.elevation.clone(),
        r.direct.clone(),
        r.diffuse.clone(),
        r.global.clone(),
        r.pv_power.clone(),
    ];
    t
}
