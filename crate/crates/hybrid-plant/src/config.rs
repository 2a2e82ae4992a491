//! Scenario configuration file.
//!
//! Every section and key is optional and falls back to the plant defaults.
//! Unknown keys are rejected. Units are part of each key name or noted on
//! the field.

use std::path::{Path, PathBuf};

use hybrid_plant_core::hydrogen::{ElectrolyzerParams, FuelCellParams, TankParams, MOLAR_MASS_H2};
use hybrid_plant_core::nlp::SolverOptions;
use hybrid_plant_core::ocp::{
    ControlLimits, OcpConfig, PlantModel, PlantState, PriceConfig, PriceSeries,
};
use hybrid_plant_core::solar::{PvParams, RadiationParams, SolarSite};
use hybrid_plant_core::storage::{mass_for_capacity, BatteryParams, SpecificHeat, ThermalParams};
use hybrid_plant_core::turbine::{rpm_to_rad_per_s, TurbineParams};
use hybrid_plant_core::weather::{CloudParams, Sigma2Unit, WeatherConfig, WindParams};
use hybrid_plant_core::{J_PER_MWH, SECONDS_PER_HOUR};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid {section} section: {source}")]
    Invalid {
        section: &'static str,
        source: hybrid_plant_core::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub horizon_hours: f64,
    pub output_dir: PathBuf,
    pub site: SiteConfig,
    pub weather: WeatherSection,
    pub turbine: TurbineSection,
    pub pv: PvSection,
    pub demand: DemandSection,
    pub battery: BatterySection,
    pub thermal: ThermalSection,
    pub electrolyzer: ElectrolyzerSection,
    pub tank: TankSection,
    pub fuel_cell: FuelCellSection,
    pub ocp: OcpSection,
    pub prices: PricesSection,
    pub solver: SolverSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            horizon_hours: 72.0,
            output_dir: PathBuf::from("out"),
            site: SiteConfig::default(),
            weather: WeatherSection::default(),
            turbine: TurbineSection::default(),
            pv: PvSection::default(),
            demand: DemandSection::default(),
            battery: BatterySection::default(),
            thermal: ThermalSection::default(),
            electrolyzer: ElectrolyzerSection::default(),
            tank: TankSection::default(),
            fuel_cell: FuelCellSection::default(),
            ocp: OcpSection::default(),
            prices: PricesSection::default(),
            solver: SolverSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SiteConfig {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Day of year at trace time zero (local midnight), 1..=365.
    pub day_of_year: u32,
    pub utc_offset_hours: f64,
}

impl Default for SiteConfig {
    fn default() -> Self {
        Self {
            latitude_deg: 55.7,
            longitude_deg: 12.6,
            day_of_year: 172,
            utc_offset_hours: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeatherSection {
    pub sample_minutes: f64,
    pub wind_substep_s: f64,
    pub initial_mean_wind_m_s: f64,
    /// Fraction 0..=1.
    pub initial_cloud_cover: f64,
    pub turbulence_length_m: f64,
    pub turbulence_intensity: f64,
    /// Mean wind diffusion (m·s^-3/2).
    pub mean_wind_diffusion: f64,
    /// Holds the mean wind at this speed (m/s) when set.
    pub fixed_mean_wind_m_s: Option<f64>,
    /// Cloud reversion scale (1/h).
    pub cloud_reversion_per_hour: f64,
    /// Cloud diffusion (1/√h).
    pub cloud_diffusion_per_sqrt_hour: f64,
    pub cloud_legendre: [f64; 7],
    /// Holds the cloud attractor at this fraction when set.
    pub fixed_cloud_mean: Option<f64>,
    /// Feed the turbines the mean wind instead of mean plus turbulence.
    pub production_uses_mean_wind: bool,
}

impl Default for WeatherSection {
    fn default() -> Self {
        let w = WeatherConfig::default();
        Self {
            sample_minutes: 10.0,
            wind_substep_s: w.wind_substep,
            initial_mean_wind_m_s: w.initial_mean_wind,
            initial_cloud_cover: w.initial_cloud,
            turbulence_length_m: w.wind.turbulence_length,
            turbulence_intensity: w.wind.turbulence_intensity,
            mean_wind_diffusion: w.wind.sigma2,
            fixed_mean_wind_m_s: None,
            cloud_reversion_per_hour: w.cloud.reversion,
            cloud_diffusion_per_sqrt_hour: w.cloud.diffusion,
            cloud_legendre: w.cloud.legendre,
            fixed_cloud_mean: None,
            production_uses_mean_wind: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineSection {
    pub count: u32,
    pub air_density_kg_m3: f64,
    pub rotor_radius_m: f64,
    pub generator_efficiency: f64,
    pub cut_in_m_s: f64,
    pub rated_speed_m_s: f64,
    pub cut_out_m_s: f64,
    pub rotor_speed_min_rpm: f64,
    pub rotor_speed_max_rpm: f64,
    pub pitch_min_deg: f64,
    pub pitch_max_deg: f64,
    pub rated_power_mw: f64,
}

impl Default for TurbineSection {
    fn default() -> Self {
        Self {
            count: 1,
            air_density_kg_m3: 1.225,
            rotor_radius_m: 62.94,
            generator_efficiency: 0.944,
            cut_in_m_s: 3.0,
            rated_speed_m_s: 11.4,
            cut_out_m_s: 25.0,
            rotor_speed_min_rpm: 6.9,
            rotor_speed_max_rpm: 12.1,
            pitch_min_deg: -5.0,
            pitch_max_deg: 25.0,
            rated_power_mw: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvSection {
    pub area_m2: f64,
    pub efficiency: f64,
}

impl Default for PvSection {
    fn default() -> Self {
        let p = PvParams::default();
        Self {
            area_m2: p.area,
            efficiency: p.efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandSection {
    /// Constant electrical demand (MW).
    pub electric_mw: f64,
}

impl Default for DemandSection {
    fn default() -> Self {
        Self { electric_mw: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub capacity_mwh: f64,
    pub min_energy_mwh: f64,
    pub initial_mwh: f64,
    pub eta_in: f64,
    pub eta_out: f64,
    /// Self-discharge rate (1/s).
    pub self_discharge_per_s: f64,
}

impl Default for BatterySection {
    fn default() -> Self {
        let b = BatteryParams::default();
        Self {
            capacity_mwh: b.e_max / J_PER_MWH,
            min_energy_mwh: b.e_min / J_PER_MWH,
            initial_mwh: PlantState::default().battery_energy / J_PER_MWH,
            eta_in: b.eta_in,
            eta_out: b.eta_out,
            self_discharge_per_s: b.self_discharge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    /// Heat stored between the temperature bounds (MWh); sets the medium mass.
    pub capacity_mwh: f64,
    /// J/(kg·K) at 0 K.
    pub specific_heat_j_kg_k: f64,
    /// Temperature slope of the specific heat (J/(kg·K²)).
    pub specific_heat_slope: f64,
    pub loss_conductance_w_k: f64,
    pub eta_in: f64,
    pub t_min_k: f64,
    pub t_max_k: f64,
    pub ambient_k: f64,
    pub initial_k: f64,
    /// Steam turbine heat-to-electricity efficiency.
    pub steam_efficiency: f64,
}

impl Default for ThermalSection {
    fn default() -> Self {
        let t = ThermalParams::default();
        Self {
            capacity_mwh: 50.0,
            specific_heat_j_kg_k: 1500.0,
            specific_heat_slope: 0.0,
            loss_conductance_w_k: t.ua,
            eta_in: t.eta_in,
            t_min_k: t.t_min,
            t_max_k: t.t_max,
            ambient_k: t.t_ambient,
            initial_k: PlantState::default().temperature,
            steam_efficiency: PlantModel::default().steam_efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectrolyzerSection {
    pub rated_power_mw: f64,
    /// Current density at rated power (A/cm²); sets the cell count.
    pub design_current_density_a_cm2: f64,
    pub cell_area_cm2: f64,
    pub temperature_c: f64,
}

impl Default for ElectrolyzerSection {
    fn default() -> Self {
        Self {
            rated_power_mw: 2.4,
            design_current_density_a_cm2: 0.4,
            cell_area_cm2: 2500.0,
            temperature_c: 80.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TankSection {
    pub volume_m3: f64,
    pub temperature_k: f64,
    pub capacity_kg: f64,
    pub initial_kg: f64,
}

impl Default for TankSection {
    fn default() -> Self {
        Self {
            volume_m3: 30.0,
            temperature_k: 298.15,
            capacity_kg: 1000.0,
            initial_kg: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuelCellSection {
    pub efficiency: f64,
}

impl Default for FuelCellSection {
    fn default() -> Self {
        Self {
            efficiency: FuelCellParams::default().efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpSection {
    pub control_minutes: f64,
    /// Penalty on unmet demand (currency/MWh); ten times the highest
    /// electricity price when unset.
    pub slack_penalty_per_mwh: Option<f64>,
    pub terminal_value: bool,
    pub battery_charge_mw: f64,
    pub thermal_charge_mw: f64,
    pub battery_sell_mw: f64,
    pub battery_buy_mw: f64,
    pub heat_sell_mw: f64,
    pub hydrogen_sell_mol_s: f64,
    pub battery_discharge_mw: f64,
    pub steam_turbine_mw: f64,
    pub fuel_cell_draw_mol_s: f64,
}

impl Default for OcpSection {
    fn default() -> Self {
        let l = ControlLimits::default();
        Self {
            control_minutes: 60.0,
            slack_penalty_per_mwh: None,
            terminal_value: true,
            battery_charge_mw: l.battery_charge / 1e6,
            thermal_charge_mw: l.thermal_charge / 1e6,
            battery_sell_mw: l.battery_sell / 1e6,
            battery_buy_mw: l.battery_buy / 1e6,
            heat_sell_mw: l.heat_sell / 1e6,
            hydrogen_sell_mol_s: l.hydrogen_sell,
            battery_discharge_mw: l.battery_discharge / 1e6,
            steam_turbine_mw: l.steam_turbine / 1e6,
            fuel_cell_draw_mol_s: l.fuel_cell_draw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PricesSection {
    /// Currency/MWh.
    pub electricity_mean: f64,
    pub electricity_std: f64,
    /// Currency/MWh.
    pub heat_mean: f64,
    pub heat_std: f64,
    /// Currency/kg.
    pub hydrogen_mean: f64,
    pub hydrogen_std: f64,
}

impl Default for PricesSection {
    fn default() -> Self {
        let p = PriceConfig::default();
        Self {
            electricity_mean: p.electricity.mean,
            electricity_std: p.electricity.std,
            heat_mean: p.heat.mean,
            heat_std: p.heat.std,
            hydrogen_mean: p.hydrogen.mean,
            hydrogen_std: p.hydrogen.std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub acceptable_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            tol: o.tol,
            acceptable_tol: o.acceptable_tol,
            max_iter: o.max_iter,
        }
    }
}

/// Fully resolved model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub site: SolarSite,
    pub weather: WeatherConfig,
    pub radiation: RadiationParams,
    pub pv: PvParams,
    pub turbine: TurbineParams,
    pub turbine_count: u32,
    pub production_uses_mean_wind: bool,
    pub demand: f64,
    pub model: PlantModel,
    pub initial_state: PlantState,
    pub ocp: OcpConfig,
    pub prices: PriceConfig,
    pub solver: SolverOptions,
}

fn invalid(section: &'static str) -> impl Fn(hybrid_plant_core::Error) -> ConfigError {
    move |source| ConfigError::Invalid { section, source }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn horizon_seconds(&self) -> f64 {
        self.horizon_hours * SECONDS_PER_HOUR
    }

    pub fn site(&self) -> Result<SolarSite, ConfigError> {
        let s = SolarSite {
            latitude: self.site.latitude_deg.to_radians(),
            longitude: self.site.longitude_deg.to_radians(),
            day_of_year: self.site.day_of_year,
            utc_offset: self.site.utc_offset_hours,
        };
        s.validate().map_err(invalid("site"))?;
        Ok(s)
    }

    pub fn weather(&self) -> Result<WeatherConfig, ConfigError> {
        let w = &self.weather;
        let cfg = WeatherConfig {
            wind: WindParams {
                turbulence_length: w.turbulence_length_m,
                turbulence_intensity: w.turbulence_intensity,
                sigma2: w.mean_wind_diffusion,
                sigma2_unit: Sigma2Unit::PerSecond,
                fixed_mean: w.fixed_mean_wind_m_s,
            },
            cloud: CloudParams {
                reversion: w.cloud_reversion_per_hour,
                diffusion: w.cloud_diffusion_per_sqrt_hour,
                legendre: w.cloud_legendre,
                fixed_mean: w.fixed_cloud_mean,
                time_unit_s: SECONDS_PER_HOUR,
            },
            initial_mean_wind: w.initial_mean_wind_m_s,
            initial_cloud: w.initial_cloud_cover,
            horizon: self.horizon_seconds(),
            dt: w.sample_minutes * 60.0,
            wind_substep: w.wind_substep_s,
        };
        cfg.wind.validate().map_err(invalid("weather"))?;
        cfg.cloud.validate().map_err(invalid("weather"))?;
        Ok(cfg)
    }

    pub fn turbine(&self) -> Result<TurbineParams, ConfigError> {
        let t = &self.turbine;
        let p = TurbineParams {
            air_density: t.air_density_kg_m3,
            rotor_radius: t.rotor_radius_m,
            generator_efficiency: t.generator_efficiency,
            cut_in: t.cut_in_m_s,
            rated_speed: t.rated_speed_m_s,
            cut_out: t.cut_out_m_s,
            omega_min: rpm_to_rad_per_s(t.rotor_speed_min_rpm),
            omega_max: rpm_to_rad_per_s(t.rotor_speed_max_rpm),
            pitch_min: t.pitch_min_deg,
            pitch_max: t.pitch_max_deg,
            rated_power: t.rated_power_mw * 1e6,
        };
        p.validate().map_err(invalid("turbine"))?;
        Ok(p)
    }

    pub fn pv(&self) -> Result<PvParams, ConfigError> {
        let p = PvParams {
            area: self.pv.area_m2,
            efficiency: self.pv.efficiency,
        };
        p.validate().map_err(invalid("pv"))?;
        Ok(p)
    }

    pub fn electrolyzer(&self) -> Result<ElectrolyzerParams, ConfigError> {
        let e = &self.electrolyzer;
        let base = ElectrolyzerParams {
            area: e.cell_area_cm2,
            temperature: e.temperature_c,
            ..ElectrolyzerParams::default()
        };
        for (name, v) in [
            ("electrolyzer rated power", e.rated_power_mw),
            ("design current density", e.design_current_density_a_cm2),
            ("cell area", e.cell_area_cm2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid {
                    section: "electrolyzer",
                    source: hybrid_plant_core::Error::OutOfDomain {
                        name,
                        value: v,
                        domain: "(0, inf)",
                    },
                });
            }
        }
        let p =
            ElectrolyzerParams::sized(base, e.rated_power_mw * 1e6, e.design_current_density_a_cm2);
        p.validate().map_err(invalid("electrolyzer"))?;
        Ok(p)
    }

    pub fn model(&self) -> Result<PlantModel, ConfigError> {
        let b = &self.battery;
        let battery = BatteryParams {
            self_discharge: b.self_discharge_per_s,
            eta_in: b.eta_in,
            eta_out: b.eta_out,
            e_min: b.min_energy_mwh * J_PER_MWH,
            e_max: b.capacity_mwh * J_PER_MWH,
        };
        let t = &self.thermal;
        let mut thermal = ThermalParams {
            mass: 1.0,
            specific_heat: if t.specific_heat_slope == 0.0 {
                SpecificHeat::Constant(t.specific_heat_j_kg_k)
            } else {
                SpecificHeat::Affine {
                    intercept: t.specific_heat_j_kg_k,
                    slope: t.specific_heat_slope,
                }
            },
            ua: t.loss_conductance_w_k,
            eta_in: t.eta_in,
            t_min: t.t_min_k,
            t_max: t.t_max_k,
            t_ambient: t.ambient_k,
        };
        thermal.validate().map_err(invalid("thermal"))?;
        thermal.mass = mass_for_capacity(t.capacity_mwh * J_PER_MWH, &thermal);
        let tank = TankParams {
            volume: self.tank.volume_m3,
            temperature: self.tank.temperature_k,
            capacity: self.tank.capacity_kg / MOLAR_MASS_H2,
            ..TankParams::default()
        };
        let model = PlantModel {
            battery,
            thermal,
            electrolyzer: self.electrolyzer()?,
            tank,
            fuel_cell: FuelCellParams {
                efficiency: self.fuel_cell.efficiency,
            },
            steam_efficiency: t.steam_efficiency,
        };
        model.validate().map_err(invalid("storage"))?;
        Ok(model)
    }

    pub fn initial_state(&self) -> PlantState {
        PlantState {
            battery_energy: self.battery.initial_mwh * J_PER_MWH,
            temperature: self.thermal.initial_k,
            hydrogen: self.tank.initial_kg / MOLAR_MASS_H2,
        }
    }

    pub fn ocp(&self) -> Result<OcpConfig, ConfigError> {
        let o = &self.ocp;
        let cfg = OcpConfig {
            horizon: self.horizon_seconds(),
            dt_sample: self.weather.sample_minutes * 60.0,
            dt_control: o.control_minutes * 60.0,
            limits: ControlLimits {
                battery_charge: o.battery_charge_mw * 1e6,
                thermal_charge: o.thermal_charge_mw * 1e6,
                battery_sell: o.battery_sell_mw * 1e6,
                battery_buy: o.battery_buy_mw * 1e6,
                heat_sell: o.heat_sell_mw * 1e6,
                hydrogen_sell: o.hydrogen_sell_mol_s,
                battery_discharge: o.battery_discharge_mw * 1e6,
                steam_turbine: o.steam_turbine_mw * 1e6,
                fuel_cell_draw: o.fuel_cell_draw_mol_s,
            },
            slack_penalty: o.slack_penalty_per_mwh,
            terminal_value: o.terminal_value,
        };
        cfg.validate().map_err(invalid("ocp"))?;
        Ok(cfg)
    }

    pub fn prices(&self) -> PriceConfig {
        let p = &self.prices;
        PriceConfig {
            electricity: PriceSeries {
                mean: p.electricity_mean,
                std: p.electricity_std,
            },
            heat: PriceSeries {
                mean: p.heat_mean,
                std: p.heat_std,
            },
            hydrogen: PriceSeries {
                mean: p.hydrogen_mean,
                std: p.hydrogen_std,
            },
        }
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            acceptable_tol: self.solver.acceptable_tol,
            max_iter: self.solver.max_iter,
            ..SolverOptions::default()
        }
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let model = self.model()?;
        let initial_state = self.initial_state();
        model
            .check_state(&initial_state)
            .map_err(invalid("initial state"))?;
        if !(self.demand.electric_mw.is_finite() && self.demand.electric_mw >= 0.0) {
            return Err(ConfigError::Invalid {
                section: "demand",
                source: hybrid_plant_core::Error::OutOfDomain {
                    name: "electric demand",
                    value: self.demand.electric_mw,
                    domain: "[0, inf)",
                },
            });
        }
        Ok(Resolved {
            site: self.site()?,
            weather: self.weather()?,
            radiation: RadiationParams::default(),
            pv: self.pv()?,
            turbine: self.turbine()?,
            turbine_count: self.turbine.count,
            production_uses_mean_wind: self.weather.production_uses_mean_wind,
            demand: self.demand.electric_mw * 1e6,
            model,
            initial_state,
            ocp: self.ocp()?,
            prices: self.prices(),
            solver: self.solver(),
        })
    }
}
