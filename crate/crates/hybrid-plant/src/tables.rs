//! Column-oriented numeric CSV tables with fixed header schemas.

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: column {column} has {found} rows, expected {expected}")]
    Ragged {
        file: String,
        column: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{file}: header {found:?} does not match {expected:?}")]
    Schema {
        file: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("{file}: cannot parse {value:?} in row {row}")]
    Value {
        file: String,
        row: usize,
        value: String,
    },
}

pub const WEATHER: &[&str] = &[
    "time_s",
    "mean_wind_m_s",
    "turbulent_wind_m_s",
    "wind_speed_m_s",
    "cloud_cover",
    "okta",
];

pub const IRRADIANCE: &[&str] = &[
    "time_s",
    "elevation_rad",
    "direct_w_m2",
    "diffuse_w_m2",
    "global_w_m2",
    "pv_power_w",
];

pub const POWER_CURVE: &[&str] = &[
    "wind_speed_m_s",
    "pitch_deg",
    "tip_speed_ratio",
    "cp",
    "rotor_speed_rad_s",
    "rotor_power_w",
    "generator_power_w",
    "torque_n_m",
];

pub const ELECTROLYZER_CURVE: &[&str] = &[
    "current_a",
    "current_density_a_cm2",
    "cell_voltage_v",
    "ohmic_overvoltage_v",
    "activation_overvoltage_v",
    "faraday_efficiency",
    "stack_power_w",
    "hydrogen_rate_mol_s",
];

pub const PRODUCTION: &[&str] = &[
    "time_s",
    "wind_power_w",
    "pv_power_w",
    "production_w",
    "demand_w",
    "surplus_w",
    "deficit_w",
    "electricity_price_per_mwh",
    "heat_price_per_mwh",
    "hydrogen_price_per_kg",
];

pub const CONTROLS: &[&str] = &[
    "time_s",
    "battery_charge_w",
    "thermal_charge_w",
    "electrolyzer_power_w",
    "battery_sell_w",
    "battery_buy_w",
    "heat_sell_w",
    "hydrogen_sell_mol_s",
    "current_a",
    "battery_discharge_w",
    "steam_power_w",
    "fuel_cell_draw_mol_s",
    "fuel_cell_power_w",
    "slack_w",
    "coverage_residual_w",
];

pub const STATES: &[&str] = &[
    "time_s",
    "battery_energy_j",
    "temperature_k",
    "hydrogen_mol",
    "tank_pressure_pa",
    "replay_battery_energy_j",
    "replay_temperature_k",
    "replay_hydrogen_mol",
];

pub const SOLVER_LOG: &[&str] = &[
    "iteration",
    "objective",
    "primal_infeasibility",
    "dual_infeasibility",
    "mu",
    "regularization",
    "alpha_primal",
    "alpha_dual",
    "line_search_trials",
];

/// Named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            columns: vec![Vec::new(); header.len()],
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len(), "row width");
        for (c, &v) in self.columns.iter_mut().zip(row) {
            c.push(v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.header.iter().position(|h| *h == name)?;
        Some(&self.columns[i])
    }

    /// Writes the table and returns its row count.
    pub fn write(&self, path: &Path) -> Result<usize, TableError> {
        let file = path.display().to_string();
        let rows = self.rows();
        for (name, col) in self.header.iter().zip(&self.columns) {
            if col.len() != rows {
                return Err(TableError::Ragged {
                    file,
                    column: name,
                    expected: rows,
                    found: col.len(),
                });
            }
        }
        let wrap = |source| TableError::Csv {
            file: file.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        w.write_record(self.header).map_err(wrap)?;
        let mut record = csv::StringRecord::new();
        for r in 0..rows {
            record.clear();
            for col in &self.columns {
                record.push_field(&col[r].to_string());
            }
            w.write_record(&record).map_err(wrap)?;
        }
        w.flush().map_err(|e| wrap(e.into()))?;
        Ok(rows)
    }
}

/// Reads a table written by [`Table::write`], requiring `header` exactly.
pub fn read_table(path: &Path, header: &'static [&'static str]) -> Result<Table, TableError> {
    let file = path.display().to_string();
    let wrap = |source| TableError::Csv {
        file: file.clone(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let found: Vec<String> = r
        .headers()
        .map_err(wrap)?
        .iter()
        .map(String::from)
        .collect();
    if found != header {
        return Err(TableError::Schema {
            file,
            expected: header.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    let mut table = Table::new(header);
    let mut row = Vec::with_capacity(header.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(wrap)?;
        row.clear();
        for field in rec.iter() {
            let v = field.parse::<f64>().map_err(|_| TableError::Value {
                file: file.clone(),
                row: i + 1,
                value: field.to_string(),
            })?;
            row.push(v);
        }
        table.push_row(&row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(WEATHER);
        t.push_row(&[0.0, 1.0 / 3.0, -2.5e-17, 1e300, 0.5, 4.0]);
        t.push_row(&[600.0, 7.1, 0.0, 7.1, f64::MIN_POSITIVE, 8.0]);
        assert_eq!(t.write(&path).unwrap(), 2);
        assert_eq!(read_table(&path, WEATHER).unwrap(), t);
    }

    #[test]
    fn wrong_header_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        Table::new(IRRADIANCE).write(&path).unwrap();
        assert!(matches!(
            read_table(&path, WEATHER),
            Err(TableError::Schema { .. })
        ));
    }

    #[test]
    fn ragged_columns_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.columns[0].push(1.0);
        assert!(matches!(
            t.write(&dir.path().join("t.csv")),
            Err(TableError::Ragged { .. })
        ));
    }
}
