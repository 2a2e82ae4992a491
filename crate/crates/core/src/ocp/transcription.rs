//! Multiple-shooting transcription with explicit Euler defects.
//!
//! Scaled units inside the NLP: MW, MWh, K, kmol, kA, kmol/h and hours.
//! Variable layout per control interval: four market controls, then for each
//! sample eight allocations followed by the state at the end of the sample.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    check_len, rated_current, slack_penalty, terminal_price, ControlTrajectory,
    DisturbanceTrajectory, OcpConfig, PlantModel, PlantState, StateTrajectory,
};
use crate::hydrogen::{hydrogen_rate_derivatives, stack_power_derivatives, MOLAR_MASS_H2};
use crate::nlp::NlpProblem;
use crate::storage::SpecificHeat;
use crate::{Result, J_PER_MWH, SECONDS_PER_HOUR};

const MW: f64 = 1e6;
const KMOL: f64 = 1e3;
const KA: f64 = 1e3;

const MARKET: usize = 4;
const ALLOC: usize = 8;
const STATES: usize = 3;
const BLOCK: usize = ALLOC + STATES;
const ROWS: usize = 6;

const SELL: usize = 0;
const BUY: usize = 1;
const HEAT: usize = 2;
const H2_OUT: usize = 3;

const B_IN: usize = 0;
const T_IN: usize = 1;
const P_EL: usize = 2;
const CUR: usize = 3;
const D_B: usize = 4;
const D_T: usize = 5;
const D_H2: usize = 6;
const SLACK: usize = 7;

const E: usize = 0;
const TEMP: usize = 1;
const N_H2: usize = 2;

/// Surplus or deficit below this (MW) fixes the matching allocations at zero.
const ZERO_FLOW: f64 = 1e-9;

/// The dispatch problem as an [`NlpProblem`]; the objective is the negated profit.
#[derive(Debug, Clone)]
pub struct TranscribedOcp {
    model: PlantModel,
    d: DisturbanceTrajectory,
    x0: [f64; STATES],
    samples: usize,
    per_interval: usize,
    intervals: usize,
    /// Sample length in hours.
    h: f64,
    penalty: f64,
    terminal_price: f64,
    limits_market: [f64; MARKET],
    limits_alloc: [f64; ALLOC],
    state_lower: [f64; STATES],
    state_upper: [f64; STATES],
    /// Heat capacity `m·c_p` (MWh/K) intercept and slope in T.
    heat_capacity: (f64, f64),
    /// Loss conductance (MW/K).
    ua: f64,
    /// Self-discharge (1/h).
    alpha: f64,
    /// Fuel-cell MW per kmol/h.
    fuel_cell_gain: f64,
    /// currency per (kmol/h · h) at unit hydrogen price.
    hydrogen_value: f64,
    initial_guess: Option<Vec<f64>>,
}

impl TranscribedOcp {
    pub fn new(
        model: &PlantModel,
        cfg: &OcpConfig,
        d: &DisturbanceTrajectory,
        x0: &PlantState,
    ) -> Result<Self> {
        model.validate()?;
        model.check_state(x0)?;
        let per_interval = cfg.samples_per_interval()?;
        let intervals = cfg.intervals()?;
        let samples = per_interval * intervals;
        check_len("disturbance trajectory", samples, d.len())?;
        for v in [
            &d.production,
            &d.demand,
            &d.deficit,
            &d.electricity_price,
            &d.heat_price,
            &d.hydrogen_price,
        ] {
            check_len("disturbance trajectory", samples, v.len())?;
        }
        let l = &cfg.limits;
        let thermal = &model.thermal;
        let heat_capacity = match thermal.specific_heat {
            SpecificHeat::Constant(c) => (thermal.mass * c / J_PER_MWH, 0.0),
            SpecificHeat::Affine { intercept, slope } => (
                thermal.mass * intercept / J_PER_MWH,
                thermal.mass * slope / J_PER_MWH,
            ),
        };
        let flow = SECONDS_PER_HOUR / KMOL;
        Ok(Self {
            model: *model,
            d: d.clone(),
            x0: [
                x0.battery_energy / J_PER_MWH,
                x0.temperature,
                x0.hydrogen / KMOL,
            ],
            samples,
            per_interval,
            intervals,
            h: cfg.dt_sample / SECONDS_PER_HOUR,
            penalty: slack_penalty(cfg, d),
            terminal_price: terminal_price(cfg, d),
            limits_market: [
                l.battery_sell / MW,
                l.battery_buy / MW,
                l.heat_sell / MW,
                l.hydrogen_sell * flow,
            ],
            limits_alloc: [
                l.battery_charge / MW,
                l.thermal_charge / MW,
                model.electrolyzer.rated_power / MW,
                rated_current(&model.electrolyzer)? / KA,
                l.battery_discharge / MW,
                l.steam_turbine / MW,
                l.fuel_cell_draw * flow,
                f64::INFINITY,
            ],
            state_lower: [model.battery.e_min / J_PER_MWH, thermal.t_min, 0.0],
            state_upper: [
                model.battery.e_max / J_PER_MWH,
                thermal.t_max,
                model.tank.capacity / KMOL,
            ],
            heat_capacity,
            ua: thermal.ua / MW,
            alpha: model.battery.self_discharge * SECONDS_PER_HOUR,
            fuel_cell_gain: model.fuel_cell.energy_per_mol() * KMOL / SECONDS_PER_HOUR / MW,
            hydrogen_value: MOLAR_MASS_H2 * KMOL,
            initial_guess: None,
        })
    }

    /// Starts the solver from `x` instead of the zero-control rollout.
    pub fn with_initial_guess(mut self, x: Vec<f64>) -> Result<Self> {
        check_len("initial guess", self.num_variables(), x.len())?;
        self.initial_guess = Some(x);
        Ok(self)
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    fn interval_base(&self, j: usize) -> usize {
        j * (MARKET + self.per_interval * BLOCK)
    }

    fn market(&self, k: usize, which: usize) -> usize {
        self.interval_base(k / self.per_interval) + which
    }

    fn alloc(&self, k: usize, which: usize) -> usize {
        self.interval_base(k / self.per_interval) + MARKET + (k % self.per_interval) * BLOCK + which
    }

    /// Index of state `which` at boundary `k`; boundary 0 is the fixed initial state.
    fn state(&self, k: usize, which: usize) -> Option<usize> {
        (k > 0).then(|| self.alloc(k - 1, ALLOC + which))
    }

    fn state_value(&self, x: &[f64], k: usize, which: usize) -> f64 {
        self.state(k, which).map_or(self.x0[which], |i| x[i])
    }

    fn capacity(&self, t: f64) -> f64 {
        self.heat_capacity.0 + self.heat_capacity.1 * t
    }

    /// Electrolyzer power (MW) and its first two derivatives in kA.
    fn stack(&self, i_ka: f64) -> (f64, f64, f64) {
        stack_power_derivatives(KA * i_ka.max(0.0), &self.model.electrolyzer)
            .map_or((f64::NAN, f64::NAN, f64::NAN), |(p, d1, d2)| {
                (p / MW, d1 * KA / MW, d2 * KA * KA / MW)
            })
    }

    /// Hydrogen production (kmol/h) and its first two derivatives in kA.
    fn production(&self, i_ka: f64) -> (f64, f64, f64) {
        let s = SECONDS_PER_HOUR / KMOL;
        hydrogen_rate_derivatives(KA * i_ka.max(0.0), &self.model.electrolyzer)
            .map_or((f64::NAN, f64::NAN, f64::NAN), |(f, d1, d2)| {
                (f * s, d1 * KA * s, d2 * KA * KA * s)
            })
    }

    fn eta(&self) -> (f64, f64, f64, f64) {
        (
            self.model.battery.eta_in,
            self.model.battery.eta_out,
            self.model.thermal.eta_in,
            self.model.steam_efficiency,
        )
    }

    /// Visits every Jacobian entry as `(row, column, value)` in a fixed order.
    fn visit_jacobian(&self, x: &[f64], mut emit: impl FnMut(usize, usize, f64)) {
        let (eta_b_in, eta_b_out, eta_t_in, eta_steam) = self.eta();
        let h = self.h;
        for k in 0..self.samples {
            let r = ROWS * k;
            let a = |w| self.alloc(k, w);
            let mk = |w| self.market(k, w);

            emit(r, a(B_IN), 1.0);
            emit(r, a(T_IN), 1.0);
            emit(r, a(P_EL), 1.0);

            let (_, dp, _) = self.stack(x[a(CUR)]);
            emit(r + 1, a(P_EL), 1.0);
            emit(r + 1, a(CUR), -dp);

            emit(r + 2, a(D_B), 1.0);
            emit(r + 2, a(D_T), 1.0);
            emit(r + 2, a(D_H2), self.fuel_cell_gain);
            emit(r + 2, a(SLACK), 1.0);

            if let Some(i) = self.state(k, E) {
                emit(r + 3, i, -1.0 + h * self.alpha);
            }
            emit(r + 3, mk(SELL), h / eta_b_out);
            emit(r + 3, mk(BUY), -h * eta_b_in);
            emit(r + 3, a(B_IN), -h * eta_b_in);
            emit(r + 3, a(D_B), h / eta_b_out);
            emit(r + 3, a(ALLOC + E), 1.0);

            let t0 = self.state_value(x, k, TEMP);
            let t1 = x[a(ALLOC + TEMP)];
            if let Some(i) = self.state(k, TEMP) {
                let v = self.heat_capacity.1 * (t1 - t0) - self.capacity(t0) + h * self.ua;
                emit(r + 4, i, v);
            }
            emit(r + 4, mk(HEAT), h);
            emit(r + 4, a(T_IN), -h * eta_t_in);
            emit(r + 4, a(D_T), h / eta_steam);
            emit(r + 4, a(ALLOC + TEMP), self.capacity(t0));

            let (_, dg, _) = self.production(x[a(CUR)]);
            if let Some(i) = self.state(k, N_H2) {
                emit(r + 5, i, -1.0);
            }
            emit(r + 5, mk(H2_OUT), h);
            emit(r + 5, a(CUR), -h * dg);
            emit(r + 5, a(D_H2), h);
            emit(r + 5, a(ALLOC + N_H2), 1.0);
        }
    }

    /// Visits the lower-triangle Hessian entries in a fixed order.
    fn visit_hessian(
        &self,
        x: &[f64],
        obj_factor: f64,
        lambda: &[f64],
        mut emit: impl FnMut(usize, usize, f64),
    ) {
        let h = self.h;
        let slope = self.heat_capacity.1;
        for k in 0..self.samples {
            let r = ROWS * k;
            let cur = self.alloc(k, CUR);
            let (_, _, d2p) = self.stack(x[cur]);
            let (_, _, d2g) = self.production(x[cur]);
            emit(cur, cur, -lambda[r + 1] * d2p - lambda[r + 5] * h * d2g);
            if slope != 0.0 {
                if let Some(i) = self.state(k, TEMP) {
                    let next = self.alloc(k, ALLOC + TEMP);
                    emit(i, i, -2.0 * slope * lambda[r + 4]);
                    emit(next, i, slope * lambda[r + 4]);
                }
            }
        }
        if slope != 0.0 && self.terminal_price != 0.0 {
            if let Some(i) = self.state(self.samples, TEMP) {
                emit(
                    i,
                    i,
                    -obj_factor * self.terminal_price * self.model.steam_efficiency * slope,
                );
            }
        }
    }

    /// Linear objective coefficients (negated profit per unit of each variable).
    fn linear_objective(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.num_variables()];
        let h = self.h;
        for k in 0..self.samples {
            g[self.market(k, SELL)] -= h * self.d.electricity_price[k];
            g[self.market(k, BUY)] += h * self.d.electricity_price[k];
            g[self.market(k, HEAT)] -= h * self.d.heat_price[k];
            g[self.market(k, H2_OUT)] -= h * self.hydrogen_value * self.d.hydrogen_price[k];
            g[self.alloc(k, SLACK)] += h * self.penalty;
        }
        if self.samples > 0 {
            let c = self.terminal_price;
            g[self.state(self.samples, E).unwrap()] -= c * self.model.battery.eta_out;
            g[self.state(self.samples, N_H2).unwrap()] -=
                c * self.model.fuel_cell.energy_per_mol() * KMOL / J_PER_MWH;
        }
        g
    }

    /// Terminal heat value term (currency) and its derivative in `T_N`.
    fn terminal_heat(&self, x: &[f64]) -> (f64, f64) {
        let t = self.state_value(x, self.samples, TEMP);
        let t_min = self.model.thermal.t_min;
        let (c0, c1) = self.heat_capacity;
        let heat = c0 * (t - t_min) + 0.5 * c1 * (t * t - t_min * t_min);
        let scale = self.terminal_price * self.model.steam_efficiency;
        (scale * heat, scale * self.capacity(t))
    }

    /// Splits a solution vector into SI trajectories.
    pub fn unpack(&self, x: &[f64]) -> (ControlTrajectory, StateTrajectory) {
        let n = self.samples;
        let mut c = ControlTrajectory::zeros(n);
        let mut s = StateTrajectory::default();
        let flow = KMOL / SECONDS_PER_HOUR;
        let clip = |v: f64| v.max(0.0);
        for k in 0..n {
            let a = |w| x[self.alloc(k, w)];
            let m = |w| x[self.market(k, w)];
            c.battery_charge[k] = clip(a(B_IN)) * MW;
            c.thermal_charge[k] = clip(a(T_IN)) * MW;
            c.electrolyzer_power[k] = clip(a(P_EL)) * MW;
            c.current[k] = clip(a(CUR)) * KA;
            c.battery_discharge[k] = clip(a(D_B)) * MW;
            c.steam_power[k] = clip(a(D_T)) * MW;
            c.fuel_cell_draw[k] = clip(a(D_H2)) * flow;
            c.fuel_cell_power[k] = clip(a(D_H2)) * self.fuel_cell_gain * MW;
            c.slack[k] = clip(a(SLACK)) * MW;
            c.battery_sell[k] = clip(m(SELL)) * MW;
            c.battery_buy[k] = clip(m(BUY)) * MW;
            c.heat_sell[k] = clip(m(HEAT)) * MW;
            c.hydrogen_sell[k] = clip(m(H2_OUT)) * flow;
        }
        for k in 0..=n {
            s.push(
                k as f64 * self.h * SECONDS_PER_HOUR,
                PlantState {
                    battery_energy: self.state_value(x, k, E) * J_PER_MWH,
                    temperature: self.state_value(x, k, TEMP),
                    hydrogen: self.state_value(x, k, N_H2) * KMOL,
                },
            );
        }
        (c, s)
    }

    /// Packs SI trajectories into a variable vector (market controls are read
    /// from the first sample of each interval).
    pub fn pack(&self, controls: &ControlTrajectory, states: &StateTrajectory) -> Result<Vec<f64>> {
        controls.check(self.samples)?;
        check_len("state trajectory", self.samples + 1, states.len())?;
        let mut x = vec![0.0; self.num_variables()];
        let flow = SECONDS_PER_HOUR / KMOL;
        for k in 0..self.samples {
            x[self.alloc(k, B_IN)] = controls.battery_charge[k] / MW;
            x[self.alloc(k, T_IN)] = controls.thermal_charge[k] / MW;
            x[self.alloc(k, P_EL)] = controls.electrolyzer_power[k] / MW;
            x[self.alloc(k, CUR)] = controls.current[k] / KA;
            x[self.alloc(k, D_B)] = controls.battery_discharge[k] / MW;
            x[self.alloc(k, D_T)] = controls.steam_power[k] / MW;
            x[self.alloc(k, D_H2)] = controls.fuel_cell_draw[k] * flow;
            x[self.alloc(k, SLACK)] = controls.slack[k] / MW;
            if k % self.per_interval == 0 {
                x[self.market(k, SELL)] = controls.battery_sell[k] / MW;
                x[self.market(k, BUY)] = controls.battery_buy[k] / MW;
                x[self.market(k, HEAT)] = controls.heat_sell[k] / MW;
                x[self.market(k, H2_OUT)] = controls.hydrogen_sell[k] * flow;
            }
            x[self.alloc(k, ALLOC + E)] = states.battery_energy[k + 1] / J_PER_MWH;
            x[self.alloc(k, ALLOC + TEMP)] = states.temperature[k + 1];
            x[self.alloc(k, ALLOC + N_H2)] = states.hydrogen[k + 1] / KMOL;
        }
        Ok(x)
    }

    /// Zero controls with the states rolled out from the initial state and
    /// clipped to their bounds.
    fn zero_control_rollout(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_variables()];
        let mut s = self.x0;
        for k in 0..self.samples {
            let (c0, c1) = self.heat_capacity;
            s[E] -= self.h * self.alpha * s[E];
            s[TEMP] -=
                self.h * self.ua * (s[TEMP] - self.model.thermal.t_ambient) / (c0 + c1 * s[TEMP]);
            for w in 0..STATES {
                s[w] = s[w].clamp(self.state_lower[w], self.state_upper[w]);
                x[self.alloc(k, ALLOC + w)] = s[w];
            }
        }
        x
    }
}

impl NlpProblem for TranscribedOcp {
    fn num_variables(&self) -> usize {
        self.intervals * (MARKET + self.per_interval * BLOCK)
    }

    fn num_constraints(&self) -> usize {
        ROWS * self.samples
    }

    fn bounds(&self, lower: &mut [f64], upper: &mut [f64]) {
        lower.fill(0.0);
        for k in 0..self.samples {
            if k % self.per_interval == 0 {
                for w in 0..MARKET {
                    upper[self.market(k, w)] = self.limits_market[w];
                }
            }
            let surplus = self.d.surplus[k] / MW > ZERO_FLOW;
            let deficit = self.d.deficit[k] / MW;
            for w in 0..ALLOC {
                let open = if w <= CUR {
                    surplus
                } else {
                    deficit > ZERO_FLOW
                };
                upper[self.alloc(k, w)] = if open { self.limits_alloc[w] } else { 0.0 };
            }
            if deficit > ZERO_FLOW {
                upper[self.alloc(k, SLACK)] = deficit;
            }
            for w in 0..STATES {
                lower[self.alloc(k, ALLOC + w)] = self.state_lower[w];
                upper[self.alloc(k, ALLOC + w)] = self.state_upper[w];
            }
        }
    }

    fn initial_point(&self, x: &mut [f64]) {
        match &self.initial_guess {
            Some(g) => x.copy_from_slice(g),
            None => x.copy_from_slice(&self.zero_control_rollout()),
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let linear: f64 = self
            .linear_objective()
            .iter()
            .zip(x)
            .map(|(g, v)| g * v)
            .sum();
        let constant = if self.samples == 0 {
            // The terminal state is the fixed initial state.
            let c = self.terminal_price;
            -c * (self.model.battery.eta_out * self.x0[E]
                + self.model.fuel_cell.energy_per_mol() * self.x0[N_H2] * KMOL / J_PER_MWH)
        } else {
            0.0
        };
        linear + constant - self.terminal_heat(x).0
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.copy_from_slice(&self.linear_objective());
        if let Some(i) = self.state(self.samples, TEMP) {
            grad[i] -= self.terminal_heat(x).1;
        }
    }

    fn constraints(&self, x: &[f64], c: &mut [f64]) {
        let (eta_b_in, eta_b_out, eta_t_in, eta_steam) = self.eta();
        let h = self.h;
        for k in 0..self.samples {
            let r = ROWS * k;
            let a = |w| x[self.alloc(k, w)];
            let m = |w| x[self.market(k, w)];
            c[r] = a(B_IN) + a(T_IN) + a(P_EL) - self.d.surplus[k] / MW;
            c[r + 1] = a(P_EL) - self.stack(a(CUR)).0;
            c[r + 2] =
                a(D_B) + a(D_T) + self.fuel_cell_gain * a(D_H2) + a(SLACK) - self.d.deficit[k] / MW;

            let e0 = self.state_value(x, k, E);
            c[r + 3] = a(ALLOC + E)
                - e0
                - h * (-self.alpha * e0 + eta_b_in * (a(B_IN) + m(BUY))
                    - (m(SELL) + a(D_B)) / eta_b_out);

            let t0 = self.state_value(x, k, TEMP);
            c[r + 4] = self.capacity(t0) * (a(ALLOC + TEMP) - t0)
                - h * (eta_t_in * a(T_IN)
                    - self.ua * (t0 - self.model.thermal.t_ambient)
                    - m(HEAT)
                    - a(D_T) / eta_steam);

            let n0 = self.state_value(x, k, N_H2);
            c[r + 5] = a(ALLOC + N_H2) - n0 - h * (self.production(a(CUR)).0 - m(H2_OUT) - a(D_H2));
        }
    }

    fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        let x = vec![0.0; self.num_variables()];
        let mut out = Vec::new();
        self.visit_jacobian(&x, |r, c, _| out.push((r, c)));
        out
    }

    fn jacobian_values(&self, x: &[f64], values: &mut [f64]) {
        let mut k = 0;
        self.visit_jacobian(x, |_, _, v| {
            values[k] = v;
            k += 1;
        });
    }

    fn hessian_structure(&self) -> Vec<(usize, usize)> {
        let x = vec![0.0; self.num_variables()];
        let lambda = vec![0.0; self.num_constraints()];
        let mut out = Vec::new();
        self.visit_hessian(&x, 1.0, &lambda, |r, c, _| out.push((r, c)));
        out
    }

    fn hessian_values(&self, x: &[f64], obj_factor: f64, lambda: &[f64], values: &mut [f64]) {
        let mut k = 0;
        self.visit_hessian(x, obj_factor, lambda, |_, _, v| {
            values[k] = v;
            k += 1;
        });
    }
}
