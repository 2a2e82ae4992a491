//! Primal-dual interior-point method with a monotone barrier update, inertia
//! correction, an exact-penalty merit line search and second-order correction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Inherent float methods are only present when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::ldl::{LdlFactor, Skyline};
use super::{IterLog, NlpProblem, NlpSolution, SolveStatus, SolverOptions};
use crate::{Error, Result};

const KAPPA_EPS: f64 = 10.0;
const KAPPA_MU: f64 = 0.2;
const THETA_MU: f64 = 1.5;
const TAU_MIN: f64 = 0.99;
const KAPPA_SIGMA: f64 = 1e10;
const ARMIJO: f64 = 1e-4;
const S_MAX: f64 = 100.0;
const DELTA_W_INIT: f64 = 1e-4;
const DELTA_W_MIN: f64 = 1e-20;
const DELTA_W_MAX: f64 = 1e40;
const DELTA_C: f64 = 1e-8;
const PIVOT_TOL: f64 = 1e-13;
const FIXED_TOL: f64 = 1e-12;
const MIN_STEP: f64 = 1e-14;
const REGULARIZATION_RETRIES: usize = 6;

/// Positions of free variables and active constraints in the KKT matrix.
struct Layout {
    free: Vec<usize>,
    var_pos: Vec<Option<usize>>,
    rows: Vec<usize>,
    row_pos: Vec<Option<usize>>,
    jac: Vec<(usize, usize)>,
    jac_slot: Vec<Option<usize>>,
    hess_slot: Vec<Option<usize>>,
    diag_slot: Vec<usize>,
    pattern: Skyline,
}

impl Layout {
    fn new(
        n: usize,
        m: usize,
        is_free: &[bool],
        jac: Vec<(usize, usize)>,
        hess: &[(usize, usize)],
    ) -> Self {
        let free: Vec<usize> = (0..n).filter(|&i| is_free[i]).collect();
        let mut free_order = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            free_order[i] = k;
        }
        // Each active row goes right after the last free variable it touches.
        let mut last = vec![None::<usize>; m];
        for &(r, c) in &jac {
            if is_free[c] {
                let k = free_order[c];
                last[r] = Some(last[r].map_or(k, |l: usize| l.max(k)));
            }
        }
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); free.len()];
        for (r, l) in last.iter().enumerate() {
            if let Some(k) = l {
                buckets[*k].push(r);
            }
        }
        let mut var_pos = vec![None; n];
        let mut row_pos = vec![None; m];
        let mut rows = Vec::new();
        let mut pos = 0;
        for (k, &i) in free.iter().enumerate() {
            var_pos[i] = Some(pos);
            pos += 1;
            for &r in &buckets[k] {
                row_pos[r] = Some(pos);
                rows.push(r);
                pos += 1;
            }
        }
        let jac_entries: Vec<Option<(usize, usize)>> = jac
            .iter()
            .map(|&(r, c)| Some((row_pos[r]?, var_pos[c]?)))
            .collect();
        let hess_entries: Vec<Option<(usize, usize)>> = hess
            .iter()
            .map(|&(r, c)| Some((var_pos[r]?, var_pos[c]?)))
            .collect();
        let pattern = Skyline::from_pattern(
            pos,
            jac_entries
                .iter()
                .chain(hess_entries.iter())
                .filter_map(|e| *e),
        );
        let jac_slot = jac_entries
            .iter()
            .map(|e| e.map(|(a, b)| pattern.index(a, b)))
            .collect();
        let hess_slot = hess_entries
            .iter()
            .map(|e| e.map(|(a, b)| pattern.index(a, b)))
            .collect();
        let diag_slot = (0..pos).map(|p| pattern.index(p, p)).collect();
        Self {
            free,
            var_pos,
            rows,
            row_pos,
            jac,
            jac_slot,
            hess_slot,
            diag_slot,
            pattern,
        }
    }
}

struct Newton {
    dx: Vec<f64>,
    dy: Vec<f64>,
}

struct Solver<'a, P: NlpProblem + ?Sized> {
    problem: &'a P,
    options: &'a SolverOptions,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    has_lower: Vec<bool>,
    has_upper: Vec<bool>,
    layout: Layout,
    hess_len: usize,
    sigma: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    zl: Vec<f64>,
    zu: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    c: Vec<f64>,
    jac: Vec<f64>,
    mu: f64,
    tau: f64,
    nu: f64,
    last_delta_w: f64,
    base: Skyline,
    work: Skyline,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl<'a, P: NlpProblem + ?Sized> Solver<'a, P> {
    fn slack_lower(&self, i: usize, x: &[f64]) -> f64 {
        x[i] - self.lower[i]
    }

    fn slack_upper(&self, i: usize, x: &[f64]) -> f64 {
        self.upper[i] - x[i]
    }

    fn evaluate_fc(&self, x: &[f64], c: &mut [f64]) -> Option<f64> {
        let f = self.problem.objective(x);
        self.problem.constraints(x, c);
        (f.is_finite() && all_finite(c)).then_some(f)
    }

    fn evaluate_derivatives(&mut self) -> Result<()> {
        self.problem.gradient(&self.x, &mut self.g);
        self.problem.jacobian_values(&self.x, &mut self.jac);
        if !all_finite(&self.g) {
            return Err(Error::Solver("objective gradient is not finite".into()));
        }
        if !all_finite(&self.jac) {
            return Err(Error::Solver("constraint Jacobian is not finite".into()));
        }
        Ok(())
    }

    fn active_l1(&self, c: &[f64]) -> f64 {
        self.layout.rows.iter().map(|&r| c[r].abs()).sum()
    }

    fn merit(&self, x: &[f64], f: f64, c: &[f64]) -> f64 {
        let mut barrier = 0.0;
        for &i in &self.layout.free {
            if self.has_lower[i] {
                barrier -= self.slack_lower(i, x).ln();
            }
            if self.has_upper[i] {
                barrier -= self.slack_upper(i, x).ln();
            }
        }
        self.sigma * f + self.mu * barrier + self.nu * self.active_l1(c)
    }

    /// `σ∇f + Jᵀy − z_l + z_u` on free variables, zero elsewhere.
    fn dual_residual(&self) -> Vec<f64> {
        let mut rd = vec![0.0; self.n];
        for &i in &self.layout.free {
            rd[i] = self.sigma * self.g[i] - self.zl[i] + self.zu[i];
        }
        for (k, &(r, c)) in self.layout.jac.iter().enumerate() {
            if self.layout.var_pos[c].is_some() && self.layout.row_pos[r].is_some() {
                rd[c] += self.y[r] * self.jac[k];
            }
        }
        rd
    }

    /// `(dual, primal, complementarity with target mu, s_d, s_c)`.
    fn errors(&self, rd: &[f64], mu: f64) -> (f64, f64, f64, f64, f64) {
        let dual = max_abs(self.layout.free.iter().map(|&i| rd[i]));
        let primal = max_abs(self.layout.rows.iter().map(|&r| self.c[r]));
        let mut compl: f64 = 0.0;
        let mut z_sum = 0.0;
        let mut bounds = 0usize;
        for &i in &self.layout.free {
            if self.has_lower[i] {
                compl = compl.max((self.slack_lower(i, &self.x) * self.zl[i] - mu).abs());
                z_sum += self.zl[i].abs();
                bounds += 1;
            }
            if self.has_upper[i] {
                compl = compl.max((self.slack_upper(i, &self.x) * self.zu[i] - mu).abs());
                z_sum += self.zu[i].abs();
                bounds += 1;
            }
        }
        let y_sum: f64 = self.layout.rows.iter().map(|&r| self.y[r].abs()).sum();
        let count = (bounds + self.layout.rows.len()).max(1) as f64;
        let s_d = ((y_sum + z_sum) / count).max(S_MAX) / S_MAX;
        let s_c = (z_sum / bounds.max(1) as f64).max(S_MAX) / S_MAX;
        (dual, primal, compl, s_d, s_c)
    }

    fn assemble_base(&mut self) {
        let mut hess = vec![0.0; self.hess_len];
        self.problem
            .hessian_values(&self.x, self.sigma, &self.y, &mut hess);
        self.base.clear();
        let values = self.base.values_mut();
        for (k, slot) in self.layout.hess_slot.iter().enumerate() {
            if let Some(s) = slot {
                values[*s] += hess[k];
            }
        }
        for (k, slot) in self.layout.jac_slot.iter().enumerate() {
            if let Some(s) = slot {
                values[*s] += self.jac[k];
            }
        }
    }

    fn barrier_diagonal(&self, i: usize) -> f64 {
        let mut d = 0.0;
        if self.has_lower[i] {
            d += self.zl[i] / self.slack_lower(i, &self.x);
        }
        if self.has_upper[i] {
            d += self.zu[i] / self.slack_upper(i, &self.x);
        }
        d
    }

    fn try_factor(&mut self, delta_w: f64, delta_c: f64) -> core::result::Result<LdlFactor, bool> {
        let shifts: Vec<(usize, f64)> = self
            .layout
            .free
            .iter()
            .map(|&i| {
                let p = self.layout.var_pos[i].unwrap();
                (self.layout.diag_slot[p], self.barrier_diagonal(i) + delta_w)
            })
            .collect();
        self.work.values_mut().copy_from_slice(self.base.values());
        let values = self.work.values_mut();
        for (slot, d) in shifts {
            values[slot] += d;
        }
        for &r in &self.layout.rows {
            let p = self.layout.row_pos[r].unwrap();
            values[self.layout.diag_slot[p]] -= delta_c;
        }
        match LdlFactor::factor(&self.work, PIVOT_TOL) {
            Ok(f) => {
                let (pos, neg) = f.inertia();
                if pos == self.layout.free.len() && neg == self.layout.rows.len() {
                    Ok(f)
                } else {
                    Err(false)
                }
            }
            Err(_) => Err(true),
        }
    }

    /// Factors the KKT matrix, regularizing until the inertia is correct.
    /// `min_delta_w` forces a minimum Hessian shift.
    fn factor_kkt(&mut self, min_delta_w: f64) -> Result<(LdlFactor, f64)> {
        let mut delta_c = 0.0;
        let mut delta_w = min_delta_w;
        let mut first_increase = true;
        loop {
            match self.try_factor(delta_w, delta_c) {
                Ok(f) => {
                    self.last_delta_w = delta_w;
                    return Ok((f, delta_w));
                }
                Err(singular) => {
                    if singular && delta_c == 0.0 {
                        delta_c = DELTA_C * self.mu.powf(0.25);
                        continue;
                    }
                    delta_w = if first_increase && delta_w == 0.0 {
                        if self.last_delta_w == 0.0 {
                            DELTA_W_INIT
                        } else {
                            (self.last_delta_w / 3.0).max(DELTA_W_MIN)
                        }
                    } else if self.last_delta_w == 0.0 {
                        100.0 * delta_w.max(DELTA_W_MIN)
                    } else {
                        8.0 * delta_w.max(DELTA_W_MIN)
                    };
                    first_increase = false;
                    if delta_w > DELTA_W_MAX {
                        return Err(Error::Solver(
                            "KKT matrix could not be regularized to the correct inertia".into(),
                        ));
                    }
                }
            }
        }
    }

    fn solve_kkt(&self, factor: &LdlFactor, rhs: &[f64]) -> Vec<f64> {
        let mut sol = rhs.to_vec();
        factor.solve(&mut sol);
        let scale = max_abs(rhs.iter().copied()).max(1.0);
        let mut residual = vec![0.0; rhs.len()];
        let mut prev = f64::INFINITY;
        for _ in 0..self.options.refinement_steps {
            self.work.mul(&sol, &mut residual);
            for (r, b) in residual.iter_mut().zip(rhs) {
                *r = b - *r;
            }
            let norm = max_abs(residual.iter().copied());
            if norm <= 1e-15 * scale || norm >= prev {
                break;
            }
            prev = norm;
            factor.solve(&mut residual);
            for (s, r) in sol.iter_mut().zip(&residual) {
                *s += r;
            }
        }
        sol
    }

    fn newton_rhs(&self, rd: &[f64], c: &[f64]) -> Vec<f64> {
        let dim = self.base.dim();
        let mut rhs = vec![0.0; dim];
        for &i in &self.layout.free {
            let mut v = rd[i];
            if self.has_lower[i] {
                v += self.zl[i] - self.mu / self.slack_lower(i, &self.x);
            }
            if self.has_upper[i] {
                v += -self.zu[i] + self.mu / self.slack_upper(i, &self.x);
            }
            rhs[self.layout.var_pos[i].unwrap()] = -v;
        }
        for &r in &self.layout.rows {
            rhs[self.layout.row_pos[r].unwrap()] = -c[r];
        }
        rhs
    }

    fn unpack(&self, sol: &[f64]) -> Newton {
        let mut dx = vec![0.0; self.n];
        let mut dy = vec![0.0; self.m];
        for &i in &self.layout.free {
            dx[i] = sol[self.layout.var_pos[i].unwrap()];
        }
        for &r in &self.layout.rows {
            dy[r] = sol[self.layout.row_pos[r].unwrap()];
        }
        Newton { dx, dy }
    }

    fn max_primal_step(&self, dx: &[f64]) -> f64 {
        let mut alpha: f64 = 1.0;
        for &i in &self.layout.free {
            if self.has_lower[i] && dx[i] < 0.0 {
                alpha = alpha.min(-self.tau * self.slack_lower(i, &self.x) / dx[i]);
            }
            if self.has_upper[i] && dx[i] > 0.0 {
                alpha = alpha.min(self.tau * self.slack_upper(i, &self.x) / dx[i]);
            }
        }
        alpha
    }

    fn bound_dual_steps(&self, dx: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut dzl = vec![0.0; self.n];
        let mut dzu = vec![0.0; self.n];
        for &i in &self.layout.free {
            if self.has_lower[i] {
                let s = self.slack_lower(i, &self.x);
                dzl[i] = self.mu / s - self.zl[i] - self.zl[i] / s * dx[i];
            }
            if self.has_upper[i] {
                let s = self.slack_upper(i, &self.x);
                dzu[i] = self.mu / s - self.zu[i] + self.zu[i] / s * dx[i];
            }
        }
        (dzl, dzu)
    }

    fn max_dual_step(&self, dzl: &[f64], dzu: &[f64]) -> f64 {
        let mut alpha: f64 = 1.0;
        for &i in &self.layout.free {
            if self.has_lower[i] && dzl[i] < 0.0 {
                alpha = alpha.min(-self.tau * self.zl[i] / dzl[i]);
            }
            if self.has_upper[i] && dzu[i] < 0.0 {
                alpha = alpha.min(-self.tau * self.zu[i] / dzu[i]);
            }
        }
        alpha
    }

    fn trial_point(&self, dx: &[f64], alpha: f64) -> Vec<f64> {
        let mut xt = self.x.clone();
        for &i in &self.layout.free {
            xt[i] += alpha * dx[i];
        }
        xt
    }

    fn barrier_directional_derivative(&self, dx: &[f64]) -> f64 {
        let mut d = 0.0;
        for &i in &self.layout.free {
            let mut grad = self.sigma * self.g[i];
            if self.has_lower[i] {
                grad -= self.mu / self.slack_lower(i, &self.x);
            }
            if self.has_upper[i] {
                grad += self.mu / self.slack_upper(i, &self.x);
            }
            d += grad * dx[i];
        }
        d
    }
}

/// Accepted step from the line search.
struct Accepted {
    x: Vec<f64>,
    f: f64,
    c: Vec<f64>,
    dx: Vec<f64>,
    dy: Vec<f64>,
    alpha: f64,
    trials: usize,
}

/// Solves `problem` from its initial point.
///
/// Returns `Err` only for malformed problems or non-finite callback values at
/// accepted iterates; non-convergence is reported through
/// [`NlpSolution::status`] with the last iterate.
pub fn solve<P: NlpProblem + ?Sized>(problem: &P, options: &SolverOptions) -> Result<NlpSolution> {
    let n = problem.num_variables();
    let m = problem.num_constraints();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    problem.bounds(&mut lower, &mut upper);
    for i in 0..n {
        if lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i] {
            return Err(Error::InvalidParameter(format!(
                "variable {i} has bounds [{}, {}]",
                lower[i], upper[i]
            )));
        }
    }
    let mut x = vec![0.0; n];
    problem.initial_point(&mut x);
    if !all_finite(&x) {
        return Err(Error::Solver("initial point is not finite".into()));
    }
    let jac_structure = problem.jacobian_structure();
    let hess_structure = problem.hessian_structure();
    for &(r, c) in &jac_structure {
        if r >= m || c >= n {
            return Err(Error::InvalidParameter(format!(
                "Jacobian entry ({r}, {c}) outside {m}x{n}"
            )));
        }
    }
    for &(r, c) in &hess_structure {
        if r >= n || c >= n {
            return Err(Error::InvalidParameter(format!(
                "Hessian entry ({r}, {c}) outside {n}x{n}"
            )));
        }
    }

    let mut is_free = vec![true; n];
    let mut has_lower = vec![false; n];
    let mut has_upper = vec![false; n];
    for i in 0..n {
        if upper[i] - lower[i] <= FIXED_TOL * lower[i].abs().max(1.0) {
            is_free[i] = false;
            x[i] = lower[i];
            continue;
        }
        has_lower[i] = lower[i].is_finite();
        has_upper[i] = upper[i].is_finite();
        let (l, u) = (lower[i], upper[i]);
        match (has_lower[i], has_upper[i]) {
            (true, true) => {
                let pl = (options.bound_push * l.abs().max(1.0)).min(options.bound_frac * (u - l));
                let pu = (options.bound_push * u.abs().max(1.0)).min(options.bound_frac * (u - l));
                x[i] = x[i].clamp(l + pl, u - pu);
            }
            (true, false) => x[i] = x[i].max(l + options.bound_push * l.abs().max(1.0)),
            (false, true) => x[i] = x[i].min(u - options.bound_push * u.abs().max(1.0)),
            (false, false) => {}
        }
    }

    let layout = Layout::new(n, m, &is_free, jac_structure, &hess_structure);
    let base = layout.pattern.clone();
    let work = layout.pattern.clone();
    let nnz = layout.jac.len();
    let mut s = Solver {
        problem,
        options,
        n,
        m,
        zl: has_lower
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
        zu: has_upper
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
        lower,
        upper,
        has_lower,
        has_upper,
        layout,
        hess_len: hess_structure.len(),
        sigma: 1.0,
        x,
        y: vec![0.0; m],
        f: 0.0,
        g: vec![0.0; n],
        c: vec![0.0; m],
        jac: vec![0.0; nnz],
        mu: options.mu_init,
        tau: TAU_MIN.max(1.0 - options.mu_init),
        nu: 1.0,
        last_delta_w: 0.0,
        base,
        work,
    };

    let mut c0 = vec![0.0; m];
    s.f = s.evaluate_fc(&s.x, &mut c0).ok_or_else(|| {
        Error::Solver("objective or constraints not finite at the initial point".into())
    })?;
    s.c = c0;
    s.evaluate_derivatives()?;
    let gmax = max_abs(s.layout.free.iter().map(|&i| s.g[i]));
    if gmax > options.max_gradient {
        s.sigma = options.max_gradient / gmax;
    }

    let mu_min = options.tol / 10.0;
    let mut log = Vec::new();
    let mut iteration = 0;
    let mut acceptable_count = 0;
    let status;
    let mut last_alpha = (0.0, 0.0, 0usize);
    let mut last_reg = 0.0;
    loop {
        let rd = s.dual_residual();
        let (dual, primal, compl, s_d, s_c) = s.errors(&rd, 0.0);
        let error = (dual / s_d).max(primal).max(compl / s_c);
        log.push(IterLog {
            iteration,
            objective: s.f,
            primal_infeasibility: primal,
            dual_infeasibility: dual,
            mu: s.mu,
            regularization: last_reg,
            alpha_primal: last_alpha.0,
            alpha_dual: last_alpha.1,
            line_search_trials: last_alpha.2,
        });
        if error <= options.tol {
            status = SolveStatus::Solved;
            break;
        }
        if error <= options.acceptable_tol {
            acceptable_count += 1;
            if acceptable_count >= options.acceptable_iter {
                status = SolveStatus::Acceptable;
                break;
            }
        } else {
            acceptable_count = 0;
        }
        if iteration >= options.max_iter {
            status = SolveStatus::MaxIterations;
            break;
        }
        if s.layout.free.is_empty() {
            status = SolveStatus::Solved;
            break;
        }

        loop {
            let (dual, primal, compl_mu, s_d, s_c) = s.errors(&rd, s.mu);
            let barrier_error = (dual / s_d).max(primal).max(compl_mu / s_c);
            if barrier_error <= KAPPA_EPS * s.mu && s.mu > mu_min {
                s.mu = mu_min.max((KAPPA_MU * s.mu).min(s.mu.powf(THETA_MU)));
                s.tau = TAU_MIN.max(1.0 - s.mu);
            } else {
                break;
            }
        }

        s.assemble_base();
        let mut accepted = None;
        let mut min_delta_w = 0.0;
        for _ in 0..=REGULARIZATION_RETRIES {
            let (factor, delta_w) = s.factor_kkt(min_delta_w)?;
            last_reg = delta_w;
            let rhs = s.newton_rhs(&rd, &s.c);
            let step = s.unpack(&s.solve_kkt(&factor, &rhs));

            let y_trial = max_abs(s.layout.rows.iter().map(|&r| s.y[r] + step.dy[r]));
            if s.nu < y_trial + 1.0 {
                s.nu = 2.0 * y_trial + 1.0;
            }
            let phi = s.merit(&s.x, s.f, &s.c);
            let theta = s.active_l1(&s.c);
            let slope = (s.barrier_directional_derivative(&step.dx) - s.nu * theta).min(0.0);
            let alpha_max = s.max_primal_step(&step.dx);
            let mut alpha = alpha_max;
            let mut ct = vec![0.0; m];
            for trial in 0..options.max_line_search {
                if alpha < MIN_STEP {
                    break;
                }
                let xt = s.trial_point(&step.dx, alpha);
                if let Some(ft) = s.evaluate_fc(&xt, &mut ct) {
                    let phit = s.merit(&xt, ft, &ct);
                    let tiny = 10.0 * f64::EPSILON * phi.abs().max(1.0);
                    if phit <= phi + ARMIJO * alpha * slope || phit - phi <= tiny {
                        accepted = Some(Accepted {
                            x: xt,
                            f: ft,
                            c: ct.clone(),
                            dx: step.dx.clone(),
                            dy: step.dy.clone(),
                            alpha,
                            trials: trial + 1,
                        });
                        break;
                    }
                    if trial == 0 && s.active_l1(&ct) >= theta {
                        // Second-order correction against the constraint curvature.
                        let mut c_soc = vec![0.0; m];
                        for &r in &s.layout.rows {
                            c_soc[r] = alpha * s.c[r] + ct[r];
                        }
                        let rhs_soc = s.newton_rhs(&rd, &c_soc);
                        let soc = s.unpack(&s.solve_kkt(&factor, &rhs_soc));
                        let alpha_soc = s.max_primal_step(&soc.dx);
                        let xs = s.trial_point(&soc.dx, alpha_soc);
                        let mut cs = vec![0.0; m];
                        if let Some(fs) = s.evaluate_fc(&xs, &mut cs) {
                            if s.merit(&xs, fs, &cs) <= phi + ARMIJO * alpha * slope {
                                accepted = Some(Accepted {
                                    x: xs,
                                    f: fs,
                                    c: cs,
                                    dx: soc.dx,
                                    dy: soc.dy,
                                    alpha: alpha_soc,
                                    trials: trial + 1,
                                });
                                break;
                            }
                        }
                    }
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            min_delta_w = (10.0 * delta_w).max(DELTA_W_INIT);
        }

        let Some(step) = accepted else {
            status = SolveStatus::LineSearchFailed;
            break;
        };
        let (dzl, dzu) = s.bound_dual_steps(&step.dx);
        let alpha_z = s.max_dual_step(&dzl, &dzu);
        for r in 0..m {
            s.y[r] += step.alpha * step.dy[r];
        }
        s.x = step.x;
        s.f = step.f;
        s.c = step.c;
        for i in s.layout.free.clone() {
            if s.has_lower[i] {
                let z = s.zl[i] + alpha_z * dzl[i];
                let sl = s.slack_lower(i, &s.x);
                s.zl[i] = z.clamp(s.mu / (KAPPA_SIGMA * sl), KAPPA_SIGMA * s.mu / sl);
            }
            if s.has_upper[i] {
                let z = s.zu[i] + alpha_z * dzu[i];
                let su = s.slack_upper(i, &s.x);
                s.zu[i] = z.clamp(s.mu / (KAPPA_SIGMA * su), KAPPA_SIGMA * s.mu / su);
            }
        }
        s.evaluate_derivatives()?;
        last_alpha = (step.alpha, alpha_z, step.trials);
        iteration += 1;
    }

    let rd = s.dual_residual();
    let (dual, primal, compl, s_d, s_c) = s.errors(&rd, 0.0);
    let kkt = (dual / s_d).max(primal).max(compl / s_c);
    Ok(NlpSolution {
        constraint_violation: max_abs(s.c.iter().copied()),
        objective: s.f,
        kkt_residual: kkt,
        dual_infeasibility: dual,
        complementarity: compl,
        objective_scaling: s.sigma,
        iterations: iteration,
        status,
        log,
        x: s.x,
        y: s.y,
        z_lower: s.zl,
        z_upper: s.zu,
    })
}
