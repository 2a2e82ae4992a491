//! Sparse nonlinear programming: problem interface, interior-point solver and
//! derivative checks.
//!
//! Problems have the form
//!
//! ```text
//! min f(x)   s.t.   c(x) = 0,   x_l <= x <= x_u
//! ```
//!
//! with infinite bounds allowed. The Lagrangian convention is
//! `L = σ·f + yᵀc − z_lᵀ(x − x_l) + z_uᵀ(x − x_u)`.

mod ipm;
pub mod ldl;

use alloc::vec;
use alloc::vec::Vec;

pub use ipm::solve;

/// Callbacks describing a smooth, equality and bound constrained program.
pub trait NlpProblem {
    fn num_variables(&self) -> usize;
    fn num_constraints(&self) -> usize;
    /// Fills variable bounds; use `±f64::INFINITY` for absent bounds.
    fn bounds(&self, lower: &mut [f64], upper: &mut [f64]);
    fn initial_point(&self, x: &mut [f64]);
    fn objective(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    fn constraints(&self, x: &[f64], c: &mut [f64]);
    /// `(row, column)` of each structurally nonzero Jacobian entry.
    fn jacobian_structure(&self) -> Vec<(usize, usize)>;
    fn jacobian_values(&self, x: &[f64], values: &mut [f64]);
    /// `(row, column)` entries of the lower triangle (`row >= column`) of the
    /// Lagrangian Hessian.
    fn hessian_structure(&self) -> Vec<(usize, usize)>;
    /// Values of `obj_factor·∇²f + Σ λ_i ∇²c_i` in the order of
    /// [`NlpProblem::hessian_structure`].
    fn hessian_values(&self, x: &[f64], obj_factor: f64, lambda: &[f64], values: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Scaled overall optimality error at which the solve stops.
    pub tol: f64,
    pub acceptable_tol: f64,
    /// Consecutive iterations below `acceptable_tol` that also end the solve.
    pub acceptable_iter: usize,
    pub max_iter: usize,
    pub mu_init: f64,
    /// Relative and absolute push of the starting point into the bound interior.
    pub bound_push: f64,
    pub bound_frac: f64,
    /// Objective gradients above this are scaled down at the starting point.
    pub max_gradient: f64,
    pub max_line_search: usize,
    /// Iterative refinement passes on each linear solve.
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            acceptable_tol: 1e-6,
            acceptable_iter: 15,
            max_iter: 3000,
            mu_init: 0.1,
            bound_push: 1e-2,
            bound_frac: 1e-2,
            max_gradient: 100.0,
            max_line_search: 60,
            refinement_steps: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    /// Stopped after several iterations below the acceptable tolerance.
    Acceptable,
    MaxIterations,
    LineSearchFailed,
}

impl SolveStatus {
    pub fn converged(self) -> bool {
        matches!(self, Self::Solved | Self::Acceptable)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Solved => "solved",
            Self::Acceptable => "acceptable",
            Self::MaxIterations => "max_iterations",
            Self::LineSearchFailed => "line_search_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterLog {
    pub iteration: usize,
    /// Unscaled objective.
    pub objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub regularization: f64,
    pub alpha_primal: f64,
    pub alpha_dual: f64,
    pub line_search_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlpSolution {
    pub x: Vec<f64>,
    /// Constraint multipliers.
    pub y: Vec<f64>,
    pub z_lower: Vec<f64>,
    pub z_upper: Vec<f64>,
    pub objective: f64,
    /// Scaled overall optimality error.
    pub kkt_residual: f64,
    pub dual_infeasibility: f64,
    pub complementarity: f64,
    /// `max |c_i(x)|`.
    pub constraint_violation: f64,
    /// Multiplier applied to the objective inside the solver.
    pub objective_scaling: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub log: Vec<IterLog>,
}

/// Largest relative errors between analytic and central-difference derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub gradient: f64,
    pub jacobian: f64,
    pub hessian: f64,
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(1.0)
}

/// Compares analytic derivatives with central differences at `x`.
///
/// The Hessian is checked against differences of the Lagrangian gradient with
/// multipliers `lambda`, so the cost is `O(n)` gradient and Jacobian
/// evaluations plus dense `n×n` storage.
pub fn check_derivatives<P: NlpProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    lambda: &[f64],
    obj_factor: f64,
    step: f64,
) -> DerivativeCheck {
    let n = problem.num_variables();
    let m = problem.num_constraints();
    let jac_structure = problem.jacobian_structure();
    let hess_structure = problem.hessian_structure();

    let mut grad = vec![0.0; n];
    problem.gradient(x, &mut grad);
    let mut jac = vec![0.0; jac_structure.len()];
    problem.jacobian_values(x, &mut jac);
    let mut dense_jac = vec![0.0; m * n];
    for (&(r, c), &v) in jac_structure.iter().zip(&jac) {
        dense_jac[r * n + c] += v;
    }
    let mut hess = vec![0.0; hess_structure.len()];
    problem.hessian_values(x, obj_factor, lambda, &mut hess);
    let mut dense_hess = vec![0.0; n * n];
    for (&(r, c), &v) in hess_structure.iter().zip(&hess) {
        dense_hess[r * n + c] += v;
        if r != c {
            dense_hess[c * n + r] += v;
        }
    }

    let lagrangian_gradient = |point: &[f64], out: &mut [f64]| {
        problem.gradient(point, out);
        for v in out.iter_mut() {
            *v *= obj_factor;
        }
        let mut vals = vec![0.0; jac_structure.len()];
        problem.jacobian_values(point, &mut vals);
        for (&(r, c), &v) in jac_structure.iter().zip(&vals) {
            out[c] += lambda[r] * v;
        }
    };

    let mut worst = DerivativeCheck {
        gradient: 0.0,
        jacobian: 0.0,
        hessian: 0.0,
    };
    let mut xp = x.to_vec();
    let mut cp = vec![0.0; m];
    let mut cm = vec![0.0; m];
    let mut lp = vec![0.0; n];
    let mut lm = vec![0.0; n];
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = problem.objective(&xp);
        problem.constraints(&xp, &mut cp);
        lagrangian_gradient(&xp, &mut lp);
        xp[j] = x[j] - h;
        let fm = problem.objective(&xp);
        problem.constraints(&xp, &mut cm);
        lagrangian_gradient(&xp, &mut lm);
        xp[j] = x[j];

        worst.gradient = worst
            .gradient
            .max(relative_error(grad[j], (fp - fm) / (2.0 * h)));
        for i in 0..m {
            let fd = (cp[i] - cm[i]) / (2.0 * h);
            worst.jacobian = worst.jacobian.max(relative_error(dense_jac[i * n + j], fd));
        }
        for i in 0..n {
            let fd = (lp[i] - lm[i]) / (2.0 * h);
            worst.hessian = worst.hessian.max(relative_error(dense_hess[i * n + j], fd));
        }
    }
    worst
}

#[cfg(test)]
mod tests;
