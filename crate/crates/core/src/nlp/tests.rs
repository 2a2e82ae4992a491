use super::*;

/// Dense test problem built from closures.
struct Dense<F, G, C, J, H> {
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x0: Vec<f64>,
    f: F,
    g: G,
    c: C,
    j: J,
    h: H,
}

impl<F, G, C, J, H> NlpProblem for Dense<F, G, C, J, H>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64], &mut [f64]),
    C: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64], &mut [f64]),
    H: Fn(&[f64], f64, &[f64], &mut [f64]),
{
    fn num_variables(&self) -> usize {
        self.n
    }
    fn num_constraints(&self) -> usize {
        self.m
    }
    fn bounds(&self, lower: &mut [f64], upper: &mut [f64]) {
        lower.copy_from_slice(&self.lower);
        upper.copy_from_slice(&self.upper);
    }
    fn initial_point(&self, x: &mut [f64]) {
        x.copy_from_slice(&self.x0);
    }
    fn objective(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.g)(x, grad)
    }
    fn constraints(&self, x: &[f64], c: &mut [f64]) {
        (self.c)(x, c)
    }
    fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|r| (0..self.n).map(move |c| (r, c)))
            .collect()
    }
    fn jacobian_values(&self, x: &[f64], values: &mut [f64]) {
        (self.j)(x, values)
    }
    fn hessian_structure(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|r| (0..=r).map(move |c| (r, c)))
            .collect()
    }
    fn hessian_values(&self, x: &[f64], obj_factor: f64, lambda: &[f64], values: &mut [f64]) {
        (self.h)(x, obj_factor, lambda, values)
    }
}

#[test]
fn clipped_quadratic() {
    // max −(y−3)² on [0, 2], written as a minimization.
    let p = Dense {
        n: 1,
        m: 0,
        lower: vec![0.0],
        upper: vec![2.0],
        x0: vec![0.0],
        f: |x: &[f64]| (x[0] - 3.0).powi(2),
        g: |x: &[f64], g: &mut [f64]| g[0] = 2.0 * (x[0] - 3.0),
        c: |_: &[f64], _: &mut [f64]| {},
        j: |_: &[f64], _: &mut [f64]| {},
        h: |_: &[f64], s: f64, _: &[f64], h: &mut [f64]| h[0] = 2.0 * s,
    };
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Solved);
    assert!((sol.x[0] - 2.0).abs() < 1e-7);
    assert!((sol.objective - 1.0).abs() < 1e-6);
    assert!(sol.z_upper[0] > 1.0);
}

#[test]
fn degenerate_simplex_tie() {
    let c = 3.5;
    let p = Dense {
        n: 2,
        m: 1,
        lower: vec![0.0, 0.0],
        upper: vec![f64::INFINITY; 2],
        x0: vec![0.0, 0.0],
        f: move |x: &[f64]| -c * (x[0] + x[1]),
        g: move |_: &[f64], g: &mut [f64]| g.fill(-c),
        c: |x: &[f64], r: &mut [f64]| r[0] = x[0] + x[1] - 1.0,
        j: |_: &[f64], v: &mut [f64]| v.fill(1.0),
        h: |_: &[f64], _: f64, _: &[f64], h: &mut [f64]| h.fill(0.0),
    };
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert!(sol.status.converged());
    assert!((sol.objective + c).abs() < 1e-7);
    assert!(sol.constraint_violation < 1e-9);
    assert!(sol.x.iter().all(|&v| v >= 0.0));
}

fn hs071() -> impl NlpProblem {
    // HS071 with its product inequality turned into an equality with slack x4 >= 0.
    Dense {
        n: 5,
        m: 2,
        lower: vec![1.0, 1.0, 1.0, 1.0, 0.0],
        upper: vec![5.0, 5.0, 5.0, 5.0, f64::INFINITY],
        x0: vec![1.0, 5.0, 5.0, 1.0, 0.0],
        f: |x: &[f64]| x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2],
        g: |x: &[f64], g: &mut [f64]| {
            g[0] = x[3] * (2.0 * x[0] + x[1] + x[2]);
            g[1] = x[0] * x[3];
            g[2] = x[0] * x[3] + 1.0;
            g[3] = x[0] * (x[0] + x[1] + x[2]);
            g[4] = 0.0;
        },
        c: |x: &[f64], r: &mut [f64]| {
            r[0] = x[0] * x[1] * x[2] * x[3] - x[4] - 25.0;
            r[1] = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] - 40.0;
        },
        j: |x: &[f64], v: &mut [f64]| {
            v[0] = x[1] * x[2] * x[3];
            v[1] = x[0] * x[2] * x[3];
            v[2] = x[0] * x[1] * x[3];
            v[3] = x[0] * x[1] * x[2];
            v[4] = -1.0;
            for i in 0..4 {
                v[5 + i] = 2.0 * x[i];
            }
            v[9] = 0.0;
        },
        h: |x: &[f64], s: f64, l: &[f64], h: &mut [f64]| {
            let mut d = [[0.0; 5]; 5];
            d[0][0] = s * 2.0 * x[3];
            d[1][0] = s * x[3];
            d[2][0] = s * x[3];
            d[3][0] = s * (2.0 * x[0] + x[1] + x[2]);
            d[3][1] = s * x[0];
            d[3][2] = s * x[0];
            d[1][0] += l[0] * x[2] * x[3];
            d[2][0] += l[0] * x[1] * x[3];
            d[3][0] += l[0] * x[1] * x[2];
            d[2][1] += l[0] * x[0] * x[3];
            d[3][1] += l[0] * x[0] * x[2];
            d[3][2] += l[0] * x[0] * x[1];
            for (i, row) in d.iter_mut().enumerate().take(4) {
                row[i] += 2.0 * l[1];
            }
            let mut k = 0;
            for (r, row) in d.iter().enumerate() {
                for v in &row[..=r] {
                    h[k] = *v;
                    k += 1;
                }
            }
        },
    }
}

#[test]
fn nonconvex_reference_problem() {
    let p = hs071();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Solved, "{:?}", sol.log.last());
    assert!((sol.objective - 17.014_017_3).abs() < 1e-6);
    let expected = [1.0, 4.743, 3.82115, 1.37941];
    for (a, b) in sol.x.iter().zip(expected) {
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn reference_problem_derivatives() {
    let p = hs071();
    let x = [1.3, 4.1, 3.2, 1.7, 0.4];
    let check = check_derivatives(&p, &x, &[0.7, -1.3], 0.9, 1e-6);
    assert!(check.gradient < 1e-7, "{check:?}");
    assert!(check.jacobian < 1e-7, "{check:?}");
    assert!(check.hessian < 1e-5, "{check:?}");
}

#[test]
fn fixed_variables_and_empty_rows() {
    // x1 is fixed at 0 and forms row 1 alone, which leaves it with no free column.
    let p = Dense {
        n: 3,
        m: 2,
        lower: vec![0.0, 0.0, -1.0],
        upper: vec![0.0, 10.0, 1.0],
        x0: vec![0.0, 1.0, 0.0],
        f: |x: &[f64]| (x[1] - 4.0).powi(2) + x[2] * x[2],
        g: |x: &[f64], g: &mut [f64]| {
            g[0] = 0.0;
            g[1] = 2.0 * (x[1] - 4.0);
            g[2] = 2.0 * x[2];
        },
        c: |x: &[f64], r: &mut [f64]| {
            r[0] = x[1] + x[2] + x[0] - 3.0;
            r[1] = x[0];
        },
        j: |_: &[f64], v: &mut [f64]| {
            v.copy_from_slice(&[1.0, 1.0, 1.0, 1.0, 0.0, 0.0]);
        },
        h: |_: &[f64], s: f64, _: &[f64], h: &mut [f64]| {
            h.fill(0.0);
            h[2] = 2.0 * s;
            h[5] = 2.0 * s;
        },
    };
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Solved);
    assert_eq!(sol.x[0], 0.0);
    // min (a−4)² + b² with a + b = 3 ⇒ a = 3.5, b = −0.5.
    assert!((sol.x[1] - 3.5).abs() < 1e-7);
    assert!((sol.x[2] + 0.5).abs() < 1e-7);
}

#[test]
fn iteration_limit_reports_last_point() {
    let p = hs071();
    let opts = SolverOptions {
        max_iter: 2,
        ..SolverOptions::default()
    };
    let sol = solve(&p, &opts).unwrap();
    assert_eq!(sol.status, SolveStatus::MaxIterations);
    assert_eq!(sol.iterations, 2);
    assert_eq!(sol.log.len(), 3);
    assert!(sol.kkt_residual > opts.tol);
}

#[test]
fn non_finite_start_is_rejected() {
    let p = Dense {
        n: 1,
        m: 0,
        lower: vec![0.0],
        upper: vec![1.0],
        x0: vec![0.5],
        f: |_: &[f64]| f64::NAN,
        g: |_: &[f64], g: &mut [f64]| g[0] = 0.0,
        c: |_: &[f64], _: &mut [f64]| {},
        j: |_: &[f64], _: &mut [f64]| {},
        h: |_: &[f64], _: f64, _: &[f64], h: &mut [f64]| h[0] = 0.0,
    };
    assert!(solve(&p, &SolverOptions::default()).is_err());
}

#[test]
fn inconsistent_bounds_are_rejected() {
    let p = Dense {
        n: 1,
        m: 0,
        lower: vec![2.0],
        upper: vec![1.0],
        x0: vec![0.5],
        f: |x: &[f64]| x[0],
        g: |_: &[f64], g: &mut [f64]| g[0] = 1.0,
        c: |_: &[f64], _: &mut [f64]| {},
        j: |_: &[f64], _: &mut [f64]| {},
        h: |_: &[f64], _: f64, _: &[f64], h: &mut [f64]| h[0] = 0.0,
    };
    assert!(solve(&p, &SolverOptions::default()).is_err());
}
