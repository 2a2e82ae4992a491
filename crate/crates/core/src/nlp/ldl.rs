//! Envelope (skyline) storage and `LDLᵀ` factorization of symmetric matrices
//! with 1×1 pivots.
//!
//! No pivoting is performed, so the caller chooses an ordering in which every
//! leading block is nonsingular. The signs of `D` give the inertia.

use alloc::vec;
use alloc::vec::Vec;

/// Lower triangle of a symmetric matrix, row `i` holding columns
/// `first[i]..=i` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Skyline {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl Skyline {
    /// Envelope covering the given entries; `(i, j)` and `(j, i)` are the same entry.
    /// Diagonal entries are always stored.
    pub fn from_pattern<I: IntoIterator<Item = (usize, usize)>>(n: usize, entries: I) -> Self {
        let mut first: Vec<usize> = (0..n).collect();
        for (a, b) in entries {
            let (i, j) = if a >= b { (a, b) } else { (b, a) };
            assert!(i < n, "entry ({a}, {b}) outside a {n}x{n} matrix");
            if j < first[i] {
                first[i] = j;
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        Self {
            first,
            start,
            values: vec![0.0; total],
        }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Number of stored entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Storage index of entry `(i, j)`; panics outside the envelope.
    pub fn index(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a >= b { (a, b) } else { (b, a) };
        assert!(j >= self.first[i], "entry ({a}, {b}) outside the envelope");
        self.start[i] + (j - self.first[i])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.values[k] += v;
    }

    /// `y = A·x`.
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.dim() {
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let f = self.first[i];
            let (off, diag) = row.split_at(row.len() - 1);
            let mut acc = diag[0] * x[i];
            for (k, &a) in off.iter().enumerate() {
                acc += a * x[f + k];
                y[f + k] += a * x[i];
            }
            y[i] += acc;
        }
    }
}

/// A pivot whose magnitude fell below the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub index: usize,
    pub value: f64,
}

/// `A = L·D·Lᵀ` with unit lower-triangular `L` in the envelope of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdlFactor {
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl LdlFactor {
    /// Factors `a`. A pivot `d_i` with `|d_i| <= pivot_tol·max(1, ‖row i of A‖∞)`
    /// is reported as zero.
    pub fn factor(a: &Skyline, pivot_tol: f64) -> Result<Self, ZeroPivot> {
        let n = a.dim();
        let mut lower = a.values.clone();
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let fi = a.first[i];
            let si = a.start[i];
            let row_len = i - fi;
            let row_scale = a.values[si..=si + row_len]
                .iter()
                .fold(1.0_f64, |m, v| m.max(v.abs()));
            // Turn the row into g_ij = L_ij·D_j, one column at a time.
            for j in fi..i {
                let fj = a.first[j];
                let lo = fi.max(fj);
                let mut s = lower[si + (j - fi)];
                if lo < j {
                    let gi = &lower[si + (lo - fi)..si + (j - fi)];
                    let lj = &lower[a.start[j] + (lo - fj)..a.start[j] + (j - fj)];
                    s -= dot(gi, lj);
                }
                lower[si + (j - fi)] = s;
            }
            let mut d = lower[si + row_len];
            for j in fi..i {
                let g = lower[si + (j - fi)];
                let l = g / diag[j];
                lower[si + (j - fi)] = l;
                d -= g * l;
            }
            if !(d.abs() > pivot_tol * row_scale) {
                return Err(ZeroPivot { index: i, value: d });
            }
            lower[si + row_len] = 1.0;
            diag[i] = d;
        }
        Ok(Self {
            first: a.first.clone(),
            start: a.start.clone(),
            lower,
            diag,
        })
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `(positive, negative)` pivot counts.
    pub fn inertia(&self) -> (usize, usize) {
        let pos = self.diag.iter().filter(|d| **d > 0.0).count();
        (pos, self.diag.len() - pos)
    }

    /// Solves `A·x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let f = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1] - 1];
            b[i] -= dot(row, &b[f..i]);
        }
        for (v, d) in b.iter_mut().zip(&self.diag) {
            *v /= d;
        }
        for i in (0..n).rev() {
            let f = self.first[i];
            let bi = b[i];
            let row = &self.lower[self.start[i]..self.start[i + 1] - 1];
            for (k, &l) in row.iter().enumerate() {
                b[f + k] -= l * bi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn random_banded(n: usize, bw: usize, seed: u64) -> (Skyline, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            let lo = i.saturating_sub(rng.random_range(0..=bw));
            for j in lo..=i {
                let v = if i == j {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    sign * (4.0 + rng.random::<f64>())
                } else {
                    rng.random::<f64>() - 0.5
                };
                dense[i][j] = v;
                dense[j][i] = v;
                entries.push((i, j, v));
            }
        }
        let mut s = Skyline::from_pattern(n, entries.iter().map(|e| (e.0, e.1)));
        for (i, j, v) in entries {
            s.add(i, j, v);
        }
        (s, dense)
    }

    #[test]
    fn solve_matches_dense_elimination() {
        for seed in 0..5 {
            let (s, dense) = random_banded(40, 6, seed);
            let f = LdlFactor::factor(&s, 1e-14).unwrap();
            let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
            let mut x = b.clone();
            f.solve(&mut x);
            let reference = dense_solve(dense, b.clone());
            for (a, r) in x.iter().zip(&reference) {
                assert!((a - r).abs() < 1e-9, "{a} vs {r}");
            }
            let mut back = vec![0.0; 40];
            s.mul(&x, &mut back);
            for (a, r) in back.iter().zip(&b) {
                assert!((a - r).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inertia_of_saddle_point_matrix() {
        // [H Jᵀ; J 0] with H positive definite, J full row rank: n+ = 3, n- = 2,
        // with each constraint after its last variable.
        // order: x0, x1, c0(x0,x1), x2, c1(x1,x2)
        let mut s = Skyline::from_pattern(5, [(2, 0), (2, 1), (3, 1), (4, 1), (4, 3)]);
        s.add(0, 0, 2.0);
        s.add(1, 1, 3.0);
        s.add(3, 3, 1.0);
        s.add(3, 1, 0.5);
        s.add(2, 0, 1.0);
        s.add(2, 1, 1.0);
        s.add(4, 1, 1.0);
        s.add(4, 3, -1.0);
        let f = LdlFactor::factor(&s, 1e-14).unwrap();
        assert_eq!(f.inertia(), (3, 2));
        let d = f.diagonal();
        assert!(d[0] > 0.0 && d[1] > 0.0 && d[2] < 0.0 && d[3] > 0.0 && d[4] < 0.0);
    }

    #[test]
    fn indefinite_hessian_shows_in_inertia() {
        let mut s = Skyline::from_pattern(3, [(2, 0), (2, 1)]);
        s.add(0, 0, 1.0);
        s.add(1, 1, -1.0);
        s.add(2, 0, 1.0);
        let f = LdlFactor::factor(&s, 1e-14).unwrap();
        assert_eq!(f.inertia(), (1, 2));
    }

    #[test]
    fn zero_pivot_detected() {
        let mut s = Skyline::from_pattern(2, [(1, 0)]);
        s.add(0, 0, 1.0);
        s.add(1, 0, 1.0);
        s.add(1, 1, 1.0);
        let err = LdlFactor::factor(&s, 1e-12).unwrap_err();
        assert_eq!(err.index, 1);
        let empty_row = Skyline::from_pattern(2, []);
        assert_eq!(LdlFactor::factor(&empty_row, 1e-12).unwrap_err().index, 0);
    }

    #[test]
    fn envelope_indexing() {
        let s = Skyline::from_pattern(4, [(0, 3), (2, 1)]);
        assert_eq!(s.envelope_size(), 1 + 1 + 2 + 4);
        assert_eq!(s.index(3, 0), s.index(0, 3));
        assert_eq!(s.index(3, 3), 7);
    }
}
