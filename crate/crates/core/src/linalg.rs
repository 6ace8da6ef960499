//! Sparse symmetric positive-definite linear algebra.
//!
//! Matrices are assembled from coordinate triplets and stored in
//! compressed-row form. Solves go through Jacobi-preconditioned conjugate
//! gradients, or the Thomas algorithm for tridiagonal systems.

use std::fmt;

use crate::error::{Error, Result};

/// Relative symmetry tolerance, scaled by the largest stored magnitude.
const SYMMETRY_TOL: f64 = 1e-12;

/// Coordinate-triplet accumulator. Duplicate entries are summed on build.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, capacity: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    /// Converts to compressed-row form and checks the SPD structural
    /// invariants (symmetry, strictly positive diagonal).
    pub fn build(self) -> Result<SparseSpd> {
        let mut entries = self.entries;
        entries.sort_by_key(|a| (a.0, a.1));

        let mut row_offsets = vec![0usize; self.n + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n {
            row_offsets[r + 1] += row_offsets[r];
        }

        let a = SparseSpd {
            n: self.n,
            row_offsets,
            col_indices,
            values,
            symmetry_checked: false,
        };
        a.check_invariants()?;
        Ok(SparseSpd {
            symmetry_checked: true,
            ..a
        })
    }
}

/// Symmetric positive-definite operator in compressed-row layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSpd {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetry_checked: bool,
}

impl SparseSpd {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn symmetry_checked(&self) -> bool {
        self.symmetry_checked
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry `(row, col)`, zero when not stored.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_offsets[row]..self.row_offsets[row + 1];
        match self.col_indices[range.clone()].binary_search(&col) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check_invariants(&self) -> Result<()> {
        let scale = self.max_abs();
        for row in 0..self.n {
            for k in self.row_offsets[row]..self.row_offsets[row + 1] {
                let col = self.col_indices[k];
                let diff = (self.values[k] - self.get(col, row)).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row, col, diff });
                }
            }
            let d = self.get(row, row);
            if !(d > 0.0) {
                return Err(Error::NonPositiveDiagonal { row, value: d });
            }
        }
        Ok(())
    }

    /// `y = A x`. Pure; safe to call concurrently.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (row, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_offsets[row]..self.row_offsets[row + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yr = acc;
        }
    }

    /// `xᵀ A x / xᵀ x`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        dot(x, &ax) / dot(x, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

impl fmt::Display for SolveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} iterations, relative residual {:.3e}, {}",
            self.iterations,
            self.relative_residual,
            if self.converged {
                "converged"
            } else {
                "not converged"
            }
        )
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_relative_residual(a: &SparseSpd, x: &[f64], b: &[f64], b_norm: f64) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (q - p) * (q - p))
        .sum::<f64>()
        .sqrt();
    r / b_norm
}

/// Jacobi-preconditioned conjugate gradients.
///
/// Convergence is declared on the true residual `‖b − Ax‖/‖b‖ ≤ tol`.
/// `max_iter = None` means `10·n`. On failure the best iterate seen is
/// returned inside [`Error::NonConvergence`].
pub fn cg_solve(
    a: &SparseSpd,
    b: &[f64],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cg tolerance {tol} outside (0, 1)"
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "right-hand side is not finite".into(),
        ));
    }
    let max_iter = max_iter.unwrap_or(10 * n.max(1));

    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }

    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    let mut best_x = x.clone();
    let mut best_res = 1.0;

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rec = norm2(&r) / b_norm;
        if rec <= tol {
            // Recurrence residual drifts from the true one; confirm before stopping.
            let res = true_relative_residual(a, &x, b, b_norm);
            if res <= tol {
                return Ok((
                    x,
                    SolveReport {
                        iterations: it,
                        relative_residual: res,
                        converged: true,
                    },
                ));
            }
            if res < best_res {
                best_res = res;
                best_x.copy_from_slice(&x);
            }
            // restart from the true residual
            let ax = a.mul_vec(&x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        if rec < best_res {
            best_res = rec;
            best_x.copy_from_slice(&x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let res = true_relative_residual(a, &best_x, b, b_norm);
    Err(Error::NonConvergence {
        x: best_x,
        report: SolveReport {
            iterations: max_iter,
            relative_residual: res,
            converged: false,
        },
    })
}

/// Direct solve of a tridiagonal system.
///
/// `lower` and `upper` hold the sub- and super-diagonals (length `n − 1`),
/// `diag` the main diagonal (length `n`).
pub fn thomas_solve(lower: &[f64], diag: &[f64], upper: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let off = n.saturating_sub(1);
    if lower.len() != off {
        return Err(Error::DimensionMismatch {
            expected: off,
            got: lower.len(),
        });
    }
    if upper.len() != off {
        return Err(Error::DimensionMismatch {
            expected: off,
            got: upper.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::ZeroPivot { row: 0 });
    }
    if n > 1 {
        c[0] = upper[0] / diag[0];
    }
    d[0] = b[0] / diag[0];
    for i in 1..n {
        let pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        if i < n - 1 {
            c[i] = upper[i] / pivot;
        }
        d[i] = (b[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> SparseSpd {
        let mut t = TripletBuilder::new(n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.build().unwrap()
    }

    fn tridiag_to_spd(lower: &[f64], diag: &[f64], upper: &[f64]) -> SparseSpd {
        let n = diag.len();
        let mut t = TripletBuilder::new(n);
        for i in 0..n {
            t.push(i, i, diag[i]);
            if i + 1 < n {
                t.push(i, i + 1, upper[i]);
                t.push(i + 1, i, lower[i]);
            }
        }
        t.build().unwrap()
    }

    #[test]
    fn cg_identity_one_iteration() {
        let (x, rep) = cg_solve(&identity(3), &[1.0, 2.0, 3.0], DEFAULT_TOL, None).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn cg_diagonal() {
        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 2.0);
        t.push(1, 1, 4.0);
        let (x, _) = cg_solve(&t.build().unwrap(), &[2.0, 4.0], DEFAULT_TOL, None).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cg_matches_thomas_on_uniform_laplacian() {
        // n = 4 unknowns of -u'' with h = 1/5, scheme row i: (-u_{i-1} + 2u_i - u_{i+1}) / h^2
        let h = 0.2f64;
        let n = 4;
        let s = 1.0 / (h * h);
        let lower = vec![-s; n - 1];
        let upper = vec![-s; n - 1];
        let diag = vec![2.0 * s; n];
        let b = vec![1.0; n];
        let direct = thomas_solve(&lower, &diag, &upper, &b).unwrap();
        let a = tridiag_to_spd(&lower, &diag, &upper);
        let (x, rep) = cg_solve(&a, &b, DEFAULT_TOL, None).unwrap();
        assert!(rep.converged);
        for (p, q) in x.iter().zip(&direct) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let (x, rep) = cg_solve(&identity(4), &[0.0; 4], DEFAULT_TOL, None).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            cg_solve(&identity(3), &[1.0, 2.0], DEFAULT_TOL, None),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn nonconvergence_returns_best_iterate() {
        let n = 50;
        let lower = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let a = tridiag_to_spd(&lower, &diag, &lower);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        match cg_solve(&a, &b, 1e-14, Some(3)) {
            Err(Error::NonConvergence { x, report }) => {
                assert_eq!(x.len(), n);
                assert!(!report.converged);
                assert!(report.relative_residual <= 1.0);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn builder_sums_duplicates_and_rejects_asymmetry() {
        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 1.0);
        t.push(1, 1, 3.0);
        t.push(0, 1, -1.0);
        t.push(1, 0, -0.5);
        t.push(1, 0, -0.5);
        let a = t.build().unwrap();
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.nnz(), 4);

        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        t.push(0, 1, 0.5);
        assert!(matches!(t.build(), Err(Error::NotSymmetric { .. })));

        let mut t = TripletBuilder::new(2);
        t.push(0, 0, 1.0);
        t.push(1, 1, -1.0);
        assert!(matches!(
            t.build(),
            Err(Error::NonPositiveDiagonal { row: 1, .. })
        ));
    }

    #[test]
    fn thomas_identity() {
        let b = [3.0, -1.0, 7.5];
        let x = thomas_solve(&[0.0, 0.0], &[1.0, 1.0, 1.0], &[0.0, 0.0], &b).unwrap();
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn thomas_two_by_two() {
        let x = thomas_solve(&[-1.0], &[2.0, 2.0], &[-1.0], &[1.0, 0.0]).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn thomas_zero_pivot() {
        assert!(matches!(
            thomas_solve(&[1.0], &[1.0, 1.0], &[1.0], &[1.0, 1.0]),
            Err(Error::ZeroPivot { row: 1 })
        ));
    }

    #[test]
    fn thomas_random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 50;
        let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        // diagonal dominance makes the matrix SPD
        let diag: Vec<f64> = (0..n).map(|_| 2.0 + rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = thomas_solve(&off, &diag, &off, &b).unwrap();
        let a = tridiag_to_spd(&off, &diag, &off);
        let ax = a.mul_vec(&x);
        let res = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(res <= 1e-12, "residual {res:e}");
    }
}
