//! Cell-centered scheme for `-u'' = f` on `[0, 1]` with `u(0) = u(1) = 0`.
//!
//! Unknowns sit at the primary nodes `x_i`; the flux `u'` lives on dual
//! cells. Ghost values beyond the ends are zero.

use crate::error::Result;
use crate::linalg::{norm2, thomas_solve, SolveReport, SparseSpd, TripletBuilder};
use crate::mesh1d::{FieldKind, Grid1DField, Mesh1D};
use crate::quadrature::gauss5;

/// Right-hand side of the scheme: a pointwise function or precomputed cell values.
#[derive(Clone, Copy)]
pub enum Forcing<'a> {
    Function(&'a dyn Fn(f64) -> f64),
    Field(&'a Grid1DField),
}

#[derive(Clone, Debug)]
pub struct Elliptic1DSolution {
    pub u_h: Grid1DField,
    pub f_h: Grid1DField,
    pub solve_report: SolveReport,
}

/// `(u_{i+1} - u_i) / h_{i+1/2}` on every dual cell, ghosts zero.
pub fn grad_primal(m: &Mesh1D, u: &Grid1DField) -> Result<Grid1DField> {
    u.expect_kind(FieldKind::Primary)?;
    let n = m.n();
    let v = u.values();
    let at = |i: isize| {
        if i < 0 || i as usize >= n {
            0.0
        } else {
            v[i as usize]
        }
    };
    let values = (0..=n)
        .map(|k| (at(k as isize) - at(k as isize - 1)) / m.h_half(k))
        .collect();
    Grid1DField::new(m, FieldKind::Dual, values)
}

/// `(v_{i+1/2} - v_{i-1/2}) / h_i` on every primary cell.
pub fn grad_dual(m: &Mesh1D, v: &Grid1DField) -> Result<Grid1DField> {
    v.expect_kind(FieldKind::Dual)?;
    let w = v.values();
    let values = (0..m.n()).map(|i| (w[i + 1] - w[i]) / m.h(i)).collect();
    Grid1DField::new(m, FieldKind::Primary, values)
}

/// Discrete `L²` pairing weighted by the cell sizes of the fields' partition.
pub fn inner(m: &Mesh1D, a: &Grid1DField, b: &Grid1DField) -> Result<f64> {
    b.expect_kind(a.kind())?;
    let weights = match a.kind() {
        FieldKind::Primary => m.cell_sizes(),
        FieldKind::Dual => m.dual_sizes(),
    };
    Ok(a.values()
        .iter()
        .zip(b.values())
        .zip(&weights)
        .map(|((x, y), w)| x * y * w)
        .sum())
}

/// `(|u|_{0,h}, |u|_{1,h})` for a primary field.
pub fn norms(m: &Mesh1D, u: &Grid1DField) -> Result<(f64, f64)> {
    u.expect_kind(FieldKind::Primary)?;
    let g = grad_primal(m, u)?;
    Ok((inner(m, u, u)?.sqrt(), inner(m, &g, &g)?.sqrt()))
}

/// Tridiagonal bands `(lower, diag, upper)` of the scheme matrix scaled by `h_i`.
pub fn tridiagonal(m: &Mesh1D) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = m.n();
    let diag = (0..n)
        .map(|i| 1.0 / m.h_half(i) + 1.0 / m.h_half(i + 1))
        .collect();
    let off: Vec<f64> = (1..n).map(|k| -1.0 / m.h_half(k)).collect();
    (off.clone(), diag, off)
}

/// The same matrix in compressed-row form.
pub fn assemble_matrix(m: &Mesh1D) -> Result<SparseSpd> {
    let (lower, diag, upper) = tridiagonal(m);
    let mut tb = TripletBuilder::with_capacity(m.n(), 3 * m.n());
    for (i, d) in diag.iter().enumerate() {
        tb.push(i, i, *d);
    }
    for k in 0..lower.len() {
        tb.push(k + 1, k, lower[k]);
        tb.push(k, k + 1, upper[k]);
    }
    tb.build()
}

/// Cell averages `(1/h_i) ∫_{K_i} f` by 5-point Gauss–Legendre.
pub fn cell_averages(m: &Mesh1D, f: &dyn Fn(f64) -> f64) -> Grid1DField {
    let faces = m.faces();
    let values = (0..m.n())
        .map(|i| gauss5(faces[i], faces[i + 1], f) / m.h(i))
        .collect();
    Grid1DField::new(m, FieldKind::Primary, values).expect("length matches by construction")
}

pub fn assemble_and_solve(m: &Mesh1D, f: Forcing<'_>) -> Result<Elliptic1DSolution> {
    let f_h = match f {
        Forcing::Function(func) => cell_averages(m, func),
        Forcing::Field(field) => {
            field.expect_kind(FieldKind::Primary)?;
            Grid1DField::new(m, FieldKind::Primary, field.values().to_vec())?
        }
    };
    let rhs: Vec<f64> = f_h
        .values()
        .iter()
        .enumerate()
        .map(|(i, fi)| m.h(i) * fi)
        .collect();
    let (lower, diag, upper) = tridiagonal(m);
    let u = thomas_solve(&lower, &diag, &upper, &rhs)?;

    let n = m.n();
    let mut resid = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = diag[i] * u[i] - rhs[i];
        if i > 0 {
            r += lower[i - 1] * u[i - 1];
        }
        if i + 1 < n {
            r += upper[i] * u[i + 1];
        }
        resid.push(r);
    }
    let bnorm = norm2(&rhs);
    let relative_residual = if bnorm == 0.0 {
        norm2(&resid)
    } else {
        norm2(&resid) / bnorm
    };
    let solve_report = SolveReport {
        iterations: 1,
        relative_residual,
        converged: true,
    };
    Ok(Elliptic1DSolution {
        u_h: Grid1DField::new(m, FieldKind::Primary, u)?,
        f_h,
        solve_report,
    })
}

/// `u(x_i)` at the primary nodes.
pub fn restrict_primal(m: &Mesh1D, u: &dyn Fn(f64) -> f64) -> Grid1DField {
    let values = m.centers().iter().map(|&x| u(x)).collect();
    Grid1DField::new(m, FieldKind::Primary, values).expect("length matches by construction")
}

/// `w(x_{i+1/2})` at the faces.
pub fn restrict_dual(m: &Mesh1D, w: &dyn Fn(f64) -> f64) -> Grid1DField {
    let values = m.faces().iter().map(|&x| w(x)).collect();
    Grid1DField::new(m, FieldKind::Dual, values).expect("length matches by construction")
}

/// `R_h u' - ∇_h R_h u` on the dual cells.
///
/// The two end values also carry the ghost closure, so they only measure
/// consistency when `u(0) = u(1) = 0`.
pub fn flux_truncation(m: &Mesh1D, u: &dyn Fn(f64) -> f64, du: &dyn Fn(f64) -> f64) -> Grid1DField {
    let g = grad_primal(m, &restrict_primal(m, u)).expect("primary by construction");
    restrict_dual(m, du).sub(&g).expect("both dual")
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::error::Error;
    use crate::mesh1d::CenterPlacement;

    fn primary(m: &Mesh1D, v: Vec<f64>) -> Grid1DField {
        Grid1DField::new(m, FieldKind::Primary, v).unwrap()
    }

    #[test]
    fn grad_primal_constant_field() {
        let m = Mesh1D::gen_uniform(4).unwrap();
        let g = grad_primal(&m, &primary(&m, vec![2.0; 4])).unwrap();
        assert_eq!(g.values(), &[2.0 / 0.125, 0.0, 0.0, 0.0, -2.0 / 0.125]);
    }

    #[test]
    fn grad_primal_linear_is_exact() {
        let m = Mesh1D::gen_uniform(4).unwrap();
        let g = grad_primal(&m, &restrict_primal(&m, &|x| x)).unwrap();
        for v in &g.values()[1..4] {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grad_primal_quadratic_closed_form() {
        let m = Mesh1D::gen_random(8, 3.0, 1, CenterPlacement::Random).unwrap();
        let g = grad_primal(&m, &restrict_primal(&m, &|x| x * x)).unwrap();
        let c = m.centers();
        for k in 1..m.n() {
            let want = c[k - 1] + c[k];
            assert!((g.values()[k] - want).abs() < 1e-13, "face {k}");
        }
    }

    #[test]
    fn grad_dual_cases() {
        let m = Mesh1D::gen_uniform(4).unwrap();
        let c = Grid1DField::new(&m, FieldKind::Dual, vec![3.0; 5]).unwrap();
        assert!(grad_dual(&m, &c)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let lin = restrict_dual(&m, &|x| x);
        assert!(grad_dual(&m, &lin)
            .unwrap()
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(matches!(
            grad_dual(&m, &primary(&m, vec![0.0; 4])),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn grad_dual_hand_sum() {
        let m = Mesh1D::gen_random(8, 2.0, 4, CenterPlacement::Random).unwrap();
        let v: Vec<f64> = (0..9).map(|k| ((k * 7 % 5) as f64) - 1.5).collect();
        let g = grad_dual(
            &m,
            &Grid1DField::new(&m, FieldKind::Dual, v.clone()).unwrap(),
        )
        .unwrap();
        let f = m.faces();
        for i in 0..8 {
            assert_eq!(g.values()[i], (v[i + 1] - v[i]) / (f[i + 1] - f[i]));
        }
    }

    #[test]
    fn inner_cases() {
        let m = Mesh1D::gen_random(9, 2.0, 2, CenterPlacement::Midpoint).unwrap();
        let one = primary(&m, vec![1.0; 9]);
        assert!((inner(&m, &one, &one).unwrap() - 1.0).abs() < 1e-14);
        let m2 = Mesh1D::gen_uniform(2).unwrap();
        let u = primary(&m2, vec![1.0, -1.0]);
        assert_eq!(inner(&m2, &u, &u).unwrap(), 1.0);
        let d = Grid1DField::zeros(&m2, FieldKind::Dual);
        assert!(matches!(
            inner(&m2, &u, &d),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn two_cell_hand_solve() {
        let m = Mesh1D::gen_uniform(2).unwrap();
        let sol = assemble_and_solve(&m, Forcing::Function(&|_| 1.0)).unwrap();
        for v in sol.u_h.values() {
            assert!((v - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_forcing_zero_solution() {
        let m = Mesh1D::gen_random(20, 3.0, 1, CenterPlacement::Random).unwrap();
        let z = Grid1DField::zeros(&m, FieldKind::Primary);
        let sol = assemble_and_solve(&m, Forcing::Field(&z)).unwrap();
        assert!(sol.u_h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_solution_accuracy() {
        let m = Mesh1D::gen_uniform(256).unwrap();
        let f = |x: f64| PI * PI * (PI * x).sin();
        let sol = assemble_and_solve(&m, Forcing::Function(&f)).unwrap();
        let err = sol
            .u_h
            .values()
            .iter()
            .zip(m.centers())
            .map(|(u, x)| (u - (PI * x).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn restrictions() {
        let m = Mesh1D::gen_uniform(2).unwrap();
        assert_eq!(restrict_primal(&m, &|x| x).values(), &[0.25, 0.75]);
        assert_eq!(restrict_primal(&m, &|_| 4.0).values(), &[4.0, 4.0]);
        assert_eq!(restrict_dual(&m, &|x| x).values(), &[0.0, 0.5, 1.0]);
        assert_eq!(restrict_dual(&m, &|_| 4.0).values(), &[4.0; 3]);
        let m4 = Mesh1D::gen_uniform(4).unwrap();
        let s = restrict_primal(&m4, &|x| (PI * x).sin());
        for (k, v) in s.values().iter().enumerate() {
            assert_eq!(*v, ((2 * k + 1) as f64 * PI / 8.0).sin());
        }
        let sd = restrict_dual(&m4, &|x| (PI * x).cos());
        for (k, v) in sd.values().iter().enumerate() {
            assert_eq!(*v, (k as f64 * PI / 4.0).cos());
        }
    }

    #[test]
    fn flux_truncation_exact_cases() {
        let m = Mesh1D::gen_random(12, 3.0, 5, CenterPlacement::Random).unwrap();
        let t = flux_truncation(&m, &|x| 2.0 * x - 0.3, &|_| 2.0);
        assert!(t.values()[1..12].iter().all(|v| v.abs() < 1e-12));
        let mm = Mesh1D::gen_random(12, 3.0, 5, CenterPlacement::Midpoint).unwrap();
        let t = flux_truncation(&mm, &|x| x * x, &|x| 2.0 * x);
        assert!(t.values()[1..12].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn norms_cases() {
        let m = Mesh1D::gen_uniform(2).unwrap();
        assert_eq!(
            norms(&m, &Grid1DField::zeros(&m, FieldKind::Primary)).unwrap(),
            (0.0, 0.0)
        );
        let (l2, h1) = norms(&m, &primary(&m, vec![1.0, 1.0])).unwrap();
        assert!((l2 - 1.0).abs() < 1e-15);
        assert!((h1 - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matrix_is_symmetric_and_matches_bands() {
        let m = Mesh1D::gen_random(30, 3.0, 9, CenterPlacement::Random).unwrap();
        let a = assemble_matrix(&m).unwrap();
        assert_eq!(a.dim(), 30);
        let (lower, diag, _) = tridiagonal(&m);
        assert_eq!(a.get(3, 3), diag[3]);
        assert_eq!(a.get(4, 3), lower[3]);
        assert_eq!(a.get(3, 4), a.get(4, 3));
    }
}
