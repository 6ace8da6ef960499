//! MAC scheme for `−Δu + ∇p = f`, `div u = 0`, `u = 0` on the boundary.
//!
//! The velocity is sought as `u_h = perp_grad ψ_h`, which makes it exactly
//! divergence free. With `f_h = perp_grad ψ^f_h + grad φ^f_h` the momentum
//! equation `−perp_grad ω_h + grad p_h = f_h` splits into the vertex Poisson
//! problem `curl perp_grad ψ_h = −ψ^f_h` and `p_h = φ^f_h + const`.

use crate::error::{Error, Result};
use crate::linalg::{cg_solve, norm2, SolveReport, SparseSpd, TripletBuilder};
use crate::mesh2d::{Point, StaggeredMesh2D};
use crate::ops2d::{
    curl, discretize_forcing, grad_cell, inner_dual, inner_edge, perp_grad_dual, restrict_velocity,
    CellField, DiscreteForcing, DualField, EdgeField,
};
use crate::quadrature::segment_mean;

pub const DEFAULT_STOKES_TOL: f64 = 1e-10;

const MAX_REFINEMENTS: usize = 6;

#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub psi: DualField,
    pub u: EdgeField,
    /// `curl u`; values at boundary duals are untrusted.
    pub omega: DualField,
    /// Pressure normalized to zero area-weighted mean.
    pub p: CellField,
    pub forcing: DiscreteForcing,
    pub solve_report: SolveReport,
    /// Max of `|−perp_grad ω + grad p − f|` over edges clear of boundary duals.
    pub momentum_residual_inf: f64,
    /// `max |f_e|`, the scale the residual is compared against.
    pub data_scale: f64,
    pub tol: f64,
}

impl StokesSolution {
    /// `momentum_residual_inf ≤ 10·tol·data_scale`.
    pub fn residual_within_bound(&self) -> bool {
        self.momentum_residual_inf <= 10.0 * self.tol * self.data_scale.max(f64::MIN_POSITIVE)
    }
}

/// Exact fields of a manufactured Stokes solution.
///
/// `u = ∇^⊥ψ = (−ψ_y, ψ_x)`, `ω = Δψ`, and the forcing is
/// `f = ∇^⊥ψ^f + ∇φ^f` with `ψ^f = −ω`, `φ^f = p`.
#[derive(Clone, Copy)]
pub struct ExactStokes {
    pub psi: fn(Point) -> f64,
    pub omega: fn(Point) -> f64,
    pub p: fn(Point) -> f64,
    pub grad_p: fn(Point) -> Point,
    pub psi_f: fn(Point) -> f64,
    pub grad_psi_f: fn(Point) -> Point,
    pub phi_f: fn(Point) -> f64,
    pub grad_phi_f: fn(Point) -> Point,
}

/// `A·(−Δ_h)` over all duals: diagonal `Σ d_e/l_e`, off-diagonal `−d_e/l_e`.
///
/// Boundary edge pairs contribute only to the diagonal; their exterior
/// dual is eliminated with value zero.
pub fn assemble_vertex_laplacian(m: &StaggeredMesh2D) -> Result<SparseSpd> {
    let mut tb = TripletBuilder::with_capacity(m.n_v(), m.n_v() + 4 * m.n_edges());
    for ed in m.edges() {
        let w = ed.d / ed.l;
        tb.push(ed.v1, ed.v1, w);
        if let Some(v2) = ed.v2 {
            tb.push(v2, v2, w);
            tb.push(ed.v1, v2, -w);
            tb.push(v2, ed.v1, -w);
        }
    }
    tb.build()
}

/// `(curl u, curl v)`, the scheme's bilinear form.
pub fn bilinear_form(m: &StaggeredMesh2D, u: &EdgeField, v: &EdgeField) -> f64 {
    inner_dual(m, &curl(m, u), &curl(m, v))
}

pub fn solve_stokes(
    m: &StaggeredMesh2D,
    psi_f: &dyn Fn(Point) -> f64,
    phi_f: &dyn Fn(Point) -> f64,
    tol: f64,
) -> Result<StokesSolution> {
    solve_stokes_discrete(m, discretize_forcing(m, psi_f, phi_f), tol)
}

/// Solves with an already discretized forcing.
pub fn solve_stokes_discrete(
    m: &StaggeredMesh2D,
    forcing: DiscreteForcing,
    tol: f64,
) -> Result<StokesSolution> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} outside (0, 1)"
        )));
    }
    let lap = assemble_vertex_laplacian(m)?;
    let b: Vec<f64> = forcing
        .psi_f
        .values
        .iter()
        .zip(m.dual_areas())
        .map(|(s, a)| s * a)
        .collect();
    let data_scale = forcing.f.max_abs();

    let (mut psi, mut report) = cg_solve(&lap, &b, tol, None)?;
    let mut sol = finish(m, &forcing, psi.clone(), report, data_scale, tol);
    // the momentum residual is a second difference of the Poisson residual,
    // so tighten with refinement steps until it meets its own bound
    for _ in 0..MAX_REFINEMENTS {
        if sol.residual_within_bound() {
            break;
        }
        let lpsi = lap.mul_vec(&psi);
        let r: Vec<f64> = b.iter().zip(&lpsi).map(|(x, y)| x - y).collect();
        if norm2(&r) == 0.0 {
            break;
        }
        let delta = match cg_solve(&lap, &r, 1e-6, None) {
            Ok((d, _)) => d,
            Err(Error::NonConvergence { x, .. }) => x,
            Err(e) => return Err(e),
        };
        let trial: Vec<f64> = psi.iter().zip(&delta).map(|(a, d)| a + d).collect();
        let trial_res = residual_norm(&lap, &trial, &b);
        let bn = norm2(&b);
        if trial_res >= report.relative_residual * bn {
            break;
        }
        psi = trial;
        report = SolveReport {
            iterations: report.iterations,
            relative_residual: trial_res / bn,
            converged: true,
        };
        sol = finish(m, &forcing, psi.clone(), report, data_scale, tol);
    }
    Ok(sol)
}

fn residual_norm(a: &SparseSpd, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    norm2(&b.iter().zip(&ax).map(|(p, q)| p - q).collect::<Vec<_>>())
}

fn finish(
    m: &StaggeredMesh2D,
    forcing: &DiscreteForcing,
    psi: Vec<f64>,
    solve_report: SolveReport,
    data_scale: f64,
    tol: f64,
) -> StokesSolution {
    let psi = DualField { values: psi };
    let u = perp_grad_dual(m, &psi);
    let omega = curl(m, &u);

    let total: f64 = m.cell_areas().iter().sum();
    let mean = forcing
        .phi_f
        .values
        .iter()
        .zip(m.cell_areas())
        .map(|(v, a)| v * a)
        .sum::<f64>()
        / total;
    let p = CellField {
        values: forcing.phi_f.values.iter().map(|v| v - mean).collect(),
    };

    let lhs = perp_grad_dual(m, &omega)
        .scaled(-1.0)
        .add(&grad_cell(m, &p));
    let momentum_residual_inf = m
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, ed)| match ed.v2 {
            Some(v2) => !m.dual_is_boundary()[ed.v1] && !m.dual_is_boundary()[v2],
            None => false,
        })
        .map(|(e, _)| (lhs.values[e] - forcing.f.values[e]).abs())
        .fold(0.0, f64::max);

    StokesSolution {
        psi,
        u,
        omega,
        p,
        forcing: forcing.clone(),
        solve_report,
        momentum_residual_inf,
        data_scale,
        tol,
    }
}

/// `|(ω, ω) − 2(f, u)|` relative to `(ω, ω)`.
pub fn energy_identity_defect(m: &StaggeredMesh2D, sol: &StokesSolution) -> f64 {
    let ww = inner_dual(m, &sol.omega, &sol.omega);
    let fu = 2.0 * inner_edge(m, &sol.forcing.f, &sol.u);
    if ww == 0.0 {
        fu.abs()
    } else {
        (ww - fu).abs() / ww
    }
}

#[derive(Clone, Debug)]
pub struct Truncation {
    /// `curl(R_h u) − ω(x_ν)`.
    pub tau_omega: DualField,
    /// Mean normal pressure gradient over the primary edge minus the center difference.
    pub tau_p: EdgeField,
    /// Mean `f·n` over the primary edge minus its point-value difference form.
    pub tau_f: EdgeField,
}

pub fn truncation_diagnostics(m: &StaggeredMesh2D, exact: &ExactStokes) -> Truncation {
    let ru = restrict_velocity(m, &exact.psi);
    let w = curl(m, &ru);
    let tau_omega = DualField {
        values: w
            .values
            .iter()
            .zip(m.dual_centers())
            .map(|(c, &x)| c - (exact.omega)(x))
            .collect(),
    };

    let mut tau_p = Vec::with_capacity(m.n_edges());
    let mut tau_f = Vec::with_capacity(m.n_edges());
    for ed in m.edges() {
        let p1 = m.dual_centers()[ed.v1];
        let p2 = ed.far;
        let x1 = m.cell_centers()[ed.cells[0]];
        let x2 = m.cell_centers()[ed.cells[1]];
        let n = ed.normal;
        let dn = |g: Point| g[0] * n[0] + g[1] * n[1];

        let mean_dpdn = segment_mean(p1, p2, |x| dn((exact.grad_p)(x)));
        tau_p.push(mean_dpdn - ((exact.p)(x2) - (exact.p)(x1)) / ed.d);

        let f_dot_n = |x: Point| {
            let gs = (exact.grad_psi_f)(x);
            dn([-gs[1], gs[0]]) + dn((exact.grad_phi_f)(x))
        };
        let mean_fn = segment_mean(p1, p2, f_dot_n);
        let discrete = -((exact.psi_f)(p2) - (exact.psi_f)(p1)) / ed.l
            + ((exact.phi_f)(x2) - (exact.phi_f)(x1)) / ed.d;
        tau_f.push(mean_fn - discrete);
    }
    Truncation {
        tau_omega,
        tau_p: EdgeField { values: tau_p },
        tau_f: EdgeField { values: tau_f },
    }
}
