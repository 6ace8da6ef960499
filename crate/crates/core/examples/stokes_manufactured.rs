//! Solves Stokes for `ψ = sin²πx sin²πy`, `p = cos πx cos πy` and reports
//! the structural invariants and errors.

use stagfv::harness::case_2d;
use stagfv::mesh2d::StaggeredMesh2D;
use stagfv::ops2d::{curl, div, interior_edge_norm, restrict_velocity, trusted_dual_norm};
use stagfv::stokes2d::{energy_identity_defect, solve_stokes, DEFAULT_STOKES_TOL};

fn main() -> stagfv::Result<()> {
    let ex = case_2d("sin2")?.exact;
    let m = StaggeredMesh2D::gen_perturbed(33, 33, 0.1, 3)?;
    let sol = solve_stokes(&m, &ex.psi_f, &ex.phi_f, DEFAULT_STOKES_TOL)?;
    let e = sol.u.sub(&restrict_velocity(&m, &ex.psi));
    println!(
        "duals {}  cg iterations {}",
        m.n_v(),
        sol.solve_report.iterations
    );
    println!("max |div u_h|        {:.2e}", div(&m, &sol.u).max_abs());
    println!(
        "momentum residual    {:.2e} (bound ok: {})",
        sol.momentum_residual_inf,
        sol.residual_within_bound()
    );
    println!(
        "energy defect        {:.2e}",
        energy_identity_defect(&m, &sol)
    );
    println!("edge L2 error        {:.3e}", interior_edge_norm(&m, &e));
    println!(
        "curl error           {:.3e}",
        trusted_dual_norm(&m, &curl(&m, &e))
    );
    Ok(())
}
