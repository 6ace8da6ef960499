//! Truncation errors of the vorticity, pressure-gradient and forcing terms
//! on perturbed meshes, plus the restriction consistency study.

use stagfv::harness::{case_2d, fit_rate, run_consistency_study, Family2D};
use stagfv::mesh2d::StaggeredMesh2D;
use stagfv::ops2d::{interior_edge_max, trusted_dual_max};
use stagfv::stokes2d::truncation_diagnostics;

fn main() -> stagfv::Result<()> {
    let ex = case_2d("sin2")?.exact;
    let mut rows = Vec::new();
    for n in [9, 17, 33, 65] {
        let m = StaggeredMesh2D::gen_perturbed(n, n, 0.1, 3)?;
        let t = truncation_diagnostics(&m, &ex);
        let row = (
            m.h(),
            interior_edge_max(&m, &t.tau_p),
            interior_edge_max(&m, &t.tau_f),
            trusted_dual_max(&m, &t.tau_omega),
        );
        println!(
            "h = {:.4}  tau_p {:.3e}  tau_f {:.3e}  tau_omega {:.3e}",
            row.0, row.1, row.2, row.3
        );
        rows.push(row);
    }
    let rate = |pick: fn(&(f64, f64, f64, f64)) -> f64| {
        fit_rate(&rows.iter().map(|r| (r.0, pick(r))).collect::<Vec<_>>())
    };
    println!(
        "rates: tau_p {:.2}  tau_f {:.2}  tau_omega {:.2}",
        rate(|r| r.1)?,
        rate(|r| r.2)?,
        rate(|r| r.3)?
    );

    let case = case_2d("sin2")?;
    for l in run_consistency_study(
        &case,
        &Family2D::Perturbed {
            amplitude: 0.1,
            seed: 3,
        },
        &[9, 17, 33, 65],
    )? {
        println!(
            "h = {:.4}  |R_h psi - psi| {:.3e}  |curl R_h u - omega| {:.3e}",
            l.h, l.psi_error, l.omega_error
        );
    }
    Ok(())
}
