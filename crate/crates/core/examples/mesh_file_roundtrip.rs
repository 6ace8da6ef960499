//! Saves a tri-hex mesh, reloads it, and solves on the reloaded copy.

use stagfv::harness::case_2d;
use stagfv::mesh2d::StaggeredMesh2D;
use stagfv::stokes2d::{solve_stokes, DEFAULT_STOKES_TOL};

fn main() -> stagfv::Result<()> {
    let m = StaggeredMesh2D::gen_tri_hex(12)?;
    let path = std::env::temp_dir().join("stagfv_trihex12.txt");
    m.save(&path)?;
    let back = StaggeredMesh2D::load(&path, false)?;
    println!(
        "wrote and reloaded {} ({} bytes), identical: {}",
        path.display(),
        std::fs::metadata(&path)?.len(),
        back == m
    );
    let ex = case_2d("sin2")?.exact;
    let sol = solve_stokes(&back, &ex.psi_f, &ex.phi_f, DEFAULT_STOKES_TOL)?;
    println!(
        "solved on reloaded mesh in {} cg iterations",
        sol.solve_report.iterations
    );
    Ok(())
}
