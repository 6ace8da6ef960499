//! Solves `-u'' = π² sin πx` on a random mesh and compares with `sin πx`.

use std::f64::consts::PI;

use stagfv::elliptic1d::{assemble_and_solve, norms, restrict_primal, Forcing};
use stagfv::mesh1d::{CenterPlacement, Mesh1D};

fn main() -> stagfv::Result<()> {
    let mesh = Mesh1D::gen_random(64, 3.0, 7, CenterPlacement::Random)?;
    let f = |x: f64| PI * PI * (PI * x).sin();
    let u = |x: f64| (PI * x).sin();
    let sol = assemble_and_solve(&mesh, Forcing::Function(&f))?;
    let (l2, h1) = norms(&mesh, &sol.u_h.sub(&restrict_primal(&mesh, &u))?)?;
    println!(
        "N = {}, h = {:.4}, observed ratio = {:.3}",
        mesh.n(),
        mesh.h_max(),
        mesh.quasi_uniformity_ratio()
    );
    println!("|u_h - R_h u|_0 = {l2:.3e}");
    println!("|u_h - R_h u|_1 = {h1:.3e}");
    for (x, v) in mesh.centers().iter().zip(sol.u_h.values()).step_by(8) {
        println!("  x = {x:.4}  u_h = {v:+.6}  u = {:+.6}", u(*x));
    }
    Ok(())
}
