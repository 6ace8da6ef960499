//! Checks the exact discrete calculus identities on random fields.

use stagfv::harness::{identity_suite_1d, identity_suite_2d};
use stagfv::mesh1d::{CenterPlacement, Mesh1D};
use stagfv::mesh2d::StaggeredMesh2D;

fn main() -> stagfv::Result<()> {
    let m1 = Mesh1D::gen_random(40, 3.0, 1, CenterPlacement::Random)?;
    let r = identity_suite_1d(&m1, 50, 1)?;
    println!("1d random N=40: {:?}", r.entries());
    for (name, m) in [
        ("rect", StaggeredMesh2D::gen_rect(16, 16)?),
        ("perturbed", StaggeredMesh2D::gen_perturbed(16, 16, 0.1, 3)?),
        ("trihex", StaggeredMesh2D::gen_tri_hex(16)?),
    ] {
        let r = identity_suite_2d(&m, 50, 2);
        println!("{name}:");
        for (k, v) in r.entries() {
            println!("  {k:<24} {v:.2e}");
        }
        println!("  euler                    {:?}", r.euler);
    }
    Ok(())
}
