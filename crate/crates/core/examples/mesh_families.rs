//! Generates one mesh per 2D family and prints its quality report.

use stagfv::mesh2d::StaggeredMesh2D;

fn main() -> stagfv::Result<()> {
    let meshes = [
        ("rect", StaggeredMesh2D::gen_rect(9, 9)?),
        ("perturbed", StaggeredMesh2D::gen_perturbed(9, 9, 0.1, 3)?),
        ("trihex", StaggeredMesh2D::gen_tri_hex(9)?),
    ];
    for (name, m) in &meshes {
        println!(
            "== {name}: {} cells ({} boundary), {} duals, {} edges ({} boundary), h = {:.4}",
            m.n_cells(),
            m.n_cb(),
            m.n_v(),
            m.n_edges(),
            m.n_eb(),
            m.h()
        );
        print!("{}", m.validate());
    }
    Ok(())
}
