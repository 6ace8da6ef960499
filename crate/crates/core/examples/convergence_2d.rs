//! 2D Stokes convergence on the three mesh families; writes CSV and
//! plot files when an output directory is given as the first argument.

use std::path::PathBuf;

use stagfv::harness::{case_2d, run_2d_study, Family2D, DEFAULT_LEVELS_2D};
use stagfv::stokes2d::DEFAULT_STOKES_TOL;

fn main() -> stagfv::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let case = case_2d("sin2")?;
    for (stem, fam) in [
        ("rect", Family2D::Rect),
        (
            "perturbed",
            Family2D::Perturbed {
                amplitude: 0.1,
                seed: 3,
            },
        ),
        ("trihex", Family2D::TriHex),
    ] {
        let r = run_2d_study(&case, &fam, &DEFAULT_LEVELS_2D, DEFAULT_STOKES_TOL, true)?;
        print!("{}", r.summary());
        if let Some(dir) = &out {
            r.write_files(dir, stem)?;
        }
    }
    Ok(())
}
