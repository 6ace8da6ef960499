//! 1D convergence on random and midpoint-centered meshes.

use stagfv::harness::{case_1d, run_1d_study, Family1D, DEFAULT_LEVELS_1D};
use stagfv::mesh1d::CenterPlacement;

fn main() -> stagfv::Result<()> {
    let case = case_1d("sinpi")?;
    for centers in [CenterPlacement::Random, CenterPlacement::Midpoint] {
        let fam = Family1D::Random {
            ratio: 3.0,
            seed: 7,
            centers,
        };
        let r = run_1d_study(&case, &fam, &DEFAULT_LEVELS_1D, false)?;
        print!("{}", r.summary());
    }
    Ok(())
}
