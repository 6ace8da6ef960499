//! Convergence-study plumbing: reports, files, determinism.

use stagfv::harness::{
    case_1d, case_2d, run_1d_study, run_2d_study, run_consistency_study, ConvergenceReport,
    Family1D, Family2D,
};
use stagfv::mesh1d::CenterPlacement;
use stagfv::stokes2d::DEFAULT_STOKES_TOL;
use stagfv::Error;

#[test]
fn zero_case_has_zero_errors() {
    let r = run_2d_study(
        &case_2d("zero").unwrap(),
        &Family2D::TriHex,
        &[5, 9, 17],
        DEFAULT_STOKES_TOL,
        false,
    )
    .unwrap();
    for rec in &r.records {
        assert!(rec.err_l2 <= 1e-12 && rec.err_h1 <= 1e-12);
    }
    assert_eq!(r.rates.err_l2, Some(f64::INFINITY));
    let r1 = run_1d_study(
        &case_1d("zero").unwrap(),
        &Family1D::Uniform,
        &[8, 16, 32],
        false,
    )
    .unwrap();
    assert!(r1.records.iter().all(|rec| rec.err_h1 == 0.0));
}

#[test]
fn studies_are_deterministic_and_round_trip() {
    let fam = Family2D::Perturbed {
        amplitude: 0.1,
        seed: 3,
    };
    let a = run_2d_study(
        &case_2d("sin2").unwrap(),
        &fam,
        &[5, 9, 17],
        DEFAULT_STOKES_TOL,
        false,
    )
    .unwrap();
    let b = run_2d_study(
        &case_2d("sin2").unwrap(),
        &fam,
        &[5, 9, 17],
        DEFAULT_STOKES_TOL,
        false,
    )
    .unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(ConvergenceReport::from_csv(&a.to_csv()).unwrap(), a);
    assert!(a
        .to_csv()
        .starts_with("level,h,n_dof,err_l2,err_h1,tau_p,tau_f,tau_omega,cg_iters,seconds\n"));
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let fam = Family1D::Random {
        ratio: 3.0,
        seed: 7,
        centers: CenterPlacement::Random,
    };
    let r = run_1d_study(&case_1d("sinpi").unwrap(), &fam, &[16, 32, 64], false).unwrap();
    let files = r.write_files(dir.path(), "study").unwrap();
    let names: Vec<_> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "study.csv",
            "study_err_l2.dat",
            "study_err_h1.dat",
            "study_tau_f.dat"
        ]
    );
    let dat = std::fs::read_to_string(&files[2]).unwrap();
    assert_eq!(dat.lines().count(), 4);
}

#[test]
fn too_few_levels_is_degenerate() {
    let err = run_1d_study(
        &case_1d("sinpi").unwrap(),
        &Family1D::Uniform,
        &[8, 16],
        false,
    )
    .unwrap_err();
    assert!(matches!(err, Error::DegenerateInput(_)));
}

#[test]
fn restriction_consistency_decreases() {
    for fam in [
        Family2D::Rect,
        Family2D::Perturbed {
            amplitude: 0.1,
            seed: 3,
        },
        Family2D::TriHex,
    ] {
        let levels = run_consistency_study(&case_2d("sin2").unwrap(), &fam, &[9, 17, 33]).unwrap();
        for w in levels.windows(2) {
            assert!(
                w[1].psi_error < w[0].psi_error && w[1].omega_error < w[0].omega_error,
                "{levels:?}"
            );
        }
    }
}
