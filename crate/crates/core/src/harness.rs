//! Manufactured solutions, convergence studies, and report output.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::elliptic1d::{
    assemble_and_solve, flux_truncation, grad_dual, grad_primal, inner, norms, restrict_primal,
    Forcing,
};
use crate::error::{Error, Result};
use crate::mesh1d::{CenterPlacement, FieldKind, Grid1DField, Mesh1D};
use crate::mesh2d::{polygon_area_centroid, tri_area, Point, StaggeredMesh2D};
use crate::ops2d::{
    curl, div, grad_cell, inner_cell, inner_dual, inner_edge, interior_edge_max,
    interior_edge_norm, perp_grad_dual, restrict_streamfunction, restrict_velocity,
    trusted_dual_max, trusted_dual_norm, CellField, DualField, EdgeField,
};
use crate::stokes2d::{solve_stokes, truncation_diagnostics, ExactStokes};

pub const DEFAULT_LEVELS_1D: [usize; 6] = [16, 32, 64, 128, 256, 512];
pub const DEFAULT_LEVELS_2D: [usize; 4] = [9, 17, 33, 65];

/// Exact solution of `−u'' = f`, `u(0) = u(1) = 0`.
#[derive(Clone, Copy)]
pub struct Case1D {
    pub name: &'static str,
    pub u: fn(f64) -> f64,
    pub du: fn(f64) -> f64,
    pub f: fn(f64) -> f64,
    pub regularity: &'static str,
}

#[derive(Clone, Copy)]
pub struct Case2D {
    pub name: &'static str,
    pub exact: ExactStokes,
    pub regularity: &'static str,
}

#[derive(Clone, Copy)]
pub enum ManufacturedCase {
    OneD(Case1D),
    TwoD(Case2D),
}

impl ManufacturedCase {
    pub fn name(&self) -> &'static str {
        match self {
            ManufacturedCase::OneD(c) => c.name,
            ManufacturedCase::TwoD(c) => c.name,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ManufacturedCase::OneD(_) => 1,
            ManufacturedCase::TwoD(_) => 2,
        }
    }
}

pub const CASES_1D: [&str; 3] = ["sinpi", "quadratic", "zero"];
pub const CASES_2D: [&str; 2] = ["sin2", "zero"];

pub fn case_1d(name: &str) -> Result<Case1D> {
    let case = match name {
        "sinpi" => Case1D {
            name: "sinpi",
            u: |x| (PI * x).sin(),
            du: |x| PI * (PI * x).cos(),
            f: |x| PI * PI * (PI * x).sin(),
            regularity: "C-infinity",
        },
        "quadratic" => Case1D {
            name: "quadratic",
            u: |x| x * (1.0 - x),
            du: |x| 1.0 - 2.0 * x,
            f: |_| 2.0,
            regularity: "polynomial",
        },
        "zero" => Case1D {
            name: "zero",
            u: |_| 0.0,
            du: |_| 0.0,
            f: |_| 0.0,
            regularity: "trivial",
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown 1d case `{other}` (try {CASES_1D:?})"
            )))
        }
    };
    Ok(case)
}

fn s2(t: f64) -> f64 {
    let s = (PI * t).sin();
    s * s
}

fn sin2_omega(p: Point) -> f64 {
    let [x, y] = p;
    2.0 * PI * PI * ((2.0 * PI * x).cos() * s2(y) + s2(x) * (2.0 * PI * y).cos())
}

fn sin2_grad_omega(p: Point) -> Point {
    let [x, y] = p;
    let c = 2.0 * PI * PI * PI;
    [
        c * (2.0 * PI * x).sin() * ((2.0 * PI * y).cos() - 2.0 * s2(y)),
        c * (2.0 * PI * y).sin() * ((2.0 * PI * x).cos() - 2.0 * s2(x)),
    ]
}

fn cos_p(p: Point) -> f64 {
    (PI * p[0]).cos() * (PI * p[1]).cos()
}

fn cos_grad_p(p: Point) -> Point {
    [
        -PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
        -PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
    ]
}

pub fn case_2d(name: &str) -> Result<Case2D> {
    let case = match name {
        "sin2" => Case2D {
            name: "sin2",
            exact: ExactStokes {
                psi: |p| s2(p[0]) * s2(p[1]),
                omega: sin2_omega,
                p: cos_p,
                grad_p: cos_grad_p,
                psi_f: |p| -sin2_omega(p),
                grad_psi_f: |p| {
                    let g = sin2_grad_omega(p);
                    [-g[0], -g[1]]
                },
                phi_f: cos_p,
                grad_phi_f: cos_grad_p,
            },
            regularity: "C-infinity",
        },
        "zero" => Case2D {
            name: "zero",
            exact: ExactStokes {
                psi: |_| 0.0,
                omega: |_| 0.0,
                p: |_| 0.0,
                grad_p: |_| [0.0, 0.0],
                psi_f: |_| 0.0,
                grad_psi_f: |_| [0.0, 0.0],
                phi_f: |_| 0.0,
                grad_phi_f: |_| [0.0, 0.0],
            },
            regularity: "trivial",
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown 2d case `{other}` (try {CASES_2D:?})"
            )))
        }
    };
    Ok(case)
}

pub fn case(name: &str, dimension: usize) -> Result<ManufacturedCase> {
    match dimension {
        1 => case_1d(name).map(ManufacturedCase::OneD),
        2 => case_2d(name).map(ManufacturedCase::TwoD),
        d => Err(Error::InvalidParameter(format!(
            "dimension {d} is not 1 or 2"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family1D {
    Uniform,
    Random {
        ratio: f64,
        seed: u64,
        centers: CenterPlacement,
    },
}

impl Family1D {
    pub fn mesh(&self, n: usize) -> Result<Mesh1D> {
        match *self {
            Family1D::Uniform => Mesh1D::gen_uniform(n),
            Family1D::Random {
                ratio,
                seed,
                centers,
            } => Mesh1D::gen_random(n, ratio, seed, centers),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Family1D::Uniform => "uniform".into(),
            Family1D::Random {
                ratio,
                seed,
                centers,
            } => {
                let c = match centers {
                    CenterPlacement::Midpoint => "midpoint",
                    CenterPlacement::Random => "random",
                };
                format!("random(ratio={ratio},seed={seed},centers={c})")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family2D {
    Rect,
    Perturbed { amplitude: f64, seed: u64 },
    TriHex,
}

impl Family2D {
    pub fn mesh(&self, n: usize) -> Result<StaggeredMesh2D> {
        match *self {
            Family2D::Rect => StaggeredMesh2D::gen_rect(n, n),
            Family2D::Perturbed { amplitude, seed } => {
                StaggeredMesh2D::gen_perturbed(n, n, amplitude, seed)
            }
            Family2D::TriHex => StaggeredMesh2D::gen_tri_hex(n),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Family2D::Rect => "rect".into(),
            Family2D::Perturbed { amplitude, seed } => {
                format!("perturbed(amplitude={amplitude},seed={seed})")
            }
            Family2D::TriHex => "trihex".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub level: usize,
    pub h: f64,
    pub n_dof: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub tau_p: Option<f64>,
    pub tau_f: Option<f64>,
    pub tau_omega: Option<f64>,
    pub cg_iters: Option<usize>,
    pub seconds: Option<f64>,
}

/// Fitted slopes of log(error) against log(h).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rates {
    pub err_l2: Option<f64>,
    pub err_h1: Option<f64>,
    pub tau_p: Option<f64>,
    pub tau_f: Option<f64>,
    pub tau_omega: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub case: String,
    pub family: String,
    pub records: Vec<LevelRecord>,
    pub rates: Rates,
}

/// Least-squares slope of `log e` against `log h`.
///
/// Any zero error makes the slope `+∞`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 levels, got {}",
            pairs.len()
        )));
    }
    if pairs
        .iter()
        .any(|&(h, e)| !h.is_finite() || !e.is_finite() || h <= 0.0 || e < 0.0)
    {
        return Err(Error::DegenerateInput(
            "h must be positive and errors non-negative".into(),
        ));
    }
    if pairs.iter().any(|&(_, e)| e == 0.0) {
        return Ok(f64::INFINITY);
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all h equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

fn rate_of(records: &[LevelRecord], pick: impl Fn(&LevelRecord) -> Option<f64>) -> Option<f64> {
    let pairs: Option<Vec<(f64, f64)>> =
        records.iter().map(|r| pick(r).map(|e| (r.h, e))).collect();
    pairs.and_then(|p| fit_rate(&p).ok())
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateInput(
            "levels must be strictly increasing".into(),
        ));
    }
    Ok(())
}

impl ConvergenceReport {
    fn new(case: &str, family: String, records: Vec<LevelRecord>) -> Self {
        let rates = Rates {
            err_l2: rate_of(&records, |r| Some(r.err_l2)),
            err_h1: rate_of(&records, |r| Some(r.err_h1)),
            tau_p: rate_of(&records, |r| r.tau_p),
            tau_f: rate_of(&records, |r| r.tau_f),
            tau_omega: rate_of(&records, |r| r.tau_omega),
        };
        Self {
            case: case.to_string(),
            family,
            records,
            rates,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("level,h,n_dof,err_l2,err_h1,tau_p,tau_f,tau_omega,cg_iters,seconds\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:e},{},{:e},{:e},{},{},{},{},{}",
                r.level,
                r.h,
                r.n_dof,
                r.err_l2,
                r.err_h1,
                opt(r.tau_p),
                opt(r.tau_f),
                opt(r.tau_omega),
                r.cg_iters.map(|c| c.to_string()).unwrap_or_default(),
                opt(r.seconds)
            );
        }
        let _ = writeln!(s, "# case {}", self.case);
        let _ = writeln!(s, "# family {}", self.family);
        for (name, rate) in self.rate_list() {
            if let Some(v) = rate {
                let _ = writeln!(s, "# rate {name} {v:e}");
            }
        }
        s
    }

    fn rate_list(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("err_l2", self.rates.err_l2),
            ("err_h1", self.rates.err_h1),
            ("tau_p", self.rates.tau_p),
            ("tau_f", self.rates.tau_f),
            ("tau_omega", self.rates.tau_omega),
        ]
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut case = String::new();
        let mut family = String::new();
        let mut records = Vec::new();
        let mut rates = Rates::default();
        for (k, line) in text.lines().enumerate() {
            let ln = k + 1;
            let perr = |message: String| Error::Parse { line: ln, message };
            if k == 0 {
                if line != "level,h,n_dof,err_l2,err_h1,tau_p,tau_f,tau_omega,cg_iters,seconds" {
                    return Err(perr("unexpected header".into()));
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest
                    .split_once(' ')
                    .ok_or_else(|| perr("bad summary line".into()))?;
                match key {
                    "case" => case = value.to_string(),
                    "family" => family = value.to_string(),
                    "rate" => {
                        let (name, v) = value
                            .split_once(' ')
                            .ok_or_else(|| perr("bad rate line".into()))?;
                        let v: f64 = v.parse().map_err(|_| perr(format!("bad rate `{v}`")))?;
                        let slot = match name {
                            "err_l2" => &mut rates.err_l2,
                            "err_h1" => &mut rates.err_h1,
                            "tau_p" => &mut rates.tau_p,
                            "tau_f" => &mut rates.tau_f,
                            "tau_omega" => &mut rates.tau_omega,
                            other => return Err(perr(format!("unknown rate `{other}`"))),
                        };
                        *slot = Some(v);
                    }
                    _ => {}
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(perr(format!("expected 10 columns, found {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| perr(format!("bad number `{s}`")))
            };
            let opt = |s: &str| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    num(s).map(Some)
                }
            };
            let int = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| perr(format!("bad integer `{s}`")))
            };
            records.push(LevelRecord {
                level: int(f[0])?,
                h: num(f[1])?,
                n_dof: int(f[2])?,
                err_l2: num(f[3])?,
                err_h1: num(f[4])?,
                tau_p: opt(f[5])?,
                tau_f: opt(f[6])?,
                tau_omega: opt(f[7])?,
                cg_iters: if f[8].is_empty() {
                    None
                } else {
                    Some(int(f[8])?)
                },
                seconds: opt(f[9])?,
            });
        }
        Ok(Self {
            case,
            family,
            records,
            rates,
        })
    }

    /// Human-readable summary of the fitted rates.
    pub fn summary(&self) -> String {
        let mut s = format!("case {} on {}\n", self.case, self.family);
        for (name, rate) in self.rate_list() {
            if let Some(v) = rate {
                let _ = writeln!(s, "  rate {name:<9} {v:.3}");
            }
        }
        s
    }

    /// Writes `<stem>.csv` and a two-column `h error` file per norm.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv, self.to_csv())?;
        written.push(csv);
        let columns: [(&str, fn(&LevelRecord) -> Option<f64>); 5] = [
            ("err_l2", |r| Some(r.err_l2)),
            ("err_h1", |r| Some(r.err_h1)),
            ("tau_p", |r| r.tau_p),
            ("tau_f", |r| r.tau_f),
            ("tau_omega", |r| r.tau_omega),
        ];
        for (name, pick) in columns {
            if self.records.iter().any(|r| pick(r).is_none()) {
                continue;
            }
            let mut body = format!("# h {name}\n");
            for r in &self.records {
                let _ = writeln!(body, "{:e} {:e}", r.h, pick(r).unwrap_or_default());
            }
            let path = dir.join(format!("{stem}_{name}.dat"));
            std::fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Errors `|u_h − R_h u|_{0,h}`, `|·|_{1,h}` and the interior flux truncation.
pub fn run_1d_study(
    case: &Case1D,
    family: &Family1D,
    levels: &[usize],
    timing: bool,
) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let mut records = Vec::with_capacity(levels.len());
    for (k, &n) in levels.iter().enumerate() {
        let mesh = family.mesh(n)?;
        let start = Instant::now();
        let sol = assemble_and_solve(&mesh, Forcing::Function(&case.f))?;
        let seconds = start.elapsed().as_secs_f64();
        let err = sol.u_h.sub(&restrict_primal(&mesh, &case.u))?;
        let (l2, h1) = norms(&mesh, &err)?;
        let tau = flux_truncation(&mesh, &case.u, &case.du);
        let tau_max = tau.values()[1..n]
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        records.push(LevelRecord {
            level: k,
            h: mesh.h_max(),
            n_dof: n,
            err_l2: l2,
            err_h1: h1,
            tau_p: None,
            tau_f: Some(tau_max),
            tau_omega: None,
            cg_iters: None,
            seconds: timing.then_some(seconds),
        });
    }
    Ok(ConvergenceReport::new(case.name, family.id(), records))
}

/// Velocity errors in the interior edge `L²` norm and the trusted curl norm,
/// plus the three truncation maxima.
pub fn run_2d_study(
    case: &Case2D,
    family: &Family2D,
    levels: &[usize],
    tol: f64,
    timing: bool,
) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let ex = &case.exact;
    let mut records = Vec::with_capacity(levels.len());
    for (k, &n) in levels.iter().enumerate() {
        let mesh = family.mesh(n)?;
        let start = Instant::now();
        let sol = solve_stokes(&mesh, &ex.psi_f, &ex.phi_f, tol)?;
        let seconds = start.elapsed().as_secs_f64();

        let divergence = div(&mesh, &sol.u).max_abs();
        let div_scale = sol.u.max_abs().max(1.0) / mesh.h();
        if divergence > 1e-12 * div_scale {
            return Err(Error::InvariantViolation(format!(
                "level {k}: max |div u_h| = {divergence:e}"
            )));
        }

        let e = sol.u.sub(&restrict_velocity(&mesh, &ex.psi));
        let tr = truncation_diagnostics(&mesh, ex);
        records.push(LevelRecord {
            level: k,
            h: mesh.h(),
            n_dof: mesh.n_v(),
            err_l2: interior_edge_norm(&mesh, &e),
            err_h1: trusted_dual_norm(&mesh, &curl(&mesh, &e)),
            tau_p: Some(interior_edge_max(&mesh, &tr.tau_p)),
            tau_f: Some(interior_edge_max(&mesh, &tr.tau_f)),
            tau_omega: Some(trusted_dual_max(&mesh, &tr.tau_omega)),
            cg_iters: Some(sol.solve_report.iterations),
            seconds: timing.then_some(seconds),
        });
    }
    Ok(ConvergenceReport::new(case.name, family.id(), records))
}

/// One level of the restriction consistency study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyLevel {
    pub h: f64,
    /// `‖R_h ψ − ψ‖_{L²}` with `R_h ψ` piecewise constant on dual cells.
    pub psi_error: f64,
    /// `‖curl R_h u − ω‖_{L²}` over trusted dual cells.
    pub omega_error: f64,
}

/// `L²` distance between a piecewise constant dual field and a function,
/// integrated with the edge-midpoint rule on a fan of triangles per dual cell.
fn dual_l2_distance(
    m: &StaggeredMesh2D,
    vals: &[f64],
    f: &dyn Fn(Point) -> f64,
    trusted_only: bool,
) -> f64 {
    let mut total = 0.0;
    for v in 0..m.n_v() {
        if trusted_only && m.dual_is_boundary()[v] {
            continue;
        }
        let poly: Vec<Point> = m.cv(v).iter().map(|&i| m.cell_centers()[i]).collect();
        let (_, c) = polygon_area_centroid(&poly);
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            let area = tri_area(c, a, b).abs();
            let mids = [
                [0.5 * (c[0] + a[0]), 0.5 * (c[1] + a[1])],
                [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                [0.5 * (b[0] + c[0]), 0.5 * (b[1] + c[1])],
            ];
            let s: f64 = mids.iter().map(|&q| (vals[v] - f(q)).powi(2)).sum();
            total += area * s / 3.0;
        }
    }
    total.sqrt()
}

pub fn run_consistency_study(
    case: &Case2D,
    family: &Family2D,
    levels: &[usize],
) -> Result<Vec<ConsistencyLevel>> {
    check_levels(levels)?;
    let ex = &case.exact;
    levels
        .iter()
        .map(|&n| {
            let mesh = family.mesh(n)?;
            let psi_h = restrict_streamfunction(&mesh, &ex.psi);
            let omega_h = curl(&mesh, &restrict_velocity(&mesh, &ex.psi));
            Ok(ConsistencyLevel {
                h: mesh.h(),
                psi_error: dual_l2_distance(&mesh, &psi_h.values, &ex.psi, false),
                omega_error: dual_l2_distance(&mesh, &omega_h.values, &ex.omega, true),
            })
        })
        .collect()
}

/// Largest relative violations of the exact discrete identities over a batch
/// of random fields. Each residual is divided by the sum of the magnitudes of
/// the terms it cancels, so roundoff sits near machine epsilon.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityResiduals {
    pub samples: usize,
    pub integration_by_parts_1d: Option<f64>,
    pub curl_grad: Option<f64>,
    pub div_perp_grad: Option<f64>,
    pub grad_div_adjoint: Option<f64>,
    pub perp_grad_curl_adjoint: Option<f64>,
    pub euler: Option<bool>,
}

impl IdentityResiduals {
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("integration_by_parts_1d", self.integration_by_parts_1d),
            ("curl_grad", self.curl_grad),
            ("div_perp_grad", self.div_perp_grad),
            ("grad_div_adjoint", self.grad_div_adjoint),
            ("perp_grad_curl_adjoint", self.perp_grad_curl_adjoint),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    pub fn worst(&self) -> f64 {
        self.entries().iter().fold(0.0, |a, e| a.max(e.1))
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst() <= tol && self.euler != Some(false)
    }
}

fn random_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

fn ratio(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        residual
    } else {
        residual / scale
    }
}

/// `(∇_h u, v)_dual + (u, ∇_h v)_primal = 0` for random `u`, `v`.
pub fn identity_suite_1d(m: &Mesh1D, samples: usize, seed: u64) -> Result<IdentityResiduals> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = Grid1DField::new(m, FieldKind::Primary, random_values(&mut rng, m.n()))?;
        let v = Grid1DField::new(m, FieldKind::Dual, random_values(&mut rng, m.n() + 1))?;
        let gu = grad_primal(m, &u)?;
        let gv = grad_dual(m, &v)?;
        let a = inner(m, &gu, &v)?;
        let b = inner(m, &u, &gv)?;
        let abs = |f: &Grid1DField| {
            Grid1DField::new(m, f.kind(), f.values().iter().map(|x| x.abs()).collect())
        };
        let scale = inner(m, &abs(&gu)?, &abs(&v)?)? + inner(m, &abs(&u)?, &abs(&gv)?)?;
        worst = worst.max(ratio((a + b).abs(), scale));
    }
    Ok(IdentityResiduals {
        samples,
        integration_by_parts_1d: Some(worst),
        ..Default::default()
    })
}

/// `curl ∇ = 0`, `div ∇^⊥ = 0`, the two adjointness relations with their
/// factor 2, and the Euler count.
pub fn identity_suite_2d(m: &StaggeredMesh2D, samples: usize, seed: u64) -> IdentityResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let abs_e = |u: &EdgeField| EdgeField {
        values: u.values.iter().map(|x| x.abs()).collect(),
    };
    let abs_c = |u: &CellField| CellField {
        values: u.values.iter().map(|x| x.abs()).collect(),
    };
    let abs_d = |u: &DualField| DualField {
        values: u.values.iter().map(|x| x.abs()).collect(),
    };
    // (1/A) Σ |u| length, the magnitude of the sums that div and curl cancel
    let dual_scale = |u: &EdgeField| {
        (0..m.n_v())
            .map(|v| {
                m.ev(v)
                    .iter()
                    .map(|&e| (u.values[e] * m.edge(e).d).abs())
                    .sum::<f64>()
                    / m.dual_areas()[v]
            })
            .fold(0.0, f64::max)
    };
    let cell_scale = |u: &EdgeField| {
        (0..m.n_cells())
            .map(|i| {
                m.ec(i)
                    .iter()
                    .map(|&e| (u.values[e] * m.edge(e).l).abs())
                    .sum::<f64>()
                    / m.cell_areas()[i]
            })
            .fold(0.0, f64::max)
    };
    let mut r = IdentityResiduals {
        samples,
        ..Default::default()
    };
    let (mut cg, mut dpg, mut gd, mut pc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let phi = CellField {
            values: random_values(&mut rng, m.n_cells()),
        };
        let psi = DualField {
            values: random_values(&mut rng, m.n_v()),
        };
        let u = EdgeField {
            values: random_values(&mut rng, m.n_edges()),
        };

        let g = grad_cell(m, &phi);
        cg = cg.max(ratio(curl(m, &g).max_abs(), dual_scale(&g)));
        let pg = perp_grad_dual(m, &psi);
        dpg = dpg.max(ratio(div(m, &pg).max_abs(), cell_scale(&pg)));

        let du = div(m, &u);
        let a = 2.0 * inner_edge(m, &g, &u) + inner_cell(m, &phi, &du);
        let sa =
            2.0 * inner_edge(m, &abs_e(&g), &abs_e(&u)) + inner_cell(m, &abs_c(&phi), &abs_c(&du));
        gd = gd.max(ratio(a.abs(), sa));

        let cu = curl(m, &u);
        let b = 2.0 * inner_edge(m, &pg, &u) + inner_dual(m, &psi, &cu);
        let sb =
            2.0 * inner_edge(m, &abs_e(&pg), &abs_e(&u)) + inner_dual(m, &abs_d(&psi), &abs_d(&cu));
        pc = pc.max(ratio(b.abs(), sb));
    }
    r.curl_grad = Some(cg);
    r.div_perp_grad = Some(dpg);
    r.grad_div_adjoint = Some(gd);
    r.perp_grad_curl_adjoint = Some(pc);
    r.euler = m.validate().check("Euler").map(|c| c.passed);
    r
}
