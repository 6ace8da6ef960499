//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver failure, 64 usage.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::elliptic1d::{assemble_and_solve, norms, restrict_primal, Forcing};
use crate::error::Error;
use crate::harness::{
    case_1d, case_2d, identity_suite_1d, identity_suite_2d, run_1d_study, run_2d_study, Family1D,
    Family2D, DEFAULT_LEVELS_1D, DEFAULT_LEVELS_2D,
};
use crate::mesh1d::{CenterPlacement, Mesh1D};
use crate::mesh2d::StaggeredMesh2D;
use crate::ops2d::{curl, div, interior_edge_norm, restrict_velocity, trusted_dual_norm};
use crate::stokes2d::{energy_identity_defect, solve_stokes, DEFAULT_STOKES_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Tolerance for the identity suite, relative to the cancelled magnitudes.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "stagfv",
    version,
    about = "Staggered finite-volume elliptic and Stokes solvers"
)]
struct Cli {
    /// Plain-text `key = value` defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, check, or describe 2D meshes.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Solve the 1D model problem for a manufactured case.
    Solve1d(Opts),
    /// Solve the 2D Stokes problem for a manufactured case.
    Solve2d(Opts),
    /// Run a convergence study.
    Converge {
        dim: Dim,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check the exact discrete identities on random fields.
    Identities(Opts),
}

#[derive(Subcommand, Debug)]
enum MeshCommand {
    /// Write a generated mesh to a file, or stdout when no file is given.
    Gen {
        file: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every quality check; exit 1 if any fails.
    Check { file: PathBuf },
    /// Print counts and scale constants.
    Info {
        file: PathBuf,
        /// Skip validation on load.
        #[arg(long)]
        force: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Dim {
    #[value(name = "1d")]
    One,
    #[value(name = "2d")]
    Two,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Mesh family: uniform, random, rect, perturbed, trihex or file:<path>.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Quasi-uniformity ratio for random 1D meshes.
    #[arg(long)]
    ratio: Option<f64>,
    /// Node placement for random 1D meshes: random or midpoint.
    #[arg(long)]
    centers: Option<String>,
    /// Perturbation amplitude as a fraction of the grid spacing.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated resolutions for `converge`.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    case: Option<String>,
    /// Output directory; defaults to $STAGFV_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random fields per mesh for `identities`.
    #[arg(long)]
    samples: Option<usize>,
    /// Load mesh files without validating them.
    #[arg(long)]
    force: bool,
    /// Record wall time per level.
    #[arg(long)]
    timing: bool,
}

const CONFIG_KEYS: [&str; 15] = [
    "mesh",
    "n",
    "nx",
    "ny",
    "ratio",
    "centers",
    "amplitude",
    "seed",
    "levels",
    "tol",
    "case",
    "out",
    "samples",
    "force",
    "timing",
];

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(Error),
    Validation(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Validation(_) => EXIT_VALIDATION,
        CliError::Lib(e) => match e {
            Error::InvalidParameter(_)
            | Error::InvalidCount { .. }
            | Error::InvalidRatio(_)
            | Error::DegenerateInput(_) => EXIT_USAGE,
            Error::NonConvergence { .. }
            | Error::ZeroPivot { .. }
            | Error::NotSymmetric { .. }
            | Error::NonPositiveDiagonal { .. } => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        },
    }
}

fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", k + 1));
        };
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return usage(format!("config line {}: unknown key `{key}`", k + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn from_config<T: std::str::FromStr>(
    cfg: &BTreeMap<String, String>,
    key: &str,
) -> CliResult<Option<T>> {
    match cfg.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .or_else(|_| usage(format!("config: bad value `{v}` for `{key}`"))),
    }
}

impl Opts {
    /// Fills every unset flag from the config file.
    fn merge(&mut self, cfg: &BTreeMap<String, String>) -> CliResult<()> {
        macro_rules! fill {
            ($($field:ident),*) => {
                $(if self.$field.is_none() {
                    self.$field = from_config(cfg, stringify!($field))?;
                })*
            };
        }
        fill!(mesh, n, nx, ny, ratio, centers, amplitude, seed, levels, tol, case, out, samples);
        self.force |= from_config::<bool>(cfg, "force")?.unwrap_or(false);
        self.timing |= from_config::<bool>(cfg, "timing")?.unwrap_or(false);
        Ok(())
    }
}

/// Mesh families selectable by `--mesh`.
#[derive(Clone, Debug, PartialEq)]
enum MeshSpec {
    Uniform,
    Random,
    Rect,
    Perturbed,
    TriHex,
    File(PathBuf),
}

/// Fully resolved and validated options.
#[derive(Clone, Debug)]
pub struct RunConfig {
    mesh: MeshSpec,
    nx: usize,
    ny: usize,
    ratio: f64,
    centers: CenterPlacement,
    amplitude: f64,
    seed: u64,
    levels: Option<Vec<usize>>,
    tol: f64,
    case: Option<String>,
    out: Option<PathBuf>,
    samples: usize,
    force: bool,
    timing: bool,
}

impl RunConfig {
    fn resolve(o: &Opts, default_mesh: &str, default_n: usize) -> CliResult<Self> {
        let mesh_name = o.mesh.as_deref().unwrap_or(default_mesh);
        let mesh = match mesh_name {
            "uniform" => MeshSpec::Uniform,
            "random" => MeshSpec::Random,
            "rect" => MeshSpec::Rect,
            "perturbed" => MeshSpec::Perturbed,
            "trihex" => MeshSpec::TriHex,
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => MeshSpec::File(PathBuf::from(p)),
                _ => return usage(format!("unknown mesh `{other}`")),
            },
        };
        let n = o.n.unwrap_or(default_n);
        let centers = match o.centers.as_deref().unwrap_or("random") {
            "random" => CenterPlacement::Random,
            "midpoint" => CenterPlacement::Midpoint,
            other => return usage(format!("unknown center placement `{other}`")),
        };
        let levels = match &o.levels {
            None => None,
            Some(s) => Some(
                s.split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .or_else(|_| usage(format!("bad --levels `{s}`")))?,
            ),
        };
        let tol = o.tol.unwrap_or(DEFAULT_STOKES_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return usage(format!("--tol {tol} must lie in (0, 1)"));
        }
        Ok(Self {
            mesh,
            nx: o.nx.unwrap_or(n),
            ny: o.ny.unwrap_or(n),
            ratio: o.ratio.unwrap_or(2.0),
            centers,
            amplitude: o.amplitude.unwrap_or(0.1),
            seed: o.seed.unwrap_or(0),
            levels,
            tol,
            case: o.case.clone(),
            out: o
                .out
                .clone()
                .or_else(|| std::env::var_os("STAGFV_OUT").map(PathBuf::from)),
            samples: o.samples.unwrap_or(50),
            force: o.force,
            timing: o.timing,
        })
    }

    fn family_1d(&self) -> CliResult<Family1D> {
        match self.mesh {
            MeshSpec::Uniform => Ok(Family1D::Uniform),
            MeshSpec::Random => Ok(Family1D::Random {
                ratio: self.ratio,
                seed: self.seed,
                centers: self.centers,
            }),
            _ => usage("1D meshes are `uniform` or `random`"),
        }
    }

    fn family_2d(&self) -> CliResult<Family2D> {
        match self.mesh {
            MeshSpec::Rect => Ok(Family2D::Rect),
            MeshSpec::Perturbed => Ok(Family2D::Perturbed {
                amplitude: self.amplitude,
                seed: self.seed,
            }),
            MeshSpec::TriHex => Ok(Family2D::TriHex),
            MeshSpec::File(_) => usage("mesh files have a single resolution"),
            _ => usage("2D meshes are `rect`, `perturbed`, `trihex` or `file:<path>`"),
        }
    }

    fn mesh_1d(&self) -> CliResult<Mesh1D> {
        Ok(self.family_1d()?.mesh(self.nx)?)
    }

    fn mesh_2d(&self) -> CliResult<StaggeredMesh2D> {
        let m = match &self.mesh {
            MeshSpec::Rect => StaggeredMesh2D::gen_rect(self.nx, self.ny)?,
            MeshSpec::Perturbed => {
                StaggeredMesh2D::gen_perturbed(self.nx, self.ny, self.amplitude, self.seed)?
            }
            MeshSpec::TriHex => StaggeredMesh2D::gen_tri_hex(self.nx)?,
            MeshSpec::File(p) => StaggeredMesh2D::load(p, self.force)?,
            _ => return usage("2D meshes are `rect`, `perturbed`, `trihex` or `file:<path>`"),
        };
        Ok(m)
    }

    fn write_out(&self, name: &str, body: &str) -> CliResult<Option<PathBuf>> {
        let Some(dir) = &self.out else {
            return Ok(None);
        };
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(Error::from)?;
        Ok(Some(path))
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut buf = String::new();
    let result = dispatch(cli, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("usage error: {m}\n(see `stagfv --help`)"),
                CliError::Validation(m) => format!("validation failed: {m}"),
                CliError::Lib(l) => format!("error: {l}"),
            };
            let _ = writeln!(err, "{msg}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(
        std::env::args_os(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}

fn dispatch(cli: Cli, out: &mut String) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .or_else(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let with = |mut o: Opts, mesh: &str, n: usize| -> CliResult<RunConfig> {
        o.merge(&cfg)?;
        RunConfig::resolve(&o, mesh, n)
    };
    match cli.command {
        Command::Mesh(MeshCommand::Gen { file, opts }) => {
            mesh_gen(&with(opts, "rect", 9)?, file.as_deref(), out)
        }
        Command::Mesh(MeshCommand::Check { file }) => mesh_check(&file, out),
        Command::Mesh(MeshCommand::Info { file, force }) => mesh_info(&file, force, out),
        Command::Solve1d(opts) => solve1d(&with(opts, "uniform", 64)?, out),
        Command::Solve2d(opts) => solve2d(&with(opts, "rect", 17)?, out),
        Command::Converge {
            dim: Dim::One,
            opts,
        } => converge_1d(&with(opts, "uniform", 0)?, out),
        Command::Converge {
            dim: Dim::Two,
            opts,
        } => converge_2d(&with(opts, "rect", 0)?, out),
        Command::Identities(opts) => identities(&with(opts, "rect", 8)?, out),
    }
}

fn mesh_gen(rc: &RunConfig, file: Option<&Path>, out: &mut String) -> CliResult<()> {
    let m = rc.mesh_2d()?;
    match file {
        Some(p) => {
            m.save(p)?;
            let _ = writeln!(
                out,
                "wrote {} ({} cells, {} duals, {} edges)",
                p.display(),
                m.n_cells(),
                m.n_v(),
                m.n_edges()
            );
        }
        None => out.push_str(&m.to_text()),
    }
    Ok(())
}

fn mesh_check(file: &Path, out: &mut String) -> CliResult<()> {
    let m = StaggeredMesh2D::load(file, true)?;
    let report = m.validate();
    let _ = write!(out, "{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Validation(report.failures().join("; ")))
    }
}

fn mesh_info(file: &Path, force: bool, out: &mut String) -> CliResult<()> {
    let m = StaggeredMesh2D::load(file, force)?;
    let _ = writeln!(
        out,
        "cells       {} interior + {} boundary",
        m.n_c(),
        m.n_cb()
    );
    let _ = writeln!(out, "duals       {}", m.n_v());
    let _ = writeln!(
        out,
        "edges       {} interior + {} boundary",
        m.n_e(),
        m.n_eb()
    );
    let _ = writeln!(out, "h           {:e}", m.h());
    let _ = writeln!(out, "m           {:e}", m.m_const());
    let _ = writeln!(out, "M           {:e}", m.big_m_const());
    let _ = writeln!(out, "area        {:e}", m.domain_area());
    Ok(())
}

fn solve1d(rc: &RunConfig, out: &mut String) -> CliResult<()> {
    let case = case_1d(rc.case.as_deref().unwrap_or("sinpi"))?;
    let m = rc.mesh_1d()?;
    let sol = assemble_and_solve(&m, Forcing::Function(&case.f))?;
    let (l2, h1) = norms(&m, &sol.u_h.sub(&restrict_primal(&m, &case.u))?)?;
    let _ = writeln!(
        out,
        "case {} on {} with N = {}",
        case.name,
        rc.family_1d()?.id(),
        m.n()
    );
    let _ = writeln!(out, "residual    {:e}", sol.solve_report.relative_residual);
    let _ = writeln!(out, "err_l2      {l2:e}");
    let _ = writeln!(out, "err_h1      {h1:e}");
    let mut table = String::from("x,u_h,u\n");
    for (x, u) in m.centers().iter().zip(sol.u_h.values()) {
        let _ = writeln!(table, "{x:e},{u:e},{:e}", (case.u)(*x));
    }
    if let Some(p) = rc.write_out(&format!("solve1d_{}.csv", case.name), &table)? {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(())
}

fn solve2d(rc: &RunConfig, out: &mut String) -> CliResult<()> {
    let case = case_2d(rc.case.as_deref().unwrap_or("sin2"))?;
    let ex = &case.exact;
    let m = rc.mesh_2d()?;
    let sol = solve_stokes(&m, &ex.psi_f, &ex.phi_f, rc.tol)?;
    let e = sol.u.sub(&restrict_velocity(&m, &ex.psi));
    let _ = writeln!(
        out,
        "case {} on {} duals, tol {:e}",
        case.name,
        m.n_v(),
        rc.tol
    );
    let _ = writeln!(out, "cg_iters        {}", sol.solve_report.iterations);
    let _ = writeln!(out, "max_div         {:e}", div(&m, &sol.u).max_abs());
    let _ = writeln!(out, "momentum_resid  {:e}", sol.momentum_residual_inf);
    let _ = writeln!(
        out,
        "energy_defect   {:e}",
        energy_identity_defect(&m, &sol)
    );
    let _ = writeln!(out, "err_l2          {:e}", interior_edge_norm(&m, &e));
    let _ = writeln!(
        out,
        "err_h1          {:e}",
        trusted_dual_norm(&m, &curl(&m, &e))
    );
    for (name, text) in [
        ("psi", sol.psi.to_text()),
        ("u", sol.u.to_text()),
        ("omega", sol.omega.to_text()),
        ("p", sol.p.to_text()),
    ] {
        if let Some(p) = rc.write_out(&format!("solve2d_{}_{name}.txt", case.name), &text)? {
            let _ = writeln!(out, "wrote {}", p.display());
        }
    }
    if !sol.residual_within_bound() {
        return Err(CliError::Lib(Error::InvariantViolation(
            "momentum residual above bound".into(),
        )));
    }
    Ok(())
}

fn report_study(
    rc: &RunConfig,
    stem: &str,
    report: &crate::harness::ConvergenceReport,
    out: &mut String,
) -> CliResult<()> {
    out.push_str(&report.to_csv());
    out.push_str(&report.summary());
    if let Some(dir) = &rc.out {
        for p in report.write_files(dir, stem)? {
            let _ = writeln!(out, "wrote {}", p.display());
        }
    }
    Ok(())
}

fn converge_1d(rc: &RunConfig, out: &mut String) -> CliResult<()> {
    let case = case_1d(rc.case.as_deref().unwrap_or("sinpi"))?;
    let family = rc.family_1d()?;
    let levels = rc
        .levels
        .clone()
        .unwrap_or_else(|| DEFAULT_LEVELS_1D.to_vec());
    let report = run_1d_study(&case, &family, &levels, rc.timing)?;
    let mesh = if family == Family1D::Uniform {
        "uniform"
    } else {
        "random"
    };
    report_study(
        rc,
        &format!("converge1d_{}_{mesh}", case.name),
        &report,
        out,
    )
}

fn converge_2d(rc: &RunConfig, out: &mut String) -> CliResult<()> {
    let case = case_2d(rc.case.as_deref().unwrap_or("sin2"))?;
    let family = rc.family_2d()?;
    let levels = rc
        .levels
        .clone()
        .unwrap_or_else(|| DEFAULT_LEVELS_2D.to_vec());
    let report = run_2d_study(&case, &family, &levels, rc.tol, rc.timing)?;
    let mesh = match family {
        Family2D::Rect => "rect",
        Family2D::Perturbed { .. } => "perturbed",
        Family2D::TriHex => "trihex",
    };
    report_study(
        rc,
        &format!("converge2d_{}_{mesh}", case.name),
        &report,
        out,
    )
}

fn identities(rc: &RunConfig, out: &mut String) -> CliResult<()> {
    let r = match rc.mesh {
        MeshSpec::Uniform | MeshSpec::Random => {
            identity_suite_1d(&rc.mesh_1d()?, rc.samples, rc.seed)?
        }
        _ => identity_suite_2d(&rc.mesh_2d()?, rc.samples, rc.seed),
    };
    let _ = writeln!(
        out,
        "identity residuals over {} random samples (relative, tol {IDENTITY_TOL:e})",
        r.samples
    );
    for (name, v) in r.entries() {
        let verdict = if v <= IDENTITY_TOL { "OK" } else { "FAIL" };
        let _ = writeln!(out, "  {name:<24} {v:.3e} {verdict}");
    }
    if let Some(ok) = r.euler {
        let _ = writeln!(out, "  {:<24} {}", "euler", if ok { "OK" } else { "FAIL" });
    }
    if r.passed(IDENTITY_TOL) {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "identity violation {:e}",
            r.worst()
        )))
    }
}
