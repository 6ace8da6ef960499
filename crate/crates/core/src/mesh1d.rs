//! Nonuniform primary/dual partitions of `[0, 1]`.
//!
//! Primary cell `K_i = [x_{i-1/2}, x_{i+1/2}]` carries the node `x_i`, which
//! need not be its midpoint. Dual cell `K_{i+1/2} = [x_i, x_{i+1}]` uses the
//! conventions `x_0 = 0`, `x_{N+1} = 1` at the two ends.
//!
//! Indexing is zero-based throughout: `centers[i]` is `x_{i+1}` and
//! `faces[k]` is `x_{k+1/2}`, so there are `N` centers and `N + 1` faces.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const COVERAGE_TOL: f64 = 1e-12;

/// Where the nodes sit inside their primary cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterPlacement {
    /// Faces are midpoints of consecutive centers (second-order meshes).
    Midpoint,
    /// Centers drawn uniformly inside each cell.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    faces: Vec<f64>,
    centers: Vec<f64>,
    ratio_bound: f64,
}

impl Mesh1D {
    /// Builds a mesh from raw coordinates without validation.
    ///
    /// The declared ratio bound defaults to the observed one; use
    /// [`Mesh1D::with_ratio_bound`] to declare a stricter one.
    pub fn from_raw(faces: Vec<f64>, centers: Vec<f64>) -> Result<Self> {
        if faces.len() != centers.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: centers.len() + 1,
                got: faces.len(),
            });
        }
        let mut m = Self {
            faces,
            centers,
            ratio_bound: f64::INFINITY,
        };
        m.ratio_bound = m.quasi_uniformity_ratio();
        Ok(m)
    }

    pub fn with_ratio_bound(mut self, bound: f64) -> Self {
        self.ratio_bound = bound;
        self
    }

    pub fn gen_uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidCount {
                count: n,
                reason: "need at least 2 cells",
            });
        }
        let h = 1.0 / n as f64;
        let mut faces: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        faces[n] = 1.0;
        let centers = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        Ok(Self {
            faces,
            centers,
            ratio_bound: 1.0,
        })
    }

    /// Seeded random mesh whose quasi-uniformity ratio does not exceed `ratio`.
    ///
    /// Sizes are drawn in `[1, ratio]` before normalization (which preserves
    /// ratios). With random centers each node offset is redrawn, conditioned
    /// on the resulting dual cell staying inside the same size window.
    pub fn gen_random(n: usize, ratio: f64, seed: u64, centers: CenterPlacement) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidCount {
                count: n,
                reason: "need at least 2 cells",
            });
        }
        if !(ratio.is_finite() && ratio >= 1.0) {
            return Err(Error::InvalidRatio(ratio));
        }
        if ratio == 1.0 {
            return Self::gen_uniform(n);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mesh = match centers {
            CenterPlacement::Midpoint => midpoint_mesh(n, ratio, &mut rng),
            CenterPlacement::Random => random_center_mesh(n, ratio, &mut rng),
        };
        Ok(mesh.with_ratio_bound(ratio))
    }

    pub fn n(&self) -> usize {
        self.centers.len()
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    /// `|K_i|` for the zero-based primary cell `i`.
    pub fn h(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    /// `|K_{k+1/2}|` for face index `k ∈ 0..=N`.
    pub fn h_half(&self, k: usize) -> f64 {
        let left = if k == 0 { 0.0 } else { self.centers[k - 1] };
        let right = if k == self.n() { 1.0 } else { self.centers[k] };
        right - left
    }

    pub fn cell_sizes(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.h(i)).collect()
    }

    pub fn dual_sizes(&self) -> Vec<f64> {
        (0..=self.n()).map(|k| self.h_half(k)).collect()
    }

    /// Largest primary cell size.
    pub fn h_max(&self) -> f64 {
        self.cell_sizes().into_iter().fold(0.0, f64::max)
    }

    /// max/min over all primary cells and the interior dual cells.
    ///
    /// The two end dual cells are half cells by construction and are left
    /// out, so a uniform mesh has ratio exactly 1.
    pub fn quasi_uniformity_ratio(&self) -> f64 {
        let n = self.n();
        let sizes = self
            .cell_sizes()
            .into_iter()
            .chain((1..n).map(|k| self.h_half(k)));
        let (lo, hi) = sizes.fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
            (lo.min(s), hi.max(s))
        });
        hi / lo
    }

    /// Every invariant violation found; empty iff the mesh is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n();
        if n < 1 {
            out.push(Violation::TooFewCells);
            return out;
        }
        if self.faces[0] != 0.0 || self.faces[n] != 1.0 {
            out.push(Violation::Coverage {
                total: self.faces[n] - self.faces[0],
            });
        } else {
            let total: f64 = self.cell_sizes().iter().sum();
            if (total - 1.0).abs() > COVERAGE_TOL {
                out.push(Violation::Coverage { total });
            }
        }
        // 0 = x_{1/2} < x_1 < x_{3/2} < ... < x_N < x_{N+1/2}
        let mut seq = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            seq.push(self.faces[i]);
            seq.push(self.centers[i]);
        }
        seq.push(self.faces[n]);
        for (k, w) in seq.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                out.push(Violation::Interleaving {
                    position: k,
                    left: w[0],
                    right: w[1],
                });
            }
        }
        let ratio = self.quasi_uniformity_ratio();
        if ratio.is_finite() && ratio > self.ratio_bound * (1.0 + 1e-12) {
            out.push(Violation::RatioBound {
                observed: ratio,
                declared: self.ratio_bound,
            });
        }
        out
    }

    /// Text form: `mesh1d N`, then faces, then centers, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("mesh1d {}\n", self.n());
        let line = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(s, "{}", line(&self.faces));
        let _ = writeln!(s, "{}", line(&self.centers));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("mesh1d") {
            return Err(Error::Parse {
                line: ln + 1,
                message: "expected `mesh1d N`".into(),
            });
        }
        let n: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Parse {
                line: ln + 1,
                message: "bad cell count".into(),
            })?;
        let mut read_row = |want: usize| -> Result<Vec<f64>> {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: "truncated input".into(),
            })?;
            let vals: std::result::Result<Vec<f64>, _> =
                l.split_whitespace().map(str::parse).collect();
            let vals = vals.map_err(|e| Error::Parse {
                line: ln + 1,
                message: e.to_string(),
            })?;
            if vals.len() != want {
                return Err(Error::Parse {
                    line: ln + 1,
                    message: format!("expected {want} values, found {}", vals.len()),
                });
            }
            Ok(vals)
        };
        let faces = read_row(n + 1)?;
        let centers = read_row(n)?;
        Self::from_raw(faces, centers)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    TooFewCells,
    /// Cells do not tile `[0, 1]`.
    Coverage {
        total: f64,
    },
    /// The face/center sequence is not strictly increasing at `position`.
    Interleaving {
        position: usize,
        left: f64,
        right: f64,
    },
    RatioBound {
        observed: f64,
        declared: f64,
    },
}

/// Which partition a [`Grid1DField`] lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Primary,
    Dual,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Primary => "primary",
            FieldKind::Dual => "dual",
        }
    }
}

/// Values on primary cells (length `N`) or dual cells (length `N + 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1DField {
    kind: FieldKind,
    values: Vec<f64>,
}

impl Grid1DField {
    pub fn new(mesh: &Mesh1D, kind: FieldKind, values: Vec<f64>) -> Result<Self> {
        let expected = match kind {
            FieldKind::Primary => mesh.n(),
            FieldKind::Dual => mesh.n() + 1,
        };
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { kind, values })
    }

    pub fn zeros(mesh: &Mesh1D, kind: FieldKind) -> Self {
        let len = match kind {
            FieldKind::Primary => mesh.n(),
            FieldKind::Dual => mesh.n() + 1,
        };
        Self {
            kind,
            values: vec![0.0; len],
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn expect_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.name(),
                got: self.kind.name(),
            });
        }
        Ok(())
    }

    /// Pointwise difference; both fields must share a kind.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        other.expect_kind(self.kind)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            kind: self.kind,
            values,
        })
    }
}

fn normalize(sizes: &mut [f64]) {
    let total: f64 = sizes.iter().sum();
    sizes.iter_mut().for_each(|s| *s /= total);
}

fn midpoint_mesh(n: usize, ratio: f64, rng: &mut ChaCha8Rng) -> Mesh1D {
    // gaps between consecutive centers; the end gaps are half their neighbour
    // so that the first and last cells have the size of the adjacent gap
    let interior: Vec<f64> = (0..n - 1).map(|_| rng.random_range(1.0..=ratio)).collect();
    let mut gaps = Vec::with_capacity(n + 1);
    gaps.push(0.5 * interior[0]);
    gaps.extend_from_slice(&interior);
    gaps.push(0.5 * interior[n - 2]);
    normalize(&mut gaps);

    let mut centers = Vec::with_capacity(n);
    let mut x = 0.0;
    for g in &gaps[..n] {
        x += g;
        centers.push(x);
    }
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(0.0);
    for w in centers.windows(2) {
        faces.push(0.5 * (w[0] + w[1]));
    }
    faces.push(1.0);
    Mesh1D {
        faces,
        centers,
        ratio_bound: f64::INFINITY,
    }
}

fn random_center_mesh(n: usize, ratio: f64, rng: &mut ChaCha8Rng) -> Mesh1D {
    // Work in unnormalized units where every size must lie in [1, ratio].
    const THETA_MIN: f64 = 0.05;
    const THETA_MAX: f64 = 0.95;
    let mut sizes = Vec::with_capacity(n);
    let mut thetas = Vec::with_capacity(n);
    for i in 0..n {
        let h: f64 = rng.random_range(1.0..=ratio);
        let theta = if i == 0 {
            rng.random_range(THETA_MIN..=THETA_MAX)
        } else {
            // dual cell between node i-1 and node i: carry + theta*h ∈ [1, ratio]
            let carry: f64 = (1.0 - thetas[i - 1]) * sizes[i - 1];
            let lo = ((1.0 - carry) / h).max(THETA_MIN);
            let hi = ((ratio - carry) / h).min(THETA_MAX);
            if lo < hi {
                rng.random_range(lo..=hi)
            } else {
                lo.min(THETA_MAX)
            }
        };
        sizes.push(h);
        thetas.push(theta);
    }
    normalize(&mut sizes);
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(0.0);
    let mut x = 0.0;
    for s in &sizes[..n - 1] {
        x += s;
        faces.push(x);
    }
    faces.push(1.0);
    let centers = (0..n)
        .map(|i| faces[i] + thetas[i] * (faces[i + 1] - faces[i]))
        .collect();
    Mesh1D {
        faces,
        centers,
        ratio_bound: f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_two_cells() {
        let m = Mesh1D::gen_uniform(2).unwrap();
        assert_eq!(m.centers(), &[0.25, 0.75]);
        assert_eq!(m.faces(), &[0.0, 0.5, 1.0]);
        assert_eq!(m.dual_sizes(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn uniform_sizes_and_ratio() {
        let m = Mesh1D::gen_uniform(4).unwrap();
        assert!(m.cell_sizes().iter().all(|&h| h == 0.25));
        let m3 = Mesh1D::gen_uniform(3).unwrap();
        assert_eq!(m3.ratio_bound(), 1.0);
        assert!((m3.quasi_uniformity_ratio() - 1.0).abs() < 1e-12);
        assert!(m.validate().is_empty());
        assert!(matches!(
            Mesh1D::gen_uniform(1),
            Err(Error::InvalidCount { .. })
        ));
    }

    #[test]
    fn unit_ratio_gives_uniform() {
        for seed in [0, 5, 99] {
            let m = Mesh1D::gen_random(6, 1.0, seed, CenterPlacement::Random).unwrap();
            assert_eq!(m, Mesh1D::gen_uniform(6).unwrap());
        }
        assert!(matches!(
            Mesh1D::gen_random(6, 0.5, 1, CenterPlacement::Random),
            Err(Error::InvalidRatio(_))
        ));
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        for placement in [CenterPlacement::Midpoint, CenterPlacement::Random] {
            let a = Mesh1D::gen_random(8, 3.0, 7, placement).unwrap();
            let b = Mesh1D::gen_random(8, 3.0, 7, placement).unwrap();
            assert_eq!(a, b);
            assert!(a.validate().is_empty(), "{:?}", a.validate());
            let big = Mesh1D::gen_random(512, 3.0, 7, placement).unwrap();
            assert!(big.validate().is_empty());
            assert!(big.quasi_uniformity_ratio() <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn midpoint_faces_are_exact_midpoints() {
        let m = Mesh1D::gen_random(8, 3.0, 7, CenterPlacement::Midpoint).unwrap();
        let c = m.centers();
        for k in 1..m.n() {
            assert_eq!(m.faces()[k] - 0.5 * (c[k - 1] + c[k]), 0.0);
        }
    }

    #[test]
    fn dual_cells_tile_the_interval() {
        let m = Mesh1D::gen_random(40, 2.5, 3, CenterPlacement::Random).unwrap();
        let s: f64 = m.dual_sizes().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validate_reports_swapped_centers() {
        let m = Mesh1D::gen_uniform(4).unwrap();
        let mut c = m.centers().to_vec();
        c.swap(0, 1);
        let bad = Mesh1D::from_raw(m.faces().to_vec(), c).unwrap();
        assert!(bad
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::Interleaving { .. })));
    }

    #[test]
    fn validate_reports_coverage() {
        let faces = vec![0.0, 0.3, 0.6, 0.9];
        let centers = vec![0.15, 0.45, 0.75];
        let bad = Mesh1D::from_raw(faces, centers).unwrap();
        let v = bad.validate();
        assert!(v
            .iter()
            .any(|v| matches!(v, Violation::Coverage { total } if (total - 0.9).abs() < 1e-12)));
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = Mesh1D::gen_random(17, 3.0, 7, CenterPlacement::Random).unwrap();
        let back = Mesh1D::from_text(&m.to_text()).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.centers(), m.centers());
        assert!(matches!(
            Mesh1D::from_text("mesh1d 3\n0 0.5 1\n"),
            Err(Error::Parse { .. })
        ));
    }
}
