use std::collections::HashMap;
use std::f64::consts::PI;

use super::{Point, RawEdge, StaggeredMesh2D};
use crate::error::{Error, Result};

/// Lattice of `nx × ny` centers on the closed unit square with its dual
/// corner points, pushed through the separable map `(fx, fy)`.
fn tensor_mesh(
    nx: usize,
    ny: usize,
    fx: impl Fn(f64) -> f64,
    fy: impl Fn(f64) -> f64,
) -> Result<StaggeredMesh2D> {
    if nx < 2 {
        return Err(Error::InvalidCount {
            count: nx,
            reason: "nx must be at least 2",
        });
    }
    if ny < 2 {
        return Err(Error::InvalidCount {
            count: ny,
            reason: "ny must be at least 2",
        });
    }
    let hx = 1.0 / (nx - 1) as f64;
    let hy = 1.0 / (ny - 1) as f64;
    // endpoints pinned so boundary centers sit exactly on the square
    let xs: Vec<f64> = (0..nx)
        .map(|i| if i == nx - 1 { 1.0 } else { fx(i as f64 * hx) })
        .collect();
    let ys: Vec<f64> = (0..ny)
        .map(|j| if j == ny - 1 { 1.0 } else { fy(j as f64 * hy) })
        .collect();
    let xd: Vec<f64> = (0..nx - 1).map(|i| fx((i as f64 + 0.5) * hx)).collect();
    let yd: Vec<f64> = (0..ny - 1).map(|j| fy((j as f64 + 0.5) * hy)).collect();

    let cell = |i: usize, j: usize| j * nx + i;
    let dual = |i: usize, j: usize| j * (nx - 1) + i;
    let mut centers = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            centers.push([xs[i], ys[j]]);
            boundary.push(i == 0 || j == 0 || i == nx - 1 || j == ny - 1);
        }
    }
    let mut duals = Vec::with_capacity((nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            duals.push([xd[i], yd[j]]);
        }
    }
    let pair = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (Some(a), b) => (a, b),
        (None, Some(b)) => (b, None),
        (None, None) => unreachable!("every lattice edge touches a dual"),
    };
    let mut edges = Vec::new();
    for j in 0..ny {
        for i in 0..nx - 1 {
            let above = (j < ny - 1).then(|| dual(i, j));
            let below = (j > 0).then(|| dual(i, j - 1));
            let (v1, v2) = pair(above, below);
            edges.push(RawEdge {
                cells: [cell(i, j), cell(i + 1, j)],
                v1,
                v2,
            });
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            let right = (i < nx - 1).then(|| dual(i, j));
            let left = (i > 0).then(|| dual(i - 1, j));
            let (v1, v2) = pair(right, left);
            edges.push(RawEdge {
                cells: [cell(i, j), cell(i, j + 1)],
                v1,
                v2,
            });
        }
    }
    StaggeredMesh2D::build(&centers, &boundary, &duals, &edges)
}

/// One of four fixed smooth displacement profiles vanishing at 0 and 1.
fn profile(k: u64, axis: usize) -> fn(f64) -> f64 {
    const TABLE: [[fn(f64) -> f64; 2]; 4] = [
        [|x| (2.0 * PI * x).sin(), |y| (PI * y).sin()],
        [|x| (PI * x).sin(), |y| (2.0 * PI * y).sin()],
        [|x| 4.0 * x * (1.0 - x), |y| -(2.0 * PI * y).sin()],
        [|x| (3.0 * PI * x).sin() / 1.5, |y| (PI * y).sin()],
    ];
    TABLE[(k % 4) as usize][axis]
}

impl StaggeredMesh2D {
    /// Uniform rectangular lattice; outermost centers lie on the unit square.
    pub fn gen_rect(nx: usize, ny: usize) -> Result<Self> {
        tensor_mesh(nx, ny, |x| x, |y| y)
    }

    /// Rectangular lattice pushed through a smooth separable map.
    ///
    /// Each coordinate moves by `amplitude · h · s(x)`, with the profile `s`
    /// chosen by `seed`. Separability keeps primary and dual edges orthogonal.
    pub fn gen_perturbed(nx: usize, ny: usize, amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.25).contains(&amplitude) {
            return Err(Error::InvalidParameter(format!(
                "amplitude {amplitude} outside [0, 0.25)"
            )));
        }
        if amplitude == 0.0 {
            return Self::gen_rect(nx, ny);
        }
        let hx = 1.0 / nx.saturating_sub(1).max(1) as f64;
        let hy = 1.0 / ny.saturating_sub(1).max(1) as f64;
        let sx = profile(seed, 0);
        let sy = profile(seed, 1);
        let mesh = tensor_mesh(
            nx,
            ny,
            |x| x + amplitude * hx * sx(x),
            |y| y + amplitude * hy * sy(y),
        )?;
        let report = mesh.validate();
        if !report.all_passed() {
            return Err(Error::QualityFailure(report.failures().join("; ")));
        }
        Ok(mesh)
    }

    /// Equilateral triangles with hexagonal duals, lattice spacing `1/(n-1)`.
    ///
    /// The dual centers are the lattice points whose hexagon fits in the unit
    /// square, so the domain is a zigzag approximation of it.
    pub fn gen_tri_hex(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidCount {
                count: n,
                reason: "need n >= 2",
            });
        }
        let s = 1.0 / (n - 1) as f64;
        let row_h = s * 3f64.sqrt() / 2.0;
        let r = s / 3f64.sqrt();
        let span = 1.0 - 2.0 * r;
        let rows = if span < 0.0 {
            1
        } else {
            (span / row_h + 1e-9).floor() as i64 + 1
        };
        let oy = 0.5 - (rows - 1) as f64 * row_h / 2.0;
        let pos = |a: i64, b: i64| -> Point {
            [
                0.5 * s + (a as f64 + 0.5 * b as f64) * s,
                oy + b as f64 * row_h,
            ]
        };
        let tol = 1e-9 * s;
        let inside = |a: i64, b: i64| {
            let p = pos(a, b);
            (0..rows).contains(&b) && p[0] >= 0.5 * s - tol && p[0] <= 1.0 - 0.5 * s + tol
        };

        let a_lo = -rows - 3;
        let a_hi = n as i64 + 3;
        let mut dual_index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut duals = Vec::new();
        for b in 0..rows {
            for a in a_lo..=a_hi {
                if inside(a, b) {
                    dual_index.insert((a, b), duals.len());
                    duals.push(pos(a, b));
                }
            }
        }

        // triangles keyed by (a, b, up)
        let verts = |a: i64, b: i64, up: bool| -> [(i64, i64); 3] {
            if up {
                [(a, b), (a + 1, b), (a, b + 1)]
            } else {
                [(a + 1, b), (a, b + 1), (a + 1, b + 1)]
            }
        };
        let mut tri_index: HashMap<(i64, i64, bool), usize> = HashMap::new();
        let mut centers: Vec<Point> = Vec::new();
        let mut boundary: Vec<bool> = Vec::new();
        let mut tri = |a: i64, b: i64, up: bool| -> usize {
            *tri_index.entry((a, b, up)).or_insert_with(|| {
                let vs = verts(a, b, up);
                let mut c = [0.0, 0.0];
                for &(va, vb) in &vs {
                    let p = pos(va, vb);
                    c[0] += p[0] / 3.0;
                    c[1] += p[1] / 3.0;
                }
                centers.push(c);
                boundary.push(!vs.iter().all(|&(va, vb)| inside(va, vb)));
                centers.len() - 1
            })
        };

        let mut edges = Vec::new();
        for b in -2..=rows + 1 {
            for a in a_lo..=a_hi {
                let candidates = [
                    ((a, b), (a + 1, b), (a, b, true), (a, b - 1, false)),
                    ((a, b), (a, b + 1), (a, b, true), (a - 1, b, false)),
                    ((a + 1, b), (a, b + 1), (a, b, true), (a, b, false)),
                ];
                for (p, q, t1, t2) in candidates {
                    let (dp, dq) = (dual_index.get(&p).copied(), dual_index.get(&q).copied());
                    let (v1, v2) = match (dp, dq) {
                        (Some(x), y) => (x, y),
                        (None, Some(y)) => (y, None),
                        (None, None) => continue,
                    };
                    let c1 = tri(t1.0, t1.1, t1.2);
                    let c2 = tri(t2.0, t2.1, t2.2);
                    edges.push(RawEdge {
                        cells: [c1, c2],
                        v1,
                        v2,
                    });
                }
            }
        }
        Self::build(&centers, &boundary, &duals, &edges)
    }
}
