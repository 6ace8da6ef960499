//! Discrete fields and mimetic operators on a [`StaggeredMesh2D`].
//!
//! Orientation conventions: `n_e` points from `i₁` to `i₂`, `t_e = k × n_e`
//! points from `ν₁` to `ν₂`, and the virtual exterior dual of a boundary
//! edge pair carries streamfunction zero. With those,
//!
//! * `[div u]_i = (1/|A_i|) Σ_{EC(i)} n_{e,i} u_e l_e`
//! * `[curl u]_ν = −(1/|A_ν|) Σ_{EV(ν)} t_{e,ν} u_e d_e` (counterclockwise circulation)
//! * `[grad φ]_e = (φ_{i₂} − φ_{i₁}) / d_e`
//! * `[perp_grad ψ]_e = −(ψ_{ν₂} − ψ_{ν₁}) / l_e`
//!
//! and, with the edge weight `½ l_e d_e`, the identities
//! `2(grad φ, u) + (φ, div u) = 0` and `2(perp_grad ψ, u) + (ψ, curl u) = 0`
//! hold exactly for every field.

use crate::error::{Error, Result};
use crate::mesh2d::{Point, StaggeredMesh2D};

macro_rules! field_type {
    ($name:ident, $kind:literal, $len:expr) => {
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            pub values: Vec<f64>,
        }

        impl $name {
            pub const KIND: &'static str = $kind;

            pub fn new(m: &StaggeredMesh2D, values: Vec<f64>) -> Result<Self> {
                let expected = $len(m);
                if values.len() != expected {
                    return Err(Error::DimensionMismatch {
                        expected,
                        got: values.len(),
                    });
                }
                Ok(Self { values })
            }

            pub fn zeros(m: &StaggeredMesh2D) -> Self {
                Self {
                    values: vec![0.0; $len(m)],
                }
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
            }

            /// Pointwise `self - other`.
            pub fn sub(&self, other: &Self) -> Self {
                Self {
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| a - b)
                        .collect(),
                }
            }

            /// Pointwise `self + other`.
            pub fn add(&self, other: &Self) -> Self {
                Self {
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| a + b)
                        .collect(),
                }
            }

            pub fn scaled(&self, s: f64) -> Self {
                Self {
                    values: self.values.iter().map(|v| s * v).collect(),
                }
            }

            /// Header `field <kind> <count>`, then one value per line.
            pub fn to_text(&self) -> String {
                field_to_text($kind, &self.values)
            }

            pub fn from_text(text: &str) -> Result<Self> {
                Ok(Self {
                    values: field_from_text($kind, text)?,
                })
            }
        }
    };
}

field_type!(CellField, "cell", |m: &StaggeredMesh2D| m.n_cells());
field_type!(DualField, "dual", |m: &StaggeredMesh2D| m.n_v());
field_type!(EdgeField, "edge", |m: &StaggeredMesh2D| m.n_edges());

fn field_to_text(kind: &str, values: &[f64]) -> String {
    let mut s = format!("field {kind} {}\n", values.len());
    for v in values {
        s.push_str(&format!("{v:.16e}\n"));
    }
    s
}

fn field_from_text(kind: &str, text: &str) -> Result<Vec<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty field".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "field" {
        return Err(Error::Parse {
            line: ln + 1,
            message: "expected `field <kind> <count>`".into(),
        });
    }
    if toks[1] != kind {
        return Err(Error::Parse {
            line: ln + 1,
            message: format!("expected {kind} field, found {}", toks[1]),
        });
    }
    let count: usize = toks[2].parse().map_err(|_| Error::Parse {
        line: ln + 1,
        message: "bad count".into(),
    })?;
    let mut values = Vec::with_capacity(count);
    for (ln, l) in lines {
        let v = l.trim().parse().map_err(|_| Error::Parse {
            line: ln + 1,
            message: format!("bad value `{l}`"),
        })?;
        values.push(v);
    }
    if values.len() != count {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            message: format!("expected {count} values, found {}", values.len()),
        });
    }
    Ok(values)
}

/// `(ψ, ∇̃_h × u)` image of a discrete velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedPair {
    pub psi: DualField,
    pub omega: DualField,
}

/// Discrete forcing and the potentials it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForcing {
    pub f: EdgeField,
    pub psi_f: DualField,
    pub phi_f: CellField,
}

pub fn div(m: &StaggeredMesh2D, u: &EdgeField) -> CellField {
    let values = (0..m.n_cells())
        .map(|i| {
            let flux: f64 = m
                .ec(i)
                .iter()
                .map(|&e| {
                    let ed = m.edge(e);
                    ed.cell_sign_of(i).unwrap_or(0.0) * u.values[e] * ed.l
                })
                .sum();
            flux / m.cell_areas()[i]
        })
        .collect();
    CellField { values }
}

pub fn curl(m: &StaggeredMesh2D, u: &EdgeField) -> DualField {
    let values = (0..m.n_v())
        .map(|v| {
            let circ: f64 = m
                .ev(v)
                .iter()
                .map(|&e| {
                    let ed = m.edge(e);
                    -ed.dual_sign_of(v).unwrap_or(0.0) * u.values[e] * ed.d
                })
                .sum();
            circ / m.dual_areas()[v]
        })
        .collect();
    DualField { values }
}

pub fn grad_cell(m: &StaggeredMesh2D, phi: &CellField) -> EdgeField {
    let values = m
        .edges()
        .iter()
        .map(|ed| (phi.values[ed.cells[1]] - phi.values[ed.cells[0]]) / ed.d)
        .collect();
    EdgeField { values }
}

pub fn perp_grad_dual(m: &StaggeredMesh2D, psi: &DualField) -> EdgeField {
    let values = m
        .edges()
        .iter()
        .map(|ed| {
            let far = ed.v2.map_or(0.0, |w| psi.values[w]);
            -(far - psi.values[ed.v1]) / ed.l
        })
        .collect();
    EdgeField { values }
}

/// `Σ_e u_e v_e · ½ l_e d_e`.
pub fn inner_edge(m: &StaggeredMesh2D, u: &EdgeField, v: &EdgeField) -> f64 {
    m.edges()
        .iter()
        .zip(u.values.iter().zip(&v.values))
        .map(|(ed, (a, b))| a * b * ed.diamond_area)
        .sum()
}

pub fn inner_cell(m: &StaggeredMesh2D, a: &CellField, b: &CellField) -> f64 {
    m.cell_areas()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

pub fn inner_dual(m: &StaggeredMesh2D, a: &DualField, b: &DualField) -> f64 {
    m.dual_areas()
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .map(|(w, (x, y))| w * x * y)
        .sum()
}

/// Edge `L²` norm restricted to interior edge pairs.
pub fn interior_edge_norm(m: &StaggeredMesh2D, u: &EdgeField) -> f64 {
    m.edges()[..m.n_e()]
        .iter()
        .zip(&u.values)
        .map(|(ed, x)| x * x * ed.diamond_area)
        .fold(0.0, |a, x| a + x)
        .sqrt()
}

/// Dual `L²` norm over duals away from the boundary, where curl is trusted.
pub fn trusted_dual_norm(m: &StaggeredMesh2D, w: &DualField) -> f64 {
    (0..m.n_v())
        .filter(|&v| !m.dual_is_boundary()[v])
        .map(|v| w.values[v] * w.values[v] * m.dual_areas()[v])
        .fold(0.0, |a, x| a + x)
        .sqrt()
}

/// Largest magnitude over trusted duals.
pub fn trusted_dual_max(m: &StaggeredMesh2D, w: &DualField) -> f64 {
    (0..m.n_v())
        .filter(|&v| !m.dual_is_boundary()[v])
        .fold(0.0, |a, v| a.max(w.values[v].abs()))
}

/// Largest magnitude over interior edge pairs.
pub fn interior_edge_max(m: &StaggeredMesh2D, u: &EdgeField) -> f64 {
    u.values[..m.n_e()].iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// `ψ(x_ν)` at every dual center.
pub fn restrict_streamfunction(m: &StaggeredMesh2D, psi: &dyn Fn(Point) -> f64) -> DualField {
    DualField {
        values: m.dual_centers().iter().map(|&p| psi(p)).collect(),
    }
}

/// `R_h u = perp_grad(ψ(x_ν))`; the exterior closure supplies the boundary zero.
pub fn restrict_velocity(m: &StaggeredMesh2D, psi: &dyn Fn(Point) -> f64) -> EdgeField {
    perp_grad_dual(m, &restrict_streamfunction(m, psi))
}

/// `u(x_e) · n_e` sampled at the edge crossings.
pub fn sample_normal(m: &StaggeredMesh2D, u: &dyn Fn(Point) -> Point) -> EdgeField {
    let values = m
        .edges()
        .iter()
        .map(|ed| {
            let v = u(ed.crossing);
            v[0] * ed.normal[0] + v[1] * ed.normal[1]
        })
        .collect();
    EdgeField { values }
}

pub fn cell_from_fn(
    m: &StaggeredMesh2D,
    f: &dyn Fn(Point) -> f64,
    at_centroids: bool,
) -> CellField {
    let pts = if at_centroids {
        m.cell_centroids()
    } else {
        m.cell_centers()
    };
    CellField {
        values: pts.iter().map(|&p| f(p)).collect(),
    }
}

pub fn dual_from_fn(
    m: &StaggeredMesh2D,
    f: &dyn Fn(Point) -> f64,
    at_centroids: bool,
) -> DualField {
    let pts = if at_centroids {
        m.dual_centroids()
    } else {
        m.dual_centers()
    };
    DualField {
        values: pts.iter().map(|&p| f(p)).collect(),
    }
}

const REPRESENTATION_TOL: f64 = 1e-10;

/// `(ψ, curl u)` after checking that `ψ` represents `u`.
pub fn prolong(m: &StaggeredMesh2D, u: &EdgeField, psi: &DualField) -> Result<ProlongedPair> {
    let gap = u.sub(&perp_grad_dual(m, psi)).max_abs();
    if gap > REPRESENTATION_TOL * u.max_abs().max(1.0) {
        return Err(Error::RepresentationMismatch(gap));
    }
    Ok(ProlongedPair {
        psi: psi.clone(),
        omega: curl(m, u),
    })
}

/// Cell averages of the Helmholtz potentials and `f_h = perp_grad ψ^f_h + grad φ^f_h`.
///
/// Averages are centroid values, exact for linear potentials.
pub fn discretize_forcing(
    m: &StaggeredMesh2D,
    psi_f: &dyn Fn(Point) -> f64,
    phi_f: &dyn Fn(Point) -> f64,
) -> DiscreteForcing {
    let psi_h = dual_from_fn(m, psi_f, true);
    let phi_h = cell_from_fn(m, phi_f, true);
    let f = perp_grad_dual(m, &psi_h).add(&grad_cell(m, &phi_h));
    DiscreteForcing {
        f,
        psi_f: psi_h,
        phi_f: phi_h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(n: usize) -> StaggeredMesh2D {
        StaggeredMesh2D::gen_rect(n, n).unwrap()
    }

    fn pseudo(len: usize, seed: u64) -> Vec<f64> {
        // small LCG keeps these tests independent of the rand crate
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn div_of_zero_and_constant_flow() {
        let m = rect(3);
        assert!(div(&m, &EdgeField::zeros(&m))
            .values
            .iter()
            .all(|&v| v == 0.0));
        let u = sample_normal(&m, &|_| [1.0, 0.0]);
        assert!(div(&m, &u).values[..m.n_c()]
            .iter()
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn div_matches_hand_sum() {
        let m = rect(4);
        let u = EdgeField {
            values: pseudo(m.n_edges(), 3),
        };
        let d = div(&m, &u);
        for i in 0..m.n_cells() {
            let mut s = 0.0;
            for (e, ed) in m.edges().iter().enumerate() {
                if ed.cells[0] == i {
                    s += u.values[e] * ed.l;
                } else if ed.cells[1] == i {
                    s -= u.values[e] * ed.l;
                }
            }
            assert!((d.values[i] - s / m.cell_areas()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_rotation_has_curl_two() {
        let m = rect(5);
        let u = sample_normal(&m, &|p| [-p[1], p[0]]);
        let w = curl(&m, &u);
        assert!(
            w.values.iter().all(|v| (v - 2.0).abs() <= 1e-10),
            "{:?}",
            w.values
        );
    }

    #[test]
    fn grad_cell_linear() {
        let m = rect(4);
        let phi = cell_from_fn(&m, &|p| p[0], false);
        let g = grad_cell(&m, &phi);
        for (e, ed) in m.edges().iter().enumerate() {
            assert!((g.values[e] - ed.normal[0]).abs() < 1e-14);
        }
        let c = CellField {
            values: vec![3.0; m.n_cells()],
        };
        assert!(grad_cell(&m, &c).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn perp_grad_difference_oracle() {
        let m = rect(6);
        let f = |p: Point| p[0] * p[1];
        let g = perp_grad_dual(&m, &restrict_streamfunction(&m, &f));
        for (e, ed) in m.edges().iter().enumerate() {
            let a = f(m.dual_centers()[ed.v1]);
            let b = ed.v2.map_or(0.0, |w| f(m.dual_centers()[w]));
            assert_eq!(g.values[e], -(b - a) / ed.l);
        }
    }

    #[test]
    fn identities_hold_on_all_families() {
        let meshes = [
            rect(7),
            StaggeredMesh2D::gen_perturbed(8, 8, 0.1, 3).unwrap(),
            StaggeredMesh2D::gen_tri_hex(8).unwrap(),
        ];
        for m in &meshes {
            let phi = CellField {
                values: pseudo(m.n_cells(), 1),
            };
            let psi = DualField {
                values: pseudo(m.n_v(), 2),
            };
            let u = EdgeField {
                values: pseudo(m.n_edges(), 4),
            };
            assert!(curl(m, &grad_cell(m, &phi)).max_abs() < 1e-12 / m.h());
            assert!(div(m, &perp_grad_dual(m, &psi)).max_abs() < 1e-12 / m.h());
            let a = 2.0 * inner_edge(m, &grad_cell(m, &phi), &u) + inner_cell(m, &phi, &div(m, &u));
            let b = 2.0 * inner_edge(m, &perp_grad_dual(m, &psi), &u)
                + inner_dual(m, &psi, &curl(m, &u));
            assert!(a.abs() < 1e-12 && b.abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn inner_products_hand_sums() {
        let m = rect(3);
        let one = EdgeField {
            values: vec![1.0; m.n_edges()],
        };
        assert!((inner_edge(&m, &one, &one) - 1.5).abs() < 1e-15);
        let c = CellField {
            values: vec![1.0; m.n_cells()],
        };
        assert!((inner_cell(&m, &c, &c) - 1.0).abs() < 1e-15);
        let d = DualField {
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert!((inner_dual(&m, &d, &d) - 30.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn prolong_checks_representation() {
        let m = rect(5);
        let psi = DualField {
            values: pseudo(m.n_v(), 9),
        };
        let u = perp_grad_dual(&m, &psi);
        let pair = prolong(&m, &u, &psi).unwrap();
        assert_eq!(pair.omega, curl(&m, &u));
        let z = prolong(&m, &EdgeField::zeros(&m), &DualField::zeros(&m)).unwrap();
        assert!(z.omega.values.iter().all(|&v| v == 0.0));
        let other = DualField {
            values: pseudo(m.n_v(), 10),
        };
        assert!(matches!(
            prolong(&m, &u, &other),
            Err(Error::RepresentationMismatch(_))
        ));
    }

    #[test]
    fn forcing_linear_potential_is_exact_on_interior() {
        let m = rect(6);
        let f = discretize_forcing(&m, &|_| 0.0, &|p| 2.0 * p[0] - 3.0 * p[1]);
        for (e, ed) in m.edges().iter().enumerate() {
            let both_interior = ed.cells.iter().all(|&i| !m.is_boundary_cell(i));
            if both_interior {
                let want = 2.0 * ed.normal[0] - 3.0 * ed.normal[1];
                assert!((f.f.values[e] - want).abs() < 1e-12);
            }
        }
        let z = discretize_forcing(&m, &|_| 0.0, &|_| 0.0);
        assert!(z.f.max_abs() == 0.0);
    }

    #[test]
    fn field_text_round_trip() {
        let m = rect(4);
        let u = EdgeField {
            values: pseudo(m.n_edges(), 5),
        };
        assert_eq!(EdgeField::from_text(&u.to_text()).unwrap(), u);
        assert!(matches!(
            CellField::from_text(&u.to_text()),
            Err(Error::Parse { .. })
        ));
    }
}
