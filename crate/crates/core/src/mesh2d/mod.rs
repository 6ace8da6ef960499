//! Staggered primary/dual polygonal meshes.
//!
//! Primary cells carry pressure, dual cells carry streamfunction and
//! vorticity, and each edge pair couples a primary edge (between two dual
//! centers, length `l_e`) with the dual edge crossing it (between two primary
//! centers, length `d_e`).
//!
//! The domain is the union of the dual cells, so boundary primary centers sit
//! on its boundary. An edge pair whose primary edge would leave the domain has
//! a single real dual `ν₁`; its far end `ν₂` is virtual, the reflection of
//! `ν₁` across the boundary, where the streamfunction closure is zero. The
//! tangent of such an edge always points outward.
//!
//! Cells are numbered interior first, edges interior (two real duals) first.

mod generate;
mod io;
mod validate;

pub use validate::{Element, MeshQualityReport, QualityCheck, QualityThresholds};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn scale(s: f64, a: Point) -> Point {
    [s * a[0], s * a[1]]
}

pub(crate) fn dotp(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

pub(crate) fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Signed area of the triangle `abc`, positive when counterclockwise.
pub(crate) fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(sub(b, a), sub(c, a))
}

/// Signed shoelace area and centroid of a closed polygon.
pub(crate) fn polygon_area_centroid(pts: &[Point]) -> (f64, Point) {
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..pts.len() {
        let p = pts[k];
        let q = pts[(k + 1) % pts.len()];
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    let a = 0.5 * a;
    if a == 0.0 {
        return (0.0, pts.first().copied().unwrap_or([0.0, 0.0]));
    }
    (a, [cx / (6.0 * a), cy / (6.0 * a)])
}

/// Intersection of the lines `p + s·u` and `q + r·v`, if not parallel.
pub(crate) fn line_intersection(p: Point, u: Point, q: Point, v: Point) -> Option<Point> {
    let den = cross(u, v);
    if den.abs() <= 1e-300 {
        return None;
    }
    let s = cross(sub(q, p), v) / den;
    Some(add(p, scale(s, u)))
}

/// One primary edge / dual edge pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePair {
    /// `[i₁, i₂]`; the normal points from `i₁` to `i₂`.
    pub cells: [usize; 2],
    /// `ν₁`; the tangent points away from it.
    pub v1: usize,
    /// `ν₂`, or `None` when it is the virtual exterior vertex.
    pub v2: Option<usize>,
    pub normal: Point,
    /// `k × n`.
    pub tangent: Point,
    /// Primary-edge length, `|ν₂ − ν₁|`.
    pub l: f64,
    /// Dual-edge length, `|x_{i₂} − x_{i₁}|`.
    pub d: f64,
    /// `n_{e,i}` for `i₁`, `i₂`.
    pub cell_sign: [i8; 2],
    /// `t_{e,ν}` for `ν₁`, `ν₂`.
    pub dual_sign: [i8; 2],
    /// Where the two segments cross.
    pub crossing: Point,
    /// Position of `ν₂`, virtual or not.
    pub far: Point,
    pub diamond_area: f64,
    pub bisection_offset: f64,
}

impl EdgePair {
    pub fn is_boundary(&self) -> bool {
        self.v2.is_none()
    }

    /// `n_{e,i}`, or `None` if `i` is not one of the edge's cells.
    pub fn cell_sign_of(&self, i: usize) -> Option<f64> {
        self.cells
            .iter()
            .position(|&c| c == i)
            .map(|k| f64::from(self.cell_sign[k]))
    }

    /// `t_{e,ν}`, or `None` if `ν` is not one of the edge's real duals.
    pub fn dual_sign_of(&self, v: usize) -> Option<f64> {
        if self.v1 == v {
            Some(f64::from(self.dual_sign[0]))
        } else if self.v2 == Some(v) {
            Some(f64::from(self.dual_sign[1]))
        } else {
            None
        }
    }
}

/// Edge as handed to [`StaggeredMesh2D::build`]; orientation is fixed there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawEdge {
    pub cells: [usize; 2],
    pub v1: usize,
    pub v2: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredMesh2D {
    n_c: usize,
    n_cb: usize,
    n_e: usize,
    n_eb: usize,
    cell_center: Vec<Point>,
    cell_area: Vec<f64>,
    cell_centroid: Vec<Point>,
    dual_center: Vec<Point>,
    dual_area: Vec<f64>,
    dual_centroid: Vec<Point>,
    dual_is_boundary: Vec<bool>,
    edges: Vec<EdgePair>,
    ec: Vec<Vec<usize>>,
    ev: Vec<Vec<usize>>,
    vc: Vec<Vec<usize>>,
    cv: Vec<Vec<usize>>,
    h: f64,
    m_const: f64,
    big_m_const: f64,
}

/// Sorts `items` counterclockwise by the angle of `key(item) - origin`.
fn sort_ccw(items: &mut [usize], origin: Point, key: impl Fn(usize) -> Point) {
    let angle = |k: usize| {
        let d = sub(key(k), origin);
        d[1].atan2(d[0])
    };
    items.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
}

/// Stored per-edge data from which everything else is derived.
#[derive(Clone, Debug)]
pub(crate) struct EdgeCore {
    pub cells: [usize; 2],
    pub v1: usize,
    pub v2: Option<usize>,
    pub normal: Point,
    pub l: f64,
    pub d: f64,
}

impl StaggeredMesh2D {
    /// Builds a mesh from centers and raw edge pairs.
    ///
    /// Cells flagged boundary must lie on the boundary of the union of dual
    /// cells. Every dual must be surrounded by its edges. The result is not
    /// validated.
    pub fn build(
        cell_centers: &[Point],
        cell_is_boundary: &[bool],
        dual_centers: &[Point],
        raw_edges: &[RawEdge],
    ) -> Result<Self> {
        if cell_centers.len() != cell_is_boundary.len() {
            return Err(Error::DimensionMismatch {
                expected: cell_centers.len(),
                got: cell_is_boundary.len(),
            });
        }
        let n_cells = cell_centers.len();
        let n_v = dual_centers.len();
        for e in raw_edges {
            let bad_cell = e.cells.iter().any(|&c| c >= n_cells) || e.cells[0] == e.cells[1];
            let bad_dual = e.v1 >= n_v || e.v2.is_some_and(|v| v >= n_v || v == e.v1);
            if bad_cell || bad_dual {
                return Err(Error::InvalidParameter(format!(
                    "edge {e:?} references invalid elements"
                )));
            }
        }

        // interior cells first, preserving relative order
        let mut order: Vec<usize> = (0..n_cells).filter(|&i| !cell_is_boundary[i]).collect();
        let n_c = order.len();
        order.extend((0..n_cells).filter(|&i| cell_is_boundary[i]));
        let mut new_index = vec![0; n_cells];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let centers: Vec<Point> = order.iter().map(|&i| cell_centers[i]).collect();

        let mut sorted_edges: Vec<RawEdge> = raw_edges
            .iter()
            .filter(|e| e.v2.is_some())
            .copied()
            .collect();
        let n_e = sorted_edges.len();
        sorted_edges.extend(raw_edges.iter().filter(|e| e.v2.is_none()).copied());

        let mut cores = Vec::with_capacity(sorted_edges.len());
        for raw in &sorted_edges {
            let mut cells = [new_index[raw.cells[0]], new_index[raw.cells[1]]];
            let (mut v1, mut v2) = (raw.v1, raw.v2);
            let mut dvec = sub(centers[cells[1]], centers[cells[0]]);
            let d = dvec[0].hypot(dvec[1]);
            if d == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "edge {raw:?} joins coincident centers"
                )));
            }
            let mut normal = scale(1.0 / d, dvec);
            let tangent = [-normal[1], normal[0]];
            match v2 {
                Some(w) => {
                    if dotp(sub(dual_centers[w], dual_centers[v1]), tangent) < 0.0 {
                        v2 = Some(v1);
                        v1 = w;
                    }
                }
                None => {
                    // tangent must point from ν₁ across the boundary
                    let foot = project_onto_line(dual_centers[v1], centers[cells[0]], normal);
                    if dotp(sub(foot, dual_centers[v1]), tangent) < 0.0 {
                        cells.swap(0, 1);
                        dvec = scale(-1.0, dvec);
                        normal = scale(1.0 / d, dvec);
                    }
                }
            }
            let l = match v2 {
                Some(w) => dist(dual_centers[v1], dual_centers[w]),
                None => {
                    let foot = project_onto_line(dual_centers[v1], centers[cells[0]], normal);
                    2.0 * dist(foot, dual_centers[v1])
                }
            };
            cores.push(EdgeCore {
                cells,
                v1,
                v2,
                normal,
                l,
                d,
            });
        }

        let ec = cell_adjacency(&centers, &cores, dual_centers);
        let ev = dual_adjacency(dual_centers, &cores, &centers);
        let dual_is_boundary: Vec<bool> = ev
            .iter()
            .map(|edges| edges.iter().any(|&e| cores[e].v2.is_none()))
            .collect();

        let cv = derive_cv(dual_centers, &cores, &ev, &centers);
        let dual_area = cv
            .iter()
            .map(|cells| {
                let poly: Vec<Point> = cells.iter().map(|&i| centers[i]).collect();
                polygon_area_centroid(&poly).0.abs()
            })
            .collect();
        let cell_area = (0..n_cells)
            .map(|i| {
                ec[i]
                    .iter()
                    .map(|&e| half_diamond(&cores[e], i, &centers, dual_centers).0)
                    .sum::<f64>()
            })
            .collect();

        Ok(Self::assemble(
            n_c,
            n_e,
            centers,
            cell_area,
            dual_centers.to_vec(),
            dual_area,
            dual_is_boundary,
            cores,
            ec,
            ev,
        ))
    }

    /// Derives crossings, signs, centroids, and the remaining connectivity.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        n_c: usize,
        n_e: usize,
        cell_center: Vec<Point>,
        cell_area: Vec<f64>,
        dual_center: Vec<Point>,
        dual_area: Vec<f64>,
        dual_is_boundary: Vec<bool>,
        cores: Vec<EdgeCore>,
        ec: Vec<Vec<usize>>,
        ev: Vec<Vec<usize>>,
    ) -> Self {
        let edges: Vec<EdgePair> = cores
            .iter()
            .map(|c| {
                let xi1 = cell_center[c.cells[0]];
                let xi2 = cell_center[c.cells[1]];
                let p1 = dual_center[c.v1];
                let foot = project_onto_line(p1, xi1, c.normal);
                let (crossing, far) = match c.v2 {
                    Some(w) => {
                        let p2 = dual_center[w];
                        let x =
                            line_intersection(xi1, sub(xi2, xi1), p1, sub(p2, p1)).unwrap_or(foot);
                        (x, p2)
                    }
                    None => (foot, sub(scale(2.0, foot), p1)),
                };
                let bisection_offset =
                    dist(crossing, midpoint(xi1, xi2)).max(dist(crossing, midpoint(p1, far)));
                EdgePair {
                    cells: c.cells,
                    v1: c.v1,
                    v2: c.v2,
                    normal: c.normal,
                    tangent: [-c.normal[1], c.normal[0]],
                    l: c.l,
                    d: c.d,
                    cell_sign: [1, -1],
                    dual_sign: [1, -1],
                    crossing,
                    far,
                    diamond_area: 0.5 * c.l * c.d,
                    bisection_offset,
                }
            })
            .collect();

        let n_cells = cell_center.len();
        let cv = derive_cv(&dual_center, &cores, &ev, &cell_center);
        let mut vc = vec![Vec::new(); n_cells];
        for (v, cells) in cv.iter().enumerate() {
            for &i in cells {
                vc[i].push(v);
            }
        }
        for (i, duals) in vc.iter_mut().enumerate() {
            sort_ccw(duals, cell_center[i], |v| dual_center[v]);
        }

        let cell_centroid = (0..n_cells)
            .map(|i| {
                let mut a = 0.0;
                let mut c = [0.0, 0.0];
                for &e in &ec[i] {
                    let (ta, tc) = half_diamond(&cores[e], i, &cell_center, &dual_center);
                    a += ta;
                    c = add(c, scale(ta, tc));
                }
                if a > 0.0 {
                    scale(1.0 / a, c)
                } else {
                    cell_center[i]
                }
            })
            .collect();
        let dual_centroid = cv
            .iter()
            .map(|cells| {
                let poly: Vec<Point> = cells.iter().map(|&i| cell_center[i]).collect();
                polygon_area_centroid(&poly).1
            })
            .collect();

        let (lo, hi) = edges
            .iter()
            .flat_map(|e| [e.l, e.d])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            });
        let h = hi;
        let n_eb = edges.len() - n_e;
        Self {
            n_c,
            n_cb: n_cells - n_c,
            n_e,
            n_eb,
            cell_center,
            cell_area,
            cell_centroid,
            dual_center,
            dual_area,
            dual_centroid,
            dual_is_boundary,
            edges,
            ec,
            ev,
            vc,
            cv,
            h,
            m_const: if h > 0.0 { lo / h } else { 0.0 },
            big_m_const: if h > 0.0 { 1.0 } else { 0.0 },
        }
    }

    /// Interior primary cells.
    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Boundary primary cells.
    pub fn n_cb(&self) -> usize {
        self.n_cb
    }

    pub fn n_cells(&self) -> usize {
        self.n_c + self.n_cb
    }

    pub fn n_v(&self) -> usize {
        self.dual_center.len()
    }

    /// Interior edge pairs.
    pub fn n_e(&self) -> usize {
        self.n_e
    }

    /// Boundary edge pairs.
    pub fn n_eb(&self) -> usize {
        self.n_eb
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_centers(&self) -> &[Point] {
        &self.cell_center
    }

    /// In-domain areas; boundary cells are clipped.
    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_area
    }

    /// Centroids of the in-domain part of each primary cell.
    pub fn cell_centroids(&self) -> &[Point] {
        &self.cell_centroid
    }

    pub fn is_boundary_cell(&self, i: usize) -> bool {
        i >= self.n_c
    }

    pub fn dual_centers(&self) -> &[Point] {
        &self.dual_center
    }

    pub fn dual_areas(&self) -> &[f64] {
        &self.dual_area
    }

    pub fn dual_centroids(&self) -> &[Point] {
        &self.dual_centroid
    }

    /// Flags duals adjacent to a boundary edge pair.
    pub fn dual_is_boundary(&self) -> &[bool] {
        &self.dual_is_boundary
    }

    pub fn edges(&self) -> &[EdgePair] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &EdgePair {
        &self.edges[e]
    }

    /// Mutable edge access. Bypasses every invariant; revalidate afterwards.
    pub fn edge_mut(&mut self, e: usize) -> &mut EdgePair {
        &mut self.edges[e]
    }

    /// Mutable dual-center access. Bypasses every invariant; revalidate afterwards.
    pub fn dual_center_mut(&mut self, v: usize) -> &mut Point {
        &mut self.dual_center[v]
    }

    /// `EC(i)`: edges of cell `i`, counterclockwise.
    pub fn ec(&self, i: usize) -> &[usize] {
        &self.ec[i]
    }

    /// `VC(i)`: duals touching cell `i`, counterclockwise.
    pub fn vc(&self, i: usize) -> &[usize] {
        &self.vc[i]
    }

    /// `CV(ν)`: cells around dual `ν`, counterclockwise.
    pub fn cv(&self, v: usize) -> &[usize] {
        &self.cv[v]
    }

    /// `EV(ν)`: edges of dual `ν`, counterclockwise.
    pub fn ev(&self, v: usize) -> &[usize] {
        &self.ev[v]
    }

    /// `CE(e)`.
    pub fn ce(&self, e: usize) -> [usize; 2] {
        self.edges[e].cells
    }

    /// `VE(e)`: the real duals of edge `e`.
    pub fn ve(&self, e: usize) -> Vec<usize> {
        let ed = &self.edges[e];
        std::iter::once(ed.v1).chain(ed.v2).collect()
    }

    /// Largest edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Smallest edge length over `h`.
    pub fn m_const(&self) -> f64 {
        self.m_const
    }

    /// Largest edge length over `h`.
    pub fn big_m_const(&self) -> f64 {
        self.big_m_const
    }

    pub fn domain_area(&self) -> f64 {
        self.dual_area.iter().sum()
    }

    pub fn validate(&self) -> MeshQualityReport {
        validate::validate(self, &QualityThresholds::default())
    }

    pub fn validate_with(&self, thresholds: &QualityThresholds) -> MeshQualityReport {
        validate::validate(self, thresholds)
    }

    /// Recomputes crossings, offsets, centroids, and derived connectivity
    /// from the stored centers, areas, lengths, and `EC`/`EV` lists.
    pub fn rederived(&self) -> Self {
        Self::assemble(
            self.n_c,
            self.n_e,
            self.cell_center.clone(),
            self.cell_area.clone(),
            self.dual_center.clone(),
            self.dual_area.clone(),
            self.dual_is_boundary.clone(),
            self.cores(),
            self.ec.clone(),
            self.ev.clone(),
        )
    }

    pub(crate) fn cores(&self) -> Vec<EdgeCore> {
        self.edges
            .iter()
            .map(|e| EdgeCore {
                cells: e.cells,
                v1: e.v1,
                v2: e.v2,
                normal: e.normal,
                l: e.l,
                d: e.d,
            })
            .collect()
    }
}

fn project_onto_line(p: Point, origin: Point, dir: Point) -> Point {
    add(origin, scale(dotp(sub(p, origin), dir), dir))
}

/// Area and centroid of the in-domain half diamond of edge `c` next to cell `i`.
fn half_diamond(c: &EdgeCore, i: usize, centers: &[Point], duals: &[Point]) -> (f64, Point) {
    let xi = centers[i];
    let p1 = duals[c.v1];
    let p2 = match c.v2 {
        Some(w) => duals[w],
        None => project_onto_line(p1, centers[c.cells[0]], c.normal),
    };
    let a = tri_area(xi, p1, p2).abs();
    let centroid = scale(1.0 / 3.0, add(add(xi, p1), p2));
    (a, centroid)
}

fn edge_anchor(c: &EdgeCore, centers: &[Point], duals: &[Point]) -> Point {
    let xi1 = centers[c.cells[0]];
    let p1 = duals[c.v1];
    let foot = project_onto_line(p1, xi1, c.normal);
    match c.v2 {
        Some(w) => {
            let p2 = duals[w];
            line_intersection(xi1, sub(centers[c.cells[1]], xi1), p1, sub(p2, p1)).unwrap_or(foot)
        }
        None => foot,
    }
}

fn cell_adjacency(centers: &[Point], cores: &[EdgeCore], duals: &[Point]) -> Vec<Vec<usize>> {
    let mut ec = vec![Vec::new(); centers.len()];
    for (e, c) in cores.iter().enumerate() {
        ec[c.cells[0]].push(e);
        ec[c.cells[1]].push(e);
    }
    for (i, edges) in ec.iter_mut().enumerate() {
        sort_ccw(edges, centers[i], |e| {
            edge_anchor(&cores[e], centers, duals)
        });
    }
    ec
}

fn dual_adjacency(duals: &[Point], cores: &[EdgeCore], centers: &[Point]) -> Vec<Vec<usize>> {
    let mut ev = vec![Vec::new(); duals.len()];
    for (e, c) in cores.iter().enumerate() {
        ev[c.v1].push(e);
        if let Some(w) = c.v2 {
            ev[w].push(e);
        }
    }
    for (v, edges) in ev.iter_mut().enumerate() {
        sort_ccw(edges, duals[v], |e| edge_anchor(&cores[e], centers, duals));
    }
    ev
}

fn derive_cv(
    duals: &[Point],
    cores: &[EdgeCore],
    ev: &[Vec<usize>],
    centers: &[Point],
) -> Vec<Vec<usize>> {
    ev.iter()
        .enumerate()
        .map(|(v, edges)| {
            let mut cells: Vec<usize> = edges.iter().flat_map(|&e| cores[e].cells).collect();
            cells.sort_unstable();
            cells.dedup();
            sort_ccw(&mut cells, duals[v], |i| centers[i]);
            cells
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_helpers() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let (a, c) = polygon_area_centroid(&sq);
        assert_eq!(a, 4.0);
        assert_eq!(c, [1.0, 1.0]);
        assert_eq!(tri_area([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]), 0.5);
        let x = line_intersection([0.0, 0.0], [1.0, 0.0], [0.5, -1.0], [0.0, 1.0]).unwrap();
        assert_eq!(x, [0.5, 0.0]);
        assert!(line_intersection([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]).is_none());
    }

    #[test]
    fn build_orients_boundary_tangent_outward() {
        // two cells on the bottom boundary, one dual above them
        let cells = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let duals = [[0.5, 0.5]];
        let edges = [
            RawEdge {
                cells: [1, 0],
                v1: 0,
                v2: None,
            },
            RawEdge {
                cells: [1, 2],
                v1: 0,
                v2: None,
            },
            RawEdge {
                cells: [2, 3],
                v1: 0,
                v2: None,
            },
            RawEdge {
                cells: [3, 0],
                v1: 0,
                v2: None,
            },
        ];
        let m = StaggeredMesh2D::build(&cells, &[true; 4], &duals, &edges).unwrap();
        for e in m.edges() {
            let out = sub(e.crossing, [0.5, 0.5]);
            assert!(dotp(out, e.tangent) > 0.0);
            assert_eq!(e.l, 1.0);
            assert_eq!(e.far, add(e.crossing, out));
        }
        assert_eq!(m.dual_areas(), &[1.0]);
        assert!(m.cell_areas().iter().all(|&a| (a - 0.25).abs() < 1e-15));
        assert_eq!(m.dual_is_boundary(), &[true]);
    }
}
