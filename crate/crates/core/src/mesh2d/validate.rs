use std::fmt;

use super::{cross, dist, dotp, polygon_area_centroid, sub, tri_area, StaggeredMesh2D};

/// Mesh element named by a failing check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    Mesh,
    Cell(usize),
    Dual(usize),
    Edge(usize),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Mesh => write!(f, "mesh"),
            Element::Cell(i) => write!(f, "cell {i}"),
            Element::Dual(v) => write!(f, "dual {v}"),
            Element::Edge(e) => write!(f, "edge {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Element with the largest violation, if any element was examined.
    pub worst: Option<Element>,
    /// Size of the worst violation, in the check's own units.
    pub magnitude: f64,
    pub detail: String,
}

impl fmt::Display for QualityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "OK" } else { "FAIL" };
        write!(f, "{} {} {}", self.name, self.detail, status)?;
        if !self.passed {
            if let Some(w) = self.worst {
                write!(f, " (worst {w}, {:.3e})", self.magnitude)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshQualityReport {
    pub checks: Vec<QualityCheck>,
}

impl MeshQualityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&QualityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per failing check.
    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(ToString::to_string)
            .collect()
    }
}

impl fmt::Display for MeshQualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityThresholds {
    /// Bisection offsets must satisfy `offset ≤ C·h²`.
    pub bisection_c: f64,
    /// Upper bound on `max(l, d) / min(l, d)` over all edges.
    pub max_length_ratio: f64,
    /// Relative tolerance for exact geometric identities.
    pub geometry_tol: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        Self {
            bisection_c: 2.0,
            max_length_ratio: 10.0,
            geometry_tol: 1e-10,
        }
    }
}

/// Running maximum of a violation over elements.
struct Worst {
    element: Option<Element>,
    magnitude: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            element: None,
            magnitude: 0.0,
        }
    }

    fn see(&mut self, element: Element, magnitude: f64) {
        if self.element.is_none() || magnitude > self.magnitude || magnitude.is_nan() {
            self.element = Some(element);
            self.magnitude = magnitude;
        }
    }

    fn check(self, name: &'static str, limit: f64, detail: String) -> QualityCheck {
        let passed = self.magnitude <= limit;
        QualityCheck {
            name,
            passed,
            worst: self.element,
            magnitude: self.magnitude,
            detail,
        }
    }
}

pub(super) fn validate(m: &StaggeredMesh2D, th: &QualityThresholds) -> MeshQualityReport {
    let h = m.h();
    let tol = th.geometry_tol;
    let area_scale = m.domain_area().max(f64::MIN_POSITIVE);
    let mut checks = Vec::new();

    let lhs = m.n_c() + m.n_cb() + m.n_v();
    let rhs = m.n_e() + m.n_eb() + 1;
    checks.push(QualityCheck {
        name: "Euler",
        passed: lhs == rhs,
        worst: (lhs != rhs).then_some(Element::Mesh),
        magnitude: lhs.abs_diff(rhs) as f64,
        detail: format!("{lhs}={rhs}"),
    });

    let mut w = Worst::new();
    for (e, ed) in m.edges().iter().enumerate() {
        let p1 = m.dual_centers()[ed.v1];
        let t_geom = sub(ed.far, p1);
        let t_len = t_geom[0].hypot(t_geom[1]);
        let n_len = ed.normal[0].hypot(ed.normal[1]);
        let k_cross = [-ed.normal[1], ed.normal[0]];
        let mut bad = (n_len - 1.0).abs().max(dist(k_cross, ed.tangent));
        if t_len > 0.0 {
            bad = bad.max((dotp(ed.normal, t_geom) / t_len).abs());
        }
        w.see(Element::Edge(e), bad);
    }
    checks.push(w.check("orthogonality", tol, "|n.t|".into()));

    let mut w = Worst::new();
    for (e, ed) in m.edges().iter().enumerate() {
        let mut bad: f64 = 0.0;
        if ed.cell_sign[0] != -ed.cell_sign[1] || ed.dual_sign[0] != -ed.dual_sign[1] {
            bad = 1.0;
        }
        for k in 0..2 {
            let x = m.cell_centers()[ed.cells[k]];
            let outward = f64::from(ed.cell_sign[k]) * dotp(ed.normal, sub(ed.crossing, x));
            if outward <= 0.0 {
                bad = bad.max(1.0 + outward.abs());
            }
        }
        let duals = [m.dual_centers()[ed.v1], ed.far];
        for k in 0..2 {
            let outward = f64::from(ed.dual_sign[k]) * dotp(ed.tangent, sub(ed.crossing, duals[k]));
            if outward <= 0.0 {
                bad = bad.max(1.0 + outward.abs());
            }
        }
        w.see(Element::Edge(e), bad);
    }
    checks.push(w.check(
        "orientation",
        0.0,
        "n_{e,i2}=-n_{e,i1}, t_{e,v2}=-t_{e,v1}".into(),
    ));

    let mut w = Worst::new();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (e, ed) in m.edges().iter().enumerate() {
        lo = lo.min(ed.l.min(ed.d));
        hi = hi.max(ed.l.max(ed.d));
        let bad = if ed.l > 0.0 && ed.d > 0.0 {
            ed.l.max(ed.d) / ed.l.min(ed.d)
        } else {
            f64::INFINITY
        };
        w.see(Element::Edge(e), bad);
    }
    let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    w.magnitude = ratio;
    checks.push(w.check(
        "quasi-uniformity",
        th.max_length_ratio,
        format!("max/min={ratio:.4}"),
    ));

    // crossing strictly inside both segments
    let mut w = Worst::new();
    for (e, ed) in m.edges().iter().enumerate() {
        let x1 = m.cell_centers()[ed.cells[0]];
        let x2 = m.cell_centers()[ed.cells[1]];
        let p1 = m.dual_centers()[ed.v1];
        let s_cell = dotp(sub(ed.crossing, x1), sub(x2, x1)) / dotp(sub(x2, x1), sub(x2, x1));
        let s_dual =
            dotp(sub(ed.crossing, p1), sub(ed.far, p1)) / dotp(sub(ed.far, p1), sub(ed.far, p1));
        let margin = s_cell.min(1.0 - s_cell).min(s_dual).min(1.0 - s_dual);
        w.see(Element::Edge(e), -margin);
    }
    checks.push(w.check(
        "convexity",
        -f64::EPSILON,
        "crossing inside both segments".into(),
    ));

    let mut w = Worst::new();
    for (e, ed) in m.edges().iter().enumerate() {
        w.see(Element::Edge(e), ed.bisection_offset);
    }
    let limit = th.bisection_c * h * h;
    let observed = if h > 0.0 { w.magnitude / (h * h) } else { 0.0 };
    checks.push(w.check(
        "bisection",
        limit,
        format!("offset/h^2={observed:.4} C={}", th.bisection_c),
    ));

    checks.push(connectivity(m));

    // shoelace dual area against half-diamond sum, cell area against half diamonds
    let mut w = Worst::new();
    for v in 0..m.n_v() {
        let poly: Vec<_> = m.cv(v).iter().map(|&i| m.cell_centers()[i]).collect();
        let shoelace = polygon_area_centroid(&poly).0;
        let pieces: f64 = m
            .ev(v)
            .iter()
            .map(|&e| {
                let ed = m.edge(e);
                tri_area(
                    m.dual_centers()[v],
                    m.cell_centers()[ed.cells[0]],
                    m.cell_centers()[ed.cells[1]],
                )
                .abs()
            })
            .sum();
        let bad = (shoelace - m.dual_areas()[v])
            .abs()
            .max((pieces - m.dual_areas()[v]).abs());
        w.see(Element::Dual(v), bad / area_scale);
    }
    for i in 0..m.n_cells() {
        let pieces: f64 = m
            .ec(i)
            .iter()
            .map(|&e| {
                let ed = m.edge(e);
                let end = if ed.is_boundary() {
                    ed.crossing
                } else {
                    ed.far
                };
                tri_area(m.cell_centers()[i], m.dual_centers()[ed.v1], end).abs()
            })
            .sum();
        w.see(
            Element::Cell(i),
            (pieces - m.cell_areas()[i]).abs() / area_scale,
        );
    }
    checks.push(w.check("areas", tol, "shoelace".into()));

    let mut w = Worst::new();
    for (e, ed) in m.edges().iter().enumerate() {
        let quad = [
            m.cell_centers()[ed.cells[0]],
            m.dual_centers()[ed.v1],
            m.cell_centers()[ed.cells[1]],
            ed.far,
        ];
        let shoelace = polygon_area_centroid(&quad).0.abs();
        let bad = (ed.diamond_area - 0.5 * ed.l * ed.d)
            .abs()
            .max((shoelace - ed.diamond_area).abs());
        w.see(Element::Edge(e), bad / area_scale);
    }
    checks.push(w.check("diamond", tol, "|A_e|=l*d/2".into()));

    // Σ|A_i| = Σ|A_ν| = area enclosed by the boundary dual edges (walked clockwise)
    let cells: f64 = m.cell_areas().iter().sum();
    let duals: f64 = m.dual_areas().iter().sum();
    let enclosed: f64 = -m.edges()[m.n_e()..]
        .iter()
        .map(|ed| 0.5 * cross(m.cell_centers()[ed.cells[0]], m.cell_centers()[ed.cells[1]]))
        .sum::<f64>();
    let bad = ((cells - duals).abs().max((duals - enclosed).abs())) / area_scale;
    checks.push(QualityCheck {
        name: "coverage",
        passed: bad <= tol,
        worst: (bad > tol).then_some(Element::Mesh),
        magnitude: bad,
        detail: format!("cells={cells:.12} duals={duals:.12} boundary={enclosed:.12}"),
    });

    checks.push(boundary_placement(m));

    MeshQualityReport { checks }
}

fn connectivity(m: &StaggeredMesh2D) -> QualityCheck {
    let mut first_bad: Option<Element> = None;
    let mut count = 0usize;
    let mut flag = |el: Element| {
        count += 1;
        first_bad.get_or_insert(el);
    };
    for i in 0..m.n_cells() {
        for &e in m.ec(i) {
            if e >= m.n_edges() || !m.ce(e).contains(&i) {
                flag(Element::Cell(i));
            }
        }
        let mut from_edges: Vec<usize> = m
            .ec(i)
            .iter()
            .filter(|&&e| e < m.n_edges())
            .flat_map(|&e| m.ve(e))
            .collect();
        from_edges.sort_unstable();
        from_edges.dedup();
        let mut vc = m.vc(i).to_vec();
        vc.sort_unstable();
        if vc != from_edges {
            flag(Element::Cell(i));
        }
        for &v in m.vc(i) {
            if !m.cv(v).contains(&i) {
                flag(Element::Cell(i));
            }
        }
    }
    for e in 0..m.n_edges() {
        for i in m.ce(e) {
            if i >= m.n_cells() || !m.ec(i).contains(&e) {
                flag(Element::Edge(e));
            }
        }
        for v in m.ve(e) {
            if v >= m.n_v() || !m.ev(v).contains(&e) {
                flag(Element::Edge(e));
            }
        }
    }
    for v in 0..m.n_v() {
        for &e in m.ev(v) {
            if e >= m.n_edges() || !m.ve(e).contains(&v) {
                flag(Element::Dual(v));
            }
        }
        for &i in m.cv(v) {
            if !m.vc(i).contains(&v) {
                flag(Element::Dual(v));
            }
        }
    }
    QualityCheck {
        name: "connectivity",
        passed: count == 0,
        worst: first_bad,
        magnitude: count as f64,
        detail: "EC/CE/EV/VE/CV/VC".into(),
    }
}

fn boundary_placement(m: &StaggeredMesh2D) -> QualityCheck {
    let mut first_bad: Option<Element> = None;
    let mut count = 0usize;
    let mut flag = |el: Element| {
        count += 1;
        first_bad.get_or_insert(el);
    };
    let mut boundary_degree = vec![0usize; m.n_cells()];
    for (e, ed) in m.edges().iter().enumerate() {
        if ed.is_boundary() != (e >= m.n_e()) {
            flag(Element::Edge(e));
        }
        if ed.is_boundary() {
            for i in ed.cells {
                boundary_degree[i] += 1;
                if !m.is_boundary_cell(i) {
                    flag(Element::Edge(e));
                }
            }
        }
    }
    // boundary centers are the vertices of a closed boundary polygon
    for (i, &deg) in boundary_degree.iter().enumerate() {
        if m.is_boundary_cell(i) != (deg > 0) || deg % 2 != 0 {
            flag(Element::Cell(i));
        }
    }
    for v in 0..m.n_v() {
        let touches = m.ev(v).iter().any(|&e| m.edge(e).is_boundary());
        if touches != m.dual_is_boundary()[v] {
            flag(Element::Dual(v));
        }
    }
    QualityCheck {
        name: "boundary",
        passed: count == 0,
        worst: first_bad,
        magnitude: count as f64,
        detail: "centers on boundary polygon".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_line_format() {
        let r = StaggeredMesh2D::gen_rect(3, 3).unwrap().validate();
        assert_eq!(r.check("Euler").unwrap().to_string(), "Euler 13=13 OK");
    }

    #[test]
    fn flipped_sign_names_the_edge() {
        let mut m = StaggeredMesh2D::gen_rect(4, 4).unwrap();
        m.edge_mut(5).cell_sign[0] = -1;
        let r = m.validate();
        let c = r.check("orientation").unwrap();
        assert!(!c.passed);
        assert_eq!(c.worst, Some(Element::Edge(5)));
    }

    #[test]
    fn displaced_dual_breaks_bisection() {
        let mut m = StaggeredMesh2D::gen_rect(33, 33).unwrap();
        let h = m.h();
        m.dual_center_mut(100)[0] += 0.3 * h;
        assert!(!m.rederived().validate().check("bisection").unwrap().passed);
    }
}
