//! Plain-text mesh format.
//!
//! ```text
//! mesh2d 1
//! counts n_c n_cb n_v n_e n_eb
//! cells            # x y area, one line per cell
//! duals            # x y area is_boundary
//! edges            # i1 i2 v1 v2 nx ny le de, v2 = -1 when virtual
//! connectivity EC  # per cell: count then edge indices
//! connectivity EV  # per dual: count then edge indices
//! ```
//!
//! Indices are zero-based. Everything else is rederived on load.

use std::fmt::Write as _;
use std::path::Path;

use super::{EdgeCore, StaggeredMesh2D};
use crate::error::{Error, Result};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl StaggeredMesh2D {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mesh2d 1");
        let _ = writeln!(
            s,
            "counts {} {} {} {} {}",
            self.n_c,
            self.n_cb,
            self.n_v(),
            self.n_e,
            self.n_eb
        );
        let _ = writeln!(s, "cells");
        for (c, a) in self.cell_center.iter().zip(&self.cell_area) {
            let _ = writeln!(s, "{} {} {}", num(c[0]), num(c[1]), num(*a));
        }
        let _ = writeln!(s, "duals");
        for v in 0..self.n_v() {
            let c = self.dual_center[v];
            let b = u8::from(self.dual_is_boundary[v]);
            let _ = writeln!(
                s,
                "{} {} {} {b}",
                num(c[0]),
                num(c[1]),
                num(self.dual_area[v])
            );
        }
        let _ = writeln!(s, "edges");
        for e in &self.edges {
            let v2 = e.v2.map_or(-1, |v| v as i64);
            let _ = writeln!(
                s,
                "{} {} {} {v2} {} {} {} {}",
                e.cells[0],
                e.cells[1],
                e.v1,
                num(e.normal[0]),
                num(e.normal[1]),
                num(e.l),
                num(e.d)
            );
        }
        for (name, lists) in [("EC", &self.ec), ("EV", &self.ev)] {
            let _ = writeln!(s, "connectivity {name}");
            for list in lists {
                let items: Vec<String> = list.iter().map(ToString::to_string).collect();
                let _ = writeln!(s, "{} {}", list.len(), items.join(" "));
            }
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Parses and, unless `force`, validates a mesh.
    pub fn from_text(text: &str, force: bool) -> Result<Self> {
        let mesh = Parser::new(text).mesh()?;
        if !force {
            let report = mesh.validate();
            if !report.all_passed() {
                return Err(Error::InvariantViolation(report.failures().join("; ")));
            }
        }
        Ok(mesh)
    }

    pub fn load(path: impl AsRef<Path>, force: bool) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?, force)
    }
}

struct Parser<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(k, l)| {
                let body = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = body.split_whitespace().collect();
                (!toks.is_empty()).then_some((k + 1, toks))
            })
            .collect();
        Self { lines, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.lines.last().map_or(1, |l| l.0)
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let line = self
            .lines
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse {
                line: self.last_line() + 1,
                message: format!("unexpected end of input, expected {what}"),
            })?;
        self.pos += 1;
        Ok(line)
    }

    fn keyword(&mut self, words: &[&str]) -> Result<(usize, Vec<&'a str>)> {
        let (ln, toks) = self.next(&words.join(" "))?;
        if toks.len() < words.len() || toks[..words.len()] != *words {
            return Err(Error::Parse {
                line: ln,
                message: format!("expected `{}`", words.join(" ")),
            });
        }
        Ok((ln, toks))
    }

    fn mesh(&mut self) -> Result<StaggeredMesh2D> {
        let (ln, toks) = self.keyword(&["mesh2d"])?;
        if toks.get(1) != Some(&"1") {
            return Err(Error::Parse {
                line: ln,
                message: "unsupported mesh2d version".into(),
            });
        }
        let (ln, toks) = self.keyword(&["counts"])?;
        if toks.len() != 6 {
            return Err(Error::Parse {
                line: ln,
                message: "counts needs five integers".into(),
            });
        }
        let counts: Vec<usize> = toks[1..]
            .iter()
            .map(|t| parse(ln, t))
            .collect::<Result<_>>()?;
        let [n_c, n_cb, n_v, n_e, n_eb] = [counts[0], counts[1], counts[2], counts[3], counts[4]];
        let n_cells = n_c + n_cb;
        let n_edges = n_e + n_eb;

        self.keyword(&["cells"])?;
        let mut cell_center = Vec::with_capacity(n_cells);
        let mut cell_area = Vec::with_capacity(n_cells);
        for _ in 0..n_cells {
            let (ln, t) = self.row("cell", 3)?;
            cell_center.push([parse(ln, t[0])?, parse(ln, t[1])?]);
            cell_area.push(parse(ln, t[2])?);
        }

        self.keyword(&["duals"])?;
        let mut dual_center = Vec::with_capacity(n_v);
        let mut dual_area = Vec::with_capacity(n_v);
        let mut dual_is_boundary = Vec::with_capacity(n_v);
        for _ in 0..n_v {
            let (ln, t) = self.row("dual", 4)?;
            dual_center.push([parse(ln, t[0])?, parse(ln, t[1])?]);
            dual_area.push(parse(ln, t[2])?);
            dual_is_boundary.push(match t[3] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line: ln,
                        message: format!("bad boundary flag `{other}`"),
                    })
                }
            });
        }

        self.keyword(&["edges"])?;
        let mut cores = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let (ln, t) = self.row("edge", 8)?;
            let i1: usize = parse(ln, t[0])?;
            let i2: usize = parse(ln, t[1])?;
            let v1: usize = parse(ln, t[2])?;
            let v2: i64 = parse(ln, t[3])?;
            if i1 >= n_cells || i2 >= n_cells || v1 >= n_v || v2 < -1 || v2 >= n_v as i64 {
                return Err(Error::Parse {
                    line: ln,
                    message: "edge index out of range".into(),
                });
            }
            cores.push(EdgeCore {
                cells: [i1, i2],
                v1,
                v2: (v2 >= 0).then_some(v2 as usize),
                normal: [parse(ln, t[4])?, parse(ln, t[5])?],
                l: parse(ln, t[6])?,
                d: parse(ln, t[7])?,
            });
        }

        let ec = self.adjacency("EC", n_cells, n_edges)?;
        let ev = self.adjacency("EV", n_v, n_edges)?;
        if let Some((ln, _)) = self.lines.get(self.pos) {
            return Err(Error::Parse {
                line: *ln,
                message: "trailing content".into(),
            });
        }
        Ok(StaggeredMesh2D::assemble(
            n_c,
            n_e,
            cell_center,
            cell_area,
            dual_center,
            dual_area,
            dual_is_boundary,
            cores,
            ec,
            ev,
        ))
    }

    fn row(&mut self, what: &str, width: usize) -> Result<(usize, Vec<&'a str>)> {
        let (ln, toks) = self.next(what)?;
        if toks.len() != width {
            return Err(Error::Parse {
                line: ln,
                message: format!("{what} line needs {width} fields, found {}", toks.len()),
            });
        }
        Ok((ln, toks))
    }

    fn adjacency(&mut self, name: &str, rows: usize, n_edges: usize) -> Result<Vec<Vec<usize>>> {
        self.keyword(&["connectivity", name])?;
        let mut out = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (ln, toks) = self.next(name)?;
            let count: usize = parse(ln, toks[0])?;
            if toks.len() != count + 1 {
                return Err(Error::Parse {
                    line: ln,
                    message: format!("expected {count} indices"),
                });
            }
            let list: Vec<usize> = toks[1..]
                .iter()
                .map(|t| parse(ln, t))
                .collect::<Result<_>>()?;
            if list.iter().any(|&e| e >= n_edges) {
                return Err(Error::Parse {
                    line: ln,
                    message: "edge index out of range".into(),
                });
            }
            out.push(list);
        }
        Ok(out)
    }
}

fn parse<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.parse().map_err(|e: T::Err| Error::Parse {
        line,
        message: format!("`{tok}`: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for m in [
            StaggeredMesh2D::gen_perturbed(8, 8, 0.1, 3).unwrap(),
            StaggeredMesh2D::gen_tri_hex(6).unwrap(),
        ] {
            let back = StaggeredMesh2D::from_text(&m.to_text(), false).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = StaggeredMesh2D::gen_rect(4, 4).unwrap().to_text();
        let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            StaggeredMesh2D::from_text(&cut, false),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn euler_violation_is_refused() {
        // an extra isolated dual breaks the Euler count while parsing cleanly
        let text = StaggeredMesh2D::gen_rect(3, 3).unwrap().to_text();
        let mut out = Vec::new();
        for line in text.lines() {
            match line {
                "counts 1 8 4 4 8" => out.push("counts 1 8 5 4 8".to_string()),
                "edges" => {
                    out.push("5.0e-1 5.0e-1 0.0e0 0".into());
                    out.push(line.into());
                }
                _ => out.push(line.into()),
            }
        }
        out.push("0".into());
        let text = out.join("\n");
        assert!(matches!(
            StaggeredMesh2D::from_text(&text, false),
            Err(Error::InvariantViolation(_))
        ));
        let forced = StaggeredMesh2D::from_text(&text, true).unwrap();
        assert!(!forced.validate().check("Euler").unwrap().passed);
    }
}
