//! Triangular (4,8²) Majorana color code: construction, validation and the
//! unfolded matching lattice.

pub mod lattice;
mod unfold;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{commutes, gf2_rank, Monomial, ModeSet, SupportMatrix};
use crate::error::{Error, Result};

pub use lattice::Color;
pub use unfold::{
    min_crossing_edges, min_logical_weight, min_logical_string, unfold, EdgeKind, UnfoldedEdge,
    UnfoldedGraph, UnfoldedNode,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    /// Position in units of the octagon spacing.
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plaquette {
    pub id: usize,
    pub color: Color,
    /// Squares list `[c1, c2, c3, c4]` counter-clockwise from the upper
    /// right. Octagons list vertices in consecutive pairs that share a square.
    pub vertices: Vec<usize>,
}

impl Plaquette {
    pub fn support(&self) -> ModeSet {
        self.vertices.iter().copied().collect()
    }

    /// `S_p = i^{|p|/2} ∏ c_j` in ascending mode order.
    pub fn stabilizer(&self) -> Monomial {
        Monomial::hermitian(self.support())
    }
}

/// Schema version 1 of the layout document. Field names are stable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeLayout {
    pub d: usize,
    pub vertices: Vec<Vertex>,
    pub plaquettes: Vec<Plaquette>,
    pub logical_support: Vec<usize>,
}

impl CodeLayout {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn plaquettes_of(&self, color: Color) -> impl Iterator<Item = &Plaquette> {
        self.plaquettes.iter().filter(move |p| p.color == color)
    }

    /// For every vertex, the plaquettes containing it (ascending ids).
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for p in &self.plaquettes {
            for &v in &p.vertices {
                if v < inc.len() {
                    inc[v].push(p.id);
                }
            }
        }
        inc
    }

    /// Plaquettes anticommuting with the mode set `flips` (odd overlap).
    pub fn syndrome_of(&self, flips: &ModeSet) -> Vec<usize> {
        self.plaquettes
            .iter()
            .filter(|p| p.vertices.iter().filter(|&&v| flips.contains(v)).count() % 2 == 1)
            .map(|p| p.id)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn layout_from_cropped(d: usize, c: &lattice::Cropped) -> CodeLayout {
    let vertices = c
        .points
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| Vertex { id, x: x as f64 / 4.0, y: y as f64 / 4.0 })
        .collect::<Vec<_>>();
    let plaquettes = c
        .plaquettes
        .iter()
        .enumerate()
        .map(|(id, p)| Plaquette { id, color: p.color, vertices: p.vertices.clone() })
        .collect();
    CodeLayout { d, logical_support: (0..vertices.len()).collect(), vertices, plaquettes }
}

/// Build the side-`d` triangular code. Only `d ≥ 5` with `d ≡ 1 (mod 4)` is
/// accepted; the construction itself works for any odd `d`.
pub fn build_code(d: usize) -> Result<CodeLayout> {
    if d.is_multiple_of(2) {
        return Err(Error::InvalidDistance { d, reason: "side length must be odd" });
    }
    if d < 5 {
        return Err(Error::InvalidDistance { d, reason: "side length must be at least 5" });
    }
    if d % 4 != 1 {
        return Err(Error::InvalidDistance { d, reason: "side length must be 1 mod 4" });
    }
    Ok(build_code_unchecked(d))
}

/// Construction without the `d ≡ 1 (mod 4)` restriction (odd `d ≥ 3`).
pub fn build_code_unchecked(d: usize) -> CodeLayout {
    let cropped = lattice::crop(lattice::triangle_region(d), -2, d as i64 + 2);
    layout_from_cropped(d, &cropped)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Plaquette count per size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub rank: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<6} {:<22} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CHECK_ODD_VERTICES: &str = "odd-vertex-count";
pub const CHECK_EVEN_SIZE: &str = "even-plaquette-size";
pub const CHECK_VERTEX_IDS: &str = "vertex-ids";
pub const CHECK_COMMUTATION: &str = "even-overlaps";
pub const CHECK_COLORING: &str = "neighbor-colors";
pub const CHECK_RANK: &str = "independent-count";
pub const CHECK_COVERAGE: &str = "vertex-coverage";
pub const CHECK_LOGICAL: &str = "logical-commutes";

/// Check every layout invariant. Never fails; problems are report entries.
pub fn validate_code(layout: &CodeLayout) -> ValidationReport {
    let n = layout.vertices.len();
    let mut checks = Vec::new();
    let mut size_histogram = BTreeMap::new();
    for p in &layout.plaquettes {
        *size_histogram.entry(p.vertices.len()).or_insert(0) += 1;
    }

    checks.push(Check {
        name: CHECK_ODD_VERTICES,
        passed: n % 2 == 1,
        detail: format!("V = {n}"),
    });

    let ids_ok = layout.vertices.iter().enumerate().all(|(i, v)| v.id == i)
        && layout.plaquettes.iter().all(|p| p.vertices.iter().all(|&v| v < n))
        && layout.plaquettes.iter().all(|p| p.support().len() == p.vertices.len());
    checks.push(Check {
        name: CHECK_VERTEX_IDS,
        passed: ids_ok,
        detail: "dense ids, no repeated or dangling vertices".into(),
    });

    let odd: Vec<usize> =
        layout.plaquettes.iter().filter(|p| p.vertices.len() % 2 == 1).map(|p| p.id).collect();
    checks.push(Check {
        name: CHECK_EVEN_SIZE,
        passed: odd.is_empty(),
        detail: if odd.is_empty() {
            format!("sizes {:?}", size_histogram)
        } else {
            format!("odd plaquettes {odd:?}")
        },
    });

    let supports: Vec<ModeSet> = layout.plaquettes.iter().map(|p| p.support()).collect();
    let mut bad_overlap = None;
    let mut bad_color = None;
    for i in 0..supports.len() {
        for j in i + 1..supports.len() {
            let k = supports[i].intersection_len(&supports[j]);
            if k % 2 == 1 && bad_overlap.is_none() {
                bad_overlap = Some((i, j, k));
            }
            if k >= 2
                && layout.plaquettes[i].color == layout.plaquettes[j].color
                && bad_color.is_none()
            {
                bad_color = Some((i, j));
            }
        }
    }
    checks.push(Check {
        name: CHECK_COMMUTATION,
        passed: bad_overlap.is_none(),
        detail: match bad_overlap {
            None => "all pairwise overlaps even".into(),
            Some((i, j, k)) => format!("plaquettes {i} and {j} share {k} vertices"),
        },
    });
    checks.push(Check {
        name: CHECK_COLORING,
        passed: bad_color.is_none(),
        detail: match bad_color {
            None => "edge-sharing plaquettes differ in color".into(),
            Some((i, j)) => format!("plaquettes {i} and {j} share an edge and a color"),
        },
    });

    let rank = gf2_rank(&SupportMatrix::new(supports.clone(), n));
    let want = n.saturating_sub(1) / 2;
    checks.push(Check {
        name: CHECK_RANK,
        passed: rank == want && n % 2 == 1,
        detail: format!("rank {rank}, expected (V-1)/2 = {want}"),
    });

    let mut covered = ModeSet::new();
    for v in supports.iter().flat_map(|s| s.iter()) {
        covered.insert(v);
    }
    let uncovered: Vec<usize> = (0..n).filter(|&v| !covered.contains(v)).collect();
    checks.push(Check {
        name: CHECK_COVERAGE,
        passed: uncovered.is_empty(),
        detail: if uncovered.is_empty() {
            "every vertex on a plaquette".into()
        } else {
            format!("uncovered vertices {uncovered:?}")
        },
    });

    let logical = logical_operator(layout);
    let anti: Vec<usize> = layout
        .plaquettes
        .iter()
        .filter(|p| !commutes(&logical, &p.stabilizer()))
        .map(|p| p.id)
        .collect();
    checks.push(Check {
        name: CHECK_LOGICAL,
        passed: anti.is_empty(),
        detail: if anti.is_empty() {
            "logical commutes with all generators".into()
        } else {
            format!("anticommutes with {anti:?}")
        },
    });

    ValidationReport { checks, size_histogram, rank }
}

/// `c̄ = i^{⌊V/2⌋} ∏ c_j` over the logical support, which squares to one.
pub fn logical_operator(layout: &CodeLayout) -> Monomial {
    Monomial::hermitian(layout.logical_support.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::mono_mul;

    #[test]
    fn rejects_unsupported_sides() {
        for d in [3, 4, 7, 11] {
            assert!(build_code(d).is_err(), "d = {d}");
        }
        assert!(build_code(5).is_ok());
    }

    #[test]
    fn vertex_count_formula() {
        for d in [5, 9, 13, 17] {
            let l = build_code(d).unwrap();
            assert_eq!(l.n_vertices(), (d - 1) * (d - 1) + d);
        }
    }

    #[test]
    fn d5_layout_is_valid() {
        let l = build_code(5).unwrap();
        let r = validate_code(&l);
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn logical_squares_to_one() {
        let l = build_code(5).unwrap();
        let c = logical_operator(&l);
        assert_eq!(c.weight(), 21);
        assert_eq!(mono_mul(&c, &c), Monomial::identity());
    }

    #[test]
    fn squares_list_corners_counter_clockwise() {
        let l = build_code(9).unwrap();
        for p in l.plaquettes_of(Color::Blue) {
            let [ur, ul, ll, lr] = [0, 1, 2, 3].map(|k| &l.vertices[p.vertices[k]]);
            assert!(ur.x > ul.x && ur.y == ul.y);
            assert!(ll.x == ul.x && ll.y < ul.y);
            assert!(lr.x == ur.x && lr.y == ll.y);
        }
    }

    #[test]
    fn json_roundtrip() {
        let l = build_code(5).unwrap();
        let back = CodeLayout::from_json(&l.to_json().unwrap()).unwrap();
        assert_eq!(l, back);
    }
}
