//! Cropping regions out of the infinite (4,8²) tiling.
//!
//! Blue squares sit at integer points `(u, v)` with `u + v` odd and have
//! axis-aligned edges; octagons sit at `u + v` even and are red when `u` is
//! even, green otherwise. A square's horizontal neighbours share one colour
//! and its vertical neighbours the other. Every vertex of the tiling is a
//! square corner; corner coordinates are kept in quarter units, so the corner
//! of square `(u, v)` toward `(±1, ±1)` is `(4u ± 1, 4v ± 1)`.
//!
//! A region is a predicate on quarter coordinates. Cropping keeps the
//! corners inside it, keeps squares whose four corners survive, and keeps
//! octagon remnants with at least four vertices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Blue,
    Red,
    Green,
}

impl Color {
    pub fn name(self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Red => "red",
            Color::Green => "green",
        }
    }
}

/// Corner position in quarter units.
pub type QPoint = (i64, i64);

#[derive(Clone, Debug)]
pub struct CroppedPlaquette {
    pub color: Color,
    /// Tile centre `(u, v)`.
    pub center: (i64, i64),
    /// Vertex indices. Squares: `[UR, UL, LL, LR]`. Octagons: corners grouped
    /// in pairs that share a blue square, pairs first, leftover singles last.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Cropped {
    /// Vertex positions, sorted row-major from the lower-left.
    pub points: Vec<QPoint>,
    /// Blue, then red, then green; each group row-major by centre.
    pub plaquettes: Vec<CroppedPlaquette>,
}

pub fn is_square(u: i64, v: i64) -> bool {
    (u + v).rem_euclid(2) == 1
}

pub fn octagon_color(u: i64) -> Color {
    if u.rem_euclid(2) == 0 {
        Color::Red
    } else {
        Color::Green
    }
}

/// Corners of square `(u, v)` in the order `[UR, UL, LL, LR]`.
pub fn square_corners(u: i64, v: i64) -> [QPoint; 4] {
    let (x, y) = (4 * u, 4 * v);
    [(x + 1, y + 1), (x - 1, y + 1), (x - 1, y - 1), (x + 1, y - 1)]
}

/// The eight corners of octagon `(u, v)`, as pairs contributed by its four
/// neighbouring squares in counter-clockwise order (right, top, left, bottom).
pub fn octagon_corner_pairs(u: i64, v: i64) -> [[QPoint; 2]; 4] {
    let (x, y) = (4 * u, 4 * v);
    [
        [(x + 3, y - 1), (x + 3, y + 1)],
        [(x + 1, y + 3), (x - 1, y + 3)],
        [(x - 3, y + 1), (x - 3, y - 1)],
        [(x - 1, y - 3), (x + 1, y - 3)],
    ]
}

/// Crop the tiling to `inside`, scanning tile centres in `[lo, hi]²`.
pub fn crop(inside: impl Fn(i64, i64) -> bool, lo: i64, hi: i64) -> Cropped {
    let mut points: Vec<QPoint> = Vec::new();
    for u in lo..=hi {
        for v in lo..=hi {
            if is_square(u, v) {
                points.extend(square_corners(u, v).into_iter().filter(|&(x, y)| inside(x, y)));
            }
        }
    }
    points.sort_by_key(|&(x, y)| (y, x));
    points.dedup();
    let index: HashMap<QPoint, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let mut plaquettes = Vec::new();
    for v in lo..=hi {
        for u in lo..=hi {
            if is_square(u, v) {
                let ids: Option<Vec<usize>> =
                    square_corners(u, v).iter().map(|p| index.get(p).copied()).collect();
                if let Some(ids) = ids {
                    plaquettes.push(CroppedPlaquette {
                        color: Color::Blue,
                        center: (u, v),
                        vertices: ids,
                    });
                }
            } else {
                let mut paired = Vec::new();
                let mut singles = Vec::new();
                for pair in octagon_corner_pairs(u, v) {
                    match (index.get(&pair[0]), index.get(&pair[1])) {
                        (Some(&a), Some(&b)) => paired.extend([a, b]),
                        (Some(&a), None) | (None, Some(&a)) => singles.push(a),
                        (None, None) => {}
                    }
                }
                paired.extend(singles);
                if paired.len() >= 4 {
                    plaquettes.push(CroppedPlaquette {
                        color: octagon_color(u),
                        center: (u, v),
                        vertices: paired,
                    });
                }
            }
        }
    }
    plaquettes.sort_by_key(|p| (p.color, p.center.1, p.center.0));
    Cropped { points, plaquettes }
}

/// Quarter-unit region of the side-`d` triangle: left leg, bottom leg and a
/// hypotenuse running through the corners of a row of removed squares.
pub fn triangle_region(d: usize) -> impl Fn(i64, i64) -> bool {
    let d = d as i64;
    move |x, y| x > -2 && y > 2 && x + y < 4 * d
}
