//! The unfolded matching lattice.
//!
//! Red and green plaquettes become nodes. Each blue square contributes two
//! weight-two edges: the one flipping its red neighbours (`E_R`) and the one
//! flipping its green neighbours (`E_G`). The two share a corner, so choosing
//! both costs two single-mode errors rather than four; they are each other's
//! image. Vertices on the diagonal lie on no square and give single-mode edges
//! between a red and a green plaquette.
//!
//! Edges touching only one red/green plaquette end on a boundary node. The
//! two boundary nodes are distinguished by fermion parity: a string joining
//! them has odd weight and therefore acts as the logical operator.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{CodeLayout, Color};
use crate::algebra::ModeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    #[serde(rename = "E_R")]
    ER,
    #[serde(rename = "E_G")]
    EG,
    #[serde(rename = "single-mode")]
    SingleMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnfoldedNode {
    Plaquette(usize),
    Left,
    Right,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnfoldedEdge {
    pub id: usize,
    pub endpoints: (usize, usize),
    pub kind: EdgeKind,
    pub correction: ModeSet,
    /// Partner edge; single-mode edges are their own image.
    pub image: Option<usize>,
    /// Blue plaquette the edge lives on, if any.
    pub square: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnfoldedGraph {
    pub nodes: Vec<UnfoldedNode>,
    pub edges: Vec<UnfoldedEdge>,
    pub left: usize,
    pub right: usize,
}

impl UnfoldedGraph {
    pub fn node_of_plaquette(&self, pid: usize) -> Option<usize> {
        self.nodes.iter().position(|n| *n == UnfoldedNode::Plaquette(pid))
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            let (a, b) = e.endpoints;
            adj[a].push((b, e.id));
            adj[b].push((a, e.id));
        }
        adj
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        node == self.left || node == self.right
    }
}

struct Pending {
    ends: Vec<usize>,
    kind: EdgeKind,
    correction: ModeSet,
    square: Option<usize>,
}

pub fn unfold(layout: &CodeLayout) -> UnfoldedGraph {
    let mut nodes = Vec::new();
    let mut node_of = vec![usize::MAX; layout.plaquettes.len()];
    for p in &layout.plaquettes {
        if p.color != Color::Blue {
            node_of[p.id] = nodes.len();
            nodes.push(UnfoldedNode::Plaquette(p.id));
        }
    }
    let color_of = |pid: usize| layout.plaquettes[pid].color;
    let incidence = layout.incidence();

    let mut pending: Vec<Pending> = Vec::new();
    let mut pairs_on_square = Vec::new();
    for sq in layout.plaquettes_of(Color::Blue) {
        let c = &sq.vertices;
        let mut ids = [None, None];
        for (a, b) in [(c[0], c[1]), (c[0], c[3])] {
            let corr: ModeSet = [a, b].into_iter().collect();
            let flipped = layout.syndrome_of(&corr);
            debug_assert!(flipped.iter().all(|&p| color_of(p) != Color::Blue));
            let Some(&first) = flipped.first() else { continue };
            let kind = if color_of(first) == Color::Red { EdgeKind::ER } else { EdgeKind::EG };
            let slot = if kind == EdgeKind::ER { 0 } else { 1 };
            ids[slot] = Some(pending.len());
            pending.push(Pending {
                ends: flipped.iter().map(|&p| node_of[p]).collect(),
                kind,
                correction: corr,
                square: Some(sq.id),
            });
        }
        pairs_on_square.push(ids);
    }
    for (v, plaqs) in incidence.iter().enumerate() {
        if plaqs.iter().all(|&p| color_of(p) != Color::Blue) {
            pending.push(Pending {
                ends: plaqs.iter().map(|&p| node_of[p]).collect(),
                kind: EdgeKind::SingleMode,
                correction: [v].into_iter().collect(),
                square: None,
            });
        }
    }

    // Parity of a tree path from an arbitrary root, to classify boundary ends.
    let n_int = nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_int];
    for (i, p) in pending.iter().enumerate() {
        if p.ends.len() == 2 {
            adj[p.ends[0]].push((p.ends[1], i));
            adj[p.ends[1]].push((p.ends[0], i));
        }
    }
    let mut parity = vec![None; n_int];
    for root in 0..n_int {
        if parity[root].is_some() {
            continue;
        }
        parity[root] = Some(0usize);
        let mut q = VecDeque::from([root]);
        while let Some(a) = q.pop_front() {
            let pa = parity[a].unwrap();
            for &(b, e) in &adj[a] {
                if parity[b].is_none() {
                    parity[b] = Some((pa + pending[e].correction.len()) % 2);
                    q.push_back(b);
                }
            }
        }
    }

    let left = nodes.len();
    nodes.push(UnfoldedNode::Left);
    let right = nodes.len();
    nodes.push(UnfoldedNode::Right);

    let mut edges: Vec<UnfoldedEdge> = pending
        .into_iter()
        .enumerate()
        .map(|(id, p)| {
            let endpoints = match p.ends.as_slice() {
                [a, b] => (*a, *b),
                [a] => {
                    let side = (parity[*a].unwrap() + p.correction.len()) % 2;
                    (*a, if side == 0 { left } else { right })
                }
                other => panic!("edge flips {} red/green plaquettes", other.len()),
            };
            UnfoldedEdge {
                id,
                endpoints,
                kind: p.kind,
                correction: p.correction,
                image: None,
                square: p.square,
            }
        })
        .collect();
    for [r, g] in pairs_on_square {
        if let (Some(r), Some(g)) = (r, g) {
            edges[r].image = Some(g);
            edges[g].image = Some(r);
        }
    }
    for e in edges.iter_mut() {
        if e.kind == EdgeKind::SingleMode {
            e.image = Some(e.id);
        }
    }
    UnfoldedGraph { nodes, edges, left, right }
}

/// Fewest edges on any left-to-right path.
pub fn min_crossing_edges(g: &UnfoldedGraph) -> Option<usize> {
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; g.nodes.len()];
    dist[g.left] = 0;
    let mut q = VecDeque::from([g.left]);
    while let Some(a) = q.pop_front() {
        if a == g.right {
            return Some(dist[a]);
        }
        for &(b, _) in &adj[a] {
            if dist[b] == usize::MAX && (b == g.right || !g.is_boundary(b)) {
                dist[b] = dist[a] + 1;
                q.push_back(b);
            }
        }
    }
    None
}

/// Cheapest left-to-right string, with its cost `|⊕ corrections|` and edges.
///
/// Cost never drops when an edge is appended (edges overlap only in image
/// pairs, which share a single mode), so branches at or above the best cost
/// found so far are pruned.
pub fn min_logical_string(layout: &CodeLayout) -> Option<(usize, Vec<usize>)> {
    let g = unfold(layout);
    let adj = g.adjacency();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut visited = vec![false; g.nodes.len()];
    let mut path = Vec::new();
    visited[g.left] = true;

    fn dfs(
        g: &UnfoldedGraph,
        adj: &[Vec<(usize, usize)>],
        at: usize,
        acc: &ModeSet,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        best: &mut Option<(usize, Vec<usize>)>,
    ) {
        for &(b, e) in &adj[at] {
            if visited[b] || b == g.left {
                continue;
            }
            let next = acc.xor(&g.edges[e].correction);
            let cost = next.len();
            if best.as_ref().is_some_and(|(c, _)| cost >= *c) {
                continue;
            }
            path.push(e);
            if b == g.right {
                *best = Some((cost, path.clone()));
            } else {
                visited[b] = true;
                dfs(g, adj, b, &next, visited, path, best);
                visited[b] = false;
            }
            path.pop();
        }
    }

    dfs(&g, &adj, g.left, &ModeSet::new(), &mut visited, &mut path, &mut best);
    best
}

/// Code distance from the exhaustive image-aware string search.
pub fn min_logical_weight(layout: &CodeLayout) -> usize {
    min_logical_string(layout).map(|(c, _)| c).unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::build_code;

    #[test]
    fn every_square_has_an_image_pair() {
        let l = build_code(9).unwrap();
        let g = unfold(&l);
        for sq in l.plaquettes_of(Color::Blue) {
            let on: Vec<&UnfoldedEdge> = g.edges.iter().filter(|e| e.square == Some(sq.id)).collect();
            assert_eq!(on.len(), 2, "square {}", sq.id);
            assert_eq!(on[0].image, Some(on[1].id));
            assert_ne!(on[0].kind, on[1].kind);
        }
    }

    #[test]
    fn single_mode_edges_join_red_and_green() {
        let l = build_code(9).unwrap();
        let g = unfold(&l);
        let singles: Vec<_> = g.edges.iter().filter(|e| e.kind == EdgeKind::SingleMode).collect();
        assert_eq!(singles.len(), 9);
        let mut boundary = 0;
        for e in singles {
            let colors: Vec<Color> = [e.endpoints.0, e.endpoints.1]
                .iter()
                .filter_map(|&n| match g.nodes[n] {
                    UnfoldedNode::Plaquette(p) => Some(l.plaquettes[p].color),
                    _ => None,
                })
                .collect();
            if colors.len() == 1 {
                // The two triangle corners sit on a single 4-vertex plaquette.
                boundary += 1;
                assert_eq!(l.plaquettes[l.incidence()[e.correction.to_vec()[0]][0]].vertices.len(), 4);
            } else {
                assert!(colors.contains(&Color::Red) && colors.contains(&Color::Green));
            }
        }
        assert_eq!(boundary, 2);
    }

    #[test]
    fn distance_five() {
        let l = build_code(5).unwrap();
        assert_eq!(min_logical_weight(&l), 5);
        assert_eq!(min_crossing_edges(&unfold(&l)), Some(3));
    }
}
