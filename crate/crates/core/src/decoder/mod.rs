//! Two-step decoding.
//!
//! Blue outcomes are handled first: every blue detection event is explained
//! by a flip of the square's lower-left mode, which is added to the
//! correction and folded into the red/green record from that round on. What
//! is left lives on red/green plaquettes only and is decoded by
//! minimum-weight perfect matching on a space-time copy of the unfolded
//! graph.

pub mod blossom;
mod graph;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::algebra::ModeSet;
use crate::code::{CodeLayout, Color};
use crate::error::{Error, Result};
use crate::noisesim::{ErrorParams, SyndromeHistory};

pub use graph::{
    build_matching_graph, End, FaultClass, FaultTable, GraphEdge, GraphTemplate, MatchingGraph, Weighting,
    WEIGHT_SCALE,
};

/// Lower-left vertex of each blue square, and the numbering of red/green
/// plaquettes as matching nodes.
#[derive(Clone, Debug)]
pub struct BlueCanon {
    /// For each plaquette: `Some(mode)` if blue.
    canonical: Vec<Option<usize>>,
    incidence: Vec<Vec<usize>>,
    /// Plaquette id → space node (red/green only).
    space_of: Vec<Option<usize>>,
    plaquette_of: Vec<usize>,
}

impl BlueCanon {
    pub fn new(layout: &CodeLayout) -> Self {
        let canonical = layout
            .plaquettes
            .iter()
            .map(|p| {
                (p.color == Color::Blue).then(|| {
                    *p.vertices
                        .iter()
                        .min_by(|&&a, &&b| {
                            let (va, vb) = (&layout.vertices[a], &layout.vertices[b]);
                            va.y.total_cmp(&vb.y).then(va.x.total_cmp(&vb.x))
                        })
                        .expect("non-empty square")
                })
            })
            .collect();
        let mut space_of = vec![None; layout.plaquettes.len()];
        let mut plaquette_of = Vec::new();
        for p in &layout.plaquettes {
            if p.color != Color::Blue {
                space_of[p.id] = Some(plaquette_of.len());
                plaquette_of.push(p.id);
            }
        }
        Self { canonical, incidence: layout.incidence(), space_of, plaquette_of }
    }

    pub fn n_space(&self) -> usize {
        self.plaquette_of.len()
    }

    /// Lower-left mode of a blue square.
    pub fn lower_left(&self, square: usize) -> Option<usize> {
        self.canonical[square]
    }

    pub fn plaquette_of_space(&self, s: usize) -> usize {
        self.plaquette_of[s]
    }

    pub fn space_of_plaquette(&self, p: usize) -> Option<usize> {
        self.space_of[p]
    }

    /// Fold blue events into the record; returns the updated history and the
    /// partial correction.
    pub fn apply(&self, h: &SyndromeHistory) -> (SyndromeHistory, ModeSet) {
        let n = h.n_plaquettes;
        let mut out = h.clone();
        let mut acc = vec![false; n];
        let mut fix = ModeSet::new();
        for r in 0..h.rows() {
            for (p, c) in self.canonical.iter().enumerate() {
                let Some(m) = *c else { continue };
                let prev = r > 0 && h.outcome(r - 1, p);
                if h.outcome(r, p) != prev {
                    fix.toggle(m);
                    for &q in &self.incidence[m] {
                        acc[q] ^= true;
                    }
                }
            }
            for p in 0..n {
                out.outcomes[r * n + p] ^= acc[p];
            }
        }
        (out, fix)
    }

    /// Red/green detection events as `(space node, row)`, row-major.
    pub fn space_events(&self, h: &SyndromeHistory) -> Vec<(usize, usize)> {
        let mut ev = Vec::new();
        for r in 0..h.rows() {
            for (s, &p) in self.plaquette_of.iter().enumerate() {
                let prev = r > 0 && h.outcome(r - 1, p);
                if h.outcome(r, p) != prev {
                    ev.push((s, r));
                }
            }
        }
        ev
    }

    /// Space nodes with an odd number of the given events.
    pub fn space_parity(&self, ev: &[(usize, usize)]) -> Vec<usize> {
        let mut odd = vec![false; self.n_space()];
        for &(s, _) in ev {
            odd[s] ^= true;
        }
        (0..odd.len()).filter(|&s| odd[s]).collect()
    }

    /// Red/green plaquettes (as space nodes) anticommuting with `flips`.
    pub fn space_syndrome(&self, layout: &CodeLayout, flips: &ModeSet) -> Vec<usize> {
        layout.syndrome_of(flips).into_iter().filter_map(|p| self.space_of[p]).collect()
    }
}

/// The blue step on its own.
pub fn blue_step(h: &SyndromeHistory, layout: &CodeLayout) -> (SyndromeHistory, ModeSet) {
    BlueCanon::new(layout).apply(h)
}

/// Shortest-path tree from one source.
struct Tree {
    dist: Vec<i64>,
    pred: Vec<usize>,
}

const INF: i64 = i64::MAX / 4;

fn dijkstra(g: &MatchingGraph, src: usize, limit: i64) -> Tree {
    let n = g.n_nodes();
    let mut dist = vec![INF; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] || d > limit {
            continue;
        }
        for &(v, e) in &g.adjacency[u] {
            let nd = d + g.edges[e].weight;
            if nd < dist[v] || (nd == dist[v] && e < pred[v] && pred[v] != usize::MAX) {
                let improved = nd < dist[v];
                dist[v] = nd;
                pred[v] = e;
                if improved {
                    heap.push(Reverse((nd, v)));
                }
            }
        }
    }
    Tree { dist, pred }
}

impl Tree {
    /// XOR of edge corrections from `target` back to the source.
    fn correction(&self, g: &MatchingGraph, mut target: usize, out: &mut ModeSet) {
        while self.pred[target] != usize::MAX && self.dist[target] != 0 {
            let e = &g.edges[self.pred[target]];
            out.xor_with(&e.correction);
            target = if e.a == target { e.b } else { e.a };
        }
    }
}

/// Result of matching a set of events.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Pairing {
    /// Indices into the event list; `None` means matched to the boundary.
    pub pairs: Vec<(usize, Option<usize>)>,
    pub weight: i64,
    /// XOR of the corrections along all matched paths.
    pub correction: ModeSet,
}

/// All pairwise distances between events and to the boundary.
pub struct EventDistances {
    pub pair: Vec<Vec<i64>>,
    pub boundary: Vec<i64>,
}

/// Precomputed boundary distances for a graph.
pub struct Matcher<'g> {
    pub graph: &'g MatchingGraph,
    to_boundary: Tree,
}

impl<'g> Matcher<'g> {
    pub fn new(graph: &'g MatchingGraph) -> Self {
        let to_boundary = dijkstra(graph, graph.boundary(), INF);
        Self { graph, to_boundary }
    }

    pub fn boundary_distance(&self, node: usize) -> i64 {
        self.to_boundary.dist[node]
    }

    fn trees(&self, events: &[usize]) -> Vec<Tree> {
        let max_b = events.iter().map(|&e| self.to_boundary.dist[e]).max().unwrap_or(0);
        events
            .iter()
            .map(|&e| dijkstra(self.graph, e, self.to_boundary.dist[e].saturating_add(max_b)))
            .collect()
    }

    /// Exact pairwise distances (no pruning); used for checking.
    pub fn distances(&self, events: &[usize]) -> EventDistances {
        let pair = events
            .iter()
            .map(|&e| {
                let t = dijkstra(self.graph, e, INF);
                events.iter().map(|&f| t.dist[f]).collect()
            })
            .collect();
        EventDistances { pair, boundary: events.iter().map(|&e| self.to_boundary.dist[e]).collect() }
    }

    /// Minimum-weight pairing of `events` (graph node ids, distinct) with
    /// each other or the boundary.
    pub fn mwpm(&self, events: &[usize]) -> Result<Pairing> {
        let k = events.len();
        if k == 0 {
            return Ok(Pairing::default());
        }
        let trees = self.trees(events);
        let bd: Vec<i64> = events.iter().map(|&e| self.to_boundary.dist[e]).collect();
        let mut edges = Vec::new();
        for i in 0..k {
            if bd[i] < INF {
                edges.push((i, k + i, bd[i]));
            }
            for j in i + 1..k {
                let dij = trees[i].dist[events[j]];
                if dij < INF && dij < bd[i].saturating_add(bd[j]) {
                    edges.push((i, j, dij));
                    edges.push((k + i, k + j, 0));
                }
            }
        }
        let mate = blossom::min_weight_perfect_matching(2 * k, &edges)
            .ok_or_else(|| Error::MatchingInfeasible(format!("{k} events admit no perfect matching")))?;
        let mut out = Pairing::default();
        for i in 0..k {
            let m = mate[i];
            if m == k + i {
                out.weight += bd[i];
                out.pairs.push((i, None));
                self.to_boundary.correction(self.graph, events[i], &mut out.correction);
            } else if m < k && m > i {
                out.weight += trees[i].dist[events[m]];
                out.pairs.push((i, Some(m)));
                trees[i].correction(self.graph, events[m], &mut out.correction);
            }
        }
        Ok(out)
    }
}

/// Free-standing matching on `g`.
pub fn mwpm(g: &MatchingGraph, events: &[usize]) -> Result<Pairing> {
    Matcher::new(g).mwpm(events)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeOutcome {
    pub correction: ModeSet,
    pub residual: ModeSet,
    pub syndrome_clean: bool,
    pub logical_failure: bool,
    pub matching_weight: i64,
}

/// Decoder for a fixed layout and number of rounds.
pub struct Decoder<'l> {
    layout: &'l CodeLayout,
    canon: BlueCanon,
    graph: MatchingGraph,
}

impl<'l> Decoder<'l> {
    pub fn new(layout: &'l CodeLayout, rounds: usize, params: &ErrorParams, weighting: Weighting) -> Self {
        let template = GraphTemplate::new(layout);
        Self::from_template(layout, &template, rounds, params, weighting)
    }

    pub fn from_template(
        layout: &'l CodeLayout,
        template: &GraphTemplate,
        rounds: usize,
        params: &ErrorParams,
        weighting: Weighting,
    ) -> Self {
        Self { layout, canon: BlueCanon::new(layout), graph: template.instantiate(rounds, params, weighting) }
    }

    pub fn layout(&self) -> &'l CodeLayout {
        self.layout
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    pub fn matcher(&self) -> Matcher<'_> {
        Matcher::new(&self.graph)
    }

    pub fn decode(&self, h: &SyndromeHistory) -> Result<DecodeOutcome> {
        self.decode_with(&self.matcher(), h)
    }

    /// Decode reusing a matcher (boundary distances are shared).
    pub fn decode_with(&self, matcher: &Matcher<'_>, h: &SyndromeHistory) -> Result<DecodeOutcome> {
        if h.rows() != self.graph.rows || h.n_plaquettes != self.layout.plaquettes.len() {
            return Err(Error::Config(format!(
                "history has {} rows × {} plaquettes, decoder expects {} × {}",
                h.rows(),
                h.n_plaquettes,
                self.graph.rows,
                self.layout.plaquettes.len()
            )));
        }
        let (h2, mut correction) = self.canon.apply(h);
        let events: Vec<usize> =
            self.canon.space_events(&h2).into_iter().map(|(s, r)| self.graph.node(s, r)).collect();
        let pairing = matcher.mwpm(&events)?;
        correction.xor_with(&pairing.correction);
        let frame: ModeSet = h.frame_modes().into_iter().collect();
        let residual = frame.xor(&correction);
        let dirty = self.layout.syndrome_of(&residual).len();
        if dirty > 0 {
            return Err(Error::DirtySyndrome(dirty));
        }
        Ok(DecodeOutcome {
            logical_failure: residual.len() % 2 == 1,
            correction,
            residual,
            syndrome_clean: true,
            matching_weight: pairing.weight,
        })
    }
}

/// One-off decode with probability weights at `params`.
pub fn decode(h: &SyndromeHistory, layout: &CodeLayout, params: &ErrorParams) -> Result<DecodeOutcome> {
    Decoder::new(layout, h.rounds, params, Weighting::Probability).decode(h)
}
