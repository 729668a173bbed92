//! Space-time matching graph whose edges come from single-fault enumeration.
//!
//! Every elementary fault of one round is pushed through the schedule on
//! its own; after the blue step, its red/green detection events either form
//! a pair (an edge), a single event (an edge to the boundary) or a larger
//! cluster, which is split into known edges. Edge probabilities add up
//! XOR-wise over all faults mapping onto them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BlueCanon;
use crate::algebra::ModeSet;
use crate::code::CodeLayout;
use crate::noisesim::{
    build_schedule, ErrorParams, FrameSim, Noiseless, ProjectionFault, Schedule, SingleFault, SiteKind, SyndromeHistory,
};

/// How edge weights are assigned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// `−ln p` of the aggregated first-order edge probability.
    #[default]
    Probability,
    /// Every edge costs the same.
    Unit,
}

impl std::str::FromStr for Weighting {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "probability" | "prob" => Ok(Self::Probability),
            "unit" => Ok(Self::Unit),
            _ => Err(format!("unknown weighting '{s}' (expected 'probability' or 'unit')")),
        }
    }
}

/// Fixed-point scale applied to `−ln p` before matching.
pub const WEIGHT_SCALE: f64 = 1000.0;

/// Relative rate (in units of `ε`) assigned to a data-mode flip between two
/// rounds.
pub const BETWEEN_ROUNDS_RATE: f64 = 1.0;

/// Endpoint of a template edge: a space node and a row offset relative to
/// the round of the fault, or the boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    Node { node: usize, dt: usize },
    Boundary,
}

/// One class of faults that all produce the same events.
#[derive(Clone, Debug)]
pub struct FaultClass {
    pub ends: (End, End),
    /// Probability in units of `ε` (first order).
    pub rate: f64,
    /// Data-mode flips left after the blue step.
    pub correction: ModeSet,
}

/// Outcome of enumerating all single faults of one round.
#[derive(Clone, Debug, Default)]
pub struct FaultTable {
    pub classes: Vec<FaultClass>,
    /// Faults with no events and no effect.
    pub silent: usize,
    /// Faults with more than two events that were split into known classes.
    pub split: usize,
    /// Faults that could not be split consistently (dropped).
    pub unsplit: usize,
    /// Undetectable faults that flip the logical operator (must be 0).
    pub undetected_logical: usize,
}

fn classify(ev: &[(usize, usize)]) -> Option<(End, End)> {
    match ev {
        [] => None,
        [(a, ra)] => Some((End::Node { node: *a, dt: *ra }, End::Boundary)),
        [(a, ra), (b, rb)] => {
            let x = End::Node { node: *a, dt: *ra };
            let y = End::Node { node: *b, dt: *rb };
            Some(if x <= y { (x, y) } else { (y, x) })
        }
        _ => None,
    }
}

/// Enumerate single faults of one round through `sched`.
pub(crate) fn enumerate_faults(layout: &CodeLayout, sched: &Schedule, canon: &BlueCanon) -> FaultTable {
    let n = sched.n_plaquettes;
    let rows = 3;
    let mut probe = FrameSim::new(sched);
    let mut scratch = vec![false; n];
    probe.round(&mut Noiseless, true, &mut scratch);
    let counts = probe.site_counts();

    // `None` stands for a flip of one data mode between rounds. The schedule
    // has no fault site there, but such errors must stay decodable.
    let mut faults: Vec<(Option<SingleFault>, usize, f64)> = Vec::new();
    for (kind, count) in counts {
        for site in 0..count {
            if kind == SiteKind::Projection {
                for (pf, w) in ProjectionFault::all_nontrivial() {
                    faults.push((Some(SingleFault { kind, site, projection: pf }), 0, w));
                }
            } else {
                faults.push((Some(SingleFault { kind, site, projection: ProjectionFault::default() }), 0, 1.0));
            }
        }
    }
    faults.extend((0..sched.n_data).map(|m| (None, m, BETWEEN_ROUNDS_RATE)));

    // Key: ends + correction parity. Value: (rate, correction).
    let mut classes: BTreeMap<(End, End, bool), (f64, ModeSet)> = BTreeMap::new();
    let mut clusters: Vec<(Vec<(usize, usize)>, ModeSet, f64)> = Vec::new();
    let mut table = FaultTable::default();

    for (fault, mode, w) in faults {
        let mut sim = FrameSim::new(sched);
        let mut outcomes = vec![false; rows * n];
        match fault {
            Some(mut f) => {
                for r in 0..rows {
                    sim.round(&mut f, r == 0, &mut outcomes[r * n..(r + 1) * n]);
                }
            }
            None => {
                sim.frame[mode] = true;
                for r in 0..rows {
                    sim.round(&mut Noiseless, false, &mut outcomes[r * n..(r + 1) * n]);
                }
            }
        }
        let h = SyndromeHistory { n_plaquettes: n, rounds: rows - 1, outcomes, frame: sim.frame[..sched.n_data].to_vec() };
        let (h2, blue_fix) = canon.apply(&h);
        let mut frame: ModeSet = h2.frame_modes().into_iter().collect();
        frame.xor_with(&blue_fix);
        let ev = canon.space_events(&h2);
        match ev.len() {
            0 => {
                if frame.len() % 2 == 1 {
                    table.undetected_logical += 1;
                } else {
                    table.silent += 1;
                }
            }
            1 | 2 => {
                let (a, b) = classify(&ev).expect("one or two events");
                debug_assert_eq!(canon.space_syndrome(layout, &frame), canon.space_parity(&ev));
                let e = classes.entry((a, b, frame.len() % 2 == 1)).or_insert((0.0, frame.clone()));
                e.0 += w;
            }
            _ => clusters.push((ev, frame, w)),
        }
    }

    // Split clusters into pairs/singletons that already exist.
    for (ev, frame, w) in clusters {
        match split_cluster(&ev, &frame, &classes, canon, layout) {
            Some(parts) => {
                table.split += 1;
                for (a, b, corr) in parts {
                    let key = (a, b, corr.len() % 2 == 1);
                    let e = classes.entry(key).or_insert((0.0, corr));
                    e.0 += w;
                }
            }
            None => table.unsplit += 1,
        }
    }

    table.classes = classes
        .into_iter()
        .map(|((a, b, _), (rate, correction))| FaultClass { ends: (a, b), rate, correction })
        .collect();
    table
}

type Part = (End, End, ModeSet);
type Known = BTreeMap<(End, End, bool), (f64, ModeSet)>;

fn ordered(a: End, b: End) -> (End, End) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All ways to split `ev` into pairs plus, for odd sizes, one singleton
/// matched to the boundary.
fn pairings(ev: &[(usize, usize)]) -> Vec<Vec<(End, End)>> {
    fn rec(rest: &[End], odd_left: bool, cur: &mut Vec<(End, End)>, out: &mut Vec<Vec<(End, End)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(cur.clone());
            return;
        };
        if odd_left {
            cur.push((first, End::Boundary));
            rec(tail, false, cur, out);
            cur.pop();
        }
        for k in 0..tail.len() {
            let mut others = tail.to_vec();
            let second = others.remove(k);
            cur.push(ordered(first, second));
            rec(&others, odd_left, cur, out);
            cur.pop();
        }
    }
    let ends: Vec<End> = ev.iter().map(|&(s, r)| End::Node { node: s, dt: r }).collect();
    let mut out = Vec::new();
    rec(&ends, ends.len() % 2 == 1, &mut Vec::new(), &mut out);
    out
}

/// Split a multi-event fault into parts that multiply back to `frame` up to
/// stabilizers. Decompositions made only of elementary edges are preferred
/// (most likely first); failing that, one part may be new and takes the
/// leftover correction, preferring the shortest such part.
fn split_cluster(
    ev: &[(usize, usize)],
    frame: &ModeSet,
    known: &Known,
    canon: &BlueCanon,
    layout: &CodeLayout,
) -> Option<Vec<Part>> {
    if ev.len() > 8 {
        return None;
    }
    let mut best_known: Option<(f64, Vec<Part>)> = None;
    let mut best_new: Option<(usize, Vec<Part>)> = None;
    for pairing in pairings(ev) {
        let options: Vec<Vec<&ModeSet>> = pairing
            .iter()
            .map(|&(a, b)| [false, true].iter().filter_map(|&par| known.get(&(a, b, par)).map(|v| &v.1)).collect())
            .collect();
        let missing: Vec<usize> = (0..pairing.len()).filter(|&i| options[i].is_empty()).collect();
        if missing.len() > 1 {
            continue;
        }
        // Walk every combination of parity choices.
        let sizes: Vec<usize> = options.iter().map(|o| o.len().max(1)).collect();
        let total: usize = sizes.iter().product();
        for combo in 0..total {
            let mut c = combo;
            let mut acc = ModeSet::new();
            let mut score = 0.0;
            let mut chosen: Vec<Option<ModeSet>> = Vec::with_capacity(pairing.len());
            for (i, opts) in options.iter().enumerate() {
                let pick = c % sizes[i];
                c /= sizes[i];
                match opts.get(pick) {
                    Some(corr) => {
                        acc.xor_with(corr);
                        let key = (pairing[i].0, pairing[i].1, corr.len() % 2 == 1);
                        score += known[&key].0.ln();
                        chosen.push(Some((*corr).clone()));
                    }
                    None => chosen.push(None),
                }
            }
            let rest = acc.xor(frame);
            let parts = |fill: &ModeSet| -> Vec<Part> {
                pairing
                    .iter()
                    .zip(&chosen)
                    .map(|(&(a, b), c)| (a, b, c.clone().unwrap_or_else(|| fill.clone())))
                    .collect()
            };
            if missing.is_empty() {
                let equivalent = rest.len().is_multiple_of(2) && layout.syndrome_of(&rest).is_empty();
                if equivalent && best_known.as_ref().is_none_or(|(s, _)| score > *s) {
                    best_known = Some((score, parts(&ModeSet::new())));
                }
            } else {
                let (a, b) = pairing[missing[0]];
                let span = match (a, b) {
                    (End::Node { node: x, dt: s }, End::Node { node: y, dt: t }) => {
                        s.abs_diff(t) + usize::from(x != y) + 2 * canon.space_syndrome(layout, &rest).len()
                    }
                    _ => 1 + rest.len(),
                };
                if best_new.as_ref().is_none_or(|(s, _)| span < *s) {
                    best_new = Some((span, parts(&rest)));
                }
            }
        }
    }
    best_known.map(|b| b.1).or(best_new.map(|b| b.1))
}

/// Space-time graph for a fixed number of rounds.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    /// Red and green plaquettes, in layout order.
    pub n_space: usize,
    /// Rows of detection events (noisy rounds + terminal round).
    pub rows: usize,
    pub edges: Vec<GraphEdge>,
    pub adjacency: Vec<Vec<(usize, usize)>>,
    pub weighting: Weighting,
}

#[derive(Clone, Debug)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub probability: f64,
    pub weight: i64,
    pub correction: ModeSet,
}

impl MatchingGraph {
    pub fn boundary(&self) -> usize {
        self.n_space * self.rows
    }

    pub fn n_nodes(&self) -> usize {
        self.n_space * self.rows + 1
    }

    pub fn node(&self, space: usize, row: usize) -> usize {
        row * self.n_space + space
    }

    /// Edges between two events of the same space node in consecutive rows.
    pub fn is_time_edge(&self, e: &GraphEdge) -> bool {
        e.b != self.boundary() && e.a % self.n_space == e.b % self.n_space
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = &GraphEdge> {
        let bd = self.boundary();
        self.edges.iter().filter(move |e| e.b == bd)
    }
}

/// Fault table plus the structures needed to instantiate graphs.
#[derive(Clone, Debug)]
pub struct GraphTemplate {
    pub table: FaultTable,
    pub n_space: usize,
}

impl GraphTemplate {
    pub fn new(layout: &CodeLayout) -> Self {
        let sched = build_schedule(layout);
        let canon = BlueCanon::new(layout);
        let table = enumerate_faults(layout, &sched, &canon);
        Self { table, n_space: canon.n_space() }
    }

    /// Instantiate for `rounds` noisy rounds at fault rate `params`.
    pub fn instantiate(&self, rounds: usize, params: &ErrorParams, weighting: Weighting) -> MatchingGraph {
        let rows = rounds + 1;
        let n_space = self.n_space;
        let boundary = n_space * rows;
        let eps = params.epsilon;
        let mut merged: BTreeMap<(usize, usize, bool), (f64, ModeSet)> = BTreeMap::new();
        for f in 0..rounds {
            for c in &self.table.classes {
                let at = |e: End| match e {
                    End::Node { node, dt } => (f + dt < rows).then_some((f + dt) * n_space + node),
                    End::Boundary => Some(boundary),
                };
                let (Some(a), Some(b)) = (at(c.ends.0), at(c.ends.1)) else { continue };
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                let p = (c.rate * eps).min(0.5);
                let e = merged.entry((a, b, c.correction.len() % 2 == 1)).or_insert((0.0, c.correction.clone()));
                e.0 = e.0 * (1.0 - p) + p * (1.0 - e.0);
            }
        }
        // Parallel edges differing in correction parity are both kept: near a
        // corner they are the two sides of a logical operator.
        let mut edges = Vec::with_capacity(merged.len());
        let mut adjacency = vec![Vec::new(); boundary + 1];
        for ((a, b, _), (p, correction)) in merged {
            let weight = match weighting {
                Weighting::Unit => WEIGHT_SCALE as i64,
                Weighting::Probability => {
                    let p = if p > 0.0 { p } else { f64::MIN_POSITIVE };
                    ((-p.ln()) * WEIGHT_SCALE).round().max(1.0) as i64
                }
            };
            let id = edges.len();
            adjacency[a].push((b, id));
            adjacency[b].push((a, id));
            edges.push(GraphEdge { a, b, probability: p, weight, correction });
        }
        MatchingGraph { n_space, rows, edges, adjacency, weighting }
    }
}

/// Build the matching graph for `rounds` noisy rounds.
pub fn build_matching_graph(layout: &CodeLayout, rounds: usize, params: &ErrorParams, weighting: Weighting) -> MatchingGraph {
    GraphTemplate::new(layout).instantiate(rounds, params, weighting)
}
