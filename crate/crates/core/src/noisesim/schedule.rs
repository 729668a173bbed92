use serde::Serialize;

use crate::code::{CodeLayout, Color};

/// Where a projection outcome goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Directly the plaquette's recorded outcome.
    Plaquette(usize),
    /// An intermediate `υ` slot of a measurement gadget.
    Upsilon(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Op {
    /// Prepare `i x y = 1`.
    Init { pair: [usize; 2] },
    /// Four-mode parity projection.
    Project { modes: [usize; 4], target: Target },
    /// Read `i x y` into an `η` slot.
    Measure { pair: [usize; 2], slot: usize },
    /// Combine a gadget's `υ` slots into its outcome and apply the Table I
    /// frame update for its `η` slots. Classical and noiseless.
    Finish { gadget: usize },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Step {
    pub ops: Vec<Op>,
    /// Data modes waiting during this step.
    pub idle: Vec<usize>,
}

/// Eight-mode measurement circuit for a 6- or 8-vertex plaquette.
#[derive(Clone, Debug, Serialize)]
pub struct Gadget {
    pub plaquette: usize,
    /// Frame indices of `c1..c8`; for a 6-vertex plaquette `c7, c8` are a
    /// pre-initialised virtual pair.
    pub data: [usize; 8],
    pub ancilla: [usize; 8],
    pub upsilon: [usize; 4],
    pub eta: [usize; 4],
    pub virtual_pair: bool,
}

/// One round of stabilizer measurements, in four steps:
///
/// 1. blue projections; red ancilla preparation;
/// 2. red projections; green ancilla preparation;
/// 3. red ancilla readout (and frame update), then green projections;
/// 4. green ancilla readout.
///
/// Step 4 only touches ancillas and overlaps step 1 of the next round, so
/// it carries no idle faults.
#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub n_data: usize,
    pub n_frame: usize,
    pub n_plaquettes: usize,
    pub n_upsilon: usize,
    pub n_eta: usize,
    pub steps: Vec<Step>,
    pub gadgets: Vec<Gadget>,
}

impl Schedule {
    /// Noisy primitives per round: projections, preparations, readouts and
    /// idle sites.
    pub fn primitive_count(&self) -> usize {
        self.steps
            .iter()
            .map(|s| s.idle.len() + s.ops.iter().filter(|o| !matches!(o, Op::Finish { .. })).count())
            .sum()
    }

    pub fn count_ops(&self, pred: impl Fn(&Op) -> bool) -> usize {
        self.steps.iter().flat_map(|s| &s.ops).filter(|o| pred(o)).count()
    }
}

/// Ancilla pairs prepared at the start of a gadget (0-based), `i a2a3 = …`.
pub const ANCILLA_INIT_PAIRS: [(usize, usize); 4] = [(1, 2), (3, 4), (5, 6), (7, 0)];

pub fn build_schedule(layout: &CodeLayout) -> Schedule {
    let n_data = layout.n_vertices();
    let mut n_frame = n_data;
    let mut n_upsilon = 0;
    let mut n_eta = 0;
    let mut gadgets = Vec::new();
    let mut gadget_of = vec![None; layout.plaquettes.len()];

    for p in &layout.plaquettes {
        let k = p.vertices.len();
        if k == 4 {
            continue;
        }
        assert!(k == 6 || k == 8, "plaquette {} has {} vertices", p.id, k);
        let mut data = [0; 8];
        data[..k].copy_from_slice(&p.vertices);
        if k == 6 {
            data[6] = n_frame;
            data[7] = n_frame + 1;
            n_frame += 2;
        }
        let ancilla: [usize; 8] = std::array::from_fn(|i| n_frame + i);
        n_frame += 8;
        let upsilon = std::array::from_fn(|i| n_upsilon + i);
        n_upsilon += 4;
        let eta = std::array::from_fn(|i| n_eta + i);
        n_eta += 4;
        gadget_of[p.id] = Some(gadgets.len());
        gadgets.push(Gadget { plaquette: p.id, data, ancilla, upsilon, eta, virtual_pair: k == 6 });
    }

    let inits = |g: &Gadget| {
        let mut ops: Vec<Op> =
            ANCILLA_INIT_PAIRS.iter().map(|&(x, y)| Op::Init { pair: [g.ancilla[x], g.ancilla[y]] }).collect();
        if g.virtual_pair {
            ops.push(Op::Init { pair: [g.data[6], g.data[7]] });
        }
        ops
    };
    let projections = |pid: usize| -> Vec<Op> {
        match gadget_of[pid] {
            None => {
                let v = &layout.plaquettes[pid].vertices;
                vec![Op::Project { modes: [v[0], v[1], v[2], v[3]], target: Target::Plaquette(pid) }]
            }
            Some(gi) => {
                let g: &Gadget = &gadgets[gi];
                (0..4)
                    .map(|i| Op::Project {
                        modes: [g.data[2 * i], g.data[2 * i + 1], g.ancilla[2 * i], g.ancilla[2 * i + 1]],
                        target: Target::Upsilon(g.upsilon[i]),
                    })
                    .collect()
            }
        }
    };
    let readout = |g: &Gadget, gi: usize| {
        let mut ops: Vec<Op> = crate::exactsim::ETA_PAIRS
            .iter()
            .zip(g.eta)
            .map(|(&(x, y), slot)| Op::Measure { pair: [g.ancilla[x], g.ancilla[y]], slot })
            .collect();
        ops.push(Op::Finish { gadget: gi });
        ops
    };

    let ids = |c: Color| layout.plaquettes_of(c).map(|p| p.id).collect::<Vec<_>>();
    let (blue, red, green) = (ids(Color::Blue), ids(Color::Red), ids(Color::Green));
    let gadgets_of = |ps: &[usize]| ps.iter().filter_map(|&p| gadget_of[p]).collect::<Vec<_>>();
    let (red_g, green_g) = (gadgets_of(&red), gadgets_of(&green));

    let mut steps = vec![Step::default(), Step::default(), Step::default(), Step::default()];
    steps[0].ops.extend(blue.iter().flat_map(|&p| projections(p)));
    steps[0].ops.extend(red_g.iter().flat_map(|&g| inits(&gadgets[g])));
    steps[1].ops.extend(red.iter().flat_map(|&p| projections(p)));
    steps[1].ops.extend(green_g.iter().flat_map(|&g| inits(&gadgets[g])));
    steps[2].ops.extend(red_g.iter().flat_map(|&g| readout(&gadgets[g], g)));
    steps[2].ops.extend(green.iter().flat_map(|&p| projections(p)));
    steps[3].ops.extend(green_g.iter().flat_map(|&g| readout(&gadgets[g], g)));

    for step in steps.iter_mut().take(3) {
        let mut busy = vec![false; n_data];
        for op in &step.ops {
            if let Op::Project { modes, .. } = op {
                for &m in modes {
                    if m < n_data {
                        busy[m] = true;
                    }
                }
            }
        }
        step.idle = (0..n_data).filter(|&m| !busy[m]).collect();
    }

    Schedule { n_data, n_frame, n_plaquettes: layout.plaquettes.len(), n_upsilon, n_eta, steps, gadgets }
}
