//! Flip-frame execution of a [`Schedule`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::history::SyndromeHistory;
use super::schedule::{Op, Schedule, Target};
use crate::exactsim::table_one_correction;

/// Pairs `(i, j)` of a four-mode projection, in the order used for sampling.
pub const PAIRS_OF_FOUR: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// What went wrong in one noisy projection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ProjectionFault {
    pub outcome_flip: bool,
    /// `None`, one mode `[i]`, or the pair index into [`PAIRS_OF_FOUR`] + 4.
    pub state: Option<u8>,
}

impl ProjectionFault {
    /// Bitmask over the four projected modes.
    pub fn state_mask(&self) -> u8 {
        match self.state {
            None => 0,
            Some(i) if i < 4 => 1 << i,
            Some(k) => {
                let (i, j) = PAIRS_OF_FOUR[(k - 4) as usize];
                (1 << i) | (1 << j)
            }
        }
    }

    pub fn is_none(&self) -> bool {
        !self.outcome_flip && self.state.is_none()
    }

    /// All eleven non-trivial faults with their probabilities relative to `ε`.
    pub fn all_nontrivial() -> Vec<(ProjectionFault, f64)> {
        let mut v = Vec::new();
        for flip in [false, true] {
            if flip {
                v.push((ProjectionFault { outcome_flip: true, state: None }, 1.0));
            }
            for i in 0..4 {
                v.push((ProjectionFault { outcome_flip: flip, state: Some(i) }, 0.25));
            }
            for k in 0..6 {
                v.push((ProjectionFault { outcome_flip: flip, state: Some(4 + k) }, 1.0 / 6.0));
            }
        }
        v
    }
}

/// Source of faults for each noisy primitive, called in schedule order.
/// `site` counts primitives of that kind since the start of the shot.
pub trait FaultSource {
    fn projection(&mut self, site: usize) -> ProjectionFault;
    fn init(&mut self, site: usize) -> bool;
    fn measure(&mut self, site: usize) -> bool;
    fn idle(&mut self, site: usize) -> bool;
    /// Hook to flip frame bits directly before a noisy round.
    fn before_round(&mut self, _round: usize, _frame: &mut [bool]) {}
}

/// No faults at all.
pub struct Noiseless;

impl FaultSource for Noiseless {
    fn projection(&mut self, _: usize) -> ProjectionFault {
        ProjectionFault::default()
    }
    fn init(&mut self, _: usize) -> bool {
        false
    }
    fn measure(&mut self, _: usize) -> bool {
        false
    }
    fn idle(&mut self, _: usize) -> bool {
        false
    }
}

/// Independent faults at rate `ε`, sampled from a per-shot stream.
pub struct RandomFaults {
    rng: ChaCha8Rng,
    eps: f64,
}

impl RandomFaults {
    pub fn new(eps: f64, seed: u64, shot: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        Self { rng, eps }
    }
}

/// Map a uniform draw onto the six branches of the noisy projection:
/// `[0, 1−5ε)` no error, then five intervals of width `ε` (single flip, pair
/// flip, false outcome, false outcome + single, false outcome + pair), each
/// split uniformly among its members.
pub fn projection_branch(r: f64, eps: f64) -> ProjectionFault {
    let clean = 1.0 - 5.0 * eps;
    if r < clean || eps <= 0.0 {
        return ProjectionFault::default();
    }
    let x = (r - clean) / eps;
    let b = (x.floor() as usize).min(4);
    let u = (x - b as f64).clamp(0.0, 1.0 - f64::EPSILON);
    let single = || Some((u * 4.0) as u8);
    let pair = || Some(4 + (u * 6.0) as u8);
    match b {
        0 => ProjectionFault { outcome_flip: false, state: single() },
        1 => ProjectionFault { outcome_flip: false, state: pair() },
        2 => ProjectionFault { outcome_flip: true, state: None },
        3 => ProjectionFault { outcome_flip: true, state: single() },
        _ => ProjectionFault { outcome_flip: true, state: pair() },
    }
}

impl FaultSource for RandomFaults {
    fn projection(&mut self, _: usize) -> ProjectionFault {
        projection_branch(self.rng.gen(), self.eps)
    }
    fn init(&mut self, _: usize) -> bool {
        self.rng.gen::<f64>() < self.eps
    }
    fn measure(&mut self, _: usize) -> bool {
        self.rng.gen::<f64>() < self.eps
    }
    fn idle(&mut self, _: usize) -> bool {
        self.rng.gen::<f64>() < self.eps
    }
}

/// Kind of an elementary fault location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Projection,
    Init,
    Measure,
    Idle,
}

/// Exactly one fault at a chosen site; everything else is clean.
#[derive(Clone, Copy, Debug)]
pub struct SingleFault {
    pub kind: SiteKind,
    pub site: usize,
    pub projection: ProjectionFault,
}

impl FaultSource for SingleFault {
    fn projection(&mut self, site: usize) -> ProjectionFault {
        if self.kind == SiteKind::Projection && self.site == site {
            self.projection
        } else {
            ProjectionFault::default()
        }
    }
    fn init(&mut self, site: usize) -> bool {
        self.kind == SiteKind::Init && self.site == site
    }
    fn measure(&mut self, site: usize) -> bool {
        self.kind == SiteKind::Measure && self.site == site
    }
    fn idle(&mut self, site: usize) -> bool {
        self.kind == SiteKind::Idle && self.site == site
    }
}

/// Flips given data modes right before a chosen round.
pub struct InjectBeforeRound {
    pub round: usize,
    pub modes: Vec<usize>,
}

impl FaultSource for InjectBeforeRound {
    fn projection(&mut self, _: usize) -> ProjectionFault {
        ProjectionFault::default()
    }
    fn init(&mut self, _: usize) -> bool {
        false
    }
    fn measure(&mut self, _: usize) -> bool {
        false
    }
    fn idle(&mut self, _: usize) -> bool {
        false
    }
    fn before_round(&mut self, round: usize, frame: &mut [bool]) {
        if round == self.round {
            for &m in &self.modes {
                frame[m] ^= true;
            }
        }
    }
}

#[derive(Default)]
struct Counters {
    projection: usize,
    init: usize,
    measure: usize,
    idle: usize,
}

impl Counters {
    fn total(&self) -> usize {
        self.projection + self.init + self.measure + self.idle
    }
}

/// Per-shot simulator state.
pub struct FrameSim<'a> {
    sched: &'a Schedule,
    pub frame: Vec<bool>,
    upsilon: Vec<bool>,
    eta: Vec<bool>,
    counters: Counters,
}

impl<'a> FrameSim<'a> {
    pub fn new(sched: &'a Schedule) -> Self {
        Self {
            sched,
            frame: vec![false; sched.n_frame],
            upsilon: vec![false; sched.n_upsilon],
            eta: vec![false; sched.n_eta],
            counters: Counters::default(),
        }
    }

    /// Number of fault sites visited so far, by kind.
    pub fn site_counts(&self) -> [(SiteKind, usize); 4] {
        [
            (SiteKind::Projection, self.counters.projection),
            (SiteKind::Init, self.counters.init),
            (SiteKind::Measure, self.counters.measure),
            (SiteKind::Idle, self.counters.idle),
        ]
    }

    pub fn total_sites(&self) -> usize {
        self.counters.total()
    }

    /// Run one round, writing recorded outcome bits into `out`.
    pub fn round<F: FaultSource + ?Sized>(&mut self, faults: &mut F, noisy: bool, out: &mut [bool]) {
        let sched = self.sched;
        for step in &sched.steps {
            for op in &step.ops {
                self.op(op, faults, noisy, out);
            }
            if noisy {
                for &m in &step.idle {
                    let site = self.counters.idle;
                    self.counters.idle += 1;
                    if faults.idle(site) {
                        self.frame[m] ^= true;
                    }
                }
            }
        }
    }

    fn op<F: FaultSource + ?Sized>(&mut self, op: &Op, faults: &mut F, noisy: bool, out: &mut [bool]) {
        match *op {
            Op::Init { pair } => {
                self.frame[pair[0]] = false;
                self.frame[pair[1]] = false;
                if noisy {
                    let site = self.counters.init;
                    self.counters.init += 1;
                    if faults.init(site) {
                        self.frame[pair[0]] = true;
                    }
                }
            }
            Op::Project { modes, target } => {
                let mut bit = modes.iter().fold(false, |acc, &m| acc ^ self.frame[m]);
                if noisy {
                    let site = self.counters.projection;
                    self.counters.projection += 1;
                    let f = faults.projection(site);
                    bit ^= f.outcome_flip;
                    let mask = f.state_mask();
                    for (k, &m) in modes.iter().enumerate() {
                        if mask >> k & 1 == 1 {
                            self.frame[m] ^= true;
                        }
                    }
                }
                match target {
                    Target::Plaquette(p) => out[p] = bit,
                    Target::Upsilon(s) => self.upsilon[s] = bit,
                }
            }
            Op::Measure { pair, slot } => {
                let mut bit = self.frame[pair[0]] ^ self.frame[pair[1]];
                if noisy {
                    let site = self.counters.measure;
                    self.counters.measure += 1;
                    bit ^= faults.measure(site);
                }
                self.eta[slot] = bit;
            }
            Op::Finish { gadget } => {
                let g = &self.sched.gadgets[gadget];
                out[g.plaquette] = g.upsilon.iter().fold(false, |acc, &s| acc ^ self.upsilon[s]);
                let mut delta = g.eta.map(|s| self.eta[s]);
                if delta.iter().filter(|&&b| b).count() % 2 == 1 {
                    // Odd patterns only arise from faults; treat the middle
                    // pair as the misread one.
                    delta[2] ^= true;
                }
                let pattern = delta.map(|b| if b { -1i8 } else { 1 });
                let fix = table_one_correction(pattern).expect("even pattern");
                for &k in fix {
                    self.frame[g.data[k]] ^= true;
                }
            }
        }
    }
}

/// One shot: `rounds` noisy rounds plus a noiseless terminal round.
pub fn simulate_shot<F: FaultSource + ?Sized>(
    sched: &Schedule,
    rounds: usize,
    faults: &mut F,
) -> SyndromeHistory {
    let n = sched.n_plaquettes;
    let mut sim = FrameSim::new(sched);
    let mut outcomes = vec![false; (rounds + 1) * n];
    for r in 0..=rounds {
        let noisy = r < rounds;
        if noisy {
            faults.before_round(r, &mut sim.frame);
        }
        sim.round(faults, noisy, &mut outcomes[r * n..(r + 1) * n]);
    }
    SyndromeHistory {
        n_plaquettes: n,
        rounds,
        outcomes,
        frame: sim.frame[..sched.n_data].to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_partition() {
        let eps = 0.01;
        assert!(projection_branch(0.0, eps).is_none());
        assert!(projection_branch(0.9499, eps).is_none());
        let f = projection_branch(0.951, eps);
        assert_eq!(f, ProjectionFault { outcome_flip: false, state: Some(0) });
        let f = projection_branch(0.9999999, eps);
        assert!(f.outcome_flip && f.state.unwrap() >= 4);
        let f = projection_branch(0.975, eps);
        assert_eq!(f, ProjectionFault { outcome_flip: true, state: None });
    }

    #[test]
    fn relative_weights_sum_to_five() {
        let s: f64 = ProjectionFault::all_nontrivial().iter().map(|(_, w)| w).sum();
        assert!((s - 5.0).abs() < 1e-12);
    }
}
