//! Circuit-level Monte Carlo with flip-frame propagation.
//!
//! The frame holds one bit per data mode, virtual mode and ancilla: whether
//! the mode carries an odd number of `[c]` flips relative to a noiseless
//! reference run. A projection reads the parity of its modes' bits, so all
//! recorded outcomes are deviations from the reference.

mod history;
mod schedule;
mod sim;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::CodeLayout;
use crate::error::{Error, Result};

pub use history::{detection_events, read_histories, write_histories, HistoryHeader, SyndromeHistory};
pub use schedule::{build_schedule, Gadget, Op, Schedule, Step, Target, ANCILLA_INIT_PAIRS};
pub use sim::{
    projection_branch, simulate_shot, FaultSource, FrameSim, InjectBeforeRound, Noiseless,
    ProjectionFault, RandomFaults, SingleFault, SiteKind, PAIRS_OF_FOUR,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    /// Probability of each elementary fault.
    pub epsilon: f64,
}

impl ErrorParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..0.2).contains(&epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [0, 0.2), got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    /// Parity-projection error rate `5ε`.
    pub fn pp_rate(&self) -> f64 {
        5.0 * self.epsilon
    }

    /// Rate giving a parity-projection error rate `pp`.
    pub fn from_pp_rate(pp: f64) -> Result<Self> {
        Self::new(pp / 5.0)
    }
}

/// One shot (index 0) of `rounds` noisy rounds plus a noiseless terminal round.
pub fn run_memory_experiment(layout: &CodeLayout, params: &ErrorParams, rounds: usize, seed: u64) -> Result<SyndromeHistory> {
    if rounds == 0 {
        return Err(Error::Config("at least one round is required".into()));
    }
    let sched = build_schedule(layout);
    let mut src = RandomFaults::new(params.epsilon, seed, 0);
    Ok(simulate_shot(&sched, rounds, &mut src))
}

/// `shots` independent shots; shot `i` draws from stream `i` of `seed`.
pub fn run_shots(sched: &Schedule, params: &ErrorParams, rounds: usize, shots: u64, seed: u64) -> Vec<SyndromeHistory> {
    (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut src = RandomFaults::new(params.epsilon, seed, i);
            simulate_shot(sched, rounds, &mut src)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_code, Color};

    #[test]
    fn noiseless_history_is_trivial() {
        let l = build_code(5).unwrap();
        let h = run_memory_experiment(&l, &ErrorParams::new(0.0).unwrap(), 5, 11).unwrap();
        assert!(h.is_trivial());
        assert!(detection_events(&h).is_empty());
    }

    #[test]
    fn primitive_counts_per_plaquette() {
        let l = build_code(9).unwrap();
        let s = build_schedule(&l);
        let blue = l.plaquettes_of(Color::Blue).count();
        let small_rg = l.plaquettes.iter().filter(|p| p.color != Color::Blue && p.vertices.len() == 4).count();
        let projections = s.count_ops(|o| matches!(o, Op::Project { .. }));
        assert_eq!(projections, blue + small_rg + 4 * s.gadgets.len());
    }

    #[test]
    fn same_seed_same_history() {
        let l = build_code(5).unwrap();
        let p = ErrorParams::new(0.01).unwrap();
        let a = run_memory_experiment(&l, &p, 5, 3).unwrap();
        let b = run_memory_experiment(&l, &p, 5, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn injected_flip_lights_its_plaquettes() {
        let l = build_code(9).unwrap();
        let s = build_schedule(&l);
        let inc = l.incidence();
        for v in [20, 30, 40] {
            let mut src = InjectBeforeRound { round: 2, modes: vec![v] };
            let h = simulate_shot(&s, 4, &mut src);
            for r in 0..5 {
                for p in 0..l.plaquettes.len() {
                    assert_eq!(h.outcome(r, p), r >= 2 && inc[v].contains(&p), "v={v} r={r} p={p}");
                }
            }
            let ev = detection_events(&h);
            assert_eq!(ev.len(), inc[v].len());
            assert!(ev.iter().all(|&(_, r)| r == 2));
        }
    }

    #[test]
    fn params_range() {
        assert!(ErrorParams::new(-0.1).is_err());
        assert!(ErrorParams::new(0.2).is_err());
        assert!((ErrorParams::from_pp_rate(0.01).unwrap().epsilon - 0.002).abs() < 1e-15);
    }
}
