//! Y-state distillation and duplication on two four-mode copies.
//!
//! Modes are `a1 b1 c1 d1 a2 b2 c2 d2` (0–7). A copy is correct when
//! `i a_j c_j = 1` and sits in `a_j b_j c_j d_j = 1`. The circuit exchanges
//! `b1↔b2`, `d1↔d2` and projects both four-mode parities; it accepts when both
//! read `+1`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{exchange, CMat, ModeSpace, PauliOp};
use crate::report::Report;

const A1: usize = 0;
const B1: usize = 1;
const C1: usize = 2;
const D1: usize = 3;
const A2: usize = 4;
const B2: usize = 5;
const C2: usize = 6;
const D2: usize = 7;

/// Conditional output error after one round.
pub fn distillation_error_formula(p: f64) -> f64 {
    p * p / (1.0 - 2.0 * p + 2.0 * p * p)
}

/// Pure state fixed by a complete set of commuting `(operator, eigenvalue)` constraints.
fn stabilized_state(space: &ModeSpace, constraints: &[(PauliOp, f64)]) -> Vec<Complex64> {
    let d = space.dim();
    for k in 0..d {
        let mut m = CMat::zeros(d, 1);
        m[(k, 0)] = super::ONE;
        for (op, eta) in constraints {
            m = op.project_cols(&m, *eta);
        }
        let n = m.norm();
        if n > 1e-6 {
            return m.column(0).iter().map(|z| z / n).collect();
        }
    }
    panic!("constraints are inconsistent")
}

fn apply_dense(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    let col = CMat::from_column_slice(v.len(), 1, v);
    (m * col).column(0).iter().copied().collect()
}

fn project(op: &PauliOp, eta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let pv = op.apply(v);
    v.iter().zip(pv).map(|(a, b)| (a + b * eta) * 0.5).collect()
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// One outcome branch of the circuit.
#[derive(Clone, Debug, Serialize)]
pub struct Branch {
    pub outcomes: (i8, i8),
    pub probability: f64,
    /// `⟨i a1 c1⟩, ⟨i a2 c2⟩, ⟨a1b1c1d1⟩, ⟨a2b2c2d2⟩` after the projections.
    pub observables: [f64; 4],
}

struct Circuit {
    space: ModeSpace,
    exchange: CMat,
    parity1: PauliOp,
    parity2: PauliOp,
    iac1: PauliOp,
    iac2: PauliOp,
}

impl Circuit {
    fn new() -> Self {
        let space = ModeSpace::new(8).expect("8 modes");
        let ex = exchange(&space.dense(B1), &space.dense(B2)) * exchange(&space.dense(D1), &space.dense(D2));
        Self {
            parity1: space.product(&[A1, B1, C1, D1]),
            parity2: space.product(&[A2, B2, C2, D2]),
            iac1: space.ipair(A1, C1),
            iac2: space.ipair(A2, C2),
            exchange: ex,
            space,
        }
    }

    fn y_copy(&self, flipped: bool, second: bool) -> [(PauliOp, f64); 2] {
        let (parity, iac) = if second { (&self.parity2, &self.iac2) } else { (&self.parity1, &self.iac1) };
        [(parity.clone(), 1.0), (iac.clone(), if flipped { -1.0 } else { 1.0 })]
    }

    fn observables(&self, v: &[Complex64]) -> [f64; 4] {
        [&self.iac1, &self.iac2, &self.parity1, &self.parity2].map(|op| op.expectation(v).re)
    }

    fn run(&self, input: &[Complex64]) -> Vec<(Branch, Vec<Complex64>)> {
        let psi = apply_dense(&self.exchange, input);
        let mut out = Vec::new();
        for e1 in [1i8, -1] {
            for e2 in [1i8, -1] {
                let phi = project(&self.parity2, e2 as f64, &project(&self.parity1, e1 as f64, &psi));
                let prob = norm2(&phi);
                if prob < 1e-12 {
                    continue;
                }
                let phi: Vec<Complex64> = phi.iter().map(|z| z / prob.sqrt()).collect();
                out.push((
                    Branch { outcomes: (e1, e2), probability: prob, observables: self.observables(&phi) },
                    phi,
                ));
            }
        }
        out
    }

    /// Branches for copies with the given flips.
    fn distill(&self, f1: bool, f2: bool) -> Vec<Branch> {
        let mut cons = self.y_copy(f1, false).to_vec();
        cons.extend(self.y_copy(f2, true));
        let psi = stabilized_state(&self.space, &cons);
        self.run(&psi).into_iter().map(|(b, _)| b).collect()
    }
}

/// Exact acceptance probability and conditional error at flip rate `p`.
fn exact_stats(c: &Circuit, p: f64) -> (f64, f64) {
    let mut accept = 0.0;
    let mut bad = 0.0;
    for (f1, f2) in [(false, false), (true, false), (false, true), (true, true)] {
        let w = (if f1 { p } else { 1.0 - p }) * (if f2 { p } else { 1.0 - p });
        for b in c.distill(f1, f2) {
            if b.outcomes == (1, 1) {
                accept += w * b.probability;
                if b.observables[0] < 0.0 {
                    bad += w * b.probability;
                }
            }
        }
    }
    (accept, if accept > 0.0 { bad / accept } else { 0.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistillationStats {
    pub p: f64,
    pub trials: u64,
    pub accepted: u64,
    pub errors: u64,
}

impl DistillationStats {
    pub fn conditional_error(&self) -> f64 {
        self.errors as f64 / self.accepted.max(1) as f64
    }
}

/// Monte Carlo over flip patterns and measurement outcomes until `accepted`
/// rounds pass. Outcome probabilities come from the exact simulation.
pub fn sample_distillation(p: f64, accepted: u64, seed: u64) -> DistillationStats {
    let c = Circuit::new();
    let table: Vec<Vec<Branch>> =
        [(false, false), (true, false), (false, true), (true, true)].iter().map(|&(a, b)| c.distill(a, b)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = DistillationStats { p, trials: 0, accepted: 0, errors: 0 };
    while stats.accepted < accepted {
        stats.trials += 1;
        let f1 = rng.gen_bool(p);
        let f2 = rng.gen_bool(p);
        let branches = &table[f1 as usize + 2 * f2 as usize];
        let mut x: f64 = rng.gen();
        let mut pick = &branches[branches.len() - 1];
        for b in branches {
            if x < b.probability {
                pick = b;
                break;
            }
            x -= b.probability;
        }
        if pick.outcomes == (1, 1) {
            stats.accepted += 1;
            if pick.observables[0] < 0.0 {
                stats.errors += 1;
            }
        }
    }
    stats
}

pub fn verify_distillation() -> Report {
    let tol = 1e-9;
    let mut r = Report::new("Y-state distillation");
    let c = Circuit::new();

    let (acc0, err0) = exact_stats(&c, 0.0);
    r.below("p = 0: acceptance 1", (acc0 - 1.0).abs(), tol);
    r.below("p = 0: output error 0", err0, tol);
    for p in [0.01, 0.05, 0.1, 0.2, 0.3] {
        let (_, err) = exact_stats(&c, p);
        r.below(format!("p = {p}: error = p²/(1-2p+2p²)"), (err - distillation_error_formula(p)).abs(), tol);
    }

    let single = c.distill(true, false);
    let both_minus = single.iter().all(|b| b.outcomes == (-1, -1));
    r.check("one flipped copy: both parities read -1", both_minus, format!("{} branch(es)", single.len()));

    let mc = sample_distillation(0.1, 100_000, 2019);
    let target = distillation_error_formula(0.1);
    r.below(
        format!("Monte Carlo p = 0.1 ({} accepted) vs {target:.6}", mc.accepted),
        (mc.conditional_error() - target).abs(),
        1e-3,
    );

    // Duplication: copy 2 enters with i a2 b2 = 1, i c2 d2 = -1.
    let s = &c.space;
    let mut cons = c.y_copy(false, false).to_vec();
    cons.push((s.ipair(A2, B2), 1.0));
    cons.push((s.ipair(C2, D2), -1.0));
    let psi = stabilized_state(s, &cons);
    let fix = s.product(&[B1, C2]);
    for (b, phi) in c.run(&psi) {
        let out = if b.outcomes == (1, 1) { phi } else { fix.apply(&phi) };
        let obs = c.observables(&out);
        let err = obs.iter().map(|o| (o - 1.0).abs()).fold(0.0, f64::max);
        let label = if b.outcomes == (1, 1) {
            "duplication (+,+): two Y states".to_string()
        } else {
            format!("duplication {:?} with [b1 c2]: two Y states", b.outcomes)
        };
        r.below(label, err, tol);
    }
    r
}
