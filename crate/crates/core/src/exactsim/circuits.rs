//! Exchange, phase, state-transfer and T-gate identities.

use num_complex::Complex64;

use super::{
    exchange, init, ipair, phase_distance, projector, t_gate, transfer, CMat, Channel, MaxAbs,
    ModeSpace,
};
use crate::report::Report;

const TOL: f64 = 1e-9;

fn conj(u: &CMat, x: &CMat) -> CMat {
    u * x * u.adjoint()
}

pub fn verify_exchange_and_phase() -> Report {
    let mut r = Report::new("exchange and phase gates");
    let s8 = ModeSpace::new(8).expect("8 modes");
    r.below("{c_i, c_j} = 2δ_ij (8 modes)", s8.clifford_error(), TOL);

    let s = ModeSpace::new(4).expect("4 modes");
    let (a, b) = (s.dense(0), s.dense(1));
    let rab = exchange(&a, &b);
    let sab = &a * &b;
    r.below("R a R† = -b", (conj(&rab, &a) + &b).max_abs(), TOL);
    r.below("R b R† = a", (conj(&rab, &b) - &a).max_abs(), TOL);
    r.below("R R† = 1", (&rab * rab.adjoint() - CMat::identity(4, 4)).max_abs(), TOL);
    r.below("R² = S up to phase", phase_distance(&(&rab * &rab), &sab), TOL);
    r.below("S a S† = -a", (conj(&sab, &a) + &a).max_abs(), TOL);
    r.below("S b S† = -b", (conj(&sab, &b) + &b).max_abs(), TOL);
    let s2 = Channel::unitary(&sab * &sab);
    r.below("[S²] = identity channel", s2.distance(&Channel::identity(4)), TOL);
    r
}

/// The four-mode qubit encoding and the two magic states written in it.
pub fn verify_qubit_encoding() -> Report {
    let mut r = Report::new("four-mode qubit encoding");
    let s = ModeSpace::new(4).expect("4 modes");
    let c: Vec<CMat> = (0..4).map(|i| s.dense(i)).collect();
    let code = projector(&(&c[0] * &c[1] * &c[2] * &c[3]), 1.0);
    let sx = ipair(&c[0], &c[3]);
    let sz = ipair(&c[2], &c[3]);
    let sy = &sx * &sz * super::I;
    let on_code = |m: CMat| &code * m * &code;
    r.below("σx² = 1", (on_code(&sx * &sx) - &code).max_abs(), TOL);
    r.below("σz² = 1", (on_code(&sz * &sz) - &code).max_abs(), TOL);
    r.below("σxσz = -σzσx", on_code(&sx * &sz + &sz * &sx).max_abs(), TOL);
    r.below("σx commutes with parity", (&sx * &code - &code * &sx).max_abs(), TOL);

    let bloch = |proj: CMat| -> [f64; 3] {
        let rho = &proj / proj.trace();
        [&sx, &sy, &sz].map(|p| (p * &rho).trace().re)
    };

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cp = (&c[0] + &c[1]) * Complex64::new(h, 0.0);
    let cm = (&c[0] - &c[1]) * Complex64::new(h, 0.0);
    let a_state = &code * projector(&ipair(&cp, &c[3]), 1.0) * projector(&ipair(&cm, &c[2]), 1.0);
    let got = bloch(a_state);
    let want = [h, h, 0.0];
    let err = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    r.below("A state = (|0⟩ + e^{iπ/4}|1⟩)/√2", err, TOL);

    let y_state = &code * projector(&ipair(&c[0], &c[2]), 1.0);
    let got = bloch(y_state);
    let err = got.iter().zip([0.0, 1.0, 0.0]).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    r.below("Y state = (|0⟩ + i|1⟩)/√2", err, TOL);
    r
}

pub fn verify_transfer_circuit() -> Report {
    let mut r = Report::new("state transfer");
    // a, b, c plus three spectator modes in an arbitrary state.
    let s = ModeSpace::new(6).expect("6 modes");
    let (a, b, c) = (s.dense(0), s.dense(1), s.dense(2));
    let t = transfer(&a, &b, &c);
    r.below("𝒯 trace preserving", t.trace_preservation_error(), TOL);
    let want = Channel::unitary(exchange(&a, &c)).after(&init(&b, &c));
    r.below("𝒯_{a,b,c} = [R_{a,c}] ℐ_{b,c}", t.distance(&want), TOL);
    let wrong = Channel::unitary(exchange(&c, &a)).after(&init(&b, &c));
    r.above("𝒯_{a,b,c} ≠ [R_{c,a}] ℐ_{b,c}", t.distance(&wrong), 1.0);

    // Inputs already satisfying ibc = 1: the initialisation never corrects.
    let pre = Channel::from_kraus(vec![projector(&ipair(&b, &c), 1.0)]);
    let init_fix = &b * projector(&ipair(&b, &c), -1.0) * projector(&ipair(&b, &c), 1.0);
    r.below("ibc = 1 input: no init correction", init_fix.max_abs(), TOL);
    let lhs = super::measure(&a, &b, &c).after(&pre);
    let rhs = Channel::unitary(exchange(&a, &c)).after(&pre);
    r.below("ibc = 1 input: ℳ_{a,b,c} = [R_{a,c}]", lhs.distance(&rhs), TOL);

    let s = ModeSpace::new(8).expect("8 modes");
    let (a1, a2, b, c) = (s.dense(0), s.dense(1), s.dense(2), s.dense(3));
    let chain = transfer(&c, &b, &a1).after(&transfer(&a1, &b, &a2)).after(&transfer(&a2, &b, &c));
    let want = Channel::unitary(exchange(&a1, &a2)).after(&init(&b, &c));
    r.below("𝒯_{c,b,a1}𝒯_{a1,b,a2}𝒯_{a2,b,c} = [R_{a1,a2}] ℐ_{b,c}", chain.distance(&want), TOL);
    r
}

pub fn verify_tgate_circuit() -> Report {
    let mut r = Report::new("T gate by state transfer");
    let s = ModeSpace::new(8).expect("8 modes");
    let m: Vec<CMat> = (0..6).map(|i| s.dense(i)).collect();
    let (a1, a2, b1, b2, c1, c2) = (&m[0], &m[1], &m[2], &m[3], &m[4], &m[5]);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let cp = (c1 + c2) * h;
    let cm = (c1 - c2) * h;

    let circuit = transfer(c2, b2, a2)
        .after(&transfer(c1, b1, a1))
        .after(&transfer(a1, b1, &cm))
        .after(&transfer(a2, b2, &cp));
    r.below("circuit trace preserving", circuit.trace_preservation_error(), TOL);
    let fresh = init(b1, c1).after(&init(b2, c2));
    let want = Channel::unitary(t_gate(a1, a2)).after(&fresh);
    r.below("circuit = [T_{a1,a2}] ℐ_{b1,c1} ℐ_{b2,c2}", circuit.distance(&want), TOL);
    let wrong = Channel::unitary(t_gate(a2, a1)).after(&fresh);
    r.above("circuit ≠ [T_{a2,a1}] ℐ_{b1,c1} ℐ_{b2,c2}", circuit.distance(&wrong), 1.0);

    let consumed = Channel::from_kraus(vec![
        projector(&ipair(b1, c1), 1.0) * projector(&ipair(b2, c2), 1.0),
    ]);
    r.below(
        "magic state consumed: ib1c1 = ib2c2 = 1",
        consumed.after(&circuit).distance(&circuit),
        TOL,
    );

    let t = t_gate(a1, a2);
    r.below("T² = R_{a1,a2} up to phase", phase_distance(&(&t * &t), &exchange(a1, a2)), TOL);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchange_and_phase() {
        let r = verify_exchange_and_phase();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn qubit_encoding() {
        let r = verify_qubit_encoding();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn transfer_identities() {
        let r = verify_transfer_circuit();
        assert!(r.passed(), "{r}");
    }
}
