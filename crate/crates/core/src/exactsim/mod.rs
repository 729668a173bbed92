//! Exact simulation of a few Majorana modes through the Jordan–Wigner map.
//!
//! Mode `2k` is `X_k Z_{<k}` and mode `2k+1` is `Y_k Z_{<k}`; qubit 0 is the
//! most significant bit of a basis index. Every monomial in the modes is a
//! phased permutation of the basis, which [`PauliOp`] stores implicitly.
//! Circuits that mix modes (e.g. `(c1 ± c2)/√2`) use dense matrices.

mod circuits;
mod distill;
mod stabmeas;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::Monomial;
use crate::error::{Error, Result};

pub use circuits::{
    verify_exchange_and_phase, verify_qubit_encoding, verify_tgate_circuit, verify_transfer_circuit,
};
pub use distill::{
    distillation_error_formula, sample_distillation, verify_distillation, DistillationStats,
};
pub use stabmeas::{
    correction_error, simulate_stab_meas_circuit, table_one_correction, ETA_PAIRS, StabMeasQuery, StabMeasReport, TableRow,
    TABLE_ONE,
};

pub const MAX_MODES: usize = 24;

pub type CMat = DMatrix<Complex64>;

/// Largest entry modulus.
pub trait MaxAbs {
    fn max_abs(&self) -> f64;
}

impl MaxAbs for CMat {
    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A phased permutation `|x⟩ ↦ phases[x] |x ⊕ mask⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOp {
    mask: usize,
    phases: Vec<Complex64>,
}

impl PauliOp {
    pub fn identity(dim: usize) -> Self {
        Self { mask: 0, phases: vec![ONE; dim] }
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// `self · other`.
    pub fn mul(&self, other: &PauliOp) -> PauliOp {
        let phases = (0..self.dim()).map(|x| other.phases[x] * self.phases[x ^ other.mask]).collect();
        PauliOp { mask: self.mask ^ other.mask, phases }
    }

    pub fn scale(&self, z: Complex64) -> PauliOp {
        PauliOp { mask: self.mask, phases: self.phases.iter().map(|p| p * z).collect() }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (x, &a) in v.iter().enumerate() {
            out[x ^ self.mask] += self.phases[x] * a;
        }
        out
    }

    /// Apply to every column of `m`.
    pub fn apply_cols(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(m.nrows(), m.ncols());
        for x in 0..m.nrows() {
            let y = x ^ self.mask;
            let p = self.phases[x];
            for j in 0..m.ncols() {
                out[(y, j)] += p * m[(x, j)];
            }
        }
        out
    }

    /// `(1 + η P)/2` applied to every column of `m`.
    pub fn project_cols(&self, m: &CMat, eta: f64) -> CMat {
        let pm = self.apply_cols(m);
        (m + pm * Complex64::new(eta, 0.0)) * Complex64::new(0.5, 0.0)
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let pv = self.apply(v);
        v.iter().zip(&pv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for x in 0..self.dim() {
            m[(x ^ self.mask, x)] = self.phases[x];
        }
        m
    }
}

/// Operators of `n_modes` Majorana modes on `2^{n_modes/2}` amplitudes.
#[derive(Clone, Debug)]
pub struct ModeSpace {
    n_modes: usize,
    modes: Vec<PauliOp>,
}

impl ModeSpace {
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes % 2 == 1 || n_modes > MAX_MODES {
            return Err(Error::InvalidModeCount(n_modes));
        }
        let nq = n_modes / 2;
        let dim = 1usize << nq;
        let bit = |q: usize| 1usize << (nq - 1 - q);
        let mut modes = Vec::with_capacity(n_modes);
        for k in 0..nq {
            for is_y in [false, true] {
                let phases = (0..dim)
                    .map(|x| {
                        let lower = (0..k).filter(|&j| x & bit(j) != 0).count();
                        let mut p = if lower % 2 == 0 { ONE } else { -ONE };
                        if is_y {
                            p *= if x & bit(k) == 0 { I } else { -I };
                        }
                        p
                    })
                    .collect();
                modes.push(PauliOp { mask: bit(k), phases });
            }
        }
        Ok(Self { n_modes, modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_modes / 2)
    }

    pub fn c(&self, i: usize) -> &PauliOp {
        &self.modes[i]
    }

    pub fn identity(&self) -> PauliOp {
        PauliOp::identity(self.dim())
    }

    /// `c_{m_0} c_{m_1} ⋯` in the order given.
    pub fn product(&self, modes: &[usize]) -> PauliOp {
        modes.iter().fold(self.identity(), |acc, &m| acc.mul(&self.modes[m]))
    }

    /// `i·c_a c_b`.
    pub fn ipair(&self, a: usize, b: usize) -> PauliOp {
        self.product(&[a, b]).scale(I)
    }

    pub fn monomial(&self, m: &Monomial) -> PauliOp {
        let ph = [ONE, I, -ONE, -I][m.phase() as usize];
        self.product(&m.support().to_vec()).scale(ph)
    }

    pub fn dense(&self, i: usize) -> CMat {
        self.modes[i].to_dense()
    }

    /// Largest deviation from `{c_i, c_j} = 2δ_ij` and `c_i† = c_i`.
    pub fn clifford_error(&self) -> f64 {
        let ops: Vec<CMat> = (0..self.n_modes).map(|i| self.dense(i)).collect();
        let id = CMat::identity(self.dim(), self.dim());
        let mut worst = 0.0f64;
        for i in 0..ops.len() {
            worst = worst.max((&ops[i] - ops[i].adjoint()).max_abs());
            for j in i..ops.len() {
                let ac = &ops[i] * &ops[j] + &ops[j] * &ops[i];
                let want = if i == j { &id * Complex64::new(2.0, 0.0) } else { CMat::zeros(self.dim(), self.dim()) };
                worst = worst.max((ac - want).max_abs());
            }
        }
        worst
    }
}

/// `(1 + η O)/2` for a Hermitian involution `O`.
pub fn projector(op: &CMat, eta: f64) -> CMat {
    let n = op.nrows();
    (CMat::identity(n, n) + op * Complex64::new(eta, 0.0)) * Complex64::new(0.5, 0.0)
}

/// `i·x·y` for dense operators.
pub fn ipair(x: &CMat, y: &CMat) -> CMat {
    x * y * I
}

/// Exchange gate `R_{x,y} = (1 + x y)/√2`.
pub fn exchange(x: &CMat, y: &CMat) -> CMat {
    let n = x.nrows();
    (CMat::identity(n, n) + x * y) * Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// `T_{x,y} = exp(π/8 · x y) = cos(π/8) + sin(π/8) x y`, using `(xy)² = −1`.
pub fn t_gate(x: &CMat, y: &CMat) -> CMat {
    let n = x.nrows();
    let th = std::f64::consts::PI / 8.0;
    CMat::identity(n, n) * Complex64::new(th.cos(), 0.0) + x * y * Complex64::new(th.sin(), 0.0)
}

/// Distance between unitaries with the global phase quotiented out
/// (Frobenius norm after aligning phases).
pub fn phase_distance(u: &CMat, v: &CMat) -> f64 {
    let ov: Complex64 = (v.adjoint() * u).trace();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    (u - v * ph).norm()
}

/// A completely positive map in Kraus form.
#[derive(Clone, Debug)]
pub struct Channel {
    pub kraus: Vec<CMat>,
}

impl Channel {
    pub fn identity(dim: usize) -> Self {
        Self { kraus: vec![CMat::identity(dim, dim)] }
    }

    pub fn unitary(u: CMat) -> Self {
        Self { kraus: vec![u] }
    }

    pub fn from_kraus(kraus: Vec<CMat>) -> Self {
        Self { kraus }
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// `self ∘ first`: apply `first`, then `self`. Vanishing terms are dropped.
    pub fn after(&self, first: &Channel) -> Channel {
        let mut kraus = Vec::new();
        for k2 in &self.kraus {
            for k1 in &first.kraus {
                let k = k2 * k1;
                if k.max_abs() > 1e-13 {
                    kraus.push(k);
                }
            }
        }
        if kraus.is_empty() {
            kraus.push(CMat::zeros(self.dim(), self.dim()));
        }
        Channel { kraus }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Largest trace-norm difference of outputs over the matrix-unit basis
    /// `|i⟩⟨j|` — a complete, finite test of channel equality.
    pub fn distance(&self, other: &Channel) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut diff = CMat::zeros(d, d);
                for k in &self.kraus {
                    diff += k.column(i) * k.column(j).adjoint();
                }
                for k in &other.kraus {
                    diff -= k.column(i) * k.column(j).adjoint();
                }
                if diff.max_abs() < 1e-15 {
                    continue;
                }
                let nuc: f64 = diff.singular_values().iter().sum();
                worst = worst.max(nuc);
            }
        }
        worst
    }

    /// `‖Σ K†K − 1‖_max`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.dim();
        let mut s = CMat::zeros(d, d);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        (s - CMat::identity(d, d)).max_abs()
    }
}

/// Initialisation `ℐ_{b,c}`: project onto `ibc = ±1`; on `−1` apply `b`.
pub fn init(b: &CMat, c: &CMat) -> Channel {
    let op = ipair(b, c);
    Channel::from_kraus(vec![projector(&op, 1.0), b * projector(&op, -1.0)])
}

/// Measurement `ℳ_{a,b,c}`: read `iab`; on `+1` apply the phase gate `ac`.
pub fn measure(a: &CMat, b: &CMat, c: &CMat) -> Channel {
    let op = ipair(a, b);
    Channel::from_kraus(vec![a * c * projector(&op, 1.0), projector(&op, -1.0)])
}

/// State transfer `𝒯_{a,b,c} = ℳ_{a,b,c} ℐ_{b,c}`.
pub fn transfer(a: &CMat, b: &CMat, c: &CMat) -> Channel {
    measure(a, b, c).after(&init(b, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations_eight_modes() {
        let s = ModeSpace::new(8).unwrap();
        assert!(s.clifford_error() < 1e-12);
    }

    #[test]
    fn rejects_bad_mode_counts() {
        assert!(ModeSpace::new(7).is_err());
        assert!(ModeSpace::new(26).is_err());
        assert!(ModeSpace::new(24).is_ok());
    }

    #[test]
    fn sparse_product_matches_dense() {
        let s = ModeSpace::new(6).unwrap();
        let sparse = s.product(&[4, 1, 2]).to_dense();
        let dense = s.dense(4) * s.dense(1) * s.dense(2);
        assert!((sparse - dense).max_abs() < 1e-14);
    }

    #[test]
    fn pair_operator_squares_to_one() {
        let s = ModeSpace::new(4).unwrap();
        let p = s.ipair(0, 1);
        assert_eq!(p.mul(&p), s.identity());
    }

    #[test]
    fn monomial_phase_is_respected() {
        let s = ModeSpace::new(4).unwrap();
        let m = Monomial::hermitian([0usize, 1].into_iter().collect());
        assert_eq!(s.monomial(&m), s.ipair(0, 1));
    }

    #[test]
    fn init_and_measure_are_trace_preserving() {
        let s = ModeSpace::new(6).unwrap();
        let (a, b, c) = (s.dense(0), s.dense(1), s.dense(2));
        assert!(init(&b, &c).trace_preservation_error() < 1e-12);
        assert!(measure(&a, &b, &c).trace_preservation_error() < 1e-12);
    }
}
