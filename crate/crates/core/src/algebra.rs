//! Exact algebra of Majorana monomials.
//!
//! A monomial is a phase `i^k` times an ascending-index product of Majorana
//! operators `c_i`. Supports are stored as bitsets so that overlap parity,
//! GF(2) elimination and frame updates are word-level operations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of mode indices backed by a growable bitset.
///
/// Trailing zero words are always trimmed, so derived equality is set equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeSet {
    words: Vec<u64>,
}

impl ModeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n_modes: usize) -> Self {
        Self {
            words: Vec::with_capacity(n_modes.div_ceil(64)),
        }
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.words
            .get(mode / 64)
            .is_some_and(|w| (w >> (mode % 64)) & 1 == 1)
    }

    pub fn insert(&mut self, mode: usize) {
        if !self.contains(mode) {
            self.toggle(mode);
        }
    }

    pub fn remove(&mut self, mode: usize) {
        if self.contains(mode) {
            self.toggle(mode);
        }
    }

    /// Flips membership of `mode`; this is the single-mode frame update `[c]`.
    pub fn toggle(&mut self, mode: usize) {
        let w = mode / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1u64 << (mode % 64);
        self.trim();
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn xor_with(&mut self, other: &ModeSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        self.trim();
    }

    pub fn xor(&self, other: &ModeSet) -> ModeSet {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    pub fn intersection(&self, other: &ModeSet) -> ModeSet {
        let mut out = ModeSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        };
        out.trim();
        out
    }

    pub fn intersection_len(&self, other: &ModeSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &ModeSet) -> bool {
        self.intersection_len(other) == self.len()
    }

    /// Largest member, if any.
    pub fn max_mode(&self) -> Option<usize> {
        let last = self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    /// Number of members strictly greater than `mode`.
    fn count_above(&self, mode: usize) -> usize {
        let w = mode / 64;
        if w >= self.words.len() {
            return 0;
        }
        let b = mode % 64;
        let head = if b == 63 { 0 } else { self.words[w] >> (b + 1) };
        head.count_ones() as usize
            + self.words[w + 1..]
                .iter()
                .map(|x| x.count_ones() as usize)
                .sum::<usize>()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for ModeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ModeSet::new();
        for m in iter {
            s.insert(m);
        }
        s
    }
}

impl fmt::Debug for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ModeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ModeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Ok(v.into_iter().collect())
    }
}

/// `i^phase` times the ascending-index product of the Majorana operators in `support`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    support: ModeSet,
    phase: u8,
}

impl Monomial {
    /// The scalar `i^phase`.
    pub fn scalar(phase: u8) -> Self {
        Self {
            support: ModeSet::new(),
            phase: phase % 4,
        }
    }

    pub fn identity() -> Self {
        Self::scalar(0)
    }

    pub fn new(support: ModeSet, phase: u8) -> Self {
        Self {
            support,
            phase: phase % 4,
        }
    }

    /// The single Majorana operator `c_mode`.
    pub fn mode(mode: usize) -> Self {
        Self::new(std::iter::once(mode).collect(), 0)
    }

    /// Product of the listed operators in the given (not necessarily ascending) order.
    pub fn product_of(modes: &[usize]) -> Self {
        modes
            .iter()
            .fold(Self::identity(), |acc, &m| mono_mul(&acc, &Self::mode(m)))
    }

    /// The Hermitian representative over `support`, `i^{floor(|s|/2)} ∏ c_i`.
    pub fn hermitian(support: ModeSet) -> Self {
        let k = (support.len() / 2 % 4) as u8;
        Self::new(support, k)
    }

    pub fn support(&self) -> &ModeSet {
        &self.support
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.support.is_empty()
    }

    /// Multiply by `i^k`.
    pub fn times_phase(&self, k: u8) -> Self {
        Self::new(self.support.clone(), self.phase + k)
    }

    /// Hermitian conjugate. Reversing an `n`-fold product costs `n(n-1)/2` swaps.
    pub fn adjoint(&self) -> Self {
        let n = self.weight();
        let swaps = (n * n.saturating_sub(1) / 2 % 2) as u8;
        Self::new(self.support.clone(), (4 - self.phase) % 4 + 2 * swaps)
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    /// Inverse; monomials square to a scalar so this is the adjoint.
    pub fn inverse(&self) -> Self {
        self.adjoint()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        if self.support.is_empty() {
            return write!(f, "{}", ["1", "i", "-1", "-i"][self.phase as usize]);
        }
        write!(f, "{prefix}")?;
        for m in self.support.iter() {
            write!(f, "c{m}")?;
        }
        Ok(())
    }
}

/// Canonical product `a * b`.
///
/// Moving every operator of `b` left past the larger operators of `a` gives one
/// sign per swap; equal operators then meet adjacently and square to one.
pub fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let swaps: usize = b.support.iter().map(|y| a.support.count_above(y)).sum();
    Monomial::new(
        a.support.xor(&b.support),
        a.phase + b.phase + 2 * (swaps % 2) as u8,
    )
}

impl std::ops::Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, rhs: &Monomial) -> Monomial {
        mono_mul(self, rhs)
    }
}

/// Phase exponent making `i^k ∏ c_i` Hermitian for an even support.
pub fn hermitian_phase(support: &ModeSet) -> Result<u8> {
    let n = support.len();
    if n % 2 == 1 {
        return Err(Error::OddSupport(n));
    }
    Ok((n / 2 % 4) as u8)
}

/// True iff `a b = b a`. In general `a b = (-1)^{|a||b| - |a ∩ b|} b a`.
pub fn commutes(a: &Monomial, b: &Monomial) -> bool {
    let sign = a.weight() * b.weight() + a.support.intersection_len(&b.support);
    sign.is_multiple_of(2)
}

/// Rows of mode supports viewed as GF(2) vectors.
#[derive(Clone, Debug, Default)]
pub struct SupportMatrix {
    pub rows: Vec<ModeSet>,
    pub n_modes: usize,
}

impl SupportMatrix {
    pub fn new(rows: Vec<ModeSet>, n_modes: usize) -> Self {
        Self { rows, n_modes }
    }
}

/// GF(2) rank by elimination on the highest set bit.
pub fn gf2_rank(m: &SupportMatrix) -> usize {
    let mut basis: Vec<Option<ModeSet>> = Vec::new();
    let mut rank = 0;
    for row in &m.rows {
        let mut r = row.clone();
        while let Some(p) = r.max_mode() {
            if p >= basis.len() {
                basis.resize(p + 1, None);
            }
            match &basis[p] {
                Some(b) => r.xor_with(b),
                None => {
                    basis[p] = Some(r);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Solve `A x = b` over GF(2), where row `i` of `A` is `rows[i]` (a set of
/// unknown indices) and `b[i]` its right-hand side. Returns one solution with
/// free variables set to zero, or `None` if the system is inconsistent.
pub fn gf2_solve(rows: &[ModeSet], rhs: &[bool], n_vars: usize) -> Option<Vec<bool>> {
    // Augment the rhs as variable `n_vars`.
    let mut pivots: Vec<(usize, ModeSet)> = Vec::new();
    for (row, &b) in rows.iter().zip(rhs) {
        let mut r = row.clone();
        if b {
            r.toggle(n_vars);
        }
        for (p, pr) in &pivots {
            if r.contains(*p) {
                r.xor_with(pr);
            }
        }
        let pivot = r.iter().find(|&v| v < n_vars);
        match pivot {
            Some(p) => {
                for (_, pr) in pivots.iter_mut() {
                    if pr.contains(p) {
                        pr.xor_with(&r);
                    }
                }
                pivots.push((p, r));
            }
            None if r.contains(n_vars) => return None,
            None => {}
        }
    }
    let mut x = vec![false; n_vars];
    for (p, r) in &pivots {
        x[*p] = r.contains(n_vars);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> ModeSet {
        v.iter().copied().collect()
    }

    #[test]
    fn square_of_single_mode_is_one() {
        let c1 = Monomial::mode(1);
        assert_eq!(mono_mul(&c1, &c1), Monomial::identity());
    }

    #[test]
    fn adjacent_cancellation_keeps_phase() {
        let a = Monomial::product_of(&[1, 2]);
        let b = Monomial::product_of(&[2, 3]);
        assert_eq!(mono_mul(&a, &b), Monomial::new(set(&[1, 3]), 0));
    }

    #[test]
    fn reordering_picks_up_sign() {
        let m = Monomial::product_of(&[2, 1]);
        assert_eq!(m, Monomial::new(set(&[1, 2]), 2));
    }

    #[test]
    fn hermitian_phase_values() {
        assert_eq!(hermitian_phase(&set(&[0, 1])).unwrap(), 1);
        assert_eq!(hermitian_phase(&set(&[0, 1, 2, 3])).unwrap(), 2);
        assert_eq!(hermitian_phase(&(0..8).collect()).unwrap(), 0);
        assert!(matches!(
            hermitian_phase(&set(&[0, 1, 2])),
            Err(Error::OddSupport(3))
        ));
    }

    #[test]
    fn commutation_examples() {
        let a = Monomial::product_of(&[0, 1]);
        let b = Monomial::product_of(&[4, 5]);
        assert!(commutes(&a, &b));
        let c = Monomial::product_of(&[1, 2]);
        let d = Monomial::product_of(&[2, 3]);
        assert!(!commutes(&c, &d));
    }

    #[test]
    fn gf2_rank_examples() {
        assert_eq!(gf2_rank(&SupportMatrix::default()), 0);
        let m = SupportMatrix::new(vec![set(&[1, 5]), set(&[1, 5])], 8);
        assert_eq!(gf2_rank(&m), 1);
        let m = SupportMatrix::new(vec![set(&[0, 1]), set(&[1, 2]), set(&[0, 2])], 3);
        assert_eq!(gf2_rank(&m), 2);
    }

    #[test]
    fn gf2_solve_finds_solution_or_reports_inconsistency() {
        let rows = vec![set(&[0, 1]), set(&[1, 2])];
        let x = gf2_solve(&rows, &[true, false], 3).unwrap();
        assert!(x[0] ^ x[1]);
        assert!(!(x[1] ^ x[2]));
        let rows = vec![set(&[0]), set(&[0])];
        assert!(gf2_solve(&rows, &[true, false], 1).is_none());
    }

    #[test]
    fn mode_set_basics() {
        let mut s = set(&[3, 70, 128]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.max_mode(), Some(128));
        s.toggle(128);
        assert_eq!(s.max_mode(), Some(70));
        assert_eq!(s, set(&[3, 70]));
        assert_eq!(s.count_above(3), 1);
        assert_eq!(s.count_above(70), 0);
        assert_eq!(s.to_vec(), vec![3, 70]);
    }
}
