//! Eight-mode stabilizer measurement with four ancilla pairs.
//!
//! Data modes `c1..c8` are 0–7 and ancillas `a1..a8` are 8–15. The ancillas
//! start with `i a2a3 = i a4a5 = i a6a7 = i a8a1 = 1`; four projections of
//! `c_{2i-1}c_{2i}a_{2i-1}a_{2i}` give `υ`, the stabilizer value is
//! `−υ12 υ34 υ56 υ78`, and reading the ancilla pairs back gives `η`, whose
//! pattern selects a data correction.

use num_complex::Complex64;
use serde::Serialize;

use super::{projector, CMat, Channel, ModeSpace, PauliOp};
use crate::error::{Error, Result};
use crate::report::Report;

/// Ancilla pairs read out at the end, in the order `η81, η23, η45, η67`
/// (0-based ancilla indices).
pub const ETA_PAIRS: [(usize, usize); 4] = [(7, 0), (1, 2), (3, 4), (5, 6)];

/// Correction for each even `η` pattern (`-1` entries marked), as 0-based
/// data modes. Products differing by `c1⋯c8` are equivalent.
pub const TABLE_ONE: [([i8; 4], &[usize]); 8] = [
    ([1, 1, 1, 1], &[]),
    ([-1, -1, 1, 1], &[0, 1]),
    ([1, -1, -1, 1], &[2, 3]),
    ([1, 1, -1, -1], &[4, 5]),
    ([-1, 1, 1, -1], &[6, 7]),
    ([-1, 1, -1, 1], &[0, 1, 2, 3]),
    ([1, -1, 1, -1], &[2, 3, 4, 5]),
    ([-1, -1, -1, -1], &[0, 1, 4, 5]),
];

/// Table lookup; `None` for the (impossible) odd patterns.
pub fn table_one_correction(eta: [i8; 4]) -> Option<&'static [usize]> {
    TABLE_ONE.iter().find(|(p, _)| *p == eta).map(|(_, u)| *u)
}

/// Outcome branches to examine; `None` means every value.
#[derive(Clone, Debug, Default)]
pub struct StabMeasQuery {
    pub upsilon: Option<[i8; 4]>,
    pub eta: Option<[i8; 4]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub eta: [i8; 4],
    pub correction: Vec<usize>,
    /// Branches (over `υ`) in which this pattern occurred.
    pub occurrences: usize,
    /// Worst channel distance to the clean projection, with the correction.
    pub max_error: f64,
    /// Same, with the correction multiplied by `c1⋯c8`.
    pub max_error_times_stabilizer: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabMeasReport {
    pub rows: Vec<TableRow>,
    /// Worst weight left outside the `−∏υ` eigenspace of `c1⋯c8`.
    pub outcome_formula_error: f64,
    /// Total probability found in odd `η` patterns.
    pub odd_pattern_weight: f64,
    pub branches: usize,
}

impl StabMeasReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.outcome_formula_error < tol
            && self.odd_pattern_weight < tol
            && self.rows.iter().all(|r| r.max_error < tol && r.max_error_times_stabilizer < tol)
    }

    pub fn to_report(&self, tol: f64) -> Report {
        let mut r = Report::new("stabilizer measurement circuit");
        r.below("stabilizer = -υ12 υ34 υ56 υ78", self.outcome_formula_error, tol);
        r.below("odd η patterns never occur", self.odd_pattern_weight, tol);
        for row in &self.rows {
            let label = format!(
                "η = {:?} → U = {}",
                row.eta,
                if row.correction.is_empty() {
                    "1".to_string()
                } else {
                    row.correction.iter().map(|m| format!("c{}", m + 1)).collect::<String>()
                }
            );
            if row.occurrences == 0 {
                r.check(label, false, "pattern never occurred");
            } else {
                r.below(label.clone(), row.max_error, tol);
                r.below(format!("{label} · c1⋯c8"), row.max_error_times_stabilizer, tol);
            }
        }
        r
    }
}

fn all_signs() -> impl Iterator<Item = [i8; 4]> {
    (0..16u8).map(|m| [0, 1, 2, 3].map(|k| if m >> k & 1 == 1 { -1 } else { 1 }))
}

fn ancilla_state() -> Vec<Complex64> {
    let s = ModeSpace::new(8).expect("8 modes");
    let d = s.dim();
    let pairs: Vec<PauliOp> = [(1, 2), (3, 4), (5, 6), (7, 0)].iter().map(|&(x, y)| s.ipair(x, y)).collect();
    for k in 0..d {
        let mut m = CMat::zeros(d, 1);
        m[(k, 0)] = super::ONE;
        for p in &pairs {
            m = p.project_cols(&m, 1.0);
        }
        let n = m.norm();
        if n > 1e-6 {
            return (m / Complex64::new(n, 0.0)).column(0).iter().copied().collect();
        }
    }
    unreachable!("ancilla constraints are consistent")
}

/// Data-space Kraus operators of one branch, given the joint map `m` applied
/// to `data ⊗ ψ_anc` (rows: joint basis, columns: data basis).
fn data_channel(m: &CMat, anc_dim: usize) -> Channel {
    let dd = m.ncols();
    let kraus = (0..anc_dim)
        .map(|k| CMat::from_fn(dd, dd, |i, j| m[(i * anc_dim + k, j)]))
        .collect();
    Channel::from_kraus(kraus)
}

/// Distance between a branch channel and `λ[π]`, relative to `λ`.
fn mismatch(ch: &Channel, pi: &CMat) -> f64 {
    let weight: f64 = ch.kraus.iter().map(|k| k.norm_squared()).sum();
    let lambda = weight / pi.trace().re;
    let want = Channel::from_kraus(vec![pi * Complex64::new(lambda.sqrt(), 0.0)]);
    // Compare the branch channel conditioned on its outcome.
    ch.distance(&want) / lambda
}

pub fn simulate_stab_meas_circuit(query: &StabMeasQuery) -> Result<StabMeasReport> {
    if let Some(eta) = query.eta {
        if eta.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InconsistentOutcomes(format!("η entries must be ±1, got {eta:?}")));
        }
        if table_one_correction(eta).is_none() {
            return Err(Error::InconsistentOutcomes(format!(
                "η = {eta:?} has an odd number of -1 outcomes and cannot occur"
            )));
        }
    }
    if let Some(u) = query.upsilon {
        if u.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InconsistentOutcomes(format!("υ entries must be ±1, got {u:?}")));
        }
    }

    let space = ModeSpace::new(16)?;
    let data = ModeSpace::new(8)?;
    let (dd, ad) = (data.dim(), 16usize);
    let psi = ancilla_state();
    let m0 = CMat::from_fn(dd * ad, dd, |row, col| if row / ad == col { psi[row % ad] } else { Default::default() });

    let stab_data = data.product(&(0..8).collect::<Vec<_>>()).to_dense();
    let stab_full = space.product(&(0..8).collect::<Vec<_>>());
    let projections: Vec<PauliOp> =
        (0..4).map(|i| space.product(&[2 * i, 2 * i + 1, 8 + 2 * i, 8 + 2 * i + 1])).collect();
    let eta_ops: Vec<PauliOp> = ETA_PAIRS.iter().map(|&(x, y)| space.ipair(8 + x, 8 + y)).collect();

    let mut rows: Vec<TableRow> = TABLE_ONE
        .iter()
        .map(|(eta, u)| TableRow {
            eta: *eta,
            correction: u.to_vec(),
            occurrences: 0,
            max_error: 0.0,
            max_error_times_stabilizer: 0.0,
        })
        .collect();
    let mut outcome_formula_error = 0.0f64;
    let mut odd_pattern_weight = 0.0;
    let mut branches = 0;

    for ups in all_signs().filter(|u| query.upsilon.is_none_or(|q| q == *u)) {
        let mut m1 = m0.clone();
        for (p, &u) in projections.iter().zip(&ups) {
            m1 = p.project_cols(&m1, u as f64);
        }
        if m1.norm() < 1e-9 {
            continue;
        }
        let s = -(ups.iter().map(|&u| u as i32).product::<i32>()) as f64;
        let outside = stab_full.project_cols(&m1, -s).norm() / m1.norm();
        outcome_formula_error = outcome_formula_error.max(outside);
        let pi = projector(&stab_data, s);

        for eta in all_signs().filter(|e| query.eta.is_none_or(|q| q == *e)) {
            let mut m2 = m1.clone();
            for (p, &e) in eta_ops.iter().zip(&eta) {
                m2 = p.project_cols(&m2, e as f64);
            }
            let w = m2.norm_squared() / (dd as f64);
            if w < 1e-18 {
                continue;
            }
            let Some(row) = rows.iter_mut().find(|r| r.eta == eta) else {
                odd_pattern_weight += w;
                continue;
            };
            branches += 1;
            row.occurrences += 1;
            let u = space.product(&row.correction);
            let fixed = data_channel(&u.apply_cols(&m2), ad);
            row.max_error = row.max_error.max(mismatch(&fixed, &pi));
            let alt = stab_full.mul(&u);
            let fixed_alt = data_channel(&alt.apply_cols(&m2), ad);
            row.max_error_times_stabilizer = row.max_error_times_stabilizer.max(mismatch(&fixed_alt, &pi));
        }
    }

    if branches == 0 {
        return Err(Error::InconsistentOutcomes(format!(
            "no branch with υ = {:?}, η = {:?} has nonzero probability",
            query.upsilon, query.eta
        )));
    }
    if query.eta.is_some() || query.upsilon.is_some() {
        rows.retain(|r| r.occurrences > 0);
    }
    Ok(StabMeasReport { rows, outcome_formula_error, odd_pattern_weight, branches })
}

/// Worst data-channel error (over all `υ`) when `correction` is applied after
/// ancilla pattern `eta`; `None` if the pattern never occurs.
pub fn correction_error(eta: [i8; 4], correction: &[usize]) -> Result<Option<f64>> {
    let space = ModeSpace::new(16)?;
    let data = ModeSpace::new(8)?;
    let (dd, ad) = (data.dim(), 16usize);
    let psi = ancilla_state();
    let m0 = CMat::from_fn(dd * ad, dd, |row, col| if row / ad == col { psi[row % ad] } else { Default::default() });
    let stab_data = data.product(&(0..8).collect::<Vec<_>>()).to_dense();
    let u = space.product(correction);
    let mut worst: Option<f64> = None;
    for ups in all_signs() {
        let mut m = m0.clone();
        for i in 0..4 {
            m = space.product(&[2 * i, 2 * i + 1, 8 + 2 * i, 9 + 2 * i]).project_cols(&m, ups[i] as f64);
        }
        for (&(x, y), &e) in ETA_PAIRS.iter().zip(&eta) {
            m = space.ipair(8 + x, 8 + y).project_cols(&m, e as f64);
        }
        if m.norm() < 1e-9 {
            continue;
        }
        let s = -(ups.iter().map(|&u| u as i32).product::<i32>()) as f64;
        let err = mismatch(&data_channel(&u.apply_cols(&m), ad), &projector(&stab_data, s));
        worst = Some(worst.map_or(err, |w| w.max(err)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrong_correction_is_detected() {
        let good = correction_error([-1, -1, 1, 1], &[0, 1]).unwrap().unwrap();
        let bad = correction_error([-1, -1, 1, 1], &[2, 3]).unwrap().unwrap();
        assert!(good < 1e-9);
        assert!(bad > 0.5, "{bad}");
    }

    #[test]
    fn table_lookup() {
        assert_eq!(table_one_correction([-1, -1, 1, 1]), Some(&[0usize, 1][..]));
        assert_eq!(table_one_correction([-1, 1, 1, 1]), None);
    }

    #[test]
    fn odd_eta_query_is_rejected() {
        let q = StabMeasQuery { upsilon: None, eta: Some([-1, 1, 1, 1]) };
        assert!(simulate_stab_meas_circuit(&q).is_err());
    }

    #[test]
    fn row_two_branch() {
        let q = StabMeasQuery { upsilon: None, eta: Some([-1, -1, 1, 1]) };
        let r = simulate_stab_meas_circuit(&q).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.passed(1e-9), "{:?}", r);
    }
}
