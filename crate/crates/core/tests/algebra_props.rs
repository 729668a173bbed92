use proptest::prelude::*;

use majcolor::algebra::{gf2_rank, gf2_solve, SupportMatrix};
use majcolor::exactsim::{CMat, ModeSpace};
use majcolor::{commutes, mono_mul, ModeSet, Monomial};

const N: usize = 6;

fn monomial() -> impl Strategy<Value = Monomial> {
    (prop::collection::btree_set(0..N, 0..=N), 0u8..4)
        .prop_map(|(s, ph)| Monomial::new(s.into_iter().collect(), ph))
}

fn rows(n_vars: usize) -> impl Strategy<Value = Vec<ModeSet>> {
    prop::collection::vec(prop::collection::btree_set(0..n_vars, 0..n_vars), 1..8)
        .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
}

fn close(a: &CMat, b: &CMat) -> bool {
    (a - b).iter().all(|z| z.norm() < 1e-12)
}

proptest! {
    #[test]
    fn product_matches_dense_matrices(a in monomial(), b in monomial()) {
        let s = ModeSpace::new(N).unwrap();
        let lhs = s.monomial(&mono_mul(&a, &b)).to_dense();
        let rhs = s.monomial(&a).to_dense() * s.monomial(&b).to_dense();
        prop_assert!(close(&lhs, &rhs));
    }

    #[test]
    fn associative(a in monomial(), b in monomial(), c in monomial()) {
        prop_assert_eq!(mono_mul(&mono_mul(&a, &b), &c), mono_mul(&a, &mono_mul(&b, &c)));
    }

    #[test]
    fn commutation_rule(a in monomial(), b in monomial()) {
        // Majorana monomials commute iff |A||B| + |A∩B| is even.
        let overlap = a.support().intersection_len(b.support());
        let expected = (a.weight() * b.weight() + overlap) % 2 == 0;
        prop_assert_eq!(commutes(&a, &b), expected);
        let ab = mono_mul(&a, &b);
        let ba = mono_mul(&b, &a);
        prop_assert_eq!(ab == ba, expected);
        prop_assert_eq!(ab.support(), ba.support());
    }

    #[test]
    fn inverse_and_adjoint(a in monomial()) {
        prop_assert_eq!(mono_mul(&a, &a.inverse()), Monomial::identity());
        let s = ModeSpace::new(N).unwrap();
        prop_assert!(close(&s.monomial(&a.adjoint()).to_dense(), &s.monomial(&a).to_dense().adjoint()));
    }

    #[test]
    fn hermitian_monomials_square_to_one(set in prop::collection::btree_set(0..N, 0..=N)) {
        let m = Monomial::hermitian(set.into_iter().collect());
        prop_assert!(m.is_hermitian());
        prop_assert_eq!(mono_mul(&m, &m), Monomial::identity());
    }

    #[test]
    fn solve_finds_constructed_combinations(r in rows(7), pick in prop::collection::vec(any::<bool>(), 8)) {
        let n_vars = r.len();
        // Equations: one per column, variables = rows.
        let mut target = ModeSet::new();
        for (i, row) in r.iter().enumerate() {
            if pick[i] {
                target.xor_with(row);
            }
        }
        let eqs: Vec<ModeSet> = (0..7)
            .map(|col| (0..n_vars).filter(|&i| r[i].contains(col)).collect())
            .collect();
        let rhs: Vec<bool> = (0..7).map(|col| target.contains(col)).collect();
        let x = gf2_solve(&eqs, &rhs, n_vars).expect("a solution exists by construction");
        let mut got = ModeSet::new();
        for (i, on) in x.iter().enumerate() {
            if *on {
                got.xor_with(&r[i]);
            }
        }
        prop_assert_eq!(got, target);
        let rank = gf2_rank(&SupportMatrix::new(r.clone(), 7));
        prop_assert!(rank <= n_vars.min(7));
    }
}
