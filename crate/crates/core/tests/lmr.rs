mod common;

use std::collections::BTreeSet;

use mfeq::lmr::{self, LmrWord};
use mfeq::solver::{solve_fixed_point, solve_mbm_equation, solve_sequence_sum};
use mfeq::{Coeff, Monomial, Series, SolveOptions};

use common::{is_lmr_word, lmr_stats, permutations};

const PAIRS: [(u32, u32); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

#[test]
fn enumeration_matches_permutation_filter() {
    for (l, r) in PAIRS {
        for m in 0..=4 {
            let got: BTreeSet<Vec<u32>> = lmr::enumerate(l, r, m).unwrap().iter().map(|w| w.word().to_vec()).collect();
            let expected: BTreeSet<Vec<u32>> =
                permutations(l + m + r).into_iter().filter(|w| is_lmr_word(w, l, m)).collect();
            assert_eq!(got, expected, "L={l} M={m} R={r}");
        }
    }
}

#[test]
fn statistics_match_definitions() {
    for (l, r) in PAIRS {
        for m in 0..=4 {
            for w in lmr::enumerate(l, r, m).unwrap() {
                let st = w.stats();
                let (inv, d, a, b, g) = lmr_stats(w.word(), l, m);
                assert_eq!(
                    (st.inversions, st.descents.len() as u32, st.alpha, st.beta, st.gamma),
                    (inv, d, a, b, g),
                    "{:?}",
                    w.word()
                );
                assert!(st.beta <= r && st.gamma <= m);
            }
        }
    }
}

/// G from the permutation filter and the definitional statistics, with no
/// code shared with the library's brute force.
fn oracle_g(l: u32, r: u32, table: &std::sync::Arc<mfeq::VarTable>) -> Series {
    let x_cap = table.cap_of("x").unwrap();
    let mut terms = Vec::new();
    for m in 0..=x_cap {
        for w in permutations(l + m + r).into_iter().filter(|w| is_lmr_word(w, l, m)) {
            let (inv, d, a, b, g) = lmr_stats(&w, l, m);
            if d >= 2 {
                let mono = Monomial::from_pairs(table, &[("x", m), ("q", inv), ("r", a), ("s", b), ("t", g)]).unwrap();
                terms.push((mono, Coeff::ONE));
            }
        }
    }
    Series::from_terms(table, terms).unwrap()
}

#[test]
fn g_matches_independent_oracle() {
    for (l, r) in PAIRS {
        let q_cap = lmr::max_inversions(l, r, 5).unwrap();
        let eq0 = lmr::build_f0(l, 5, q_cap).unwrap();
        let f0 = solve_sequence_sum(&eq0, SolveOptions::default());
        let eq1 = lmr::build_f1(l, r, &f0).unwrap();
        let f1 = solve_sequence_sum(&eq1, SolveOptions::default());
        let g = lmr::assemble_g(&f0, &f1).unwrap();
        assert_eq!(g, oracle_g(l, r, g.table()), "L={l} R={r}");
        assert_eq!(f0, solve_fixed_point(&eq0).unwrap());
        assert_eq!(f0, solve_mbm_equation(&eq0).unwrap());
        assert_eq!(f1, solve_fixed_point(&eq1).unwrap());
    }
}

#[test]
fn q_cap_below_max_inversions_truncates_consistently() {
    let (l, r) = (2, 1);
    let f0 = solve_sequence_sum(&lmr::build_f0(l, 5, 6).unwrap(), SolveOptions::default());
    let f1 = solve_sequence_sum(&lmr::build_f1(l, r, &f0).unwrap(), SolveOptions::default());
    let g = lmr::assemble_g(&f0, &f1).unwrap();
    assert_eq!(g, lmr::brute_force_g(l, r, g.table()).unwrap());
}

#[test]
fn generating_tree_is_exhaustive_and_unique() {
    for (l, r) in PAIRS {
        for m in 0..5 {
            let parents = lmr::enumerate(l, r, m).unwrap();
            let next: BTreeSet<LmrWord> = lmr::enumerate(l, r, m + 1).unwrap().into_iter().collect();
            assert_eq!(lmr::grow(&parents), next);
            // each child has a unique parent: removing the largest 𝕄 value
            let children: usize = parents.iter().map(|w| w.children().len()).sum();
            assert_eq!(children, next.len());
        }
    }
}

#[test]
fn size_guard() {
    assert!(lmr::enumerate(1, 1, lmr::MAX_WORD_LEN).is_err());
    assert!(lmr::enumerate(0, 1, 1).is_err());
}

#[test]
fn avoider_oracle_matches_permutation_filter() {
    for n in 0..=7u32 {
        let mut a = common::avoiders_321(n);
        let mut b: Vec<Vec<u32>> = permutations(n)
            .into_iter()
            .filter(|w| {
                !(0..w.len()).any(|i| (i + 1..w.len()).any(|j| (j + 1..w.len()).any(|k| w[i] > w[j] && w[j] > w[k])))
            })
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        // Catalan many
        assert_eq!(a.len() as u64, common::binomial(2 * u64::from(n), u64::from(n)) / (u64::from(n) + 1));
    }
}
