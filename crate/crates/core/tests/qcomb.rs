mod common;

use std::sync::Arc;

use mfeq::qcomb::{q_binomial, QPolynomial};
use mfeq::{Coeff, Series, VarTable};

use common::{binomial, interleaving_poly};

fn dense(p: &QPolynomial) -> Vec<Coeff> {
    p.coeffs()
}

fn ints(v: &[i64]) -> Vec<Coeff> {
    v.iter().map(|&c| Coeff::from(c)).collect()
}

#[test]
fn matches_interleaving_oracle() {
    for n in 0..=8 {
        for k in 0..=n {
            assert_eq!(dense(&q_binomial(n, k)), ints(&interleaving_poly(n, k)), "[{n} choose {k}]");
        }
    }
}

#[test]
fn coefficients_are_palindromic() {
    for n in 0..=8 {
        for k in 0..=n {
            let c = dense(&q_binomial(n, k));
            let mut rev = c.clone();
            rev.reverse();
            assert_eq!(c, rev);
            assert_eq!(c.len() as u32, k * (n - k) + 1);
            assert_eq!(q_binomial(n, k), q_binomial(n, n - k));
        }
    }
}

#[test]
fn q_equals_one_gives_binomials() {
    for n in 0..=8u32 {
        for k in 0..=n {
            assert_eq!(q_binomial(n, k).at_one(), Coeff::from(binomial(n.into(), k.into()) as i64));
        }
    }
}

#[test]
fn both_pascal_recurrences_hold() {
    let t = Arc::new(VarTable::new(&["q"], &[("q", 64)]).unwrap());
    let q_pow = |e: u32| Series::monomial(&t, &[("q", e)], Coeff::ONE).unwrap();
    for n in 1..=8 {
        for k in 1..n {
            let lhs = q_binomial(n, k).embed(&t);
            let a = q_binomial(n - 1, k - 1).embed(&t);
            let b = q_binomial(n - 1, k).embed(&t);
            assert_eq!(lhs, a.add(&q_pow(k).mul(&b).unwrap()).unwrap());
            assert_eq!(lhs, q_pow(n - k).mul(&a).unwrap().add(&b).unwrap());
        }
    }
}

#[test]
fn product_of_q_factorials() {
    // [n choose k] (q;q)_k (q;q)_{n-k} = (q;q)_n
    let t = Arc::new(VarTable::new(&["q"], &[("q", 64)]).unwrap());
    let poch = |n: u32| {
        (1..=n).fold(Series::one(&t), |acc, i| {
            let f = Series::one(&t).sub(&Series::monomial(&t, &[("q", i)], Coeff::ONE).unwrap()).unwrap();
            acc.mul(&f).unwrap()
        })
    };
    for n in 0..=8 {
        for k in 0..=n {
            let lhs = q_binomial(n, k).embed(&t).mul(&poch(k)).unwrap().mul(&poch(n - k)).unwrap();
            assert_eq!(lhs, poch(n));
        }
    }
}

#[test]
fn out_of_range_is_zero() {
    assert!(q_binomial(3, 4).series().is_zero());
    assert_eq!(dense(&q_binomial(0, 0)), ints(&[1]));
}
