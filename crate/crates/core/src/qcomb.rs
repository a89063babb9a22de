//! Gaussian (q-)binomial coefficients as exact polynomials in `q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::rational::Coeff;
use crate::series::{Monomial, Series, SeriesBuilder, VarTable};

/// Large enough for every q-binomial the crate can afford to build.
const Q_TABLE_CAP: u32 = 1 << 20;

fn q_table() -> &'static Arc<VarTable> {
    static TABLE: OnceLock<Arc<VarTable>> = OnceLock::new();
    TABLE.get_or_init(|| Arc::new(VarTable::new(&["q"], &[("q", Q_TABLE_CAP)]).expect("valid table")))
}

/// A polynomial in `q` alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPolynomial(Series);

impl QPolynomial {
    pub fn from_coeffs(coeffs: &[i64]) -> QPolynomial {
        let t = q_table();
        let terms = coeffs.iter().enumerate().map(|(d, c)| (Monomial::from_slice(&[d as u32]), Coeff::from(*c)));
        QPolynomial(Series::from_terms(t, terms).expect("arity 1"))
    }

    pub fn zero() -> QPolynomial {
        QPolynomial(Series::zero(q_table()))
    }

    pub fn series(&self) -> &Series {
        &self.0
    }

    pub fn coeff(&self, d: u32) -> Coeff {
        self.0.coefficient(&Monomial::from_slice(&[d])).unwrap_or(Coeff::ZERO)
    }

    pub fn degree(&self) -> Option<u32> {
        self.0.terms().map(|(m, _)| m.0[0]).max()
    }

    /// Dense coefficient list `[c_0, c_1, …, c_deg]`.
    pub fn coeffs(&self) -> Vec<Coeff> {
        match self.degree() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|k| self.coeff(k)).collect(),
        }
    }

    /// Value at `q = 1`.
    pub fn at_one(&self) -> Coeff {
        self.0.terms().fold(Coeff::ZERO, |acc, (_, c)| &acc + c)
    }

    fn shifted_add(&self, other: &QPolynomial, shift: u32) -> QPolynomial {
        let mut b = SeriesBuilder::new(q_table());
        b.add_series(&self.0);
        for (m, c) in other.0.terms() {
            b.add_term(Monomial::from_slice(&[m.0[0] + shift]), c);
        }
        QPolynomial(b.finish())
    }

    /// The same polynomial as a series over `table`, truncated by its q cap.
    pub fn embed(&self, table: &Arc<VarTable>) -> Series {
        let q = table.index("q").expect("table has q");
        let terms = self.0.terms().map(|(m, c)| {
            let mut mono = Monomial::one(table.len());
            mono.0[q] = m.0[0];
            (mono, c.clone())
        });
        Series::from_terms(table, terms).expect("arity matches")
    }
}

/// `[n choose k]_q`, zero when `k > n`.
///
/// Built from `[n, k] = [n-1, k-1] + q^k [n-1, k]` with a process-wide memo.
pub fn q_binomial(n: u32, k: u32) -> QPolynomial {
    static MEMO: OnceLock<Mutex<HashMap<(u32, u32), QPolynomial>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if k > n {
        return QPolynomial::zero();
    }
    if k == 0 || k == n {
        return QPolynomial::from_coeffs(&[1]);
    }
    if let Some(p) = memo.lock().expect("memo lock").get(&(n, k)) {
        return p.clone();
    }
    let value = q_binomial(n - 1, k - 1).shifted_add(&q_binomial(n - 1, k), k);
    memo.lock().expect("memo lock").insert((n, k), value.clone());
    value
}
