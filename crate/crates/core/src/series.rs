//! Sparse multivariate formal power series with exact rational coefficients,
//! truncated by per-variable exponent caps.
//!
//! A [`Series`] lives over a [`VarTable`] that fixes the variable order and
//! the caps. Every stored monomial respects every cap, and no stored
//! coefficient is zero. Since exponents are nonnegative and only add under
//! multiplication, discarding out-of-cap monomials is a ring homomorphism onto
//! the quotient by the cap ideal: every in-cap coefficient is exact.
//!
//! `x` and `q` are the grading variables and must be capped whenever they are
//! present. All other variables are uncapped by default, which keeps the
//! substitutions `r ↦ 1` and `r ↦ q^j r` sound on any series.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::rational::Coeff;

pub type Exponents = SmallVec<[u32; 8]>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series are defined over different variable tables")]
    TableMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("grading variable `{0}` must be present and carry a cap")]
    UncappedGradingVariable(String),
    #[error("cannot invert a series with zero constant term")]
    ZeroConstantTerm,
    #[error(
        "cannot invert: monomial `{0}` contains no capped variable, so the inverse has infinitely many in-cap terms"
    )]
    NotNilpotent(String),
    #[error("cannot substitute into capped variable `{0}`")]
    CappedSubstitution(String),
    #[error("monomial `{0}` lies outside the truncation caps")]
    OutOfCaps(String),
    #[error("monomial has {got} exponents, table has {expected} variables")]
    Arity { expected: usize, got: usize },
    #[error("caps of the target table must be no larger than the source caps")]
    CapsNotSmaller,
    #[error("malformed series document: {0}")]
    Malformed(String),
}

/// Ordered variable names plus their exponent caps (`None` = uncapped).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarTable {
    names: Vec<String>,
    caps: Vec<Option<u32>>,
}

impl VarTable {
    pub fn new<S: AsRef<str>>(names: &[S], caps: &[(&str, u32)]) -> Result<VarTable, SeriesError> {
        let names: Vec<String> = names.iter().map(|n| n.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(SeriesError::DuplicateVariable(n.clone()));
            }
        }
        let mut cap_vec = vec![None; names.len()];
        for (name, cap) in caps {
            let idx =
                names.iter().position(|n| n == name).ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))?;
            cap_vec[idx] = Some(*cap);
        }
        let table = VarTable { names, caps: cap_vec };
        for g in ["x", "q"] {
            if let Some(i) = table.index(g) {
                if table.caps[i].is_none() {
                    return Err(SeriesError::UncappedGradingVariable(g.to_string()));
                }
            }
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, SeriesError> {
        self.index(name).ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))
    }

    pub fn cap(&self, idx: usize) -> Option<u32> {
        self.caps[idx]
    }

    pub fn cap_of(&self, name: &str) -> Option<u32> {
        self.index(name).and_then(|i| self.caps[i])
    }

    pub fn caps(&self) -> &[Option<u32>] {
        &self.caps
    }

    pub fn is_capped(&self, idx: usize) -> bool {
        self.caps[idx].is_some()
    }

    /// Same variables, different caps.
    pub fn with_caps(&self, caps: &[(&str, u32)]) -> Result<VarTable, SeriesError> {
        VarTable::new(&self.names, caps)
    }

    pub fn in_caps(&self, exps: &[u32]) -> bool {
        exps.iter().zip(&self.caps).all(|(e, c)| c.is_none_or(|c| *e <= c))
    }

    pub(crate) fn render_monomial(&self, exps: &[u32]) -> String {
        let parts: Vec<String> =
            exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| format!("{}^{}", self.names[i], e)).collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Exponent vector aligned with the owning table's variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Exponents);

impl Monomial {
    pub fn one(n: usize) -> Monomial {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(exps: &[u32]) -> Monomial {
        Monomial(SmallVec::from_slice(exps))
    }

    /// Builds a monomial from `(name, exponent)` pairs; absent variables get 0.
    pub fn from_pairs(table: &VarTable, pairs: &[(&str, u32)]) -> Result<Monomial, SeriesError> {
        let mut m = Monomial::one(table.len());
        for (name, e) in pairs {
            let idx = table.require(name)?;
            m.0[idx] += e;
        }
        Ok(m)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|e| *e == 0)
    }
}

/// Substitution `r ↦ q^shift · r^(keep as 0/1)` on one variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSubst {
    pub var: usize,
    pub shift: u32,
    pub keep: bool,
}

/// The two substitutions a functional equation performs on a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// `r ↦ q^j r`
    Shift(u32),
    /// `r ↦ 1`
    One,
}

#[derive(Debug, Clone)]
pub struct Series {
    table: Arc<VarTable>,
    terms: BTreeMap<Monomial, Coeff>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.same_table(other) && self.terms == other.terms
    }
}

impl Eq for Series {}

impl Series {
    pub fn zero(table: &Arc<VarTable>) -> Series {
        Series { table: Arc::clone(table), terms: BTreeMap::new() }
    }

    pub fn one(table: &Arc<VarTable>) -> Series {
        Series::constant(table, Coeff::ONE)
    }

    pub fn constant(table: &Arc<VarTable>, c: Coeff) -> Series {
        let mut s = Series::zero(table);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(table.len()), c);
        }
        s
    }

    pub fn int(table: &Arc<VarTable>, c: i64) -> Series {
        Series::constant(table, Coeff::from(c))
    }

    /// The single variable `name`, or zero if its cap is 0.
    pub fn var(table: &Arc<VarTable>, name: &str) -> Result<Series, SeriesError> {
        let m = Monomial::from_pairs(table, &[(name, 1)])?;
        Ok(Series::term(table, m, Coeff::ONE))
    }

    /// `c · m`, truncated to zero when `m` is out of caps.
    pub fn term(table: &Arc<VarTable>, m: Monomial, c: Coeff) -> Series {
        let mut s = Series::zero(table);
        if !c.is_zero() && table.in_caps(&m.0) {
            s.terms.insert(m, c);
        }
        s
    }

    /// `c · Π name^e`, truncated.
    pub fn monomial(table: &Arc<VarTable>, pairs: &[(&str, u32)], c: Coeff) -> Result<Series, SeriesError> {
        Ok(Series::term(table, Monomial::from_pairs(table, pairs)?, c))
    }

    /// Sums duplicate monomials, drops zeros and out-of-cap terms.
    pub fn from_terms<I>(table: &Arc<VarTable>, terms: I) -> Result<Series, SeriesError>
    where
        I: IntoIterator<Item = (Monomial, Coeff)>,
    {
        let mut b = SeriesBuilder::new(table);
        for (m, c) in terms {
            if m.0.len() != table.len() {
                return Err(SeriesError::Arity { expected: table.len(), got: m.0.len() });
            }
            b.add_term(m, &c);
        }
        Ok(b.finish())
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn same_table(&self, other: &Series) -> bool {
        Arc::ptr_eq(&self.table, &other.table) || *self.table == *other.table
    }

    fn check_table(&self, other: &Series) -> Result<(), SeriesError> {
        if self.same_table(other) {
            Ok(())
        } else {
            Err(SeriesError::TableMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn constant_term(&self) -> Coeff {
        self.terms.get(&Monomial::one(self.table.len())).cloned().unwrap_or(Coeff::ZERO)
    }

    pub fn add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_table(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            merge_into(&mut terms, m, c);
        }
        Ok(Series { table: Arc::clone(&self.table), terms })
    }

    pub fn sub(&self, other: &Series) -> Result<Series, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, k: &Coeff) -> Series {
        if k.is_zero() {
            return Series::zero(&self.table);
        }
        self.map_coeffs(|c| c * k)
    }

    fn map_coeffs(&self, f: impl Fn(&Coeff) -> Coeff) -> Series {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect();
        Series { table: Arc::clone(&self.table), terms }
    }

    pub fn mul(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_table(other)?;
        let mut b = SeriesBuilder::new(&self.table);
        b.add_product(self, other);
        Ok(b.finish())
    }

    pub fn pow(&self, n: u32) -> Series {
        let mut acc = Series::one(&self.table);
        for _ in 0..n {
            acc = acc.mul(self).expect("same table");
        }
        acc
    }

    /// Multiplies by the monomial `m` (shifting every exponent), truncating.
    pub fn mul_monomial(&self, m: &Monomial) -> Series {
        let mut terms = BTreeMap::new();
        for (mono, c) in &self.terms {
            let exps: Exponents = mono.0.iter().zip(&m.0).map(|(a, b)| a + b).collect();
            if self.table.in_caps(&exps) {
                terms.insert(Monomial(exps), c.clone());
            }
        }
        Series { table: Arc::clone(&self.table), terms }
    }

    /// Multiplicative inverse within the caps, by geometric iteration.
    ///
    /// Writes `a = c (1 - u)` and sums `u^k / c` until the power vanishes.
    /// Requires a nonzero constant term `c`, and every other monomial must
    /// contain a capped variable so that `u` is nilpotent after truncation.
    pub fn invert(&self) -> Result<Series, SeriesError> {
        let c = self.constant_term();
        let c_inv = c.recip().ok_or(SeriesError::ZeroConstantTerm)?;
        for m in self.terms.keys() {
            if m.is_one() {
                continue;
            }
            let touches_cap = m.0.iter().enumerate().any(|(i, e)| *e > 0 && self.table.is_capped(i));
            if !touches_cap {
                return Err(SeriesError::NotNilpotent(self.table.render_monomial(&m.0)));
            }
        }
        // u = 1 - a/c
        let u = Series::one(&self.table).sub(&self.scale(&c_inv))?;
        let mut sum = Series::one(&self.table);
        let mut power = Series::one(&self.table);
        loop {
            power = power.mul(&u)?;
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power)?;
        }
        Ok(sum.scale(&c_inv))
    }

    /// Replaces `var` by `q^j var` or by `1`.
    ///
    /// Refuses capped variables: a cap on `var` means terms were already
    /// discarded that `var ↦ 1` would bring back into range.
    pub fn substitute(&self, var: &str, action: Action) -> Result<Series, SeriesError> {
        let idx = self.table.require(var)?;
        if self.table.is_capped(idx) {
            return Err(SeriesError::CappedSubstitution(var.to_string()));
        }
        let sub = match action {
            Action::Shift(j) => VarSubst { var: idx, shift: j, keep: true },
            Action::One => VarSubst { var: idx, shift: 0, keep: false },
        };
        self.substitute_all(&[sub])
    }

    /// Simultaneous substitutions `r_i ↦ q^{shift_i} r_i^{keep_i}`.
    pub fn substitute_all(&self, subs: &[VarSubst]) -> Result<Series, SeriesError> {
        for s in subs {
            if self.table.is_capped(s.var) {
                return Err(SeriesError::CappedSubstitution(self.table.name(s.var).to_string()));
            }
        }
        if subs.iter().all(|s| s.keep && s.shift == 0) {
            return Ok(self.clone());
        }
        let q = self.table.require("q")?;
        Ok(self.substitute_unchecked(q, subs))
    }

    pub(crate) fn substitute_unchecked(&self, q: usize, subs: &[VarSubst]) -> Series {
        let mut b = SeriesBuilder::new(&self.table);
        for (m, c) in &self.terms {
            let mut exps = m.0.clone();
            let mut dq: u64 = 0;
            for s in subs {
                let e = exps[s.var];
                dq += u64::from(s.shift) * u64::from(e);
                if !s.keep {
                    exps[s.var] = 0;
                }
            }
            let new_q = u64::from(exps[q]) + dq;
            if new_q > u64::from(self.table.cap(q).unwrap_or(u32::MAX)) {
                continue;
            }
            exps[q] = new_q as u32;
            b.add_term(Monomial(exps), c);
        }
        b.finish()
    }

    /// Sets each listed variable to 1, capped or not.
    ///
    /// Specializing a capped variable sums only the coefficients that
    /// survived truncation; use it for reporting, not for further algebra.
    pub fn specialize_to_one(&self, vars: &[&str]) -> Result<Series, SeriesError> {
        let idxs: Vec<usize> = vars.iter().map(|v| self.table.require(v)).collect::<Result<_, _>>()?;
        let mut b = SeriesBuilder::new(&self.table);
        for (m, c) in &self.terms {
            let mut exps = m.0.clone();
            for &i in &idxs {
                exps[i] = 0;
            }
            b.add_term(Monomial(exps), c);
        }
        Ok(b.finish())
    }

    /// Coefficient of `m`; errors when `m` is outside the caps.
    pub fn coefficient(&self, m: &Monomial) -> Result<Coeff, SeriesError> {
        if m.0.len() != self.table.len() {
            return Err(SeriesError::Arity { expected: self.table.len(), got: m.0.len() });
        }
        if !self.table.in_caps(&m.0) {
            return Err(SeriesError::OutOfCaps(self.table.render_monomial(&m.0)));
        }
        Ok(self.terms.get(m).cloned().unwrap_or(Coeff::ZERO))
    }

    pub fn coefficient_of(&self, pairs: &[(&str, u32)]) -> Result<Coeff, SeriesError> {
        self.coefficient(&Monomial::from_pairs(&self.table, pairs)?)
    }

    /// The coefficient of `Π name^e` viewed as a series in the remaining
    /// variables (the listed exponents are set to 0 in the result).
    pub fn extract(&self, pairs: &[(&str, u32)]) -> Result<Series, SeriesError> {
        let fixed: Vec<(usize, u32)> =
            pairs.iter().map(|(n, e)| self.table.require(n).map(|i| (i, *e))).collect::<Result<_, _>>()?;
        for &(i, e) in &fixed {
            if self.table.cap(i).is_some_and(|c| e > c) {
                return Err(SeriesError::OutOfCaps(format!("{}^{}", self.table.name(i), e)));
            }
        }
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if fixed.iter().all(|&(i, e)| m.0[i] == e) {
                let mut exps = m.0.clone();
                for &(i, _) in &fixed {
                    exps[i] = 0;
                }
                terms.insert(Monomial(exps), c.clone());
            }
        }
        Ok(Series { table: Arc::clone(&self.table), terms })
    }

    /// Re-expresses the series over `table` (same variables, caps no larger),
    /// discarding terms beyond the new caps.
    pub fn truncate_to(&self, table: &Arc<VarTable>) -> Result<Series, SeriesError> {
        if table.names() != self.table.names() {
            return Err(SeriesError::TableMismatch);
        }
        for (new, old) in table.caps().iter().zip(self.table.caps()) {
            match (new, old) {
                (_, None) => {}
                (Some(n), Some(o)) if n <= o => {}
                _ => return Err(SeriesError::CapsNotSmaller),
            }
        }
        let terms =
            self.terms.iter().filter(|(m, _)| table.in_caps(&m.0)).map(|(m, c)| (m.clone(), c.clone())).collect();
        Ok(Series { table: Arc::clone(table), terms })
    }

    /// Smallest exponent of `var` over the support (`None` for zero).
    pub fn min_exponent(&self, var: &str) -> Result<Option<u32>, SeriesError> {
        let i = self.table.require(var)?;
        Ok(self.terms.keys().map(|m| m.0[i]).min())
    }

    pub fn max_exponent(&self, var: &str) -> Result<Option<u32>, SeriesError> {
        let i = self.table.require(var)?;
        Ok(self.terms.keys().map(|m| m.0[i]).max())
    }

    /// First monomial (in canonical order) where the two series differ.
    pub fn first_difference(&self, other: &Series) -> Option<(Monomial, Coeff, Coeff)> {
        let mut keys: Vec<&Monomial> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|m| {
            let a = self.terms.get(m).cloned().unwrap_or(Coeff::ZERO);
            let b = other.terms.get(m).cloned().unwrap_or(Coeff::ZERO);
            (a != b).then(|| (m.clone(), a, b))
        })
    }

    pub fn render_monomial(&self, m: &Monomial) -> String {
        self.table.render_monomial(&m.0)
    }

    pub fn to_document(&self) -> SeriesDocument {
        SeriesDocument {
            variables: self.table.names().to_vec(),
            caps: self
                .table
                .names()
                .iter()
                .zip(self.table.caps())
                .filter_map(|(n, c)| c.map(|c| (n.clone(), c)))
                .collect(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermDocument { exponents: m.0.to_vec(), coeff: c.to_string() })
                .collect(),
        }
    }

    pub fn from_document(doc: &SeriesDocument) -> Result<Series, SeriesError> {
        let caps: Vec<(&str, u32)> = doc.caps.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        let table = Arc::new(VarTable::new(&doc.variables, &caps)?);
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in &doc.terms {
            let c: Coeff =
                t.coeff.parse().map_err(|e: crate::rational::ParseCoeffError| SeriesError::Malformed(e.to_string()))?;
            if !table.in_caps(&t.exponents) {
                return Err(SeriesError::OutOfCaps(table.render_monomial(&t.exponents)));
            }
            terms.push((Monomial::from_slice(&t.exponents), c));
        }
        Series::from_terms(&table, terms)
    }
}

/// Canonical text form: monomials in canonical order, `coeff * x^a q^b …`,
/// joined by ` + `. The zero series prints as `0`.
impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c} * {}", self.table.render_monomial(&m.0))?;
            }
        }
        Ok(())
    }
}

/// JSON shape of a series: variable order, caps, and exponent-vector terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDocument {
    pub variables: Vec<String>,
    pub caps: BTreeMap<String, u32>,
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDocument {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

fn merge_into(terms: &mut BTreeMap<Monomial, Coeff>, m: &Monomial, c: &Coeff) {
    use std::collections::btree_map::Entry;
    match terms.entry(m.clone()) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c.clone());
            }
        }
        Entry::Occupied(mut o) => {
            let s = o.get() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// Mutable accumulator used to build series without intermediate copies.
pub struct SeriesBuilder {
    table: Arc<VarTable>,
    caps: Vec<u32>,
    map: HashMap<Monomial, Coeff>,
}

impl SeriesBuilder {
    pub fn new(table: &Arc<VarTable>) -> SeriesBuilder {
        SeriesBuilder {
            table: Arc::clone(table),
            caps: table.caps().iter().map(|c| c.unwrap_or(u32::MAX)).collect(),
            map: HashMap::new(),
        }
    }

    /// Adds `c · m`; out-of-cap monomials are ignored.
    pub fn add_term(&mut self, m: Monomial, c: &Coeff) {
        if c.is_zero() || !self.table.in_caps(&m.0) {
            return;
        }
        self.map.entry(m).and_modify(|v| *v = &*v + c).or_insert_with(|| c.clone());
    }

    pub fn add_series(&mut self, s: &Series) {
        debug_assert!(s.table.names() == self.table.names());
        for (m, c) in &s.terms {
            self.add_term(m.clone(), c);
        }
    }

    /// Adds the truncated product `a · b`.
    pub fn add_product(&mut self, a: &Series, b: &Series) {
        let n = self.table.len();
        let mut exps: Exponents = SmallVec::from_elem(0, n);
        if n == 0 {
            if let (Some(ca), Some(cb)) = (a.terms.values().next(), b.terms.values().next()) {
                self.add_term(Monomial::one(0), &(ca * cb));
            }
            return;
        }
        // b iterates in lexicographic order, so once the leading exponent
        // overflows its cap every later term of b does too
        let lead_cap = self.caps[0];
        for (ma, ca) in &a.terms {
            'inner: for (mb, cb) in &b.terms {
                if ma.0[0] + mb.0[0] > lead_cap {
                    break;
                }
                for i in 0..n {
                    let e = ma.0[i] + mb.0[i];
                    if e > self.caps[i] {
                        continue 'inner;
                    }
                    exps[i] = e;
                }
                let c = ca * cb;
                match self.map.get_mut(exps.as_slice()) {
                    Some(v) => *v = &*v + &c,
                    None => {
                        self.map.insert(Monomial(exps.clone()), c);
                    }
                }
            }
        }
    }

    pub fn finish(self) -> Series {
        let terms = self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Series { table: self.table, terms }
    }
}

impl std::borrow::Borrow<[u32]> for Monomial {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}
