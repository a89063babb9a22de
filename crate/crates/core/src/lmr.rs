//! (L)(M)(R)-words: 321-avoiding permutations of `1..=L+M+R` in which the
//! low block `1..=L` and the high block `L+M+1..=L+M+R` are increasing and
//! every low value precedes every high value.
//!
//! Statistics (𝕄 = middle block, ℝ = high block):
//!
//! * `inversions`: pairs `i < j` with `w_i > w_j`,
//! * 𝕄-descents: positions `i` (1-based among the 𝕄 values in word order)
//!   where the `i`-th 𝕄 value exceeds the `(i+1)`-st,
//! * `alpha`: 𝕄's after the last 𝕄-descent and before the leftmost ℝ,
//! * `beta`: ℝ's before the last 𝕄,
//! * `gamma`: 𝕄's after the leftmost ℝ.
//!
//! `G = F₀ + F₁` is the generating function `Σ x^M q^ℓ r^α s^β t^γ` over
//! words with at least two 𝕄-descents, split by `γ = 0` (F₀) and `γ ≥ 1`
//! (F₁). Both parts satisfy functional equations built here.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::qcomb::q_binomial;
use crate::rational::Coeff;
use crate::series::{Monomial, Series, SeriesBuilder, SeriesError, VarTable};
use crate::solver::{mbm_equation, FunctionalEquation, SolveError, StepSpec};

/// Variable order of every (L)(M)(R) series.
pub const VARIABLES: [&str; 5] = ["x", "q", "r", "s", "t"];

/// Largest word length [`enumerate`] accepts.
pub const MAX_WORD_LEN: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LmrError {
    #[error("L and R must be positive")]
    EmptyBlock,
    #[error("word is not a permutation of 1..={0}")]
    NotPermutation(u32),
    #[error("word contains a 321 pattern")]
    Contains321,
    #[error("low values are out of order")]
    LowBlockOrder,
    #[error("high values are out of order")]
    HighBlockOrder,
    #[error("a high value precedes a low value")]
    HighBeforeLow,
    #[error("words of length {0} exceed the enumeration limit {MAX_WORD_LEN}")]
    TooLarge(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LmrWord {
    l: u32,
    m: u32,
    r: u32,
    word: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmrStats {
    pub n: u32,
    pub m: u32,
    pub inversions: u32,
    /// 1-based 𝕄-descent positions.
    pub descents: Vec<u32>,
    pub alpha: u32,
    pub beta: u32,
    pub gamma: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    Low,
    Mid,
    High,
}

fn has_321(word: &[u32]) -> bool {
    // largest value that already has a larger value to its left
    let mut max_seen = 0;
    let mut max_middle = 0;
    for &v in word {
        if v < max_middle {
            return true;
        }
        if v < max_seen {
            max_middle = max_middle.max(v);
        }
        max_seen = max_seen.max(v);
    }
    false
}

impl LmrWord {
    pub fn new(l: u32, m: u32, r: u32, word: Vec<u32>) -> Result<LmrWord, LmrError> {
        if l == 0 || r == 0 {
            return Err(LmrError::EmptyBlock);
        }
        let n = l + m + r;
        let mut seen = vec![false; n as usize + 1];
        if word.len() != n as usize {
            return Err(LmrError::NotPermutation(n));
        }
        for &v in &word {
            if v == 0 || v > n || seen[v as usize] {
                return Err(LmrError::NotPermutation(n));
            }
            seen[v as usize] = true;
        }
        let w = LmrWord { l, m, r, word };
        let lows: Vec<u32> = w.word.iter().copied().filter(|&v| v <= l).collect();
        if lows.windows(2).any(|p| p[0] > p[1]) {
            return Err(LmrError::LowBlockOrder);
        }
        let highs: Vec<u32> = w.word.iter().copied().filter(|&v| v > l + m).collect();
        if highs.windows(2).any(|p| p[0] > p[1]) {
            return Err(LmrError::HighBlockOrder);
        }
        let last_low = w.word.iter().rposition(|&v| v <= l).expect("l ≥ 1");
        let first_high = w.word.iter().position(|&v| v > l + m).expect("r ≥ 1");
        if first_high < last_low {
            return Err(LmrError::HighBeforeLow);
        }
        if has_321(&w.word) {
            return Err(LmrError::Contains321);
        }
        Ok(w)
    }

    pub fn word(&self) -> &[u32] {
        &self.word
    }

    pub fn blocks(&self) -> (u32, u32, u32) {
        (self.l, self.m, self.r)
    }

    fn block(&self, v: u32) -> Block {
        if v <= self.l {
            Block::Low
        } else if v <= self.l + self.m {
            Block::Mid
        } else {
            Block::High
        }
    }

    /// The word as letters `L`, `M`, `R`.
    pub fn letters(&self) -> String {
        self.word
            .iter()
            .map(|&v| match self.block(v) {
                Block::Low => 'L',
                Block::Mid => 'M',
                Block::High => 'R',
            })
            .collect()
    }

    pub fn stats(&self) -> LmrStats {
        let w = &self.word;
        let mut inversions = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                if w[i] > w[j] {
                    inversions += 1;
                }
            }
        }
        // positions (in the word) of the 𝕄 values, in order
        let mid_pos: Vec<usize> = (0..w.len()).filter(|&i| self.block(w[i]) == Block::Mid).collect();
        let descents: Vec<u32> =
            (1..mid_pos.len()).filter(|&i| w[mid_pos[i - 1]] > w[mid_pos[i]]).map(|i| i as u32).collect();
        let first_high = w.iter().position(|&v| self.block(v) == Block::High).expect("r ≥ 1");
        let alpha = match descents.last() {
            Some(&d) => mid_pos[d as usize..].iter().filter(|&&p| p < first_high).count() as u32,
            None => 0,
        };
        let beta = match mid_pos.last() {
            Some(&last) => w[..last].iter().filter(|&&v| self.block(v) == Block::High).count() as u32,
            None => 0,
        };
        let gamma = mid_pos.iter().filter(|&&p| p > first_high).count() as u32;
        LmrStats { n: self.l + self.m + self.r, m: self.m, inversions, descents, alpha, beta, gamma }
    }

    /// Every valid (L)(M+1)(R)-word obtained by inserting the new largest
    /// 𝕄 value `L+M+1` somewhere (high values shift up by one).
    pub fn children(&self) -> Vec<LmrWord> {
        let new = self.l + self.m + 1;
        let lifted: Vec<u32> = self.word.iter().map(|&v| if v >= new { v + 1 } else { v }).collect();
        (0..=lifted.len())
            .filter_map(|pos| {
                let mut w = lifted.clone();
                w.insert(pos, new);
                LmrWord::new(self.l, self.m + 1, self.r, w).ok()
            })
            .collect()
    }
}

/// All (L)(M)(R)-words, each exactly once, in lexicographic order.
pub fn enumerate(l: u32, r: u32, m: u32) -> Result<Vec<LmrWord>, LmrError> {
    if l == 0 || r == 0 {
        return Err(LmrError::EmptyBlock);
    }
    let n = l + m + r;
    if n > MAX_WORD_LEN {
        return Err(LmrError::TooLarge(n));
    }

    struct Search {
        l: u32,
        m: u32,
        r: u32,
        n: u32,
        used: Vec<bool>,
        word: Vec<u32>,
        out: Vec<LmrWord>,
    }

    impl Search {
        fn go(&mut self, next_low: u32, next_high: u32, max_seen: u32, max_middle: u32) {
            if self.word.len() == self.n as usize {
                self.out.push(LmrWord { l: self.l, m: self.m, r: self.r, word: self.word.clone() });
                return;
            }
            let lows_done = next_low > self.l;
            for v in 1..=self.n {
                if self.used[v as usize] || v < max_middle {
                    continue;
                }
                if v <= self.l && v != next_low {
                    continue;
                }
                if v > self.l + self.m && (v != next_high || !lows_done) {
                    continue;
                }
                let (nl, nh) = if v <= self.l {
                    (next_low + 1, next_high)
                } else if v > self.l + self.m {
                    (next_low, next_high + 1)
                } else {
                    (next_low, next_high)
                };
                let mid = if v < max_seen { max_middle.max(v) } else { max_middle };
                self.used[v as usize] = true;
                self.word.push(v);
                self.go(nl, nh, max_seen.max(v), mid);
                self.word.pop();
                self.used[v as usize] = false;
            }
        }
    }

    let mut s = Search { l, m, r, n, used: vec![false; n as usize + 1], word: Vec::new(), out: Vec::new() };
    s.go(1, l + m + 1, 0, 0);
    Ok(s.out)
}

pub fn table(x_cap: u32, q_cap: u32) -> Result<Arc<VarTable>, SeriesError> {
    Ok(Arc::new(VarTable::new(&VARIABLES, &[("x", x_cap), ("q", q_cap)])?))
}

fn mono(table: &Arc<VarTable>, pairs: &[(&str, u32)]) -> Result<Series, SeriesError> {
    Series::monomial(table, pairs, Coeff::ONE)
}

/// `[L+i, L]_q ([m, i]_q - 1)` for the single-descent words feeding E₀/E₁.
fn single_descent_weight(table: &Arc<VarTable>, l: u32, m: u32, i: u32) -> Result<Series, SeriesError> {
    let arrange = q_binomial(m, i).embed(table).sub(&Series::one(table))?;
    q_binomial(l + i, l).embed(table).mul(&arrange)
}

/// `E₀(r) = Σ_m Σ_{i=1}^{m-1} x^{m+1} [L+i, L]_q ([m, i]_q - 1) Σ_{k=1}^{m-i-1} (qr)^k`,
/// with `m` running up to the x cap.
pub fn e0(l: u32, table: &Arc<VarTable>) -> Result<Series, SeriesError> {
    let x_cap = table.cap_of("x").expect("x is capped");
    let mut out = SeriesBuilder::new(table);
    for m in 0..x_cap {
        for i in 1..m {
            let mut inner = SeriesBuilder::new(table);
            for k in 1..(m - i) {
                inner.add_term(Monomial::from_pairs(table, &[("q", k), ("r", k)])?, &Coeff::ONE);
            }
            let inner = inner.finish();
            if inner.is_zero() {
                continue;
            }
            let w = single_descent_weight(table, l, m, i)?;
            out.add_series(&w.mul(&inner)?.mul(&mono(table, &[("x", m + 1)])?)?);
        }
    }
    Ok(out.finish())
}

/// `(e, f, g)` for `F₀(r) = x e(r) + x f(r) F₀(1) + x g(r) F₀(qr)`:
/// `x e = E₀/(1 - xr)`, `f = qr/((1-qr)(1-xr))`, `g = -f`.
pub fn f0_parts(l: u32, table: &Arc<VarTable>) -> Result<(Series, Series, Series), SeriesError> {
    let one = Series::one(table);
    let xr = mono(table, &[("x", 1), ("r", 1)])?;
    let qr = mono(table, &[("q", 1), ("r", 1)])?;
    let inv_xr = one.sub(&xr)?.invert()?;
    // E₀ has x-order ≥ 1, so E₀/x is a shift of its exponents
    let e0 = e0(l, table)?;
    let e0_over_x = Series::from_terms(
        table,
        e0.terms().map(|(m, c)| {
            let mut m = m.clone();
            m.0[0] -= 1;
            (m, c.clone())
        }),
    )?;
    let e = e0_over_x.mul(&inv_xr)?;
    let f = qr.mul(&one.sub(&qr)?.invert()?)?.mul(&inv_xr)?;
    let g = f.neg();
    Ok((e, f, g))
}

/// The F₀ equation over `[x, q, r, s, t]` with steps `{-1, 1}` on `r`.
/// `R` does not enter F₀.
pub fn build_f0(l: u32, x_cap: u32, q_cap: u32) -> Result<FunctionalEquation, SolveError> {
    let t = table(x_cap, q_cap)?;
    let (e, f, g) = f0_parts(l, &t)?;
    mbm_equation(&t, "r", &e, &f, &g)
}

/// `E₁(r,s,t) = x t (Σ_{b=1}^R (qs)^b) F₀(r) + Σ_m Σ_{i=1}^{m-1} x^{m+1}
/// [L+i, L]_q ([m, i]_q - 1) Σ_{k=1}^{m-i-1} Σ_{c=1}^{k} Σ_{b=1}^{R}
/// q^{k+b+c-1} r^{k-c} s^b t^c [b+c-2, b-1]_q`.
pub fn e1(l: u32, r: u32, f0: &Series, table: &Arc<VarTable>) -> Result<Series, SeriesError> {
    let x_cap = table.cap_of("x").expect("x is capped");
    let mut qs_sum = SeriesBuilder::new(table);
    for b in 1..=r {
        qs_sum.add_term(Monomial::from_pairs(table, &[("q", b), ("s", b)])?, &Coeff::ONE);
    }
    let lead = mono(table, &[("x", 1), ("t", 1)])?.mul(&qs_sum.finish())?.mul(f0)?;

    let mut out = SeriesBuilder::new(table);
    out.add_series(&lead);
    for m in 0..x_cap {
        for i in 1..m {
            let mut inner = SeriesBuilder::new(table);
            for k in 1..(m - i) {
                for c in 1..=k {
                    for b in 1..=r {
                        let mon = mono(table, &[("q", k + b + c - 1), ("r", k - c), ("s", b), ("t", c)])?;
                        inner.add_product(&mon, &q_binomial(b + c - 2, b - 1).embed(table));
                    }
                }
            }
            let inner = inner.finish();
            if inner.is_zero() {
                continue;
            }
            let w = single_descent_weight(table, l, m, i)?;
            out.add_series(&w.mul(&inner)?.mul(&mono(table, &[("x", m + 1)])?)?);
        }
    }
    Ok(out.finish())
}

/// The F₁ equation with steps on `(r, s, t)`:
///
/// ```text
/// F₁(r,s,t) = E₁ + x/(1-qr) F₁(1,s,qt) - x qr/(1-qr) F₁(qr,s,qt)
///                - x t (qs)^{R+1}/(1-qs) F₁(r,1,t) + x t/(1-qs) F₁(r,qs,t)
/// ```
///
/// `f0` must be the solved F₀ over the same table.
pub fn build_f1(l: u32, r: u32, f0: &Series) -> Result<FunctionalEquation, SolveError> {
    let table = Arc::clone(f0.table());
    if table.names() != VARIABLES {
        return Err(SeriesError::TableMismatch.into());
    }
    let one = Series::one(&table);
    let qr = mono(&table, &[("q", 1), ("r", 1)])?;
    let qs = mono(&table, &[("q", 1), ("s", 1)])?;
    let t = Series::var(&table, "t")?;
    let inv_qr = one.sub(&qr)?.invert()?;
    let inv_qs = one.sub(&qs)?.invert()?;
    let steps = vec![
        StepSpec::new(vec![-1, 0, 1], inv_qr.clone()),
        StepSpec::new(vec![1, 0, 1], qr.mul(&inv_qr)?.neg()),
        StepSpec::new(vec![0, -1, 0], t.mul(&qs.pow(r + 1))?.mul(&inv_qs)?.neg()),
        StepSpec::new(vec![0, 1, 0], t.mul(&inv_qs)?),
    ];
    FunctionalEquation::new(&table, &["r", "s", "t"], e1(l, r, f0, &table)?, steps)
}

pub fn assemble_g(f0: &Series, f1: &Series) -> Result<Series, SeriesError> {
    f0.add(f1)
}

/// `Σ x^M q^ℓ r^α s^β t^γ` over words with at least two 𝕄-descents and
/// `M` up to the x cap.
pub fn brute_force_g(l: u32, r: u32, table: &Arc<VarTable>) -> Result<Series, SolveError> {
    let x_cap = table.cap_of("x").expect("x is capped");
    let mut b = SeriesBuilder::new(table);
    for m in 0..=x_cap {
        for w in enumerate(l, r, m).map_err(|e| SolveError::Series(SeriesError::Malformed(e.to_string())))? {
            let st = w.stats();
            if st.descents.len() < 2 {
                continue;
            }
            let mono = Monomial::from_pairs(
                table,
                &[("x", m), ("q", st.inversions), ("r", st.alpha), ("s", st.beta), ("t", st.gamma)],
            )?;
            b.add_term(mono, &Coeff::ONE);
        }
    }
    Ok(b.finish())
}

/// `x^{L+R} G(x, q, 1, 1, 1)` over `[x, q]` (x now marks word length),
/// obtained by specializing and multiplying by a monomial.
pub fn size_marked(g: &Series, l: u32, r: u32) -> Result<Series, SeriesError> {
    let x_cap = g.table().cap_of("x").expect("x is capped");
    let q_cap = g.table().cap_of("q").expect("q is capped");
    let target = Arc::new(VarTable::new(&["x", "q"], &[("x", x_cap + l + r), ("q", q_cap)])?);
    let flat = g.specialize_to_one(&["r", "s", "t"])?;
    let (xi, qi) = (g.table().require("x")?, g.table().require("q")?);
    let moved =
        Series::from_terms(&target, flat.terms().map(|(m, c)| (Monomial::from_slice(&[m.0[xi], m.0[qi]]), c.clone())))?;
    Ok(moved.mul_monomial(&Monomial::from_slice(&[l + r, 0])))
}

/// `Σ x^{n(w)} q^{ℓ(w)}` over words with at least two 𝕄-descents, `M ≤ m_max`.
pub fn brute_force_size_marked(l: u32, r: u32, m_max: u32, q_cap: u32) -> Result<Series, SolveError> {
    let target = Arc::new(VarTable::new(&["x", "q"], &[("x", m_max + l + r), ("q", q_cap)])?);
    let mut b = SeriesBuilder::new(&target);
    for m in 0..=m_max {
        for w in enumerate(l, r, m).map_err(|e| SolveError::Series(SeriesError::Malformed(e.to_string())))? {
            let st = w.stats();
            if st.descents.len() >= 2 {
                b.add_term(Monomial::from_slice(&[st.n, st.inversions]), &Coeff::ONE);
            }
        }
    }
    Ok(b.finish())
}

/// Largest inversion count among words with `M ≤ m_max`; a q cap at least
/// this large keeps every brute-force monomial in range.
pub fn max_inversions(l: u32, r: u32, m_max: u32) -> Result<u32, LmrError> {
    let mut best = 0;
    for m in 0..=m_max {
        for w in enumerate(l, r, m)? {
            best = best.max(w.stats().inversions);
        }
    }
    Ok(best)
}

/// Words reachable from `words` by one insertion, deduplicated.
pub fn grow(words: &[LmrWord]) -> BTreeSet<LmrWord> {
    words.iter().flat_map(|w| w.children()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourteen_letter_word_stats() {
        let w = LmrWord::new(4, 8, 2, vec![1, 2, 7, 3, 8, 4, 5, 10, 6, 12, 9, 13, 14, 11]).unwrap();
        assert_eq!(w.letters(), "LLMLMLMMMMMRRM");
        let st = w.stats();
        // standard inversion count of this word
        assert_eq!(st.inversions, 13);
        assert_eq!(st.descents, vec![2, 4, 6]);
        assert_eq!((st.alpha, st.beta, st.gamma), (1, 2, 1));
        assert!(enumerate(4, 2, 8).unwrap().contains(&w));
    }

    #[test]
    fn identity_word() {
        let w = LmrWord::new(2, 3, 2, (1..=7).collect()).unwrap();
        let st = w.stats();
        assert_eq!(st.inversions, 0);
        assert!(st.descents.is_empty());
        assert_eq!((st.alpha, st.beta, st.gamma), (0, 0, 0));
    }

    #[test]
    fn small_word() {
        let st = LmrWord::new(1, 2, 1, vec![1, 3, 2, 4]).unwrap().stats();
        assert_eq!(st.inversions, 1);
        assert_eq!(st.descents, vec![1]);
    }

    #[test]
    fn invalid_words() {
        assert_eq!(LmrWord::new(1, 2, 1, vec![1, 4, 3, 2]), Err(LmrError::Contains321));
        assert_eq!(LmrWord::new(1, 1, 1, vec![1, 1, 2]), Err(LmrError::NotPermutation(3)));
        assert_eq!(LmrWord::new(2, 0, 1, vec![2, 1, 3]), Err(LmrError::LowBlockOrder));
        assert_eq!(LmrWord::new(1, 0, 2, vec![1, 3, 2]), Err(LmrError::HighBlockOrder));
        assert_eq!(LmrWord::new(1, 1, 1, vec![3, 1, 2]), Err(LmrError::HighBeforeLow));
        assert_eq!(LmrWord::new(0, 1, 1, vec![1, 2]), Err(LmrError::EmptyBlock));
    }

    #[test]
    fn enumerate_matches_filter() {
        fn permutations(n: u32) -> Vec<Vec<u32>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n);
                    out.push(q);
                }
            }
            out
        }
        for (l, m, r) in [(1, 1, 1), (1, 0, 1), (2, 2, 1), (1, 3, 2), (2, 3, 2)] {
            let mut expect: Vec<LmrWord> =
                permutations(l + m + r).into_iter().filter_map(|w| LmrWord::new(l, m, r, w).ok()).collect();
            expect.sort();
            assert_eq!(enumerate(l, r, m).unwrap(), expect, "({l})({m})({r})");
        }
        assert_eq!(enumerate(3, 2, 0).unwrap().len(), 1);
        assert_eq!(enumerate(1, 1, 20), Err(LmrError::TooLarge(22)));
    }

    #[test]
    fn e0_starts_at_x4() {
        let t = table(8, 20).unwrap();
        let e = e0(1, &t).unwrap();
        assert_eq!(e.min_exponent("x").unwrap(), Some(4));
    }
}
