//! Parallelogram (staircase) polyominoes.
//!
//! A polyomino is stored column by column: `offsets[i]` is the row of the
//! bottom cell of column `i` and `heights[i]` its number of cells. Its
//! generating function
//!
//! ```text
//! F(q,s,t,x,y) = Σ_P q^area s^left t^right x^width y^height
//! ```
//!
//! satisfies the column-by-column equation
//!
//! ```text
//! F(s) = xstyq/(1 - styq) + x·sq/((1-sq)(1-syq))·F(1) - x·sq/((1-sq)(1-syq))·F(sq)
//! ```
//!
//! which [`build_equation`] encodes with steps `{-1, 1}`.

use std::fmt;
use std::sync::Arc;

use crate::rational::Coeff;
use crate::series::{Monomial, Series, SeriesBuilder, SeriesError, VarTable};
use crate::solver::{mbm_equation, ExponentState, FunctionalEquation, SolveError};

/// Variable order of every polyomino series.
pub const VARIABLES: [&str; 5] = ["q", "s", "t", "x", "y"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyominoError {
    #[error("a polyomino needs at least one column")]
    Empty,
    #[error("{0} offsets but {1} heights")]
    Length(usize, usize),
    #[error("first column must start at row 0")]
    NotAnchored,
    #[error("column {0} has zero height")]
    EmptyColumn(usize),
    #[error("columns {0} and {} do not form a staircase", .0 + 1)]
    NotStaircase(usize),
    #[error("columns {0} and {} do not share an edge", .0 + 1)]
    Disconnected(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polyomino {
    offsets: Vec<u32>,
    heights: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolyominoStats {
    pub area: u32,
    pub left: u32,
    pub right: u32,
    pub width: u32,
    pub height: u32,
}

impl PolyominoStats {
    pub fn perimeter(&self) -> u32 {
        2 * (self.width + self.height)
    }
}

impl Polyomino {
    pub fn new(offsets: Vec<u32>, heights: Vec<u32>) -> Result<Polyomino, PolyominoError> {
        if offsets.len() != heights.len() {
            return Err(PolyominoError::Length(offsets.len(), heights.len()));
        }
        if offsets.is_empty() {
            return Err(PolyominoError::Empty);
        }
        if offsets[0] != 0 {
            return Err(PolyominoError::NotAnchored);
        }
        if let Some(i) = heights.iter().position(|h| *h == 0) {
            return Err(PolyominoError::EmptyColumn(i));
        }
        for i in 0..offsets.len() - 1 {
            let (o, h) = (offsets[i], heights[i]);
            let (o2, h2) = (offsets[i + 1], heights[i + 1]);
            if o2 < o || o2 + h2 < o + h {
                return Err(PolyominoError::NotStaircase(i));
            }
            if o2 > o + h - 1 {
                return Err(PolyominoError::Disconnected(i));
            }
        }
        Ok(Polyomino { offsets, heights })
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn stats(&self) -> PolyominoStats {
        let w = self.heights.len();
        PolyominoStats {
            area: self.heights.iter().sum(),
            left: self.heights[0],
            right: self.heights[w - 1],
            width: w as u32,
            height: self.offsets[w - 1] + self.heights[w - 1],
        }
    }

    /// The same shape reflected in the anti-diagonal through its bounding box
    /// (columns become rows).
    pub fn transpose(&self) -> Polyomino {
        let st = self.stats();
        let mut offsets = Vec::with_capacity(st.height as usize);
        let mut heights = Vec::with_capacity(st.height as usize);
        for row in 0..st.height {
            let cols: Vec<u32> = (0..st.width)
                .filter(|&c| {
                    let (o, h) = (self.offsets[c as usize], self.heights[c as usize]);
                    o <= row && row < o + h
                })
                .collect();
            offsets.push(cols[0]);
            heights.push(cols.len() as u32);
        }
        Polyomino { offsets, heights }
    }

    pub fn monomial(&self, table: &VarTable) -> Result<Monomial, SeriesError> {
        let st = self.stats();
        Monomial::from_pairs(
            table,
            &[("q", st.area), ("s", st.left), ("t", st.right), ("x", st.width), ("y", st.height)],
        )
    }
}

/// ASCII rendering, top row first, `#` for cells.
impl fmt::Display for Polyomino {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.stats();
        for row in (0..st.height).rev() {
            let line: String = self
                .offsets
                .iter()
                .zip(&self.heights)
                .map(|(&o, &h)| if o <= row && row < o + h { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Every parallelogram polyomino of area at most `max_area`, each once.
pub fn enumerate(max_area: u32) -> Vec<Polyomino> {
    fn extend(offsets: &mut Vec<u32>, heights: &mut Vec<u32>, area: u32, max_area: u32, out: &mut Vec<Polyomino>) {
        out.push(Polyomino { offsets: offsets.clone(), heights: heights.clone() });
        let (o, h) = (*offsets.last().unwrap(), *heights.last().unwrap());
        let top = o + h;
        for o2 in o..top {
            // the new column must reach at least the current top
            let min_h = top - o2;
            for h2 in min_h..=max_area.saturating_sub(area) {
                offsets.push(o2);
                heights.push(h2);
                extend(offsets, heights, area + h2, max_area, out);
                offsets.pop();
                heights.pop();
            }
        }
    }
    let mut out = Vec::new();
    for h in 1..=max_area {
        extend(&mut vec![0], &mut vec![h], h, max_area, &mut out);
    }
    out
}

pub fn table(x_cap: u32, q_cap: u32) -> Result<Arc<VarTable>, SeriesError> {
    Ok(Arc::new(VarTable::new(&VARIABLES, &[("x", x_cap), ("q", q_cap)])?))
}

/// `(e, f, g)` with `F(s) = x e(s) + x f(s) F(1) + x g(s) F(qs)`.
pub fn mbm_parts(table: &Arc<VarTable>) -> Result<(Series, Series, Series), SeriesError> {
    let one = Series::one(table);
    let q = Series::var(table, "q")?;
    let s = Series::var(table, "s")?;
    let t = Series::var(table, "t")?;
    let y = Series::var(table, "y")?;
    let styq = s.mul(&t)?.mul(&y)?.mul(&q)?;
    let e = styq.mul(&one.sub(&styq)?.invert()?)?;
    let sq = s.mul(&q)?;
    let denom = one.sub(&sq)?.mul(&one.sub(&sq.mul(&y)?)?)?;
    let f = sq.mul(&denom.invert()?)?;
    let g = f.neg();
    Ok((e, f, g))
}

/// The polyomino equation over `[q, s, t, x, y]`; `x` caps the width and
/// `q` the area, and every coefficient with area ≤ the q cap is exact.
pub fn build_equation(x_cap: u32, q_cap: u32) -> Result<FunctionalEquation, SolveError> {
    let t = table(x_cap, q_cap)?;
    let (e, f, g) = mbm_parts(&t)?;
    mbm_equation(&t, "s", &e, &f, &g)
}

/// `Σ_P q^a s^l t^r x^w y^h` over enumerated polyominoes, truncated by the
/// table's caps.
pub fn brute_force_series(table: &Arc<VarTable>) -> Result<Series, SeriesError> {
    let q_cap = table.cap_of("q").expect("q is capped");
    let mut b = SeriesBuilder::new(table);
    for p in enumerate(q_cap) {
        b.add_term(p.monomial(table)?, &Coeff::ONE);
    }
    Ok(b.finish())
}

/// The coefficient of `x^{n+1} t^m` in `F`, as a series in `q, s, y`:
///
/// ```text
/// Σ_{J ∈ {-1,1}^n} (-1)^{#1s in J} (y q^{a_{n+1}+1} s^{b_{n+1}})^m
///     Π_k q^{a_k+1} s^{b_k} / ((1 - q^{a_k+1} s^{b_k})(1 - q^{a_k+1} s^{b_k} y))
/// ```
pub fn coefficient_xt(n: u32, m: u32, table: &Arc<VarTable>) -> Result<Series, SeriesError> {
    let one = Series::one(table);
    let y = Series::var(table, "y")?;
    // q^{a+1} s^b
    let block = |st: &ExponentState| -> Result<Series, SeriesError> {
        let pairs = [("q", st.a[0] + 1), ("s", u32::from(st.b[0]))];
        Series::monomial(table, &pairs, Coeff::ONE)
    };
    let mut total = SeriesBuilder::new(table);
    for bits in 0u64..(1u64 << n) {
        let seq: Vec<i32> = (0..n).map(|k| if bits >> k & 1 == 1 { 1 } else { -1 }).collect();
        let ones = seq.iter().filter(|&&j| j == 1).count();
        let mut state = ExponentState::initial(1);
        let mut prod = if ones % 2 == 0 { one.clone() } else { one.neg() };
        for j in &seq {
            let b = block(&state)?;
            let denom = one.sub(&b)?.mul(&one.sub(&b.mul(&y)?)?)?;
            prod = prod.mul(&b)?.mul(&denom.invert()?)?;
            state = state.update(&[*j]);
        }
        let last = y.mul(&block(&state)?)?.pow(m);
        total.add_product(&prod, &last);
    }
    Ok(total.finish())
}

/// Number of polyominoes with each half-perimeter `w + h`, from a list.
pub fn half_perimeter_counts(polys: &[Polyomino], max_half: u32) -> Vec<u64> {
    let mut counts = vec![0u64; max_half as usize + 1];
    for p in polys {
        let st = p.stats();
        let n = st.width + st.height;
        if n <= max_half {
            counts[n as usize] += 1;
        }
    }
    counts
}

/// `Σ_{w+h=n}` of the coefficients of `x^w y^h` after setting `q=s=t=1`.
pub fn half_perimeter_counts_from_series(f: &Series, max_half: u32) -> Result<Vec<Coeff>, SeriesError> {
    let flat = f.specialize_to_one(&["q", "s", "t"])?;
    let t = flat.table();
    let (xi, yi) = (t.require("x")?, t.require("y")?);
    let mut counts = vec![Coeff::ZERO; max_half as usize + 1];
    for (m, c) in flat.terms() {
        let n = m.0[xi] + m.0[yi];
        if n <= max_half {
            counts[n as usize] = &counts[n as usize] + c;
        }
    }
    Ok(counts)
}
