//! Functional equations of the form
//!
//! ```text
//! F(r) = e(r) + Σ_{j ∈ 𝒥} x · f_j(r) · F((q^{j_1} r_1)^{ε(j_1)}, …, (q^{j_m} r_m)^{ε(j_m)})
//! ```
//!
//! where `ε(-1) = 0` and `ε(j) = 1` otherwise, and three ways to solve them:
//!
//! * [`solve_sequence_sum`]: the explicit sum over finite step sequences
//!   `J = (j_1, …, j_n)`, each contributing
//!   `x^n · e(state_{n+1}) · Π_k f_{j_k}(state_k)`,
//! * [`solve_fixed_point`]: plain iteration of the equation from `F = 0`,
//! * [`solve_mbm`]: the closed form for the single-variable shape
//!   `F(s) = x e(s) + x f(s) F(1) + x g(s) F(qs)`.
//!
//! The factor `x` on each step term is supplied by the solver and never
//! folded into `f_j`, so every application of the equation raises the
//! x-order by at least one and both the sum and the iteration are finite
//! under the x cap.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::series::{Monomial, Series, SeriesBuilder, SeriesError, VarSubst, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("equation needs capped grading variables `x` and `q`")]
    MissingGrading,
    #[error("`{0}` cannot be a substitution variable")]
    BadSubstVar(String),
    #[error("substitution variable `{0}` listed twice")]
    DuplicateSubstVar(String),
    #[error("step {index} has {got} entries, expected {expected}")]
    StepArity { index: usize, expected: usize, got: usize },
    #[error("step {index} has entry {value} < -1")]
    StepEntry { index: usize, value: i32 },
    #[error("step tuple {0:?} appears twice")]
    DuplicateStep(Vec<i32>),
    #[error("fixed-point iteration did not settle after {0} rounds")]
    NoFixedPoint(usize),
    #[error("closed form needs exactly one substitution variable and steps {{-1, 1}}")]
    NotMbmShape,
}

/// One term `x · f_j(r) · F(…)` of the equation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSpec {
    pub j: Vec<i32>,
    pub f: Series,
}

impl StepSpec {
    pub fn new(j: Vec<i32>, f: Series) -> StepSpec {
        StepSpec { j, f }
    }

    /// The substitution this step performs on `F`'s arguments.
    fn substitutions(&self, subst_vars: &[usize]) -> Vec<VarSubst> {
        subst_vars
            .iter()
            .zip(&self.j)
            .map(|(&var, &j)| {
                if j < 0 {
                    VarSubst { var, shift: 0, keep: false }
                } else {
                    VarSubst { var, shift: j as u32, keep: true }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEquation {
    table: Arc<VarTable>,
    subst_vars: Vec<usize>,
    e: Series,
    steps: Vec<StepSpec>,
    x: usize,
    q: usize,
}

impl FunctionalEquation {
    pub fn new(
        table: &Arc<VarTable>,
        subst_vars: &[&str],
        e: Series,
        steps: Vec<StepSpec>,
    ) -> Result<FunctionalEquation, SolveError> {
        let x = table.index("x").ok_or(SolveError::MissingGrading)?;
        let q = table.index("q").ok_or(SolveError::MissingGrading)?;
        if !table.is_capped(x) || !table.is_capped(q) {
            return Err(SolveError::MissingGrading);
        }
        let mut vars = Vec::with_capacity(subst_vars.len());
        for name in subst_vars {
            let idx = table.require(name)?;
            if idx == x || idx == q || table.is_capped(idx) {
                return Err(SolveError::BadSubstVar(name.to_string()));
            }
            if vars.contains(&idx) {
                return Err(SolveError::DuplicateSubstVar(name.to_string()));
            }
            vars.push(idx);
        }
        let probe = Series::zero(table);
        if !e.same_table(&probe) {
            return Err(SeriesError::TableMismatch.into());
        }
        for (index, step) in steps.iter().enumerate() {
            if step.j.len() != vars.len() {
                return Err(SolveError::StepArity { index, expected: vars.len(), got: step.j.len() });
            }
            if let Some(&value) = step.j.iter().find(|&&v| v < -1) {
                return Err(SolveError::StepEntry { index, value });
            }
            if steps[..index].iter().any(|s| s.j == step.j) {
                return Err(SolveError::DuplicateStep(step.j.clone()));
            }
            if !step.f.same_table(&probe) {
                return Err(SeriesError::TableMismatch.into());
            }
        }
        Ok(FunctionalEquation { table: Arc::clone(table), subst_vars: vars, e, steps, x, q })
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn subst_vars(&self) -> Vec<&str> {
        self.subst_vars.iter().map(|&i| self.table.name(i)).collect()
    }

    pub fn e(&self) -> &Series {
        &self.e
    }

    pub fn steps(&self) -> &[StepSpec] {
        &self.steps
    }

    pub fn x_cap(&self) -> u32 {
        self.table.cap(self.x).expect("x is capped")
    }

    fn x_monomial(&self) -> Monomial {
        let mut m = Monomial::one(self.table.len());
        m.0[self.x] = 1;
        m
    }
}

/// Per substitution variable `(a_i, b_i)`: after a prefix of steps, `r_i`
/// appears as `q^{a_i} r_i^{b_i}` in the next factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentState {
    pub a: Vec<u32>,
    pub b: Vec<bool>,
}

impl ExponentState {
    pub fn initial(m: usize) -> ExponentState {
        ExponentState { a: vec![0; m], b: vec![true; m] }
    }

    /// Consumes one step tuple: `-1` resets to `(0, 0)`, `j ≥ 0` adds `j` to `a_i`.
    pub fn update(&self, j: &[i32]) -> ExponentState {
        let mut next = self.clone();
        for (i, &ji) in j.iter().enumerate() {
            if ji < 0 {
                next.a[i] = 0;
                next.b[i] = false;
            } else {
                next.a[i] += ji as u32;
            }
        }
        next
    }

    fn substitutions(&self, subst_vars: &[usize]) -> Vec<VarSubst> {
        subst_vars.iter().enumerate().map(|(i, &var)| VarSubst { var, shift: self.a[i], keep: self.b[i] }).collect()
    }
}

/// `f` with every `r_i` replaced by `q^{a_i} r_i^{b_i}`.
pub fn apply_state(eq: &FunctionalEquation, f: &Series, state: &ExponentState) -> Series {
    f.substitute_unchecked(eq.q, &state.substitutions(&eq.subst_vars))
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Split the top-level branches of the sequence tree across threads.
    pub parallel: bool,
    /// Skip subtrees whose running product truncated to zero or whose
    /// x-order leaves no room for the terminal `e` factor.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { parallel: true, prune: true }
    }
}

struct SequenceWalker<'a> {
    eq: &'a FunctionalEquation,
    prune: bool,
    max_depth: u32,
    x_mono: Monomial,
    e_order: Option<u32>,
    // apply_state results keyed by (step index or usize::MAX for e, state)
    memo: HashMap<(usize, ExponentState), Series>,
}

impl<'a> SequenceWalker<'a> {
    fn new(eq: &'a FunctionalEquation, prune: bool) -> Self {
        SequenceWalker {
            eq,
            prune,
            max_depth: eq.x_cap(),
            x_mono: eq.x_monomial(),
            e_order: eq.e.min_exponent("x").expect("x in table"),
            memo: HashMap::new(),
        }
    }

    fn applied(&mut self, which: usize, state: &ExponentState) -> &Series {
        let eq = self.eq;
        self.memo.entry((which, state.clone())).or_insert_with(|| {
            let f = if which == usize::MAX { &eq.e } else { &eq.steps[which].f };
            apply_state(eq, f, state)
        })
    }

    /// Adds the contribution of the node with running product `prod` (which
    /// already carries `x^depth`) and of all its descendants.
    fn visit(&mut self, acc: &mut SeriesBuilder, state: &ExponentState, prod: &Series, depth: u32) {
        let leaf = self.applied(usize::MAX, state).clone();
        acc.add_product(prod, &leaf);
        if depth >= self.max_depth {
            return;
        }
        for idx in 0..self.eq.steps.len() {
            if let Some((child_state, child_prod)) = self.child(state, prod, idx) {
                self.visit(acc, &child_state, &child_prod, depth + 1);
            }
        }
    }

    fn child(&mut self, state: &ExponentState, prod: &Series, idx: usize) -> Option<(ExponentState, Series)> {
        let shifted = prod.mul_monomial(&self.x_mono);
        if self.prune && shifted.is_zero() {
            return None;
        }
        let factor = self.applied(idx, state);
        let next = shifted.mul(factor).expect("same table");
        if self.prune {
            // every leaf below multiplies the running product by some e(state),
            // whose x-order is at least that of e
            let order = next.min_exponent("x").expect("x in table");
            match (order, self.e_order) {
                (Some(o), Some(e)) if o + e <= self.max_depth => {}
                _ => return None,
            }
        }
        Some((state.update(&self.eq.steps[idx].j), next))
    }
}

/// Sums `x^n e(state_{n+1}) Π f_{j_k}(state_k)` over all step sequences by a
/// depth-first walk that shares prefix products between siblings.
pub fn solve_sequence_sum(eq: &FunctionalEquation, opts: SolveOptions) -> Series {
    let m = eq.subst_vars.len();
    let root = ExponentState::initial(m);
    let one = Series::one(&eq.table);

    let mut root_walker = SequenceWalker::new(eq, opts.prune);
    let mut acc = SeriesBuilder::new(&eq.table);
    let leaf = root_walker.applied(usize::MAX, &root).clone();
    acc.add_product(&one, &leaf);
    if root_walker.max_depth == 0 {
        return acc.finish();
    }

    let branch = |idx: usize| -> Series {
        let mut walker = SequenceWalker::new(eq, opts.prune);
        let mut sub = SeriesBuilder::new(&eq.table);
        if let Some((state, prod)) = walker.child(&root, &one, idx) {
            walker.visit(&mut sub, &state, &prod, 1);
        }
        sub.finish()
    };
    let parts: Vec<Series> = if opts.parallel {
        (0..eq.steps.len()).into_par_iter().map(branch).collect()
    } else {
        (0..eq.steps.len()).map(branch).collect()
    };
    for p in &parts {
        acc.add_series(p);
    }
    acc.finish()
}

/// Iterates `F ← e + Σ x f_j F(subst_j)` from `F = 0` until two consecutive
/// iterates agree.
pub fn solve_fixed_point(eq: &FunctionalEquation) -> Result<Series, SolveError> {
    let substs: Vec<Vec<VarSubst>> = eq.steps.iter().map(|s| s.substitutions(&eq.subst_vars)).collect();
    let xf: Vec<Series> = eq.steps.iter().map(|s| s.f.mul_monomial(&eq.x_monomial())).collect();
    // Each round fixes one more x-order; +2 covers the initial round and the
    // confirming round.
    let limit = eq.x_cap() as usize + 3;
    let mut current = Series::zero(&eq.table);
    for _ in 0..limit {
        let mut next = SeriesBuilder::new(&eq.table);
        next.add_series(&eq.e);
        for (f, sub) in xf.iter().zip(&substs) {
            let image = current.substitute_unchecked(eq.q, sub);
            next.add_product(f, &image);
        }
        let next = next.finish();
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SolveError::NoFixedPoint(limit))
}

/// Encodes `F(s) = x e(s) + x f(s) F(1) + x g(s) F(qs)` as a general
/// equation with steps `{-1, 1}`.
pub fn mbm_equation(
    table: &Arc<VarTable>,
    s: &str,
    e: &Series,
    f: &Series,
    g: &Series,
) -> Result<FunctionalEquation, SolveError> {
    let x = Series::var(table, "x")?;
    FunctionalEquation::new(
        table,
        &[s],
        x.mul(e)?,
        vec![StepSpec::new(vec![-1], f.clone()), StepSpec::new(vec![1], g.clone())],
    )
}

/// Closed form for `F(s) = x e(s) + x f(s) F(1) + x g(s) F(qs)`:
///
/// ```text
/// F(s) = (E(s) + E(1) G(s) - E(s) G(1)) / (1 - G(1))
/// E(s) = Σ_{n≥0} x^{n+1} g(s) g(sq) ⋯ g(sq^{n-1}) e(sq^n)
/// G(s) = Σ_{n≥0} x^{n+1} g(s) g(sq) ⋯ g(sq^{n-1}) f(sq^n)
/// ```
pub fn solve_mbm(s: &str, e: &Series, f: &Series, g: &Series) -> Result<Series, SolveError> {
    let table = Arc::clone(e.table());
    if !f.same_table(e) || !g.same_table(e) {
        return Err(SeriesError::TableMismatch.into());
    }
    let x_idx = table.index("x").ok_or(SolveError::MissingGrading)?;
    let q_idx = table.index("q").ok_or(SolveError::MissingGrading)?;
    let s_idx = table.require(s)?;
    if s_idx == x_idx || s_idx == q_idx || table.is_capped(s_idx) {
        return Err(SolveError::BadSubstVar(s.to_string()));
    }
    let n_max = table.cap(x_idx).ok_or(SolveError::MissingGrading)?;
    let shift =
        |series: &Series, n: u32| series.substitute_unchecked(q_idx, &[VarSubst { var: s_idx, shift: n, keep: true }]);
    let mut x_pow = Monomial::one(table.len());
    let mut g_prod = Series::one(&table);
    let mut big_e = SeriesBuilder::new(&table);
    let mut big_g = SeriesBuilder::new(&table);
    for n in 0..n_max {
        x_pow.0[x_idx] = n + 1;
        let weighted = g_prod.mul_monomial(&x_pow);
        if weighted.is_zero() {
            break;
        }
        big_e.add_product(&weighted, &shift(e, n));
        big_g.add_product(&weighted, &shift(f, n));
        g_prod = g_prod.mul(&shift(g, n))?;
    }
    let big_e = big_e.finish();
    let big_g = big_g.finish();
    let at_one =
        |series: &Series| series.substitute_unchecked(q_idx, &[VarSubst { var: s_idx, shift: 0, keep: false }]);
    let e1 = at_one(&big_e);
    let g1 = at_one(&big_g);
    let numer = big_e.add(&e1.mul(&big_g)?)?.sub(&big_e.mul(&g1)?)?;
    let denom = Series::one(&table).sub(&g1)?;
    debug_assert!(denom.constant_term().is_one());
    Ok(numer.mul(&denom.invert()?)?)
}

/// Convenience wrapper applying [`solve_mbm`] to an equation built by
/// [`mbm_equation`] (the `e` there already carries the factor `x`).
pub fn solve_mbm_equation(eq: &FunctionalEquation) -> Result<Series, SolveError> {
    if eq.subst_vars.len() != 1 || eq.steps.len() != 2 {
        return Err(SolveError::NotMbmShape);
    }
    let f = eq.steps.iter().find(|s| s.j == [-1]).ok_or(SolveError::NotMbmShape)?;
    let g = eq.steps.iter().find(|s| s.j == [1]).ok_or(SolveError::NotMbmShape)?;
    // the x factor of x·e(s) is removed before handing e to the closed form
    if eq.e.min_exponent("x")? == Some(0) {
        return Err(SolveError::NotMbmShape);
    }
    let e_div = divide_by_x(&eq.e, eq.x)?;
    solve_mbm(eq.table.name(eq.subst_vars[0]), &e_div, &f.f, &g.f)
}

fn divide_by_x(s: &Series, x: usize) -> Result<Series, SolveError> {
    let terms = s.terms().map(|(m, c)| {
        let mut m = m.clone();
        m.0[x] -= 1;
        (m, c.clone())
    });
    Ok(Series::from_terms(s.table(), terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Coeff;

    fn coin(n: u32) -> FunctionalEquation {
        let t = Arc::new(VarTable::new(&["x", "q", "r"], &[("x", n), ("q", n)]).unwrap());
        let one = Series::one(&t);
        FunctionalEquation::new(
            &t,
            &["r"],
            Series::var(&t, "r").unwrap(),
            vec![StepSpec::new(vec![0], one.clone()), StepSpec::new(vec![1], one)],
        )
        .unwrap()
    }

    #[test]
    fn update_state_examples() {
        let s = ExponentState::initial(1);
        assert_eq!(s.update(&[-1]), ExponentState { a: vec![0], b: vec![false] });
        let s = ExponentState { a: vec![4], b: vec![false] };
        assert_eq!(s.update(&[2]), ExponentState { a: vec![6], b: vec![false] });

        let mut states = vec![ExponentState::initial(1)];
        for j in [1, 1, -1, 1] {
            let next = states.last().unwrap().update(&[j]);
            states.push(next);
        }
        let pairs: Vec<(u32, bool)> = states.iter().map(|s| (s.a[0], s.b[0])).collect();
        assert_eq!(pairs, vec![(0, true), (1, true), (2, true), (0, false), (1, false)]);
    }

    #[test]
    fn apply_state_examples() {
        let t = Arc::new(VarTable::new(&["x", "q", "s"], &[("x", 2), ("q", 8)]).unwrap());
        let eq = FunctionalEquation::new(&t, &["s"], Series::zero(&t), vec![]).unwrap();
        let s = Series::var(&t, "s").unwrap();
        assert_eq!(apply_state(&eq, &s, &ExponentState::initial(1)), s);
        let st = ExponentState { a: vec![2], b: vec![false] };
        assert_eq!(apply_state(&eq, &s.pow(2), &st).to_string(), "1 * q^4");
        let qs = Series::var(&t, "q").unwrap().mul(&s).unwrap();
        let st = ExponentState { a: vec![1], b: vec![true] };
        assert_eq!(apply_state(&eq, &qs, &st).to_string(), "1 * q^2 s^1");
    }

    #[test]
    fn coin_model_binomial_rows() {
        let eq = coin(5);
        let f = solve_sequence_sum(&eq, SolveOptions::default());
        // x^3 row: 1, 3, 3, 1
        for (h, expect) in [1, 3, 3, 1].into_iter().enumerate() {
            let c = f.coefficient_of(&[("x", 3), ("q", h as u32), ("r", 1)]).unwrap();
            assert_eq!(c, Coeff::from(expect));
        }
        assert_eq!(f, solve_fixed_point(&eq).unwrap());
    }

    #[test]
    fn empty_step_set_returns_e() {
        let t = Arc::new(VarTable::new(&["x", "q", "r"], &[("x", 3), ("q", 3)]).unwrap());
        let e = Series::var(&t, "r").unwrap().add(&Series::var(&t, "x").unwrap()).unwrap();
        let eq = FunctionalEquation::new(&t, &["r"], e.clone(), vec![]).unwrap();
        assert_eq!(solve_sequence_sum(&eq, SolveOptions::default()), e);
        assert_eq!(solve_fixed_point(&eq).unwrap(), e);
    }

    #[test]
    fn zero_e_gives_zero() {
        let t = Arc::new(VarTable::new(&["x", "q", "r"], &[("x", 3), ("q", 3)]).unwrap());
        let one = Series::one(&t);
        let eq = FunctionalEquation::new(&t, &["r"], Series::zero(&t), vec![StepSpec::new(vec![1], one)]).unwrap();
        assert!(solve_fixed_point(&eq).unwrap().is_zero());
        assert!(solve_sequence_sum(&eq, SolveOptions::default()).is_zero());
    }

    #[test]
    fn mbm_without_recursion_is_x_e() {
        let t = Arc::new(VarTable::new(&["x", "q", "s"], &[("x", 4), ("q", 4)]).unwrap());
        let e = Series::var(&t, "s").unwrap().add(&Series::var(&t, "q").unwrap()).unwrap();
        let z = Series::zero(&t);
        let f = solve_mbm("s", &e, &z, &z).unwrap();
        assert_eq!(f, Series::var(&t, "x").unwrap().mul(&e).unwrap());
    }

    #[test]
    fn malformed_equations_are_rejected() {
        let t = Arc::new(VarTable::new(&["x", "q", "r"], &[("x", 3), ("q", 3)]).unwrap());
        let one = Series::one(&t);
        let e = Series::zero(&t);
        assert_eq!(FunctionalEquation::new(&t, &["q"], e.clone(), vec![]), Err(SolveError::BadSubstVar("q".into())));
        assert_eq!(
            FunctionalEquation::new(&t, &["r"], e.clone(), vec![StepSpec::new(vec![-2], one.clone())]),
            Err(SolveError::StepEntry { index: 0, value: -2 })
        );
        assert_eq!(
            FunctionalEquation::new(
                &t,
                &["r"],
                e.clone(),
                vec![StepSpec::new(vec![1], one.clone()), StepSpec::new(vec![1], one.clone())]
            ),
            Err(SolveError::DuplicateStep(vec![1]))
        );
        assert!(matches!(
            FunctionalEquation::new(&t, &["r"], e, vec![StepSpec::new(vec![1, 0], one)]),
            Err(SolveError::StepArity { .. })
        ));
    }
}
