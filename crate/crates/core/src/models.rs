//! Small built-in equations used for demonstrations and oracle checks.

use std::sync::Arc;

use crate::series::{Series, VarTable};
use crate::solver::{mbm_equation, FunctionalEquation, SolveError, StepSpec};

/// `F(r) = r + x F(r) + x F(qr)`: the coefficient of `x^n q^h r` counts the
/// ways to get `h` heads from `n` coin flips.
pub fn coin(x_cap: u32, q_cap: u32) -> Result<FunctionalEquation, SolveError> {
    let t = Arc::new(VarTable::new(&["x", "q", "r"], &[("x", x_cap), ("q", q_cap)])?);
    let one = Series::one(&t);
    FunctionalEquation::new(
        &t,
        &["r"],
        Series::var(&t, "r")?,
        vec![StepSpec::new(vec![0], one.clone()), StepSpec::new(vec![1], one)],
    )
}

/// `Σ_{n ≤ x_cap} (1+q)^n r x^n`, the closed form of [`coin`].
pub fn coin_closed_form(eq: &FunctionalEquation) -> Result<Series, SolveError> {
    let t = eq.table();
    let one_q = Series::one(t).add(&Series::var(t, "q")?)?;
    let r = Series::var(t, "r")?;
    let x = Series::var(t, "x")?;
    let mut out = Series::zero(t);
    let mut term = r;
    for _ in 0..=eq.x_cap() {
        out = out.add(&term)?;
        term = term.mul(&one_q)?.mul(&x)?;
    }
    Ok(out)
}

/// The two-variable equation with steps `(±1, ±1)`:
///
/// ```text
/// F(r,s) = e + x f₁ F(1,1) + x f₇ F(1,qs) + x f₃ F(qr,1) + x f₉ F(qr,qs)
/// ```
pub fn symmetric(
    table: &Arc<VarTable>,
    e: Series,
    f_11: Series,
    f_17: Series,
    f_13: Series,
    f_19: Series,
) -> Result<FunctionalEquation, SolveError> {
    FunctionalEquation::new(
        table,
        &["r", "s"],
        e,
        vec![
            StepSpec::new(vec![-1, -1], f_11),
            StepSpec::new(vec![-1, 1], f_17),
            StepSpec::new(vec![1, -1], f_13),
            StepSpec::new(vec![1, 1], f_19),
        ],
    )
}

/// [`symmetric`] with `e = 1 + rs`, `f₁ = 1`, `f₇ = s`, `f₃ = r`, `f₉ = rs`.
pub fn symmetric_default(x_cap: u32, q_cap: u32) -> Result<FunctionalEquation, SolveError> {
    let t = Arc::new(VarTable::new(&["x", "q", "r", "s"], &[("x", x_cap), ("q", q_cap)])?);
    let r = Series::var(&t, "r")?;
    let s = Series::var(&t, "s")?;
    let rs = r.mul(&s)?;
    let one = Series::one(&t);
    symmetric(&t, one.add(&rs)?, one, s, r, rs)
}

/// Table `[x, q, s]` for the single-variable closed-form shape.
pub fn mbm_table(x_cap: u32, q_cap: u32) -> Result<Arc<VarTable>, SolveError> {
    Ok(Arc::new(VarTable::new(&["x", "q", "s"], &[("x", x_cap), ("q", q_cap)])?))
}

/// `F(s) = x e(s) + x f(s) F(1) + x g(s) F(qs)` with the given parts.
pub fn mbm(table: &Arc<VarTable>, e: &Series, f: &Series, g: &Series) -> Result<FunctionalEquation, SolveError> {
    mbm_equation(table, "s", e, f, g)
}

/// Default parts `e = s`, `f = qs`, `g = 1 + s²` (as expression strings).
pub const MBM_DEFAULT_PARTS: [&str; 3] = ["s", "q*s", "1 + s^2"];
