//! Batch front end: pick a model, solve it, verify it against its oracles,
//! or print a coefficient grid.
//!
//! [`run`] never writes to stdout itself; it returns the rendered artifact
//! together with the exit status so the binary and tests share one path.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::eqfile::{load_equation, EqFileError};
use crate::expr::parse_series;
use crate::lmr;
use crate::models;
use crate::polyomino;
use crate::rational::Coeff;
use crate::series::{Monomial, Series, SeriesError};
use crate::solver::{
    solve_fixed_point, solve_mbm_equation, solve_sequence_sum, FunctionalEquation, SolveError, SolveOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Table,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Coin,
    Mbm,
    Symmetric,
    Polyomino,
    Lmr,
    File(PathBuf),
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "coin" => Model::Coin,
            "mbm" => Model::Mbm,
            "symmetric" => Model::Symmetric,
            "polyomino" => Model::Polyomino,
            "lmr" => Model::Lmr,
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Model::File(PathBuf::from(path)),
                _ => return Err(format!("unknown model `{other}`")),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "human" => Ok(Format::Human),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub caps: Vec<(String, u32)>,
    pub params: BTreeMap<String, String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub specialize: Vec<String>,
    pub rows: String,
    pub cols: String,
    pub parallel: bool,
}

impl RunConfig {
    pub fn new(command: Command, model: Model) -> RunConfig {
        RunConfig {
            command,
            model,
            caps: Vec::new(),
            params: BTreeMap::new(),
            format: Format::Human,
            out: None,
            specialize: Vec::new(),
            rows: "x".to_string(),
            cols: "q".to_string(),
            parallel: true,
        }
    }

    pub fn cap(mut self, var: &str, n: u32) -> RunConfig {
        self.caps.push((var.to_string(), n));
        self
    }

    pub fn param(mut self, name: &str, value: &str) -> RunConfig {
        self.params.insert(name.to_string(), value.to_string());
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing cap for `{0}` (use --cap {0}=N)")]
    MissingCap(String),
    #[error("unknown parameter `{0}` for this model")]
    UnknownParam(String),
    #[error("parameter `{name}`: {message}")]
    BadParam { name: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    EquationFile(#[from] EqFileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// What a run produced: the rendered text and the process exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn equal(name: &str, a: &Series, b: &Series) -> Check {
        match a.first_difference(b) {
            None => Check { name: name.to_string(), passed: true, detail: format!("{} terms agree", a.len()) },
            Some((m, ca, cb)) => Check {
                name: name.to_string(),
                passed: false,
                detail: format!("first difference at {}: {} vs {}", a.render_monomial(&m), ca, cb),
            },
        }
    }

    fn flag(name: &str, passed: bool, detail: String) -> Check {
        Check { name: name.to_string(), passed, detail }
    }
}

fn cap_value(config: &RunConfig, var: &str) -> Option<u32> {
    config.caps.iter().rev().find(|(v, _)| v == var).map(|(_, n)| *n)
}

fn required_cap(config: &RunConfig, var: &str) -> Result<u32, CliError> {
    cap_value(config, var).ok_or_else(|| CliError::MissingCap(var.to_string()))
}

fn check_params(config: &RunConfig, allowed: &[&str]) -> Result<(), CliError> {
    match config.params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(CliError::UnknownParam(k.clone())),
        None => Ok(()),
    }
}

fn int_param(config: &RunConfig, name: &str, default: u32) -> Result<u32, CliError> {
    match config.params.get(name) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| CliError::BadParam {
            name: name.to_string(),
            message: format!("expected a nonnegative integer, got `{v}`"),
        }),
    }
}

fn lmr_params(config: &RunConfig) -> Result<(u32, u32), CliError> {
    check_params(config, &["L", "R"])?;
    let l = int_param(config, "L", 1)?;
    let r = int_param(config, "R", 1)?;
    if l == 0 || r == 0 {
        return Err(CliError::BadParam { name: "L/R".into(), message: "must be positive".into() });
    }
    Ok((l, r))
}

fn mbm_model(config: &RunConfig, x_cap: u32, q_cap: u32) -> Result<FunctionalEquation, CliError> {
    check_params(config, &["e", "f", "g"])?;
    let table = models::mbm_table(x_cap, q_cap)?;
    let mut parts = Vec::with_capacity(3);
    for (name, default) in ["e", "f", "g"].iter().zip(models::MBM_DEFAULT_PARTS) {
        let src = config.params.get(*name).map(String::as_str).unwrap_or(default);
        let s = parse_series(src, &table)
            .map_err(|e| CliError::BadParam { name: name.to_string(), message: e.to_string() })?;
        parts.push(s);
    }
    Ok(models::mbm(&table, &parts[0], &parts[1], &parts[2])?)
}

fn file_model(config: &RunConfig, path: &PathBuf) -> Result<FunctionalEquation, CliError> {
    check_params(config, &[])?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Ok(load_equation(&text, &config.caps)?)
}

/// The equation behind a single-equation model.
fn equation(config: &RunConfig) -> Result<FunctionalEquation, CliError> {
    if let Model::File(path) = &config.model {
        return file_model(config, path);
    }
    let x = required_cap(config, "x")?;
    let q = required_cap(config, "q")?;
    match &config.model {
        Model::Coin => {
            check_params(config, &[])?;
            Ok(models::coin(x, q)?)
        }
        Model::Mbm => mbm_model(config, x, q),
        Model::Symmetric => {
            check_params(config, &[])?;
            Ok(models::symmetric_default(x, q)?)
        }
        Model::Polyomino => {
            check_params(config, &[])?;
            Ok(polyomino::build_equation(x, q)?)
        }
        Model::Lmr | Model::File(_) => unreachable!("handled separately"),
    }
}

fn options(config: &RunConfig) -> SolveOptions {
    SolveOptions { parallel: config.parallel, prune: true }
}

struct LmrSolution {
    f0: Series,
    f1: Series,
    g: Series,
}

fn solve_lmr(config: &RunConfig) -> Result<(LmrSolution, FunctionalEquation, FunctionalEquation), CliError> {
    let (l, r) = lmr_params(config)?;
    let x = required_cap(config, "x")?;
    let q = required_cap(config, "q")?;
    let eq0 = lmr::build_f0(l, x, q)?;
    let f0 = solve_sequence_sum(&eq0, options(config));
    let eq1 = lmr::build_f1(l, r, &f0)?;
    let f1 = solve_sequence_sum(&eq1, options(config));
    let g = lmr::assemble_g(&f0, &f1)?;
    Ok((LmrSolution { f0, f1, g }, eq0, eq1))
}

fn solved_series(config: &RunConfig) -> Result<Series, CliError> {
    let series = match config.model {
        Model::Lmr => solve_lmr(config)?.0.g,
        _ => solve_sequence_sum(&equation(config)?, options(config)),
    };
    let vars: Vec<&str> = config.specialize.iter().map(String::as_str).collect();
    Ok(series.specialize_to_one(&vars)?)
}

/// Runs one command and renders its artifact.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    match config.command {
        Command::Solve => {
            let series = solved_series(config)?;
            Ok(RunOutcome { exit_code: 0, output: render_series(&series, config.format) })
        }
        Command::Table => {
            let series = solved_series(config)?;
            let grid = Grid::build(&series, &config.rows, &config.cols)?;
            Ok(RunOutcome { exit_code: 0, output: grid.render(config.format) })
        }
        Command::Verify => Ok(report(&verify(config)?, config.format)),
    }
}

fn render_series(series: &Series, format: Format) -> String {
    let names = series.table().names();
    match format {
        Format::Human => {
            let mut out = String::new();
            for (m, c) in series.terms() {
                if m.is_one() {
                    let _ = writeln!(out, "{c}");
                } else {
                    let _ = writeln!(out, "{c} * {}", series.render_monomial(m));
                }
            }
            if series.is_zero() {
                out.push_str("0\n");
            }
            if let Ok(grid) = Grid::build(series, "x", "q") {
                out.push('\n');
                out.push_str(&grid.render(Format::Human));
            }
            out
        }
        Format::Csv => {
            let mut out = names.join(",");
            out.push_str(",coeff\n");
            for (m, c) in series.terms() {
                let exps: Vec<String> = m.exponents().iter().map(u32::to_string).collect();
                let _ = writeln!(out, "{},{c}", exps.join(","));
            }
            out
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&series.to_document()).expect("serializable");
            s.push('\n');
            s
        }
    }
}

/// Coefficients indexed by two variables, all others set to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grid {
    pub rows: String,
    pub cols: String,
    pub cells: Vec<Vec<String>>,
}

impl Grid {
    pub fn build(series: &Series, rows: &str, cols: &str) -> Result<Grid, SeriesError> {
        let t = series.table();
        let (ri, ci) = (t.require(rows)?, t.require(cols)?);
        let others: Vec<&str> =
            t.names().iter().enumerate().filter(|(i, _)| *i != ri && *i != ci).map(|(_, n)| n.as_str()).collect();
        let flat = series.specialize_to_one(&others)?;
        let n_rows = t.cap(ri).or(flat.max_exponent(rows)?).unwrap_or(0) as usize + 1;
        let n_cols = t.cap(ci).or(flat.max_exponent(cols)?).unwrap_or(0) as usize + 1;
        let mut cells = vec![vec![Coeff::ZERO; n_cols]; n_rows];
        for (m, c) in flat.terms() {
            let e = m.exponents();
            cells[e[ri] as usize][e[ci] as usize] = c.clone();
        }
        Ok(Grid {
            rows: rows.to_string(),
            cols: cols.to_string(),
            cells: cells.into_iter().map(|row| row.iter().map(Coeff::to_string).collect()).collect(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Human => {
                let width = self.cells.iter().flatten().map(String::len).max().unwrap_or(1).max(2);
                let _ = write!(out, "{:>6}", format!("{}\\{}", self.rows, self.cols));
                for j in 0..self.cells.first().map_or(0, Vec::len) {
                    let _ = write!(out, " {:>width$}", j);
                }
                out.push('\n');
                for (i, row) in self.cells.iter().enumerate() {
                    let _ = write!(out, "{:>6}", format!("{}^{}", self.rows, i));
                    for c in row {
                        let _ = write!(out, " {:>width$}", c);
                    }
                    out.push('\n');
                }
            }
            Format::Csv => {
                let header: Vec<String> = (0..self.cells.first().map_or(0, Vec::len)).map(|j| j.to_string()).collect();
                let _ = writeln!(out, "{}\\{},{}", self.rows, self.cols, header.join(","));
                for (i, row) in self.cells.iter().enumerate() {
                    let _ = writeln!(out, "{i},{}", row.join(","));
                }
            }
            Format::Json => {
                out = serde_json::to_string_pretty(self).expect("serializable");
                out.push('\n');
            }
        }
        out
    }
}

/// Renders a verify report; exit code 1 when any check failed.
pub fn report(checks: &[Check], format: Format) -> RunOutcome {
    let passed = checks.iter().all(|c| c.passed);
    RunOutcome { exit_code: if passed { 0 } else { 1 }, output: render_report(checks, format) }
}

fn render_report(checks: &[Check], format: Format) -> String {
    let passed = checks.iter().filter(|c| c.passed).count();
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                passed: bool,
                checks: &'a [Check],
            }
            let mut s =
                serde_json::to_string_pretty(&Report { passed: passed == checks.len(), checks }).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("check,status,detail\n");
            for c in checks {
                let _ = writeln!(
                    out,
                    "{},{},\"{}\"",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.detail.replace('"', "'")
                );
            }
            out
        }
        Format::Human => {
            let mut out = String::new();
            for c in checks {
                let _ = writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let _ = writeln!(out, "{passed}/{} checks passed", checks.len());
            out
        }
    }
}

/// Runs the model's oracle suite.
pub fn verify(config: &RunConfig) -> Result<Vec<Check>, CliError> {
    match config.model {
        Model::Polyomino => verify_polyomino(config),
        Model::Lmr => verify_lmr(config),
        _ => {
            let eq = equation(config)?;
            let seq = solve_sequence_sum(&eq, options(config));
            let mut checks = vec![Check::equal("sequence-sum = fixed-point", &seq, &solve_fixed_point(&eq)?)];
            match config.model {
                Model::Coin => {
                    checks.push(Check::equal("sequence-sum = Σ (1+q)^n r x^n", &seq, &models::coin_closed_form(&eq)?));
                }
                Model::Mbm => {
                    checks.push(Check::equal("sequence-sum = closed form", &seq, &solve_mbm_equation(&eq)?));
                }
                Model::File(_) => {
                    if let Ok(closed) = solve_mbm_equation(&eq) {
                        checks.push(Check::equal("sequence-sum = closed form", &seq, &closed));
                    }
                }
                _ => {}
            }
            Ok(checks)
        }
    }
}

fn catalan(n: u64) -> u64 {
    // C_n = binom(2n, n) / (n + 1)
    let mut c: u64 = 1;
    for k in 0..n {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

fn verify_polyomino(config: &RunConfig) -> Result<Vec<Check>, CliError> {
    let eq = equation(config)?;
    let (x_cap, q_cap) = (required_cap(config, "x")?, required_cap(config, "q")?);
    let t = Arc::clone(eq.table());
    let f = solve_sequence_sum(&eq, options(config));
    let mut checks = vec![
        Check::equal("sequence-sum = fixed-point", &f, &solve_fixed_point(&eq)?),
        Check::equal("sequence-sum = closed form", &f, &solve_mbm_equation(&eq)?),
    ];
    let polys = polyomino::enumerate(q_cap);
    let brute = polyomino::brute_force_series(&t)?;
    checks.push(Check::equal("multistatistic series = brute force", &f, &brute));

    if x_cap >= 5 && q_cap >= 11 {
        let shape = Monomial::from_pairs(&t, &[("q", 11), ("s", 2), ("t", 1), ("x", 5), ("y", 4)])?;
        let expected = polys.iter().filter(|p| p.monomial(&t).map(|m| m == shape).unwrap_or(false)).count();
        let got = f.coefficient(&shape)?;
        checks.push(Check::flag(
            "coefficient of q^11 s^2 t x^5 y^4",
            got == Coeff::from(expected as i64) && expected >= 1,
            format!("series {got}, brute force {expected}"),
        ));
    }

    // half-perimeter n is complete when every width ≤ n-1 fits the x cap and
    // every area ≤ ⌊n²/4⌋ fits the q cap
    let complete: Vec<u32> = (2..=16).filter(|&n| n - 1 <= x_cap && n * n / 4 <= q_cap).collect();
    if let Some(&n_max) = complete.last() {
        let from_series = polyomino::half_perimeter_counts_from_series(&f, n_max)?;
        let from_brute = polyomino::half_perimeter_counts(&polys, n_max);
        let mut ok = true;
        let mut detail = Vec::new();
        for &n in &complete {
            let c = catalan(u64::from(n) - 1);
            let s = &from_series[n as usize];
            ok &= *s == Coeff::from(c as i64) && from_brute[n as usize] == c;
            detail.push(format!("2n={}:{}", 2 * n, s));
        }
        checks.push(Check::flag("perimeter 2n counts = C(n-1)", ok, detail.join(" ")));
        if complete.contains(&4) {
            let c = &from_series[4];
            checks.push(Check::flag("perimeter 8 count = 5", *c == Coeff::from(5), format!("count {c}")));
        }
    }

    let flat = f.specialize_to_one(&["q", "s", "t"])?;
    let mut sym_ok = true;
    let mut sym_pairs = 0;
    for w in 1..=x_cap {
        for h in 1..=x_cap {
            let a = flat.coefficient_of(&[("x", w), ("y", h)])?;
            let b = flat.coefficient_of(&[("x", h), ("y", w)])?;
            sym_ok &= a == b;
            sym_pairs += 1;
        }
    }
    checks.push(Check::flag("width/height symmetry", sym_ok, format!("{sym_pairs} (w, h) pairs")));

    let mut xt_ok = true;
    let mut xt_cells = 0;
    for n in 0..=4.min(x_cap.saturating_sub(1)) {
        for m in 1..=3 {
            let formula = polyomino::coefficient_xt(n, m, &t)?;
            let extracted = f.extract(&[("x", n + 1), ("t", m)])?;
            xt_ok &= formula == extracted;
            xt_cells += 1;
        }
    }
    checks.push(Check::flag("x^(n+1) t^m coefficient formula", xt_ok, format!("{xt_cells} (n, m) cells")));
    Ok(checks)
}

fn verify_lmr(config: &RunConfig) -> Result<Vec<Check>, CliError> {
    let (l, r) = lmr_params(config)?;
    let x_cap = required_cap(config, "x")?;
    let q_cap = required_cap(config, "q")?;
    if l + r + x_cap + 1 > lmr::MAX_WORD_LEN {
        return Err(CliError::Usage(format!(
            "brute force needs words of length {} (limit {})",
            l + r + x_cap + 1,
            lmr::MAX_WORD_LEN
        )));
    }
    let (sol, eq0, eq1) = solve_lmr(config)?;
    let mut checks = vec![
        Check::equal("F0 sequence-sum = fixed-point", &sol.f0, &solve_fixed_point(&eq0)?),
        Check::equal("F0 sequence-sum = closed form", &sol.f0, &solve_mbm_equation(&eq0)?),
        Check::equal("F1 sequence-sum = fixed-point", &sol.f1, &solve_fixed_point(&eq1)?),
    ];
    let t = Arc::clone(sol.g.table());
    let brute = lmr::brute_force_g(l, r, &t)?;
    checks.push(Check::equal("G = brute force", &sol.g, &brute));
    let ti = t.require("t")?;
    let f0_flat = sol.f0.terms().all(|(m, _)| m.exponents()[ti] == 0);
    let f1_pos = sol.f1.terms().all(|(m, _)| m.exponents()[ti] >= 1);
    checks.push(Check::flag(
        "partition by t-exponent",
        f0_flat && f1_pos,
        format!("F0 t-free: {f0_flat}, F1 t-positive: {f1_pos}"),
    ));
    let orders: Vec<Option<u32>> = [&sol.f0, &sol.f1].iter().map(|s| s.min_exponent("x").ok().flatten()).collect();
    let low = orders.iter().all(|o| o.is_none_or(|o| o >= 3));
    let show = |o: Option<u32>| o.map_or("none".to_string(), |o| format!("x^{o}"));
    checks.push(Check::flag(
        "F0, F1 vanish below x^3",
        low,
        format!("lowest terms F0 {}, F1 {}", show(orders[0]), show(orders[1])),
    ));
    let sized = lmr::size_marked(&sol.g, l, r)?;
    let sized_brute = lmr::brute_force_size_marked(l, r, x_cap, q_cap)?;
    checks.push(Check::equal("x^(L+R) G(x,q,1,1,1) = Σ x^n(w) q^l(w)", &sized, &sized_brute));

    let mut tree_ok = true;
    for m in 0..x_cap {
        let parents = lmr::enumerate(l, r, m).map_err(|e| CliError::Usage(e.to_string()))?;
        let grown = lmr::grow(&parents);
        let all: std::collections::BTreeSet<_> =
            lmr::enumerate(l, r, m + 1).map_err(|e| CliError::Usage(e.to_string()))?.into_iter().collect();
        tree_ok &= grown == all;
    }
    checks.push(Check::flag("generating tree reaches every word", tree_ok, format!("M < {x_cap}")));
    Ok(checks)
}
