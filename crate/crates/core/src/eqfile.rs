//! JSON equation files.
//!
//! ```json
//! {
//!   "variables": ["x", "q", "r"],
//!   "caps": {"x": 6, "q": 6},
//!   "subst_vars": ["r"],
//!   "e": "r",
//!   "steps": [{"j": [0], "f": "1"}, {"j": [1], "f": "1"}]
//! }
//! ```
//!
//! Expressions follow [`crate::expr`]. Caps given on the command line
//! override the file's caps.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{parse_series, ExprError};
use crate::series::{SeriesError, VarTable};
use crate::solver::{FunctionalEquation, SolveError, StepSpec};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationFile {
    pub variables: Vec<String>,
    #[serde(default)]
    pub caps: BTreeMap<String, u32>,
    pub subst_vars: Vec<String>,
    pub e: String,
    #[serde(default)]
    pub steps: Vec<StepEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEntry {
    pub j: Vec<i32>,
    pub f: String,
}

#[derive(Debug, thiserror::Error)]
pub enum EqFileError {
    #[error("line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("line {line}, column {column} (in `{field}`): {source}")]
    Expr { field: String, line: usize, column: usize, source: ExprError },
    #[error("missing cap for `{0}`")]
    MissingCap(String),
    #[error(transparent)]
    Table(#[from] SeriesError),
    #[error(transparent)]
    Equation(#[from] SolveError),
}

/// Line and column (both 1-based) of `column_in_expr` inside the first
/// occurrence of the JSON string literal `expr` in `text`, falling back to
/// the expression-relative column when the literal cannot be located.
fn locate(text: &str, expr: &str, column_in_expr: usize) -> (usize, usize) {
    let literal = serde_json::to_string(expr).unwrap_or_default();
    match text.find(&literal) {
        Some(byte) => {
            let before = &text[..byte];
            let line = before.matches('\n').count() + 1;
            let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
            let col = text[line_start..byte].chars().count() + 1 + column_in_expr;
            (line, col)
        }
        None => (0, column_in_expr),
    }
}

impl EquationFile {
    pub fn parse(text: &str) -> Result<EquationFile, EqFileError> {
        serde_json::from_str(text).map_err(|e| EqFileError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Builds the equation; `cap_overrides` win over the file's caps.
    pub fn build(&self, text: &str, cap_overrides: &[(String, u32)]) -> Result<FunctionalEquation, EqFileError> {
        let mut caps = self.caps.clone();
        for (k, v) in cap_overrides {
            caps.insert(k.clone(), *v);
        }
        for g in ["x", "q"] {
            if !caps.contains_key(g) {
                return Err(EqFileError::MissingCap(g.to_string()));
            }
        }
        let cap_list: Vec<(&str, u32)> = caps.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let table = Arc::new(VarTable::new(&self.variables, &cap_list)?);
        let expr = |field: String, src: &str| {
            parse_series(src, &table).map_err(|source| {
                let (line, column) = locate(text, src, source.column);
                EqFileError::Expr { field, line, column, source }
            })
        };
        let e = expr("e".to_string(), &self.e)?;
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let f = expr(format!("steps[{i}].f"), &s.f)?;
            steps.push(StepSpec::new(s.j.clone(), f));
        }
        let subst: Vec<&str> = self.subst_vars.iter().map(String::as_str).collect();
        Ok(FunctionalEquation::new(&table, &subst, e, steps)?)
    }
}

/// Parses and builds an equation file in one step.
pub fn load_equation(text: &str, cap_overrides: &[(String, u32)]) -> Result<FunctionalEquation, EqFileError> {
    EquationFile::parse(text)?.build(text, cap_overrides)
}
