//! Expression strings used in equation files.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | name | '(' expr ')'
//! ```
//!
//! Expressions evaluate straight into a [`Series`] over a given table.
//! A quotient `a / b` is `a · b⁻¹` and is only accepted when `b` can be
//! inverted within the caps.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::rational::Coeff;
use crate::series::{Series, SeriesError, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column inside the expression string.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Name(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Token::Int(text.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Name(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else {
            return Err(ExprError { column: i + 1, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
    table: &'a Arc<VarTable>,
}

impl<'a> Parser<'a> {
    fn column(&self) -> usize {
        self.tokens.get(self.pos).map(|(c, _)| c + 1).unwrap_or_else(|| self.src.chars().count() + 1)
    }

    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { column, message: message.into() })
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((_, Token::Op(c))) => Some(*c),
            _ => None,
        }
    }

    fn series_err(&self, column: usize, e: SeriesError) -> ExprError {
        ExprError { column, message: e.to_string() }
    }

    fn expr(&mut self) -> Result<Series, ExprError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            let col = self.column();
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.sub(&rhs) }.map_err(|e| self.series_err(col, e))?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Series, ExprError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            let col = self.column();
            self.pos += 1;
            let start = self.pos;
            let rhs = self.unary()?;
            if op == '*' {
                acc = acc.mul(&rhs).map_err(|e| self.series_err(col, e))?;
            } else {
                let inv = rhs.invert().map_err(|e| {
                    let text = self.source_span(start, self.pos);
                    ExprError { column: col, message: format!("denominator `{text}`: {e}") }
                })?;
                acc = acc.mul(&inv).map_err(|e| self.series_err(col, e))?;
            }
        }
        Ok(acc)
    }

    fn source_span(&self, from: usize, to: usize) -> String {
        let chars: Vec<char> = self.src.chars().collect();
        let start = self.tokens[from].0;
        let end = self.tokens.get(to).map(|(c, _)| *c).unwrap_or(chars.len());
        chars[start..end].iter().collect::<String>().trim().to_string()
    }

    fn unary(&mut self) -> Result<Series, ExprError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Series, ExprError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let col = self.column();
            match self.tokens.get(self.pos) {
                Some((_, Token::Int(n))) => {
                    let n: u32 = n.try_into().or_else(|_| self.err(col, "exponent too large"))?;
                    self.pos += 1;
                    return Ok(base.pow(n));
                }
                _ => return self.err(col, "expected a nonnegative integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Series, ExprError> {
        let col = self.column();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return self.err(col, "unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Token::Int(n) => Ok(Series::constant(self.table, Coeff::from(n))),
            Token::Name(name) => Series::var(self.table, &name).map_err(|e| self.series_err(col, e)),
            Token::Op('(') => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return self.err(self.column(), "expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Token::Op(c) => self.err(col, format!("unexpected `{c}`")),
        }
    }
}

/// Parses and evaluates `src` over `table`.
pub fn parse_series(src: &str, table: &Arc<VarTable>) -> Result<Series, ExprError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0, table };
    let value = p.expr()?;
    if p.pos < p.tokens.len() {
        return p.err(p.column(), "unexpected trailing input");
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Arc<VarTable> {
        Arc::new(VarTable::new(&["x", "q", "r", "s"], &[("x", 3), ("q", 3)]).unwrap())
    }

    #[test]
    fn arithmetic() {
        let t = table();
        let s = parse_series("(1 + x)^2 - 2*x", &t).unwrap();
        assert_eq!(s.to_string(), "1 + 1 * x^2");
        let s = parse_series("-3*q*r + 4", &t).unwrap();
        assert_eq!(s.to_string(), "4 + -3 * q^1 r^1");
    }

    #[test]
    fn division_by_invertible() {
        let t = table();
        let s = parse_series("r/(1 - q*r)", &t).unwrap();
        assert_eq!(s.to_string(), "1 * r^1 + 1 * q^1 r^2 + 1 * q^2 r^3 + 1 * q^3 r^4");
        let half = parse_series("1/2", &t).unwrap();
        assert_eq!(half.to_string(), "1/2");
    }

    #[test]
    fn rejected_denominator_reports_position() {
        let t = table();
        let err = parse_series("x + 1/(1 - r)", &t).unwrap_err();
        assert_eq!(err.column, 6);
        assert!(err.message.contains("(1 - r)"), "{}", err.message);
        let err = parse_series("1/x", &t).unwrap_err();
        assert!(err.message.contains("zero constant term"));
    }

    #[test]
    fn syntax_errors() {
        let t = table();
        assert_eq!(parse_series("1 + ", &t).unwrap_err().column, 5);
        assert_eq!(parse_series("(x", &t).unwrap_err().column, 3);
        assert_eq!(parse_series("x ^ y", &t).unwrap_err().column, 5);
        assert_eq!(parse_series("x $ 1", &t).unwrap_err().column, 3);
        assert!(parse_series("z", &t).unwrap_err().message.contains("unknown variable"));
        assert_eq!(parse_series("x x", &t).unwrap_err().column, 3);
    }
}
