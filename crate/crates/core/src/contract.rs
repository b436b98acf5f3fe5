//! Behavioral contract expressions: conjunctions of comparisons.
//!
//! The supported fragment is deliberately small: each comparison relates a
//! parameter to an integer constant or to `null`. Contracts are normalized
//! to a sorted, deduplicated conjunct list, so `x > 1 and x > 1` and
//! `x > 1` are the same expression.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContractError {
    #[error("contract syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("`null` only supports = and != comparisons")]
    NullComparison,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// One side of a comparison.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Int(i64),
    Null,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => f.write_str(name),
            Term::Int(value) => write!(f, "{value}"),
            Term::Null => f.write_str("null"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl Comparison {
    /// Orient `const op var` as `var flipped-op const`; leave the rest alone.
    fn normalize(self) -> Comparison {
        match (&self.lhs, &self.rhs) {
            (Term::Int(_) | Term::Null, Term::Var(_)) => Comparison {
                lhs: self.rhs.clone(),
                op: self.op.flip(),
                rhs: self.lhs.clone(),
            },
            _ => self,
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.lhs, self.op.as_str(), self.rhs)
    }
}

/// A normalized conjunction of comparisons. The empty conjunction is the
/// trivial contract `true`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct ContractExpr {
    conjuncts: Vec<Comparison>,
}

impl ContractExpr {
    /// The trivially true contract (no constraints).
    pub fn trivial() -> Self {
        ContractExpr::default()
    }

    pub fn from_comparisons(comparisons: Vec<Comparison>) -> Self {
        let mut conjuncts: Vec<Comparison> =
            comparisons.into_iter().map(Comparison::normalize).collect();
        conjuncts.sort();
        conjuncts.dedup();
        ContractExpr { conjuncts }
    }

    pub fn is_trivial(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn conjuncts(&self) -> &[Comparison] {
        &self.conjuncts
    }

    /// Conjunction of two contracts, normalized.
    pub fn and(&self, other: &ContractExpr) -> ContractExpr {
        let mut all = self.conjuncts.clone();
        all.extend(other.conjuncts.iter().cloned());
        ContractExpr::from_comparisons(all)
    }

    /// Variables mentioned anywhere in the contract.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = self
            .conjuncts
            .iter()
            .flat_map(|c| [&c.lhs, &c.rhs])
            .filter_map(|t| match t {
                Term::Var(name) => Some(name.as_str()),
                _ => None,
            })
            .collect();
        vars.sort();
        vars.dedup();
        vars
    }

    /// Evaluate under an integer environment. `null`-valued variables are
    /// modeled as absent entries. Returns `None` when a comparison cannot be
    /// decided by the environment (e.g. a variable compared to `null` while
    /// bound to an integer is decided; an unbound variable in an integer
    /// comparison is not).
    pub fn eval(&self, env: &std::collections::BTreeMap<String, Option<i64>>) -> Option<bool> {
        for cmp in &self.conjuncts {
            let value = |term: &Term| -> Option<Option<i64>> {
                match term {
                    Term::Int(v) => Some(Some(*v)),
                    Term::Null => Some(None),
                    Term::Var(name) => env.get(name).copied(),
                }
            };
            let lhs = value(&cmp.lhs)?;
            let rhs = value(&cmp.rhs)?;
            let holds = match (lhs, rhs) {
                (Some(a), Some(b)) => match cmp.op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Gt => a > b,
                },
                (a, b) => match cmp.op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    _ => return None,
                },
            };
            if !holds {
                return Some(false);
            }
        }
        Some(true)
    }
}

impl fmt::Display for ContractExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjuncts.is_empty() {
            return f.write_str("true");
        }
        let rendered: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        f.write_str(&rendered.join(" and "))
    }
}

/// Parse a contract expression. Whitespace-insensitive; conjunction via
/// `and` or `&&`; comparisons may be parenthesized.
pub fn parse_contract(text: &str) -> Result<ContractExpr, ContractError> {
    let mut parser = Parser {
        chars: text.char_indices().peekable(),
        text,
    };
    let comparisons = parser.conjunction()?;
    parser.skip_ws();
    if let Some(&(offset, _)) = parser.chars.peek() {
        return Err(ContractError::Syntax {
            offset,
            message: "trailing input".to_string(),
        });
    }
    let expr = ContractExpr::from_comparisons(comparisons);
    for cmp in expr.conjuncts() {
        let null_involved = cmp.lhs == Term::Null || cmp.rhs == Term::Null;
        if null_involved && !matches!(cmp.op, CmpOp::Eq | CmpOp::Ne) {
            return Err(ContractError::NullComparison);
        }
    }
    Ok(expr)
}

struct Parser<'t> {
    chars: std::iter::Peekable<std::str::CharIndices<'t>>,
    text: &'t str,
}

impl<'t> Parser<'t> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.text.len())
    }

    fn conjunction(&mut self) -> Result<Vec<Comparison>, ContractError> {
        let mut out = self.comparison_group()?;
        loop {
            self.skip_ws();
            if self.eat_word("and") || self.eat_symbol("&&") {
                out.extend(self.comparison_group()?);
            } else {
                return Ok(out);
            }
        }
    }

    /// A comparison, or a parenthesized conjunction.
    fn comparison_group(&mut self) -> Result<Vec<Comparison>, ContractError> {
        self.skip_ws();
        if matches!(self.chars.peek(), Some((_, '('))) {
            // Look ahead: parentheses may wrap a whole conjunction.
            let checkpoint = self.chars.clone();
            self.chars.next();
            match self.conjunction() {
                Ok(inner) => {
                    self.skip_ws();
                    if matches!(self.chars.peek(), Some((_, ')'))) {
                        self.chars.next();
                        return Ok(inner);
                    }
                    let offset = self.offset();
                    return Err(ContractError::Syntax {
                        offset,
                        message: "expected `)`".to_string(),
                    });
                }
                Err(_) => {
                    self.chars = checkpoint;
                }
            }
        }
        Ok(vec![self.comparison()?])
    }

    fn comparison(&mut self) -> Result<Comparison, ContractError> {
        let lhs = self.term()?;
        self.skip_ws();
        let op = self.comparison_op()?;
        let rhs = self.term()?;
        Ok(Comparison { lhs, op, rhs })
    }

    fn comparison_op(&mut self) -> Result<CmpOp, ContractError> {
        self.skip_ws();
        let offset = self.offset();
        let ops = [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("!=", CmpOp::Ne),
            ("==", CmpOp::Eq),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("=", CmpOp::Eq),
        ];
        for (symbol, op) in ops {
            if self.eat_symbol(symbol) {
                return Ok(op);
            }
        }
        Err(ContractError::Syntax {
            offset,
            message: "expected a comparison operator".to_string(),
        })
    }

    fn term(&mut self) -> Result<Term, ContractError> {
        self.skip_ws();
        if matches!(self.chars.peek(), Some((_, '('))) {
            self.chars.next();
            let inner = self.term()?;
            self.skip_ws();
            if matches!(self.chars.peek(), Some((_, ')'))) {
                self.chars.next();
                return Ok(inner);
            }
            let offset = self.offset();
            return Err(ContractError::Syntax {
                offset,
                message: "expected `)` after term".to_string(),
            });
        }
        let offset = self.offset();
        match self.chars.peek().copied() {
            Some((_, c)) if c.is_ascii_digit() || c == '-' => {
                let mut digits = String::new();
                if c == '-' {
                    digits.push('-');
                    self.chars.next();
                }
                while matches!(self.chars.peek(), Some((_, d)) if d.is_ascii_digit()) {
                    digits.push(self.chars.next().unwrap().1);
                }
                digits.parse::<i64>().map(Term::Int).map_err(|_| {
                    ContractError::Syntax {
                        offset,
                        message: format!("invalid integer `{digits}`"),
                    }
                })
            }
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while matches!(
                    self.chars.peek(),
                    Some((_, d)) if d.is_ascii_alphanumeric() || *d == '_'
                ) {
                    ident.push(self.chars.next().unwrap().1);
                }
                if ident == "null" {
                    Ok(Term::Null)
                } else {
                    Ok(Term::Var(ident))
                }
            }
            _ => Err(ContractError::Syntax {
                offset,
                message: "expected an identifier, integer, or `null`".to_string(),
            }),
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        self.skip_ws();
        let rest = &self.text[self.offset()..];
        if rest.starts_with(word) {
            let after = rest[word.len()..].chars().next();
            let boundary = after.map_or(true, |c| !c.is_ascii_alphanumeric() && c != '_');
            if boundary {
                for _ in 0..word.len() {
                    self.chars.next();
                }
                return true;
            }
        }
        false
    }

    fn eat_symbol(&mut self, symbol: &str) -> bool {
        let rest = &self.text[self.offset()..];
        if rest.starts_with(symbol) {
            for _ in 0..symbol.len() {
                self.chars.next();
            }
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_comparison() {
        let expr = parse_contract("year > 1970").unwrap();
        assert_eq!(
            expr.conjuncts(),
            &[Comparison {
                lhs: Term::Var("year".to_string()),
                op: CmpOp::Gt,
                rhs: Term::Int(1970),
            }]
        );
        assert_eq!(expr.to_string(), "year>1970");
    }

    #[test]
    fn parses_parenthesized_null_check() {
        let expr = parse_contract("(thread != null)").unwrap();
        assert_eq!(
            expr.conjuncts(),
            &[Comparison {
                lhs: Term::Var("thread".to_string()),
                op: CmpOp::Ne,
                rhs: Term::Null,
            }]
        );
    }

    #[test]
    fn idempotent_conjunction() {
        let expr = parse_contract("x > 1 and x > 1").unwrap();
        assert_eq!(expr.conjuncts().len(), 1);
        assert_eq!(expr, parse_contract("x>1").unwrap());
    }

    #[test]
    fn and_and_double_ampersand_are_equivalent() {
        assert_eq!(
            parse_contract("x > 1 and y <= 2").unwrap(),
            parse_contract("x>1 && y<=2").unwrap()
        );
    }

    #[test]
    fn constant_on_the_left_is_normalized() {
        assert_eq!(
            parse_contract("1970 < year").unwrap(),
            parse_contract("year > 1970").unwrap()
        );
    }

    #[test]
    fn null_ordering_comparison_is_rejected() {
        assert_eq!(
            parse_contract("x > null").unwrap_err(),
            ContractError::NullComparison
        );
    }

    #[test]
    fn display_reparses_to_the_same_contract() {
        for text in ["year > 1970", "x>1 and y<=2 and z != null", "a = 0"] {
            let expr = parse_contract(text).unwrap();
            assert_eq!(parse_contract(&expr.to_string()).unwrap(), expr);
        }
    }

    #[test]
    fn syntax_error_carries_offset() {
        assert!(matches!(
            parse_contract("year >"),
            Err(ContractError::Syntax { .. })
        ));
    }

    #[test]
    fn eval_checks_all_conjuncts() {
        let expr = parse_contract("x > 1 and x < 10").unwrap();
        let env = |v: i64| std::collections::BTreeMap::from([("x".to_string(), Some(v))]);
        assert_eq!(expr.eval(&env(5)), Some(true));
        assert_eq!(expr.eval(&env(0)), Some(false));
        assert_eq!(expr.eval(&env(10)), Some(false));
    }
}
