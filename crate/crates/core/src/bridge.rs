//! Interpretation chains through the ontology and the semantic bridges
//! assembled from them.
//!
//! A chain is a path of registered interpretation edges. Chain search is
//! bounded breadth-first, returning the shortest chain and breaking length
//! ties by the lexicographically least edge-name sequence, so identical
//! contexts always yield identical chains.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::ContractExpr;
use crate::kinding::ComponentKind;
use crate::store::{AssetId, Context, InterpEdge, InterpKind};

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("no bridge: {0}")]
    NoBridge(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound template variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero while evaluating template")]
    DivisionByZero,
}

/// Arithmetic template over named inputs: integers, variables, `+ - * /`,
/// parentheses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExprTemplate {
    Int(i64),
    Var(String),
    Binary {
        op: TemplateOp,
        lhs: Box<ExprTemplate>,
        rhs: Box<ExprTemplate>,
    },
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum TemplateOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl TemplateOp {
    fn precedence(self) -> u8 {
        match self {
            TemplateOp::Add | TemplateOp::Sub => 1,
            TemplateOp::Mul | TemplateOp::Div => 2,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            TemplateOp::Add => "+",
            TemplateOp::Sub => "-",
            TemplateOp::Mul => "*",
            TemplateOp::Div => "/",
        }
    }
}

impl ExprTemplate {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut parser = TemplateParser {
            text,
            pos: 0,
        };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos < parser.text.len() {
            return Err(TemplateError::Syntax {
                offset: parser.pos,
                message: "trailing input".to_string(),
            });
        }
        Ok(expr)
    }

    /// Replace every occurrence of a variable with another template.
    /// Single-pass; the replacement is not re-scanned.
    pub fn substitute(&self, var: &str, replacement: &ExprTemplate) -> ExprTemplate {
        match self {
            ExprTemplate::Int(_) => self.clone(),
            ExprTemplate::Var(name) => {
                if name == var {
                    replacement.clone()
                } else {
                    self.clone()
                }
            }
            ExprTemplate::Binary { op, lhs, rhs } => ExprTemplate::Binary {
                op: *op,
                lhs: Box::new(lhs.substitute(var, replacement)),
                rhs: Box::new(rhs.substitute(var, replacement)),
            },
        }
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            ExprTemplate::Int(_) => {}
            ExprTemplate::Var(name) => out.push(name.clone()),
            ExprTemplate::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
        }
    }

    pub fn eval(&self, env: &BTreeMap<String, i64>) -> Result<i64, TemplateError> {
        match self {
            ExprTemplate::Int(value) => Ok(*value),
            ExprTemplate::Var(name) => env
                .get(name)
                .copied()
                .ok_or_else(|| TemplateError::UnboundVariable(name.clone())),
            ExprTemplate::Binary { op, lhs, rhs } => {
                let a = lhs.eval(env)?;
                let b = rhs.eval(env)?;
                Ok(match op {
                    TemplateOp::Add => a.wrapping_add(b),
                    TemplateOp::Sub => a.wrapping_sub(b),
                    TemplateOp::Mul => a.wrapping_mul(b),
                    TemplateOp::Div => {
                        if b == 0 {
                            return Err(TemplateError::DivisionByZero);
                        }
                        a.wrapping_div(b)
                    }
                })
            }
        }
    }

    fn render(&self, parent_prec: u8, is_right: bool, out: &mut String) {
        match self {
            ExprTemplate::Int(value) => out.push_str(&value.to_string()),
            ExprTemplate::Var(name) => out.push_str(name),
            ExprTemplate::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                let needs_parens = prec < parent_prec || (prec == parent_prec && is_right);
                if needs_parens {
                    out.push('(');
                }
                lhs.render(prec, false, out);
                out.push(' ');
                out.push_str(op.as_str());
                out.push(' ');
                rhs.render(prec, true, out);
                if needs_parens {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for ExprTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render(0, false, &mut out);
        f.write_str(&out)
    }
}

struct TemplateParser<'t> {
    text: &'t str,
    pos: usize,
}

impl<'t> TemplateParser<'t> {
    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<ExprTemplate, TemplateError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            let op = match self.text[self.pos..].chars().next() {
                Some('+') => TemplateOp::Add,
                Some('-') => TemplateOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = ExprTemplate::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> Result<ExprTemplate, TemplateError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            let op = match self.text[self.pos..].chars().next() {
                Some('*') => TemplateOp::Mul,
                Some('/') => TemplateOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = ExprTemplate::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn factor(&mut self) -> Result<ExprTemplate, TemplateError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let mut chars = rest.chars();
        match chars.next() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.text[self.pos..].starts_with(')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(TemplateError::Syntax {
                        offset: self.pos,
                        message: "expected `)`".to_string(),
                    })
                }
            }
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let offset = self.pos;
                let mut len = c.len_utf8();
                for d in chars {
                    if d.is_ascii_digit() {
                        len += 1;
                    } else {
                        break;
                    }
                }
                let digits = &rest[..len];
                self.pos += len;
                digits
                    .parse::<i64>()
                    .map(ExprTemplate::Int)
                    .map_err(|_| TemplateError::Syntax {
                        offset,
                        message: format!("invalid integer `{digits}`"),
                    })
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let mut len = c.len_utf8();
                for d in chars {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        len += 1;
                    } else {
                        break;
                    }
                }
                let name = rest[..len].to_string();
                self.pos += len;
                Ok(ExprTemplate::Var(name))
            }
            _ => Err(TemplateError::Syntax {
                offset: self.pos,
                message: "expected an integer, variable, or `(`".to_string(),
            }),
        }
    }
}

/// One conversion stage: the interpretation edge endpoints and the edge's
/// arithmetic template when one was registered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConversionExpr {
    pub from: AssetId,
    pub to: AssetId,
    pub template: Option<ExprTemplate>,
}

/// How a required feature's invocation is converted into the provided one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConversionSpec {
    /// Name remapping only; arguments pass through positionally.
    Rename(BTreeMap<String, String>),
    /// `perm[j]` is the consumer argument index feeding provider argument `j`.
    Reorder(Vec<usize>),
    /// One arithmetic conversion stage.
    Expr(ConversionExpr),
    /// Stages applied in order.
    Composite(Vec<ConversionSpec>),
}

/// A kind marked as a shared, universal ontology element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ground {
    pub id: AssetId,
    pub universal: bool,
}

/// A path of interpretation edges. The empty chain is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub from: AssetId,
    pub to: AssetId,
    pub edges: Vec<InterpEdge>,
}

impl Chain {
    pub fn identity(asset: AssetId) -> Self {
        Chain {
            from: asset.clone(),
            to: asset,
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.edges.is_empty() && self.from == self.to
    }

    /// A chain of full interpretations is full; any partial edge makes the
    /// whole chain partial.
    pub fn kind(&self) -> InterpKind {
        if self
            .edges
            .iter()
            .any(|e| e.kind == InterpKind::Partial)
        {
            InterpKind::Partial
        } else {
            InterpKind::Full
        }
    }

    /// Splice two chains end to end.
    pub fn then(&self, next: &Chain) -> Option<Chain> {
        if self.to != next.from {
            return None;
        }
        let mut edges = self.edges.clone();
        edges.extend(next.edges.iter().cloned());
        Some(Chain {
            from: self.from.clone(),
            to: next.to.clone(),
            edges,
        })
    }
}

fn edge_name(edge: &InterpEdge) -> String {
    format!("{}~>{}@{}", edge.from, edge.to, edge.agent)
}

/// Find the shortest chain of registered interpretation edges from `from`
/// to `to`, searching at most `max_len` edges deep. Among equal-length
/// chains the lexicographically least edge-name sequence wins. `from == to`
/// yields the identity chain; absence yields `None`.
pub fn find_chain(
    ctx: &Context,
    from: &AssetId,
    to: &AssetId,
    max_len: usize,
) -> Option<Chain> {
    if from == to {
        return Some(Chain::identity(from.clone()));
    }
    let closed = ctx.close();
    let edges = closed.interp_edges();

    // Level-by-level search keeping, per node, the minimal edge-name
    // sequence that reaches it at the current depth. Comparing sequences is
    // prefix-monotone, so extending per-node minima preserves minimality.
    let mut frontier: BTreeMap<AssetId, (Vec<String>, Vec<InterpEdge>)> =
        BTreeMap::from([(from.clone(), (Vec::new(), Vec::new()))]);
    let mut visited: std::collections::BTreeSet<AssetId> =
        std::collections::BTreeSet::from([from.clone()]);

    for _ in 0..max_len {
        let mut next: BTreeMap<AssetId, (Vec<String>, Vec<InterpEdge>)> = BTreeMap::new();
        for (node, (names, path)) in &frontier {
            for edge in &edges {
                if edge.from != *node || visited.contains(&edge.to) {
                    continue;
                }
                let mut names = names.clone();
                names.push(edge_name(edge));
                let mut path = path.clone();
                path.push((*edge).clone());
                match next.get(&edge.to) {
                    Some((existing, _)) if *existing <= names => {}
                    _ => {
                        next.insert(edge.to.clone(), (names, path));
                    }
                }
            }
        }
        if let Some((_, path)) = next.get(to) {
            return Some(Chain {
                from: from.clone(),
                to: to.clone(),
                edges: path.clone(),
            });
        }
        for node in next.keys() {
            visited.insert(node.clone());
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// Per-feature mapping carried by a bridge: the matched feature pair, its
/// conversion, any runtime guard, and the resolved signatures and argument
/// sources code generation needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMap {
    pub required: AssetId,
    pub provided: AssetId,
    pub conversion: ConversionSpec,
    pub guard: Option<ContractExpr>,
    pub exposed: MethodSig,
    pub delegate: MethodSig,
    pub args: Vec<ArgSource>,
}

/// A concrete method signature snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub return_type: Option<String>,
}

/// Where one provider argument comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArgSource {
    /// Forward the consumer argument at this index.
    Direct { consumer_index: usize },
    /// Convert starting from the consumer argument at `seed_index`,
    /// applying the chain stages in order.
    Converted {
        seed_index: usize,
        steps: Vec<ConversionExpr>,
    },
}

/// The witness to a compatibility verdict: one mapping per required feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticBridge {
    pub provider: AssetId,
    pub consumer: AssetId,
    pub feature_maps: Vec<FeatureMap>,
}

/// Build the semantic bridge witnessing that `consumer`'s requirements are
/// satisfiable by `provider`. Re-verifies compatibility; callers should have
/// checked it already.
pub fn build_bridge(
    ctx: &Context,
    provider: &ComponentKind,
    consumer: &ComponentKind,
) -> Result<SemanticBridge, BridgeError> {
    let result = crate::compat::check_compatibility(ctx, provider, consumer);
    match result.witness {
        Some(bridge) => Ok(bridge),
        None => Err(BridgeError::NoBridge(
            result
                .diagnostics
                .first()
                .cloned()
                .unwrap_or_else(|| format!("verdict was {:?}", result.verdict)),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Assertion, AssertionForm};

    fn kind(name: &str) -> AssetId {
        AssetId::kind(name).unwrap()
    }

    fn interp(from: &str, to: &str) -> Assertion {
        Assertion::claim(AssertionForm::Interpretation(
            InterpEdge::new(kind(from), kind(to), InterpKind::Full, "ontology").unwrap(),
        ))
    }

    #[test]
    fn template_round_trips_through_display() {
        for text in [
            "year * 12 + month",
            "(year * 12 + month) * 30 + day",
            "day - 719528",
            "a / (b - 2) * c",
            "-4 + x",
        ] {
            let parsed = ExprTemplate::parse(text).unwrap();
            let reparsed = ExprTemplate::parse(&parsed.to_string()).unwrap();
            assert_eq!(parsed, reparsed, "{text}");
        }
    }

    #[test]
    fn template_substitution_and_eval() {
        let t = ExprTemplate::parse("month * 30 + day").unwrap();
        let inner = ExprTemplate::parse("year * 12 + month").unwrap();
        let composed = t.substitute("month", &inner);
        assert_eq!(composed.to_string(), "(year * 12 + month) * 30 + day");
        let env = BTreeMap::from([
            ("year".to_string(), 2),
            ("month".to_string(), 3),
            ("day".to_string(), 4),
        ]);
        assert_eq!(composed.eval(&env).unwrap(), (2 * 12 + 3) * 30 + 4);
    }

    #[test]
    fn identity_chain_has_length_zero() {
        let ctx = Context::default();
        let chain = find_chain(&ctx, &kind("K"), &kind("K"), 8).unwrap();
        assert!(chain.is_identity());
        assert_eq!(chain.kind(), InterpKind::Full);
    }

    #[test]
    fn ontology_chain_is_found_in_order() {
        let ctx = Context::default()
            .assert_all([
                interp("Year", "Month"),
                interp("Month", "Day"),
                interp("Day", "DaysSinceJan1_1970"),
            ])
            .unwrap();
        let chain = find_chain(&ctx, &kind("Year"), &kind("DaysSinceJan1_1970"), 8).unwrap();
        assert_eq!(chain.len(), 3);
        let hops: Vec<(&str, &str)> = chain
            .edges
            .iter()
            .map(|e| (e.from.name(), e.to.name()))
            .collect();
        assert_eq!(
            hops,
            vec![
                ("Year", "Month"),
                ("Month", "Day"),
                ("Day", "DaysSinceJan1_1970"),
            ]
        );
    }

    #[test]
    fn absent_chain_returns_none() {
        let ctx = Context::default().assert_all([interp("A", "B")]).unwrap();
        assert!(find_chain(&ctx, &kind("B"), &kind("A"), 8).is_none());
        assert!(find_chain(&ctx, &kind("A"), &kind("C"), 8).is_none());
    }

    #[test]
    fn max_len_bounds_the_search() {
        let ctx = Context::default()
            .assert_all([interp("A", "B"), interp("B", "C"), interp("C", "D")])
            .unwrap();
        assert!(find_chain(&ctx, &kind("A"), &kind("D"), 2).is_none());
        assert!(find_chain(&ctx, &kind("A"), &kind("D"), 3).is_some());
    }

    #[test]
    fn shortest_chain_wins() {
        let ctx = Context::default()
            .assert_all([
                interp("A", "B"),
                interp("B", "D"),
                interp("A", "C"),
                interp("C", "B"),
            ])
            .unwrap();
        let chain = find_chain(&ctx, &kind("A"), &kind("D"), 8).unwrap();
        assert_eq!(chain.len(), 2);
    }

    #[test]
    fn equal_length_ties_break_lexicographically() {
        // Two length-2 routes A->B->D and A->C->D; the A->B edge name sorts
        // before A->C, so the B route must win.
        let ctx = Context::default()
            .assert_all([
                interp("A", "C"),
                interp("C", "D"),
                interp("A", "B"),
                interp("B", "D"),
            ])
            .unwrap();
        let chain = find_chain(&ctx, &kind("A"), &kind("D"), 8).unwrap();
        assert_eq!(chain.edges[0].to, kind("B"));
    }

    #[test]
    fn partial_edge_makes_chain_partial() {
        let mut edge = InterpEdge::new(kind("B"), kind("C"), InterpKind::Partial, "x").unwrap();
        edge.context_label = "kb".to_string();
        let ctx = Context::default()
            .assert_all([
                interp("A", "B"),
                Assertion::claim(AssertionForm::Interpretation(edge)),
            ])
            .unwrap();
        let chain = find_chain(&ctx, &kind("A"), &kind("C"), 8).unwrap();
        assert_eq!(chain.kind(), InterpKind::Partial);
    }

    #[test]
    fn splicing_chains_matches_direct_search() {
        let ctx = Context::default()
            .assert_all([interp("A", "B"), interp("B", "C")])
            .unwrap();
        let left = find_chain(&ctx, &kind("A"), &kind("B"), 8).unwrap();
        let right = find_chain(&ctx, &kind("B"), &kind("C"), 8).unwrap();
        let spliced = left.then(&right).unwrap();
        let direct = find_chain(&ctx, &kind("A"), &kind("C"), 8).unwrap();
        assert_eq!(spliced.from, direct.from);
        assert_eq!(spliced.to, direct.to);
        assert_eq!(spliced.len(), direct.len());
        assert_eq!(spliced.kind(), direct.kind());
    }
}
