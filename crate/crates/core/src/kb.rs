//! Line-oriented, human-readable persistence for contexts.
//!
//! One statement per line under a `kindkb 1` header. Saving writes asserted
//! facts only (closure is recomputable), in canonical order: lines sorted
//! lexically, which groups statements by keyword. Loading is
//! order-insensitive.
//!
//! Statement forms:
//!
//! ```text
//! inherit <child> <parent>
//! include <part> <whole>
//! realize <instance> <kindexpr>
//! equiv <a> <b>
//! partial <lesser> <greater>
//! textequiv <a> "<literal>"
//! interp <from> <to> full|partial agent <id> [template "<expr>"]
//! canon <kind> -> <kind> { <old>=<new>, ... }
//! ground <kind>
//! ```
//!
//! Any assertion statement may end with `claim` or `belief <p/q> by <author>`;
//! no suffix means claim. `inherit`, `interp`, `canon`, and `ground` name
//! kinds; `include`, `equiv`, `partial`, and `textequiv` name instances;
//! `realize` names an instance and a kind expression (`+`, `*`, `o`
//! composition operators with parentheses).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{ConversionExpr, ConversionSpec, ExprTemplate};
use crate::canonical::CanonicalizationRule;
use crate::store::{
    Assertion, AssertionForm, AssetId, ComposeOp, Context, Degree, InterpEdge, InterpKind,
    KindExpr, TruthStructure,
};

/// Current format version.
pub const KB_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unsupported knowledge base version `{0}` (expected `kindkb {KB_VERSION}`)")]
    VersionMismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One persisted statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statement {
    Assert(Assertion),
    Canon(CanonicalizationRule),
    Ground(AssetId),
}

/// A parsed knowledge base document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbDocument {
    pub version: u32,
    pub statements: Vec<Statement>,
}

impl KbDocument {
    pub fn from_context(ctx: &Context) -> Self {
        let mut statements: Vec<Statement> = Vec::new();
        for assertion in ctx.assertions() {
            statements.push(Statement::Assert(assertion.clone()));
        }
        for rule in ctx.canon_rules() {
            statements.push(Statement::Canon(rule.clone()));
        }
        for ground in ctx.grounds() {
            statements.push(Statement::Ground(ground.clone()));
        }
        KbDocument {
            version: KB_VERSION,
            statements,
        }
    }

    pub fn into_context(self) -> Result<Context, KbError> {
        let mut ctx = Context::default();
        for (index, statement) in self.statements.into_iter().enumerate() {
            ctx = apply_statement(&ctx, statement).map_err(|message| KbError::Parse {
                line: index + 2, // after the header line
                message,
            })?;
        }
        Ok(ctx)
    }
}

fn apply_statement(ctx: &Context, statement: Statement) -> Result<Context, String> {
    match statement {
        Statement::Assert(assertion) => ctx.assert(assertion).map_err(|e| e.to_string()),
        Statement::Canon(rule) => ctx.add_rule(rule).map_err(|e| e.to_string()),
        Statement::Ground(kind) => ctx.add_ground(kind).map_err(|e| e.to_string()),
    }
}

/// Serialize asserted facts, one statement per line, canonically ordered.
pub fn save(ctx: &Context) -> String {
    let mut lines: Vec<String> = KbDocument::from_context(ctx)
        .statements
        .iter()
        .map(render_statement)
        .collect();
    lines.sort();
    lines.dedup();
    let mut out = format!("kindkb {KB_VERSION}\n");
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parse a serialized knowledge base back into a context.
pub fn load(text: &str) -> Result<Context, KbError> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line.trim().to_string(),
            None => return Err(KbError::VersionMismatch("<empty file>".to_string())),
        }
    };
    if header != format!("kindkb {KB_VERSION}") {
        return Err(KbError::VersionMismatch(header));
    }
    let mut ctx = Context::default();
    for (index, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let statement = parse_statement(line).map_err(|message| KbError::Parse {
            line: index + 1,
            message,
        })?;
        ctx = apply_statement(&ctx, statement).map_err(|message| KbError::Parse {
            line: index + 1,
            message,
        })?;
    }
    Ok(ctx)
}

/// Render one statement as its grammar line.
pub fn render_statement(statement: &Statement) -> String {
    match statement {
        Statement::Assert(assertion) => {
            let body = match &assertion.form {
                AssertionForm::Inheritance { child, parent } => {
                    format!("inherit {child} {parent}")
                }
                AssertionForm::Inclusion { part, whole } => format!("include {part} {whole}"),
                AssertionForm::Realization { instance, kind } => {
                    format!("realize {instance} {}", render_kind_expr(kind, false))
                }
                AssertionForm::FullEquiv { a, b } => format!("equiv {a} {b}"),
                AssertionForm::PartialEquiv { lesser, greater } => {
                    format!("partial {lesser} {greater}")
                }
                AssertionForm::TextualEquiv { asset, literal } => {
                    format!("textequiv {asset} \"{}\"", escape(literal))
                }
                AssertionForm::Interpretation(edge) => {
                    let mut line = format!(
                        "interp {} {} {} agent {}",
                        edge.from, edge.to, edge.kind, edge.agent
                    );
                    if let Some(ConversionSpec::Expr(expr)) = &edge.realization {
                        if let Some(template) = &expr.template {
                            line.push_str(&format!(" template \"{}\"", escape(&template.to_string())));
                        }
                    }
                    line
                }
            };
            match &assertion.provenance {
                TruthStructure::Claim => body,
                TruthStructure::Belief { degree, author } => {
                    format!("{body} belief {degree} by {author}")
                }
            }
        }
        Statement::Canon(rule) => {
            let renames: Vec<String> = rule
                .renames()
                .iter()
                .map(|(from, to)| format!("{from}={to}"))
                .collect();
            format!(
                "canon {} -> {} {{ {} }}",
                rule.source(),
                rule.target(),
                renames.join(", ")
            )
        }
        Statement::Ground(kind) => format!("ground {kind}"),
    }
}

fn render_kind_expr(expr: &KindExpr, nested: bool) -> String {
    match expr {
        KindExpr::Atom(id) => id.name().to_string(),
        KindExpr::Compose { op, operands } => {
            let symbol = match op {
                ComposeOp::Plus => "+",
                ComposeOp::Tensor => "*",
                ComposeOp::Circ => "o",
            };
            let rendered: Vec<String> = operands
                .iter()
                .map(|operand| render_kind_expr(operand, true))
                .collect();
            let joined = rendered.join(&format!(" {symbol} "));
            if nested {
                format!("({joined})")
            } else {
                joined
            }
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Arrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Equals,
    Comma,
    Plus,
    Star,
}

fn tokenize(line: &str) -> Result<Vec<Tok>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '"' => {
                chars.next();
                let mut value = String::new();
                loop {
                    match chars.next() {
                        Some('\\') => match chars.next() {
                            Some('\\') => value.push('\\'),
                            Some('"') => value.push('"'),
                            Some(other) => {
                                return Err(format!("invalid escape `\\{other}`"));
                            }
                            None => return Err("unterminated string".to_string()),
                        },
                        Some('"') => break,
                        Some(other) => value.push(other),
                        None => return Err("unterminated string".to_string()),
                    }
                }
                tokens.push(Tok::Quoted(value));
            }
            '-' => {
                chars.next();
                if chars.peek() == Some(&'>') {
                    chars.next();
                    tokens.push(Tok::Arrow);
                } else {
                    return Err("stray `-` (expected `->`)".to_string());
                }
            }
            '{' => {
                chars.next();
                tokens.push(Tok::LBrace);
            }
            '}' => {
                chars.next();
                tokens.push(Tok::RBrace);
            }
            '(' => {
                chars.next();
                tokens.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                tokens.push(Tok::RParen);
            }
            '=' => {
                chars.next();
                tokens.push(Tok::Equals);
            }
            ',' => {
                chars.next();
                tokens.push(Tok::Comma);
            }
            '+' => {
                chars.next();
                tokens.push(Tok::Plus);
            }
            '*' => {
                chars.next();
                tokens.push(Tok::Star);
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '/' => {
                let mut word = String::new();
                while matches!(
                    chars.peek(),
                    Some(&d) if d.is_ascii_alphanumeric() || d == '_' || d == '.' || d == '/'
                ) {
                    word.push(chars.next().unwrap());
                }
                tokens.push(Tok::Word(word));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(tokens)
}

struct StatementParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl StatementParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn word(&mut self, what: &str) -> Result<String, String> {
        match self.next() {
            Some(Tok::Word(word)) => Ok(word),
            other => Err(format!("expected {what}, found {other:?}")),
        }
    }

    fn keyword(&mut self, expected: &str) -> Result<(), String> {
        let word = self.word(&format!("`{expected}`"))?;
        if word == expected {
            Ok(())
        } else {
            Err(format!("expected `{expected}`, found `{word}`"))
        }
    }

    fn kind(&mut self, what: &str) -> Result<AssetId, String> {
        let name = self.word(what)?;
        AssetId::kind(name).map_err(|e| e.to_string())
    }

    fn instance(&mut self, what: &str) -> Result<AssetId, String> {
        let name = self.word(what)?;
        AssetId::instance(name).map_err(|e| e.to_string())
    }

    fn quoted(&mut self, what: &str) -> Result<String, String> {
        match self.next() {
            Some(Tok::Quoted(value)) => Ok(value),
            other => Err(format!("expected {what}, found {other:?}")),
        }
    }

    /// `term (op term)*` with a single operator per level.
    fn kind_expr(&mut self) -> Result<KindExpr, String> {
        let first = self.kind_term()?;
        let op = match self.peek() {
            Some(Tok::Plus) => ComposeOp::Plus,
            Some(Tok::Star) => ComposeOp::Tensor,
            Some(Tok::Word(w)) if w == "o" => ComposeOp::Circ,
            _ => return Ok(first),
        };
        let mut operands = vec![first];
        loop {
            match (op, self.peek()) {
                (ComposeOp::Plus, Some(Tok::Plus))
                | (ComposeOp::Tensor, Some(Tok::Star)) => {
                    self.next();
                }
                (ComposeOp::Circ, Some(Tok::Word(w))) if w == "o" => {
                    self.next();
                }
                _ => break,
            }
            operands.push(self.kind_term()?);
        }
        KindExpr::compose(op, operands).map_err(|e| e.to_string())
    }

    fn kind_term(&mut self) -> Result<KindExpr, String> {
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            let inner = self.kind_expr()?;
            if self.next() != Some(Tok::RParen) {
                return Err("expected `)` in kind expression".to_string());
            }
            return Ok(inner);
        }
        let kind = self.kind("a kind name")?;
        KindExpr::atom(kind).map_err(|e| e.to_string())
    }

    /// Optional trailing `claim` or `belief <p/q> by <author>`.
    fn provenance(&mut self) -> Result<TruthStructure, String> {
        match self.peek() {
            None => Ok(TruthStructure::Claim),
            Some(Tok::Word(w)) if w == "claim" => {
                self.next();
                Ok(TruthStructure::Claim)
            }
            Some(Tok::Word(w)) if w == "belief" => {
                self.next();
                let fraction = self.word("a degree `p/q`")?;
                let (num, den) = fraction
                    .split_once('/')
                    .ok_or_else(|| format!("expected `p/q` degree, found `{fraction}`"))?;
                let num: u32 = num.parse().map_err(|_| "invalid degree numerator")?;
                let den: u32 = den.parse().map_err(|_| "invalid degree denominator")?;
                let degree = Degree::new(num, den).map_err(|e| e.to_string())?;
                self.keyword("by")?;
                let author = self.word("an author")?;
                TruthStructure::belief(degree, author).map_err(|e| e.to_string())
            }
            Some(other) => Err(format!("unexpected trailing token {other:?}")),
        }
    }

    fn finish(&mut self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(token) => Err(format!("unexpected trailing token {token:?}")),
        }
    }
}

/// Parse a single statement line.
pub fn parse_statement(line: &str) -> Result<Statement, String> {
    let tokens = tokenize(line)?;
    let mut parser = StatementParser { tokens, pos: 0 };
    let keyword = parser.word("a statement keyword")?;
    let statement = match keyword.as_str() {
        "inherit" => {
            let child = parser.kind("a child kind")?;
            let parent = parser.kind("a parent kind")?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::Inheritance { child, parent },
                provenance,
            })
        }
        "include" => {
            let part = parser.instance("a part")?;
            let whole = parser.instance("a whole")?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::Inclusion { part, whole },
                provenance,
            })
        }
        "realize" => {
            let instance = parser.instance("an instance")?;
            let kind = parser.kind_expr()?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::Realization { instance, kind },
                provenance,
            })
        }
        "equiv" => {
            let a = parser.instance("an asset")?;
            let b = parser.instance("an asset")?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::FullEquiv { a, b },
                provenance,
            })
        }
        "partial" => {
            let lesser = parser.instance("an asset")?;
            let greater = parser.instance("an asset")?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::PartialEquiv { lesser, greater },
                provenance,
            })
        }
        "textequiv" => {
            let asset = parser.instance("an asset")?;
            let literal = parser.quoted("a quoted literal")?;
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::TextualEquiv { asset, literal },
                provenance,
            })
        }
        "interp" => {
            let from = parser.kind("a source kind")?;
            let to = parser.kind("a target kind")?;
            let kind_word = parser.word("`full` or `partial`")?;
            let interp_kind = match kind_word.as_str() {
                "full" => InterpKind::Full,
                "partial" => InterpKind::Partial,
                other => return Err(format!("expected `full` or `partial`, found `{other}`")),
            };
            parser.keyword("agent")?;
            let agent = parser.word("an agent identifier")?;
            let mut edge = InterpEdge::new(from.clone(), to.clone(), interp_kind, agent)
                .map_err(|e| e.to_string())?;
            if matches!(parser.peek(), Some(Tok::Word(w)) if w == "template") {
                parser.next();
                let text = parser.quoted("a quoted template")?;
                let template = ExprTemplate::parse(&text).map_err(|e| e.to_string())?;
                edge = edge.with_realization(ConversionSpec::Expr(ConversionExpr {
                    from,
                    to,
                    template: Some(template),
                }));
            }
            let provenance = parser.provenance()?;
            Statement::Assert(Assertion {
                form: AssertionForm::Interpretation(edge),
                provenance,
            })
        }
        "canon" => {
            let source = parser.kind("a source kind")?;
            if parser.next() != Some(Tok::Arrow) {
                return Err("expected `->`".to_string());
            }
            let target = parser.kind("a target kind")?;
            if parser.next() != Some(Tok::LBrace) {
                return Err("expected `{`".to_string());
            }
            let mut renames = std::collections::BTreeMap::new();
            loop {
                match parser.peek() {
                    Some(Tok::RBrace) => {
                        parser.next();
                        break;
                    }
                    Some(Tok::Word(_)) => {
                        let from = parser.word("a feature name")?;
                        if parser.next() != Some(Tok::Equals) {
                            return Err("expected `=` in rename".to_string());
                        }
                        let to = parser.word("a canonical feature name")?;
                        renames.insert(from, to);
                        if parser.peek() == Some(&Tok::Comma) {
                            parser.next();
                        }
                    }
                    other => return Err(format!("expected rename or `}}`, found {other:?}")),
                }
            }
            let rule = CanonicalizationRule::new(source, target, renames)
                .map_err(|e| e.to_string())?;
            Statement::Canon(rule)
        }
        "ground" => {
            let kind = parser.kind("a kind")?;
            Statement::Ground(kind)
        }
        other => return Err(format!("unknown statement keyword `{other}`")),
    };
    parser.finish()?;
    Ok(statement)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(name: &str) -> AssetId {
        AssetId::kind(name).unwrap()
    }

    fn instance(name: &str) -> AssetId {
        AssetId::instance(name).unwrap()
    }

    #[test]
    fn empty_context_saves_as_header_only() {
        assert_eq!(save(&Context::default()), "kindkb 1\n");
    }

    #[test]
    fn version_mismatch_is_rejected() {
        assert!(matches!(load("kindkb 2\n"), Err(KbError::VersionMismatch(_))));
        assert!(matches!(load(""), Err(KbError::VersionMismatch(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load("kindkb 1\ninherit A B\nnonsense Z\n").unwrap_err();
        match err {
            KbError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn round_trip_of_each_statement_kind() {
        let ctx = Context::default()
            .assert_all([
                Assertion::claim(AssertionForm::Inheritance {
                    child: kind("PaperbackBook"),
                    parent: kind("Book"),
                }),
                Assertion::claim(AssertionForm::Inclusion {
                    part: instance("Date.setDate"),
                    whole: instance("Date"),
                }),
                Assertion::claim(AssertionForm::Realization {
                    instance: instance("Portrait"),
                    kind: KindExpr::compose(
                        ComposeOp::Plus,
                        vec![
                            KindExpr::Atom(kind("PaperbackBook")),
                            KindExpr::Atom(kind("EnglishDocument")),
                        ],
                    )
                    .unwrap(),
                }),
                Assertion::claim(AssertionForm::FullEquiv {
                    a: instance("a"),
                    b: instance("b"),
                }),
                Assertion::claim(AssertionForm::PartialEquiv {
                    lesser: instance("less"),
                    greater: instance("more"),
                }),
                Assertion::claim(AssertionForm::TextualEquiv {
                    asset: instance("p.Name"),
                    literal: "say \"hi\" \\ there".to_string(),
                }),
                Assertion {
                    form: AssertionForm::Interpretation(
                        InterpEdge::new(kind("Year"), kind("Month"), InterpKind::Full, "ontology")
                            .unwrap()
                            .with_realization(ConversionSpec::Expr(ConversionExpr {
                                from: kind("Year"),
                                to: kind("Month"),
                                template: Some(
                                    ExprTemplate::parse("year * 12 + month").unwrap(),
                                ),
                            })),
                    ),
                    provenance: TruthStructure::belief(Degree::new(3, 4).unwrap(), "kiniry")
                        .unwrap(),
                },
            ])
            .unwrap()
            .add_rule(
                CanonicalizationRule::new(
                    kind("Date"),
                    kind("Date"),
                    std::collections::BTreeMap::from([(
                        "writeDate".to_string(),
                        "setDate".to_string(),
                    )]),
                )
                .unwrap(),
            )
            .unwrap()
            .add_ground(kind("Day"))
            .unwrap();

        let text = save(&ctx);
        let loaded = load(&text).unwrap();
        assert_eq!(loaded, ctx);
        // Saving again reproduces the same bytes.
        assert_eq!(save(&loaded), text);
    }

    #[test]
    fn load_is_order_insensitive() {
        let text = "kindkb 1\ninherit A B\nground Day\ninclude x.p x\n";
        let reversed = "kindkb 1\ninclude x.p x\nground Day\ninherit A B\n";
        assert_eq!(load(text).unwrap(), load(reversed).unwrap());
    }

    #[test]
    fn statement_lines_render_exactly() {
        let cases = [
            "inherit PaperbackBook Book",
            "include Date.setDate Date",
            "realize Portrait PaperbackBook + EnglishDocument",
            "equiv a b",
            "partial less more",
            "textequiv p.Name \"thread\"",
            "interp Year Month full agent ontology template \"year * 12 + month\"",
            "canon Date -> Date { writeDate=setDate }",
            "ground Day",
            "inherit A B belief 1/2 by someone",
        ];
        for line in cases {
            let statement = parse_statement(line).unwrap();
            assert_eq!(render_statement(&statement), line, "{line}");
        }
    }

    #[test]
    fn claim_suffix_is_accepted_and_normalized_away() {
        let statement = parse_statement("inherit A B claim").unwrap();
        assert_eq!(render_statement(&statement), "inherit A B");
    }

    #[test]
    fn duplicate_canon_rules_are_rejected_at_load() {
        let text = "kindkb 1\ncanon A -> B { }\ncanon A -> C { }\n";
        assert!(load(text).is_err());
    }
}
