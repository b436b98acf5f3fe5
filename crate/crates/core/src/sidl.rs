//! Parser for semantically annotated component interface definitions.
//!
//! The surface syntax is small: `Class`/`Type` blocks containing `method`
//! (provided) and `callmethod` (required) declarations, `-- requires:` line
//! comments carrying preconditions, and `/** ... **/` documentation comments
//! carrying `@tag` semantic properties. `end;`, `EndClass`, and `EndType`
//! are all accepted as block terminators.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contract::{parse_contract, ContractExpr};

/// The documented property vocabulary. Tags outside this list are reported
/// as warnings and skipped.
pub const TAG_VOCABULARY: &[&str] = &[
    "author",
    "bon",
    "bug",
    "copyright",
    "description",
    "history",
    "license",
    "title",
    "references",
    "use",
    "hides",
    "overrides",
    "realizes",
    "ensure",
    "generate",
    "invariant",
    "modifies",
    "require",
    "concurrency",
    "param",
    "return",
    "exception",
    "idea",
    "review",
    "todo",
    "version",
    "deprecated",
    "since",
    "design",
    "equivalent",
    "example",
    "see",
    "guard",
    "values",
    "time-complexity",
    "space-complexity",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SidlError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unknown keyword `{keyword}`")]
    UnknownKeyword {
        line: usize,
        col: usize,
        keyword: String,
    },
    #[error("{line}:{col}: duplicate {direction} method `{name}`")]
    DuplicateMethod {
        line: usize,
        col: usize,
        direction: &'static str,
        name: String,
    },
    #[error("{line}:{col}: duplicate parameter `{name}`")]
    DuplicateParameter {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: invalid contract: {message}")]
    Contract {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("expected exactly one component, found {0}")]
    ComponentCount(usize),
}

/// A warning produced while parsing; never fatal on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownTag {
    pub tag: String,
    pub line: usize,
}

impl fmt::Display for UnknownTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: unknown tag `@{}`", self.line, self.tag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclSort {
    Class,
    Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticProperty {
    pub tag: String,
    pub value: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub return_type: Option<String>,
    pub precondition: Option<ContractExpr>,
    pub properties: Vec<SemanticProperty>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDecl {
    pub name: String,
    pub decl_sort: DeclSort,
    pub provided: Vec<MethodDecl>,
    pub required: Vec<MethodDecl>,
    pub properties: Vec<SemanticProperty>,
}

impl ComponentDecl {
    pub fn methods(&self) -> impl Iterator<Item = (&MethodDecl, bool)> {
        self.provided
            .iter()
            .map(|m| (m, true))
            .chain(self.required.iter().map(|m| (m, false)))
    }
}

/// Result of parsing a source file: its components plus collected warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub components: Vec<ComponentDecl>,
    pub warnings: Vec<UnknownTag>,
}

/// Parse a source file that may declare several components.
pub fn parse_components(source: &str) -> Result<ParseOutcome, SidlError> {
    let tokens = lex(source)?;
    Parser { tokens, pos: 0 }.file()
}

/// Parse a source expected to contain exactly one component.
pub fn parse_component(source: &str) -> Result<ComponentDecl, SidlError> {
    let outcome = parse_components(source)?;
    match <[ComponentDecl; 1]>::try_from(outcome.components) {
        Ok([decl]) => Ok(decl),
        Err(many) => Err(SidlError::ComponentCount(many.len())),
    }
}

/// Extract `@tag value description` properties from the inner text of a
/// documentation comment. Descriptions fold across lines until the next tag;
/// order is preserved. Unknown tags yield one warning each and are skipped.
pub fn parse_properties(comment: &str) -> (Vec<SemanticProperty>, Vec<UnknownTag>) {
    let mut properties = Vec::new();
    let mut warnings = Vec::new();
    let mut current: Option<(SemanticProperty, bool)> = None;

    for (index, raw) in comment.lines().enumerate() {
        let line = raw.trim().trim_start_matches('*').trim();
        if let Some(rest) = line.strip_prefix('@') {
            if let Some((prop, known)) = current.take() {
                if known {
                    properties.push(prop);
                }
            }
            let (tag, remainder) = match rest.find(char::is_whitespace) {
                Some(split) => (&rest[..split], rest[split..].trim_start()),
                None => (rest, ""),
            };
            let (value, description) = split_value(remainder);
            let known = TAG_VOCABULARY.contains(&tag);
            if !known {
                warnings.push(UnknownTag {
                    tag: tag.to_string(),
                    line: index + 1,
                });
            }
            current = Some((
                SemanticProperty {
                    tag: tag.to_string(),
                    value,
                    description,
                },
                known,
            ));
        } else if let Some((prop, _)) = current.as_mut() {
            if !line.is_empty() {
                if !prop.description.is_empty() {
                    prop.description.push(' ');
                }
                prop.description.push_str(line);
            }
        }
        // Text before the first tag is the plain description; not a property.
    }
    if let Some((prop, known)) = current.take() {
        if known {
            properties.push(prop);
        }
    }
    (properties, warnings)
}

/// First token of a property payload is the value; a leading balanced
/// parenthesis group counts as one token. The rest is description.
fn split_value(payload: &str) -> (String, String) {
    let payload = payload.trim();
    if payload.is_empty() {
        return (String::new(), String::new());
    }
    if payload.starts_with('(') {
        let mut depth = 0usize;
        for (i, c) in payload.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        let value = payload[..=i].to_string();
                        let description = payload[i + 1..].trim().to_string();
                        return (value, description);
                    }
                }
                _ => {}
            }
        }
        // Unbalanced; fall through to whitespace split.
    }
    match payload.find(char::is_whitespace) {
        Some(split) => (
            payload[..split].to_string(),
            payload[split..].trim().to_string(),
        ),
        None => (payload.to_string(), String::new()),
    }
}

/// Render a component back to canonical source text. The output reparses to
/// an equal `ComponentDecl`.
pub fn pretty_print(decl: &ComponentDecl) -> String {
    let mut out = String::new();
    print_properties(&decl.properties, "", &mut out);
    let keyword = match decl.decl_sort {
        DeclSort::Class => "Class",
        DeclSort::Type => "Type",
    };
    out.push_str(keyword);
    out.push(' ');
    out.push_str(&decl.name);
    out.push('\n');
    for (method, provided) in decl.methods() {
        print_properties(&method.properties, "    ", &mut out);
        if let Some(pre) = &method.precondition {
            out.push_str("    -- requires: ");
            out.push_str(&pre.to_string());
            out.push('\n');
        }
        out.push_str("    ");
        out.push_str(if provided { "method" } else { "callmethod" });
        out.push(' ');
        out.push_str(&method.name);
        out.push('(');
        let params: Vec<String> = method
            .params
            .iter()
            .map(|(name, ty)| format!("{name}: {ty}"))
            .collect();
        out.push_str(&params.join("; "));
        out.push(')');
        if let Some(ret) = &method.return_type {
            out.push_str(": ");
            out.push_str(ret);
        }
        out.push_str(";\n");
    }
    out.push_str("end;\n");
    out
}

fn print_properties(properties: &[SemanticProperty], indent: &str, out: &mut String) {
    if properties.is_empty() {
        return;
    }
    out.push_str(indent);
    out.push_str("/**\n");
    for prop in properties {
        out.push_str(indent);
        out.push_str(" * @");
        out.push_str(&prop.tag);
        if !prop.value.is_empty() {
            out.push(' ');
            out.push_str(&prop.value);
        }
        if !prop.description.is_empty() {
            out.push(' ');
            out.push_str(&prop.description);
        }
        out.push('\n');
    }
    out.push_str(indent);
    out.push_str(" **/\n");
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Colon,
    Semicolon,
    Comma,
    Doc(String),
    Requires(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, SidlError> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! bump {
        () => {{
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }

    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let (tok_line, tok_col) = (line, col);
        if c == '-' && source[offset..].starts_with("--") {
            bump!();
            bump!();
            let mut text = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d == '\n' {
                    break;
                }
                text.push(bump!());
            }
            let trimmed = text.trim();
            if let Some(rest) = trimmed.strip_prefix("requires:") {
                tokens.push(Token {
                    tok: Tok::Requires(rest.trim().to_string()),
                    line: tok_line,
                    col: tok_col,
                });
            }
            // Other `--` lines are plain comments.
            continue;
        }
        if c == '/' && source[offset..].starts_with("/*") {
            bump!();
            bump!();
            while matches!(chars.peek(), Some((_, '*'))) {
                bump!();
            }
            let mut body = String::new();
            loop {
                match chars.peek() {
                    Some(&(inner_offset, '*')) if source[inner_offset..].starts_with("*/")
                        || source[inner_offset..].starts_with("**/") =>
                    {
                        while matches!(chars.peek(), Some((_, '*'))) {
                            bump!();
                        }
                        if matches!(chars.peek(), Some((_, '/'))) {
                            bump!();
                            break;
                        }
                        body.push('*');
                    }
                    Some(_) => body.push(bump!()),
                    None => {
                        return Err(SidlError::Syntax {
                            line: tok_line,
                            col: tok_col,
                            message: "unterminated documentation comment".to_string(),
                        })
                    }
                }
            }
            tokens.push(Token {
                tok: Tok::Doc(body),
                line: tok_line,
                col: tok_col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while matches!(
                chars.peek(),
                Some((_, d)) if d.is_ascii_alphanumeric() || *d == '_'
            ) {
                ident.push(bump!());
            }
            tokens.push(Token {
                tok: Tok::Ident(ident),
                line: tok_line,
                col: tok_col,
            });
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            ';' => Tok::Semicolon,
            ',' => Tok::Comma,
            other => {
                return Err(SidlError::Syntax {
                    line: tok_line,
                    col: tok_col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        bump!();
        tokens.push(Token {
            tok,
            line: tok_line,
            col: tok_col,
        });
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), SidlError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Token {
                tok: Tok::Ident(name),
                line,
                col,
            }) => Ok((name, line, col)),
            _ => Err(SidlError::Syntax {
                line,
                col,
                message: format!("expected {what}"),
            }),
        }
    }

    fn expect_tok(&mut self, tok: Tok, what: &str) -> Result<(), SidlError> {
        let (line, col) = self.here();
        match self.next() {
            Some(token) if token.tok == tok => Ok(()),
            _ => Err(SidlError::Syntax {
                line,
                col,
                message: format!("expected {what}"),
            }),
        }
    }

    fn file(&mut self) -> Result<ParseOutcome, SidlError> {
        let mut components = Vec::new();
        let mut warnings = Vec::new();
        while let Some(token) = self.peek().cloned() {
            let mut properties = Vec::new();
            if let Tok::Doc(body) = &token.tok {
                let (props, mut warns) = parse_properties(body);
                for warn in &mut warns {
                    warn.line += token.line - 1;
                }
                warnings.extend(warns);
                properties = props;
                self.next();
            }
            let (keyword, line, col) = self.expect_ident("`Class` or `Type`")?;
            let decl_sort = match keyword.as_str() {
                "Class" => DeclSort::Class,
                "Type" => DeclSort::Type,
                other => {
                    return Err(SidlError::UnknownKeyword {
                        line,
                        col,
                        keyword: other.to_string(),
                    })
                }
            };
            let component = self.component(decl_sort, properties, &mut warnings)?;
            components.push(component);
        }
        Ok(ParseOutcome {
            components,
            warnings,
        })
    }

    fn component(
        &mut self,
        decl_sort: DeclSort,
        properties: Vec<SemanticProperty>,
        warnings: &mut Vec<UnknownTag>,
    ) -> Result<ComponentDecl, SidlError> {
        let (name, _, _) = self.expect_ident("component name")?;
        let mut provided: Vec<MethodDecl> = Vec::new();
        let mut required: Vec<MethodDecl> = Vec::new();

        let mut pending_contracts: Vec<(String, usize, usize)> = Vec::new();
        let mut pending_properties: Vec<SemanticProperty> = Vec::new();

        loop {
            let (line, col) = self.here();
            let token = self.next().ok_or(SidlError::Syntax {
                line,
                col,
                message: "unterminated component: expected `end;`, `EndClass`, or `EndType`"
                    .to_string(),
            })?;
            match token.tok {
                Tok::Requires(text) => {
                    pending_contracts.push((text, token.line, token.col));
                }
                Tok::Doc(body) => {
                    let (props, mut warns) = parse_properties(&body);
                    for warn in &mut warns {
                        warn.line += token.line - 1;
                    }
                    warnings.extend(warns);
                    pending_properties.extend(props);
                }
                Tok::Ident(word) => match word.as_str() {
                    "method" | "callmethod" => {
                        let provided_direction = word == "method";
                        let method = self.method(
                            std::mem::take(&mut pending_contracts),
                            std::mem::take(&mut pending_properties),
                        )?;
                        let bucket = if provided_direction {
                            &mut provided
                        } else {
                            &mut required
                        };
                        if bucket.iter().any(|m| m.name == method.name) {
                            return Err(SidlError::DuplicateMethod {
                                line: token.line,
                                col: token.col,
                                direction: if provided_direction {
                                    "provided"
                                } else {
                                    "required"
                                },
                                name: method.name,
                            });
                        }
                        bucket.push(method);
                    }
                    "end" => {
                        if matches!(self.peek(), Some(t) if t.tok == Tok::Semicolon) {
                            self.next();
                        }
                        break;
                    }
                    "EndClass" | "EndType" => {
                        if matches!(self.peek(), Some(t) if t.tok == Tok::Semicolon) {
                            self.next();
                        }
                        break;
                    }
                    other => {
                        return Err(SidlError::UnknownKeyword {
                            line: token.line,
                            col: token.col,
                            keyword: other.to_string(),
                        })
                    }
                },
                _ => {
                    return Err(SidlError::Syntax {
                        line: token.line,
                        col: token.col,
                        message: "expected a member declaration or terminator".to_string(),
                    })
                }
            }
        }

        Ok(ComponentDecl {
            name,
            decl_sort,
            provided,
            required,
            properties,
        })
    }

    fn method(
        &mut self,
        contracts: Vec<(String, usize, usize)>,
        properties: Vec<SemanticProperty>,
    ) -> Result<MethodDecl, SidlError> {
        let (name, name_line, name_col) = self.expect_ident("method name")?;
        self.expect_tok(Tok::LParen, "`(`")?;
        let mut params: Vec<(String, String)> = Vec::new();
        if !matches!(self.peek(), Some(t) if t.tok == Tok::RParen) {
            loop {
                let (param, line, col) = self.expect_ident("parameter name")?;
                self.expect_tok(Tok::Colon, "`:` after parameter name")?;
                let (ty, _, _) = self.expect_ident("parameter type")?;
                if params.iter().any(|(existing, _)| *existing == param) {
                    return Err(SidlError::DuplicateParameter {
                        line,
                        col,
                        name: param,
                    });
                }
                params.push((param, ty));
                match self.peek().map(|t| t.tok.clone()) {
                    Some(Tok::Semicolon) | Some(Tok::Comma) => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        self.expect_tok(Tok::RParen, "`)`")?;
        let return_type = if matches!(self.peek(), Some(t) if t.tok == Tok::Colon) {
            self.next();
            let (ty, _, _) = self.expect_ident("return type")?;
            Some(ty)
        } else {
            None
        };
        self.expect_tok(Tok::Semicolon, "`;` after method declaration")?;

        // Preconditions arrive both as `-- requires:` comments and `@require`
        // tags; they conjoin into one contract.
        let mut precondition: Option<ContractExpr> = None;
        let mut add = |expr: ContractExpr| {
            precondition = Some(match precondition.take() {
                Some(existing) => existing.and(&expr),
                None => expr,
            });
        };
        for (text, line, col) in contracts {
            let expr = parse_contract(&text).map_err(|e| SidlError::Contract {
                line,
                col,
                message: e.to_string(),
            })?;
            add(expr);
        }
        for prop in &properties {
            if prop.tag == "require" && !prop.value.is_empty() {
                let expr = parse_contract(&prop.value).map_err(|e| SidlError::Contract {
                    line: name_line,
                    col: name_col,
                    message: e.to_string(),
                })?;
                add(expr);
            }
        }

        Ok(MethodDecl {
            name,
            params,
            return_type,
            precondition,
            properties,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RENAME_LISTING: &str = "\
Class SetDate
    callmethod writeDate(day: Integer;
                         month: Integer;
                         year: Integer);
    callmethod readDate();
end;
";

    #[test]
    fn parses_required_methods() {
        let decl = parse_component(RENAME_LISTING).unwrap();
        assert_eq!(decl.name, "SetDate");
        assert_eq!(decl.decl_sort, DeclSort::Class);
        assert!(decl.provided.is_empty());
        let names: Vec<&str> = decl.required.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["writeDate", "readDate"]);
        assert_eq!(
            decl.required[0].params,
            vec![
                ("day".to_string(), "Integer".to_string()),
                ("month".to_string(), "Integer".to_string()),
                ("year".to_string(), "Integer".to_string()),
            ]
        );
        assert!(decl.required[1].params.is_empty());
    }

    #[test]
    fn empty_component_parses() {
        let decl = parse_component("Class X end;").unwrap();
        assert!(decl.provided.is_empty());
        assert!(decl.required.is_empty());
    }

    #[test]
    fn precondition_comment_attaches_to_next_method() {
        let source = "\
Class ISODate
    -- requires: year > 1970
    method setDate(year: Integer;
                   month: Integer;
                   day: Integer);
    method getDate(): ISODate;
EndClass
";
        let decl = parse_component(source).unwrap();
        assert_eq!(decl.provided.len(), 2);
        let set_date = &decl.provided[0];
        assert_eq!(
            set_date.precondition.as_ref().unwrap().to_string(),
            "year>1970"
        );
        assert!(decl.provided[1].precondition.is_none());
        assert_eq!(decl.provided[1].return_type.as_deref(), Some("ISODate"));
    }

    #[test]
    fn all_three_terminators_are_accepted() {
        for term in ["end;", "end", "EndClass", "EndType"] {
            let source = format!("Class X {term}");
            assert!(parse_components(&source).is_ok(), "{term}");
        }
    }

    #[test]
    fn unknown_keyword_is_reported_with_position() {
        let err = parse_components("Class X\n    export foo();\nend;").unwrap_err();
        assert_eq!(
            err,
            SidlError::UnknownKeyword {
                line: 2,
                col: 5,
                keyword: "export".to_string(),
            }
        );
    }

    #[test]
    fn duplicate_methods_per_direction_are_rejected() {
        let source = "Class X\n    method f();\n    method f();\nend;";
        assert!(matches!(
            parse_components(source),
            Err(SidlError::DuplicateMethod { .. })
        ));
        // Same name in opposite directions is fine.
        let source = "Class X\n    method f();\n    callmethod f();\nend;";
        assert!(parse_components(source).is_ok());
    }

    #[test]
    fn properties_from_guarded_query_comment() {
        let comment = "\
 * Returns a boolean indicating whether any debugging
 * facilities are turned off for a particular thread.
 *
 * @concurrency GUARDED
 * @require (thread != null) Parameters must be valid.
 * @modifies QUERY
 * @param thread we are checking the debugging condition
 * of this thread.
 * @return a boolean indicating whether any debugging
 * facilities are turned off for the specified thread.
 * @review kiniry - Are the isOff() methods necessary at all?
";
        let (props, warnings) = parse_properties(comment);
        assert!(warnings.is_empty());
        let tags: Vec<&str> = props.iter().map(|p| p.tag.as_str()).collect();
        assert_eq!(
            tags,
            ["concurrency", "require", "modifies", "param", "return", "review"]
        );
        assert_eq!(props[0].value, "GUARDED");
        assert_eq!(props[1].value, "(thread != null)");
        assert_eq!(props[1].description, "Parameters must be valid.");
        assert_eq!(props[2].value, "QUERY");
        assert_eq!(props[3].value, "thread");
        assert_eq!(
            props[3].description,
            "we are checking the debugging condition of this thread."
        );
    }

    #[test]
    fn empty_comment_has_no_properties() {
        let (props, warnings) = parse_properties("");
        assert!(props.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn realizes_tag_parses() {
        let (props, warnings) = parse_properties("@realizes Date");
        assert!(warnings.is_empty());
        assert_eq!(props.len(), 1);
        assert_eq!(props[0].tag, "realizes");
        assert_eq!(props[0].value, "Date");
    }

    #[test]
    fn every_vocabulary_tag_parses_and_others_warn() {
        for tag in TAG_VOCABULARY {
            let (props, warnings) = parse_properties(&format!("@{tag} value"));
            assert_eq!(props.len(), 1, "@{tag}");
            assert!(warnings.is_empty(), "@{tag}");
        }
        let (props, warnings) = parse_properties("@nonsense value\n@also_nonsense");
        assert!(props.is_empty());
        assert_eq!(warnings.len(), 2);
        assert_eq!(warnings[0].tag, "nonsense");
    }

    #[test]
    fn require_tag_contributes_to_precondition() {
        let source = "\
/**
 * @require (thread != null) Parameters must be valid.
 * @concurrency GUARDED
 **/
Class Debug
    /**
     * @require (thread != null) Parameters must be valid.
     **/
    method isOff(thread: Thread): boolean;
end;
";
        let decl = parse_component(source).unwrap();
        let method = &decl.provided[0];
        assert_eq!(
            method.precondition.as_ref().unwrap().to_string(),
            "thread!=null"
        );
    }

    #[test]
    fn pretty_print_round_trips() {
        let source = "\
/**
 * @realizes Date
 **/
Class SetDate
    -- requires: year > 0
    callmethod writeDate(day: Integer; month: Integer; year: Integer);
    callmethod readDate(): Date;
end;
";
        let outcome = parse_components(source).unwrap();
        let printed = pretty_print(&outcome.components[0]);
        let reparsed = parse_components(&printed).unwrap();
        assert_eq!(outcome.components, reparsed.components);
    }

    #[test]
    fn doc_comment_endings_both_parse() {
        for ending in ["*/", "**/"] {
            let source = format!("/** @realizes Date {ending}\nClass X end;");
            let outcome = parse_components(&source).unwrap();
            assert_eq!(outcome.components[0].properties.len(), 1);
        }
    }
}
