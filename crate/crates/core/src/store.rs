//! The assertion knowledge base: assets, kind expressions, assertions with
//! truth structures, and contexts with inference closure.
//!
//! A [`Context`] is an immutable value. `assert` returns a new context and
//! rejects assertions that would corrupt the store (inheritance or inclusion
//! cycles, conflicting literal bindings). `close` saturates the context under
//! the inference rules: transitivity of inheritance/inclusion/partial
//! equivalence, symmetric-transitive full equivalence, interpretation edges
//! induced by inheritance, and flattening of composite realizations.
//! Reflexive facts and identity interpretations are virtual: `holds` answers
//! them, but they are never stored, keeping every context finite.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::ConversionSpec;
use crate::canonical::CanonicalizationRule;

/// Agent recorded on interpretation edges derived by closure from
/// inheritance assertions.
pub const DERIVED_AGENT: &str = "parent_interp";

/// Default label for contexts created without an explicit one.
pub const DEFAULT_LABEL: &str = "kb";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid asset name `{0}`")]
    InvalidName(String),
    #[error("composition requires at least two operands")]
    CompositionArity,
    #[error("`{0}` must be a kind here")]
    NotAKind(AssetId),
    #[error("`{0}` must be an instance here")]
    NotAnInstance(AssetId),
    #[error("{relation} of `{from}` under `{to}` would create a cycle")]
    Cycle {
        relation: &'static str,
        from: AssetId,
        to: AssetId,
    },
    #[error("`{asset}` is already bound to \"{existing}\"; cannot rebind to \"{attempted}\"")]
    Conflict {
        asset: AssetId,
        existing: String,
        attempted: String,
    },
    #[error("belief degree {0}/{1} lies outside [0, 1]")]
    DegreeRange(u32, u32),
    #[error("belief degree denominator must be nonzero")]
    DegreeZeroDenominator,
    #[error("`{0}` must be a single identifier token")]
    InvalidToken(String),
    #[error("sorts of `{a}` and `{b}` disagree")]
    SortMismatch { a: AssetId, b: AssetId },
    #[error("identity interpretation must run from an asset to itself and be full")]
    MalformedIdentity,
    #[error("a canonicalization rule for `{0}` already exists")]
    DuplicateRule(AssetId),
    #[error("`{target}` cannot be a canonical target: it is itself canonicalized to `{further}`")]
    RuleChain { target: AssetId, further: AssetId },
}

/// Whether an asset names a kind (classifier) or an instance (realization).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Sort {
    Kind,
    Instance,
}

/// Identity of an asset: a dotted-path name plus its sort. `(name, sort)`
/// pairs are unique; the kind `Date` and an instance `Date` are distinct
/// assets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssetId {
    name: String,
    sort: Sort,
}

/// `true` when every dot-separated segment is an identifier.
pub fn valid_dotted_name(name: &str) -> bool {
    !name.is_empty() && name.split('.').all(valid_identifier)
}

/// `true` for a single `[A-Za-z_][A-Za-z0-9_]*` token.
pub fn valid_identifier(segment: &str) -> bool {
    let mut chars = segment.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => false,
    }
}

impl AssetId {
    pub fn new(name: impl Into<String>, sort: Sort) -> Result<Self, StoreError> {
        let name = name.into();
        if !valid_dotted_name(&name) {
            return Err(StoreError::InvalidName(name));
        }
        Ok(AssetId { name, sort })
    }

    pub fn kind(name: impl Into<String>) -> Result<Self, StoreError> {
        AssetId::new(name, Sort::Kind)
    }

    pub fn instance(name: impl Into<String>) -> Result<Self, StoreError> {
        AssetId::new(name, Sort::Instance)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    pub fn is_kind(&self) -> bool {
        self.sort == Sort::Kind
    }

    /// Final dotted-path segment, e.g. `Parameter0Name` of
    /// `Debug.isOff.Parameter0Name`.
    pub fn last_segment(&self) -> &str {
        self.name.rsplit('.').next().unwrap_or(&self.name)
    }

    /// Child asset `<self>.<segment>` of the same sort.
    pub fn child(&self, segment: &str) -> Result<Self, StoreError> {
        if !valid_identifier(segment) {
            return Err(StoreError::InvalidName(segment.to_string()));
        }
        AssetId::new(format!("{}.{}", self.name, segment), self.sort)
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Composition operators. All three share the same generic closure behavior:
/// realizing a composition realizes each operand.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum ComposeOp {
    Plus,
    Tensor,
    Circ,
}

/// A kind-level expression: an atomic kind or a composition of at least two
/// sub-expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KindExpr {
    Atom(AssetId),
    Compose {
        op: ComposeOp,
        operands: Vec<KindExpr>,
    },
}

impl KindExpr {
    pub fn atom(id: AssetId) -> Result<Self, StoreError> {
        if !id.is_kind() {
            return Err(StoreError::NotAKind(id));
        }
        Ok(KindExpr::Atom(id))
    }

    pub fn compose(op: ComposeOp, operands: Vec<KindExpr>) -> Result<Self, StoreError> {
        if operands.len() < 2 {
            return Err(StoreError::CompositionArity);
        }
        Ok(KindExpr::Compose { op, operands })
    }

    /// All atomic kinds mentioned, left to right, composites flattened.
    pub fn atoms(&self) -> Vec<&AssetId> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a AssetId>) {
        match self {
            KindExpr::Atom(id) => out.push(id),
            KindExpr::Compose { operands, .. } => {
                for operand in operands {
                    operand.collect_atoms(out);
                }
            }
        }
    }

    fn validate(&self) -> Result<(), StoreError> {
        match self {
            KindExpr::Atom(id) => {
                if !id.is_kind() {
                    return Err(StoreError::NotAKind(id.clone()));
                }
            }
            KindExpr::Compose { operands, .. } => {
                if operands.len() < 2 {
                    return Err(StoreError::CompositionArity);
                }
                for operand in operands {
                    operand.validate()?;
                }
            }
        }
        Ok(())
    }
}

/// An exact rational belief degree in `[0, 1]`, kept normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Degree {
    num: u32,
    den: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Degree {
    pub fn new(num: u32, den: u32) -> Result<Self, StoreError> {
        if den == 0 {
            return Err(StoreError::DegreeZeroDenominator);
        }
        if num > den {
            return Err(StoreError::DegreeRange(num, den));
        }
        let g = gcd(num, den).max(1);
        Ok(Degree {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let lhs = u64::from(self.num) * u64::from(other.den);
        let rhs = u64::from(other.num) * u64::from(self.den);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Provenance of an assertion: a universally accepted claim, or a belief
/// with a graded degree of conviction held by an author. Claims carry no
/// author; they are accepted independent of who recorded them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TruthStructure {
    Claim,
    Belief { degree: Degree, author: String },
}

impl TruthStructure {
    pub fn belief(degree: Degree, author: impl Into<String>) -> Result<Self, StoreError> {
        let author = author.into();
        if !valid_identifier(&author) {
            return Err(StoreError::InvalidToken(author));
        }
        Ok(TruthStructure::Belief { degree, author })
    }
}

/// Whether an interpretation preserves all structure or only some.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum InterpKind {
    Full,
    Partial,
}

impl fmt::Display for InterpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterpKind::Full => f.write_str("full"),
            InterpKind::Partial => f.write_str("partial"),
        }
    }
}

/// A registered interpretation from one asset to another by an agent in a
/// context. May carry a conversion realization (e.g. an arithmetic template).
/// Identity edges are virtual and never stored; `is_identity` only appears on
/// edges synthesized in answers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InterpEdge {
    pub from: AssetId,
    pub to: AssetId,
    pub kind: InterpKind,
    pub agent: String,
    pub context_label: String,
    pub realization: Option<ConversionSpec>,
    pub is_identity: bool,
}

impl InterpEdge {
    pub fn new(
        from: AssetId,
        to: AssetId,
        kind: InterpKind,
        agent: impl Into<String>,
    ) -> Result<Self, StoreError> {
        let agent = agent.into();
        if !valid_identifier(&agent) {
            return Err(StoreError::InvalidToken(agent));
        }
        if from.sort() != to.sort() {
            return Err(StoreError::SortMismatch { a: from, b: to });
        }
        Ok(InterpEdge {
            from,
            to,
            kind,
            agent,
            context_label: DEFAULT_LABEL.to_string(),
            realization: None,
            is_identity: false,
        })
    }

    /// The always-defined identity interpretation on an asset.
    pub fn identity(asset: AssetId) -> Self {
        InterpEdge {
            from: asset.clone(),
            to: asset,
            kind: InterpKind::Full,
            agent: "id".to_string(),
            context_label: DEFAULT_LABEL.to_string(),
            realization: None,
            is_identity: true,
        }
    }

    pub fn with_realization(mut self, spec: ConversionSpec) -> Self {
        self.realization = Some(spec);
        self
    }

    pub fn with_context_label(mut self, label: impl Into<String>) -> Self {
        self.context_label = label.into();
        self
    }

    fn validate(&self) -> Result<(), StoreError> {
        if self.is_identity && (self.from != self.to || self.kind != InterpKind::Full) {
            return Err(StoreError::MalformedIdentity);
        }
        if !valid_identifier(&self.agent) {
            return Err(StoreError::InvalidToken(self.agent.clone()));
        }
        if self.from.sort() != self.to.sort() {
            return Err(StoreError::SortMismatch {
                a: self.from.clone(),
                b: self.to.clone(),
            });
        }
        Ok(())
    }
}

/// The judgment forms a context can hold.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssertionForm {
    /// `instance : kind-expression`
    Realization { instance: AssetId, kind: KindExpr },
    /// `child < parent`
    Inheritance { child: AssetId, parent: AssetId },
    /// `part ⊂ whole`
    Inclusion { part: AssetId, whole: AssetId },
    /// `a ≗ b`
    FullEquiv { a: AssetId, b: AssetId },
    /// `lesser ⋖ greater`
    PartialEquiv { lesser: AssetId, greater: AssetId },
    /// `asset ≡ "literal"`
    TextualEquiv { asset: AssetId, literal: String },
    /// `from ⇝ to` (full) or `from ↪ to` (partial)
    Interpretation(InterpEdge),
}

/// An assertion: a judgment form plus the truth structure backing it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Assertion {
    pub form: AssertionForm,
    pub provenance: TruthStructure,
}

impl Assertion {
    /// Claim-level assertion.
    pub fn claim(form: AssertionForm) -> Self {
        Assertion {
            form,
            provenance: TruthStructure::Claim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Inheritance,
    Inclusion,
}

/// An immutable set of assertions plus canonicalization rules and grounds.
///
/// Equality compares asserted content only; the derived closure cache is
/// recomputable and excluded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Context {
    label: String,
    assertions: BTreeSet<Assertion>,
    canon_rules: BTreeMap<AssetId, CanonicalizationRule>,
    grounds: BTreeSet<AssetId>,
    derived: BTreeSet<AssertionForm>,
    closed: bool,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.assertions == other.assertions
            && self.canon_rules == other.canon_rules
            && self.grounds == other.grounds
    }
}

impl Eq for Context {}

impl Default for Context {
    fn default() -> Self {
        Context::new(DEFAULT_LABEL)
    }
}

impl Context {
    pub fn new(label: impl Into<String>) -> Self {
        Context {
            label: label.into(),
            assertions: BTreeSet::new(),
            canon_rules: BTreeMap::new(),
            grounds: BTreeSet::new(),
            derived: BTreeSet::new(),
            closed: false,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter()
    }

    pub fn derived(&self) -> impl Iterator<Item = &AssertionForm> {
        self.derived.iter()
    }

    /// Asserted and derived forms together.
    pub fn forms(&self) -> impl Iterator<Item = &AssertionForm> {
        self.assertions
            .iter()
            .map(|a| &a.form)
            .chain(self.derived.iter())
    }

    pub fn canon_rules(&self) -> impl Iterator<Item = &CanonicalizationRule> {
        self.canon_rules.values()
    }

    pub fn canon_rule(&self, source: &AssetId) -> Option<&CanonicalizationRule> {
        self.canon_rules.get(source)
    }

    pub fn grounds(&self) -> impl Iterator<Item = &AssetId> {
        self.grounds.iter()
    }

    pub fn has_ground(&self) -> bool {
        !self.grounds.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty() && self.canon_rules.is_empty() && self.grounds.is_empty()
    }

    /// Add one assertion, returning the extended context.
    ///
    /// Reflexive forms (self-inheritance, self-inclusion, self-equivalence,
    /// identity interpretations) are virtual truths: they are accepted and
    /// dropped, never stored.
    pub fn assert(&self, assertion: Assertion) -> Result<Context, StoreError> {
        let mut next = self.clone();
        next.insert(assertion)?;
        next.closed = false;
        Ok(next)
    }

    /// Add many assertions with a single clone.
    pub fn assert_all(
        &self,
        assertions: impl IntoIterator<Item = Assertion>,
    ) -> Result<Context, StoreError> {
        let mut next = self.clone();
        for assertion in assertions {
            next.insert(assertion)?;
        }
        next.closed = false;
        Ok(next)
    }

    fn insert(&mut self, assertion: Assertion) -> Result<(), StoreError> {
        if let TruthStructure::Belief { author, .. } = &assertion.provenance {
            if !valid_identifier(author) {
                return Err(StoreError::InvalidToken(author.clone()));
            }
        }
        match &assertion.form {
            AssertionForm::Realization { instance, kind } => {
                if instance.sort() != Sort::Instance {
                    return Err(StoreError::NotAnInstance(instance.clone()));
                }
                kind.validate()?;
            }
            AssertionForm::Inheritance { child, parent } => {
                if !child.is_kind() {
                    return Err(StoreError::NotAKind(child.clone()));
                }
                if !parent.is_kind() {
                    return Err(StoreError::NotAKind(parent.clone()));
                }
                if child == parent {
                    return Ok(()); // reflexivity is implicit
                }
                if self.reaches(parent, child, Relation::Inheritance) {
                    return Err(StoreError::Cycle {
                        relation: "inheritance",
                        from: child.clone(),
                        to: parent.clone(),
                    });
                }
            }
            AssertionForm::Inclusion { part, whole } => {
                if part.sort() != whole.sort() {
                    return Err(StoreError::SortMismatch {
                        a: part.clone(),
                        b: whole.clone(),
                    });
                }
                if part == whole {
                    return Ok(());
                }
                if self.reaches(whole, part, Relation::Inclusion) {
                    return Err(StoreError::Cycle {
                        relation: "inclusion",
                        from: part.clone(),
                        to: whole.clone(),
                    });
                }
            }
            AssertionForm::FullEquiv { a, b } => {
                if a.sort() != b.sort() {
                    return Err(StoreError::SortMismatch {
                        a: a.clone(),
                        b: b.clone(),
                    });
                }
                if a == b {
                    return Ok(());
                }
            }
            AssertionForm::PartialEquiv { lesser, greater } => {
                if lesser.sort() != greater.sort() {
                    return Err(StoreError::SortMismatch {
                        a: lesser.clone(),
                        b: greater.clone(),
                    });
                }
                if lesser == greater {
                    return Ok(());
                }
            }
            AssertionForm::TextualEquiv { asset, literal } => {
                if let Some(existing) = self.literal_of(asset) {
                    if existing != literal {
                        return Err(StoreError::Conflict {
                            asset: asset.clone(),
                            existing: existing.to_string(),
                            attempted: literal.clone(),
                        });
                    }
                }
            }
            AssertionForm::Interpretation(edge) => {
                edge.validate()?;
                if edge.is_identity || edge.from == edge.to {
                    return Ok(()); // identity interpretations are implicit
                }
            }
        }
        self.assertions.insert(assertion);
        Ok(())
    }

    /// Register a canonicalization rule. Re-adding an identical rule is a
    /// no-op; a second distinct rule for the same source kind is an error,
    /// as is any rule chain that would leave a target non-canonical.
    pub fn add_rule(&self, rule: CanonicalizationRule) -> Result<Context, StoreError> {
        if let Some(existing) = self.canon_rules.get(rule.source()) {
            if *existing == rule {
                return Ok(self.clone());
            }
            return Err(StoreError::DuplicateRule(rule.source().clone()));
        }
        // The target of every rule must itself be canonical: it may carry no
        // rule or only a self-rule.
        if let Some(further) = self.canon_rules.get(rule.target()) {
            if further.source() != further.target() {
                return Err(StoreError::RuleChain {
                    target: rule.target().clone(),
                    further: further.target().clone(),
                });
            }
        }
        if rule.source() != rule.target() {
            for existing in self.canon_rules.values() {
                if existing.target() == rule.source() {
                    return Err(StoreError::RuleChain {
                        target: rule.source().clone(),
                        further: rule.target().clone(),
                    });
                }
            }
        }
        let mut next = self.clone();
        next.canon_rules.insert(rule.source().clone(), rule);
        next.closed = false;
        Ok(next)
    }

    /// Mark a kind as a ground: a universally shared ontology element.
    pub fn add_ground(&self, kind: AssetId) -> Result<Context, StoreError> {
        if !kind.is_kind() {
            return Err(StoreError::NotAKind(kind));
        }
        let mut next = self.clone();
        next.grounds.insert(kind);
        Ok(next)
    }

    /// Merge another context's content into this one, validating every
    /// assertion against the combined store.
    pub fn merge(&self, other: &Context) -> Result<Context, StoreError> {
        let mut next = self.assert_all(other.assertions.iter().cloned())?;
        for rule in other.canon_rules.values() {
            next = next.add_rule(rule.clone())?;
        }
        for ground in &other.grounds {
            next = next.add_ground(ground.clone())?;
        }
        Ok(next)
    }

    fn literal_of(&self, asset: &AssetId) -> Option<&str> {
        self.assertions.iter().find_map(|a| match &a.form {
            AssertionForm::TextualEquiv { asset: bound, literal } if bound == asset => {
                Some(literal.as_str())
            }
            _ => None,
        })
    }

    /// The literal bound to an asset via textual equivalence, if any.
    pub fn literal(&self, asset: &AssetId) -> Option<&str> {
        self.literal_of(asset)
    }

    fn reaches(&self, start: &AssetId, goal: &AssetId, relation: Relation) -> bool {
        if start == goal {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.clone()];
        while let Some(node) = stack.pop() {
            if !seen.insert(node.clone()) {
                continue;
            }
            for next in self.successors(&node, relation) {
                if next == *goal {
                    return true;
                }
                stack.push(next);
            }
        }
        false
    }

    fn successors(&self, node: &AssetId, relation: Relation) -> Vec<AssetId> {
        self.forms()
            .filter_map(|form| match (relation, form) {
                (Relation::Inheritance, AssertionForm::Inheritance { child, parent })
                    if child == node =>
                {
                    Some(parent.clone())
                }
                (Relation::Inclusion, AssertionForm::Inclusion { part, whole })
                    if part == node =>
                {
                    Some(whole.clone())
                }
                _ => None,
            })
            .collect()
    }

    /// Saturate the context under the inference rules. Idempotent and
    /// monotone; asserted content is untouched, new facts land in the
    /// derived set.
    pub fn close(&self) -> Context {
        if self.closed {
            return self.clone();
        }
        let mut next = self.clone();
        loop {
            let before = next.derived.len();
            let fresh = next.derivation_pass();
            for form in fresh {
                if !next.assertions.iter().any(|a| a.form == form) {
                    next.derived.insert(form);
                }
            }
            if next.derived.len() == before {
                break;
            }
        }
        next.closed = true;
        next
    }

    fn derivation_pass(&self) -> Vec<AssertionForm> {
        let mut out = Vec::new();
        let forms: Vec<&AssertionForm> = self.forms().collect();

        // Transitivity of inheritance, inclusion, and partial equivalence.
        for a in &forms {
            for b in &forms {
                match (a, b) {
                    (
                        AssertionForm::Inheritance { child, parent },
                        AssertionForm::Inheritance {
                            child: mid,
                            parent: top,
                        },
                    ) if parent == mid && child != top => {
                        out.push(AssertionForm::Inheritance {
                            child: child.clone(),
                            parent: top.clone(),
                        });
                    }
                    (
                        AssertionForm::Inclusion { part, whole },
                        AssertionForm::Inclusion {
                            part: mid,
                            whole: outer,
                        },
                    ) if whole == mid && part != outer => {
                        out.push(AssertionForm::Inclusion {
                            part: part.clone(),
                            whole: outer.clone(),
                        });
                    }
                    (
                        AssertionForm::PartialEquiv { lesser, greater },
                        AssertionForm::PartialEquiv {
                            lesser: mid,
                            greater: top,
                        },
                    ) if greater == mid && lesser != top => {
                        out.push(AssertionForm::PartialEquiv {
                            lesser: lesser.clone(),
                            greater: top.clone(),
                        });
                    }
                    _ => {}
                }
            }
        }

        // Symmetric-transitive closure of full equivalence.
        for a in &forms {
            if let AssertionForm::FullEquiv { a: x, b: y } = a {
                out.push(AssertionForm::FullEquiv {
                    a: y.clone(),
                    b: x.clone(),
                });
                for b in &forms {
                    if let AssertionForm::FullEquiv { a: y2, b: z } = b {
                        if y == y2 && x != z {
                            out.push(AssertionForm::FullEquiv {
                                a: x.clone(),
                                b: z.clone(),
                            });
                        }
                    }
                }
            }
        }

        // Inheritance induces the interpretation pair: a full interpretation
        // from parent to child and a partial one back; their composite is the
        // identity on the parent, which stays virtual.
        for a in &forms {
            if let AssertionForm::Inheritance { child, parent } = a {
                if let (Ok(down), Ok(up)) = (
                    InterpEdge::new(
                        parent.clone(),
                        child.clone(),
                        InterpKind::Full,
                        DERIVED_AGENT,
                    ),
                    InterpEdge::new(
                        child.clone(),
                        parent.clone(),
                        InterpKind::Partial,
                        DERIVED_AGENT,
                    ),
                ) {
                    out.push(AssertionForm::Interpretation(
                        down.with_context_label(self.label.clone()),
                    ));
                    out.push(AssertionForm::Interpretation(
                        up.with_context_label(self.label.clone()),
                    ));
                }
            }
        }

        // Realizing a composition realizes each operand.
        for a in &forms {
            if let AssertionForm::Realization { instance, kind } = a {
                if !matches!(kind, KindExpr::Atom(_)) {
                    for atom in kind.atoms() {
                        out.push(AssertionForm::Realization {
                            instance: instance.clone(),
                            kind: KindExpr::Atom(atom.clone()),
                        });
                    }
                }
            }
        }

        out.retain(|form| !forms.iter().any(|f| *f == form));
        out
    }

    /// Does a judgment hold in the closure of this context? Reflexive facts
    /// and identity interpretations hold implicitly. Interpretation queries
    /// match on endpoints and interpretation kind, ignoring agent and
    /// realization details.
    pub fn holds(&self, form: &AssertionForm) -> bool {
        if Self::implicit(form) {
            return true;
        }
        if self.closed {
            self.holds_closed(form)
        } else {
            self.close().holds_closed(form)
        }
    }

    fn holds_closed(&self, form: &AssertionForm) -> bool {
        if let AssertionForm::Interpretation(query) = form {
            return self.forms().any(|f| match f {
                AssertionForm::Interpretation(edge) => {
                    edge.from == query.from && edge.to == query.to && edge.kind == query.kind
                }
                _ => false,
            });
        }
        self.forms().any(|f| f == form)
    }

    fn implicit(form: &AssertionForm) -> bool {
        match form {
            AssertionForm::Inheritance { child, parent } => child == parent,
            AssertionForm::Inclusion { part, whole } => part == whole,
            AssertionForm::FullEquiv { a, b } => a == b,
            AssertionForm::PartialEquiv { lesser, greater } => lesser == greater,
            AssertionForm::Interpretation(edge) => {
                edge.from == edge.to && edge.kind == InterpKind::Full
            }
            _ => false,
        }
    }

    /// Direct (asserted) parts of an asset, in order.
    pub fn direct_parts(&self, whole: &AssetId) -> Vec<AssetId> {
        self.assertions
            .iter()
            .filter_map(|a| match &a.form {
                AssertionForm::Inclusion { part, whole: w } if w == whole => Some(part.clone()),
                _ => None,
            })
            .collect()
    }

    /// Direct (asserted) wholes an asset is part of.
    pub fn direct_wholes(&self, part: &AssetId) -> Vec<AssetId> {
        self.assertions
            .iter()
            .filter_map(|a| match &a.form {
                AssertionForm::Inclusion { part: p, whole } if p == part => Some(whole.clone()),
                _ => None,
            })
            .collect()
    }

    /// Atomic kinds an asset realizes, from asserted and derived facts.
    pub fn realized_kinds(&self, asset: &AssetId) -> BTreeSet<AssetId> {
        let mut kinds = BTreeSet::new();
        for form in self.forms() {
            if let AssertionForm::Realization { instance, kind } = form {
                if instance == asset {
                    for atom in kind.atoms() {
                        kinds.insert(atom.clone());
                    }
                }
            }
        }
        kinds
    }

    /// All stored interpretation edges (asserted and derived).
    pub fn interp_edges(&self) -> Vec<&InterpEdge> {
        self.forms()
            .filter_map(|f| match f {
                AssertionForm::Interpretation(edge) => Some(edge),
                _ => None,
            })
            .collect()
    }

    /// Is there a stored interpretation from `from` to `to` of the given
    /// kind (or an implicit identity)?
    pub fn has_interp(&self, from: &AssetId, to: &AssetId, kind: InterpKind) -> bool {
        if from == to && kind == InterpKind::Full {
            return true;
        }
        self.holds(&AssertionForm::Interpretation(
            InterpEdge::new(from.clone(), to.clone(), kind, "query")
                .expect("query edge is well-formed"),
        ))
    }
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
    fn asset_names_follow_identifier_grammar() {
        assert!(AssetId::kind("Debug.isOff.Parameter0").is_ok());
        assert!(AssetId::kind("_x.y_2").is_ok());
        assert!(matches!(
            AssetId::kind(""),
            Err(StoreError::InvalidName(_))
        ));
        assert!(matches!(
            AssetId::kind("a..b"),
            Err(StoreError::InvalidName(_))
        ));
        assert!(matches!(
            AssetId::kind("1abc"),
            Err(StoreError::InvalidName(_))
        ));
        assert!(matches!(
            AssetId::kind("a-b"),
            Err(StoreError::InvalidName(_))
        ));
    }

    #[test]
    fn kind_and_instance_with_same_name_are_distinct() {
        assert_ne!(kind("Date"), instance("Date"));
    }

    #[test]
    fn basic_insertion() {
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::Inheritance {
                child: kind("PaperbackBook"),
                parent: kind("Book"),
            }))
            .unwrap();
        assert_eq!(ctx.assertions().count(), 1);
    }

    #[test]
    fn inheritance_is_asymmetric() {
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::Inheritance {
                child: kind("A"),
                parent: kind("B"),
            }))
            .unwrap();
        let err = ctx
            .assert(Assertion::claim(AssertionForm::Inheritance {
                child: kind("B"),
                parent: kind("A"),
            }))
            .unwrap_err();
        assert!(matches!(err, StoreError::Cycle { .. }));
    }

    #[test]
    fn longer_inheritance_cycles_are_rejected() {
        let ctx = Context::default()
            .assert_all([
                Assertion::claim(AssertionForm::Inheritance {
                    child: kind("A"),
                    parent: kind("B"),
                }),
                Assertion::claim(AssertionForm::Inheritance {
                    child: kind("B"),
                    parent: kind("C"),
                }),
            ])
            .unwrap();
        assert!(ctx
            .assert(Assertion::claim(AssertionForm::Inheritance {
                child: kind("C"),
                parent: kind("A"),
            }))
            .is_err());
    }

    #[test]
    fn self_loops_are_implicit_not_stored() {
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::Inclusion {
                part: instance("x"),
                whole: instance("x"),
            }))
            .unwrap();
        assert_eq!(ctx.assertions().count(), 0);
        assert!(ctx.holds(&AssertionForm::Inclusion {
            part: instance("x"),
            whole: instance("x"),
        }));
    }

    #[test]
    fn composite_realization_is_stored_and_flattened() {
        let expr = KindExpr::compose(
            ComposeOp::Plus,
            vec![
                KindExpr::atom(kind("PaperbackBook")).unwrap(),
                KindExpr::atom(kind("EnglishDocument")).unwrap(),
            ],
        )
        .unwrap();
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::Realization {
                instance: instance("Portrait"),
                kind: expr.clone(),
            }))
            .unwrap();
        assert_eq!(ctx.assertions().count(), 1);
        let closed = ctx.close();
        assert!(closed.holds(&AssertionForm::Realization {
            instance: instance("Portrait"),
            kind: KindExpr::Atom(kind("PaperbackBook")),
        }));
        assert!(closed.holds(&AssertionForm::Realization {
            instance: instance("Portrait"),
            kind: KindExpr::Atom(kind("EnglishDocument")),
        }));
    }

    #[test]
    fn inheritance_yields_interpretation_pair() {
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::Inheritance {
                child: kind("K"),
                parent: kind("L"),
            }))
            .unwrap();
        // Full interpretation parent -> child, partial child -> parent.
        assert!(ctx.has_interp(&kind("L"), &kind("K"), InterpKind::Full));
        assert!(ctx.has_interp(&kind("K"), &kind("L"), InterpKind::Partial));
        assert!(!ctx.has_interp(&kind("L"), &kind("K"), InterpKind::Partial));
    }

    #[test]
    fn inclusion_is_transitive_in_closure() {
        let ctx = Context::default()
            .assert_all([
                Assertion::claim(AssertionForm::Inclusion {
                    part: instance("a"),
                    whole: instance("b"),
                }),
                Assertion::claim(AssertionForm::Inclusion {
                    part: instance("b"),
                    whole: instance("c"),
                }),
            ])
            .unwrap();
        assert!(ctx.close().holds(&AssertionForm::Inclusion {
            part: instance("a"),
            whole: instance("c"),
        }));
    }

    #[test]
    fn empty_context_holds_nothing_nonreflexive() {
        let ctx = Context::default();
        assert!(!ctx.holds(&AssertionForm::Inheritance {
            child: kind("A"),
            parent: kind("B"),
        }));
    }

    #[test]
    fn full_equiv_closure_is_symmetric_and_transitive() {
        let ctx = Context::default()
            .assert_all([
                Assertion::claim(AssertionForm::FullEquiv {
                    a: instance("x"),
                    b: instance("y"),
                }),
                Assertion::claim(AssertionForm::FullEquiv {
                    a: instance("y"),
                    b: instance("z"),
                }),
            ])
            .unwrap()
            .close();
        assert!(ctx.holds(&AssertionForm::FullEquiv {
            a: instance("z"),
            b: instance("x"),
        }));
    }

    #[test]
    fn textual_equiv_conflict_is_rejected() {
        let ctx = Context::default()
            .assert(Assertion::claim(AssertionForm::TextualEquiv {
                asset: instance("p.Name"),
                literal: "thread".to_string(),
            }))
            .unwrap();
        let err = ctx
            .assert(Assertion::claim(AssertionForm::TextualEquiv {
                asset: instance("p.Name"),
                literal: "task".to_string(),
            }))
            .unwrap_err();
        assert!(matches!(err, StoreError::Conflict { .. }));
        // Rebinding to the same literal is fine.
        assert!(ctx
            .assert(Assertion::claim(AssertionForm::TextualEquiv {
                asset: instance("p.Name"),
                literal: "thread".to_string(),
            }))
            .is_ok());
    }

    #[test]
    fn close_is_idempotent_and_monotone() {
        let ctx = Context::default()
            .assert_all([
                Assertion::claim(AssertionForm::Inheritance {
                    child: kind("A"),
                    parent: kind("B"),
                }),
                Assertion::claim(AssertionForm::Inclusion {
                    part: instance("p"),
                    whole: instance("q"),
                }),
            ])
            .unwrap();
        let once = ctx.close();
        let twice = once.close();
        let once_forms: BTreeSet<_> = once.forms().cloned().collect();
        let twice_forms: BTreeSet<_> = twice.forms().cloned().collect();
        assert_eq!(once_forms, twice_forms);
        let base_forms: BTreeSet<_> = ctx.forms().cloned().collect();
        assert!(once_forms.is_superset(&base_forms));
    }

    #[test]
    fn degrees_are_normalized_and_ordered() {
        let half = Degree::new(2, 4).unwrap();
        assert_eq!(half, Degree::new(1, 2).unwrap());
        assert!(half < Degree::new(3, 4).unwrap());
        assert!(Degree::new(3, 2).is_err());
        assert!(Degree::new(1, 0).is_err());
        assert_eq!(half.to_string(), "1/2");
    }

    #[test]
    fn identity_interpretation_is_virtual() {
        let ctx = Context::default();
        assert!(ctx.has_interp(&kind("K"), &kind("K"), InterpKind::Full));
        let edge = InterpEdge::new(kind("K"), kind("K"), InterpKind::Full, "me").unwrap();
        let ctx = ctx
            .assert(Assertion::claim(AssertionForm::Interpretation(edge)))
            .unwrap();
        assert_eq!(ctx.assertions().count(), 0);
    }
}
