//! Semantic compatibility: containment of canonical interfaces, contract
//! implication checking, and construction of the witnessing bridge.
//!
//! A provider satisfies a consumer when every required feature maps onto a
//! provided feature — by identical canonical form (renaming and reordering),
//! or through interpretation chains between the parameter ontologies — and
//! every consumer-side precondition implies the provider-side one. The
//! witness to a compatible verdict is the semantic bridge realizing those
//! mappings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bridge::{
    find_chain, ArgSource, ConversionExpr, ConversionSpec, FeatureMap, MethodSig, SemanticBridge,
};
use crate::canonical::{canonical_in, scope_renames, CanonicalAsset, CanonicalError};
use crate::contract::{CmpOp, ContractExpr, Term};
use crate::kinding::{ComponentKind, FeatureKind};
use crate::kinds;
use crate::store::{AssetId, Context};

/// Default bound on interpretation chain length.
pub const DEFAULT_MAX_CHAIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Implication {
    True,
    False,
    Undecidable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Compatible => f.write_str("compatible"),
            Verdict::Incompatible => f.write_str("incompatible"),
            Verdict::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObligationStatus {
    Discharged,
    Failed,
    /// No consumer-side guarantee was declared; the provider's precondition
    /// becomes a runtime guard in the generated adapter.
    Guarded,
    Undecidable,
}

impl fmt::Display for ObligationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObligationStatus::Discharged => f.write_str("discharged"),
            ObligationStatus::Failed => f.write_str("failed"),
            ObligationStatus::Guarded => f.write_str("guarded"),
            ObligationStatus::Undecidable => f.write_str("undecidable"),
        }
    }
}

/// One contract implication raised by a matched feature pair: the consumer's
/// guarantee must imply the provider's requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    pub feature: String,
    pub antecedent: ContractExpr,
    pub consequent: ContractExpr,
    pub status: ObligationStatus,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.status == ObligationStatus::Guarded {
            write!(f, "{} : guarded", self.consequent)
        } else {
            write!(
                f,
                "{} => {} : {}",
                self.antecedent, self.consequent, self.status
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityResult {
    pub verdict: Verdict,
    pub witness: Option<SemanticBridge>,
    pub obligations: Vec<Obligation>,
    pub diagnostics: Vec<String>,
}

/// Decide whether contract `a` implies contract `b`.
///
/// Sound and complete within the supported fragment: conjunctions of
/// single-variable comparisons against integer constants, plus `= null` /
/// `!= null` checks. Per variable, `a`'s satisfying set must be included in
/// `b`'s. Anything outside the fragment (variable-to-variable comparisons,
/// or one variable used both numerically and against `null`) is undecidable.
pub fn implies(a: &ContractExpr, b: &ContractExpr) -> Implication {
    let analysis_a = match analyze(a) {
        Some(analysis) => analysis,
        None => return Implication::Undecidable,
    };
    let analysis_b = match analyze(b) {
        Some(analysis) => analysis,
        None => return Implication::Undecidable,
    };
    for (var, constraint_a) in &analysis_a.vars {
        if let Some(constraint_b) = analysis_b.vars.get(var) {
            if std::mem::discriminant(constraint_a) != std::mem::discriminant(constraint_b) {
                return Implication::Undecidable;
            }
        }
    }
    if analysis_a.unsat || analysis_a.vars.values().any(VarSet::is_empty) {
        return Implication::True;
    }
    if analysis_b.unsat {
        return Implication::False;
    }
    for (var, constraint_b) in &analysis_b.vars {
        let constraint_a = analysis_a.vars.get(var);
        let included = match (constraint_a, constraint_b) {
            (Some(VarSet::Numeric(a)), VarSet::Numeric(b)) => a.subset_of(b),
            (Some(VarSet::Nullness(a)), VarSet::Nullness(b)) => a.subset_of(b),
            (None, VarSet::Numeric(b)) => NumSet::full().subset_of(b),
            (None, VarSet::Nullness(b)) => NullSet::full().subset_of(b),
            _ => return Implication::Undecidable,
        };
        if !included {
            return Implication::False;
        }
    }
    Implication::True
}

#[derive(Debug)]
enum VarSet {
    Numeric(NumSet),
    Nullness(NullSet),
}

impl VarSet {
    fn is_empty(&self) -> bool {
        match self {
            VarSet::Numeric(set) => set.is_empty(),
            VarSet::Nullness(set) => set.is_empty(),
        }
    }
}

/// `[lo, hi]` minus an excluded point set, with unbounded ends. Bounds use
/// i128 so strict comparisons against extreme constants cannot overflow.
#[derive(Debug)]
struct NumSet {
    lo: Option<i128>,
    hi: Option<i128>,
    excluded: BTreeSet<i64>,
}

impl NumSet {
    fn full() -> Self {
        NumSet {
            lo: None,
            hi: None,
            excluded: BTreeSet::new(),
        }
    }

    fn constrain(&mut self, op: CmpOp, value: i64) {
        let v = i128::from(value);
        match op {
            CmpOp::Lt => self.hi = Some(self.hi.map_or(v - 1, |h| h.min(v - 1))),
            CmpOp::Le => self.hi = Some(self.hi.map_or(v, |h| h.min(v))),
            CmpOp::Gt => self.lo = Some(self.lo.map_or(v + 1, |l| l.max(v + 1))),
            CmpOp::Ge => self.lo = Some(self.lo.map_or(v, |l| l.max(v))),
            CmpOp::Eq => {
                self.lo = Some(self.lo.map_or(v, |l| l.max(v)));
                self.hi = Some(self.hi.map_or(v, |h| h.min(v)));
            }
            CmpOp::Ne => {
                self.excluded.insert(value);
            }
        }
    }

    fn is_empty(&self) -> bool {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => {
                if lo > hi {
                    return true;
                }
                let width = hi - lo + 1;
                let excluded_inside = self
                    .excluded
                    .iter()
                    .filter(|&&x| {
                        let x = i128::from(x);
                        x >= lo && x <= hi
                    })
                    .count();
                i128::try_from(excluded_inside).map(|n| n == width).unwrap_or(false)
            }
            _ => false,
        }
    }

    /// Does every integer in `self` lie in `other`? Assumes `self` nonempty.
    fn subset_of(&self, other: &NumSet) -> bool {
        if other.is_empty() {
            return false;
        }
        if let Some(other_lo) = other.lo {
            match self.lo {
                Some(lo) if lo >= other_lo => {}
                _ => return false,
            }
        }
        if let Some(other_hi) = other.hi {
            match self.hi {
                Some(hi) if hi <= other_hi => {}
                _ => return false,
            }
        }
        // Every point other excludes inside our range must be excluded by us
        // as well.
        for &x in &other.excluded {
            let point = i128::from(x);
            let inside = self.lo.map_or(true, |lo| point >= lo)
                && self.hi.map_or(true, |hi| point <= hi);
            if inside && !self.excluded.contains(&x) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug)]
struct NullSet {
    allows_null: bool,
    allows_not_null: bool,
}

impl NullSet {
    fn full() -> Self {
        NullSet {
            allows_null: true,
            allows_not_null: true,
        }
    }

    fn is_empty(&self) -> bool {
        !self.allows_null && !self.allows_not_null
    }

    fn subset_of(&self, other: &NullSet) -> bool {
        (!self.allows_null || other.allows_null)
            && (!self.allows_not_null || other.allows_not_null)
    }
}

struct Analysis {
    unsat: bool,
    vars: BTreeMap<String, VarSet>,
}

/// Per-variable satisfying sets, or `None` when the contract leaves the
/// decidable fragment.
fn analyze(expr: &ContractExpr) -> Option<Analysis> {
    let mut analysis = Analysis {
        unsat: false,
        vars: BTreeMap::new(),
    };
    for cmp in expr.conjuncts() {
        match (&cmp.lhs, &cmp.rhs) {
            (Term::Var(_), Term::Var(_)) => return None,
            (Term::Var(name), Term::Int(value)) => {
                let entry = analysis
                    .vars
                    .entry(name.clone())
                    .or_insert_with(|| VarSet::Numeric(NumSet::full()));
                match entry {
                    VarSet::Numeric(set) => set.constrain(cmp.op, *value),
                    VarSet::Nullness(_) => return None,
                }
            }
            (Term::Var(name), Term::Null) => {
                let entry = analysis
                    .vars
                    .entry(name.clone())
                    .or_insert_with(|| VarSet::Nullness(NullSet::full()));
                match entry {
                    VarSet::Nullness(set) => match cmp.op {
                        CmpOp::Eq => set.allows_not_null = false,
                        CmpOp::Ne => set.allows_null = false,
                        _ => return None,
                    },
                    VarSet::Numeric(_) => return None,
                }
            }
            (Term::Int(a), Term::Int(b)) => {
                let holds = match cmp.op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Gt => a > b,
                };
                if !holds {
                    analysis.unsat = true;
                }
            }
            (Term::Null, Term::Null) => match cmp.op {
                CmpOp::Eq => {}
                CmpOp::Ne => analysis.unsat = true,
                _ => return None,
            },
            (Term::Int(_), Term::Null) | (Term::Null, Term::Int(_)) => match cmp.op {
                CmpOp::Eq => analysis.unsat = true,
                CmpOp::Ne => {}
                _ => return None,
            },
            // Normalization orients constants to the right; remaining shapes
            // are unreachable.
            _ => return None,
        }
    }
    Some(analysis)
}

/// Are two instances semantically equivalent? Decided by identity of
/// canonical forms.
pub fn semantically_equivalent(
    ctx: &Context,
    i: &AssetId,
    j: &AssetId,
) -> Result<bool, CanonicalError> {
    crate::canonical::fully_equivalent(ctx, i, j)
}

/// Does the canonical form of the provider's provided interface structurally
/// contain the canonical form of the consumer's required interface? This is
/// the direct containment route to compatibility.
pub fn requires_contained(
    ctx: &Context,
    provider: &ComponentKind,
    consumer: &ComponentKind,
) -> Result<bool, CanonicalError> {
    crate::canonical::partially_equivalent(ctx, &consumer.requires, &provider.provides)
}

/// Decide compatibility with the default chain bound.
pub fn check_compatibility(
    ctx: &Context,
    provider: &ComponentKind,
    consumer: &ComponentKind,
) -> CompatibilityResult {
    check_compatibility_bounded(ctx, provider, consumer, DEFAULT_MAX_CHAIN)
}

/// Decide compatibility, bounding ontology chain search at `max_chain`.
pub fn check_compatibility_bounded(
    ctx: &Context,
    provider: &ComponentKind,
    consumer: &ComponentKind,
    max_chain: usize,
) -> CompatibilityResult {
    let closed = ctx.close();
    let mut obligations = Vec::new();
    let mut diagnostics = Vec::new();
    let mut undecidable_canonical = false;
    let mut feature_maps = Vec::new();

    for required in consumer.required_features() {
        match match_feature(&closed, provider, consumer, required, max_chain) {
            Ok(Matched::Feature(provided, args, conversion)) => {
                let obligation = obligation_for(required, provided);
                let guard = match obligation
                    .as_ref()
                    .map(|o| o.status)
                    .unwrap_or(ObligationStatus::Discharged)
                {
                    ObligationStatus::Guarded => Some(
                        provided
                            .precondition
                            .clone()
                            .expect("guarded obligations carry a provider contract"),
                    ),
                    _ => None,
                };
                if let Some(obligation) = obligation {
                    obligations.push(obligation);
                }
                feature_maps.push(FeatureMap {
                    required: required.feature.clone(),
                    provided: provided.feature.clone(),
                    conversion,
                    guard,
                    exposed: signature_of(required),
                    delegate: signature_of(provided),
                    args,
                });
            }
            Ok(Matched::None(reason)) => diagnostics.push(reason),
            Err(err) => {
                undecidable_canonical = true;
                diagnostics.push(err.to_string());
            }
        }
    }

    let verdict = if undecidable_canonical {
        Verdict::Unknown
    } else if !diagnostics.is_empty()
        || obligations
            .iter()
            .any(|o| o.status == ObligationStatus::Failed)
    {
        Verdict::Incompatible
    } else if obligations
        .iter()
        .any(|o| o.status == ObligationStatus::Undecidable)
    {
        Verdict::Unknown
    } else {
        Verdict::Compatible
    };

    let witness = if verdict == Verdict::Compatible {
        Some(SemanticBridge {
            provider: provider.component.clone(),
            consumer: consumer.component.clone(),
            feature_maps,
        })
    } else {
        None
    };

    CompatibilityResult {
        verdict,
        witness,
        obligations,
        diagnostics,
    }
}

fn signature_of(feature: &FeatureKind) -> MethodSig {
    MethodSig {
        name: feature.name.clone(),
        params: feature
            .params
            .iter()
            .map(|p| (p.name.clone(), p.type_name.clone()))
            .collect(),
        return_type: feature.return_type.clone(),
    }
}

fn obligation_for(required: &FeatureKind, provided: &FeatureKind) -> Option<Obligation> {
    let provider_pre = provided.precondition.as_ref()?;
    let status = match &required.precondition {
        Some(consumer_pre) => match implies(consumer_pre, provider_pre) {
            Implication::True => ObligationStatus::Discharged,
            Implication::False => ObligationStatus::Failed,
            Implication::Undecidable => ObligationStatus::Undecidable,
        },
        None => ObligationStatus::Guarded,
    };
    Some(Obligation {
        feature: required.name.clone(),
        antecedent: required.precondition.clone().unwrap_or_default(),
        consequent: provider_pre.clone(),
        status,
    })
}

enum Matched<'p> {
    Feature(&'p FeatureKind, Vec<ArgSource>, ConversionSpec),
    None(String),
}

/// The canonical name of a feature: its declared name mapped through the
/// renames in scope at the feature's position in the inclusion tree.
pub fn canonical_feature_name(
    closed: &Context,
    feature: &FeatureKind,
) -> Result<String, CanonicalError> {
    let renames = scope_renames(closed, &feature.feature)?;
    Ok(renames
        .get(&feature.name)
        .cloned()
        .unwrap_or_else(|| feature.name.clone()))
}

/// A feature's canonical form with its direct name part removed: the
/// signature shape used for name-independent matching.
fn shape_of(canonical: &CanonicalAsset) -> CanonicalAsset {
    let identifier = kinds::identifier();
    CanonicalAsset::new(
        canonical.canonical_name.clone(),
        canonical
            .parts
            .iter()
            .filter(|p| p.canonical_name != identifier)
            .cloned()
            .collect(),
        canonical.literals.clone(),
    )
}

fn match_feature<'p>(
    closed: &Context,
    provider: &'p ComponentKind,
    consumer: &ComponentKind,
    required: &FeatureKind,
    max_chain: usize,
) -> Result<Matched<'p>, CanonicalError> {
    let required_name = canonical_feature_name(closed, required)?;
    let required_canonical = canonical_in(closed, &required.feature)?;

    let mut by_name: Vec<&FeatureKind> = Vec::new();
    for provided in provider.provided_features() {
        if canonical_feature_name(closed, provided)? == required_name {
            by_name.push(provided);
        }
    }

    // Identical canonical forms: rename/reorder conversion.
    let mut exact: Vec<&FeatureKind> = Vec::new();
    for provided in &by_name {
        if canonical_in(closed, &provided.feature)? == required_canonical {
            exact.push(provided);
        }
    }
    if let Some(provided) = exact.first() {
        let (args, conversion) = direct_conversion(closed, required, provided)?;
        return Ok(Matched::Feature(provided, args, conversion));
    }

    // Same canonical name, different structure: connect the parameter
    // ontologies through interpretation chains.
    if by_name.len() == 1 {
        let provided = by_name[0];
        return Ok(
            match ontology_conversion(closed, required, provided, max_chain) {
                Some((args, conversion)) => Matched::Feature(provided, args, conversion),
                None => Matched::None(format!(
                    "feature `{}` matches `{}` by name but no conversion between their \
                     signatures exists",
                    required.name, provided.name
                )),
            },
        );
    }
    if by_name.len() > 1 {
        return Ok(Matched::None(format!(
            "feature `{}` has {} same-named provider candidates with differing structure; \
             refusing to guess",
            required.name,
            by_name.len()
        )));
    }

    // No name match: fall back to a unique signature shape.
    let required_shape = shape_of(&required_canonical);
    let mut by_shape: Vec<&FeatureKind> = Vec::new();
    for provided in provider.provided_features() {
        if shape_of(&canonical_in(closed, &provided.feature)?) == required_shape {
            by_shape.push(provided);
        }
    }
    match by_shape.len() {
        1 => {
            let provided = by_shape[0];
            let (args, conversion) = direct_conversion(closed, required, provided)?;
            Ok(Matched::Feature(provided, args, conversion))
        }
        0 => Ok(Matched::None(format!(
            "no provided feature matches required `{}` of `{}`",
            required.name,
            consumer.name()
        ))),
        n => Ok(Matched::None(format!(
            "required `{}` is ambiguous: {} provided features share its signature shape",
            required.name, n
        ))),
    }
}

/// Align parameters between two canonically equal features and build the
/// rename/reorder conversion.
fn direct_conversion(
    closed: &Context,
    required: &FeatureKind,
    provided: &FeatureKind,
) -> Result<(Vec<ArgSource>, ConversionSpec), CanonicalError> {
    let required_params: Vec<CanonicalAsset> = required
        .params
        .iter()
        .map(|p| canonical_in(closed, &p.asset))
        .collect::<Result<_, _>>()?;
    let provided_params: Vec<CanonicalAsset> = provided
        .params
        .iter()
        .map(|p| canonical_in(closed, &p.asset))
        .collect::<Result<_, _>>()?;

    let mut used = vec![false; required_params.len()];
    let mut permutation = Vec::with_capacity(provided_params.len());
    for provided_param in &provided_params {
        let source = required_params
            .iter()
            .enumerate()
            .find(|(i, candidate)| !used[*i] && *candidate == provided_param);
        match source {
            Some((i, _)) => {
                used[i] = true;
                permutation.push(i);
            }
            None => {
                // Canonical equality of the features guarantees alignment;
                // reaching here means the caller matched by shape with
                // differing literals, which direct conversion cannot bridge.
                return Ok((
                    Vec::new(),
                    ConversionSpec::Rename(BTreeMap::new()),
                ));
            }
        }
    }

    let args: Vec<ArgSource> = permutation
        .iter()
        .map(|&i| ArgSource::Direct { consumer_index: i })
        .collect();

    let mut renames = BTreeMap::new();
    if required.name != provided.name {
        renames.insert(required.name.clone(), provided.name.clone());
    }
    for (j, &i) in permutation.iter().enumerate() {
        let from = &required.params[i].name;
        let to = &provided.params[j].name;
        if from != to {
            renames.insert(from.clone(), to.clone());
        }
    }

    let identity = permutation.iter().enumerate().all(|(j, &i)| i == j);
    let conversion = match (identity, renames.is_empty()) {
        (true, _) => ConversionSpec::Rename(renames),
        (false, true) => ConversionSpec::Reorder(permutation),
        (false, false) => ConversionSpec::Composite(vec![
            ConversionSpec::Rename(renames),
            ConversionSpec::Reorder(permutation),
        ]),
    };
    Ok((args, conversion))
}

/// Ontology kinds attached to a parameter: every realized kind other than
/// the built-in `Parameter`.
fn ontology_kinds(closed: &Context, param: &AssetId) -> Vec<AssetId> {
    let builtin = kinds::parameter();
    closed
        .realized_kinds(param)
        .into_iter()
        .filter(|k| *k != builtin)
        .collect()
}

/// Source every provider parameter either directly (canonically equal
/// consumer parameter) or through the shortest interpretation chain between
/// parameter ontology kinds. Requires at least one ground in the context.
fn ontology_conversion(
    closed: &Context,
    required: &FeatureKind,
    provided: &FeatureKind,
    max_chain: usize,
) -> Option<(Vec<ArgSource>, ConversionSpec)> {
    if !closed.has_ground() {
        return None;
    }
    if required.return_type.is_some() && required.return_type != provided.return_type {
        return None;
    }

    let required_params: Vec<CanonicalAsset> = required
        .params
        .iter()
        .map(|p| canonical_in(closed, &p.asset).ok())
        .collect::<Option<_>>()?;

    let mut args = Vec::new();
    let mut stages: Vec<ConversionSpec> = Vec::new();
    for provided_param in &provided.params {
        let provided_canonical = canonical_in(closed, &provided_param.asset).ok()?;
        if let Some(i) = required_params
            .iter()
            .position(|candidate| *candidate == provided_canonical)
        {
            args.push(ArgSource::Direct { consumer_index: i });
            continue;
        }

        // Chain from a consumer parameter's ontology into this parameter's
        // ontology; prefer the shortest chain, then the lowest argument.
        let targets = ontology_kinds(closed, &provided_param.asset);
        let mut best: Option<(usize, usize, Vec<ConversionExpr>)> = None;
        for (i, consumer_param) in required.params.iter().enumerate() {
            for source in ontology_kinds(closed, &consumer_param.asset) {
                for target in &targets {
                    if let Some(chain) = find_chain(closed, &source, target, max_chain) {
                        if chain.is_empty() {
                            continue;
                        }
                        let steps: Vec<ConversionExpr> = chain
                            .edges
                            .iter()
                            .map(|edge| ConversionExpr {
                                from: edge.from.clone(),
                                to: edge.to.clone(),
                                template: match &edge.realization {
                                    Some(ConversionSpec::Expr(expr)) => expr.template.clone(),
                                    _ => None,
                                },
                            })
                            .collect();
                        let candidate = (chain.len(), i, steps);
                        if best
                            .as_ref()
                            .map(|(len, index, _)| (candidate.0, candidate.1) < (*len, *index))
                            .unwrap_or(true)
                        {
                            best = Some(candidate);
                        }
                    }
                }
            }
        }
        let (_, seed_index, steps) = best?;
        for step in &steps {
            stages.push(ConversionSpec::Expr(step.clone()));
        }
        args.push(ArgSource::Converted { seed_index, steps });
    }

    let mut specs = Vec::new();
    if required.name != provided.name {
        specs.push(ConversionSpec::Rename(BTreeMap::from([(
            required.name.clone(),
            provided.name.clone(),
        )])));
    }
    specs.extend(stages);
    Some((args, ConversionSpec::Composite(specs)))
}
