//! Canonical forms and the equivalence decisions built on them.
//!
//! Every asset has a canonical form: a normalized tree whose parts are an
//! unordered multiset and whose identifier literals have been renamed by the
//! canonicalization rules in scope. Two assets are fully equivalent when
//! their canonical forms are identical, and partially equivalent when one
//! canonical form is structurally contained in the other.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinds;
use crate::store::{AssetId, Context, StoreError};

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("multiple canonicalization rules apply to `{asset}`: {rules:?}")]
    AmbiguousRules { asset: AssetId, rules: Vec<String> },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Maps a source kind to a designated canonical kind, renaming identifier
/// literals along the way. The rename map is injective and never chains
/// (no key is also a value).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalizationRule {
    source: AssetId,
    target: AssetId,
    renames: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("canonicalization endpoints must be kinds")]
    NotAKind,
    #[error("rename map is not injective: `{0}` appears as a target twice")]
    NotInjective(String),
    #[error("rename map chains: `{0}` is both renamed and a rename target")]
    Chained(String),
    #[error("rename entries must be identifiers: `{0}`")]
    BadName(String),
}

impl CanonicalizationRule {
    pub fn new(
        source: AssetId,
        target: AssetId,
        renames: BTreeMap<String, String>,
    ) -> Result<Self, RuleError> {
        if !source.is_kind() || !target.is_kind() {
            return Err(RuleError::NotAKind);
        }
        let mut seen = BTreeSet::new();
        for (from, to) in &renames {
            if !crate::store::valid_identifier(from) {
                return Err(RuleError::BadName(from.clone()));
            }
            if !crate::store::valid_identifier(to) {
                return Err(RuleError::BadName(to.clone()));
            }
            if !seen.insert(to.clone()) {
                return Err(RuleError::NotInjective(to.clone()));
            }
        }
        for to in seen {
            if renames.contains_key(&to) {
                return Err(RuleError::Chained(to));
            }
        }
        Ok(CanonicalizationRule {
            source,
            target,
            renames,
        })
    }

    pub fn source(&self) -> &AssetId {
        &self.source
    }

    pub fn target(&self) -> &AssetId {
        &self.target
    }

    pub fn renames(&self) -> &BTreeMap<String, String> {
        &self.renames
    }
}

/// The canonical form of an asset: a canonical name, a multiset of canonical
/// parts, and a multiset of `(slot, literal)` bindings. Parts and literals
/// are kept sorted so that structural equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalAsset {
    pub canonical_name: AssetId,
    pub parts: Vec<CanonicalAsset>,
    pub literals: Vec<(String, String)>,
}

impl CanonicalAsset {
    pub fn new(
        canonical_name: AssetId,
        mut parts: Vec<CanonicalAsset>,
        mut literals: Vec<(String, String)>,
    ) -> Self {
        parts.sort();
        literals.sort();
        CanonicalAsset {
            canonical_name,
            parts,
            literals,
        }
    }

    /// Structural containment: does `self` contain `other` as a part of
    /// itself, recursively, respecting multiplicities?
    pub fn contains(&self, other: &CanonicalAsset) -> bool {
        if self.canonical_name != other.canonical_name {
            return false;
        }
        if !multiset_sub(&other.literals, &self.literals) {
            return false;
        }
        embed(&other.parts, &self.parts)
    }
}

/// Is `small` a sub-multiset of `big`? Both slices sorted.
fn multiset_sub<T: Ord>(small: &[T], big: &[T]) -> bool {
    let mut i = 0;
    for item in small {
        loop {
            if i >= big.len() {
                return false;
            }
            match big[i].cmp(item) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Equal => {
                    i += 1;
                    break;
                }
                std::cmp::Ordering::Greater => return false,
            }
        }
    }
    true
}

/// Injective embedding of `small` parts into `big` parts where each image
/// must contain its preimage. Backtracking search; part lists stay tiny.
fn embed(small: &[CanonicalAsset], big: &[CanonicalAsset]) -> bool {
    fn go(small: &[CanonicalAsset], big: &[CanonicalAsset], used: &mut Vec<bool>, i: usize) -> bool {
        if i == small.len() {
            return true;
        }
        for (j, candidate) in big.iter().enumerate() {
            if !used[j] && candidate.contains(&small[i]) {
                used[j] = true;
                if go(small, big, used, i + 1) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    if small.len() > big.len() {
        return false;
    }
    go(small, big, &mut vec![false; big.len()], 0)
}

/// Compute the canonical form of an asset in a context.
///
/// The applicable canonicalization rule is looked up on the asset's realized
/// kinds and on the kinds of its inclusion ancestors, so canonicalizing a
/// feature or an interface part standalone sees the same renames as
/// canonicalizing its whole component. An asset whose kinds carry no rule is
/// self-canonical: named by its unique kind when it has exactly one, by
/// itself otherwise.
pub fn canonical_form(ctx: &Context, asset: &AssetId) -> Result<CanonicalAsset, CanonicalError> {
    let closed = ctx.close();
    let renames = scope_renames(&closed, asset)?;
    canonicalize(&closed, asset, &renames)
}

/// Re-apply canonicalization to an already canonical tree. The result of
/// `canonical_form` is a fixpoint of this pass.
pub fn recanonicalize(
    ctx: &Context,
    canonical: &CanonicalAsset,
) -> Result<CanonicalAsset, CanonicalError> {
    let name = match ctx.canon_rule(&canonical.canonical_name) {
        Some(rule) => rule.target().clone(),
        None => canonical.canonical_name.clone(),
    };
    let renames = match ctx.canon_rule(&canonical.canonical_name) {
        Some(rule) => rule.renames().clone(),
        None => BTreeMap::new(),
    };
    let parts = canonical
        .parts
        .iter()
        .map(|p| recanonicalize(ctx, p))
        .collect::<Result<Vec<_>, _>>()?;
    let identifier = kinds::identifier();
    let literals = canonical
        .literals
        .iter()
        .map(|(slot, value)| {
            let renamed = if *slot == identifier.name() || slot == identifier.last_segment() {
                renames.get(value).cloned().unwrap_or_else(|| value.clone())
            } else {
                value.clone()
            };
            (slot.clone(), renamed)
        })
        .collect();
    Ok(CanonicalAsset::new(name, parts, literals))
}

/// Two assets are fully equivalent iff their canonical forms are identical.
pub fn fully_equivalent(
    ctx: &Context,
    u: &AssetId,
    v: &AssetId,
) -> Result<bool, CanonicalError> {
    let closed = ctx.close();
    Ok(canonical_in(&closed, u)? == canonical_in(&closed, v)?)
}

/// `u` is partially equivalent to `v` iff the canonical form of `v`
/// structurally contains the canonical form of `u`.
pub fn partially_equivalent(
    ctx: &Context,
    u: &AssetId,
    v: &AssetId,
) -> Result<bool, CanonicalError> {
    let closed = ctx.close();
    let cu = canonical_in(&closed, u)?;
    let cv = canonical_in(&closed, v)?;
    Ok(cv.contains(&cu))
}

/// `canonical_form` against a context already closed by the caller.
pub fn canonical_in(closed: &Context, asset: &AssetId) -> Result<CanonicalAsset, CanonicalError> {
    let renames = scope_renames(closed, asset)?;
    canonicalize(closed, asset, &renames)
}

/// Renames contributed by rules on the asset itself and on its inclusion
/// ancestors. Distinct applicable rules are an ambiguity error.
pub(crate) fn scope_renames(
    closed: &Context,
    asset: &AssetId,
) -> Result<BTreeMap<String, String>, CanonicalError> {
    let mut nodes = vec![asset.clone()];
    let mut seen = BTreeSet::new();
    let mut rules: Vec<&CanonicalizationRule> = Vec::new();
    while let Some(node) = nodes.pop() {
        if !seen.insert(node.clone()) {
            continue;
        }
        for rule in applicable_rules(closed, &node) {
            if !rules.iter().any(|r| **r == *rule) {
                rules.push(rule);
            }
        }
        nodes.extend(closed.direct_wholes(&node));
    }
    if rules.len() > 1 {
        return Err(CanonicalError::AmbiguousRules {
            asset: asset.clone(),
            rules: rules.iter().map(|r| r.source().name().to_string()).collect(),
        });
    }
    Ok(rules
        .first()
        .map(|r| r.renames().clone())
        .unwrap_or_default())
}

fn applicable_rules<'c>(closed: &'c Context, asset: &AssetId) -> Vec<&'c CanonicalizationRule> {
    let mut out = Vec::new();
    if asset.is_kind() {
        if let Some(rule) = closed.canon_rule(asset) {
            out.push(rule);
        }
    }
    for kind in closed.realized_kinds(asset) {
        if let Some(rule) = closed.canon_rule(&kind) {
            if !out.iter().any(|r| **r == *rule) {
                out.push(rule);
            }
        }
    }
    out
}

fn canonicalize(
    closed: &Context,
    asset: &AssetId,
    renames: &BTreeMap<String, String>,
) -> Result<CanonicalAsset, CanonicalError> {
    let own_rules = applicable_rules(closed, asset);
    if own_rules.len() > 1 {
        return Err(CanonicalError::AmbiguousRules {
            asset: asset.clone(),
            rules: own_rules
                .iter()
                .map(|r| r.source().name().to_string())
                .collect(),
        });
    }
    let mut renames = renames.clone();
    if let Some(rule) = own_rules.first() {
        for (k, v) in rule.renames() {
            renames.insert(k.clone(), v.clone());
        }
    }

    let name = canonical_name(closed, asset, own_rules.first().copied());

    let exclusions = kinds::canonical_exclusions();
    let mut parts = Vec::new();
    for part in closed.direct_parts(asset) {
        let part_kinds = closed.realized_kinds(&part);
        if exclusions.iter().any(|k| part_kinds.contains(k)) {
            continue;
        }
        parts.push(canonicalize(closed, &part, &renames)?);
    }

    let identifier = kinds::identifier();
    let is_identifier = closed.realized_kinds(asset).contains(&identifier);
    let literals = closed
        .literal(asset)
        .map(|value| {
            let value = if is_identifier {
                renames.get(value).cloned().unwrap_or_else(|| value.to_string())
            } else {
                value.to_string()
            };
            vec![(name.last_segment().to_string(), value)]
        })
        .unwrap_or_default();

    Ok(CanonicalAsset::new(name, parts, literals))
}

fn canonical_name(
    closed: &Context,
    asset: &AssetId,
    rule: Option<&CanonicalizationRule>,
) -> AssetId {
    if let Some(rule) = rule {
        return rule.target().clone();
    }
    let realized = closed.realized_kinds(asset);
    // Provided and required interfaces canonicalize to a common feature-set
    // kind; that is what makes the containment check between them meaningful.
    let provides = kinds::provides();
    let requires = kinds::requires();
    if realized.contains(&provides) || realized.contains(&requires) {
        return kinds::feature_set();
    }
    if realized.len() == 1 {
        let kind = realized.into_iter().next().expect("len checked");
        return match closed.canon_rule(&kind) {
            Some(rule) => rule.target().clone(),
            None => kind,
        };
    }
    if asset.is_kind() {
        return asset.clone();
    }
    // No kind information or several kinds without a rule: self-canonical.
    asset.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Assertion, AssertionForm, KindExpr};

    fn kind(name: &str) -> AssetId {
        AssetId::kind(name).unwrap()
    }

    fn instance(name: &str) -> AssetId {
        AssetId::instance(name).unwrap()
    }

    fn realize(i: &AssetId, k: &AssetId) -> Assertion {
        Assertion::claim(AssertionForm::Realization {
            instance: i.clone(),
            kind: KindExpr::Atom(k.clone()),
        })
    }

    fn include(part: &AssetId, whole: &AssetId) -> Assertion {
        Assertion::claim(AssertionForm::Inclusion {
            part: part.clone(),
            whole: whole.clone(),
        })
    }

    fn bind(asset: &AssetId, literal: &str) -> Assertion {
        Assertion::claim(AssertionForm::TextualEquiv {
            asset: asset.clone(),
            literal: literal.to_string(),
        })
    }

    /// Two single-feature assets realizing the same kind, one with a
    /// renamed feature name.
    fn renamed_pair() -> (Context, AssetId, AssetId) {
        let date = instance("Date.setDate");
        let setdate = instance("SetDate.writeDate");
        let date_name = instance("Date.setDate.Name");
        let setdate_name = instance("SetDate.writeDate.Name");
        let method = kinds::method();
        let identifier = kinds::identifier();
        let ctx = Context::default()
            .assert_all([
                realize(&date, &method),
                realize(&setdate, &method),
                realize(&date_name, &identifier),
                realize(&setdate_name, &identifier),
                include(&date_name, &date),
                include(&setdate_name, &setdate),
                bind(&date_name, "setDate"),
                bind(&setdate_name, "writeDate"),
                realize(&date, &kind("Date")),
                realize(&setdate, &kind("Date")),
            ])
            .unwrap();
        let rule = CanonicalizationRule::new(
            kind("Date"),
            kind("Date"),
            BTreeMap::from([("writeDate".to_string(), "setDate".to_string())]),
        )
        .unwrap();
        (ctx.add_rule(rule).unwrap(), date, setdate)
    }

    #[test]
    fn renamed_features_share_a_canonical_form() {
        let (ctx, date, setdate) = renamed_pair();
        let a = canonical_form(&ctx, &date).unwrap();
        let b = canonical_form(&ctx, &setdate).unwrap();
        assert_eq!(a, b);
        assert!(fully_equivalent(&ctx, &date, &setdate).unwrap());
    }

    #[test]
    fn canonical_form_of_canonical_form_is_itself() {
        let (ctx, date, _) = renamed_pair();
        let once = canonical_form(&ctx, &date).unwrap();
        let twice = recanonicalize(&ctx, &once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn part_order_does_not_matter() {
        let build = |first: &str, second: &str| {
            let whole = instance("W");
            let p1 = instance(first);
            let p2 = instance(second);
            Context::default()
                .assert_all([include(&p1, &whole), include(&p2, &whole)])
                .unwrap()
        };
        let a = canonical_form(&build("W.a", "W.b"), &instance("W")).unwrap();
        let b = canonical_form(&build("W.b", "W.a"), &instance("W")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn containment_is_reflexive_and_respects_multiplicity() {
        let leaf = CanonicalAsset::new(kind("Leaf"), vec![], vec![]);
        let two = CanonicalAsset::new(kind("Box"), vec![leaf.clone(), leaf.clone()], vec![]);
        let one = CanonicalAsset::new(kind("Box"), vec![leaf.clone()], vec![]);
        assert!(two.contains(&two));
        assert!(two.contains(&one));
        assert!(!one.contains(&two));
    }

    #[test]
    fn partial_equivalence_is_containment() {
        let whole = instance("W");
        let part = instance("W.p");
        let sub = instance("S");
        let subpart = instance("S.p");
        // Give both roots the same realized kind so their canonical names agree.
        let root = kind("Root");
        let ctx = Context::default()
            .assert_all([
                include(&part, &whole),
                include(&subpart, &sub),
                realize(&whole, &root),
                realize(&sub, &root),
                realize(&part, &kinds::parameter()),
                realize(&subpart, &kinds::parameter()),
            ])
            .unwrap();
        assert!(partially_equivalent(&ctx, &sub, &whole).unwrap());
        assert!(partially_equivalent(&ctx, &whole, &sub).unwrap());
        assert!(partially_equivalent(&ctx, &whole, &whole).unwrap());
    }

    #[test]
    fn literal_values_distinguish_assets() {
        let a = instance("a");
        let b = instance("b");
        let ident = kinds::identifier();
        let ctx = Context::default()
            .assert_all([
                realize(&a, &ident),
                realize(&b, &ident),
                bind(&a, "thread"),
                bind(&b, "t"),
            ])
            .unwrap();
        assert!(!fully_equivalent(&ctx, &a, &b).unwrap());
    }

    #[test]
    fn ambiguous_rules_error() {
        let a = instance("a");
        let ctx = Context::default()
            .assert_all([realize(&a, &kind("K1")), realize(&a, &kind("K2"))])
            .unwrap()
            .add_rule(
                CanonicalizationRule::new(kind("K1"), kind("C1"), BTreeMap::new()).unwrap(),
            )
            .unwrap()
            .add_rule(
                CanonicalizationRule::new(kind("K2"), kind("C2"), BTreeMap::new()).unwrap(),
            )
            .unwrap();
        assert!(matches!(
            canonical_form(&ctx, &a),
            Err(CanonicalError::AmbiguousRules { .. })
        ));
    }

    #[test]
    fn rule_chains_are_rejected_at_registration() {
        let ctx = Context::default()
            .add_rule(CanonicalizationRule::new(kind("A"), kind("B"), BTreeMap::new()).unwrap())
            .unwrap();
        assert!(ctx
            .add_rule(CanonicalizationRule::new(kind("B"), kind("C"), BTreeMap::new()).unwrap())
            .is_err());
        // A second, different rule on the same source is ambiguous.
        assert!(ctx
            .add_rule(CanonicalizationRule::new(kind("A"), kind("C"), BTreeMap::new()).unwrap())
            .is_err());
        // Re-adding the identical rule is a no-op.
        assert!(ctx
            .add_rule(CanonicalizationRule::new(kind("A"), kind("B"), BTreeMap::new()).unwrap())
            .is_ok());
    }
}
