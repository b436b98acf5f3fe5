//! Interprets parsed component declarations into knowledge-base assertions
//! and checks behavioral subsumption between features.
//!
//! Each method is encoded reflectively: the feature realizes `Method`, its
//! name, parameter set, parameters, parameter types/names, return type,
//! precondition, and concurrency semantics become included parts with
//! literal bindings. Fresh asset names follow the
//! `<Component>.<method>.<Part>` convention, e.g.
//! `Debug.isOff.Parameter0Type`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compat::{implies, Implication};
use crate::contract::{parse_contract, ContractExpr};
use crate::kinds;
use crate::sidl::ComponentDecl;
use crate::store::{
    Assertion, AssertionForm, AssetId, Context, KindExpr, StoreError,
};

#[derive(Debug, Error)]
pub enum KindingError {
    #[error("contract for `{method}` references unknown parameter `{name}`")]
    UnboundIdentifier { method: String, name: String },
    #[error("`realizes` names undeclared kind `{0}`")]
    UnknownKind(String),
    #[error("invalid kind name `{0}` in `realizes`")]
    BadKindName(String),
    #[error("contract outside the decidable fragment")]
    UndecidableContract,
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Provided,
    Required,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamKind {
    pub asset: AssetId,
    pub name: String,
    pub type_name: String,
}

/// The kinded image of one method: its feature asset plus the resolved
/// signature, contract, and semantics information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureKind {
    pub feature: AssetId,
    pub name: String,
    pub direction: Direction,
    pub params: Vec<ParamKind>,
    pub return_type: Option<String>,
    pub precondition: Option<ContractExpr>,
    pub concurrency: Option<String>,
    pub realizes: Option<KindExpr>,
}

impl FeatureKind {
    /// The declared precondition, or the trivial contract.
    pub fn precondition_or_trivial(&self) -> ContractExpr {
        self.precondition.clone().unwrap_or_default()
    }
}

/// The kinded image of a whole component. A method declared in both
/// directions under one name shares its feature asset; features are kept
/// sorted by direction, then asset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentKind {
    pub component: AssetId,
    pub provides: AssetId,
    pub requires: AssetId,
    pub features: Vec<FeatureKind>,
}

impl ComponentKind {
    pub fn name(&self) -> &str {
        self.component.name()
    }

    pub fn provided_features(&self) -> impl Iterator<Item = &FeatureKind> {
        self.features
            .iter()
            .filter(|f| f.direction == Direction::Provided)
    }

    pub fn required_features(&self) -> impl Iterator<Item = &FeatureKind> {
        self.features
            .iter()
            .filter(|f| f.direction == Direction::Required)
    }

    pub fn feature(&self, name: &str, direction: Direction) -> Option<&FeatureKind> {
        self.features
            .iter()
            .find(|f| f.name == name && f.direction == direction)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KindingOptions {
    /// When set, `realizes` may name kinds not yet mentioned in the context.
    pub auto_declare_kinds: bool,
}

impl Default for KindingOptions {
    fn default() -> Self {
        KindingOptions {
            auto_declare_kinds: true,
        }
    }
}

fn claim(form: AssertionForm) -> Assertion {
    Assertion::claim(form)
}

fn realize(instance: &AssetId, kind: &AssetId) -> Assertion {
    claim(AssertionForm::Realization {
        instance: instance.clone(),
        kind: KindExpr::Atom(kind.clone()),
    })
}

fn include(part: &AssetId, whole: &AssetId) -> Assertion {
    claim(AssertionForm::Inclusion {
        part: part.clone(),
        whole: whole.clone(),
    })
}

fn bind(asset: &AssetId, literal: &str) -> Assertion {
    claim(AssertionForm::TextualEquiv {
        asset: asset.clone(),
        literal: literal.to_string(),
    })
}

/// `GUARDED` becomes `GuardedSemantics`, `CONCURRENT` becomes
/// `ConcurrentSemantics`, and so on.
fn concurrency_literal(value: &str) -> String {
    let lower = value.to_ascii_lowercase();
    let mut chars = lower.chars();
    let titled = match chars.next() {
        Some(first) => first.to_ascii_uppercase().to_string() + chars.as_str(),
        None => String::new(),
    };
    format!("{titled}Semantics")
}

/// Is the kind mentioned anywhere in the context (assertions, rules,
/// grounds)?
fn kind_mentioned(ctx: &Context, kind: &AssetId) -> bool {
    if ctx.grounds().any(|g| g == kind) {
        return true;
    }
    if ctx
        .canon_rules()
        .any(|r| r.source() == kind || r.target() == kind)
    {
        return true;
    }
    ctx.assertions().any(|a| match &a.form {
        AssertionForm::Realization { kind: expr, .. } => expr.atoms().contains(&kind),
        AssertionForm::Inheritance { child, parent } => child == kind || parent == kind,
        AssertionForm::Inclusion { part, whole } => part == kind || whole == kind,
        AssertionForm::FullEquiv { a, b } => a == kind || b == kind,
        AssertionForm::PartialEquiv { lesser, greater } => lesser == kind || greater == kind,
        AssertionForm::TextualEquiv { asset, .. } => asset == kind,
        AssertionForm::Interpretation(edge) => edge.from == *kind || edge.to == *kind,
    })
}

/// Encode one parsed component into assertions, returning the extended
/// context and the component's kinded image.
pub fn kind_component(
    ctx: &Context,
    decl: &ComponentDecl,
    options: KindingOptions,
) -> Result<(Context, ComponentKind), KindingError> {
    let component = AssetId::instance(decl.name.clone())?;
    let provides = component.child("Provides")?;
    let requires = component.child("Requires")?;

    let mut assertions = vec![
        realize(&component, &kinds::semantic_component()),
        realize(&provides, &kinds::provides()),
        include(&provides, &component),
        realize(&requires, &kinds::requires()),
        include(&requires, &component),
    ];

    let mut realizes_targets: Vec<(AssetId, AssetId)> = Vec::new();
    for prop in &decl.properties {
        if prop.tag == "realizes" && !prop.value.is_empty() {
            let kind = AssetId::kind(prop.value.clone())
                .map_err(|_| KindingError::BadKindName(prop.value.clone()))?;
            realizes_targets.push((component.clone(), kind));
        }
    }

    let mut features: Vec<FeatureKind> = Vec::new();
    for (method, provided_direction) in decl.methods() {
        let feature = component.child(&method.name)?;
        let direction_part = if provided_direction {
            &provides
        } else {
            &requires
        };
        assertions.push(realize(&feature, &kinds::method()));
        assertions.push(include(&feature, direction_part));

        let name_part = feature.child("Name")?;
        assertions.push(realize(&name_part, &kinds::identifier()));
        assertions.push(include(&name_part, &feature));
        assertions.push(bind(&name_part, &method.name));

        let parameter_set = feature.child("ParameterSet")?;
        assertions.push(realize(&parameter_set, &kinds::parameter_set()));
        assertions.push(include(&parameter_set, &feature));

        let mut params = Vec::new();
        for (index, (param_name, type_name)) in method.params.iter().enumerate() {
            let param = feature.child(&format!("Parameter{index}"))?;
            assertions.push(realize(&param, &kinds::parameter()));
            assertions.push(include(&param, &parameter_set));

            let param_type = feature.child(&format!("Parameter{index}Type"))?;
            assertions.push(realize(&param_type, &kinds::type_name()));
            assertions.push(include(&param_type, &param));
            assertions.push(bind(&param_type, type_name));

            let param_name_part = feature.child(&format!("Parameter{index}Name"))?;
            assertions.push(realize(&param_name_part, &kinds::identifier()));
            assertions.push(include(&param_name_part, &param));
            assertions.push(bind(&param_name_part, param_name));

            params.push(ParamKind {
                asset: param,
                name: param_name.clone(),
                type_name: type_name.clone(),
            });
        }

        if let Some(return_type) = &method.return_type {
            let return_part = feature.child("ReturnType")?;
            assertions.push(realize(&return_part, &kinds::return_type()));
            assertions.push(include(&return_part, &feature));
            assertions.push(bind(&return_part, return_type));
        }

        if let Some(precondition) = &method.precondition {
            for variable in precondition.variables() {
                if !method.params.iter().any(|(name, _)| name == variable) {
                    return Err(KindingError::UnboundIdentifier {
                        method: method.name.clone(),
                        name: variable.to_string(),
                    });
                }
            }
            let pre_part = feature.child("Precondition")?;
            assertions.push(realize(&pre_part, &kinds::precondition()));
            assertions.push(include(&pre_part, &feature));
            assertions.push(bind(&pre_part, &precondition.to_string()));
        }

        let mut concurrency = None;
        let mut concurrency_index = 0usize;
        let mut modifies_index = 0usize;
        let mut feature_realizes: Option<KindExpr> = None;
        for prop in &method.properties {
            match prop.tag.as_str() {
                "concurrency" if !prop.value.is_empty() => {
                    let part =
                        feature.child(&format!("ConcurrencySemantics{concurrency_index}"))?;
                    concurrency_index += 1;
                    assertions.push(realize(&part, &kinds::concurrency_semantics()));
                    assertions.push(include(&part, &feature));
                    assertions.push(bind(&part, &concurrency_literal(&prop.value)));
                    concurrency = Some(prop.value.clone());
                }
                "modifies" if !prop.value.is_empty() => {
                    let part = feature.child(&format!("Modifies{modifies_index}"))?;
                    modifies_index += 1;
                    assertions.push(realize(&part, &kinds::modifies()));
                    assertions.push(include(&part, &feature));
                    assertions.push(bind(&part, &prop.value));
                }
                "realizes" if !prop.value.is_empty() => {
                    let kind = AssetId::kind(prop.value.clone())
                        .map_err(|_| KindingError::BadKindName(prop.value.clone()))?;
                    realizes_targets.push((feature.clone(), kind.clone()));
                    feature_realizes = Some(KindExpr::Atom(kind));
                }
                _ => {}
            }
        }

        features.push(FeatureKind {
            feature,
            name: method.name.clone(),
            direction: if provided_direction {
                Direction::Provided
            } else {
                Direction::Required
            },
            params,
            return_type: method.return_type.clone(),
            precondition: method.precondition.clone(),
            concurrency,
            realizes: feature_realizes,
        });
    }
    features.sort_by(|a, b| (a.direction, &a.feature).cmp(&(b.direction, &b.feature)));

    if !options.auto_declare_kinds {
        for (_, kind) in &realizes_targets {
            if !kind_mentioned(ctx, kind) {
                return Err(KindingError::UnknownKind(kind.name().to_string()));
            }
        }
    }
    for (instance, kind) in realizes_targets {
        assertions.push(realize(&instance, &kind));
    }

    let next = ctx.assert_all(assertions)?;
    Ok((
        next,
        ComponentKind {
            component,
            provides,
            requires,
            features,
        },
    ))
}

/// Rebuild a component's kinded image from a context it was kinded into.
pub fn component_kind_from_context(ctx: &Context, name: &str) -> Option<ComponentKind> {
    let component = AssetId::instance(name).ok()?;
    let closed = ctx.close();
    if !closed
        .realized_kinds(&component)
        .contains(&kinds::semantic_component())
    {
        return None;
    }
    let mut provides = None;
    let mut requires = None;
    for part in closed.direct_parts(&component) {
        let realized = closed.realized_kinds(&part);
        if realized.contains(&kinds::provides()) {
            provides = Some(part);
        } else if realized.contains(&kinds::requires()) {
            requires = Some(part);
        }
    }
    let provides = provides?;
    let requires = requires?;

    let mut features = Vec::new();
    for (direction_part, direction) in
        [(&provides, Direction::Provided), (&requires, Direction::Required)]
    {
        for feature in closed.direct_parts(direction_part) {
            if !closed.realized_kinds(&feature).contains(&kinds::method()) {
                continue;
            }
            features.push(reconstruct_feature(&closed, &feature, direction)?);
        }
    }
    features.sort_by(|a, b| (a.direction, &a.feature).cmp(&(b.direction, &b.feature)));

    Some(ComponentKind {
        component,
        provides,
        requires,
        features,
    })
}

fn reconstruct_feature(
    closed: &Context,
    feature: &AssetId,
    direction: Direction,
) -> Option<FeatureKind> {
    let identifier = kinds::identifier();
    let mut name = None;
    let mut parameter_set = None;
    let mut return_type = None;
    let mut precondition = None;
    let mut concurrency = None;

    for part in closed.direct_parts(feature) {
        let realized = closed.realized_kinds(&part);
        if realized.contains(&identifier) {
            name = closed.literal(&part).map(str::to_string);
        } else if realized.contains(&kinds::parameter_set()) {
            parameter_set = Some(part);
        } else if realized.contains(&kinds::return_type()) {
            return_type = closed.literal(&part).map(str::to_string);
        } else if realized.contains(&kinds::precondition()) {
            precondition = closed.literal(&part).and_then(|l| parse_contract(l).ok());
        } else if realized.contains(&kinds::concurrency_semantics()) {
            concurrency = closed.literal(&part).map(str::to_string);
        }
    }

    let mut params = Vec::new();
    if let Some(parameter_set) = &parameter_set {
        let mut indexed: Vec<(usize, ParamKind)> = Vec::new();
        for param in closed.direct_parts(parameter_set) {
            let index: usize = param
                .last_segment()
                .strip_prefix("Parameter")?
                .parse()
                .ok()?;
            let mut param_name = None;
            let mut param_type = None;
            for child in closed.direct_parts(&param) {
                let realized = closed.realized_kinds(&child);
                if realized.contains(&identifier) {
                    param_name = closed.literal(&child).map(str::to_string);
                } else if realized.contains(&kinds::type_name()) {
                    param_type = closed.literal(&child).map(str::to_string);
                }
            }
            indexed.push((
                index,
                ParamKind {
                    asset: param,
                    name: param_name?,
                    type_name: param_type?,
                },
            ));
        }
        indexed.sort_by_key(|(i, _)| *i);
        params = indexed.into_iter().map(|(_, p)| p).collect();
    }

    // Any non-builtin realized kind was attached via `realizes`.
    let builtin = kinds::method();
    let extra: Vec<AssetId> = closed
        .realized_kinds(feature)
        .into_iter()
        .filter(|k| *k != builtin)
        .collect();
    let realizes = match extra.len() {
        0 => None,
        1 => Some(KindExpr::Atom(extra.into_iter().next().expect("len"))),
        _ => KindExpr::compose(
            crate::store::ComposeOp::Plus,
            extra.into_iter().map(KindExpr::Atom).collect(),
        )
        .ok(),
    };

    Some(FeatureKind {
        feature: feature.clone(),
        name: name?,
        direction,
        params,
        return_type,
        precondition,
        concurrency,
        realizes,
    })
}

/// Behavioral subsumption for overrides: the overriding feature may only
/// weaken the precondition, so the overridden (parent) precondition must
/// imply the overriding (child) one.
pub fn check_subsumption(
    overriding: &FeatureKind,
    overridden: &FeatureKind,
) -> Result<bool, KindingError> {
    match implies(
        &overridden.precondition_or_trivial(),
        &overriding.precondition_or_trivial(),
    ) {
        Implication::True => Ok(true),
        Implication::False => Ok(false),
        Implication::Undecidable => Err(KindingError::UndecidableContract),
    }
}
