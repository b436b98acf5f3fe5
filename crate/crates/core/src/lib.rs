//! Kind-theoretic component composition: parse annotated interface
//! definitions, encode them as assertions in a knowledge base, decide
//! semantic compatibility via canonical-form containment, discover
//! interpretation chains across the ontology, and plan the adapters that
//! realize the discovered mappings.

pub mod bridge;
pub mod canonical;
pub mod codegen;
pub mod compat;
pub mod contract;
pub mod kb;
pub mod kinding;
pub mod kinds;
pub mod sidl;
pub mod store;

pub use bridge::{build_bridge, find_chain, Chain, ConversionSpec, SemanticBridge};
pub use canonical::{
    canonical_form, fully_equivalent, partially_equivalent, CanonicalAsset, CanonicalizationRule,
};
pub use compat::{
    check_compatibility, check_compatibility_bounded, implies, semantically_equivalent,
    CompatibilityResult, Implication, Verdict,
};
pub use contract::{parse_contract, ContractExpr};
pub use kinding::{check_subsumption, component_kind_from_context, kind_component, ComponentKind};
pub use sidl::{parse_component, parse_components, parse_properties, pretty_print, ComponentDecl};
pub use store::{Assertion, AssertionForm, AssetId, Context, KindExpr};
