//! Built-in kind vocabulary used when encoding component interfaces.
//!
//! These kinds classify the reflective structure every kinded component
//! shares: the component itself, its provided/required feature sets, methods,
//! parameters, and the literal-bearing name/type slots. They are ordinary
//! kind-sorted assets; nothing prevents a knowledge base from asserting
//! additional facts about them.

use crate::store::AssetId;

macro_rules! builtin_kind {
    ($(#[$doc:meta])* $fn_name:ident, $name:literal) => {
        $(#[$doc])*
        pub fn $fn_name() -> AssetId {
            AssetId::kind($name).expect("built-in kind name is valid")
        }
    };
}

builtin_kind!(
    /// Classifier for a whole component with provides/requires structure.
    semantic_component,
    "SemanticComponent"
);
builtin_kind!(
    /// The exported feature set of a component.
    provides,
    "Provides"
);
builtin_kind!(
    /// The imported feature set of a component.
    requires,
    "Requires"
);
builtin_kind!(
    /// Common canonical target of `Provides` and `Requires`; provided and
    /// required interfaces are compared as plain feature sets.
    feature_set,
    "FeatureSet"
);
builtin_kind!(
    /// A method or call-method feature.
    method,
    "Method"
);
builtin_kind!(parameter_set, "ParameterSet");
builtin_kind!(parameter, "Parameter");
builtin_kind!(
    /// A literal-bearing slot holding a type name.
    type_name,
    "TypeName"
);
builtin_kind!(
    /// A literal-bearing slot holding an identifier (method or parameter name).
    identifier,
    "Identifier"
);
builtin_kind!(return_type, "ReturnType");
builtin_kind!(
    /// A literal-bearing slot holding a behavioral precondition. Contracts are
    /// compared by implication, never by canonical structure, so canonical
    /// forms skip parts of this kind.
    precondition,
    "Precondition"
);
builtin_kind!(concurrency_semantics, "ConcurrencySemantics");
builtin_kind!(modifies, "Modifies");

/// Kinds whose parts carry behavioral or meta information rather than
/// signature structure. They are excluded from canonical forms so that
/// compatibility is decided by signatures and ontology, with contracts
/// handled separately by implication checking.
pub fn canonical_exclusions() -> [AssetId; 3] {
    [precondition(), concurrency_semantics(), modifies()]
}
