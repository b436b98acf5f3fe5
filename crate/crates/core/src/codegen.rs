//! Turns a semantic bridge into an adapter plan and emits adapter source.
//!
//! Adapters are wrapper classes: one exposed method per required feature,
//! delegating to the provider after renaming, reordering, or converting
//! arguments. Guards become runtime checks that raise a contract violation
//! carrying the failed expression text. Emission is byte-deterministic.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{ArgSource, ExprTemplate, SemanticBridge};
use crate::contract::{CmpOp, ContractExpr};

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("unrealizable conversion for `{method}`: edge `{from}` ~> `{to}` has no template")]
    UnrealizableConversion {
        method: String,
        from: String,
        to: String,
    },
    #[error("unrealizable conversion for `{method}`: template variable `{variable}` is not a parameter")]
    UnboundTemplateVariable { method: String, variable: String },
}

/// Supported emission styles. A registry of one, for now.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmitStyle {
    JavaLike,
}

/// One local computed before delegation: a conversion stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub local: String,
    pub type_name: String,
    pub expr: String,
}

/// One adapter method: the exposed signature, its guards, conversion steps,
/// and the delegate call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanMethod {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub return_type: Option<String>,
    pub guards: Vec<String>,
    pub steps: Vec<PlanStep>,
    pub delegate_method: String,
    pub delegate_args: Vec<String>,
}

/// A language-neutral adapter plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterPlan {
    pub adapter_name: String,
    pub consumer: String,
    pub provider: String,
    pub methods: Vec<PlanMethod>,
}

/// Conventional intermediate type for converted ontology quantities.
const CONVERSION_TYPE: &str = "Integer";

fn snake_case(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn java_condition(contract: &ContractExpr) -> String {
    let parts: Vec<String> = contract
        .conjuncts()
        .iter()
        .map(|cmp| {
            let op = match cmp.op {
                CmpOp::Eq => "==",
                other => other.as_str(),
            };
            format!("{} {} {}", cmp.lhs, op, cmp.rhs)
        })
        .collect();
    parts.join(" && ")
}

/// Plan an adapter from a bridge: one method per feature mapping, with
/// conversion steps in chain order and deterministic
/// `<Consumer>To<Provider>Adapter` naming.
pub fn plan_adapter(bridge: &SemanticBridge) -> Result<AdapterPlan, CodegenError> {
    let consumer = bridge.consumer.name().replace('.', "_");
    let provider = bridge.provider.name().replace('.', "_");
    let adapter_name = format!("{consumer}To{provider}Adapter");

    let mut methods = Vec::new();
    for map in &bridge.feature_maps {
        let mut steps = Vec::new();
        let mut delegate_args = Vec::new();
        let param_names: Vec<&str> = map.exposed.params.iter().map(|(n, _)| n.as_str()).collect();

        for arg in &map.args {
            match arg {
                ArgSource::Direct { consumer_index } => {
                    delegate_args.push(map.exposed.params[*consumer_index].0.clone());
                }
                ArgSource::Converted { seed_index, steps: stages } => {
                    let seed = map.exposed.params[*seed_index].0.clone();
                    let mut carried = ExprTemplate::Var(seed);
                    let mut last_local = None;
                    for (index, stage) in stages.iter().enumerate() {
                        let template = stage.template.as_ref().ok_or_else(|| {
                            CodegenError::UnrealizableConversion {
                                method: map.exposed.name.clone(),
                                from: stage.from.name().to_string(),
                                to: stage.to.name().to_string(),
                            }
                        })?;
                        let from_var = snake_case(stage.from.last_segment());
                        let expr = template.substitute(&from_var, &carried);
                        for variable in expr.variables() {
                            let is_param = param_names.contains(&variable.as_str());
                            let is_local = steps
                                .iter()
                                .any(|s: &PlanStep| s.local == variable);
                            if !is_param && !is_local {
                                return Err(CodegenError::UnboundTemplateVariable {
                                    method: map.exposed.name.clone(),
                                    variable,
                                });
                            }
                        }
                        let local = format!(
                            "{}_{}",
                            snake_case(stage.to.last_segment()),
                            index + 1
                        );
                        steps.push(PlanStep {
                            local: local.clone(),
                            type_name: CONVERSION_TYPE.to_string(),
                            expr: expr.to_string(),
                        });
                        carried = ExprTemplate::Var(local.clone());
                        last_local = Some(local);
                    }
                    delegate_args
                        .push(last_local.expect("converted arguments have at least one stage"));
                }
            }
        }

        methods.push(PlanMethod {
            name: map.exposed.name.clone(),
            params: map.exposed.params.clone(),
            return_type: map.exposed.return_type.clone(),
            guards: map.guard.iter().map(java_condition).collect(),
            steps,
            delegate_method: map.delegate.name.clone(),
            delegate_args,
        });
    }

    Ok(AdapterPlan {
        adapter_name,
        consumer: bridge.consumer.name().to_string(),
        provider: bridge.provider.name().to_string(),
        methods,
    })
}

/// Emit adapter source text. Same plan, same bytes.
pub fn emit_adapter(plan: &AdapterPlan, style: EmitStyle) -> String {
    match style {
        EmitStyle::JavaLike => emit_java_like(plan),
    }
}

fn emit_java_like(plan: &AdapterPlan) -> String {
    let mut out = String::new();
    let delegate_type = plan.provider.replace('.', "_");
    let _ = writeln!(out, "public class {} {{", plan.adapter_name);
    let _ = writeln!(out, "    private final {delegate_type} delegate;");
    out.push('\n');
    let _ = writeln!(
        out,
        "    public {}({delegate_type} delegate) {{",
        plan.adapter_name
    );
    let _ = writeln!(out, "        this.delegate = delegate;");
    let _ = writeln!(out, "    }}");

    for method in &plan.methods {
        out.push('\n');
        let return_type = method.return_type.as_deref().unwrap_or("void");
        let params: Vec<String> = method
            .params
            .iter()
            .map(|(name, ty)| format!("{ty} {name}"))
            .collect();
        let _ = writeln!(
            out,
            "    public {return_type} {}({}) {{",
            method.name,
            params.join(", ")
        );
        for guard in &method.guards {
            let _ = writeln!(out, "        if (!({guard})) {{");
            let _ = writeln!(
                out,
                "            throw new RuntimeException(\"contract violation: {guard}\");"
            );
            let _ = writeln!(out, "        }}");
        }
        for step in &method.steps {
            let _ = writeln!(
                out,
                "        {} {} = {};",
                step.type_name, step.local, step.expr
            );
        }
        let call = format!(
            "delegate.{}({})",
            method.delegate_method,
            method.delegate_args.join(", ")
        );
        if method.return_type.is_some() {
            let _ = writeln!(out, "        return {call};");
        } else {
            let _ = writeln!(out, "        {call};");
        }
        let _ = writeln!(out, "    }}");
    }
    let _ = writeln!(out, "}}");
    out
}

/// The manifest line announcing an emitted adapter.
pub fn manifest_line(plan: &AdapterPlan) -> String {
    format!(
        "adapter {} consumer {} provider {} features {}",
        plan.adapter_name,
        plan.consumer,
        plan.provider,
        plan.methods.len()
    )
}

/// Output file name for an adapter plan.
pub fn adapter_file_name(plan: &AdapterPlan) -> String {
    format!("{}.gen.txt", plan.adapter_name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::{ConversionExpr, ConversionSpec, FeatureMap, MethodSig};
    use crate::store::AssetId;
    use std::collections::BTreeMap;

    fn sig(name: &str, params: &[(&str, &str)], ret: Option<&str>) -> MethodSig {
        MethodSig {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(n, t)| (n.to_string(), t.to_string()))
                .collect(),
            return_type: ret.map(str::to_string),
        }
    }

    fn rename_bridge() -> SemanticBridge {
        SemanticBridge {
            provider: AssetId::instance("Date").unwrap(),
            consumer: AssetId::instance("SetDate").unwrap(),
            feature_maps: vec![FeatureMap {
                required: AssetId::instance("SetDate.writeDate").unwrap(),
                provided: AssetId::instance("Date.setDate").unwrap(),
                conversion: ConversionSpec::Rename(BTreeMap::from([(
                    "writeDate".to_string(),
                    "setDate".to_string(),
                )])),
                guard: None,
                exposed: sig(
                    "writeDate",
                    &[("day", "Integer"), ("month", "Integer"), ("year", "Integer")],
                    None,
                ),
                delegate: sig(
                    "setDate",
                    &[("day", "Integer"), ("month", "Integer"), ("year", "Integer")],
                    None,
                ),
                args: vec![
                    ArgSource::Direct { consumer_index: 0 },
                    ArgSource::Direct { consumer_index: 1 },
                    ArgSource::Direct { consumer_index: 2 },
                ],
            }],
        }
    }

    #[test]
    fn rename_plan_passes_arguments_through() {
        let plan = plan_adapter(&rename_bridge()).unwrap();
        assert_eq!(plan.adapter_name, "SetDateToDateAdapter");
        let body = emit_adapter(&plan, EmitStyle::JavaLike);
        assert!(body.contains("delegate.setDate(day, month, year);"));
        assert!(body.contains("public void writeDate(Integer day, Integer month, Integer year)"));
    }

    #[test]
    fn emission_is_deterministic() {
        let plan = plan_adapter(&rename_bridge()).unwrap();
        assert_eq!(
            emit_adapter(&plan, EmitStyle::JavaLike),
            emit_adapter(&plan, EmitStyle::JavaLike)
        );
    }

    #[test]
    fn empty_requires_produces_empty_plan() {
        let bridge = SemanticBridge {
            provider: AssetId::instance("P").unwrap(),
            consumer: AssetId::instance("C").unwrap(),
            feature_maps: vec![],
        };
        let plan = plan_adapter(&bridge).unwrap();
        assert!(plan.methods.is_empty());
        assert_eq!(
            manifest_line(&plan),
            "adapter CToPAdapter consumer C provider P features 0"
        );
    }

    #[test]
    fn chain_stages_become_sequential_locals() {
        let stage = |from: &str, to: &str, template: &str| ConversionExpr {
            from: AssetId::kind(from).unwrap(),
            to: AssetId::kind(to).unwrap(),
            template: Some(ExprTemplate::parse(template).unwrap()),
        };
        let bridge = SemanticBridge {
            provider: AssetId::instance("OffsetDate").unwrap(),
            consumer: AssetId::instance("DateWriter").unwrap(),
            feature_maps: vec![FeatureMap {
                required: AssetId::instance("DateWriter.setDate").unwrap(),
                provided: AssetId::instance("OffsetDate.setDate").unwrap(),
                conversion: ConversionSpec::Composite(vec![]),
                guard: None,
                exposed: sig(
                    "setDate",
                    &[("year", "Integer"), ("month", "Integer"), ("day", "Integer")],
                    None,
                ),
                delegate: sig("setDate", &[("days_since_jan1_1970", "Integer")], None),
                args: vec![ArgSource::Converted {
                    seed_index: 0,
                    steps: vec![
                        stage("Year", "Month", "year * 12 + month"),
                        stage("Month", "Day", "month * 30 + day"),
                        stage("Day", "DaysSinceJan1_1970", "day - 719528"),
                    ],
                }],
            }],
        };
        let plan = plan_adapter(&bridge).unwrap();
        let method = &plan.methods[0];
        assert_eq!(method.steps.len(), 3);
        assert_eq!(method.steps[0].local, "month_1");
        assert_eq!(method.steps[0].expr, "year * 12 + month");
        assert_eq!(method.steps[1].expr, "month_1 * 30 + day");
        assert_eq!(method.steps[2].local, "days_since_jan1_1970_3");
        assert_eq!(method.delegate_args, vec!["days_since_jan1_1970_3"]);
    }

    #[test]
    fn missing_template_is_unrealizable() {
        let bridge = SemanticBridge {
            provider: AssetId::instance("P").unwrap(),
            consumer: AssetId::instance("C").unwrap(),
            feature_maps: vec![FeatureMap {
                required: AssetId::instance("C.f").unwrap(),
                provided: AssetId::instance("P.f").unwrap(),
                conversion: ConversionSpec::Composite(vec![]),
                guard: None,
                exposed: sig("f", &[("x", "Integer")], None),
                delegate: sig("f", &[("y", "Integer")], None),
                args: vec![ArgSource::Converted {
                    seed_index: 0,
                    steps: vec![ConversionExpr {
                        from: AssetId::kind("X").unwrap(),
                        to: AssetId::kind("Y").unwrap(),
                        template: None,
                    }],
                }],
            }],
        };
        assert!(matches!(
            plan_adapter(&bridge),
            Err(CodegenError::UnrealizableConversion { .. })
        ));
    }

    #[test]
    fn guards_emit_runtime_checks_with_expression_text() {
        let mut bridge = rename_bridge();
        bridge.feature_maps[0].guard =
            Some(crate::contract::parse_contract("year > 0").unwrap());
        let plan = plan_adapter(&bridge).unwrap();
        let body = emit_adapter(&plan, EmitStyle::JavaLike);
        assert!(body.contains("if (!(year > 0))"));
        assert!(body.contains("throw new RuntimeException(\"contract violation: year > 0\");"));
    }
}
