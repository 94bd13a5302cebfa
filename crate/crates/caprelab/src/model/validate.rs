//! Model validation. Violations are data, not failures: the report lists
//! every broken invariant so a model can be fixed in one pass.
//!
//! Validation is complete with respect to the analyzer: a model with an
//! empty report can be analyzed without resolution failures. That requires
//! checking not just name resolution but forward type consistency of every
//! def/use chain (the same propagation the graph builder performs).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{
    is_primitive_tag, ApplicationModel, Cardinality, InstrOp, MethodDecl, MethodRef, ScopeKind,
    TypeDecl, SELF_VAR,
};

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ii: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// One JSON object per line, matching the report file format.
    pub fn to_json_lines(&self) -> String {
        self.violations
            .iter()
            .map(|v| serde_json::to_string(v).expect("violation serializes"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

struct Ctx<'m> {
    model: &'m ApplicationModel,
    out: Vec<Violation>,
}

impl Ctx<'_> {
    fn push(&mut self, code: &'static str, message: String) {
        self.out.push(Violation {
            code,
            message,
            method: None,
            ii: None,
        });
    }

    fn push_at(&mut self, code: &'static str, method: &MethodRef, ii: usize, message: String) {
        self.out.push(Violation {
            code,
            message,
            method: Some(method.to_string()),
            ii: Some(ii),
        });
    }
}

pub fn validate_model(model: &ApplicationModel) -> ValidationReport {
    let mut ctx = Ctx {
        model,
        out: Vec::new(),
    };

    let mut seen_types = BTreeSet::new();
    for t in &model.types {
        if !is_identifier(&t.name) {
            ctx.push(
                "bad-type-name",
                format!("type name `{}` is not an identifier", t.name),
            );
        }
        if !seen_types.insert(t.name.clone()) {
            ctx.push(
                "duplicate-type",
                format!("type `{}` declared more than once", t.name),
            );
        }
    }
    for t in &model.types {
        check_type(&mut ctx, t);
    }
    for ep in &model.entry_points {
        if model.method_decl(ep).is_none() {
            ctx.push(
                "unresolved-entry-point",
                format!("entry point `{ep}` is not declared"),
            );
        }
    }
    ValidationReport {
        violations: ctx.out,
    }
}

fn check_type(ctx: &mut Ctx, t: &TypeDecl) {
    let mut field_names = BTreeSet::new();
    for f in &t.fields {
        if !field_names.insert(f.name.clone()) {
            ctx.push(
                "duplicate-field",
                format!("{}.{}: field declared more than once", t.name, f.name),
            );
        }
        let declared = ctx.model.type_decl(&f.target_type).is_some();
        if !declared && !is_primitive_tag(&f.target_type) {
            ctx.push(
                "unresolved-field-type",
                format!(
                    "{}.{}: target type `{}` is neither declared nor primitive",
                    t.name, f.name, f.target_type
                ),
            );
        }
        if f.cardinality == Cardinality::Collection && !declared {
            ctx.push(
                "collection-of-primitive",
                format!(
                    "{}.{}: collection fields must target a declared type",
                    t.name, f.name
                ),
            );
        }
    }
    let mut method_names = BTreeSet::new();
    for m in &t.methods {
        if !method_names.insert(m.name.clone()) {
            ctx.push(
                "duplicate-method",
                format!(
                    "{}.{}: method declared more than once (no overloading)",
                    t.name, m.name
                ),
            );
        }
        check_method(ctx, t, m);
    }
}

/// Static type of a variable slot during forward propagation.
#[derive(Clone, Debug, PartialEq)]
enum Slot {
    Object(String),
    Collection(String),
    Primitive,
    /// Defined, but with a type the model cannot express (e.g. the result
    /// of a void call). Using it as a navigation source is a violation.
    Opaque,
}

fn check_method(ctx: &mut Ctx, t: &TypeDecl, m: &MethodDecl) {
    let mref = MethodRef::new(&t.name, &m.name);
    if let Some(base) = &m.overrides_method_of {
        let resolves = ctx
            .model
            .type_decl(base)
            .map(|bt| bt.methods.iter().any(|bm| bm.name == m.name))
            .unwrap_or(false);
        if !resolves {
            ctx.push(
                "unresolved-override",
                format!(
                    "{mref}: overridesMethodOf `{base}` does not declare a method `{}`",
                    m.name
                ),
            );
        }
    }

    let mut slots: BTreeMap<String, Slot> = BTreeMap::new();
    slots.insert(SELF_VAR.to_string(), Slot::Object(t.name.clone()));
    for (i, (pname, ptype)) in m.params.iter().enumerate() {
        if ctx.model.type_decl(ptype).is_none() && !is_primitive_tag(ptype) {
            ctx.push(
                "unresolved-param-type",
                format!("{mref}: parameter `{pname}` has unknown type `{ptype}`"),
            );
        }
        let slot = if ctx.model.type_decl(ptype).is_some() {
            Slot::Object(ptype.clone())
        } else {
            Slot::Primitive
        };
        slots.insert(format!("p{i}"), slot);
    }

    check_scopes(ctx, &mref, m);

    for (pos, instr) in m.instructions.iter().enumerate() {
        if instr.ii != pos {
            ctx.push_at(
                "non-dense-index",
                &mref,
                instr.ii,
                format!(
                    "instruction index {} at position {pos} (indices must be 0-based and dense)",
                    instr.ii
                ),
            );
        }
        for used in &instr.used_vars {
            if !slots.contains_key(used) {
                ctx.push_at(
                    "undefined-var",
                    &mref,
                    instr.ii,
                    format!(
                        "uses `{used}` which is not a parameter, the receiver, or an earlier def"
                    ),
                );
            }
        }
        check_op(ctx, &mref, instr.ii, &instr.op, &instr.used_vars, &slots);
        if let Some(def) = &instr.def_var {
            if def == SELF_VAR
                || def.starts_with('p')
                    && def[1..].chars().all(|c| c.is_ascii_digit())
                    && def.len() > 1
            {
                ctx.push_at(
                    "reserved-def",
                    &mref,
                    instr.ii,
                    format!("`{def}` is a reserved slot id"),
                );
            }
            if slots.contains_key(def) {
                ctx.push_at(
                    "reassigned-var",
                    &mref,
                    instr.ii,
                    format!("`{def}` assigned more than once (single-assignment form)"),
                );
            }
            slots.insert(
                def.clone(),
                def_slot(ctx, &instr.op, &instr.used_vars, &slots),
            );
        }
    }
}

/// Forward slot type produced by an instruction, mirroring the builder.
fn def_slot(ctx: &Ctx, op: &InstrOp, used: &[String], slots: &BTreeMap<String, Slot>) -> Slot {
    match op {
        InstrOp::GetField {
            field_name,
            owner_type,
            ..
        } => {
            let field = ctx
                .model
                .type_decl(owner_type)
                .and_then(|t| t.field(field_name));
            match field {
                Some(f) if f.cardinality == Cardinality::Collection => {
                    Slot::Collection(f.target_type.clone())
                }
                Some(f) if ctx.model.type_decl(&f.target_type).is_some() => {
                    Slot::Object(f.target_type.clone())
                }
                Some(_) => Slot::Primitive,
                None => Slot::Opaque,
            }
        }
        InstrOp::ArrayLoad => match used.first().and_then(|u| slots.get(u)) {
            Some(Slot::Collection(elem)) => Slot::Object(elem.clone()),
            _ => Slot::Opaque,
        },
        InstrOp::InvokeMethod {
            owner_type,
            method_name,
        } => {
            let mref = MethodRef::new(owner_type.clone(), method_name.clone());
            match crate::graph::infer_return_type(ctx.model, &mref) {
                Some(crate::graph::StaticType::Object(t)) => Slot::Object(t),
                Some(crate::graph::StaticType::Collection(t)) => Slot::Collection(t),
                Some(crate::graph::StaticType::Primitive) => Slot::Primitive,
                _ => Slot::Opaque,
            }
        }
        _ => Slot::Opaque,
    }
}

fn check_op(
    ctx: &mut Ctx,
    mref: &MethodRef,
    ii: usize,
    op: &InstrOp,
    used: &[String],
    slots: &BTreeMap<String, Slot>,
) {
    match op {
        InstrOp::GetField {
            owner_type,
            field_name,
            field_type,
        } => {
            let Some(owner) = ctx.model.type_decl(owner_type) else {
                ctx.push_at(
                    "unresolved-owner",
                    mref,
                    ii,
                    format!("getfield on undeclared type `{owner_type}`"),
                );
                return;
            };
            let Some(field) = owner.field(field_name) else {
                ctx.push_at(
                    "unresolved-field",
                    mref,
                    ii,
                    format!("type `{owner_type}` has no field `{field_name}`"),
                );
                return;
            };
            if field.target_type != *field_type {
                ctx.push_at(
                    "field-type-mismatch",
                    mref,
                    ii,
                    format!("field `{owner_type}.{field_name}` is declared `{}`, instruction says `{field_type}`", field.target_type),
                );
            }
            match used.first().and_then(|u| slots.get(u)) {
                Some(Slot::Object(t)) if t == owner_type => {}
                Some(Slot::Object(t)) => ctx.push_at(
                    "owner-type-mismatch",
                    mref,
                    ii,
                    format!("receiver variable holds `{t}`, getfield expects `{owner_type}`"),
                ),
                Some(Slot::Opaque) | None => ctx.push_at(
                    "untyped-navigation-source",
                    mref,
                    ii,
                    "getfield applied to a variable of unknown static type".to_string(),
                ),
                _ => ctx.push_at(
                    "bad-navigation-source",
                    mref,
                    ii,
                    "getfield applied to a non-object variable".to_string(),
                ),
            }
        }
        InstrOp::ArrayLoad => match used.first().and_then(|u| slots.get(u)) {
            Some(Slot::Collection(_)) => {}
            _ => ctx.push_at(
                "bad-element-source",
                mref,
                ii,
                "arrayload applied to a non-collection variable".to_string(),
            ),
        },
        InstrOp::InvokeMethod {
            owner_type,
            method_name,
        } => {
            let callee = MethodRef::new(owner_type.clone(), method_name.clone());
            let Some(decl) = ctx.model.method_decl(&callee) else {
                ctx.push_at(
                    "unresolved-method",
                    mref,
                    ii,
                    format!("invokemethod of undeclared `{callee}`"),
                );
                return;
            };
            // used = [receiver, arg0, arg1, ...]
            if used.len() != decl.params.len() + 1 {
                ctx.push_at(
                    "arity-mismatch",
                    mref,
                    ii,
                    format!(
                        "`{callee}` takes {} argument(s), invocation uses {} variable(s)",
                        decl.params.len(),
                        used.len()
                    ),
                );
            }
        }
        _ => {}
    }
}

/// Scope chains must nest like a tree: a frame id, once closed, does not
/// reopen, an id keeps one kind, and branch frames carry arm labels while
/// loop frames do not.
fn check_scopes(ctx: &mut Ctx, mref: &MethodRef, m: &MethodDecl) {
    let mut closed: BTreeSet<String> = BTreeSet::new();
    let mut open: Vec<String> = Vec::new();
    let mut kinds: BTreeMap<String, ScopeKind> = BTreeMap::new();
    for instr in &m.instructions {
        for f in &instr.scope_chain {
            match kinds.get(&f.id) {
                Some(kind) if *kind != f.kind => ctx.push_at(
                    "scope-kind-conflict",
                    mref,
                    instr.ii,
                    format!("scope `{}` used as both loop and branch", f.id),
                ),
                Some(_) => {}
                None => {
                    kinds.insert(f.id.clone(), f.kind);
                }
            }
            match f.kind {
                ScopeKind::Loop if f.arm.is_some() => ctx.push_at(
                    "loop-frame-with-arm",
                    mref,
                    instr.ii,
                    format!("loop frame `{}` carries an arm label", f.id),
                ),
                ScopeKind::Branch if f.arm.is_none() => ctx.push_at(
                    "branch-frame-without-arm",
                    mref,
                    instr.ii,
                    format!("branch frame `{}` has no arm label", f.id),
                ),
                _ => {}
            }
        }
        let chain: Vec<String> = instr.scope_chain.iter().map(|f| f.id.clone()).collect();
        let shared = open
            .iter()
            .zip(chain.iter())
            .take_while(|(a, b)| a == b)
            .count();
        for id in open.drain(shared..) {
            closed.insert(id);
        }
        for id in &chain[shared..] {
            if closed.contains(id) {
                ctx.push_at(
                    "scope-reopened",
                    mref,
                    instr.ii,
                    format!("scope `{id}` reopened after being closed"),
                );
            }
            open.push(id.clone());
        }
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::model_from_json;

    fn one_type(fields: &str, instrs: &str) -> String {
        format!(
            r#"{{"types":[{{"name":"A","persistent":true,
                "fields":[{fields}],
                "methods":[{{"name":"m","params":[],"instructions":[{instrs}]}}]}}],
               "entryPoints":[]}}"#
        )
    }

    #[test]
    fn duplicate_field_is_one_violation() {
        let text = one_type(
            r#"{"name":"x","targetType":"int"},{"name":"x","targetType":"int"}"#,
            "",
        );
        let model = model_from_json(&text).unwrap();
        let report = validate_model(&model);
        let dups: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.code == "duplicate-field")
            .collect();
        assert_eq!(dups.len(), 1);
    }

    #[test]
    fn undefined_use_cites_method_and_index() {
        let text = one_type(
            r#"{"name":"x","targetType":"int"}"#,
            r#"{"ii":0,"kind":"getfield","params":{"ownerType":"A","fieldName":"x","fieldType":"int"},"def":"v1","use":["v9"],"scope":[]}"#,
        );
        let model = model_from_json(&text).unwrap();
        let report = validate_model(&model);
        let v = report
            .violations
            .iter()
            .find(|v| v.code == "undefined-var")
            .unwrap();
        assert_eq!(v.method.as_deref(), Some("A.m"));
        assert_eq!(v.ii, Some(0));
    }

    #[test]
    fn reassignment_violates_single_assignment() {
        let text = one_type(
            r#"{"name":"x","targetType":"int"}"#,
            r#"{"ii":0,"kind":"getfield","params":{"ownerType":"A","fieldName":"x","fieldType":"int"},"def":"v1","use":["v_self"],"scope":[]},
               {"ii":1,"kind":"getfield","params":{"ownerType":"A","fieldName":"x","fieldType":"int"},"def":"v1","use":["v_self"],"scope":[]}"#,
        );
        let model = model_from_json(&text).unwrap();
        let report = validate_model(&model);
        assert!(report.violations.iter().any(|v| v.code == "reassigned-var"));
    }

    #[test]
    fn unknown_type_named_in_report() {
        let text = one_type(r#"{"name":"x","targetType":"Ledger"}"#, "");
        let model = model_from_json(&text).unwrap();
        let report = validate_model(&model);
        let v = report
            .violations
            .iter()
            .find(|v| v.code == "unresolved-field-type")
            .unwrap();
        assert!(v.message.contains("Ledger"));
    }

    #[test]
    fn json_lines_one_per_violation() {
        let text = one_type(r#"{"name":"x","targetType":"Ledger"}"#, "");
        let model = model_from_json(&text).unwrap();
        let report = validate_model(&model);
        assert_eq!(
            report.to_json_lines().lines().count(),
            report.violations.len()
        );
    }
}
