//! Application model: the compact, analyzable description of an
//! object-oriented program. Types declare persistent fields and methods;
//! method bodies are flat instruction streams in single-assignment form
//! with explicit loop/branch scope annotations.

mod parse;
mod validate;

pub use parse::{load_model, model_from_json, model_to_json, save_model};
pub use validate::{validate_model, ValidationReport, Violation};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Reserved variable id for the receiver slot.
pub const SELF_VAR: &str = "v_self";

/// Primitive type tags accepted wherever a field or parameter type may be
/// non-navigable payload.
pub const PRIMITIVE_TAGS: &[&str] = &["int", "long", "float", "double", "boolean", "string"];

pub fn is_primitive_tag(name: &str) -> bool {
    PRIMITIVE_TAGS.contains(&name)
}

/// `Owner.method` reference. Type and method names are plain identifiers,
/// so the dotted rendering is unambiguous.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodRef {
    pub owner: String,
    pub name: String,
}

impl MethodRef {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            owner: owner.into(),
            name: name.into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, ModelError> {
        match s.split_once('.') {
            Some((owner, name)) if !owner.is_empty() && !name.is_empty() && !name.contains('.') => {
                Ok(Self::new(owner, name))
            }
            _ => Err(ModelError::BadMethodRef(s.to_string())),
        }
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.owner, self.name)
    }
}

impl Serialize for MethodRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MethodRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        MethodRef::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cardinality {
    Single,
    Collection,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApplicationModel {
    pub types: Vec<TypeDecl>,
    pub entry_points: Vec<MethodRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub persistent: bool,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    #[serde(rename = "targetType")]
    pub target_type: String,
    #[serde(default = "default_single")]
    pub cardinality: Cardinality,
}

fn default_single() -> Cardinality {
    Cardinality::Single
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    /// Ordered `(name, type)` pairs; slot ids are `p0`, `p1`, ...
    pub params: Vec<(String, String)>,
    pub instructions: Vec<IrInstruction>,
    /// Set when this method overrides the same-named method of another type.
    pub overrides_method_of: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrKind {
    GetField,
    ArrayLoad,
    InvokeMethod,
    ConditionalBranch,
    Goto,
    Return,
    Break,
    Continue,
    Noop,
}

/// Kind-specific instruction payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstrOp {
    GetField {
        owner_type: String,
        field_name: String,
        field_type: String,
    },
    ArrayLoad,
    InvokeMethod {
        owner_type: String,
        method_name: String,
    },
    /// `branch` names the branch scope whose arms this guard selects.
    ConditionalBranch {
        branch: String,
    },
    Goto,
    Return,
    Break,
    Continue,
    Noop,
}

impl InstrOp {
    pub fn kind(&self) -> InstrKind {
        match self {
            InstrOp::GetField { .. } => InstrKind::GetField,
            InstrOp::ArrayLoad => InstrKind::ArrayLoad,
            InstrOp::InvokeMethod { .. } => InstrKind::InvokeMethod,
            InstrOp::ConditionalBranch { .. } => InstrKind::ConditionalBranch,
            InstrOp::Goto => InstrKind::Goto,
            InstrOp::Return => InstrKind::Return,
            InstrOp::Break => InstrKind::Break,
            InstrOp::Continue => InstrKind::Continue,
            InstrOp::Noop => InstrKind::Noop,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrInstruction {
    pub ii: usize,
    pub op: InstrOp,
    pub def_var: Option<String>,
    pub used_vars: Vec<String>,
    /// Outermost-first chain of enclosing loop/branch scopes.
    pub scope_chain: Vec<ScopeFrame>,
}

impl IrInstruction {
    pub fn kind(&self) -> InstrKind {
        self.op.kind()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScopeKind {
    Loop,
    Branch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeFrame {
    pub kind: ScopeKind,
    pub id: String,
    /// For branch frames: which arm of the conditional the instruction is in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<String>,
}

impl ScopeFrame {
    pub fn loop_frame(id: impl Into<String>) -> Self {
        Self {
            kind: ScopeKind::Loop,
            id: id.into(),
            arm: None,
        }
    }

    pub fn branch_frame(id: impl Into<String>, arm: impl Into<String>) -> Self {
        Self {
            kind: ScopeKind::Branch,
            id: id.into(),
            arm: Some(arm.into()),
        }
    }
}

/// True iff the instruction's navigation (if any) may or may not execute
/// depending on a runtime decision: it sits inside a conditional arm, or it
/// is itself a loop-exit instruction inside a loop.
pub fn is_branch_dependent(instr: &IrInstruction) -> bool {
    let in_branch = instr
        .scope_chain
        .iter()
        .any(|f| f.kind == ScopeKind::Branch);
    if in_branch {
        return true;
    }
    let in_loop = instr.scope_chain.iter().any(|f| f.kind == ScopeKind::Loop);
    in_loop
        && matches!(
            instr.kind(),
            InstrKind::Return | InstrKind::Break | InstrKind::Continue
        )
}

impl ApplicationModel {
    pub fn type_decl(&self, name: &str) -> Option<&TypeDecl> {
        self.types.iter().find(|t| t.name == name)
    }

    pub fn method_decl(&self, mref: &MethodRef) -> Option<&MethodDecl> {
        self.type_decl(&mref.owner)?
            .methods
            .iter()
            .find(|m| m.name == mref.name)
    }

    /// Every declared method as `Owner.name`, in declaration order.
    pub fn method_refs(&self) -> Vec<MethodRef> {
        self.types
            .iter()
            .flat_map(|t| t.methods.iter().map(|m| MethodRef::new(&t.name, &m.name)))
            .collect()
    }

    /// True iff some other method declares `overridesMethodOf` pointing at
    /// this method. Invocations of such methods are dynamically dispatched.
    pub fn has_overrides(&self, mref: &MethodRef) -> bool {
        self.types.iter().any(|t| {
            t.methods.iter().any(|m| {
                m.name == mref.name && m.overrides_method_of.as_deref() == Some(mref.owner.as_str())
            })
        })
    }
}

impl TypeDecl {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Srng;

    #[test]
    fn method_ref_roundtrip() {
        let r = MethodRef::parse("BankManagement.setAllTransCustomers").unwrap();
        assert_eq!(r.owner, "BankManagement");
        assert_eq!(r.to_string(), "BankManagement.setAllTransCustomers");
        assert!(MethodRef::parse("noDotHere").is_err());
        assert!(MethodRef::parse("a.b.c").is_err());
    }

    fn instr(kind: InstrOp, scope: Vec<ScopeFrame>) -> IrInstruction {
        IrInstruction {
            ii: 0,
            op: kind,
            def_var: None,
            used_vars: vec![],
            scope_chain: scope,
        }
    }

    #[test]
    fn branch_dependence_rules() {
        // getfield inside a conditional arm
        let gf = InstrOp::GetField {
            owner_type: "Employee".into(),
            field_name: "dept".into(),
            field_type: "Department".into(),
        };
        assert!(is_branch_dependent(&instr(
            gf.clone(),
            vec![ScopeFrame::branch_frame("b0", "else")]
        )));
        // plain getfield feeding a return: no branch frame, not branch-dependent
        assert!(!is_branch_dependent(&instr(gf, vec![])));
        // break inside a loop
        assert!(is_branch_dependent(&instr(
            InstrOp::Break,
            vec![ScopeFrame::loop_frame("l0")]
        )));
        // getfield inside a loop alone is not branch-dependent
        let gf2 = InstrOp::GetField {
            owner_type: "T".into(),
            field_name: "f".into(),
            field_type: "T".into(),
        };
        assert!(!is_branch_dependent(&instr(
            gf2,
            vec![ScopeFrame::loop_frame("l0")]
        )));
    }

    /// The predicate depends only on kind + scope chain: exercised over
    /// random scope chains for every instruction kind.
    #[test]
    fn branch_dependence_is_pure_in_kind_and_scope() {
        let mut rng = Srng::new(07_2024);
        for _ in 0..500 {
            let mut chain = Vec::new();
            for d in 0..rng.range(0, 4) {
                if rng.chance(0.5) {
                    chain.push(ScopeFrame::loop_frame(format!("l{d}")));
                } else {
                    chain.push(ScopeFrame::branch_frame(format!("b{d}"), "then"));
                }
            }
            let loop_exit_kinds = [InstrOp::Return, InstrOp::Break, InstrOp::Continue];
            let has_branch = chain.iter().any(|f| f.kind == ScopeKind::Branch);
            let has_loop = chain.iter().any(|f| f.kind == ScopeKind::Loop);
            for op in [
                InstrOp::Noop,
                InstrOp::Goto,
                InstrOp::ArrayLoad,
                InstrOp::Return,
                InstrOp::Break,
                InstrOp::Continue,
            ] {
                let expect = has_branch
                    || (has_loop && loop_exit_kinds.iter().any(|k| k.kind() == op.kind()));
                assert_eq!(is_branch_dependent(&instr(op, chain.clone())), expect);
            }
        }
    }
}
