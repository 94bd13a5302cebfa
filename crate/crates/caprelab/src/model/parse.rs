//! Loader and writer for the application file format.
//!
//! Top level: `{"types":[...], "entryPoints":["Owner.method", ...]}`.
//! Each instruction is
//! `{"ii":int, "kind":str, "params":{...}, "def":str|null, "use":[str], "scope":[...]}`
//! with scope frames `{"kind":"loop"|"branch", "id":str, "arm":str|null}`.
//! The receiver slot is the reserved id `v_self`; parameter slots are
//! `p0`, `p1`, ...
//!
//! Collection-element access accepts two spellings: the IR kind
//! `arrayload`, or `invokemethod` of `java.util.Iterator.next` applied to
//! the collection variable. The loader normalizes the second into the
//! first, so downstream passes see a single kind.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    ApplicationModel, FieldDecl, InstrOp, IrInstruction, MethodDecl, MethodRef, ScopeFrame,
    TypeDecl,
};
use crate::error::ModelError;

#[derive(Serialize, Deserialize)]
struct RawModel {
    #[serde(default)]
    types: Vec<RawType>,
    #[serde(rename = "entryPoints", default)]
    entry_points: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawType {
    name: String,
    #[serde(default = "super::default_true")]
    persistent: bool,
    #[serde(default)]
    fields: Vec<FieldDecl>,
    #[serde(default)]
    methods: Vec<RawMethod>,
}

#[derive(Serialize, Deserialize)]
struct RawMethod {
    name: String,
    #[serde(default)]
    params: Vec<(String, String)>,
    #[serde(default)]
    instructions: Vec<RawInstr>,
    #[serde(
        rename = "overridesMethodOf",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    overrides_method_of: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawInstr {
    ii: usize,
    kind: String,
    #[serde(default)]
    params: BTreeMap<String, Value>,
    #[serde(default)]
    def: Option<String>,
    #[serde(rename = "use", default)]
    used: Vec<String>,
    #[serde(default)]
    scope: Vec<ScopeFrame>,
}

pub fn load_model(path: &Path) -> Result<ApplicationModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    model_from_json(&text)
}

pub fn model_from_json(text: &str) -> Result<ApplicationModel, ModelError> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    lower(raw)
}

pub fn save_model(model: &ApplicationModel, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, model_to_json(model)).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn model_to_json(model: &ApplicationModel) -> String {
    let raw = raise(model);
    serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
}

fn lower(raw: RawModel) -> Result<ApplicationModel, ModelError> {
    let mut types = Vec::with_capacity(raw.types.len());
    for t in raw.types {
        let mut methods = Vec::with_capacity(t.methods.len());
        for m in t.methods {
            let ctx = format!("{}.{}", t.name, m.name);
            let instructions = m
                .instructions
                .into_iter()
                .map(|i| lower_instr(i, &ctx))
                .collect::<Result<Vec<_>, _>>()?;
            methods.push(MethodDecl {
                name: m.name,
                params: m.params,
                instructions,
                overrides_method_of: m.overrides_method_of,
            });
        }
        types.push(TypeDecl {
            name: t.name,
            persistent: t.persistent,
            fields: t.fields,
            methods,
        });
    }
    let entry_points = raw
        .entry_points
        .iter()
        .map(|s| MethodRef::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ApplicationModel {
        types,
        entry_points,
    })
}

fn lower_instr(raw: RawInstr, ctx: &str) -> Result<IrInstruction, ModelError> {
    let get = |key: &str| -> Result<String, ModelError> {
        raw.params
            .get(key)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ModelError::BadInstruction {
                method: ctx.to_string(),
                ii: raw.ii,
                message: format!(
                    "missing or non-string param `{key}` for kind `{}`",
                    raw.kind
                ),
            })
    };
    let op = match raw.kind.as_str() {
        "getfield" => InstrOp::GetField {
            owner_type: get("ownerType")?,
            field_name: get("fieldName")?,
            field_type: get("fieldType")?,
        },
        "arrayload" => InstrOp::ArrayLoad,
        "invokemethod" => {
            let owner = get("ownerType")?;
            let name = get("methodName")?;
            if is_iterator_owner(&owner) && name == "next" {
                // Iterator spelling of collection-element access.
                InstrOp::ArrayLoad
            } else {
                InstrOp::InvokeMethod {
                    owner_type: owner,
                    method_name: name,
                }
            }
        }
        "conditionalbranch" => InstrOp::ConditionalBranch {
            branch: get("branch")?,
        },
        "goto" => InstrOp::Goto,
        "return" => InstrOp::Return,
        "break" => InstrOp::Break,
        "continue" => InstrOp::Continue,
        "noop" => InstrOp::Noop,
        other => {
            return Err(ModelError::BadInstruction {
                method: ctx.to_string(),
                ii: raw.ii,
                message: format!("unknown instruction kind `{other}`"),
            })
        }
    };
    Ok(IrInstruction {
        ii: raw.ii,
        op,
        def_var: raw.def,
        used_vars: raw.used,
        scope_chain: raw.scope,
    })
}

fn is_iterator_owner(owner: &str) -> bool {
    owner == "java.util.Iterator" || owner == "java/util/Iterator"
}

fn raise(model: &ApplicationModel) -> RawModel {
    RawModel {
        types: model
            .types
            .iter()
            .map(|t| RawType {
                name: t.name.clone(),
                persistent: t.persistent,
                fields: t.fields.clone(),
                methods: t.methods.iter().map(raise_method).collect(),
            })
            .collect(),
        entry_points: model.entry_points.iter().map(|m| m.to_string()).collect(),
    }
}

fn raise_method(m: &MethodDecl) -> RawMethod {
    RawMethod {
        name: m.name.clone(),
        params: m.params.clone(),
        instructions: m.instructions.iter().map(raise_instr).collect(),
        overrides_method_of: m.overrides_method_of.clone(),
    }
}

fn raise_instr(i: &IrInstruction) -> RawInstr {
    let mut params = BTreeMap::new();
    let kind = match &i.op {
        InstrOp::GetField {
            owner_type,
            field_name,
            field_type,
        } => {
            params.insert("ownerType".into(), Value::from(owner_type.as_str()));
            params.insert("fieldName".into(), Value::from(field_name.as_str()));
            params.insert("fieldType".into(), Value::from(field_type.as_str()));
            "getfield"
        }
        InstrOp::ArrayLoad => "arrayload",
        InstrOp::InvokeMethod {
            owner_type,
            method_name,
        } => {
            params.insert("ownerType".into(), Value::from(owner_type.as_str()));
            params.insert("methodName".into(), Value::from(method_name.as_str()));
            "invokemethod"
        }
        InstrOp::ConditionalBranch { branch } => {
            params.insert("branch".into(), Value::from(branch.as_str()));
            "conditionalbranch"
        }
        InstrOp::Goto => "goto",
        InstrOp::Return => "return",
        InstrOp::Break => "break",
        InstrOp::Continue => "continue",
        InstrOp::Noop => "noop",
    };
    RawInstr {
        ii: i.ii,
        kind: kind.to_string(),
        params,
        def: i.def_var.clone(),
        used: i.used_vars.clone(),
        scope: i.scope_chain.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstrKind;

    #[test]
    fn malformed_json_reports_position() {
        let err = model_from_json("{\"types\": [,]}").unwrap_err();
        match err {
            ModelError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn zero_types_is_an_empty_model() {
        let m = model_from_json("{\"types\": [], \"entryPoints\": []}").unwrap();
        assert!(m.types.is_empty());
        assert!(m.entry_points.is_empty());
    }

    #[test]
    fn iterator_next_normalizes_to_arrayload() {
        let text = r#"{
          "types": [{
            "name": "A", "persistent": true,
            "fields": [{"name": "xs", "targetType": "A", "cardinality": "collection"}],
            "methods": [{
              "name": "m", "params": [],
              "instructions": [
                {"ii": 0, "kind": "getfield",
                 "params": {"ownerType": "A", "fieldName": "xs", "fieldType": "A"},
                 "def": "v1", "use": ["v_self"], "scope": []},
                {"ii": 1, "kind": "invokemethod",
                 "params": {"ownerType": "java.util.Iterator", "methodName": "next"},
                 "def": "v2", "use": ["v1"],
                 "scope": [{"kind": "loop", "id": "l0"}]}
              ]
            }]
          }],
          "entryPoints": ["A.m"]
        }"#;
        let m = model_from_json(text).unwrap();
        let instrs = &m.types[0].methods[0].instructions;
        assert_eq!(instrs[1].kind(), InstrKind::ArrayLoad);
    }
}

#[cfg(test)]
mod fixture_tests {
    use super::*;
    use crate::bench::synth::{generate_model, SynthConfig};

    fn fixture_path() -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bank.app.json")
    }

    #[test]
    fn bank_fixture_parses_fully_resolved() {
        let model = load_model(&fixture_path()).unwrap();
        // the seven schema entities plus the management class driving them
        assert_eq!(model.types.len(), 8);
        let domain_entities = [
            "Transaction",
            "TransactionType",
            "Account",
            "Customer",
            "Employee",
            "Department",
            "Company",
        ];
        for name in domain_entities {
            assert!(model.type_decl(name).is_some(), "missing {name}");
        }
        for (owner, name) in [
            ("Transaction", "getAccount"),
            ("Account", "setCustomer"),
            ("BankManagement", "setAllTransCustomers"),
        ] {
            assert!(model.method_decl(&MethodRef::new(owner, name)).is_some());
        }
        assert_eq!(model.entry_points.len(), 1);
        assert!(crate::model::validate_model(&model).is_valid());
        // the fixture is the same model the generator builds
        assert_eq!(model, crate::bench::bank::model());
    }

    #[test]
    fn unresolved_type_is_reported_by_name() {
        let text = r#"{
          "types": [{"name": "Book", "persistent": true,
                     "fields": [{"name": "entry", "targetType": "Ledger"}],
                     "methods": []}],
          "entryPoints": []
        }"#;
        let model = model_from_json(text).unwrap();
        let report = crate::model::validate_model(&model);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "unresolved-field-type" && v.message.contains("Ledger")));
    }

    #[test]
    fn serialize_parse_round_trip_is_identity() {
        for seed in 0..20 {
            let model = generate_model(&SynthConfig::general(seed));
            let text = model_to_json(&model);
            let back = model_from_json(&text).unwrap();
            assert_eq!(model, back, "seed {seed}");
        }
        let bank = crate::bench::bank::model();
        assert_eq!(model_from_json(&model_to_json(&bank)).unwrap(), bank);
    }
}
