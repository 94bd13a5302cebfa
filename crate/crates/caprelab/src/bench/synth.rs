//! Seeded synthetic models, datasets, and traces for property testing and
//! scaling measurements.
//!
//! Generated models are valid by construction: single-assignment bodies,
//! dense indices, layered calls (a method only invokes the layer below it,
//! so there is no recursion), and `arrayload` only inside loops. With
//! `tree_data`, datasets are alias-free object trees deep enough that
//! every statically predicted navigation finds a real object, which is
//! what exactness checks need.

use std::collections::BTreeMap;

use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::rng::{mix2, Srng};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub seed: u64,
    pub types: usize,
    /// Method layers; layer L may call only layer L-1.
    pub layers: usize,
    pub max_ops: usize,
    pub branches: bool,
    pub calls: bool,
    /// Alias-free tree dataset (vs shared random references).
    pub tree_data: bool,
    pub data_depth: usize,
    pub collection_len: usize,
}

impl SynthConfig {
    /// Branch-free, call-layered, alias-free: the exactness regime. The
    /// data depth exceeds the deepest possible hint path (chains are
    /// capped at [`MAX_NAV_DEPTH`] per method over two call layers), so
    /// every predicted navigation finds a real object.
    pub fn exactness(seed: u64) -> Self {
        Self {
            seed,
            types: 4,
            layers: 2,
            max_ops: 8,
            branches: false,
            calls: true,
            tree_data: true,
            data_depth: 6,
            collection_len: 2,
        }
    }

    /// Branches and shared references allowed: the dedup/metrics regime.
    pub fn general(seed: u64) -> Self {
        Self {
            seed,
            types: 5,
            layers: 3,
            max_ops: 10,
            branches: true,
            calls: true,
            tree_data: false,
            data_depth: 6,
            collection_len: 3,
        }
    }
}

const MAX_NAV_DEPTH: usize = 3;

#[derive(Clone)]
enum VKind {
    Obj { ty: usize, depth: usize },
    Prim,
}

pub fn generate_model(cfg: &SynthConfig) -> ApplicationModel {
    let mut rng = Srng::new(mix2(cfg.seed, 0x73796e7468));
    let type_names: Vec<String> = (0..cfg.types).map(|i| format!("T{i}")).collect();
    let mut types: Vec<TypeDecl> = (0..cfg.types)
        .map(|i| TypeDecl {
            name: type_names[i].clone(),
            persistent: true,
            fields: vec![
                FieldDecl {
                    name: "s0".into(),
                    target_type: type_names[rng.range(0, cfg.types)].clone(),
                    cardinality: Cardinality::Single,
                },
                FieldDecl {
                    name: "kids".into(),
                    target_type: type_names[rng.range(0, cfg.types)].clone(),
                    cardinality: Cardinality::Collection,
                },
                FieldDecl {
                    name: "tag".into(),
                    target_type: "int".into(),
                    cardinality: Cardinality::Single,
                },
            ],
            methods: vec![],
        })
        .collect();

    // whether the layer-L method of each type takes a persistent parameter
    let mut param_types: BTreeMap<(usize, usize), Option<usize>> = BTreeMap::new();
    for layer in 0..cfg.layers {
        for t in 0..cfg.types {
            let p = (layer > 0 && rng.chance(0.3)).then(|| rng.range(0, cfg.types));
            param_types.insert((t, layer), p);
        }
    }

    for layer in 0..cfg.layers {
        for t in 0..cfg.types {
            let body = gen_body(cfg, &mut rng, &types, &param_types, t, layer);
            let params = match param_types[&(t, layer)] {
                Some(pt) => vec![("arg".to_string(), type_names[pt].clone())],
                None => vec![],
            };
            types[t].methods.push(MethodDecl {
                name: format!("m{layer}"),
                params,
                instructions: body,
                overrides_method_of: None,
            });
        }
    }

    // top-layer methods are the entry points
    let entry_points = (0..cfg.types)
        .map(|t| MethodRef::new(&type_names[t], format!("m{}", cfg.layers - 1)))
        .collect();
    ApplicationModel {
        types,
        entry_points,
    }
}

fn gen_body(
    cfg: &SynthConfig,
    rng: &mut Srng,
    types: &[TypeDecl],
    param_types: &BTreeMap<(usize, usize), Option<usize>>,
    owner: usize,
    layer: usize,
) -> Vec<crate::model::IrInstruction> {
    let type_index = |name: &str| {
        types
            .iter()
            .position(|t| t.name == name)
            .expect("declared type")
    };
    let mut b = MethodBuilder::new();
    let mut vars: Vec<(String, VKind)> = vec![(
        "v_self".into(),
        VKind::Obj {
            ty: owner,
            depth: 0,
        },
    )];
    if let Some(pt) = param_types[&(owner, layer)] {
        vars.push(("p0".into(), VKind::Obj { ty: pt, depth: 1 }));
    }
    let mut scope_depth = 0usize;
    let mut next_scope = 0usize;

    let ops = rng.range(2, cfg.max_ops.max(3));
    for _ in 0..ops {
        let obj_vars: Vec<(String, usize, usize)> = vars
            .iter()
            .filter_map(|(n, k)| match k {
                VKind::Obj { ty, depth } if *depth < MAX_NAV_DEPTH => {
                    Some((n.clone(), *ty, *depth))
                }
                _ => None,
            })
            .collect();
        if obj_vars.is_empty() {
            break;
        }
        let roll = rng.range(0, 100);
        if roll < 35 {
            // single navigation
            let (v, ty, depth) = rng.pick(&obj_vars).clone();
            let field = &types[ty].fields[0];
            let def = b.getfield(&types[ty].name, &field.name, &field.target_type, &v);
            vars.push((
                def,
                VKind::Obj {
                    ty: type_index(&field.target_type),
                    depth: depth + 1,
                },
            ));
        } else if roll < 45 {
            // primitive read
            let (v, ty, _) = rng.pick(&obj_vars).clone();
            let def = b.getfield(&types[ty].name, "tag", "int", &v);
            vars.push((def, VKind::Prim));
        } else if roll < 70 && scope_depth == 0 {
            // loop over a fresh collection handle
            let (v, ty, depth) = rng.pick(&obj_vars).clone();
            if depth + 1 >= MAX_NAV_DEPTH {
                continue;
            }
            let field = &types[ty].fields[1];
            let elem_ty = type_index(&field.target_type);
            let coll = b.getfield(&types[ty].name, &field.name, &field.target_type, &v);
            let loop_id = format!("l{next_scope}");
            next_scope += 1;
            b.open_loop(&loop_id);
            scope_depth += 1;
            let elem = b.arrayload(&coll);
            let elem_depth = depth + 1;
            // touch the element and maybe navigate once more
            let field0 = &types[elem_ty].fields[0];
            let def = b.getfield(
                &types[elem_ty].name,
                &field0.name,
                &field0.target_type,
                &elem,
            );
            vars.push((
                def,
                VKind::Obj {
                    ty: type_index(&field0.target_type),
                    depth: elem_depth + 1,
                },
            ));
            if cfg.calls && layer > 0 && rng.chance(0.5) {
                emit_call(
                    cfg,
                    rng,
                    types,
                    param_types,
                    &mut b,
                    &vars,
                    elem_ty,
                    &elem,
                    layer - 1,
                );
            }
            b.close();
            scope_depth -= 1;
            vars.push((
                elem,
                VKind::Obj {
                    ty: elem_ty,
                    depth: elem_depth,
                },
            ));
        } else if roll < 80 && cfg.branches && scope_depth == 0 {
            // guarded navigation
            let (v, ty, depth) = rng.pick(&obj_vars).clone();
            let tag = b.getfield(&types[ty].name, "tag", "int", &v);
            let branch_id = format!("b{next_scope}");
            next_scope += 1;
            b.cond(&branch_id, vec![tag.as_str()]);
            b.open_arm(&branch_id, "then");
            let field = &types[ty].fields[0];
            let def = b.getfield(&types[ty].name, &field.name, &field.target_type, &v);
            vars.push((
                def,
                VKind::Obj {
                    ty: type_index(&field.target_type),
                    depth: depth + 1,
                },
            ));
            b.close();
            b.open_arm(&branch_id, "else");
            b.noop();
            b.close();
        } else if cfg.calls && layer > 0 {
            let (v, ty, _) = rng.pick(&obj_vars).clone();
            emit_call(
                cfg,
                rng,
                types,
                param_types,
                &mut b,
                &vars,
                ty,
                &v,
                layer - 1,
            );
        } else {
            b.noop();
        }
    }
    // maybe return a rooted object
    if rng.chance(0.4) {
        let ret = vars.iter().rev().find_map(|(n, k)| match k {
            VKind::Obj { .. } if n != "v_self" && n != "p0" => Some(n.clone()),
            _ => None,
        });
        b.ret(ret.as_deref());
    }
    b.build()
}

fn emit_call(
    _cfg: &SynthConfig,
    rng: &mut Srng,
    types: &[TypeDecl],
    param_types: &BTreeMap<(usize, usize), Option<usize>>,
    b: &mut MethodBuilder,
    vars: &[(String, VKind)],
    recv_ty: usize,
    recv: &str,
    callee_layer: usize,
) {
    let callee = format!("m{callee_layer}");
    match param_types[&(recv_ty, callee_layer)] {
        None => b.invoke_void(&types[recv_ty].name, &callee, recv, &[]),
        Some(pt) => {
            // pass any in-scope object of the parameter type, or skip
            let arg = vars.iter().find_map(|(n, k)| match k {
                VKind::Obj { ty, depth } if *ty == pt && *depth <= MAX_NAV_DEPTH => Some(n.clone()),
                _ => None,
            });
            match arg {
                Some(a) => b.invoke_void(&types[recv_ty].name, &callee, recv, &[a.as_str()]),
                None => {
                    let _ = rng.next_u64();
                    b.noop();
                }
            }
        }
    }
}

/// Dataset plus the root instance of each type.
pub fn generate_dataset(
    model: &ApplicationModel,
    cfg: &SynthConfig,
) -> (Vec<ObjectRecord>, BTreeMap<String, u64>) {
    let mut rng = Srng::new(mix2(cfg.seed, 0x64617461));
    let mut out: Vec<ObjectRecord> = Vec::new();
    let mut roots = BTreeMap::new();
    if cfg.tree_data {
        let mut next = 1u64;
        for t in &model.types {
            let root = tree_fill(model, &t.name, 0, cfg, &mut next, &mut out);
            roots.insert(t.name.clone(), root);
        }
    } else {
        let per_type = 3usize;
        let mut ids: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        let mut next = 1u64;
        for t in &model.types {
            let mut list = Vec::new();
            for _ in 0..per_type {
                list.push(next);
                out.push(ObjectRecord::new(next, &t.name));
                next += 1;
            }
            roots.insert(t.name.clone(), list[0]);
            ids.insert(t.name.clone(), list);
        }
        for rec in &mut out {
            let decl = model.type_decl(&rec.type_name).expect("declared");
            for f in decl.fields.clone() {
                if model.type_decl(&f.target_type).is_none() {
                    continue;
                }
                let pool = &ids[&f.target_type];
                match f.cardinality {
                    Cardinality::Single => {
                        let v = if rng.chance(0.9) {
                            Some(pool[rng.range(0, pool.len())])
                        } else {
                            None
                        };
                        rec.singles.insert(f.name.clone(), v);
                    }
                    Cardinality::Collection => {
                        let n = rng.range(1, cfg.collection_len + 2);
                        let elems = (0..n).map(|_| pool[rng.range(0, pool.len())]).collect();
                        rec.collections.insert(f.name.clone(), elems);
                    }
                }
            }
        }
    }
    (out, roots)
}

fn tree_fill(
    model: &ApplicationModel,
    type_name: &str,
    depth: usize,
    cfg: &SynthConfig,
    next: &mut u64,
    out: &mut Vec<ObjectRecord>,
) -> u64 {
    let oid = *next;
    *next += 1;
    let idx = out.len();
    out.push(ObjectRecord::new(oid, type_name));
    let decl = model.type_decl(type_name).expect("declared").clone();
    for f in &decl.fields {
        if model.type_decl(&f.target_type).is_none() {
            continue;
        }
        match f.cardinality {
            Cardinality::Single => {
                let v = (depth < cfg.data_depth)
                    .then(|| tree_fill(model, &f.target_type, depth + 1, cfg, next, out));
                out[idx].singles.insert(f.name.clone(), v);
            }
            Cardinality::Collection => {
                let elems = if depth < cfg.data_depth {
                    (0..cfg.collection_len)
                        .map(|_| tree_fill(model, &f.target_type, depth + 1, cfg, next, out))
                        .collect()
                } else {
                    Vec::new()
                };
                out[idx].collections.insert(f.name.clone(), elems);
            }
        }
    }
    oid
}

/// One activation per declared method, on its owner's root instance.
pub fn trace_all_methods(model: &ApplicationModel, roots: &BTreeMap<String, u64>) -> WorkloadTrace {
    let steps = model
        .method_refs()
        .into_iter()
        .map(|m| TraceStep {
            root: roots[&m.owner],
            method: m,
        })
        .collect();
    WorkloadTrace::new(steps, BranchPolicy::Fixed { value: true })
}

/// One activation per entry point, seeded branch outcomes.
pub fn trace_entry_points(
    model: &ApplicationModel,
    roots: &BTreeMap<String, u64>,
) -> WorkloadTrace {
    let steps = model
        .entry_points
        .iter()
        .map(|m| TraceStep {
            root: roots[&m.owner],
            method: m.clone(),
        })
        .collect();
    WorkloadTrace::new(steps, BranchPolicy::Seeded { p_true: 0.5 })
}

/// Straight-line model with roughly `total_instrs` instructions across
/// many medium methods calling small per-type utilities; used for the
/// analyze-once and linear-scaling measurements.
pub fn scaling_model(total_instrs: usize) -> ApplicationModel {
    let n_types = 10usize;
    let type_names: Vec<String> = (0..n_types).map(|i| format!("S{i}")).collect();
    let mut types: Vec<TypeDecl> = (0..n_types)
        .map(|i| TypeDecl {
            name: type_names[i].clone(),
            persistent: true,
            fields: vec![
                FieldDecl {
                    name: "next".into(),
                    target_type: type_names[(i + 1) % n_types].clone(),
                    cardinality: Cardinality::Single,
                },
                FieldDecl {
                    name: "kids".into(),
                    target_type: type_names[(i + 2) % n_types].clone(),
                    cardinality: Cardinality::Collection,
                },
                FieldDecl {
                    name: "tag".into(),
                    target_type: "int".into(),
                    cardinality: Cardinality::Single,
                },
            ],
            methods: vec![],
        })
        .collect();

    // per-type utility: two navigations
    for i in 0..n_types {
        let mut b = MethodBuilder::new();
        let n1 = b.getfield(
            &type_names[i],
            "next",
            &type_names[(i + 1) % n_types],
            "v_self",
        );
        let _n2 = b.getfield(
            &type_names[(i + 1) % n_types],
            "next",
            &type_names[(i + 2) % n_types],
            &n1,
        );
        types[i].methods.push(MethodDecl {
            name: "util".into(),
            params: vec![],
            instructions: b.build(),
            overrides_method_of: None,
        });
    }

    const FILLER_OPS: usize = 40;
    let methods = (total_instrs / FILLER_OPS).max(1);
    for k in 0..methods {
        let owner = k % n_types;
        let mut b = MethodBuilder::new();
        let mut emitted = 0usize;
        let mut cur = "v_self".to_string();
        let mut cur_ty = owner;
        while emitted + 4 < FILLER_OPS {
            let nxt = b.getfield(
                &type_names[cur_ty],
                "next",
                &type_names[(cur_ty + 1) % n_types],
                &cur,
            );
            let _tag = b.getfield(&type_names[(cur_ty + 1) % n_types], "tag", "int", &nxt);
            emitted += 2;
            cur_ty = (cur_ty + 1) % n_types;
            cur = nxt;
            if emitted % 8 == 0 {
                cur = "v_self".to_string();
                cur_ty = owner;
            }
        }
        b.invoke_void(&type_names[owner], "util", "v_self", &[]);
        types[owner].methods.push(MethodDecl {
            name: format!("f{k}"),
            params: vec![],
            instructions: b.build(),
            overrides_method_of: None,
        });
    }
    ApplicationModel {
        types,
        entry_points: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn generated_models_validate() {
        for seed in 0..40 {
            let model = generate_model(&SynthConfig::exactness(seed));
            let report = validate_model(&model);
            assert!(report.is_valid(), "seed {seed}: {report}");
            let model = generate_model(&SynthConfig::general(seed));
            let report = validate_model(&model);
            assert!(report.is_valid(), "seed {seed} general: {report}");
        }
    }

    #[test]
    fn instruction_indices_match_position() {
        let model = generate_model(&SynthConfig::general(9));
        for t in &model.types {
            for m in &t.methods {
                for (pos, i) in m.instructions.iter().enumerate() {
                    assert_eq!(i.ii, pos);
                    if i.kind() == crate::model::InstrKind::ArrayLoad {
                        assert!(i
                            .scope_chain
                            .iter()
                            .any(|f| f.kind == crate::model::ScopeKind::Loop));
                    }
                }
            }
        }
    }
}
