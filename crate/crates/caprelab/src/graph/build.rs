//! Method graph construction.
//!
//! Static types are re-derived by forward propagation from the receiver and
//! parameter types through def/use chains; invocation results take the
//! callee's inferred return type. Each method's graph is built at most once
//! per analyzer (memo table); call-graph cycles are cut by skipping the
//! re-entrant inlining and marking the graph truncated.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use super::{AppTypeGraph, AugmentedTypeGraph, CallSite, NavNode, NodeId};
use crate::error::AnalysisError;
use crate::model::{
    is_branch_dependent, ApplicationModel, Cardinality, InstrOp, MethodDecl, MethodRef, ScopeKind,
    SELF_VAR,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StaticType {
    Object(String),
    Collection(String),
    Primitive,
}

/// Infer the return type of a method by forward type propagation. `None`
/// means void or not statically known (e.g. cyclic recursion).
pub fn infer_return_type(model: &ApplicationModel, mref: &MethodRef) -> Option<StaticType> {
    let mut memo = BTreeMap::new();
    infer_return(model, mref, &mut memo, &mut Vec::new())
}

fn infer_return(
    model: &ApplicationModel,
    mref: &MethodRef,
    memo: &mut BTreeMap<MethodRef, Option<StaticType>>,
    stack: &mut Vec<MethodRef>,
) -> Option<StaticType> {
    if let Some(cached) = memo.get(mref) {
        return cached.clone();
    }
    if stack.contains(mref) {
        return None;
    }
    let Some(decl) = model.method_decl(mref) else {
        return None;
    };
    stack.push(mref.clone());

    let mut slots: BTreeMap<String, Option<StaticType>> = BTreeMap::new();
    slots.insert(
        SELF_VAR.to_string(),
        Some(StaticType::Object(mref.owner.clone())),
    );
    for (i, (_, ptype)) in decl.params.iter().enumerate() {
        let ty = if model.type_decl(ptype).is_some() {
            Some(StaticType::Object(ptype.clone()))
        } else {
            Some(StaticType::Primitive)
        };
        slots.insert(format!("p{i}"), ty);
    }

    let mut ret: Option<StaticType> = None;
    for instr in &decl.instructions {
        let def_ty: Option<StaticType> = match &instr.op {
            InstrOp::GetField {
                owner_type,
                field_name,
                ..
            } => model
                .type_decl(owner_type)
                .and_then(|t| t.field(field_name))
                .map(|f| match f.cardinality {
                    Cardinality::Collection => StaticType::Collection(f.target_type.clone()),
                    Cardinality::Single if model.type_decl(&f.target_type).is_some() => {
                        StaticType::Object(f.target_type.clone())
                    }
                    Cardinality::Single => StaticType::Primitive,
                }),
            InstrOp::ArrayLoad => match instr.used_vars.first().and_then(|u| slots.get(u)) {
                Some(Some(StaticType::Collection(e))) => Some(StaticType::Object(e.clone())),
                _ => None,
            },
            InstrOp::InvokeMethod {
                owner_type,
                method_name,
            } => {
                let callee = MethodRef::new(owner_type.clone(), method_name.clone());
                infer_return(model, &callee, memo, stack)
            }
            _ => None,
        };
        if instr.kind() == crate::model::InstrKind::Return {
            ret = instr
                .used_vars
                .first()
                .and_then(|u| slots.get(u))
                .cloned()
                .flatten();
        }
        if let Some(def) = &instr.def_var {
            slots.insert(def.clone(), def_ty);
        }
    }
    stack.pop();
    memo.insert(mref.clone(), ret.clone());
    ret
}

/// How inlining treats branch-dependent callee navigations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InlineMode {
    /// Skip them: the callee's own hint set covers its uncertain
    /// navigations, so callers only absorb the unconditional backbone.
    /// This is the graph prefetching hints are generated from.
    PruneCalleeBranches,
    /// Keep everything, OR-ing flags. Used as the coverage reference when
    /// checking predictions against observed accesses.
    KeepAll,
}

enum MemoEntry {
    InProgress,
    Done(Rc<AugmentedTypeGraph>),
}

pub struct Analyzer<'m> {
    model: &'m ApplicationModel,
    pub gt: AppTypeGraph,
    mode: InlineMode,
    memo: BTreeMap<MethodRef, MemoEntry>,
    ret_memo: BTreeMap<MethodRef, Option<StaticType>>,
    /// Times each method's graph was actually constructed (not served from
    /// the memo table). The analyze-once contract asserts these stay at 1.
    pub build_counts: BTreeMap<MethodRef, usize>,
}

impl<'m> Analyzer<'m> {
    pub fn new(model: &'m ApplicationModel, mode: InlineMode) -> Self {
        Self {
            model,
            gt: super::build_app_type_graph(model),
            mode,
            memo: BTreeMap::new(),
            ret_memo: BTreeMap::new(),
            build_counts: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &'m ApplicationModel {
        self.model
    }

    /// Augmented graph of one method, memoized.
    pub fn graph(&mut self, mref: &MethodRef) -> Result<Rc<AugmentedTypeGraph>, AnalysisError> {
        match self.graph_inner(mref)? {
            Some(g) => Ok(g),
            // Only reachable by calling into a build already on the stack,
            // which `graph_inner` handles internally.
            None => unreachable!("top-level graph request cannot re-enter"),
        }
    }

    /// Graphs for every declared method, entry points first.
    pub fn analyze_all(
        &mut self,
    ) -> Result<BTreeMap<MethodRef, Rc<AugmentedTypeGraph>>, AnalysisError> {
        let mut order: Vec<MethodRef> = self.model.entry_points.clone();
        order.extend(self.model.method_refs());
        let mut out = BTreeMap::new();
        for mref in order {
            if !out.contains_key(&mref) && self.model.method_decl(&mref).is_some() {
                out.insert(mref.clone(), self.graph(&mref)?);
            }
        }
        Ok(out)
    }

    fn graph_inner(
        &mut self,
        mref: &MethodRef,
    ) -> Result<Option<Rc<AugmentedTypeGraph>>, AnalysisError> {
        match self.memo.get(mref) {
            Some(MemoEntry::Done(g)) => return Ok(Some(g.clone())),
            Some(MemoEntry::InProgress) => return Ok(None),
            None => {}
        }
        self.memo.insert(mref.clone(), MemoEntry::InProgress);
        *self.build_counts.entry(mref.clone()).or_insert(0) += 1;
        let decl = self
            .model
            .method_decl(mref)
            .ok_or_else(|| AnalysisError::UnknownType(mref.to_string()))?;
        let g = build_graph(self, mref, decl, true)?;
        let rc = Rc::new(g);
        self.memo.insert(mref.clone(), MemoEntry::Done(rc.clone()));
        Ok(Some(rc))
    }

    fn return_type(&mut self, mref: &MethodRef) -> Option<StaticType> {
        if let Some(t) = self.ret_memo.get(mref) {
            return t.clone();
        }
        infer_return(self.model, mref, &mut self.ret_memo, &mut Vec::new())
    }
}

/// Intra-procedural method graph: navigations triggered directly by the
/// method's own instructions, with invocation results typed but not
/// expanded.
pub fn build_method_graph(
    model: &ApplicationModel,
    mref: &MethodRef,
    _g: &AppTypeGraph,
) -> Result<AugmentedTypeGraph, AnalysisError> {
    let decl = model
        .method_decl(mref)
        .ok_or_else(|| AnalysisError::UnknownType(mref.to_string()))?;
    let mut analyzer = Analyzer::new(model, InlineMode::PruneCalleeBranches);
    build_graph(&mut analyzer, mref, decl, false)
}

#[derive(Clone, Debug)]
enum VarState {
    Node(NodeId),
    CollectionOf {
        owner: Option<NodeId>,
        field: String,
        elem: String,
    },
    /// The value is well typed but not rooted in the graph (collection
    /// element outside a loop, result of a skipped inlining, ...).
    Detached,
    Opaque,
}

struct GraphBuilder {
    g: AugmentedTypeGraph,
    vars: BTreeMap<String, VarState>,
}

impl GraphBuilder {
    fn add_node(&mut self, mut node: NavNode) -> NodeId {
        let id = self.g.nodes.len();
        node.id = id;
        if let Some(p) = node.parent {
            self.g.edges.insert((p, id));
        }
        self.g.nodes.push(node);
        id
    }
}

fn build_graph(
    analyzer: &mut Analyzer,
    mref: &MethodRef,
    decl: &MethodDecl,
    inline: bool,
) -> Result<AugmentedTypeGraph, AnalysisError> {
    let mut b = GraphBuilder {
        g: AugmentedTypeGraph {
            method: mref.clone(),
            root: 0,
            nodes: Vec::new(),
            edges: BTreeSet::new(),
            param_roots: Vec::new(),
            return_node: None,
            truncated: false,
            call_sites: Vec::new(),
        },
        vars: BTreeMap::new(),
    };
    let root = b.add_node(NavNode {
        id: 0,
        key: "root".to_string(),
        var_id: Some(SELF_VAR.to_string()),
        via_field: None,
        type_name: mref.owner.clone(),
        cardinality: Cardinality::Single,
        branch_dependent: false,
        callee_local_branch: false,
        is_return_node: false,
        param_index: None,
        parent: None,
    });
    b.vars.insert(SELF_VAR.to_string(), VarState::Node(root));
    for (i, (_, ptype)) in decl.params.iter().enumerate() {
        let slot = format!("p{i}");
        if analyzer.model.type_decl(ptype).is_some() {
            let id = b.add_node(NavNode {
                id: 0,
                key: slot.clone(),
                var_id: Some(slot.clone()),
                via_field: None,
                type_name: ptype.clone(),
                cardinality: Cardinality::Single,
                branch_dependent: false,
                callee_local_branch: false,
                is_return_node: false,
                param_index: Some(i),
                parent: None,
            });
            b.g.param_roots.push((i, id));
            b.vars.insert(slot, VarState::Node(id));
        } else {
            b.vars.insert(slot, VarState::Detached);
        }
    }

    for instr in &decl.instructions {
        let bd = is_branch_dependent(instr);
        match &instr.op {
            InstrOp::GetField {
                owner_type,
                field_name,
                ..
            } => {
                let owner = use_var(&b, mref, instr.ii, instr.used_vars.first())?;
                let assoc = analyzer.gt.lookup(owner_type, field_name).cloned();
                let state = match (owner, assoc) {
                    (VarState::Node(n), Some((target, Cardinality::Single))) => {
                        if b.g.nodes[n].type_name != *owner_type {
                            return Err(AnalysisError::Inconsistent {
                                method: mref.to_string(),
                                ii: instr.ii,
                                message: format!(
                                    "getfield owner `{owner_type}` but variable holds `{}`",
                                    b.g.nodes[n].type_name
                                ),
                            });
                        }
                        let id = b.add_node(NavNode {
                            id: 0,
                            key: instr
                                .def_var
                                .clone()
                                .unwrap_or_else(|| format!("n{}", instr.ii)),
                            var_id: instr.def_var.clone(),
                            via_field: Some(field_name.clone()),
                            type_name: target,
                            cardinality: Cardinality::Single,
                            branch_dependent: bd,
                            callee_local_branch: false,
                            is_return_node: false,
                            param_index: None,
                            parent: Some(n),
                        });
                        VarState::Node(id)
                    }
                    (VarState::Node(n), Some((target, Cardinality::Collection))) => {
                        VarState::CollectionOf {
                            owner: Some(n),
                            field: field_name.clone(),
                            elem: target,
                        }
                    }
                    (_, Some((target, Cardinality::Collection))) => VarState::CollectionOf {
                        owner: None,
                        field: field_name.clone(),
                        elem: target,
                    },
                    // unrooted source, primitive target, or non-persistent
                    // target: no navigation
                    (_, Some(_)) | (_, None) => VarState::Detached,
                };
                define(&mut b, instr.def_var.as_deref(), state);
            }
            InstrOp::ArrayLoad => {
                let owner = use_var(&b, mref, instr.ii, instr.used_vars.first())?;
                let in_loop = instr.scope_chain.iter().any(|f| f.kind == ScopeKind::Loop);
                let state = match owner {
                    VarState::CollectionOf {
                        owner: Some(n),
                        field,
                        elem,
                    } if in_loop => {
                        let id = b.add_node(NavNode {
                            id: 0,
                            key: instr
                                .def_var
                                .clone()
                                .unwrap_or_else(|| format!("n{}", instr.ii)),
                            var_id: instr.def_var.clone(),
                            via_field: Some(field.clone()),
                            type_name: elem.clone(),
                            cardinality: Cardinality::Collection,
                            branch_dependent: bd,
                            callee_local_branch: false,
                            is_return_node: false,
                            param_index: None,
                            parent: Some(n),
                        });
                        VarState::Node(id)
                    }
                    VarState::CollectionOf { .. } => VarState::Detached,
                    VarState::Opaque => {
                        return Err(AnalysisError::UnknownVarType {
                            method: mref.to_string(),
                            ii: instr.ii,
                            var: instr.used_vars.first().cloned().unwrap_or_default(),
                        })
                    }
                    _ => {
                        return Err(AnalysisError::Inconsistent {
                            method: mref.to_string(),
                            ii: instr.ii,
                            message: "arrayload on a non-collection variable".to_string(),
                        })
                    }
                };
                define(&mut b, instr.def_var.as_deref(), state);
            }
            InstrOp::InvokeMethod {
                owner_type,
                method_name,
            } => {
                let callee = MethodRef::new(owner_type.clone(), method_name.clone());
                let recv = match use_var(&b, mref, instr.ii, instr.used_vars.first())? {
                    VarState::Node(n) => Some(n),
                    _ => None,
                };
                let mut inlined = false;
                let mut def_state: Option<VarState> = None;
                if inline && !analyzer.model.has_overrides(&callee) {
                    match analyzer.graph_inner(&callee)? {
                        Some(callee_g) => {
                            let arg_nodes: Vec<Option<NodeId>> = instr
                                .used_vars
                                .iter()
                                .skip(1)
                                .map(|v| match b.vars.get(v) {
                                    Some(VarState::Node(n)) => Some(*n),
                                    _ => None,
                                })
                                .collect();
                            let site_bd = bd;
                            let ret = inline_copy(
                                &mut b,
                                &callee_g,
                                recv,
                                &arg_nodes,
                                site_bd,
                                instr.ii,
                                analyzer.mode,
                            );
                            b.g.truncated |= callee_g.truncated;
                            inlined = true;
                            if let Some(node) = ret {
                                def_state = Some(VarState::Node(node));
                            }
                        }
                        // cycle: the callee is on the build stack
                        None => b.g.truncated = true,
                    }
                }
                let state = def_state.unwrap_or_else(|| match analyzer.return_type(&callee) {
                    Some(StaticType::Collection(t)) => VarState::CollectionOf {
                        owner: None,
                        field: String::new(),
                        elem: t,
                    },
                    Some(_) => VarState::Detached,
                    None => VarState::Opaque,
                });
                b.g.call_sites.push(CallSite {
                    ii: instr.ii,
                    callee,
                    receiver: recv,
                    inlined,
                });
                define(&mut b, instr.def_var.as_deref(), state);
            }
            InstrOp::Return => {
                if let Some(VarState::Node(n)) =
                    instr.used_vars.first().and_then(|u| b.vars.get(u)).cloned()
                {
                    b.g.nodes[n].is_return_node = true;
                    b.g.return_node = Some(n);
                }
            }
            InstrOp::ConditionalBranch { .. }
            | InstrOp::Goto
            | InstrOp::Break
            | InstrOp::Continue
            | InstrOp::Noop => {}
        }
    }
    Ok(b.g)
}

fn define(b: &mut GraphBuilder, def: Option<&str>, state: VarState) {
    if let Some(def) = def {
        b.vars.insert(def.to_string(), state);
    }
}

fn use_var(
    b: &GraphBuilder,
    mref: &MethodRef,
    ii: usize,
    var: Option<&String>,
) -> Result<VarState, AnalysisError> {
    let var = var.ok_or_else(|| AnalysisError::Inconsistent {
        method: mref.to_string(),
        ii,
        message: "instruction requires a used variable".to_string(),
    })?;
    match b.vars.get(var) {
        Some(VarState::Opaque) | None => Err(AnalysisError::UnknownVarType {
            method: mref.to_string(),
            ii,
            var: var.clone(),
        }),
        Some(s) => Ok(s.clone()),
    }
}

/// Copy a callee graph into the caller at a call site. Returns the mapped
/// return node, if the callee returns a rooted object.
fn inline_copy(
    b: &mut GraphBuilder,
    callee: &AugmentedTypeGraph,
    receiver: Option<NodeId>,
    arg_nodes: &[Option<NodeId>],
    site_bd: bool,
    site_ii: usize,
    mode: InlineMode,
) -> Option<NodeId> {
    let mut map: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
    map.insert(callee.root, receiver);
    for (param_idx, node) in &callee.param_roots {
        // persistent-object arguments bind; primitives and unrooted values
        // bind nothing
        map.insert(*node, arg_nodes.get(*param_idx).copied().flatten());
    }
    // node ids are creation-ordered, so parents precede children
    for node in &callee.nodes {
        if map.contains_key(&node.id) {
            continue;
        }
        if mode == InlineMode::PruneCalleeBranches && node.branch_dependent {
            map.insert(node.id, None);
            continue;
        }
        let parent = node.parent.and_then(|p| map.get(&p).copied().flatten());
        let Some(parent) = parent else {
            map.insert(node.id, None);
            continue;
        };
        let id = b.add_node(NavNode {
            id: 0,
            key: format!("i{site_ii}.{}", node.key),
            var_id: None,
            via_field: node.via_field.clone(),
            type_name: node.type_name.clone(),
            cardinality: node.cardinality,
            branch_dependent: node.branch_dependent || site_bd,
            callee_local_branch: node.branch_dependent,
            is_return_node: false,
            param_index: None,
            parent: Some(parent),
        });
        map.insert(node.id, Some(id));
    }
    callee
        .return_node
        .and_then(|r| map.get(&r).copied().flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synth::{generate_model, SynthConfig};
    use crate::bench::{bank, MethodBuilder};
    use crate::model::{validate_model, ApplicationModel, FieldDecl, TypeDecl};

    fn bank_analyzer() -> (ApplicationModel, AppTypeGraph) {
        let model = bank::model();
        let gt = super::super::build_app_type_graph(&model);
        (model, gt)
    }

    #[test]
    fn get_account_method_graph_matches_figure() {
        let (model, gt) = bank_analyzer();
        let g =
            build_method_graph(&model, &MethodRef::new("Transaction", "getAccount"), &gt).unwrap();
        let mut nodes: Vec<(&str, bool)> = g
            .nodes
            .iter()
            .filter(|n| n.id != g.root)
            .map(|n| (n.via_field.as_deref().unwrap(), n.branch_dependent))
            .collect();
        nodes.sort();
        // four single navigations rooted at Transaction; only dept is
        // branch-dependent; typeID (primitive) contributes nothing
        assert_eq!(
            nodes,
            vec![
                ("account", false),
                ("dept", true),
                ("emp", false),
                ("type", false)
            ]
        );
        let ret = g.return_node.expect("getAccount returns an object");
        assert_eq!(g.node(ret).via_field.as_deref(), Some("account"));
        assert!(g.node(ret).is_return_node);
    }

    #[test]
    fn empty_method_graph_is_root_only() {
        let mut model = bank::model();
        model.types[0].methods.push(crate::model::MethodDecl {
            name: "idle".into(),
            params: vec![],
            instructions: vec![],
            overrides_method_of: None,
        });
        let gt = super::super::build_app_type_graph(&model);
        let g = build_method_graph(&model, &MethodRef::new("BankManagement", "idle"), &gt).unwrap();
        assert_eq!(g.nodes.len(), 1);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn augmented_graph_inlines_call_chain_and_binds_parameter() {
        let (model, _) = bank_analyzer();
        let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
        let ag = analyzer
            .graph(&MethodRef::new("BankManagement", "setAllTransCustomers"))
            .unwrap();
        assert_eq!(ag.nav_node_count(), 8);
        // the chained setCustomer navigations extend the returned account
        let paths: Vec<String> = ag
            .nodes
            .iter()
            .filter(|n| n.id != ag.root)
            .filter_map(|n| ag.root_path(n.id))
            .map(|steps| {
                steps
                    .into_iter()
                    .map(|(f, _)| f)
                    .collect::<Vec<_>>()
                    .join(".")
            })
            .collect();
        assert!(paths.contains(&"transactions.account.cust.company".to_string()));
        // the persistent argument re-roots the callee's parameter subtree
        assert!(paths.contains(&"manager.company".to_string()));
        // the callee-local branch navigation (dept) is not inlined
        assert!(!paths.iter().any(|p| p.contains("dept")));
        assert!(!ag.truncated);
    }

    #[test]
    fn keep_all_mode_retains_callee_branches_with_or_flags() {
        let (model, _) = bank_analyzer();
        let mut analyzer = Analyzer::new(&model, InlineMode::KeepAll);
        let ag = analyzer
            .graph(&MethodRef::new("BankManagement", "setAllTransCustomers"))
            .unwrap();
        assert_eq!(ag.nav_node_count(), 9);
        let dept = ag
            .nodes
            .iter()
            .find(|n| n.via_field.as_deref() == Some("dept"))
            .expect("dept inlined in coverage mode");
        assert!(dept.branch_dependent);
        assert!(dept.callee_local_branch);
    }

    #[test]
    fn overridden_callee_is_not_inlined() {
        // A.run invokes B.helper; C.helper overrides B.helper, so the
        // invocation is dynamically dispatched and nothing is inlined.
        let mut b = MethodBuilder::new();
        let next = b.getfield("B", "next", "B", "v_self");
        let _ = next;
        let helper = crate::model::MethodDecl {
            name: "helper".into(),
            params: vec![],
            instructions: b.build(),
            overrides_method_of: None,
        };
        let mut b = MethodBuilder::new();
        let bee = b.getfield("A", "b", "B", "v_self");
        b.invoke_void("B", "helper", &bee, &[]);
        let run = crate::model::MethodDecl {
            name: "run".into(),
            params: vec![],
            instructions: b.build(),
            overrides_method_of: None,
        };
        let override_helper = crate::model::MethodDecl {
            name: "helper".into(),
            params: vec![],
            instructions: vec![],
            overrides_method_of: Some("B".into()),
        };
        let single = |name: &str, target: &str| FieldDecl {
            name: name.into(),
            target_type: target.into(),
            cardinality: crate::model::Cardinality::Single,
        };
        let model = ApplicationModel {
            types: vec![
                TypeDecl {
                    name: "A".into(),
                    persistent: true,
                    fields: vec![single("b", "B")],
                    methods: vec![run],
                },
                TypeDecl {
                    name: "B".into(),
                    persistent: true,
                    fields: vec![single("next", "B")],
                    methods: vec![helper],
                },
                TypeDecl {
                    name: "C".into(),
                    persistent: true,
                    fields: vec![],
                    methods: vec![override_helper],
                },
            ],
            entry_points: vec![MethodRef::new("A", "run")],
        };
        assert!(validate_model(&model).is_valid());
        let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
        let ag = analyzer.graph(&MethodRef::new("A", "run")).unwrap();
        // only the b navigation; helper's next navigation is absent
        assert_eq!(ag.nav_node_count(), 1);
        assert!(!ag.call_sites[0].inlined);
    }

    #[test]
    fn self_recursion_is_cut_with_one_edge() {
        // f() { this.next.f() } over a linked type
        let mut b = MethodBuilder::new();
        let next = b.getfield("L", "next", "L", "v_self");
        b.invoke_void("L", "f", &next, &[]);
        let f = crate::model::MethodDecl {
            name: "f".into(),
            params: vec![],
            instructions: b.build(),
            overrides_method_of: None,
        };
        let model = ApplicationModel {
            types: vec![TypeDecl {
                name: "L".into(),
                persistent: true,
                fields: vec![FieldDecl {
                    name: "next".into(),
                    target_type: "L".into(),
                    cardinality: crate::model::Cardinality::Single,
                }],
                methods: vec![f],
            }],
            entry_points: vec![MethodRef::new("L", "f")],
        };
        assert!(validate_model(&model).is_valid());
        let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
        let ag = analyzer.graph(&MethodRef::new("L", "f")).unwrap();
        let next_edges = ag
            .nodes
            .iter()
            .filter(|n| n.via_field.as_deref() == Some("next"))
            .count();
        assert_eq!(next_edges, 1);
        assert!(ag.truncated);
    }

    #[test]
    fn augmentation_only_adds_over_method_graph() {
        for seed in 0..30 {
            let model = generate_model(&SynthConfig::general(seed));
            let gt = super::super::build_app_type_graph(&model);
            let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
            for mref in model.method_refs() {
                let intra = build_method_graph(&model, &mref, &gt).unwrap();
                let ag = analyzer.graph(&mref).unwrap();
                // node keys of the intra graph survive augmentation with
                // identical paths
                for n in &intra.nodes {
                    let found = ag.nodes.iter().find(|m| m.key == n.key);
                    let found =
                        found.unwrap_or_else(|| panic!("seed {seed} {mref}: node {} lost", n.key));
                    assert_eq!(ag.root_path(found.id), intra.root_path(n.id));
                }
                assert!(ag.edges.len() >= intra.edges.len());
            }
        }
    }

    #[test]
    fn built_graphs_are_schema_compatible() {
        for seed in 0..30 {
            let model = generate_model(&SynthConfig::general(seed));
            let gt = super::super::build_app_type_graph(&model);
            let mut analyzer = Analyzer::new(&model, InlineMode::KeepAll);
            for mref in model.method_refs() {
                let ag = analyzer.graph(&mref).unwrap();
                for (from, to) in &ag.edges {
                    let (src, dst) = (ag.node(*from), ag.node(*to));
                    let field = dst.via_field.as_ref().expect("child has a field");
                    let assoc = gt.lookup(&src.type_name, field).unwrap_or_else(|| {
                        panic!(
                            "seed {seed} {mref}: edge {}.{field} not in schema",
                            src.type_name
                        )
                    });
                    assert_eq!(assoc.0, dst.type_name);
                    assert_eq!(assoc.1, dst.cardinality);
                }
            }
        }
    }

    #[test]
    fn analysis_is_deterministic() {
        let model = generate_model(&SynthConfig::general(99));
        let a = crate::analysis::analyze(&model).unwrap();
        let b = crate::analysis::analyze(&model).unwrap();
        for (m, ga) in &a.graphs {
            let gb = &b.graphs[m];
            assert_eq!(ga.nodes, gb.nodes);
            assert_eq!(ga.edges, gb.edges);
        }
        assert_eq!(a.hints, b.hints);
    }

    #[test]
    fn each_method_graph_built_once() {
        for seed in [3u64, 17, 91] {
            let model = generate_model(&SynthConfig::general(seed));
            let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
            analyzer.analyze_all().unwrap();
            for (mref, count) in &analyzer.build_counts {
                assert_eq!(*count, 1, "seed {seed}: {mref} built {count} times");
            }
            assert_eq!(analyzer.build_counts.len(), model.method_refs().len());
        }
    }
}
