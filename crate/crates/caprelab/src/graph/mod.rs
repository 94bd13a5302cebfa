//! Type graphs.
//!
//! `AppTypeGraph` captures the schema: one association per persistent-typed
//! field, labeled single or collection. Per method, the builder derives a
//! navigation graph: which associations the method's instructions traverse,
//! starting from the receiver. Inter-procedural augmentation inlines invoked
//! methods' graphs at the call-site receiver, binds parameter nodes to the
//! caller's argument nodes, and lets chained calls extend from the callee's
//! return node.

mod build;
mod emit;

pub use build::{build_method_graph, infer_return_type, Analyzer, InlineMode, StaticType};
pub use emit::{app_graph_to_dot, app_graph_to_json, method_graph_to_dot, method_graph_to_json};

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ApplicationModel, Cardinality, MethodRef};

/// Schema-level type graph: nodes are declared types, associations are the
/// persistent-typed fields. Primitive-typed fields do not appear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppTypeGraph {
    pub nodes: BTreeSet<String>,
    pub assoc: BTreeMap<(String, String), (String, Cardinality)>,
}

impl AppTypeGraph {
    pub fn lookup(&self, source: &str, field: &str) -> Option<&(String, Cardinality)> {
        self.assoc.get(&(source.to_string(), field.to_string()))
    }

    /// Outgoing associations of one type, sorted by field name.
    pub fn out_edges<'a>(
        &'a self,
        source: &str,
    ) -> impl Iterator<Item = (&'a str, &'a str, Cardinality)> {
        let source = source.to_string();
        self.assoc
            .range((source.clone(), String::new())..)
            .take_while(move |((s, _), _)| *s == source)
            .map(|((_, f), (t, c))| (f.as_str(), t.as_str(), *c))
    }
}

/// One association per persistent-typed field, deterministic order.
pub fn build_app_type_graph(model: &ApplicationModel) -> AppTypeGraph {
    let mut nodes = BTreeSet::new();
    let mut assoc = BTreeMap::new();
    for t in &model.types {
        nodes.insert(t.name.clone());
        for f in &t.fields {
            let target_persistent = model
                .type_decl(&f.target_type)
                .map(|d| d.persistent)
                .unwrap_or(false);
            if target_persistent {
                assoc.insert(
                    (t.name.clone(), f.name.clone()),
                    (f.target_type.clone(), f.cardinality),
                );
            }
        }
    }
    AppTypeGraph { nodes, assoc }
}

pub type NodeId = usize;

/// A navigation node: one object position reached by the method, carrying
/// the association that materialized it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NavNode {
    pub id: NodeId,
    /// Stable key for dumps: def var for own nodes, `i<ii>.<key>` for
    /// inlined copies, `root` / `p<i>` for roots.
    pub key: String,
    pub var_id: Option<String>,
    pub via_field: Option<String>,
    pub type_name: String,
    pub cardinality: Cardinality,
    pub branch_dependent: bool,
    /// The branch-dependence originates inside an inlined callee rather
    /// than in this method or at the call site. Hint paths do not extend
    /// through such nodes; the callee's own hints cover them.
    pub callee_local_branch: bool,
    pub is_return_node: bool,
    pub param_index: Option<usize>,
    pub parent: Option<NodeId>,
}

/// Call-site record kept for hint dedup and oracle checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallSite {
    pub ii: usize,
    pub callee: MethodRef,
    pub receiver: Option<NodeId>,
    pub inlined: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentedTypeGraph {
    pub method: MethodRef,
    pub root: NodeId,
    pub nodes: Vec<NavNode>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
    /// Parameter roots: `(param index, node)` for persistent-typed params.
    pub param_roots: Vec<(usize, NodeId)>,
    pub return_node: Option<NodeId>,
    /// True when a call-graph cycle forced the builder to skip an inlining.
    pub truncated: bool,
    pub call_sites: Vec<CallSite>,
}

impl AugmentedTypeGraph {
    pub fn node(&self, id: NodeId) -> &NavNode {
        &self.nodes[id]
    }

    /// Children of `id`, ordered by (field, id) for determinism.
    pub fn children(&self, id: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.parent == Some(id))
            .map(|n| n.id)
            .collect();
        out.sort_by(|a, b| {
            let (na, nb) = (&self.nodes[*a], &self.nodes[*b]);
            na.via_field.cmp(&nb.via_field).then(a.cmp(b))
        });
        out
    }

    /// Navigation nodes: everything except the receiver root and parameter
    /// roots.
    pub fn nav_node_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.id != self.root && n.param_index.is_none())
            .count()
    }

    /// Path of `(field, cardinality)` steps from the receiver root to `id`.
    /// `None` when the node hangs off a parameter root instead.
    pub fn root_path(&self, id: NodeId) -> Option<Vec<(String, Cardinality)>> {
        let mut steps = Vec::new();
        let mut cur = id;
        loop {
            if cur == self.root {
                steps.reverse();
                return Some(steps);
            }
            let n = &self.nodes[cur];
            n.via_field.as_ref()?;
            steps.push((n.via_field.clone().unwrap(), n.cardinality));
            cur = n.parent?;
        }
    }

    pub fn has_branch_dependent_node(&self) -> bool {
        self.nodes.iter().any(|n| n.branch_dependent)
    }
}
