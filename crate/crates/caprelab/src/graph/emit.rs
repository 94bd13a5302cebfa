//! Deterministic DOT and JSON emitters for the type graphs.
//! Solid edges are single associations, dashed edges collections.

use serde_json::{json, Value};

use super::{AppTypeGraph, AugmentedTypeGraph};
use crate::model::Cardinality;

pub fn app_graph_to_dot(g: &AppTypeGraph) -> String {
    let mut out = String::from("digraph app_type_graph {\n  rankdir=LR;\n");
    for node in &g.nodes {
        out.push_str(&format!("  \"{node}\";\n"));
    }
    for ((src, field), (dst, card)) in &g.assoc {
        let style = match card {
            Cardinality::Single => "solid",
            Cardinality::Collection => "dashed",
        };
        out.push_str(&format!(
            "  \"{src}\" -> \"{dst}\" [label=\"{field}\", style={style}];\n"
        ));
    }
    out.push_str("}\n");
    out
}

pub fn app_graph_to_json(g: &AppTypeGraph) -> Value {
    json!({
        "nodes": g.nodes.iter().collect::<Vec<_>>(),
        "assoc": g.assoc.iter().map(|((s, f), (t, c))| json!({
            "source": s, "field": f, "target": t, "cardinality": c,
        })).collect::<Vec<_>>(),
    })
}

pub fn method_graph_to_dot(g: &AugmentedTypeGraph) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", g.method);
    for n in &g.nodes {
        let mut attrs = vec![format!("label=\"{}\\n{}\"", n.key, n.type_name)];
        if n.branch_dependent {
            attrs.push("color=orange".to_string());
        }
        if n.is_return_node {
            attrs.push("peripheries=2".to_string());
        }
        if n.id == g.root || n.param_index.is_some() {
            attrs.push("shape=box".to_string());
        }
        out.push_str(&format!("  n{} [{}];\n", n.id, attrs.join(", ")));
    }
    for (from, to) in &g.edges {
        let n = g.node(*to);
        let style = match n.cardinality {
            Cardinality::Single => "solid",
            Cardinality::Collection => "dashed",
        };
        let label = n.via_field.clone().unwrap_or_default();
        out.push_str(&format!(
            "  n{from} -> n{to} [label=\"{label}\", style={style}];\n"
        ));
    }
    out.push_str("}\n");
    out
}

pub fn method_graph_to_json(g: &AugmentedTypeGraph) -> Value {
    json!({
        "method": g.method.to_string(),
        "root": g.root,
        "truncated": g.truncated,
        "nodes": g.nodes.iter().map(|n| json!({
            "id": n.id,
            "key": n.key,
            "type": n.type_name,
            "via": n.via_field,
            "cardinality": n.cardinality,
            "branchDependent": n.branch_dependent,
            "calleeLocalBranch": n.callee_local_branch,
            "isReturnNode": n.is_return_node,
            "paramIndex": n.param_index,
            "parent": n.parent,
        })).collect::<Vec<_>>(),
        "edges": g.edges.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
    })
}
