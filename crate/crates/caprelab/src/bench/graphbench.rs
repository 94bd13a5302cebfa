//! Weighted-digraph benchmark. The depth-first trace visits each reachable
//! vertex once in a structured order; the shortest-path trace replays the
//! relaxation sequence of a label-correcting run, a data-dependent order
//! with heavy revisiting that gives prediction little to work with.

use std::collections::{BTreeMap, VecDeque};

use crate::error::SpecError;
use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::rng::{mix2, Srng};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

const GRAPH_OID: u64 = 1;

pub fn model() -> ApplicationModel {
    // Vertex.visitNeighbors: scan outgoing edges, touching each target
    let mut b = MethodBuilder::new();
    let edges = b.getfield("Vertex", "edges", "WeightedEdge", "v_self");
    b.open_loop("l0");
    let e = b.arrayload(&edges);
    let _w = b.getfield("WeightedEdge", "weight", "int", &e);
    let t = b.getfield("WeightedEdge", "target", "Vertex", &e);
    let _id = b.getfield("Vertex", "id", "int", &t);
    b.noop(); // relax / mark
    b.close();
    let visit = MethodDecl {
        name: "visitNeighbors".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    // Graph.scanAll: full sweep, used by examples and smoke runs
    let mut b = MethodBuilder::new();
    let vertices = b.getfield("Graph", "vertices", "Vertex", "v_self");
    b.open_loop("l0");
    let v = b.arrayload(&vertices);
    b.invoke_void("Vertex", "visitNeighbors", &v, &[]);
    b.close();
    let scan_all = MethodDecl {
        name: "scanAll".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    let single = |name: &str, target: &str| FieldDecl {
        name: name.into(),
        target_type: target.into(),
        cardinality: Cardinality::Single,
    };
    ApplicationModel {
        types: vec![
            TypeDecl {
                name: "Graph".into(),
                persistent: true,
                fields: vec![FieldDecl {
                    name: "vertices".into(),
                    target_type: "Vertex".into(),
                    cardinality: Cardinality::Collection,
                }],
                methods: vec![scan_all],
            },
            TypeDecl {
                name: "Vertex".into(),
                persistent: true,
                fields: vec![
                    FieldDecl {
                        name: "edges".into(),
                        target_type: "WeightedEdge".into(),
                        cardinality: Cardinality::Collection,
                    },
                    single("id", "int"),
                ],
                methods: vec![visit],
            },
            TypeDecl {
                name: "WeightedEdge".into(),
                persistent: true,
                fields: vec![single("target", "Vertex"), single("weight", "int")],
                methods: vec![],
            },
        ],
        entry_points: vec![
            MethodRef::new("Graph", "scanAll"),
            MethodRef::new("Vertex", "visitNeighbors"),
        ],
    }
}

pub fn generate(
    vertices: usize,
    edges: usize,
    seed: u64,
) -> Result<(ApplicationModel, Vec<ObjectRecord>, BTreeMap<String, u64>), SpecError> {
    if vertices == 0 || edges == 0 {
        return Err(SpecError("graph needs vertices >= 1 and edges >= 1".into()));
    }
    let mut rng = Srng::new(mix2(seed, 0x67_72_61_70_68));
    let first_vertex = GRAPH_OID + 1;
    let first_edge = first_vertex + vertices as u64;

    let mut graph = ObjectRecord::new(GRAPH_OID, "Graph");
    graph.collections.insert(
        "vertices".to_string(),
        (0..vertices as u64).map(|v| first_vertex + v).collect(),
    );
    let mut vertex_edges: Vec<Vec<u64>> = vec![Vec::new(); vertices];
    let mut edge_targets = Vec::with_capacity(edges);
    for e in 0..edges as u64 {
        let src = rng.range(0, vertices);
        let dst = rng.range(0, vertices);
        vertex_edges[src].push(first_edge + e);
        edge_targets.push(first_vertex + dst as u64);
    }

    let mut out = vec![graph];
    for v in 0..vertices {
        let mut rec = ObjectRecord::new(first_vertex + v as u64, "Vertex");
        rec.collections
            .insert("edges".to_string(), vertex_edges[v].clone());
        out.push(rec);
    }
    for e in 0..edges {
        let mut rec = ObjectRecord::new(first_edge + e as u64, "WeightedEdge");
        rec.singles
            .insert("target".to_string(), Some(edge_targets[e]));
        out.push(rec);
    }
    let stats = BTreeMap::from([
        ("objects".to_string(), out.len() as u64),
        ("vertices".to_string(), vertices as u64),
        ("edges".to_string(), edges as u64),
    ]);
    Ok((model(), out, stats))
}

/// Edge weights are not stored in records; they are a deterministic
/// function of the seed and edge oid, so trace construction can replay
/// them from the dataset alone.
fn edge_weight(seed: u64, edge_oid: u64) -> u64 {
    1 + mix2(seed, edge_oid) % 100
}

struct Topology {
    first_vertex: u64,
    /// Per vertex: (edge oid, target vertex index).
    adj: Vec<Vec<(u64, usize)>>,
}

fn topology(dataset: &[ObjectRecord]) -> Result<Topology, SpecError> {
    let mut vertex_oids: Vec<u64> = dataset
        .iter()
        .filter(|r| r.type_name == "Vertex")
        .map(|r| r.oid)
        .collect();
    vertex_oids.sort_unstable();
    let first_vertex = *vertex_oids
        .first()
        .ok_or_else(|| SpecError("graph dataset has no vertices".into()))?;
    let count = vertex_oids.len();
    // vertices are emitted contiguously; reject datasets that are not
    let index_of = move |oid: u64| -> Result<usize, SpecError> {
        oid.checked_sub(first_vertex)
            .map(|i| i as usize)
            .filter(|&i| i < count)
            .ok_or_else(|| SpecError(format!("vertex oid {oid} outside the contiguous range")))
    };
    let mut targets: BTreeMap<u64, u64> = BTreeMap::new();
    for r in dataset.iter().filter(|r| r.type_name == "WeightedEdge") {
        if let Some(Some(t)) = r.singles.get("target") {
            targets.insert(r.oid, *t);
        }
    }
    let mut adj = vec![Vec::new(); count];
    for r in dataset.iter().filter(|r| r.type_name == "Vertex") {
        if let Some(edges) = r.collections.get("edges") {
            for &e in edges {
                if let Some(&t) = targets.get(&e) {
                    adj[index_of(r.oid)?].push((e, index_of(t)?));
                }
            }
        }
    }
    Ok(Topology { first_vertex, adj })
}

pub fn trace_for(
    name: &str,
    dataset: &[ObjectRecord],
    seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    let visit = |v: u64| TraceStep {
        method: MethodRef::new("Vertex", "visitNeighbors"),
        root: v,
    };
    match name {
        // the structured traversal: one entry activation sweeps every
        // vertex and its adjacency in a predetermined order, so the whole
        // walk is statically predictable
        "dfs" => Ok(WorkloadTrace::new(
            vec![TraceStep {
                method: MethodRef::new("Graph", "scanAll"),
                root: GRAPH_OID,
            }],
            BranchPolicy::Fixed { value: true },
        )),
        "bellman-ford" => {
            // label-correcting relaxation: the pop order is data-dependent
            // and revisits vertices as shorter paths appear
            let topo = topology(dataset)?;
            let n = topo.adj.len();
            let mut dist = vec![u64::MAX; n];
            let mut queued = vec![false; n];
            let mut queue = VecDeque::new();
            dist[0] = 0;
            queue.push_back(0usize);
            queued[0] = true;
            let mut order = Vec::new();
            let cap = n.saturating_mul(10).max(64);
            while let Some(v) = queue.pop_front() {
                queued[v] = false;
                order.push(v);
                if order.len() >= cap {
                    break;
                }
                for &(edge_oid, t) in &topo.adj[v] {
                    let w = edge_weight(seed, edge_oid);
                    let cand = dist[v].saturating_add(w);
                    if cand < dist[t] {
                        dist[t] = cand;
                        if !queued[t] {
                            queue.push_back(t);
                            queued[t] = true;
                        }
                    }
                }
            }
            let steps = order
                .into_iter()
                .map(|v| visit(topo.first_vertex + v as u64))
                .collect();
            Ok(WorkloadTrace::new(
                steps,
                BranchPolicy::Fixed { value: true },
            ))
        }
        other => Err(SpecError(format!("graph has no traversal `{other}`"))),
    }
}

pub fn traversals() -> &'static [&'static str] {
    &["dfs", "bellman-ford"]
}
