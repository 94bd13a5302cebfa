//! Clustering benchmark: flat collections of vectors, no single
//! associations at all. The schema-based baseline has nothing to prefetch
//! here; collection prefetching is the only available win.

use std::collections::BTreeMap;

use crate::error::SpecError;
use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

const COLLECTIONS: usize = 4;
const ITERATIONS: usize = 2;

pub fn model() -> ApplicationModel {
    let mut b = MethodBuilder::new();
    let vectors = b.getfield("VectorCollection", "vectors", "Vector", "v_self");
    b.open_loop("l0");
    let v = b.arrayload(&vectors);
    let _coords = b.getfield("Vector", "coords", "string", &v);
    b.noop(); // distance + assignment
    b.close();
    let assign_all = MethodDecl {
        name: "assignAll".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    ApplicationModel {
        types: vec![
            TypeDecl {
                name: "VectorCollection".into(),
                persistent: true,
                fields: vec![FieldDecl {
                    name: "vectors".into(),
                    target_type: "Vector".into(),
                    cardinality: Cardinality::Collection,
                }],
                methods: vec![assign_all],
            },
            TypeDecl {
                name: "Vector".into(),
                persistent: true,
                fields: vec![FieldDecl {
                    name: "coords".into(),
                    target_type: "string".into(),
                    cardinality: Cardinality::Single,
                }],
                methods: vec![],
            },
        ],
        entry_points: vec![MethodRef::new("VectorCollection", "assignAll")],
    }
}

pub fn generate(
    vectors: usize,
    clusters: usize,
    dims: usize,
    _seed: u64,
) -> Result<(ApplicationModel, Vec<ObjectRecord>, BTreeMap<String, u64>), SpecError> {
    if vectors == 0 || clusters == 0 || dims == 0 {
        return Err(SpecError(
            "kmeans needs vectors, clusters, and dims >= 1".into(),
        ));
    }
    let mut out = Vec::new();
    let first_vc = 1u64;
    let first_vec = first_vc + COLLECTIONS as u64;
    for c in 0..COLLECTIONS as u64 {
        let mut rec = ObjectRecord::new(first_vc + c, "VectorCollection");
        let members: Vec<u64> = (0..vectors as u64)
            .filter(|v| v % COLLECTIONS as u64 == c)
            .map(|v| first_vec + v)
            .collect();
        rec.collections.insert("vectors".to_string(), members);
        out.push(rec);
    }
    for v in 0..vectors as u64 {
        out.push(ObjectRecord::new(first_vec + v, "Vector"));
    }
    let stats = BTreeMap::from([
        ("objects".to_string(), out.len() as u64),
        ("vectors".to_string(), vectors as u64),
        ("clusters".to_string(), clusters as u64),
        ("dims".to_string(), dims as u64),
    ]);
    Ok((model(), out, stats))
}

/// One assignment pass per collection per iteration: the first iteration
/// is cold, later ones run over a warm cache, as the real algorithm does.
pub fn trace_for(
    name: &str,
    dataset: &[ObjectRecord],
    _seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    match name {
        "cluster" => {
            let collections: Vec<u64> = dataset
                .iter()
                .filter(|r| r.type_name == "VectorCollection")
                .map(|r| r.oid)
                .collect();
            let steps = (0..ITERATIONS)
                .flat_map(|_| collections.iter().copied())
                .map(|oid| TraceStep {
                    method: MethodRef::new("VectorCollection", "assignAll"),
                    root: oid,
                })
                .collect();
            Ok(WorkloadTrace::new(
                steps,
                BranchPolicy::Fixed { value: true },
            ))
        }
        other => Err(SpecError(format!("kmeans has no traversal `{other}`"))),
    }
}

pub fn traversals() -> &'static [&'static str] {
    &["cluster"]
}
