//! Text-counting benchmark: collections of texts split into chunks. The
//! counting pass touches only collections, so the schema-based baseline
//! has almost nothing prefetchable (the metadata chain it does prefetch is
//! never read).

use std::collections::BTreeMap;

use crate::error::SpecError;
use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

const COLLECTIONS: usize = 4;

pub fn model() -> ApplicationModel {
    let mut b = MethodBuilder::new();
    let texts = b.getfield("TextCollection", "texts", "Text", "v_self");
    b.open_loop("l0");
    let t = b.arrayload(&texts);
    b.invoke_void("Text", "countText", &t, &[]);
    b.close();
    let count_words = MethodDecl {
        name: "countWords".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    let mut b = MethodBuilder::new();
    let chunks = b.getfield("Text", "chunks", "Chunk", "v_self");
    b.open_loop("l0");
    let ch = b.arrayload(&chunks);
    let _w = b.getfield("Chunk", "words", "long", &ch);
    b.noop(); // accumulate
    b.close();
    let count_text = MethodDecl {
        name: "countText".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    let single = |name: &str, target: &str| FieldDecl {
        name: name.into(),
        target_type: target.into(),
        cardinality: Cardinality::Single,
    };
    let collection = |name: &str, target: &str| FieldDecl {
        name: name.into(),
        target_type: target.into(),
        cardinality: Cardinality::Collection,
    };
    ApplicationModel {
        types: vec![
            TypeDecl {
                name: "TextCollection".into(),
                persistent: true,
                fields: vec![collection("texts", "Text")],
                methods: vec![count_words],
            },
            TypeDecl {
                name: "Text".into(),
                persistent: true,
                fields: vec![collection("chunks", "Chunk"), single("meta", "TextMeta")],
                methods: vec![count_text],
            },
            TypeDecl {
                name: "TextMeta".into(),
                persistent: true,
                fields: vec![single("origin", "Source")],
                methods: vec![],
            },
            TypeDecl {
                name: "Source".into(),
                persistent: true,
                fields: vec![single("name", "string")],
                methods: vec![],
            },
            TypeDecl {
                name: "Chunk".into(),
                persistent: true,
                fields: vec![single("words", "long")],
                methods: vec![],
            },
        ],
        entry_points: vec![MethodRef::new("TextCollection", "countWords")],
    }
}

/// Dataset: `files` texts over four collections; each text split into
/// `chunks_per_text` chunks carrying `words_total` words in aggregate.
/// Total payload is invariant in the chunk count.
pub fn generate(
    files: usize,
    words_total: u64,
    chunks_per_text: usize,
    _seed: u64,
) -> Result<(ApplicationModel, Vec<ObjectRecord>, BTreeMap<String, u64>), SpecError> {
    if files == 0 || chunks_per_text == 0 {
        return Err(SpecError(
            "wordcount needs files >= 1 and chunks >= 1".into(),
        ));
    }
    let total_chunks = (files * chunks_per_text) as u64;
    let mut out = Vec::new();
    let first_tc = 1u64;
    let first_text = first_tc + COLLECTIONS as u64;
    let first_meta = first_text + files as u64;
    let first_source = first_meta + files as u64;
    let n_sources = 2u64;
    let first_chunk = first_source + n_sources;

    for c in 0..COLLECTIONS as u64 {
        let mut rec = ObjectRecord::new(first_tc + c, "TextCollection");
        let texts: Vec<u64> = (0..files as u64)
            .filter(|t| t % COLLECTIONS as u64 == c)
            .map(|t| first_text + t)
            .collect();
        rec.collections.insert("texts".to_string(), texts);
        out.push(rec);
    }
    for t in 0..files as u64 {
        let mut rec = ObjectRecord::new(first_text + t, "Text");
        let chunks: Vec<u64> = (0..chunks_per_text as u64)
            .map(|k| first_chunk + t * chunks_per_text as u64 + k)
            .collect();
        rec.collections.insert("chunks".to_string(), chunks);
        rec.singles.insert("meta".to_string(), Some(first_meta + t));
        out.push(rec);
    }
    for t in 0..files as u64 {
        let mut rec = ObjectRecord::new(first_meta + t, "TextMeta");
        rec.singles
            .insert("origin".to_string(), Some(first_source + t % n_sources));
        out.push(rec);
    }
    for s in 0..n_sources {
        out.push(ObjectRecord::new(first_source + s, "Source"));
    }
    // chunks contiguous: they dominate the dataset and spread across nodes
    let mut words_assigned = 0u64;
    for k in 0..total_chunks {
        out.push(ObjectRecord::new(first_chunk + k, "Chunk"));
        // deterministic split of the word payload, remainder to the front
        words_assigned += words_total / total_chunks + u64::from(k < words_total % total_chunks);
    }
    debug_assert_eq!(words_assigned, words_total);

    let stats = BTreeMap::from([
        ("objects".to_string(), out.len() as u64),
        ("texts".to_string(), files as u64),
        ("chunks".to_string(), total_chunks),
        ("words_total".to_string(), words_assigned),
    ]);
    Ok((model(), out, stats))
}

pub fn trace_for(
    name: &str,
    dataset: &[ObjectRecord],
    _seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    match name {
        "count" => {
            let steps = dataset
                .iter()
                .filter(|r| r.type_name == "TextCollection")
                .map(|r| TraceStep {
                    method: MethodRef::new("TextCollection", "countWords"),
                    root: r.oid,
                })
                .collect();
            Ok(WorkloadTrace::new(
                steps,
                BranchPolicy::Fixed { value: true },
            ))
        }
        other => Err(SpecError(format!("wordcount has no traversal `{other}`"))),
    }
}

pub fn traversals() -> &'static [&'static str] {
    &["count"]
}
