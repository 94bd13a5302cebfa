//! Deterministic workload generators: the bank example plus four benchmark
//! families with the association structure of the usual store-benchmark
//! suites (recursive assembly hierarchy, text/chunk collections, flat
//! vector collections, weighted digraph).

pub mod bank;
mod builder;
pub mod graphbench;
pub mod kmeans;
pub mod oo7;
pub mod synth;
pub mod wordcount;

pub use builder::MethodBuilder;

use std::collections::BTreeMap;

use crate::error::SpecError;
use crate::model::ApplicationModel;
use crate::sim::{ObjectRecord, WorkloadTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Bank,
    Oo7,
    Wordcount,
    Kmeans,
    Graph,
}

impl Family {
    pub fn parse(s: &str) -> Result<Self, SpecError> {
        match s {
            "bank" => Ok(Family::Bank),
            "oo7" => Ok(Family::Oo7),
            "wordcount" => Ok(Family::Wordcount),
            "kmeans" => Ok(Family::Kmeans),
            "graph" => Ok(Family::Graph),
            other => Err(SpecError(format!("unknown benchmark family `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Bank => "bank",
            Family::Oo7 => "oo7",
            Family::Wordcount => "wordcount",
            Family::Kmeans => "kmeans",
            Family::Graph => "graph",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeParams {
    Bank {
        transactions: usize,
    },
    Oo7 {
        size: oo7::Oo7Size,
    },
    Wordcount {
        files: usize,
        words_total: u64,
        chunks_per_text: usize,
    },
    Kmeans {
        vectors: usize,
        clusters: usize,
        dims: usize,
    },
    Graph {
        vertices: usize,
        edges: usize,
    },
}

#[derive(Clone, Debug)]
pub struct BenchmarkSpec {
    pub family: Family,
    pub size: SizeParams,
    pub seed: u64,
}

/// A generated benchmark: model, dataset, standard traces, and accounting
/// figures (object counts, payload totals) for scaling checks.
pub struct Generated {
    pub model: ApplicationModel,
    pub dataset: Vec<ObjectRecord>,
    pub traces: BTreeMap<String, WorkloadTrace>,
    pub stats: BTreeMap<String, u64>,
}

pub fn generate(spec: &BenchmarkSpec) -> Result<Generated, SpecError> {
    let (model, dataset, stats) = match (&spec.family, &spec.size) {
        (Family::Bank, SizeParams::Bank { transactions }) => {
            if *transactions == 0 {
                return Err(SpecError("bank needs at least one transaction".into()));
            }
            let dataset = bank::dataset(*transactions, spec.seed);
            let stats = BTreeMap::from([
                ("objects".to_string(), dataset.len() as u64),
                ("transactions".to_string(), *transactions as u64),
            ]);
            (bank::model(), dataset, stats)
        }
        (Family::Oo7, SizeParams::Oo7 { size }) => oo7::generate(*size, spec.seed)?,
        (
            Family::Wordcount,
            SizeParams::Wordcount {
                files,
                words_total,
                chunks_per_text,
            },
        ) => wordcount::generate(*files, *words_total, *chunks_per_text, spec.seed)?,
        (
            Family::Kmeans,
            SizeParams::Kmeans {
                vectors,
                clusters,
                dims,
            },
        ) => kmeans::generate(*vectors, *clusters, *dims, spec.seed)?,
        (Family::Graph, SizeParams::Graph { vertices, edges }) => {
            graphbench::generate(*vertices, *edges, spec.seed)?
        }
        (family, size) => {
            return Err(SpecError(format!(
                "size params {size:?} do not fit family {}",
                family.name()
            )))
        }
    };
    let mut traces = BTreeMap::new();
    for name in traversals(spec.family) {
        traces.insert(
            name.to_string(),
            trace_for(spec.family, name, &dataset, spec.seed)?,
        );
    }
    Ok(Generated {
        model,
        dataset,
        traces,
        stats,
    })
}

pub fn traversals(family: Family) -> &'static [&'static str] {
    match family {
        Family::Bank => bank::traversals(),
        Family::Oo7 => oo7::traversals(),
        Family::Wordcount => wordcount::traversals(),
        Family::Kmeans => kmeans::traversals(),
        Family::Graph => graphbench::traversals(),
    }
}

pub fn trace_for(
    family: Family,
    name: &str,
    dataset: &[ObjectRecord],
    seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    match family {
        Family::Bank => bank::trace_for(name, dataset, seed),
        Family::Oo7 => oo7::trace_for(name, dataset, seed),
        Family::Wordcount => wordcount::trace_for(name, dataset, seed),
        Family::Kmeans => kmeans::trace_for(name, dataset, seed),
        Family::Graph => graphbench::trace_for(name, dataset, seed),
    }
}
