//! Deterministic virtual-time simulator of a distributed persistent object
//! store.
//!
//! Objects live on data nodes; a client-side cache fronts them. Every
//! demand access to a non-cached object costs the remote fetch latency; a
//! background scheduler resolves prefetch hints over per-node fetch
//! channels so collection elements load in parallel while single chains
//! stay sequential. All time is virtual: identical inputs and seed give
//! bit-identical results.

mod compare;
mod exec;
mod oracle;
mod prefetch;
mod trace;

pub use compare::{compare_policies, ComparisonReport, PolicyRun, COMPARED_POLICIES};
pub use exec::{run_workload, run_workload_logged, DemandEvent, RunOutput};
pub use oracle::{check_predictions, oracle_accessed_paths, MethodVerdict, OraclePaths, Verdict};
pub use prefetch::FetchEvent;
pub use trace::{load_trace, save_trace, BranchOracle, BranchPolicy, TraceStep, WorkloadTrace};

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::{ApplicationModel, Cardinality};

/// One stored object: typed field maps over object ids plus its placement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub oid: u64,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(default)]
    pub singles: BTreeMap<String, Option<u64>>,
    #[serde(default)]
    pub collections: BTreeMap<String, Vec<u64>>,
    #[serde(rename = "nodeId", default, skip_serializing_if = "Option::is_none")]
    pub node_id: Option<u32>,
}

impl ObjectRecord {
    pub fn new(oid: u64, type_name: impl Into<String>) -> Self {
        Self {
            oid,
            type_name: type_name.into(),
            singles: BTreeMap::new(),
            collections: BTreeMap::new(),
            node_id: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Policy {
    None,
    Rop(u32),
    Capre,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::None => write!(f, "none"),
            Policy::Rop(d) => write!(f, "rop:{d}"),
            Policy::Capre => write!(f, "capre"),
        }
    }
}

impl Policy {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Policy::None),
            "capre" => Ok(Policy::Capre),
            other => match other.strip_prefix("rop:") {
                Some(d) => d
                    .parse::<u32>()
                    .ok()
                    .filter(|d| *d >= 1)
                    .map(Policy::Rop)
                    .ok_or_else(|| format!("bad rop depth in `{other}`")),
                None => Err(format!("unknown policy `{other}` (none | rop:<d> | capre)")),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct StoreConfig {
    pub num_nodes: u32,
    pub remote_fetch_latency: u64,
    pub local_hit_latency: u64,
    pub channels_per_node: u32,
    pub policy: Policy,
    pub rng_seed: u64,
    /// Client cache capacity in objects; unbounded when `None`.
    pub cache_capacity: Option<usize>,
    /// Virtual cost of dispatching one prefetch task; 0 in the base model.
    pub scheduler_overhead: u64,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            num_nodes: 4,
            remote_fetch_latency: 100,
            local_hit_latency: 0,
            channels_per_node: 4,
            policy: Policy::None,
            rng_seed: 1,
            cache_capacity: None,
            scheduler_overhead: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodStats {
    pub activations: u64,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub policy: String,
    pub hits: u64,
    pub misses: u64,
    #[serde(rename = "prefetchedTotal")]
    pub prefetched_total: u64,
    #[serde(rename = "prefetchedUsed")]
    pub prefetched_used: u64,
    #[serde(rename = "prefetchedUnused")]
    pub prefetched_unused: u64,
    #[serde(rename = "completionTime")]
    pub completion_time: u64,
    #[serde(rename = "perMethodBreakdown")]
    pub per_method: BTreeMap<String, MethodStats>,
}

impl RunMetrics {
    pub fn demand_accesses(&self) -> u64 {
        self.hits + self.misses
    }

    pub fn hit_rate(&self) -> f64 {
        if self.demand_accesses() == 0 {
            0.0
        } else {
            self.hits as f64 / self.demand_accesses() as f64
        }
    }

    pub const CSV_HEADER: &'static str =
        "policy,hits,misses,prefetched_total,used,unused,completion_time";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.policy,
            self.hits,
            self.misses,
            self.prefetched_total,
            self.prefetched_used,
            self.prefetched_unused,
            self.completion_time
        )
    }
}

/// The built store: records with placements, ready to run workloads.
#[derive(Clone, Debug)]
pub struct StoreState {
    records: BTreeMap<u64, ObjectRecord>,
    pub num_nodes: u32,
}

impl StoreState {
    pub fn record(&self, oid: u64) -> Option<&ObjectRecord> {
        self.records.get(&oid)
    }

    pub fn node_of(&self, oid: u64) -> u32 {
        self.records.get(&oid).and_then(|r| r.node_id).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &ObjectRecord> {
        self.records.values()
    }

    pub fn objects_on_node(&self, node: u32) -> usize {
        self.records
            .values()
            .filter(|r| r.node_id == Some(node))
            .count()
    }
}

/// Place a dataset on the store's nodes. Default placement is round-robin
/// in dataset order, so contiguously emitted collection elements span all
/// nodes and can be fetched in parallel. Deterministic for a given seed.
pub fn build_store(
    dataset: &[ObjectRecord],
    model: &ApplicationModel,
    cfg: &StoreConfig,
) -> Result<StoreState, SimError> {
    if cfg.num_nodes < 1 {
        return Err(SimError::Placement(
            "store needs at least one node".to_string(),
        ));
    }
    let mut records = BTreeMap::new();
    for (pos, rec) in dataset.iter().enumerate() {
        let decl = model.type_decl(&rec.type_name).ok_or_else(|| {
            SimError::Dataset(format!(
                "object {} has undeclared type `{}`",
                rec.oid, rec.type_name
            ))
        })?;
        for field in rec.singles.keys() {
            match decl.field(field) {
                Some(f) if f.cardinality == Cardinality::Single => {}
                _ => {
                    return Err(SimError::Dataset(format!(
                        "object {} sets unknown single field `{}.{}`",
                        rec.oid, rec.type_name, field
                    )))
                }
            }
        }
        for field in rec.collections.keys() {
            match decl.field(field) {
                Some(f) if f.cardinality == Cardinality::Collection => {}
                _ => {
                    return Err(SimError::Dataset(format!(
                        "object {} sets unknown collection field `{}.{}`",
                        rec.oid, rec.type_name, field
                    )))
                }
            }
        }
        let mut rec = rec.clone();
        rec.node_id = Some((pos % cfg.num_nodes as usize) as u32);
        if records.insert(rec.oid, rec).is_some() {
            return Err(SimError::Dataset(format!(
                "duplicate oid {} in dataset",
                dataset[pos].oid
            )));
        }
    }
    let store = StoreState {
        records,
        num_nodes: cfg.num_nodes,
    };
    // referenced oids must exist
    for rec in store.records.values() {
        let refs = rec
            .singles
            .values()
            .filter_map(|v| *v)
            .chain(rec.collections.values().flatten().copied());
        for oid in refs {
            if !store.records.contains_key(&oid) {
                return Err(SimError::Dataset(format!(
                    "object {} references missing oid {oid}",
                    rec.oid
                )));
            }
        }
    }
    Ok(store)
}

pub fn load_dataset(path: &Path) -> Result<Vec<ObjectRecord>, SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Dataset(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| SimError::Dataset(e.to_string()))
}

pub fn save_dataset(dataset: &[ObjectRecord], path: &Path) -> Result<(), SimError> {
    let text = serde_json::to_string(dataset).expect("dataset serializes");
    std::fs::write(path, text).map_err(|e| SimError::Dataset(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::bench::bank;
    use crate::hints::HintMap;
    use crate::model::MethodRef;

    fn cfg(policy: Policy) -> StoreConfig {
        StoreConfig {
            policy,
            ..Default::default()
        }
    }

    fn bank_setup(
        transactions: usize,
    ) -> (
        crate::model::ApplicationModel,
        Vec<ObjectRecord>,
        WorkloadTrace,
        HintMap,
    ) {
        let model = bank::model();
        let dataset = bank::dataset(transactions, 0);
        let trace = bank::trace_for("setAllTransCustomers", &dataset, 0).unwrap();
        let hints = analyze(&model).unwrap().hints;
        (model, dataset, trace, hints)
    }

    #[test]
    fn round_robin_placement_spreads_objects() {
        let model = bank::model();
        // 8 standalone objects over 4 nodes: 2 each
        let eight: Vec<ObjectRecord> = (1..=8)
            .map(|oid| ObjectRecord::new(oid, "Company"))
            .collect();
        let store = build_store(&eight, &model, &cfg(Policy::None)).unwrap();
        for node in 0..4 {
            assert_eq!(store.objects_on_node(node), 2);
        }
        // single node: everything co-located
        let dataset = bank::dataset(100, 0);
        let one = StoreConfig {
            num_nodes: 1,
            ..cfg(Policy::None)
        };
        let store = build_store(&dataset, &model, &one).unwrap();
        assert_eq!(store.objects_on_node(0), dataset.len());
    }

    #[test]
    fn transactions_spread_evenly_across_nodes() {
        let model = bank::model();
        let dataset = bank::dataset(100, 0);
        let store = build_store(&dataset, &model, &cfg(Policy::None)).unwrap();
        for node in 0..4 {
            let count = store
                .records()
                .filter(|r| r.type_name == "Transaction" && r.node_id == Some(node))
                .count();
            assert_eq!(count, 25);
        }
    }

    #[test]
    fn zero_nodes_is_a_placement_error() {
        let model = bank::model();
        let dataset = bank::dataset(1, 0);
        let bad = StoreConfig {
            num_nodes: 0,
            ..cfg(Policy::None)
        };
        assert!(matches!(
            build_store(&dataset, &model, &bad),
            Err(SimError::Placement(_))
        ));
    }

    #[test]
    fn no_prefetch_run_costs_latency_per_miss() {
        let (model, dataset, trace, _) = bank_setup(10);
        let c = cfg(Policy::None);
        let store = build_store(&dataset, &model, &c).unwrap();
        let m = run_workload(&model, None, &store, &trace, &c).unwrap();
        assert_eq!(m.prefetched_total, 0);
        assert_eq!(m.completion_time, m.misses * c.remote_fetch_latency);
        assert_eq!(m.hits + m.misses, m.demand_accesses());
    }

    #[test]
    fn identical_inputs_give_bit_identical_metrics() {
        let (model, dataset, trace, hints) = bank_setup(20);
        for policy in [Policy::None, Policy::Rop(2), Policy::Capre] {
            let c = StoreConfig {
                rng_seed: 7,
                ..cfg(policy)
            };
            let store = build_store(&dataset, &model, &c).unwrap();
            let a = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
            let b = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
        }
    }

    #[test]
    fn metrics_accounting_identity() {
        for seed in 0..10 {
            let model = crate::bench::synth::generate_model(
                &crate::bench::synth::SynthConfig::general(seed),
            );
            let (dataset, roots) = crate::bench::synth::generate_dataset(
                &model,
                &crate::bench::synth::SynthConfig::general(seed),
            );
            let trace = crate::bench::synth::trace_entry_points(&model, &roots);
            let hints = analyze(&model).unwrap().hints;
            for policy in [Policy::None, Policy::Rop(2), Policy::Capre] {
                let c = StoreConfig {
                    rng_seed: seed,
                    ..cfg(policy)
                };
                let store = build_store(&dataset, &model, &c).unwrap();
                let m = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
                assert_eq!(m.prefetched_used + m.prefetched_unused, m.prefetched_total);
                assert_eq!(m.hits + m.misses, m.demand_accesses());
            }
        }
    }

    #[test]
    fn demand_reads_and_branches_identical_across_policies() {
        let (model, dataset, trace, hints) = bank_setup(12);
        let mut logs = Vec::new();
        for policy in [Policy::None, Policy::Rop(1), Policy::Rop(5), Policy::Capre] {
            let c = StoreConfig {
                rng_seed: 33,
                ..cfg(policy)
            };
            let store = build_store(&dataset, &model, &c).unwrap();
            let out = run_workload_logged(&model, Some(&hints), &store, &trace, &c).unwrap();
            logs.push(out.demand_log);
        }
        for other in &logs[1..] {
            assert_eq!(&logs[0], other);
        }
    }

    #[test]
    fn capre_never_slower_than_none() {
        for transactions in [5usize, 37, 100] {
            let (model, dataset, trace, hints) = bank_setup(transactions);
            let base = cfg(Policy::None);
            let store = build_store(&dataset, &model, &base).unwrap();
            let none = run_workload(&model, None, &store, &trace, &base).unwrap();
            let c = cfg(Policy::Capre);
            let capre = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
            assert!(
                capre.completion_time <= none.completion_time,
                "{transactions} transactions: capre {} > none {}",
                capre.completion_time,
                none.completion_time
            );
            assert!(capre.misses <= none.misses);
        }
    }

    #[test]
    fn single_chains_sequential_collections_overlap() {
        let (model, dataset, trace, hints) = bank_setup(8);
        let c = cfg(Policy::Capre);
        let store = build_store(&dataset, &model, &c).unwrap();
        let out = run_workload_logged(&model, Some(&hints), &store, &trace, &c).unwrap();
        let ev = &out.fetch_events;
        let find = |oid: u64, event: &str| {
            ev.iter()
                .find(|e| e.oid == oid && e.event == event && e.origin == "prefetch")
                .map(|e| e.t)
        };
        // manager.company: company fetch starts only after manager completes
        let manager = 2u64;
        let company = 3u64;
        if let (Some(m_done), Some(c_start)) = (
            find(manager, "fetch_complete"),
            find(company, "fetch_start"),
        ) {
            assert!(
                c_start >= m_done,
                "chain successor started at {c_start} before predecessor done {m_done}"
            );
        } else {
            panic!("expected prefetches of the manager chain");
        }
        // transaction elements on different nodes overlap
        let trans_starts: Vec<(u64, u32)> = ev
            .iter()
            .filter(|e| e.event == "fetch_start" && e.origin == "prefetch")
            .filter(|e| {
                store
                    .record(e.oid)
                    .map(|r| r.type_name == "Transaction")
                    .unwrap_or(false)
            })
            .map(|e| (e.t, e.node))
            .collect();
        assert!(trans_starts.len() >= 8);
        let first_t = trans_starts.iter().map(|(t, _)| *t).min().unwrap();
        let parallel_at_start = trans_starts.iter().filter(|(t, _)| *t == first_t).count();
        assert!(
            parallel_at_start >= 4,
            "expected parallel element fetches, got {parallel_at_start}"
        );
    }

    #[test]
    fn demand_joins_started_prefetch() {
        // with spread-out elements the first transaction's prefetch has
        // started by the time it is demanded: the demand joins it instead
        // of issuing a second fetch
        let (model, dataset, trace, hints) = bank_setup(4);
        let c = cfg(Policy::Capre);
        let store = build_store(&dataset, &model, &c).unwrap();
        let out = run_workload_logged(&model, Some(&hints), &store, &trace, &c).unwrap();
        let first_trans = 6u64;
        let fetches: Vec<_> = out
            .fetch_events
            .iter()
            .filter(|e| e.oid == first_trans && e.event == "fetch_start")
            .collect();
        assert_eq!(fetches.len(), 1, "exactly one fetch for a joined object");
        assert_eq!(fetches[0].origin, "prefetch");
        assert!(out.metrics.prefetched_used > 0);
    }

    #[test]
    fn demand_overtakes_queued_prefetch() {
        // one node, one channel: element prefetches queue behind the
        // manager chain, so the demand path fetches for itself rather than
        // waiting longer than a plain miss
        let (model, dataset, trace, hints) = bank_setup(4);
        let c = StoreConfig {
            num_nodes: 1,
            channels_per_node: 1,
            ..cfg(Policy::Capre)
        };
        let store = build_store(&dataset, &model, &c).unwrap();
        let capre = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
        let base = StoreConfig {
            policy: Policy::None,
            ..c.clone()
        };
        let none = run_workload(&model, None, &store, &trace, &base).unwrap();
        assert!(capre.completion_time <= none.completion_time);
    }

    #[test]
    fn one_channel_prefetch_degenerates_to_sequential() {
        // a single node with a single channel leaves no parallelism:
        // prefetch fetch intervals never overlap
        let (model, dataset, trace, hints) = bank_setup(6);
        let c = StoreConfig {
            num_nodes: 1,
            channels_per_node: 1,
            ..cfg(Policy::Capre)
        };
        let store = build_store(&dataset, &model, &c).unwrap();
        let out = run_workload_logged(&model, Some(&hints), &store, &trace, &c).unwrap();
        let mut intervals: Vec<(u64, u64)> = Vec::new();
        let mut starts = std::collections::BTreeMap::new();
        for e in &out.fetch_events {
            if e.origin != "prefetch" {
                continue;
            }
            match e.event {
                "fetch_start" => {
                    starts.insert(e.oid, e.t);
                }
                _ => {
                    intervals.push((starts[&e.oid], e.t));
                }
            }
        }
        intervals.sort_unstable();
        assert!(intervals.len() > 2);
        for w in intervals.windows(2) {
            assert!(
                w[1].0 >= w[0].1,
                "prefetch fetches overlap on one channel: {w:?}"
            );
        }
    }

    #[test]
    fn lru_capacity_evicts_and_still_accounts() {
        let (model, dataset, trace, hints) = bank_setup(30);
        let c = StoreConfig {
            cache_capacity: Some(8),
            ..cfg(Policy::Capre)
        };
        let store = build_store(&dataset, &model, &c).unwrap();
        let m = run_workload(&model, Some(&hints), &store, &trace, &c).unwrap();
        assert_eq!(m.prefetched_used + m.prefetched_unused, m.prefetched_total);
        // with a tiny cache most prefetches are wasted but the run completes
        assert!(m.demand_accesses() > 0);
    }

    #[test]
    fn trace_and_hint_errors() {
        let (model, dataset, mut trace, hints) = bank_setup(2);
        let c = cfg(Policy::Capre);
        let store = build_store(&dataset, &model, &c).unwrap();
        trace.steps[0].root = 999_999;
        assert!(matches!(
            run_workload(&model, Some(&hints), &store, &trace, &c),
            Err(SimError::Trace(_))
        ));
        let good_trace = bank::trace_for("setAllTransCustomers", &dataset, 0).unwrap();
        assert!(matches!(
            run_workload(&model, None, &store, &good_trace, &c),
            Err(SimError::Hint(_))
        ));
        let bad_hints =
            crate::hints::hints_from_json(r#"{"Transaction.getAccount": ["account.ledger"]}"#)
                .unwrap();
        assert!(matches!(
            run_workload(&model, Some(&bad_hints), &store, &good_trace, &c),
            Err(SimError::Hint(_))
        ));
    }

    #[test]
    fn per_method_breakdown_counts_activations() {
        let (model, dataset, trace, _) = bank_setup(5);
        let c = cfg(Policy::None);
        let store = build_store(&dataset, &model, &c).unwrap();
        let m = run_workload(&model, None, &store, &trace, &c).unwrap();
        assert_eq!(
            m.per_method["BankManagement.setAllTransCustomers"].activations,
            1
        );
        assert_eq!(m.per_method["Transaction.getAccount"].activations, 5);
        assert_eq!(m.per_method["Account.setCustomer"].activations, 5);
        let _ = MethodRef::new("x", "y");
    }
}
