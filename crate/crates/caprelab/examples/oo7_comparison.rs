//! The headline experiment: generate the assembly-hierarchy benchmark,
//! run the full traversal under every policy over several seeds, and
//! report mean completion times and reductions.
//!
//! ```bash
//! cargo run --release -p caprelab --example oo7_comparison
//! ```

use std::collections::BTreeMap;

use caprelab::bench::{self, BenchmarkSpec, Family, SizeParams};
use caprelab::sim::{build_store, compare_policies, StoreConfig};

fn main() {
    let spec = BenchmarkSpec {
        family: Family::Oo7,
        size: SizeParams::Oo7 {
            size: bench::oo7::Oo7Size::Small,
        },
        seed: 42,
    };
    let generated = bench::generate(&spec).expect("benchmark generates");
    println!(
        "oo7 small: {} objects ({} assemblies, {} composites, {} atomic parts)",
        generated.stats["objects"],
        generated.stats["assemblies"],
        generated.stats["composites"],
        generated.stats["atomics"]
    );

    let analysis = caprelab::analyze(&generated.model).expect("analysis succeeds");
    println!(
        "analysis of {} methods took {:?}\n",
        analysis.graphs.len(),
        analysis.elapsed
    );

    let base = StoreConfig::default();
    let store = build_store(&generated.dataset, &generated.model, &base).expect("placement");
    let trace = &generated.traces["t1"];

    let seeds = 10u64;
    let mut completion: BTreeMap<String, u64> = BTreeMap::new();
    let mut reduction: BTreeMap<String, f64> = BTreeMap::new();
    for seed in 0..seeds {
        let cfg = StoreConfig {
            rng_seed: seed,
            ..base.clone()
        };
        let report = compare_policies(&generated.model, &analysis.hints, &store, trace, &cfg)
            .expect("comparison runs");
        for run in report.runs {
            *completion.entry(run.metrics.policy.clone()).or_default() +=
                run.metrics.completion_time;
            *reduction.entry(run.metrics.policy).or_default() += run.reduction_pct;
        }
    }

    println!("t1 traversal, mean over {seeds} seeds:");
    println!("{:<8} {:>16} {:>12}", "policy", "completion", "reduction");
    for (policy, total) in &completion {
        println!(
            "{policy:<8} {:>16} {:>11.1}%",
            total / seeds,
            reduction[policy] / seeds as f64
        );
    }
}
