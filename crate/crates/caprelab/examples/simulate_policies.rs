//! Run the banking workload through the store simulator under every
//! prefetch policy and print the metrics side by side.
//!
//! ```bash
//! cargo run -p caprelab --example simulate_policies
//! ```

use caprelab::bench::bank;
use caprelab::sim::{build_store, compare_policies, RunMetrics, StoreConfig};

fn main() {
    let model = bank::model();
    let dataset = bank::dataset(100, 0);
    let trace = bank::trace_for("setAllTransCustomers", &dataset, 0).expect("known traversal");
    let hints = caprelab::analyze(&model).expect("analysis succeeds").hints;

    let cfg = StoreConfig {
        rng_seed: 7,
        ..Default::default()
    };
    let store = build_store(&dataset, &model, &cfg).expect("placement succeeds");
    println!(
        "{} objects on {} nodes, remote latency {}, {} channels/node\n",
        store.len(),
        store.num_nodes,
        cfg.remote_fetch_latency,
        cfg.channels_per_node
    );

    let report = compare_policies(&model, &hints, &store, &trace, &cfg).expect("runs succeed");
    println!("{}", RunMetrics::CSV_HEADER);
    for run in &report.runs {
        println!("{}", run.metrics.csv_row());
    }
    println!();
    for run in &report.runs {
        println!(
            "{:<8} reduction vs none: {:>6.1}%   hit rate: {:.2}",
            run.metrics.policy,
            run.reduction_pct,
            run.metrics.hit_rate()
        );
    }
}
