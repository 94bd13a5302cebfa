//! Update-heavy workloads barely navigate, so any prefetching is mostly
//! overhead. The schema-based baseline keeps loading referenced objects
//! that are never read; analysis-derived hints track the actual access
//! pattern and stay close to zero waste.
//!
//! ```bash
//! cargo run -p caprelab --example update_overhead
//! ```

use caprelab::bench::{self, BenchmarkSpec, Family, SizeParams};
use caprelab::sim::{build_store, run_workload, Policy, StoreConfig};

fn main() {
    let spec = BenchmarkSpec {
        family: Family::Oo7,
        size: SizeParams::Oo7 {
            size: bench::oo7::Oo7Size::Small,
        },
        seed: 42,
    };
    let generated = bench::generate(&spec).expect("benchmark generates");
    let hints = caprelab::analyze(&generated.model)
        .expect("analysis succeeds")
        .hints;
    let base = StoreConfig::default();
    let store = build_store(&generated.dataset, &generated.model, &base).expect("placement");

    println!("update traversal t2b (field writes, minimal navigation):\n");
    println!(
        "{:<8} {:>8} {:>12} {:>8} {:>8} {:>14}",
        "policy", "misses", "prefetched", "used", "unused", "unused/demand"
    );
    for policy in [Policy::None, Policy::Rop(1), Policy::Rop(3), Policy::Capre] {
        let cfg = StoreConfig {
            policy,
            rng_seed: 1,
            ..base.clone()
        };
        let hints_opt = (policy == Policy::Capre).then_some(&hints);
        let m = run_workload(
            &generated.model,
            hints_opt,
            &store,
            &generated.traces["t2b"],
            &cfg,
        )
        .expect("run succeeds");
        println!(
            "{:<8} {:>8} {:>12} {:>8} {:>8} {:>13.2}%",
            m.policy,
            m.misses,
            m.prefetched_total,
            m.prefetched_used,
            m.prefetched_unused,
            100.0 * m.prefetched_unused as f64 / m.demand_accesses().max(1) as f64
        );
    }
}
