//! Validate predictions against a dynamic replay: record exactly which
//! association paths each method demanded and compare them with the
//! analysis, under both outcomes of the conditional in the bank example.
//!
//! ```bash
//! cargo run -p caprelab --example oracle_check
//! ```

use caprelab::bench::bank;
use caprelab::sim::{
    build_store, check_predictions, oracle_accessed_paths, BranchPolicy, StoreConfig,
};

fn main() {
    let model = bank::model();
    let dataset = bank::dataset(3, 0);
    let cfg = StoreConfig::default();
    let store = build_store(&dataset, &model, &cfg).expect("placement succeeds");

    for (label, value) in [("guard taken", true), ("guard not taken", false)] {
        let mut trace = bank::trace_for("setAllTransCustomers", &dataset, 0).unwrap();
        trace.branch = BranchPolicy::Fixed { value };
        println!("--- {label} ---");
        let paths = oracle_accessed_paths(&model, &store, &trace, 0).expect("replay succeeds");
        for (mref, set) in &paths {
            println!("  {mref} demanded:");
            for p in set {
                let dotted: Vec<&str> = p.iter().map(|s| s.field.as_str()).collect();
                println!("      {}", dotted.join("."));
            }
        }
        let verdicts = check_predictions(&model, &store, &trace, 0).expect("check succeeds");
        for v in &verdicts {
            println!("  verdict {}: {}", v.method, v.verdict);
        }
        println!();
    }
}
