//! Generate prefetching hints for the banking model and show what the
//! caller-based dedup removes.
//!
//! ```bash
//! cargo run -p caprelab --example generate_hints
//! ```

use caprelab::hints::hints_to_json;

fn main() {
    let model = caprelab::bench::bank::model();
    let analysis = caprelab::analyze(&model).expect("analysis succeeds");

    println!("hint sets straight from the graphs:");
    for (mref, set) in &analysis.hints_raw {
        println!("  {mref}:");
        for h in &set.hints {
            println!("      {h}");
        }
    }

    println!("\nafter removing hints every caller already carries:");
    for (mref, set) in &analysis.hints {
        let removed: Vec<String> = analysis.hints_raw[mref]
            .hints
            .difference(&set.hints)
            .map(|h| h.marked())
            .collect();
        println!("  {mref}: {} hint(s)", set.hints.len());
        for h in &set.hints {
            println!("      {h}");
        }
        if !removed.is_empty() {
            println!("      removed: {}", removed.join(", "));
        }
    }

    println!("\nhint file format:\n{}", hints_to_json(&analysis.hints));
}
