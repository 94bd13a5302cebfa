//! The referenced-objects predictor baseline: single-association hint sets
//! at increasing fetch depth, showing where each schema stagnates.
//!
//! ```bash
//! cargo run -p caprelab --example rop_baseline
//! ```

use caprelab::graph::build_app_type_graph;
use caprelab::hints::rop_hints;

fn main() {
    let bank = build_app_type_graph(&caprelab::bench::bank::model());
    println!("bank schema, rooted at Transaction:");
    let mut prev = None;
    for depth in 1..=6 {
        let set = rop_hints("Transaction", depth, &bank).expect("known type");
        let paths = set.plain_paths();
        let stagnated = prev.as_ref() == Some(&paths);
        println!(
            "  depth {depth}: {:?}{}",
            paths,
            if stagnated { "  <- stagnated" } else { "" }
        );
        prev = Some(paths);
    }

    // collections are never traversed, so a collections-only schema has
    // nothing for the baseline to predict
    let kmeans = build_app_type_graph(&caprelab::bench::kmeans::model());
    let empty = rop_hints("VectorCollection", 10, &kmeans).expect("known type");
    println!(
        "\nvector schema, rooted at VectorCollection, depth 10: {:?}",
        empty.plain_paths()
    );
}
