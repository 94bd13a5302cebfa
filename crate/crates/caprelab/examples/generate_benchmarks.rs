//! Generate every benchmark family and list the resulting models,
//! datasets, and traces.
//!
//! ```bash
//! cargo run -p caprelab --example generate_benchmarks
//! ```

use caprelab::bench::{self, BenchmarkSpec, Family, SizeParams};

fn main() {
    let specs = vec![
        BenchmarkSpec {
            family: Family::Bank,
            size: SizeParams::Bank { transactions: 100 },
            seed: 42,
        },
        BenchmarkSpec {
            family: Family::Oo7,
            size: SizeParams::Oo7 {
                size: bench::oo7::Oo7Size::Small,
            },
            seed: 42,
        },
        BenchmarkSpec {
            family: Family::Wordcount,
            size: SizeParams::Wordcount {
                files: 8,
                words_total: 100_000,
                chunks_per_text: 100,
            },
            seed: 42,
        },
        BenchmarkSpec {
            family: Family::Kmeans,
            size: SizeParams::Kmeans {
                vectors: 1000,
                clusters: 4,
                dims: 10,
            },
            seed: 42,
        },
        BenchmarkSpec {
            family: Family::Graph,
            size: SizeParams::Graph {
                vertices: 100,
                edges: 1000,
            },
            seed: 42,
        },
    ];
    for spec in specs {
        let g = bench::generate(&spec).expect("benchmark generates");
        println!(
            "{:<10} {:>7} objects, {} types, traces: {}",
            spec.family.name(),
            g.stats["objects"],
            g.model.types.len(),
            g.traces.keys().cloned().collect::<Vec<_>>().join(", ")
        );
        for (key, value) in &g.stats {
            if key != "objects" {
                println!("             {key} = {value}");
            }
        }
    }
}
