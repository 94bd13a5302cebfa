//! Build the schema type graph and per-method navigation graphs for the
//! bundled banking model, then print the graph structure.
//!
//! ```bash
//! cargo run -p caprelab --example analyze_bank
//! ```

use caprelab::graph::method_graph_to_dot;
use caprelab::model::load_model;

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/bank.app.json");
    let model = load_model(&path).expect("fixture parses");
    let report = caprelab::model::validate_model(&model);
    assert!(report.is_valid(), "fixture validates:\n{report}");

    let analysis = caprelab::analyze(&model).expect("analysis succeeds");
    println!(
        "schema: {} types, {} associations",
        analysis.gt.nodes.len(),
        analysis.gt.assoc.len()
    );
    for ((src, field), (dst, card)) in &analysis.gt.assoc {
        println!("  {src} --{field}--> {dst} ({card:?})");
    }

    println!("\nper-method navigation graphs:");
    for (mref, g) in &analysis.graphs {
        println!(
            "  {mref}: {} navigation nodes, {} edges{}",
            g.nav_node_count(),
            g.edges.len(),
            if g.has_branch_dependent_node() {
                " [branch-dependent]"
            } else {
                ""
            }
        );
        for node in &g.nodes {
            if let Some(path) = g.root_path(node.id) {
                if !path.is_empty() {
                    let dotted: Vec<&str> = path.iter().map(|(f, _)| f.as_str()).collect();
                    println!(
                        "      {}{}",
                        dotted.join("."),
                        if node.branch_dependent {
                            "  (branch-dependent)"
                        } else {
                            ""
                        }
                    );
                }
            }
        }
    }

    let set_all = caprelab::model::MethodRef::new("BankManagement", "setAllTransCustomers");
    println!("\nDOT of the entry point's augmented graph:\n");
    println!("{}", method_graph_to_dot(&analysis.graphs[&set_all]));
}
