//! Command-line pipeline: analyze, hints, simulate, compare, oracle-check,
//! benchgen.
//!
//! Exit codes: 0 success, 1 property violation, 2 input error, 3 runtime
//! error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{analyze_with, Analysis, AnalysisOptions};
use crate::bench::{self, BenchmarkSpec, Family, SizeParams};
use crate::graph::{
    app_graph_to_dot, app_graph_to_json, method_graph_to_dot, method_graph_to_json,
};
use crate::hints::{hints_from_json, hints_to_json, validate_hints, HintMap};
use crate::logging;
use crate::model::{load_model, validate_model, ApplicationModel};
use crate::sim::{
    build_store, check_predictions, compare_policies, load_dataset, load_trace,
    run_workload_logged, Policy, RunMetrics, StoreConfig, Verdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

enum CliError {
    Input(String),
    Runtime(String),
    Violation(String),
}

impl CliError {
    fn report(&self) -> i32 {
        match self {
            CliError::Input(m) => {
                logging::error(m);
                EXIT_INPUT
            }
            CliError::Runtime(m) => {
                logging::error(m);
                EXIT_RUNTIME
            }
            CliError::Violation(m) => {
                logging::error(m);
                EXIT_VIOLATION
            }
        }
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "caprelab",
    version,
    about = "Type-graph prefetching lab for distributed object stores"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Args)]
struct SimFlags {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    trace: PathBuf,
    /// Hint file; computed from the model when omitted.
    #[arg(long)]
    hints: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    nodes: u32,
    #[arg(long = "remote-latency", default_value_t = 100)]
    remote_latency: u64,
    #[arg(long = "local-latency", default_value_t = 0)]
    local_latency: u64,
    #[arg(long, default_value_t = 4)]
    channels: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Client cache capacity in objects (unbounded when omitted).
    #[arg(long = "cache-capacity")]
    cache_capacity: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build type graphs and report per-method graph sizes.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        /// Write DOT and JSON graph dumps here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "emit-graph", default_value_t = false)]
        emit_graph: bool,
    },
    /// Generate prefetching hints (deduped by default).
    Hints {
        #[arg(long)]
        model: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "no-dedup", default_value_t = false)]
        no_dedup: bool,
        /// Iterate dedup to a fixpoint instead of a single pass.
        #[arg(long = "fixpoint-dedup", default_value_t = false)]
        fixpoint_dedup: bool,
    },
    /// Run one workload under one policy.
    Simulate {
        #[command(flatten)]
        sim: SimFlags,
        #[arg(long, default_value = "none")]
        policy: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the fetch event log (JSON lines) here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run all policies over repeated seeds and summarize.
    Compare {
        #[command(flatten)]
        sim: SimFlags,
        #[arg(long, default_value_t = 1)]
        repeats: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Omit the timestamp so outputs are byte-stable.
        #[arg(long, default_value_t = false)]
        deterministic: bool,
    },
    /// Replay a trace and check observed access paths against predictions.
    OracleCheck {
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Generate a benchmark family: model, dataset, and traces.
    Benchgen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// oo7: small | medium | large-scaled.
        #[arg(long, default_value = "small")]
        size: String,
        #[arg(long, default_value_t = 100)]
        transactions: usize,
        #[arg(long, default_value_t = 8)]
        files: usize,
        #[arg(long, default_value_t = 100_000)]
        words: u64,
        #[arg(long, default_value_t = 10)]
        chunks: usize,
        #[arg(long, default_value_t = 1000)]
        vectors: usize,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 10)]
        dims: usize,
        #[arg(long, default_value_t = 100)]
        vertices: usize,
        #[arg(long, default_value_t = 1000)]
        edges: usize,
    },
}

pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => EXIT_OK,
        Err(e) => e.report(),
    }
}

fn dispatch(cmd: Cmd) -> CliResult {
    match cmd {
        Cmd::Analyze {
            model,
            out,
            emit_graph,
        } => cmd_analyze(&model, out.as_deref(), emit_graph),
        Cmd::Hints {
            model,
            out,
            no_dedup,
            fixpoint_dedup,
        } => cmd_hints(&model, out.as_deref(), no_dedup, fixpoint_dedup),
        Cmd::Simulate {
            sim,
            policy,
            format,
            out,
            events,
        } => cmd_simulate(&sim, &policy, format, out.as_deref(), events.as_deref()),
        Cmd::Compare {
            sim,
            repeats,
            format,
            out,
            deterministic,
        } => cmd_compare(&sim, repeats, format, out.as_deref(), deterministic),
        Cmd::OracleCheck { sim } => cmd_oracle_check(&sim),
        Cmd::Benchgen {
            family,
            out,
            seed,
            size,
            transactions,
            files,
            words,
            chunks,
            vectors,
            clusters,
            dims,
            vertices,
            edges,
        } => {
            let family = Family::parse(&family).map_err(|e| CliError::Input(e.to_string()))?;
            let size = match family {
                Family::Bank => SizeParams::Bank { transactions },
                Family::Oo7 => SizeParams::Oo7 {
                    size: bench::oo7::Oo7Size::parse(&size)
                        .map_err(|e| CliError::Input(e.to_string()))?,
                },
                Family::Wordcount => SizeParams::Wordcount {
                    files,
                    words_total: words,
                    chunks_per_text: chunks,
                },
                Family::Kmeans => SizeParams::Kmeans {
                    vectors,
                    clusters,
                    dims,
                },
                Family::Graph => SizeParams::Graph { vertices, edges },
            };
            cmd_benchgen(&BenchmarkSpec { family, size, seed }, &out)
        }
    }
}

fn load_validated_model(path: &Path) -> Result<ApplicationModel, CliError> {
    let model = load_model(path).map_err(|e| CliError::Input(e.to_string()))?;
    let report = validate_model(&model);
    if !report.is_valid() {
        eprintln!("{}", report.to_json_lines());
        return Err(CliError::Input(format!(
            "model has {} validation violation(s)",
            report.violations.len()
        )));
    }
    Ok(model)
}

fn run_analysis(model: &ApplicationModel, opts: &AnalysisOptions) -> Result<Analysis, CliError> {
    analyze_with(model, opts).map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_analyze(model_path: &Path, out: Option<&Path>, emit_graph: bool) -> CliResult {
    let model = load_validated_model(model_path)?;
    let analysis = run_analysis(&model, &AnalysisOptions::default())?;
    println!(
        "analyzed {} methods in {:?} ({} types, {} associations)",
        analysis.graphs.len(),
        analysis.elapsed,
        analysis.gt.nodes.len(),
        analysis.gt.assoc.len()
    );
    for (mref, g) in &analysis.graphs {
        let flags = [
            g.truncated.then_some("truncated"),
            g.has_branch_dependent_node().then_some("branch-dependent"),
        ]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join(", ");
        println!(
            "  {mref}: {} navigation nodes, {} edges{}",
            g.nav_node_count(),
            g.edges.len(),
            if flags.is_empty() {
                String::new()
            } else {
                format!(" [{flags}]")
            }
        );
    }
    if emit_graph {
        let dir = out.unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
        let write = |name: String, contents: String| -> CliResult {
            std::fs::write(dir.join(name), contents).map_err(|e| CliError::Runtime(e.to_string()))
        };
        write("app_type_graph.dot".into(), app_graph_to_dot(&analysis.gt))?;
        write(
            "app_type_graph.json".into(),
            app_graph_to_json(&analysis.gt).to_string(),
        )?;
        for (mref, g) in &analysis.graphs {
            let stem = format!("{}.{}", mref.owner, mref.name);
            write(format!("{stem}.dot"), method_graph_to_dot(g))?;
            write(format!("{stem}.json"), method_graph_to_json(g).to_string())?;
        }
        println!("graph dumps written to {}", dir.display());
    }
    Ok(())
}

fn cmd_hints(model_path: &Path, out: Option<&Path>, no_dedup: bool, fixpoint: bool) -> CliResult {
    let model = load_validated_model(model_path)?;
    let opts = AnalysisOptions {
        dedup: !no_dedup,
        fixpoint_dedup: fixpoint,
    };
    let analysis = run_analysis(&model, &opts)?;
    let text = hints_to_json(&analysis.hints);
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!(
                "hints for {} methods written to {}",
                analysis.hints.len(),
                path.display()
            );
        }
        None => println!("{text}"),
    }
    Ok(())
}

struct SimInputs {
    model: ApplicationModel,
    store: crate::sim::StoreState,
    trace: crate::sim::WorkloadTrace,
    hints: HintMap,
    cfg: StoreConfig,
}

fn load_sim_inputs(flags: &SimFlags, policy: Policy) -> Result<SimInputs, CliError> {
    let model = load_validated_model(&flags.model)?;
    let dataset = load_dataset(&flags.dataset).map_err(|e| CliError::Input(e.to_string()))?;
    let trace = load_trace(&flags.trace).map_err(|e| CliError::Input(e.to_string()))?;
    let cfg = StoreConfig {
        num_nodes: flags.nodes,
        remote_fetch_latency: flags.remote_latency,
        local_hit_latency: flags.local_latency,
        channels_per_node: flags.channels,
        policy,
        rng_seed: flags.seed,
        cache_capacity: flags.cache_capacity,
        scheduler_overhead: 0,
    };
    let store =
        build_store(&dataset, &model, &cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let hints = match &flags.hints {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let map = hints_from_json(&text).map_err(CliError::Input)?;
            validate_hints(&map, &model)
                .map_err(|e| CliError::Runtime(format!("hint error: {e}")))?;
            map
        }
        None => {
            // no hints supplied: run the analysis first
            logging::info("no hints file given, running analysis");
            run_analysis(&model, &AnalysisOptions::default())?.hints
        }
    };
    Ok(SimInputs {
        model,
        store,
        trace,
        hints,
        cfg,
    })
}

fn print_metrics(metrics: &[RunMetrics], format: Format, out: Option<&Path>) -> CliResult {
    let text = match format {
        Format::Csv => {
            let mut s = String::from(RunMetrics::CSV_HEADER);
            for m in metrics {
                s.push('\n');
                s.push_str(&m.csv_row());
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(metrics).expect("metrics serialize"),
        Format::Table => {
            let mut s = format!(
                "{:<8} {:>9} {:>9} {:>10} {:>9} {:>9} {:>15}",
                "policy", "hits", "misses", "prefetched", "used", "unused", "completion"
            );
            for m in metrics {
                s.push_str(&format!(
                    "\n{:<8} {:>9} {:>9} {:>10} {:>9} {:>9} {:>15}",
                    m.policy,
                    m.hits,
                    m.misses,
                    m.prefetched_total,
                    m.prefetched_used,
                    m.prefetched_unused,
                    m.completion_time
                ));
            }
            s
        }
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Runtime(e.to_string()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_simulate(
    flags: &SimFlags,
    policy: &str,
    format: Format,
    out: Option<&Path>,
    events: Option<&Path>,
) -> CliResult {
    let policy = Policy::parse(policy).map_err(CliError::Input)?;
    let inputs = load_sim_inputs(flags, policy)?;
    let hints_opt = (policy == Policy::Capre).then_some(&inputs.hints);
    let output = run_workload_logged(
        &inputs.model,
        hints_opt,
        &inputs.store,
        &inputs.trace,
        &inputs.cfg,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = events {
        let lines: Vec<String> = output
            .fetch_events
            .iter()
            .map(|e| serde_json::to_string(e).expect("event serializes"))
            .collect();
        std::fs::write(path, lines.join("\n")).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    print_metrics(std::slice::from_ref(&output.metrics), format, out)
}

fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

fn cmd_compare(
    flags: &SimFlags,
    repeats: u64,
    format: Format,
    out: Option<&Path>,
    deterministic: bool,
) -> CliResult {
    let inputs = load_sim_inputs(flags, Policy::Capre)?;
    let mut per_seed: Vec<(u64, RunMetrics, f64)> = Vec::new();
    for r in 0..repeats.max(1) {
        let cfg = StoreConfig {
            rng_seed: flags.seed + r,
            ..inputs.cfg.clone()
        };
        let report = compare_policies(
            &inputs.model,
            &inputs.hints,
            &inputs.store,
            &inputs.trace,
            &cfg,
        )
        .map_err(|e| CliError::Runtime(format!("compare failed at seed {}: {e}", cfg.rng_seed)))?;
        for run in report.runs {
            per_seed.push((cfg.rng_seed, run.metrics, run.reduction_pct));
        }
    }

    // per-policy summary over seeds
    let mut by_policy: BTreeMap<String, Vec<&(u64, RunMetrics, f64)>> = BTreeMap::new();
    for row in &per_seed {
        by_policy.entry(row.1.policy.clone()).or_default().push(row);
    }
    let mut summary = Vec::new();
    for (policy, rows) in &by_policy {
        let times: Vec<f64> = rows.iter().map(|r| r.1.completion_time as f64).collect();
        let reductions: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let (t_mean, t_sd) = mean_stddev(&times);
        let (r_mean, _) = mean_stddev(&reductions);
        summary.push((policy.clone(), t_mean, t_sd, r_mean));
    }

    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut csv = format!("seed,{}\n", RunMetrics::CSV_HEADER);
            for (seed, m, _) in &per_seed {
                csv.push_str(&format!("{seed},{}\n", m.csv_row()));
            }
            std::fs::write(dir.join("per_seed.csv"), csv)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut sum =
                String::from("policy,mean_completion,stddev_completion,mean_reduction_pct\n");
            for (p, tm, ts, rm) in &summary {
                sum.push_str(&format!("{p},{tm:.3},{ts:.3},{rm:.3}\n"));
            }
            std::fs::write(dir.join("summary.csv"), sum)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut obj = serde_json::json!({
                "seeds": repeats.max(1),
                "base_seed": flags.seed,
                "summary": summary.iter().map(|(p, tm, ts, rm)| serde_json::json!({
                    "policy": p, "mean_completion": tm, "stddev_completion": ts,
                    "mean_reduction_pct": rm,
                })).collect::<Vec<_>>(),
            });
            if !deterministic {
                obj["generated_at"] = serde_json::json!(now_rfc3339());
            }
            std::fs::write(
                dir.join("summary.json"),
                serde_json::to_string_pretty(&obj).unwrap(),
            )
            .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("comparison written to {}", dir.display());
        }
        None => {
            let metrics: Vec<RunMetrics> = per_seed.iter().map(|(_, m, _)| m.clone()).collect();
            print_metrics(&metrics, format, None)?;
            println!();
            println!("policy    mean_completion  stddev  mean_reduction%");
            for (p, tm, ts, rm) in &summary {
                println!("{p:<9} {tm:>15.1} {ts:>7.1} {rm:>15.2}");
            }
        }
    }
    Ok(())
}

fn now_rfc3339() -> String {
    // coarse wall-clock stamp, intentionally dropped under --deterministic
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

fn cmd_oracle_check(flags: &SimFlags) -> CliResult {
    let inputs = load_sim_inputs(flags, Policy::None)?;
    let verdicts = check_predictions(&inputs.model, &inputs.store, &inputs.trace, flags.seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut violations = 0;
    for v in &verdicts {
        println!(
            "{}: {} (observed {} paths, predicted {} paths)",
            v.method, v.verdict, v.observed, v.predicted
        );
        if v.verdict == Verdict::Violation {
            violations += 1;
            for p in &v.unpredicted {
                println!("  unpredicted: {p}");
            }
        }
    }
    if violations > 0 {
        return Err(CliError::Violation(format!(
            "{violations} method(s) violated prediction coverage"
        )));
    }
    Ok(())
}

fn cmd_benchgen(spec: &BenchmarkSpec, out: &Path) -> CliResult {
    let generated = bench::generate(spec).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::create_dir_all(out.join("traces")).map_err(|e| CliError::Runtime(e.to_string()))?;
    crate::model::save_model(&generated.model, &out.join("model.json"))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    crate::sim::save_dataset(&generated.dataset, &out.join("dataset.json"))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (name, trace) in &generated.traces {
        crate::sim::save_trace(trace, &out.join("traces").join(format!("{name}.json")))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    println!(
        "{} benchmark written to {} ({} objects, traces: {})",
        spec.family.name(),
        out.display(),
        generated.stats.get("objects").copied().unwrap_or(0),
        generated
            .traces
            .keys()
            .cloned()
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}
