//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion report.

use std::collections::BTreeSet;
use std::time::Instant;

use caprelab::analysis::analyze;
use caprelab::bench::{self, synth, BenchmarkSpec, Family, Generated, SizeParams};
use caprelab::graph::{Analyzer, InlineMode};
use caprelab::hints::{rop_hints, HintMap};
use caprelab::model::MethodRef;
use caprelab::sim::{
    build_store, check_predictions, oracle_accessed_paths, run_workload, run_workload_logged,
    Policy, RunMetrics, StoreConfig, StoreState, Verdict, WorkloadTrace,
};

fn criterion(name: &str, ok: bool, detail: &str) {
    println!("{name} {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name} failed: {detail}");
}

fn default_cfg(policy: Policy, seed: u64) -> StoreConfig {
    StoreConfig {
        num_nodes: 4,
        remote_fetch_latency: 100,
        local_hit_latency: 0,
        channels_per_node: 4,
        policy,
        rng_seed: seed,
        cache_capacity: None,
        scheduler_overhead: 0,
    }
}

fn generate(family: Family, size: SizeParams, seed: u64) -> Generated {
    bench::generate(&BenchmarkSpec { family, size, seed }).expect("benchmark generates")
}

fn run(
    g: &Generated,
    hints: &HintMap,
    store: &StoreState,
    trace: &WorkloadTrace,
    policy: Policy,
    seed: u64,
) -> RunMetrics {
    let cfg = default_cfg(policy, seed);
    let hints_opt = (policy == Policy::Capre).then_some(hints);
    run_workload(&g.model, hints_opt, store, trace, &cfg).expect("run succeeds")
}

#[test]
fn a1_golden_hints_for_the_bank_example() {
    let start = Instant::now();
    let model = bench::bank::model();
    let analysis = analyze(&model).unwrap();
    let ph =
        analysis.hints_raw[&MethodRef::new("BankManagement", "setAllTransCustomers")].plain_paths();
    let expected: BTreeSet<String> = [
        "transactions.type",
        "transactions.emp",
        "transactions.account.cust.company",
        "manager.company",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let elapsed = start.elapsed();
    criterion(
        "A1",
        ph == expected && elapsed.as_secs() < 1,
        &format!("PH(setAllTransCustomers) = {ph:?} in {elapsed:?}"),
    );
}

#[test]
fn a2_rop_golden_sets() {
    let start = Instant::now();
    let gt = caprelab::graph::build_app_type_graph(&bench::bank::model());
    let d1 = rop_hints("Transaction", 1, &gt).unwrap().plain_paths();
    let d2 = rop_hints("Transaction", 2, &gt).unwrap().plain_paths();
    let expect1: BTreeSet<String> = ["type", "account", "emp"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let added: BTreeSet<String> = d2.difference(&d1).cloned().collect();
    let expect_added: BTreeSet<String> = ["emp.dept", "account.cust"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let elapsed = start.elapsed();
    criterion(
        "A2",
        d1 == expect1 && added == expect_added && elapsed.as_secs() < 1,
        &format!("depth1 = {d1:?}, depth2 adds {added:?} in {elapsed:?}"),
    );
}

#[test]
fn a3_policy_ordering_on_oo7_t1() {
    let start = Instant::now();
    let mut all_ok = true;
    let mut details = Vec::new();
    for size in [bench::oo7::Oo7Size::Small, bench::oo7::Oo7Size::Medium] {
        let g = generate(Family::Oo7, SizeParams::Oo7 { size }, 1);
        let hints = analyze(&g.model).unwrap().hints;
        let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
        let trace = &g.traces["t1"];
        let (mut capre, mut rop5, mut none) = (0u64, 0u64, 0u64);
        for seed in 0..10 {
            capre += run(&g, &hints, &store, trace, Policy::Capre, seed).completion_time;
            rop5 += run(&g, &hints, &store, trace, Policy::Rop(5), seed).completion_time;
            none += run(&g, &hints, &store, trace, Policy::None, seed).completion_time;
        }
        let reduction = 100.0 * (none as f64 - capre as f64) / none as f64;
        let ok = capre < rop5 && rop5 < none && reduction >= 15.0;
        all_ok &= ok;
        details.push(format!(
            "{size:?}: mean capre {} < rop5 {} < none {} (capre reduction {reduction:.1}%)",
            capre / 10,
            rop5 / 10,
            none / 10
        ));
    }
    let elapsed = start.elapsed();
    criterion(
        "A3",
        all_ok && elapsed.as_secs() < 120,
        &format!("{} in {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn a4_rop_depth_stagnation() {
    let start = Instant::now();
    let mut ok = true;
    // metrics must be identical apart from the policy label itself
    let unlabeled = |mut m: RunMetrics| {
        m.policy = String::new();
        serde_json::to_string(&m).unwrap()
    };
    let g = generate(
        Family::Oo7,
        SizeParams::Oo7 {
            size: bench::oo7::Oo7Size::Small,
        },
        1,
    );
    let hints = analyze(&g.model).unwrap().hints;
    let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
    for seed in 0..5 {
        let m5 = run(&g, &hints, &store, &g.traces["t1"], Policy::Rop(5), seed);
        let m10 = run(&g, &hints, &store, &g.traces["t1"], Policy::Rop(10), seed);
        ok &= unlabeled(m5) == unlabeled(m10);
    }
    let wc = generate(
        Family::Wordcount,
        SizeParams::Wordcount {
            files: 8,
            words_total: 100_000,
            chunks_per_text: 50,
        },
        2,
    );
    let wc_hints = analyze(&wc.model).unwrap().hints;
    let wc_store = build_store(&wc.dataset, &wc.model, &default_cfg(Policy::None, 0)).unwrap();
    for seed in 0..5 {
        let m3 = run(
            &wc,
            &wc_hints,
            &wc_store,
            &wc.traces["count"],
            Policy::Rop(3),
            seed,
        );
        let m5 = run(
            &wc,
            &wc_hints,
            &wc_store,
            &wc.traces["count"],
            Policy::Rop(5),
            seed,
        );
        ok &= unlabeled(m3) == unlabeled(m5);
    }
    let elapsed = start.elapsed();
    criterion(
        "A4",
        ok && elapsed.as_secs() < 120,
        &format!("oo7 rop:5 == rop:10 and wordcount rop:3 == rop:5, per seed, in {elapsed:?}"),
    );
}

#[test]
fn a5_update_workload_overhead() {
    let start = Instant::now();
    let g = generate(
        Family::Oo7,
        SizeParams::Oo7 {
            size: bench::oo7::Oo7Size::Small,
        },
        1,
    );
    let hints = analyze(&g.model).unwrap().hints;
    let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
    let trace = &g.traces["t2b"];
    let mut ok = true;
    let mut sample = String::new();
    for seed in 0..5 {
        let rop1 = run(&g, &hints, &store, trace, Policy::Rop(1), seed);
        let capre = run(&g, &hints, &store, trace, Policy::Capre, seed);
        let capre_unused_share =
            capre.prefetched_unused as f64 / capre.demand_accesses().max(1) as f64;
        ok &= rop1.prefetched_unused > capre.prefetched_unused;
        ok &= capre_unused_share <= 0.05;
        if seed == 0 {
            sample = format!(
                "unused rop:1 = {}, capre = {} ({:.2}% of {} demand accesses)",
                rop1.prefetched_unused,
                capre.prefetched_unused,
                100.0 * capre_unused_share,
                capre.demand_accesses()
            );
        }
    }
    let elapsed = start.elapsed();
    criterion(
        "A5",
        ok && elapsed.as_secs() < 60,
        &format!("{sample} in {elapsed:?}"),
    );
}

#[test]
fn a6_collection_advantage() {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for chunks in [1usize, 1000] {
        let g = generate(
            Family::Wordcount,
            SizeParams::Wordcount {
                files: 8,
                words_total: 100_000,
                chunks_per_text: chunks,
            },
            3,
        );
        let hints = analyze(&g.model).unwrap().hints;
        let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
        let capre = run(&g, &hints, &store, &g.traces["count"], Policy::Capre, 1);
        let rop3 = run(&g, &hints, &store, &g.traces["count"], Policy::Rop(3), 1);
        ok &= capre.hit_rate() > rop3.hit_rate();
        details.push(format!(
            "wordcount c={chunks}: hit rate capre {:.2} > rop3 {:.2}",
            capre.hit_rate(),
            rop3.hit_rate()
        ));
    }
    let g = generate(
        Family::Kmeans,
        SizeParams::Kmeans {
            vectors: 10_000,
            clusters: 4,
            dims: 10,
        },
        4,
    );
    let hints = analyze(&g.model).unwrap().hints;
    let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
    let trace = &g.traces["cluster"];
    let none = run(&g, &hints, &store, trace, Policy::None, 1);
    let capre = run(&g, &hints, &store, trace, Policy::Capre, 1);
    let rop3 = run(&g, &hints, &store, trace, Policy::Rop(3), 1);
    let capre_red = 100.0 * (none.completion_time as f64 - capre.completion_time as f64)
        / none.completion_time as f64;
    let rop_red = 100.0 * (none.completion_time as f64 - rop3.completion_time as f64)
        / none.completion_time as f64;
    ok &= capre.hit_rate() > rop3.hit_rate();
    ok &= rop_red < 2.0 && capre_red > 0.0;
    details.push(format!(
        "kmeans: reduction capre {capre_red:.1}% vs rop {rop_red:.1}%"
    ));
    let elapsed = start.elapsed();
    criterion(
        "A6",
        ok && elapsed.as_secs() < 120,
        &format!("{} in {elapsed:?}", details.join("; ")),
    );
}

#[test]
fn a7_branch_free_exactness() {
    let start = Instant::now();
    let mut checked_methods = 0usize;
    for seed in 0..500u64 {
        let cfg = synth::SynthConfig::exactness(seed);
        let model = synth::generate_model(&cfg);
        let (dataset, roots) = synth::generate_dataset(&model, &cfg);
        let store = build_store(&dataset, &model, &default_cfg(Policy::None, 0)).unwrap();
        let trace = synth::trace_all_methods(&model, &roots);
        let verdicts = check_predictions(&model, &store, &trace, seed).unwrap();
        for v in &verdicts {
            assert_eq!(
                v.verdict,
                Verdict::Exact,
                "seed {seed}, {}: verdict {} (unpredicted: {:?})",
                v.method,
                v.verdict,
                v.unpredicted
            );
            checked_methods += 1;
        }
    }
    let elapsed = start.elapsed();
    criterion(
        "A7",
        elapsed.as_secs() < 120,
        &format!(
            "500 branch-free models, {checked_methods} method verdicts all exact, in {elapsed:?}"
        ),
    );
}

#[test]
fn a8_dedup_preserves_prefetch_coverage() {
    let start = Instant::now();
    let mut ok = true;
    for seed in 0..100u64 {
        let cfg = synth::SynthConfig::general(seed);
        let model = synth::generate_model(&cfg);
        let (dataset, roots) = synth::generate_dataset(&model, &cfg);
        let store = build_store(&dataset, &model, &default_cfg(Policy::Capre, seed)).unwrap();
        let trace = synth::trace_entry_points(&model, &roots);
        let analysis = analyze(&model).unwrap();
        let run_cfg = default_cfg(Policy::Capre, seed);
        let prefetched = |hints: &HintMap| -> BTreeSet<u64> {
            run_workload_logged(&model, Some(hints), &store, &trace, &run_cfg)
                .unwrap()
                .fetch_events
                .into_iter()
                .filter(|e| e.event == "fetch_start" && e.origin == "prefetch")
                .map(|e| e.oid)
                .collect()
        };
        let before = prefetched(&analysis.hints_raw);
        let after = prefetched(&analysis.hints);
        ok &= before == after;
        assert_eq!(before, after, "seed {seed}: prefetched unions differ");
        let again = caprelab::hints::dedup_hints(
            &analysis.hints,
            &analysis.call_graph,
            &model.entry_points,
        );
        ok &= again == analysis.hints;
        assert_eq!(again, analysis.hints, "seed {seed}: dedup not idempotent");
    }
    let elapsed = start.elapsed();
    criterion(
        "A8",
        ok && elapsed.as_secs() < 120,
        &format!("100 models, unions identical and dedup idempotent, in {elapsed:?}"),
    );
}

#[test]
fn a9_analyze_once_and_linear_scaling() {
    let start = Instant::now();
    // analyze-once: instrumented counter stays at one per method
    let model = synth::scaling_model(10_000);
    let mut analyzer = Analyzer::new(&model, InlineMode::PruneCalleeBranches);
    analyzer.analyze_all().unwrap();
    let once = analyzer.build_counts.values().all(|&c| c == 1);
    assert!(once, "some method graph built more than once");

    // timing over 1e2..1e5 instructions; each decade may cost at most
    // 2x the linear extrapolation from the previous one. Taking the best
    // of several rounds screens out scheduling noise.
    let sizes = [100usize, 1_000, 10_000, 100_000];
    let mut timings = Vec::new();
    for &size in &sizes {
        let model = synth::scaling_model(size);
        let reps = (30_000 / size).max(1);
        let mut best = f64::MAX;
        for _ in 0..3 {
            let t0 = Instant::now();
            for _ in 0..reps {
                analyze(&model).unwrap();
            }
            best = best.min(t0.elapsed().as_secs_f64() / reps as f64);
        }
        timings.push(best);
    }
    let mut linear = true;
    let mut ratios = Vec::new();
    for w in timings.windows(2) {
        let ratio = w[1] / w[0].max(1e-7);
        ratios.push(format!("{ratio:.1}x"));
        linear &= ratio <= 20.0;
    }
    let elapsed = start.elapsed();
    criterion(
        "A9",
        once && linear && elapsed.as_secs() < 60,
        &format!(
            "each method built once; per-decade cost ratios {ratios:?} (limit 20x = 2x linear), in {elapsed:?}"
        ),
    );
}

#[test]
fn a10_semantic_transparency_and_determinism() {
    let start = Instant::now();
    let cases: Vec<(&str, Generated, &str)> = vec![
        (
            "bank",
            generate(Family::Bank, SizeParams::Bank { transactions: 50 }, 1),
            "setAllTransCustomers",
        ),
        (
            "oo7",
            generate(
                Family::Oo7,
                SizeParams::Oo7 {
                    size: bench::oo7::Oo7Size::Small,
                },
                1,
            ),
            "t1",
        ),
        (
            "wordcount",
            generate(
                Family::Wordcount,
                SizeParams::Wordcount {
                    files: 8,
                    words_total: 10_000,
                    chunks_per_text: 10,
                },
                1,
            ),
            "count",
        ),
        (
            "kmeans",
            generate(
                Family::Kmeans,
                SizeParams::Kmeans {
                    vectors: 500,
                    clusters: 4,
                    dims: 10,
                },
                1,
            ),
            "cluster",
        ),
        (
            "graph",
            generate(
                Family::Graph,
                SizeParams::Graph {
                    vertices: 100,
                    edges: 800,
                },
                1,
            ),
            "dfs",
        ),
    ];
    let mut ok = true;
    for (name, g, trace_name) in &cases {
        let hints = analyze(&g.model).unwrap().hints;
        let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
        let trace = &g.traces[*trace_name];
        let mut logs = Vec::new();
        for policy in caprelab::sim::COMPARED_POLICIES {
            let cfg = default_cfg(policy, 5);
            let hints_opt = (policy == Policy::Capre).then_some(&hints);
            let out = run_workload_logged(&g.model, hints_opt, &store, trace, &cfg).unwrap();
            logs.push(out.demand_log);
        }
        let transparent = logs.iter().all(|l| l == &logs[0]);
        let cfg = default_cfg(Policy::Capre, 5);
        let a = run_workload(&g.model, Some(&hints), &store, trace, &cfg).unwrap();
        let b = run_workload(&g.model, Some(&hints), &store, trace, &cfg).unwrap();
        let deterministic = serde_json::to_vec(&a).unwrap() == serde_json::to_vec(&b).unwrap();
        ok &= transparent && deterministic;
        assert!(
            transparent,
            "{name}: demand sequences differ across policies"
        );
        assert!(deterministic, "{name}: repeated runs differ");
    }
    let elapsed = start.elapsed();
    criterion(
        "A10",
        ok && elapsed.as_secs() < 120,
        &format!(
            "5 families transparent across 6 policies and byte-identical on re-run, in {elapsed:?}"
        ),
    );
}

#[test]
fn a11_data_dependent_traversal_gains_less() {
    let start = Instant::now();
    let g = generate(
        Family::Graph,
        SizeParams::Graph {
            vertices: 1000,
            edges: 10_000,
        },
        6,
    );
    let hints = analyze(&g.model).unwrap().hints;
    let store = build_store(&g.dataset, &g.model, &default_cfg(Policy::None, 0)).unwrap();
    let reduction = |trace: &WorkloadTrace| {
        let none = run(&g, &hints, &store, trace, Policy::None, 1);
        let capre = run(&g, &hints, &store, trace, Policy::Capre, 1);
        100.0 * (none.completion_time as f64 - capre.completion_time as f64)
            / none.completion_time as f64
    };
    let dfs = reduction(&g.traces["dfs"]);
    let bf = reduction(&g.traces["bellman-ford"]);
    let elapsed = start.elapsed();
    criterion(
        "A11",
        bf < dfs && elapsed.as_secs() < 60,
        &format!("capre reduction: bellman-ford {bf:.1}% < dfs {dfs:.1}%, in {elapsed:?}"),
    );
}

#[test]
fn oracle_paths_stay_within_published_hints_on_bank() {
    // companion check pinning the oracle example: both branches forced
    // taken, observed paths are a subset of the published set's closure
    let model = bench::bank::model();
    let dataset = bench::bank::dataset(2, 0);
    let store = build_store(&dataset, &model, &default_cfg(Policy::None, 0)).unwrap();
    let mut trace = bench::bank::trace_for("setAllTransCustomers", &dataset, 0).unwrap();
    trace.branch = caprelab::sim::BranchPolicy::Fixed { value: true };
    let paths = oracle_accessed_paths(&model, &store, &trace, 0).unwrap();
    let observed = &paths[&MethodRef::new("BankManagement", "setAllTransCustomers")];
    let analysis = analyze(&model).unwrap();
    let closure = caprelab::hints::prefix_closure(
        analysis.hints_raw[&MethodRef::new("BankManagement", "setAllTransCustomers")]
            .hints
            .iter(),
    );
    assert!(observed.is_subset(&closure));
}
