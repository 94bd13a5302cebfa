//! Side-by-side policy runs over identical inputs and seed.

use serde::Serialize;

use crate::error::SimError;
use crate::hints::HintMap;
use crate::model::ApplicationModel;

use super::{run_workload, Policy, RunMetrics, StoreConfig, StoreState, WorkloadTrace};

/// The standard comparison ladder.
pub const COMPARED_POLICIES: [Policy; 6] = [
    Policy::None,
    Policy::Rop(1),
    Policy::Rop(3),
    Policy::Rop(5),
    Policy::Rop(10),
    Policy::Capre,
];

#[derive(Clone, Debug, Serialize)]
pub struct PolicyRun {
    pub metrics: RunMetrics,
    /// Completion-time reduction relative to the no-prefetch run, percent.
    pub reduction_pct: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub runs: Vec<PolicyRun>,
}

impl ComparisonReport {
    pub fn run_for(&self, policy: Policy) -> Option<&PolicyRun> {
        self.runs
            .iter()
            .find(|r| r.metrics.policy == policy.to_string())
    }
}

/// Run every compared policy with the same seed and report per-policy
/// metrics plus reduction percentages relative to `none`.
pub fn compare_policies(
    model: &ApplicationModel,
    hints: &HintMap,
    store: &StoreState,
    trace: &WorkloadTrace,
    cfg: &StoreConfig,
) -> Result<ComparisonReport, SimError> {
    let mut metrics = Vec::new();
    for policy in COMPARED_POLICIES {
        let cfg = StoreConfig {
            policy,
            ..cfg.clone()
        };
        let hints_opt = (policy == Policy::Capre).then_some(hints);
        metrics.push(run_workload(model, hints_opt, store, trace, &cfg)?);
    }
    let baseline = metrics[0].completion_time;
    let runs = metrics
        .into_iter()
        .map(|m| {
            let reduction_pct = if baseline == 0 {
                0.0
            } else {
                100.0 * (baseline as f64 - m.completion_time as f64) / baseline as f64
            };
            PolicyRun {
                metrics: m,
                reduction_pct,
            }
        })
        .collect();
    Ok(ComparisonReport {
        seed: cfg.rng_seed,
        runs,
    })
}
