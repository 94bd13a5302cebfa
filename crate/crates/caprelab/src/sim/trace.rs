//! Workload traces and branch resolution.
//!
//! A trace is a list of method activations on root objects. Conditional
//! outcomes come from a seeded per-activation oracle: draws are keyed by
//! (seed, step, branch id, occurrence), so they replay identically across
//! prefetch policies and runs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::rng::{mix, mix2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub method: crate::model::MethodRef,
    pub root: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BranchPolicy {
    /// Every conditional resolves to this value (true = first arm).
    Fixed { value: bool },
    /// Seeded Bernoulli draw per occurrence.
    Seeded {
        #[serde(rename = "pTrue")]
        p_true: f64,
    },
    /// Outcomes consumed in order within each step; sticks at the last
    /// value when exhausted.
    Scripted { outcomes: Vec<bool> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadTrace {
    pub steps: Vec<TraceStep>,
    #[serde(rename = "branchOracle", default = "default_branch_policy")]
    pub branch: BranchPolicy,
}

fn default_branch_policy() -> BranchPolicy {
    BranchPolicy::Fixed { value: true }
}

impl WorkloadTrace {
    pub fn new(steps: Vec<TraceStep>, branch: BranchPolicy) -> Self {
        Self { steps, branch }
    }
}

/// Per-run branch resolution state.
pub struct BranchOracle {
    policy: BranchPolicy,
    seed: u64,
    step: usize,
    /// Draw count per (step, branch id), so repeated executions of the same
    /// conditional (loop iterations, repeated calls) draw independently.
    occurrences: BTreeMap<String, u64>,
    script_cursor: usize,
}

impl BranchOracle {
    pub fn new(policy: BranchPolicy, seed: u64) -> Self {
        Self {
            policy,
            seed,
            step: 0,
            occurrences: BTreeMap::new(),
            script_cursor: 0,
        }
    }

    pub fn begin_step(&mut self, step: usize) {
        self.step = step;
        self.occurrences.clear();
        self.script_cursor = 0;
    }

    /// Outcome for a two-armed conditional: true selects the first arm.
    pub fn draw_bool(&mut self, branch_id: &str) -> bool {
        let occ = self.bump(branch_id);
        match self.policy.clone() {
            BranchPolicy::Fixed { value } => value,
            BranchPolicy::Seeded { p_true } => {
                let key = mix2(
                    self.seed,
                    mix2(self.step as u64, mix2(hash_str(branch_id), occ)),
                );
                ((mix(key) >> 11) as f64 / (1u64 << 53) as f64) < p_true
            }
            BranchPolicy::Scripted { outcomes } => {
                let v = outcomes
                    .get(self.script_cursor)
                    .or(outcomes.last())
                    .copied()
                    .unwrap_or(true);
                self.script_cursor += 1;
                v
            }
        }
    }

    /// Arm index for an n-armed conditional.
    pub fn draw_index(&mut self, branch_id: &str, arms: usize) -> usize {
        debug_assert!(arms > 0);
        match self.policy.clone() {
            BranchPolicy::Fixed { value: true } => {
                self.bump(branch_id);
                0
            }
            BranchPolicy::Fixed { value: false } => {
                self.bump(branch_id);
                arms - 1
            }
            BranchPolicy::Seeded { .. } => {
                let occ = self.bump(branch_id);
                let key = mix2(
                    self.seed,
                    mix2(self.step as u64, mix2(hash_str(branch_id), occ)),
                );
                (mix(key) % arms as u64) as usize
            }
            BranchPolicy::Scripted { .. } => {
                if self.draw_bool(branch_id) {
                    0
                } else {
                    arms - 1
                }
            }
        }
    }

    fn bump(&mut self, branch_id: &str) -> u64 {
        let c = self.occurrences.entry(branch_id.to_string()).or_insert(0);
        let v = *c;
        *c += 1;
        v
    }
}

fn hash_str(s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

pub fn load_trace(path: &Path) -> Result<WorkloadTrace, SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Trace(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| SimError::Trace(e.to_string()))
}

pub fn save_trace(trace: &WorkloadTrace, path: &Path) -> Result<(), SimError> {
    let text = serde_json::to_string_pretty(trace).expect("trace serializes");
    std::fs::write(path, text).map_err(|e| SimError::Trace(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_replay() {
        let mut a = BranchOracle::new(BranchPolicy::Seeded { p_true: 0.5 }, 42);
        let mut b = BranchOracle::new(BranchPolicy::Seeded { p_true: 0.5 }, 42);
        for step in 0..3 {
            a.begin_step(step);
            b.begin_step(step);
            for _ in 0..10 {
                assert_eq!(a.draw_bool("b0"), b.draw_bool("b0"));
            }
        }
    }

    #[test]
    fn scripted_sticks_at_last() {
        let mut o = BranchOracle::new(
            BranchPolicy::Scripted {
                outcomes: vec![true, false],
            },
            0,
        );
        o.begin_step(0);
        assert!(o.draw_bool("b"));
        assert!(!o.draw_bool("b"));
        assert!(!o.draw_bool("b"));
    }
}
