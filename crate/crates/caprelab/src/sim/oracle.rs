//! Dynamic access-path oracle: a pure replay of a workload that records,
//! per method, exactly which receiver-rooted association paths were
//! demanded. No cache, no prefetch, no latency.
//!
//! Attribution follows value provenance through def/use chains, mirroring
//! the static augmentation: a nested call's navigations extend the
//! caller's receiver path through the call-site receiver, accesses rooted
//! at a parameter belong to the frames where the argument has a path
//! (never to the callee itself), and chained calls continue through the
//! returned value. Object identity plays no role, so shared (aliased)
//! data cannot smear paths across unrelated chains.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::SimError;
use crate::graph::{Analyzer, InlineMode};
use crate::hints::{prefix_closure, Hint, HintStep};
use crate::model::{ApplicationModel, Cardinality, MethodRef};

use super::exec::{CallInfo, ExecSink, Interp, Provenance};
use super::trace::{BranchOracle, WorkloadTrace};
use super::StoreState;

pub type OraclePaths = BTreeMap<MethodRef, BTreeSet<Vec<HintStep>>>;

type MaybePath = Option<Vec<HintStep>>;

struct Frame {
    method: MethodRef,
    /// Path of this frame's receiver relative to each frame on the stack
    /// up to and including itself (`abs[own depth] == Some([])`).
    abs: Vec<MaybePath>,
    /// Per parameter: path of the argument object relative to each frame
    /// up to and including this one (`None` at this frame itself).
    param_abs: Vec<Vec<MaybePath>>,
}

struct OracleSink {
    stack: Vec<Frame>,
    out: OraclePaths,
}

impl OracleSink {
    /// Paths of a current-frame value relative to every frame on the
    /// stack, derived from its provenance in the innermost frame.
    fn resolve(&self, prov: &Provenance) -> Vec<MaybePath> {
        let Some(cur) = self.stack.last() else {
            return Vec::new();
        };
        let compose = |bases: &[MaybePath], steps: &[HintStep]| -> Vec<MaybePath> {
            bases
                .iter()
                .map(|b| {
                    b.as_ref().map(|prefix| {
                        let mut p = prefix.clone();
                        p.extend_from_slice(steps);
                        p
                    })
                })
                .collect()
        };
        match prov {
            Provenance::Rooted(p) => compose(&cur.abs, p),
            Provenance::Param(i, p) => match cur.param_abs.get(*i) {
                Some(bases) => compose(bases, p),
                None => vec![None; self.stack.len()],
            },
            Provenance::Unrooted => vec![None; self.stack.len()],
        }
    }
}

impl ExecSink for OracleSink {
    fn enter_method(&mut self, m: &MethodRef, _recv: u64, call: &CallInfo) {
        self.out.entry(m.clone()).or_default();
        let mut abs = self.resolve(&call.recv_prov);
        abs.push(Some(Vec::new()));
        let param_abs = call
            .arg_provs
            .iter()
            .map(|p| {
                let mut v = self.resolve(p);
                v.push(None);
                v
            })
            .collect();
        self.stack.push(Frame {
            method: m.clone(),
            abs,
            param_abs,
        });
    }

    fn exit_method(&mut self) {
        self.stack.pop();
    }

    fn demand_object(
        &mut self,
        _oid: u64,
        via: Option<(u64, &str, Cardinality)>,
        nav_prov: &Provenance,
    ) {
        if via.is_none() {
            return;
        }
        let rel = self.resolve(nav_prov);
        for (frame, path) in self.stack.iter().zip(rel) {
            if let Some(path) = path {
                if !path.is_empty() {
                    self.out
                        .entry(frame.method.clone())
                        .or_default()
                        .insert(path);
                }
            }
        }
    }

    fn branch_outcome(&mut self, _id: &str, _arm: Option<&str>) {}
}

/// Replay a trace and collect the association paths each method demanded,
/// rooted at its receiver.
pub fn oracle_accessed_paths(
    model: &ApplicationModel,
    store: &StoreState,
    trace: &WorkloadTrace,
    seed: u64,
) -> Result<OraclePaths, SimError> {
    for step in &trace.steps {
        let rec = store
            .record(step.root)
            .ok_or_else(|| SimError::Trace(format!("root oid {} not in store", step.root)))?;
        if rec.type_name != step.method.owner || model.method_decl(&step.method).is_none() {
            return Err(SimError::Trace(format!(
                "step invokes {} on object {} of type {}",
                step.method, step.root, rec.type_name
            )));
        }
    }
    let oracle = BranchOracle::new(trace.branch.clone(), seed);
    let sink = OracleSink {
        stack: Vec::new(),
        out: OraclePaths::new(),
    };
    let mut interp = Interp::new(model, store, oracle, sink);
    for (i, step) in trace.steps.iter().enumerate() {
        interp.run_step(i, &step.method, step.root)?;
    }
    Ok(interp.sink.out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Observed paths equal the predicted closure and the method has no
    /// branch-dependent or truncated structure.
    Exact,
    /// Predictions cover everything observed, with slack allowed by
    /// branch-dependent navigations, recursion cuts, or runtime nulls.
    SupersetBranchDependent,
    /// The method accessed a path the analysis did not predict.
    Violation,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Exact => write!(f, "exact"),
            Verdict::SupersetBranchDependent => write!(f, "superset(branch-dependent)"),
            Verdict::Violation => write!(f, "VIOLATION"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MethodVerdict {
    pub method: MethodRef,
    pub verdict: Verdict,
    pub observed: usize,
    pub predicted: usize,
    /// Observed paths missing from the prediction (evidence on violation).
    pub unpredicted: Vec<String>,
}

/// Compare the dynamic oracle against the static prediction, method by
/// method. The reference is the full augmented graph (branch-dependent
/// navigations included, as if both arms run), so the check validates the
/// prediction itself rather than any particular hint thinning.
pub fn check_predictions(
    model: &ApplicationModel,
    store: &StoreState,
    trace: &WorkloadTrace,
    seed: u64,
) -> Result<Vec<MethodVerdict>, SimError> {
    let observed = oracle_accessed_paths(model, store, trace, seed)?;
    let mut cover = Analyzer::new(model, InlineMode::KeepAll);
    let mut out = Vec::new();
    for (mref, paths) in &observed {
        let ag = cover
            .graph(mref)
            .map_err(|e| SimError::Trace(format!("analysis failed for {mref}: {e}")))?;
        let hints = crate::hints::generate_hints(&ag);
        let predicted = prefix_closure(hints.hints.iter());
        // a cut recursion legitimately under-approximates: paths that
        // extend a predicted chain are expected, not violations
        let explained_by_cut = |p: &Vec<HintStep>| {
            ag.truncated
                && predicted
                    .iter()
                    .any(|pre| !pre.is_empty() && p.len() > pre.len() && p.starts_with(pre))
        };
        let unpredicted: Vec<String> = paths
            .iter()
            .filter(|p| !predicted.contains(*p) && !explained_by_cut(p))
            .map(|p| {
                Hint {
                    source_type: mref.owner.clone(),
                    path: p.clone(),
                }
                .marked()
            })
            .collect();
        let verdict = if !unpredicted.is_empty() {
            Verdict::Violation
        } else if !ag.has_branch_dependent_node() && !ag.truncated && *paths == predicted {
            Verdict::Exact
        } else {
            Verdict::SupersetBranchDependent
        };
        out.push(MethodVerdict {
            method: mref.clone(),
            verdict,
            observed: paths.len(),
            predicted: predicted.len(),
            unpredicted,
        });
    }
    Ok(out)
}
