//! Whole-program analysis pipeline: schema graph, per-method augmented
//! graphs, hint generation, and caller-based dedup.

use std::collections::BTreeMap;
use std::rc::Rc;
use std::time::Duration;

use crate::error::AnalysisError;
use crate::graph::{Analyzer, AppTypeGraph, AugmentedTypeGraph, InlineMode};
use crate::hints::{
    build_call_graph, dedup_hints, dedup_hints_fixpoint, generate_hints, CallGraph, HintMap,
};
use crate::model::{ApplicationModel, MethodRef};

pub struct Analysis {
    pub gt: AppTypeGraph,
    pub graphs: BTreeMap<MethodRef, Rc<AugmentedTypeGraph>>,
    /// Hint sets straight from the graphs, before dedup.
    pub hints_raw: HintMap,
    /// Deduped hint sets, the ones the simulator schedules.
    pub hints: HintMap,
    pub call_graph: CallGraph,
    pub build_counts: BTreeMap<MethodRef, usize>,
    pub elapsed: Duration,
}

pub struct AnalysisOptions {
    pub dedup: bool,
    pub fixpoint_dedup: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            dedup: true,
            fixpoint_dedup: false,
        }
    }
}

pub fn analyze(model: &ApplicationModel) -> Result<Analysis, AnalysisError> {
    analyze_with(model, &AnalysisOptions::default())
}

pub fn analyze_with(
    model: &ApplicationModel,
    opts: &AnalysisOptions,
) -> Result<Analysis, AnalysisError> {
    let start = std::time::Instant::now();
    let mut analyzer = Analyzer::new(model, InlineMode::PruneCalleeBranches);
    let graphs = analyzer.analyze_all()?;
    let hints_raw: HintMap = graphs
        .iter()
        .map(|(m, g)| (m.clone(), generate_hints(g)))
        .collect();
    let call_graph = build_call_graph(&graphs);
    let hints = if !opts.dedup {
        hints_raw.clone()
    } else if opts.fixpoint_dedup {
        dedup_hints_fixpoint(&hints_raw, &call_graph, &model.entry_points)
    } else {
        dedup_hints(&hints_raw, &call_graph, &model.entry_points)
    };
    let elapsed = start.elapsed();
    Ok(Analysis {
        gt: analyzer.gt.clone(),
        graphs,
        hints_raw,
        hints,
        call_graph,
        build_counts: analyzer.build_counts.clone(),
        elapsed,
    })
}
