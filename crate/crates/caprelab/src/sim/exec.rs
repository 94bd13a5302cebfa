//! Structural interpreter for method bodies over concrete store objects.
//!
//! Control flow is reconstructed from scope annotations: a loop block
//! iterates once per element of the collection its first bound `arrayload`
//! reads, and a branch block executes the arm picked by the branch oracle.
//! Every object reached through an association is a demand access, routed
//! through a sink so the same interpreter drives both the latency
//! simulation and the pure access-path replay.

use std::collections::BTreeMap;
use std::rc::Rc;

use serde::Serialize;

use crate::error::SimError;
use crate::graph::build_app_type_graph;
use crate::hints::{HintMap, HintStep};
use crate::model::{
    ApplicationModel, Cardinality, InstrKind, InstrOp, IrInstruction, MethodRef, ScopeKind,
    SELF_VAR,
};

use super::prefetch::{CacheState, Dispatch, Lookup, Origin, PrefetchEngine, Trie};
use super::trace::{BranchOracle, WorkloadTrace};
use super::{FetchEvent, MethodStats, Policy, RunMetrics, StoreConfig, StoreState};

const ACTIVATION_DEPTH_LIMIT: usize = 4096;

// --- block tree ---------------------------------------------------------

#[derive(Clone, Debug)]
pub(crate) enum Block {
    Instr(usize),
    Loop {
        id: String,
        body: Vec<Block>,
        arrayloads: Vec<usize>,
    },
    Branch {
        id: String,
        arms: Vec<(String, Vec<Block>)>,
    },
}

pub(crate) fn build_blocks(instrs: &[IrInstruction]) -> Result<Vec<Block>, SimError> {
    let idxs: Vec<usize> = (0..instrs.len()).collect();
    parse_level(instrs, &idxs, 0)
}

fn parse_level(
    instrs: &[IrInstruction],
    idxs: &[usize],
    depth: usize,
) -> Result<Vec<Block>, SimError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < idxs.len() {
        let instr = &instrs[idxs[i]];
        if instr.scope_chain.len() == depth {
            out.push(Block::Instr(idxs[i]));
            i += 1;
            continue;
        }
        let frame = instr.scope_chain[depth].clone();
        let mut j = i;
        while j < idxs.len()
            && instrs[idxs[j]].scope_chain.len() > depth
            && instrs[idxs[j]].scope_chain[depth].id == frame.id
        {
            j += 1;
        }
        let group = &idxs[i..j];
        match frame.kind {
            ScopeKind::Loop => {
                let body = parse_level(instrs, group, depth + 1)?;
                let arrayloads = group
                    .iter()
                    .copied()
                    .filter(|&k| {
                        instrs[k].kind() == InstrKind::ArrayLoad
                            && innermost_loop(&instrs[k]) == Some(frame.id.as_str())
                    })
                    .collect();
                out.push(Block::Loop {
                    id: frame.id.clone(),
                    body,
                    arrayloads,
                });
            }
            ScopeKind::Branch => {
                let mut arms: Vec<(String, Vec<usize>)> = Vec::new();
                for &k in group {
                    let arm = instrs[k].scope_chain[depth]
                        .arm
                        .clone()
                        .unwrap_or_else(|| "then".to_string());
                    match arms.iter_mut().find(|(a, _)| *a == arm) {
                        Some((_, list)) => list.push(k),
                        None => arms.push((arm, vec![k])),
                    }
                }
                let arms = arms
                    .into_iter()
                    .map(|(a, list)| Ok((a, parse_level(instrs, &list, depth + 1)?)))
                    .collect::<Result<Vec<_>, SimError>>()?;
                out.push(Block::Branch {
                    id: frame.id.clone(),
                    arms,
                });
            }
        }
        i = j;
    }
    Ok(out)
}

fn innermost_loop(instr: &IrInstruction) -> Option<&str> {
    instr
        .scope_chain
        .iter()
        .rev()
        .find(|f| f.kind == ScopeKind::Loop)
        .map(|f| f.id.as_str())
}

// --- runtime values ------------------------------------------------------

/// Where a runtime value is rooted, mirroring the static graph: a
/// navigation chain from the current activation's receiver, a chain from
/// one of its parameters, or nothing the analysis can predict from.
#[derive(Clone, Debug)]
pub(crate) enum Provenance {
    Rooted(Vec<HintStep>),
    Param(usize, Vec<HintStep>),
    Unrooted,
}

impl Provenance {
    fn extend(&self, field: &str, cardinality: Cardinality) -> Provenance {
        let step = HintStep {
            field: field.to_string(),
            cardinality,
        };
        match self {
            Provenance::Rooted(p) => {
                let mut p = p.clone();
                p.push(step);
                Provenance::Rooted(p)
            }
            Provenance::Param(i, p) => {
                let mut p = p.clone();
                p.push(step);
                Provenance::Param(*i, p)
            }
            Provenance::Unrooted => Provenance::Unrooted,
        }
    }

    fn extend_many(&self, steps: &[HintStep]) -> Provenance {
        match self {
            Provenance::Rooted(p) => {
                let mut p = p.clone();
                p.extend_from_slice(steps);
                Provenance::Rooted(p)
            }
            Provenance::Param(i, p) => {
                let mut p = p.clone();
                p.extend_from_slice(steps);
                Provenance::Param(*i, p)
            }
            Provenance::Unrooted => Provenance::Unrooted,
        }
    }
}

/// Receiver and argument provenance of an activation, relative to the
/// calling frame.
pub(crate) struct CallInfo {
    pub(crate) recv_prov: Provenance,
    pub(crate) arg_provs: Vec<Provenance>,
}

#[derive(Clone, Debug)]
enum RtVal {
    Obj(u64, Provenance),
    Coll(u64, String, Provenance),
    Prim,
    Null,
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return(RtVal),
}

/// One demand-visible event; the sequence (without times) must match
/// across prefetch policies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum DemandEvent {
    Read {
        oid: u64,
        owner: Option<u64>,
        field: Option<String>,
    },
    Branch {
        id: String,
        arm: Option<String>,
    },
}

pub(crate) trait ExecSink {
    fn enter_method(&mut self, m: &MethodRef, recv: u64, call: &CallInfo);
    fn exit_method(&mut self);
    /// A demand access. `nav_prov` is the provenance of the navigation
    /// itself (source provenance extended by the field), or
    /// [`Provenance::Unrooted`] whenever the static analysis would not
    /// predict this navigation.
    fn demand_object(
        &mut self,
        oid: u64,
        via: Option<(u64, &str, Cardinality)>,
        nav_prov: &Provenance,
    );
    fn branch_outcome(&mut self, id: &str, arm: Option<&str>);
}

// --- interpreter ---------------------------------------------------------

pub(crate) struct Interp<'a, S: ExecSink> {
    model: &'a ApplicationModel,
    store: &'a StoreState,
    pub(crate) oracle: BranchOracle,
    pub(crate) sink: S,
    blocks: BTreeMap<MethodRef, Rc<Vec<Block>>>,
    loop_indices: Vec<(String, usize)>,
}

impl<'a, S: ExecSink> Interp<'a, S> {
    pub(crate) fn new(
        model: &'a ApplicationModel,
        store: &'a StoreState,
        oracle: BranchOracle,
        sink: S,
    ) -> Self {
        Self {
            model,
            store,
            oracle,
            sink,
            blocks: BTreeMap::new(),
            loop_indices: Vec::new(),
        }
    }

    pub(crate) fn run_step(
        &mut self,
        step: usize,
        m: &MethodRef,
        root: u64,
    ) -> Result<(), SimError> {
        self.oracle.begin_step(step);
        self.sink.demand_object(root, None, &Provenance::Unrooted);
        let call = CallInfo {
            recv_prov: Provenance::Unrooted,
            arg_provs: vec![],
        };
        self.activate(m, root, &[], &call, 0)?;
        Ok(())
    }

    fn activate(
        &mut self,
        m: &MethodRef,
        recv: u64,
        args: &[RtVal],
        call: &CallInfo,
        depth: usize,
    ) -> Result<RtVal, SimError> {
        if depth > ACTIVATION_DEPTH_LIMIT {
            return Err(SimError::Trace(format!(
                "activation depth limit exceeded in {m}"
            )));
        }
        let decl = self
            .model
            .method_decl(m)
            .ok_or_else(|| SimError::Trace(format!("trace invokes undeclared method {m}")))?;
        let blocks = match self.blocks.get(m) {
            Some(b) => b.clone(),
            None => {
                let b = Rc::new(build_blocks(&decl.instructions)?);
                self.blocks.insert(m.clone(), b.clone());
                b
            }
        };
        self.sink.enter_method(m, recv, call);
        let mut vars: BTreeMap<String, RtVal> = BTreeMap::new();
        vars.insert(
            SELF_VAR.to_string(),
            RtVal::Obj(recv, Provenance::Rooted(vec![])),
        );
        for i in 0..decl.params.len() {
            // inside the callee, a parameter roots its own chains
            let val = match args.get(i) {
                Some(RtVal::Obj(oid, _)) => RtVal::Obj(*oid, Provenance::Param(i, vec![])),
                Some(RtVal::Coll(oid, field, _)) => {
                    RtVal::Coll(*oid, field.clone(), Provenance::Unrooted)
                }
                Some(other) => other.clone(),
                None => RtVal::Null,
            };
            vars.insert(format!("p{i}"), val);
        }
        // decl borrows the model, not the interpreter, so no clone needed
        let instrs = &decl.instructions;
        let flow = self.exec_blocks(&blocks, instrs, &mut vars, depth)?;
        self.sink.exit_method();
        Ok(match flow {
            Flow::Return(v) => v,
            _ => RtVal::Null,
        })
    }

    fn exec_blocks(
        &mut self,
        blocks: &[Block],
        instrs: &[IrInstruction],
        vars: &mut BTreeMap<String, RtVal>,
        depth: usize,
    ) -> Result<Flow, SimError> {
        for block in blocks {
            match block {
                Block::Instr(i) => match self.exec_instr(&instrs[*i], vars, depth)? {
                    Flow::Normal => {}
                    flow => return Ok(flow),
                },
                Block::Loop {
                    id,
                    body,
                    arrayloads,
                } => {
                    let iterations = match arrayloads.first() {
                        Some(&primary) => {
                            let coll_var = instrs[primary].used_vars.first();
                            match coll_var.and_then(|v| vars.get(v)) {
                                Some(RtVal::Coll(owner, field, _)) => self
                                    .store
                                    .record(*owner)
                                    .and_then(|r| r.collections.get(field))
                                    .map(|v| v.len())
                                    .unwrap_or(0),
                                _ => 0,
                            }
                        }
                        None => 1,
                    };
                    'iter: for idx in 0..iterations {
                        self.loop_indices.push((id.clone(), idx));
                        let flow = self.exec_blocks(body, instrs, vars, depth);
                        self.loop_indices.pop();
                        match flow? {
                            Flow::Normal | Flow::Continue => {}
                            Flow::Break => break 'iter,
                            ret @ Flow::Return(_) => return Ok(ret),
                        }
                    }
                }
                Block::Branch { id, arms } => {
                    let two_way = arms.iter().all(|(a, _)| a == "then" || a == "else");
                    let chosen: Option<&str> = if two_way {
                        let label = if self.oracle.draw_bool(id) {
                            "then"
                        } else {
                            "else"
                        };
                        arms.iter().find(|(a, _)| a == label).map(|_| label)
                    } else {
                        let idx = self.oracle.draw_index(id, arms.len());
                        Some(arms[idx].0.as_str())
                    };
                    self.sink.branch_outcome(id, chosen);
                    if let Some(label) = chosen {
                        let label = label.to_string();
                        let (_, body) = arms.iter().find(|(a, _)| *a == label).expect("chosen arm");
                        match self.exec_blocks(body, instrs, vars, depth)? {
                            Flow::Normal => {}
                            flow => return Ok(flow),
                        }
                    }
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_instr(
        &mut self,
        instr: &IrInstruction,
        vars: &mut BTreeMap<String, RtVal>,
        depth: usize,
    ) -> Result<Flow, SimError> {
        match &instr.op {
            InstrOp::GetField {
                field_name,
                owner_type,
                ..
            } => {
                let owner = instr.used_vars.first().and_then(|v| vars.get(v)).cloned();
                let val = match owner {
                    Some(RtVal::Obj(oid, prov)) => {
                        let field = self
                            .model
                            .type_decl(owner_type)
                            .and_then(|t| t.field(field_name))
                            .ok_or_else(|| {
                                SimError::Trace(format!("unknown field {owner_type}.{field_name}"))
                            })?;
                        // only associations onto persistent types are
                        // statically predictable navigations
                        let predictable = self
                            .model
                            .type_decl(&field.target_type)
                            .map(|t| t.persistent)
                            .unwrap_or(false);
                        match field.cardinality {
                            Cardinality::Collection => {
                                let p = if predictable {
                                    prov
                                } else {
                                    Provenance::Unrooted
                                };
                                RtVal::Coll(oid, field_name.clone(), p)
                            }
                            Cardinality::Single
                                if self.model.type_decl(&field.target_type).is_some() =>
                            {
                                let target = self
                                    .store
                                    .record(oid)
                                    .and_then(|r| r.singles.get(field_name).copied().flatten());
                                match target {
                                    Some(t) => {
                                        let p = if predictable {
                                            prov.extend(field_name, Cardinality::Single)
                                        } else {
                                            Provenance::Unrooted
                                        };
                                        self.sink.demand_object(
                                            t,
                                            Some((oid, field_name.as_str(), Cardinality::Single)),
                                            &p,
                                        );
                                        RtVal::Obj(t, p)
                                    }
                                    None => RtVal::Null,
                                }
                            }
                            Cardinality::Single => RtVal::Prim,
                        }
                    }
                    Some(RtVal::Null) | None => RtVal::Null,
                    Some(_) => {
                        return Err(SimError::Trace(format!(
                            "getfield on non-object value at ii={}",
                            instr.ii
                        )))
                    }
                };
                define(vars, instr, val);
            }
            InstrOp::ArrayLoad => {
                let coll = instr.used_vars.first().and_then(|v| vars.get(v)).cloned();
                let in_loop = innermost_loop(instr).is_some();
                let idx = innermost_loop(instr)
                    .and_then(|id| {
                        self.loop_indices
                            .iter()
                            .rev()
                            .find(|(l, _)| l == id)
                            .map(|(_, i)| *i)
                    })
                    .unwrap_or(0);
                let val = match coll {
                    Some(RtVal::Coll(owner, field, prov)) => {
                        let elem = self
                            .store
                            .record(owner)
                            .and_then(|r| r.collections.get(&field))
                            .and_then(|v| v.get(idx).copied());
                        match elem {
                            Some(e) => {
                                // element access is a predictable
                                // navigation only inside a loop
                                let p = if in_loop {
                                    prov.extend(&field, Cardinality::Collection)
                                } else {
                                    Provenance::Unrooted
                                };
                                self.sink.demand_object(
                                    e,
                                    Some((owner, field.as_str(), Cardinality::Collection)),
                                    &p,
                                );
                                RtVal::Obj(e, p)
                            }
                            None => RtVal::Null,
                        }
                    }
                    _ => RtVal::Null,
                };
                define(vars, instr, val);
            }
            InstrOp::InvokeMethod {
                owner_type,
                method_name,
            } => {
                let callee = MethodRef::new(owner_type.clone(), method_name.clone());
                let recv = instr.used_vars.first().and_then(|v| vars.get(v)).cloned();
                let val = match recv {
                    Some(RtVal::Obj(oid, recv_prov)) => {
                        let args: Vec<RtVal> = instr
                            .used_vars
                            .iter()
                            .skip(1)
                            .map(|v| vars.get(v).cloned().unwrap_or(RtVal::Null))
                            .collect();
                        let call = CallInfo {
                            recv_prov: recv_prov.clone(),
                            arg_provs: args
                                .iter()
                                .map(|a| match a {
                                    RtVal::Obj(_, p) => p.clone(),
                                    _ => Provenance::Unrooted,
                                })
                                .collect(),
                        };
                        let ret = self.activate(&callee, oid, &args, &call, depth + 1)?;
                        // rebase the callee-relative return provenance into
                        // this frame, mirroring return-node chaining and
                        // parameter binding
                        match ret {
                            RtVal::Obj(o, p) => {
                                RtVal::Obj(o, rebase(&p, &call.recv_prov, &call.arg_provs))
                            }
                            // a returned collection handle is not a
                            // navigation node; treat it as unrooted
                            RtVal::Coll(o, f, _) => RtVal::Coll(o, f, Provenance::Unrooted),
                            other => other,
                        }
                    }
                    // calls on null or primitive receivers do nothing
                    _ => RtVal::Null,
                };
                define(vars, instr, val);
            }
            InstrOp::Return => {
                let v = instr
                    .used_vars
                    .first()
                    .and_then(|u| vars.get(u))
                    .cloned()
                    .unwrap_or(RtVal::Null);
                return Ok(Flow::Return(v));
            }
            InstrOp::Break => return Ok(Flow::Break),
            InstrOp::Continue => return Ok(Flow::Continue),
            InstrOp::ConditionalBranch { .. } | InstrOp::Goto | InstrOp::Noop => {}
        }
        Ok(Flow::Normal)
    }
}

fn define(vars: &mut BTreeMap<String, RtVal>, instr: &IrInstruction, val: RtVal) {
    if let Some(def) = &instr.def_var {
        vars.insert(def.clone(), val);
    }
}

/// Express a callee-relative provenance in the caller's frame.
fn rebase(ret: &Provenance, recv_prov: &Provenance, arg_provs: &[Provenance]) -> Provenance {
    match ret {
        Provenance::Rooted(p) => recv_prov.extend_many(p),
        Provenance::Param(i, p) => arg_provs
            .get(*i)
            .unwrap_or(&Provenance::Unrooted)
            .extend_many(p),
        Provenance::Unrooted => Provenance::Unrooted,
    }
}

// --- latency-simulation sink ---------------------------------------------

struct SimSink<'a> {
    store: &'a StoreState,
    cfg: &'a StoreConfig,
    cache: CacheState,
    engine: PrefetchEngine,
    capre_tries: BTreeMap<MethodRef, Rc<Trie>>,
    rop_tries: BTreeMap<String, Rc<Trie>>,
    clock: u64,
    metrics: RunMetrics,
    method_stack: Vec<MethodRef>,
    demand_log: Option<Vec<DemandEvent>>,
}

impl ExecSink for SimSink<'_> {
    fn enter_method(&mut self, m: &MethodRef, recv: u64, _call: &CallInfo) {
        self.metrics
            .per_method
            .entry(m.to_string())
            .or_default()
            .activations += 1;
        self.method_stack.push(m.clone());
        if self.cfg.policy == Policy::Capre {
            if let Some(trie) = self.capre_tries.get(m) {
                self.engine.enqueue_shared(recv, trie.clone(), self.clock);
            }
        }
    }

    fn exit_method(&mut self) {
        self.method_stack.pop();
    }

    fn demand_object(
        &mut self,
        oid: u64,
        via: Option<(u64, &str, Cardinality)>,
        _nav_prov: &Provenance,
    ) {
        self.engine
            .advance_to(self.clock, &mut self.cache, self.store);
        let stats: &mut MethodStats = self
            .metrics
            .per_method
            .entry(
                self.method_stack
                    .last()
                    .map(|m| m.to_string())
                    .unwrap_or_default(),
            )
            .or_default();
        match self.cache.lookup(oid, self.clock) {
            Lookup::Complete => {
                self.metrics.hits += 1;
                stats.hits += 1;
                if self.cache.mark_demand_use(oid) {
                    self.metrics.prefetched_used += 1;
                }
                self.cache.touch(oid);
                self.clock += self.cfg.local_hit_latency;
            }
            Lookup::InFlight { start, done } => {
                self.metrics.misses += 1;
                stats.misses += 1;
                if self.cache.mark_demand_use(oid) {
                    self.metrics.prefetched_used += 1;
                }
                self.cache.touch(oid);
                if start <= self.clock {
                    // join the started fetch instead of issuing another;
                    // its remaining time is at most one full fetch
                    self.clock = done;
                } else {
                    // the prefetch is still queued on a busy channel: the
                    // demand path issues its own fetch and wins
                    let demand_done = self.clock + self.cfg.remote_fetch_latency;
                    self.cache.overtake(oid, self.clock, demand_done);
                    self.engine.log_demand_fetch(
                        oid,
                        self.clock,
                        demand_done,
                        self.store.node_of(oid),
                    );
                    self.clock = demand_done;
                }
            }
            Lookup::Absent => {
                self.metrics.misses += 1;
                stats.misses += 1;
                let start = self.clock;
                let done = start + self.cfg.remote_fetch_latency;
                self.cache.insert(oid, start, done, Origin::Demand, start);
                self.engine
                    .log_demand_fetch(oid, start, done, self.store.node_of(oid));
                self.clock = done;
                if let Policy::Rop(_) = self.cfg.policy {
                    let type_name = self
                        .store
                        .record(oid)
                        .map(|r| r.type_name.clone())
                        .unwrap_or_default();
                    if let Some(trie) = self.rop_tries.get(&type_name) {
                        self.engine.enqueue_shared(oid, trie.clone(), start);
                    }
                }
            }
        }
        if let Some(log) = &mut self.demand_log {
            log.push(DemandEvent::Read {
                oid,
                owner: via.map(|(o, _, _)| o),
                field: via.map(|(_, f, _)| f.to_string()),
            });
        }
    }

    fn branch_outcome(&mut self, id: &str, arm: Option<&str>) {
        if let Some(log) = &mut self.demand_log {
            log.push(DemandEvent::Branch {
                id: id.to_string(),
                arm: arm.map(str::to_string),
            });
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub demand_log: Vec<DemandEvent>,
    pub fetch_events: Vec<FetchEvent>,
}

/// Execute a workload under one policy and return its metrics.
pub fn run_workload(
    model: &ApplicationModel,
    hints: Option<&HintMap>,
    store: &StoreState,
    trace: &WorkloadTrace,
    cfg: &StoreConfig,
) -> Result<RunMetrics, SimError> {
    run_inner(model, hints, store, trace, cfg, false).map(|out| out.metrics)
}

/// As [`run_workload`], also returning the demand-read sequence and the
/// fetch event log.
pub fn run_workload_logged(
    model: &ApplicationModel,
    hints: Option<&HintMap>,
    store: &StoreState,
    trace: &WorkloadTrace,
    cfg: &StoreConfig,
) -> Result<RunOutput, SimError> {
    run_inner(model, hints, store, trace, cfg, true)
}

fn run_inner(
    model: &ApplicationModel,
    hints: Option<&HintMap>,
    store: &StoreState,
    trace: &WorkloadTrace,
    cfg: &StoreConfig,
    logged: bool,
) -> Result<RunOutput, SimError> {
    for step in &trace.steps {
        let rec = store
            .record(step.root)
            .ok_or_else(|| SimError::Trace(format!("root oid {} not in store", step.root)))?;
        if rec.type_name != step.method.owner {
            return Err(SimError::Trace(format!(
                "root {} has type {}, step invokes {}",
                step.root, rec.type_name, step.method
            )));
        }
        if model.method_decl(&step.method).is_none() {
            return Err(SimError::Trace(format!(
                "step invokes undeclared {}",
                step.method
            )));
        }
    }

    let mut capre_tries = BTreeMap::new();
    if cfg.policy == Policy::Capre {
        let hints = hints.ok_or_else(|| SimError::Hint("capre policy requires hints".into()))?;
        crate::hints::validate_hints(hints, model).map_err(SimError::Hint)?;
        for (m, set) in hints {
            if !set.hints.is_empty() {
                capre_tries.insert(m.clone(), Rc::new(Trie::from_hints(&set.hints)));
            }
        }
    }
    let mut rop_tries = BTreeMap::new();
    if let Policy::Rop(depth) = cfg.policy {
        let gt = build_app_type_graph(model);
        for t in &model.types {
            let set = crate::hints::rop_hints(&t.name, depth, &gt)
                .map_err(|e| SimError::Hint(e.to_string()))?;
            if !set.hints.is_empty() {
                rop_tries.insert(t.name.clone(), Rc::new(Trie::from_hints(&set.hints)));
            }
        }
    }

    // the analysis-driven policy schedules prefetching methods on the
    // injected single-thread executor; the schema baseline prefetches
    // store-side, independently per miss
    let dispatch = match cfg.policy {
        Policy::Capre => Dispatch::SerialExecutor,
        _ => Dispatch::Concurrent,
    };
    let sink = SimSink {
        store,
        cfg,
        cache: CacheState::new(cfg.cache_capacity),
        engine: PrefetchEngine::new(cfg, dispatch, logged),
        capre_tries,
        rop_tries,
        clock: 0,
        metrics: RunMetrics {
            policy: cfg.policy.to_string(),
            ..Default::default()
        },
        method_stack: Vec::new(),
        demand_log: logged.then(Vec::new),
    };
    let oracle = BranchOracle::new(trace.branch.clone(), cfg.rng_seed);
    let mut interp = Interp::new(model, store, oracle, sink);
    for (i, step) in trace.steps.iter().enumerate() {
        interp.run_step(i, &step.method, step.root)?;
    }
    let mut sink = interp.sink;
    let mut metrics = sink.metrics;
    metrics.prefetched_total = sink.engine.prefetched_total;
    metrics.prefetched_unused = metrics.prefetched_total - metrics.prefetched_used;
    metrics.completion_time = sink.clock;
    crate::logging::debug(format!(
        "{}: {} demand accesses ({} hits), {} prefetched, completion {}",
        metrics.policy,
        metrics.demand_accesses(),
        metrics.hits,
        metrics.prefetched_total,
        metrics.completion_time
    ));
    Ok(RunOutput {
        metrics,
        demand_log: sink.demand_log.take().unwrap_or_default(),
        fetch_events: sink.engine.take_events(),
    })
}
