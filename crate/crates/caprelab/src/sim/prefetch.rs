//! Background prefetch machinery.
//!
//! One scheduler processes queued hint-resolution tasks in FIFO order, one
//! task at a time (a single-thread executor). Within a task, resolution
//! walks the hint trie: a step's fetch starts only after its parent object
//! is available (chains are sequential), while sibling steps and
//! collection elements fan out across the per-node fetch channels and
//! overlap when their objects live on different nodes or channels.
//!
//! Demand fetches from the main cursor bypass the channels: they model the
//! application's own synchronous request, so prefetch traffic can never
//! delay a demand access beyond its plain miss cost.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, VecDeque};

use serde::Serialize;

use crate::hints::{Hint, HintStep};
use crate::model::Cardinality;

use super::{StoreConfig, StoreState};

// --- hint trie ---------------------------------------------------------

#[derive(Clone, Debug)]
pub(crate) struct Trie {
    nodes: Vec<TrieNode>,
}

#[derive(Clone, Debug)]
struct TrieNode {
    step: Option<HintStep>,
    children: Vec<usize>,
}

impl Trie {
    pub(crate) fn from_hints<'a>(hints: impl IntoIterator<Item = &'a Hint>) -> Self {
        let mut trie = Trie {
            nodes: vec![TrieNode {
                step: None,
                children: Vec::new(),
            }],
        };
        for hint in hints {
            let mut cur = 0usize;
            for step in &hint.path {
                cur = trie.child(cur, step);
            }
        }
        trie.sort();
        trie
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.nodes[0].children.is_empty()
    }

    fn child(&mut self, parent: usize, step: &HintStep) -> usize {
        if let Some(&c) = self.nodes[parent]
            .children
            .iter()
            .find(|&&c| self.nodes[c].step.as_ref() == Some(step))
        {
            return c;
        }
        let id = self.nodes.len();
        self.nodes.push(TrieNode {
            step: Some(step.clone()),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn sort(&mut self) {
        for i in 0..self.nodes.len() {
            let mut kids = self.nodes[i].children.clone();
            kids.sort_by(|a, b| self.nodes[*a].step.cmp(&self.nodes[*b].step));
            self.nodes[i].children = kids;
        }
    }
}

// --- client cache ------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Origin {
    Demand,
    Prefetch,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Lookup {
    /// Loaded and resident at the query time.
    Complete,
    /// A fetch is in flight; started and completes at the given times. A
    /// fetch still queued on a busy channel has `start` in the future.
    InFlight {
        start: u64,
        done: u64,
    },
    Absent,
}

struct Entry {
    start: u64,
    load_done: u64,
    origin: Origin,
    used_counted: bool,
    touch: u64,
}

/// Client-side cache keyed by oid. Unbounded unless a capacity is set, in
/// which case completed entries are evicted least-recently-touched first.
pub(crate) struct CacheState {
    entries: HashMap<u64, Entry>,
    capacity: Option<usize>,
    lru: BTreeSet<(u64, u64)>,
    touch_seq: u64,
}

impl CacheState {
    pub(crate) fn new(capacity: Option<usize>) -> Self {
        Self {
            entries: HashMap::new(),
            capacity,
            lru: BTreeSet::new(),
            touch_seq: 0,
        }
    }

    pub(crate) fn lookup(&self, oid: u64, now: u64) -> Lookup {
        match self.entries.get(&oid) {
            None => Lookup::Absent,
            Some(e) if e.load_done <= now => Lookup::Complete,
            Some(e) => Lookup::InFlight {
                start: e.start,
                done: e.load_done,
            },
        }
    }

    pub(crate) fn insert(
        &mut self,
        oid: u64,
        start: u64,
        load_done: u64,
        origin: Origin,
        now: u64,
    ) {
        self.touch_seq += 1;
        self.entries.insert(
            oid,
            Entry {
                start,
                load_done,
                origin,
                used_counted: false,
                touch: self.touch_seq,
            },
        );
        self.lru.insert((self.touch_seq, oid));
        self.maybe_evict(now);
    }

    /// A demand fetch overtakes a queued prefetch that has not started:
    /// the entry completes at the demand fetch's time instead.
    pub(crate) fn overtake(&mut self, oid: u64, start: u64, load_done: u64) {
        if let Some(e) = self.entries.get_mut(&oid) {
            e.start = start;
            e.load_done = load_done;
        }
    }

    pub(crate) fn touch(&mut self, oid: u64) {
        if let Some(e) = self.entries.get_mut(&oid) {
            self.lru.remove(&(e.touch, oid));
            self.touch_seq += 1;
            e.touch = self.touch_seq;
            self.lru.insert((self.touch_seq, oid));
        }
    }

    /// Returns true the first time a prefetched entry is demand-accessed.
    pub(crate) fn mark_demand_use(&mut self, oid: u64) -> bool {
        match self.entries.get_mut(&oid) {
            Some(e) if e.origin == Origin::Prefetch && !e.used_counted => {
                e.used_counted = true;
                true
            }
            _ => false,
        }
    }

    fn maybe_evict(&mut self, now: u64) {
        let Some(cap) = self.capacity else { return };
        while self.entries.len() > cap {
            // evict the least-recently-touched completed entry; in-flight
            // entries stay
            let victim = self
                .lru
                .iter()
                .find(|(touch, oid)| {
                    self.entries
                        .get(oid)
                        .map(|e| e.touch == *touch && e.load_done <= now)
                        .unwrap_or(false)
                })
                .copied();
            match victim {
                Some((touch, oid)) => {
                    self.lru.remove(&(touch, oid));
                    self.entries.remove(&oid);
                }
                None => break,
            }
        }
    }
}

// --- fetch events ------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct FetchEvent {
    pub t: u64,
    pub event: &'static str,
    pub oid: u64,
    pub node: u32,
    pub origin: &'static str,
}

// --- engine ------------------------------------------------------------

/// How queued tasks are dispatched.
///
/// The analysis-driven policy models the injected single-thread executor:
/// one prefetching method runs at a time, in submission order. The
/// schema-based baseline is store-side: each miss's prefetch proceeds
/// independently, contending only for the node channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Dispatch {
    SerialExecutor,
    Concurrent,
}

struct Task {
    enqueue_t: u64,
    root: u64,
    trie: std::rc::Rc<Trie>,
}

struct Running {
    trie: std::rc::Rc<Trie>,
    pending: usize,
    completion: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct StepReady {
    task: usize,
    trie_idx: usize,
    oid: u64,
}

pub(crate) struct PrefetchEngine {
    dispatch: Dispatch,
    queue: VecDeque<Task>,
    active: BTreeMap<usize, Running>,
    next_task_id: usize,
    micro: BinaryHeap<Reverse<(u64, u64, StepReady)>>,
    seq: u64,
    channels: Vec<Vec<u64>>,
    prev_task_done: u64,
    remote_latency: u64,
    scheduler_overhead: u64,
    pub(crate) prefetched_total: u64,
    pub(crate) events: Option<Vec<FetchEvent>>,
}

impl PrefetchEngine {
    pub(crate) fn new(cfg: &StoreConfig, dispatch: Dispatch, record_events: bool) -> Self {
        Self {
            dispatch,
            queue: VecDeque::new(),
            active: BTreeMap::new(),
            next_task_id: 0,
            micro: BinaryHeap::new(),
            seq: 0,
            channels: vec![vec![0; cfg.channels_per_node as usize]; cfg.num_nodes as usize],
            prev_task_done: 0,
            remote_latency: cfg.remote_fetch_latency,
            scheduler_overhead: cfg.scheduler_overhead,
            prefetched_total: 0,
            events: record_events.then(Vec::new),
        }
    }

    pub(crate) fn enqueue_shared(&mut self, root: u64, trie: std::rc::Rc<Trie>, now: u64) {
        if trie.is_empty() {
            return;
        }
        self.queue.push_back(Task {
            enqueue_t: now,
            root,
            trie,
        });
    }

    fn next_start(&self) -> Option<u64> {
        let task = self.queue.front()?;
        let gate = match self.dispatch {
            // one prefetching method at a time, submission order
            Dispatch::SerialExecutor if !self.active.is_empty() => return None,
            Dispatch::SerialExecutor => task.enqueue_t.max(self.prev_task_done),
            Dispatch::Concurrent => task.enqueue_t,
        };
        Some(gate + self.scheduler_overhead)
    }

    /// Process all prefetch micro-steps up to virtual time `t`, so the
    /// caller sees a causally consistent cache.
    pub(crate) fn advance_to(&mut self, t: u64, cache: &mut CacheState, store: &StoreState) {
        loop {
            let next_start = self.next_start().filter(|s| *s <= t);
            let next_micro = self
                .micro
                .peek()
                .map(|Reverse((time, _, _))| *time)
                .filter(|m| *m <= t);
            let start_first = match (next_start, next_micro) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(s), Some(m)) => s <= m,
            };
            if start_first {
                let start = next_start.expect("checked");
                let task = self.queue.pop_front().expect("non-empty");
                // the task root must be resident before resolution
                let avail = match cache.lookup(task.root, start) {
                    Lookup::Complete => start,
                    Lookup::InFlight { done, .. } => done,
                    Lookup::Absent => self.issue(task.root, start, cache, store),
                };
                let id = self.next_task_id;
                self.next_task_id += 1;
                self.active.insert(
                    id,
                    Running {
                        trie: task.trie,
                        pending: 1,
                        completion: avail,
                    },
                );
                self.push(
                    avail,
                    StepReady {
                        task: id,
                        trie_idx: 0,
                        oid: task.root,
                    },
                );
            } else {
                let Reverse((time, _, step)) = self.micro.pop().expect("peeked");
                self.process(time, step, cache, store);
            }
        }
    }

    fn process(&mut self, now: u64, step: StepReady, cache: &mut CacheState, store: &StoreState) {
        let trie = self.active[&step.task].trie.clone();
        let mut scheduled = 0usize;
        let mut local_max = now;
        let record = store.record(step.oid);
        for &child_idx in &trie.nodes[step.trie_idx].children {
            let child = &trie.nodes[child_idx];
            let child_step = child.step.as_ref().expect("non-root trie node");
            let targets: Vec<u64> = match (child_step.cardinality, record) {
                (Cardinality::Single, Some(rec)) => rec
                    .singles
                    .get(&child_step.field)
                    .copied()
                    .flatten()
                    .into_iter()
                    .collect(),
                (Cardinality::Collection, Some(rec)) => rec
                    .collections
                    .get(&child_step.field)
                    .cloned()
                    .unwrap_or_default(),
                (_, None) => Vec::new(),
            };
            for target in targets {
                let avail = match cache.lookup(target, now) {
                    Lookup::Complete => now,
                    Lookup::InFlight { done, .. } => done,
                    Lookup::Absent => self.issue(target, now, cache, store),
                };
                if child.children.is_empty() {
                    local_max = local_max.max(avail);
                } else {
                    self.push(
                        avail,
                        StepReady {
                            task: step.task,
                            trie_idx: child_idx,
                            oid: target,
                        },
                    );
                    scheduled += 1;
                }
            }
        }
        let running = self.active.get_mut(&step.task).expect("running task");
        running.completion = running.completion.max(local_max);
        running.pending = running.pending - 1 + scheduled;
        if running.pending == 0 {
            self.prev_task_done = self.prev_task_done.max(running.completion);
            self.active.remove(&step.task);
        }
    }

    /// Issue a prefetch fetch through the object's node channels.
    fn issue(
        &mut self,
        oid: u64,
        not_before: u64,
        cache: &mut CacheState,
        store: &StoreState,
    ) -> u64 {
        let node = store.node_of(oid) as usize;
        let lanes = &mut self.channels[node];
        let lane = (0..lanes.len())
            .min_by_key(|&i| lanes[i])
            .expect("at least one channel");
        let start = lanes[lane].max(not_before);
        let done = start + self.remote_latency;
        lanes[lane] = done;
        cache.insert(oid, start, done, Origin::Prefetch, not_before);
        self.prefetched_total += 1;
        if let Some(events) = &mut self.events {
            events.push(FetchEvent {
                t: start,
                event: "fetch_start",
                oid,
                node: node as u32,
                origin: "prefetch",
            });
            events.push(FetchEvent {
                t: done,
                event: "fetch_complete",
                oid,
                node: node as u32,
                origin: "prefetch",
            });
        }
        done
    }

    fn push(&mut self, time: u64, step: StepReady) {
        self.seq += 1;
        self.micro.push(Reverse((time, self.seq, step)));
    }

    pub(crate) fn log_demand_fetch(&mut self, oid: u64, start: u64, done: u64, node: u32) {
        if let Some(events) = &mut self.events {
            events.push(FetchEvent {
                t: start,
                event: "fetch_start",
                oid,
                node,
                origin: "demand",
            });
            events.push(FetchEvent {
                t: done,
                event: "fetch_complete",
                oid,
                node,
                origin: "demand",
            });
        }
    }

    pub(crate) fn take_events(&mut self) -> Vec<FetchEvent> {
        let mut ev = self.events.take().unwrap_or_default();
        ev.sort_by_key(|e| (e.t, e.oid, e.event));
        ev
    }
}
