//! Prefetching hints.
//!
//! A hint is a field path rooted at a method's receiver type; resolving it
//! against a live object predicts the objects the method will access. Hint
//! sets are derived per method from the augmented graph (maximal
//! root-to-leaf paths; prefixes are implied loads), then thinned by the
//! caller-based dedup rule. A schema-only baseline generator produces the
//! referenced-objects predictor's sets for comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::AnalysisError;
use crate::graph::{AppTypeGraph, AugmentedTypeGraph};
use crate::model::{ApplicationModel, Cardinality, MethodRef};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HintStep {
    pub field: String,
    pub cardinality: Cardinality,
}

impl HintStep {
    pub fn single(field: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            cardinality: Cardinality::Single,
        }
    }

    pub fn collection(field: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            cardinality: Cardinality::Collection,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hint {
    pub source_type: String,
    pub path: Vec<HintStep>,
}

impl Hint {
    /// Path with `@collection` markers, the wire format.
    pub fn marked(&self) -> String {
        self.path
            .iter()
            .map(|s| match s.cardinality {
                Cardinality::Single => s.field.clone(),
                Cardinality::Collection => format!("{}@collection", s.field),
            })
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Plain dotted path without cardinality markers.
    pub fn plain(&self) -> String {
        self.path
            .iter()
            .map(|s| s.field.as_str())
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_marked(source_type: &str, text: &str) -> Result<Self, String> {
        let mut path = Vec::new();
        for part in text.split('.') {
            if part.is_empty() {
                return Err(format!("empty step in hint path `{text}`"));
            }
            match part.strip_suffix("@collection") {
                Some(field) => path.push(HintStep::collection(field)),
                None => path.push(HintStep::single(part)),
            }
        }
        Ok(Hint {
            source_type: source_type.to_string(),
            path,
        })
    }

    /// Check the path is a valid association walk from its source type.
    pub fn validate(&self, g: &AppTypeGraph) -> Result<(), String> {
        let mut ty = self.source_type.clone();
        if self.path.is_empty() {
            return Err("hint path is empty".to_string());
        }
        for step in &self.path {
            match g.lookup(&ty, &step.field) {
                Some((target, card)) if *card == step.cardinality => ty = target.clone(),
                Some((_, card)) => {
                    return Err(format!(
                        "step `{}` of `{}` has cardinality {:?}, hint says {:?}",
                        step.field,
                        self.marked(),
                        card,
                        step.cardinality
                    ))
                }
                None => {
                    return Err(format!(
                        "no association `{ty}.{}` for hint `{}`",
                        step.field,
                        self.marked()
                    ))
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.marked())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HintSet {
    pub method: MethodRef,
    pub hints: BTreeSet<Hint>,
}

impl HintSet {
    pub fn empty(method: MethodRef) -> Self {
        Self {
            method,
            hints: BTreeSet::new(),
        }
    }

    pub fn plain_paths(&self) -> BTreeSet<String> {
        self.hints.iter().map(Hint::plain).collect()
    }
}

pub type HintMap = BTreeMap<MethodRef, HintSet>;

/// One hint per maximal receiver-rooted path of the augmented graph.
/// Branch-dependent navigations of the method itself are included (both
/// branch arms are assumed taken); parameter-rooted subtrees surface only
/// after being re-rooted into callers during augmentation.
pub fn generate_hints(ag: &AugmentedTypeGraph) -> HintSet {
    let mut paths: Vec<Vec<HintStep>> = Vec::new();
    let mut stack: Vec<HintStep> = Vec::new();
    collect_paths(ag, ag.root, &mut stack, &mut paths);
    let hints = normalize_prefixes(paths)
        .into_iter()
        .map(|path| Hint {
            source_type: ag.method.owner.clone(),
            path,
        })
        .collect();
    HintSet {
        method: ag.method.clone(),
        hints,
    }
}

fn collect_paths(
    ag: &AugmentedTypeGraph,
    node: usize,
    stack: &mut Vec<HintStep>,
    out: &mut Vec<Vec<HintStep>>,
) {
    let children = ag.children(node);
    if children.is_empty() {
        if !stack.is_empty() {
            out.push(stack.clone());
        }
        return;
    }
    for child in children {
        let n = ag.node(child);
        let field = n.via_field.clone().unwrap_or_default();
        stack.push(HintStep {
            field,
            cardinality: n.cardinality,
        });
        collect_paths(ag, child, stack, out);
        stack.pop();
    }
}

/// Drop paths that are strict prefixes of another path in the set
/// (possible when a collection is iterated twice at different depths).
fn normalize_prefixes(paths: Vec<Vec<HintStep>>) -> BTreeSet<Vec<HintStep>> {
    let set: BTreeSet<Vec<HintStep>> = paths.into_iter().collect();
    set.iter()
        .filter(|p| {
            !set.iter()
                .any(|other| other.len() > p.len() && other.starts_with(p))
        })
        .cloned()
        .collect()
}

/// True iff `path` is a prefix of (or equal to) some hint path in `set`.
pub fn path_implied(path: &[HintStep], set: &BTreeSet<Hint>) -> bool {
    set.iter()
        .any(|h| h.path.len() >= path.len() && h.path[..path.len()] == *path)
}

/// All prefixes of all hint paths, the set of implied loads.
pub fn prefix_closure<'a>(hints: impl IntoIterator<Item = &'a Hint>) -> BTreeSet<Vec<HintStep>> {
    let mut out = BTreeSet::new();
    for h in hints {
        for len in 1..=h.path.len() {
            out.insert(h.path[..len].to_vec());
        }
    }
    out
}

/// Who invokes whom. Edges correspond exactly to `invokemethod`
/// instructions on user-defined methods; each edge keeps the receiver path
/// of its call site for hint re-rooting.
#[derive(Clone, Debug, Default)]
pub struct CallGraph {
    pub callers: BTreeMap<MethodRef, BTreeSet<MethodRef>>,
    pub sites: BTreeMap<MethodRef, Vec<SiteEdge>>,
}

#[derive(Clone, Debug)]
pub struct SiteEdge {
    pub caller: MethodRef,
    pub callee: MethodRef,
    pub ii: usize,
    /// Receiver-rooted path of the call-site receiver in the caller's
    /// graph; `None` when the receiver is parameter-rooted or unrooted.
    pub receiver_path: Option<Vec<HintStep>>,
}

pub fn build_call_graph(
    graphs: &BTreeMap<MethodRef, std::rc::Rc<AugmentedTypeGraph>>,
) -> CallGraph {
    let mut cg = CallGraph::default();
    for (caller, ag) in graphs {
        for site in &ag.call_sites {
            let receiver_path = site.receiver.and_then(|r| {
                ag.root_path(r).map(|steps| {
                    steps
                        .into_iter()
                        .map(|(field, cardinality)| HintStep { field, cardinality })
                        .collect()
                })
            });
            cg.callers
                .entry(site.callee.clone())
                .or_default()
                .insert(caller.clone());
            cg.sites
                .entry(site.callee.clone())
                .or_default()
                .push(SiteEdge {
                    caller: caller.clone(),
                    callee: site.callee.clone(),
                    ii: site.ii,
                    receiver_path,
                });
        }
    }
    cg
}

/// Remove from each method's set the hints that every invoking method
/// already carries (after re-rooting through the call-site receiver path).
/// Entry points and methods with no callers are untouched. Single pass;
/// see [`dedup_hints_fixpoint`] for the iterated variant.
pub fn dedup_hints(all: &HintMap, cg: &CallGraph, entry_points: &[MethodRef]) -> HintMap {
    let mut out = HintMap::new();
    for (mref, set) in all {
        let callers = cg.callers.get(mref);
        let keep_all = entry_points.contains(mref) || callers.map_or(true, |c| c.is_empty());
        if keep_all {
            out.insert(mref.clone(), set.clone());
            continue;
        }
        let callers = callers.expect("checked above");
        let sites = cg.sites.get(mref).cloned().unwrap_or_default();
        let hints = set
            .hints
            .iter()
            .filter(|h| {
                let removable = callers.iter().all(|c| {
                    let caller_set = match all.get(c) {
                        Some(s) => &s.hints,
                        None => return false,
                    };
                    // every site of this caller must cover the hint
                    sites
                        .iter()
                        .filter(|s| &s.caller == c)
                        .all(|s| match &s.receiver_path {
                            Some(prefix) => {
                                let mut rerooted = prefix.clone();
                                rerooted.extend(h.path.iter().cloned());
                                path_implied(&rerooted, caller_set)
                            }
                            None => false,
                        })
                });
                !removable
            })
            .cloned()
            .collect();
        out.insert(
            mref.clone(),
            HintSet {
                method: mref.clone(),
                hints,
            },
        );
    }
    out
}

/// Iterate single-pass dedup to a fixpoint.
pub fn dedup_hints_fixpoint(all: &HintMap, cg: &CallGraph, entry_points: &[MethodRef]) -> HintMap {
    let mut cur = all.clone();
    loop {
        let next = dedup_hints(&cur, cg, entry_points);
        if next == cur {
            return next;
        }
        cur = next;
    }
}

/// Referenced-objects predictor baseline: every single-association path of
/// length up to `depth`, never traversing collections and never revisiting
/// a type. Emitted in lexicographic field order.
pub fn rop_hints(root: &str, depth: u32, g: &AppTypeGraph) -> Result<HintSet, AnalysisError> {
    if !g.nodes.contains(root) {
        return Err(AnalysisError::UnknownType(root.to_string()));
    }
    assert!(depth >= 1, "rop depth must be >= 1");
    let method = MethodRef::new(root, format!("rop{depth}"));
    let mut hints = BTreeSet::new();
    let mut visited: BTreeSet<String> = BTreeSet::new();
    visited.insert(root.to_string());
    let mut path = Vec::new();
    rop_walk(root, depth, g, &mut visited, &mut path, &mut |p| {
        hints.insert(Hint {
            source_type: root.to_string(),
            path: p.to_vec(),
        });
    });
    Ok(HintSet { method, hints })
}

fn rop_walk(
    ty: &str,
    depth_left: u32,
    g: &AppTypeGraph,
    visited: &mut BTreeSet<String>,
    path: &mut Vec<HintStep>,
    emit: &mut impl FnMut(&[HintStep]),
) {
    if depth_left == 0 {
        return;
    }
    let edges: Vec<(String, String)> = g
        .out_edges(ty)
        .filter(|(_, _, c)| *c == Cardinality::Single)
        .map(|(f, t, _)| (f.to_string(), t.to_string()))
        .collect();
    for (field, target) in edges {
        if visited.contains(&target) {
            continue;
        }
        path.push(HintStep::single(&field));
        emit(path);
        visited.insert(target.clone());
        rop_walk(&target, depth_left - 1, g, visited, path, emit);
        visited.remove(&target);
        path.pop();
    }
}

// --- hint file format -------------------------------------------------

/// `{"Owner.method": ["path", "path@collection.more", ...], ...}`
pub fn hints_to_json(map: &HintMap) -> String {
    let obj: BTreeMap<String, Vec<String>> = map
        .iter()
        .map(|(m, set)| (m.to_string(), set.hints.iter().map(Hint::marked).collect()))
        .collect();
    serde_json::to_string_pretty(&obj).expect("hint map serializes")
}

pub fn hints_from_json(text: &str) -> Result<HintMap, String> {
    let obj: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut out = HintMap::new();
    for (key, paths) in obj {
        let mref = MethodRef::parse(&key).map_err(|e| e.to_string())?;
        let mut hints = BTreeSet::new();
        for p in paths {
            hints.insert(Hint::parse_marked(&mref.owner, &p)?);
        }
        out.insert(
            mref.clone(),
            HintSet {
                method: mref,
                hints,
            },
        );
    }
    Ok(out)
}

/// Validate every hint path against the schema; the simulator refuses
/// hint files that fail this.
pub fn validate_hints(map: &HintMap, model: &ApplicationModel) -> Result<(), String> {
    let g = crate::graph::build_app_type_graph(model);
    for (mref, set) in map {
        if model.method_decl(mref).is_none() {
            return Err(format!("hint set for undeclared method `{mref}`"));
        }
        for h in &set.hints {
            if h.source_type != mref.owner {
                return Err(format!(
                    "hint `{h}` of `{mref}` is rooted at `{}`",
                    h.source_type
                ));
            }
            h.validate(&g).map_err(|e| format!("`{mref}`: {e}"))?;
        }
    }
    Ok(())
}
