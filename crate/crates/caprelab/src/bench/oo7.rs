//! Assembly-hierarchy benchmark: a module owns a tree of assemblies whose
//! leaves hold composite parts, each with a documentation object and a
//! collection of atomic parts carrying a detail/blueprint/author chain.
//! `t1` traverses everything; `t2a`/`t2b`/`t2c` are update passes that
//! navigate down and write without reading the deep chains.

use std::collections::BTreeMap;

use crate::error::SpecError;
use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oo7Size {
    /// ~1,000 objects.
    Small,
    /// ~30,000 objects.
    Medium,
    /// Scaled-down stand-in for the full large database: ~50,000 objects.
    LargeScaled,
}

impl Oo7Size {
    pub fn parse(s: &str) -> Result<Self, SpecError> {
        match s {
            "small" => Ok(Oo7Size::Small),
            "medium" => Ok(Oo7Size::Medium),
            "large-scaled" => Ok(Oo7Size::LargeScaled),
            other => Err(SpecError(format!(
                "unknown oo7 size `{other}` (small | medium | large-scaled)"
            ))),
        }
    }

    /// (assembly levels, fan-out, composites per leaf assembly, atomic
    /// parts per composite), with defaults chosen to land on the
    /// published object totals.
    fn shape(self) -> (u32, usize, usize, usize) {
        match self {
            Oo7Size::Small => (3, 3, 3, 8),
            Oo7Size::Medium => (4, 3, 6, 46),
            Oo7Size::LargeScaled => (5, 3, 6, 25),
        }
    }
}

fn single(name: &str, target: &str) -> FieldDecl {
    FieldDecl {
        name: name.into(),
        target_type: target.into(),
        cardinality: Cardinality::Single,
    }
}

fn collection(name: &str, target: &str) -> FieldDecl {
    FieldDecl {
        name: name.into(),
        target_type: target.into(),
        cardinality: Cardinality::Collection,
    }
}

fn ty(name: &str, fields: Vec<FieldDecl>, methods: Vec<MethodDecl>) -> TypeDecl {
    TypeDecl {
        name: name.into(),
        persistent: true,
        fields,
        methods,
    }
}

fn method(name: &str, params: Vec<(&str, &str)>, b: MethodBuilder) -> MethodDecl {
    MethodDecl {
        name: name.into(),
        params: params
            .into_iter()
            .map(|(n, t)| (n.to_string(), t.to_string()))
            .collect(),
        instructions: b.build(),
        overrides_method_of: None,
    }
}

pub fn model() -> ApplicationModel {
    // Module.t1: for (a : assemblies) a.traverse()
    let mut b = MethodBuilder::new();
    let asms = b.getfield("Module", "assemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let a = b.arrayload(&asms);
    b.invoke_void("Assembly", "traverse", &a, &[]);
    b.close();
    let t1 = method("t1", vec![], b);

    // Assembly.traverse: recurse into sub-assemblies, then traverse each
    // component
    let mut b = MethodBuilder::new();
    let subs = b.getfield("Assembly", "subAssemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let sa = b.arrayload(&subs);
    b.invoke_void("Assembly", "traverse", &sa, &[]);
    b.close();
    let comps = b.getfield("Assembly", "components", "CompositePart", "v_self");
    b.open_loop("l1");
    let cp = b.arrayload(&comps);
    b.invoke_void("CompositePart", "traverseComposite", &cp, &[]);
    b.close();
    let traverse = method("traverse", vec![], b);

    // CompositePart.traverseComposite: root part, two passes over the
    // parts, documentation last
    let mut b = MethodBuilder::new();
    let root = b.getfield("CompositePart", "rootPart", "AtomicPart", "v_self");
    let _rx = b.getfield("AtomicPart", "x", "int", &root);
    let parts = b.getfield("CompositePart", "parts", "AtomicPart", "v_self");
    b.open_loop("l0");
    let p = b.arrayload(&parts);
    let _x = b.getfield("AtomicPart", "x", "int", &p);
    let _y = b.getfield("AtomicPart", "y", "int", &p);
    b.close();
    b.open_loop("l1");
    let p2 = b.arrayload(&parts);
    b.invoke_void("AtomicPart", "inspect", &p2, &[]);
    b.close();
    let doc = b.getfield("CompositePart", "documentation", "Document", "v_self");
    let _txt = b.getfield("Document", "text", "string", &doc);
    let traverse_composite = method("traverseComposite", vec![], b);

    // AtomicPart.inspect: the blueprint read depends on a data check
    let mut b = MethodBuilder::new();
    let detail = b.getfield("AtomicPart", "detail", "PartDetail", "v_self");
    let x = b.getfield("AtomicPart", "x", "int", "v_self");
    b.cond("b0", vec![x.as_str()]);
    b.open_arm("b0", "then");
    let bp = b.getfield("PartDetail", "blueprint", "Blueprint", &detail);
    let _cost = b.getfield("Blueprint", "cost", "int", &bp);
    b.close();
    let inspect = method("inspect", vec![], b);

    // update passes
    let mut b = MethodBuilder::new();
    let asms = b.getfield("Module", "assemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let a = b.arrayload(&asms);
    b.invoke_void("Assembly", "updateComposites", &a, &[]);
    b.close();
    let t2a = method("t2a", vec![], b);

    let mut b = MethodBuilder::new();
    let asms = b.getfield("Module", "assemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let a = b.arrayload(&asms);
    b.invoke_void("Assembly", "updateParts", &a, &[]);
    b.close();
    let t2b = method("t2b", vec![], b);

    let mut b = MethodBuilder::new();
    let asms = b.getfield("Module", "assemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let a = b.arrayload(&asms);
    b.invoke_void("Assembly", "updatePartsTwice", &a, &[]);
    b.close();
    let t2c = method("t2c", vec![], b);

    let mut b = MethodBuilder::new();
    let subs = b.getfield("Assembly", "subAssemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let sa = b.arrayload(&subs);
    b.invoke_void("Assembly", "updateComposites", &sa, &[]);
    b.close();
    let comps = b.getfield("Assembly", "components", "CompositePart", "v_self");
    b.open_loop("l1");
    let cp = b.arrayload(&comps);
    b.invoke_void("CompositePart", "touch", &cp, &[]);
    b.close();
    let update_composites = method("updateComposites", vec![], b);

    let mut b = MethodBuilder::new();
    let subs = b.getfield("Assembly", "subAssemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let sa = b.arrayload(&subs);
    b.invoke_void("Assembly", "updateParts", &sa, &[]);
    b.close();
    let comps = b.getfield("Assembly", "components", "CompositePart", "v_self");
    b.open_loop("l1");
    let cp = b.arrayload(&comps);
    b.invoke_void("CompositePart", "updateParts", &cp, &[]);
    b.close();
    let update_parts_assembly = method("updateParts", vec![], b);

    let mut b = MethodBuilder::new();
    let subs = b.getfield("Assembly", "subAssemblies", "Assembly", "v_self");
    b.open_loop("l0");
    let sa = b.arrayload(&subs);
    b.invoke_void("Assembly", "updatePartsTwice", &sa, &[]);
    b.close();
    let comps = b.getfield("Assembly", "components", "CompositePart", "v_self");
    b.open_loop("l1");
    let cp = b.arrayload(&comps);
    b.invoke_void("CompositePart", "updatePartsTwice", &cp, &[]);
    b.close();
    let update_parts_twice_assembly = method("updatePartsTwice", vec![], b);

    let mut b = MethodBuilder::new();
    b.noop(); // composite-level write
    let touch = method("touch", vec![], b);

    let mut b = MethodBuilder::new();
    let parts = b.getfield("CompositePart", "parts", "AtomicPart", "v_self");
    b.open_loop("l0");
    let p = b.arrayload(&parts);
    b.invoke_void("AtomicPart", "markDirty", &p, &[]);
    b.close();
    let update_parts_composite = method("updateParts", vec![], b);

    let mut b = MethodBuilder::new();
    let parts = b.getfield("CompositePart", "parts", "AtomicPart", "v_self");
    b.open_loop("l0");
    let p = b.arrayload(&parts);
    b.invoke_void("AtomicPart", "markDirty", &p, &[]);
    b.invoke_void("AtomicPart", "markDirty", &p, &[]);
    b.close();
    let update_parts_twice_composite = method("updatePartsTwice", vec![], b);

    let mut b = MethodBuilder::new();
    b.noop(); // the write
    let mark_dirty = method("markDirty", vec![], b);

    ApplicationModel {
        types: vec![
            ty(
                "Module",
                vec![
                    single("man", "Manual"),
                    collection("assemblies", "Assembly"),
                ],
                vec![t1, t2a, t2b, t2c],
            ),
            ty("Manual", vec![single("title", "string")], vec![]),
            ty(
                "Assembly",
                vec![
                    collection("subAssemblies", "Assembly"),
                    collection("components", "CompositePart"),
                ],
                vec![
                    traverse,
                    update_composites,
                    update_parts_assembly,
                    update_parts_twice_assembly,
                ],
            ),
            ty(
                "CompositePart",
                vec![
                    single("documentation", "Document"),
                    single("rootPart", "AtomicPart"),
                    collection("parts", "AtomicPart"),
                ],
                vec![
                    traverse_composite,
                    touch,
                    update_parts_composite,
                    update_parts_twice_composite,
                ],
            ),
            ty("Document", vec![single("text", "string")], vec![]),
            ty(
                "AtomicPart",
                vec![
                    single("detail", "PartDetail"),
                    single("x", "int"),
                    single("y", "int"),
                ],
                vec![inspect, mark_dirty],
            ),
            ty("PartDetail", vec![single("blueprint", "Blueprint")], vec![]),
            ty(
                "Blueprint",
                vec![single("author", "Author"), single("cost", "int")],
                vec![],
            ),
            ty(
                "Author",
                vec![single("org", "Org"), single("name", "string")],
                vec![],
            ),
            ty("Org", vec![single("addr", "string")], vec![]),
        ],
        entry_points: vec![
            MethodRef::new("Module", "t1"),
            MethodRef::new("Module", "t2a"),
            MethodRef::new("Module", "t2b"),
            MethodRef::new("Module", "t2c"),
        ],
    }
}

const MODULE_OID: u64 = 1;
const ORG_POOL: u64 = 5;

struct Arena {
    out: Vec<ObjectRecord>,
    next_oid: u64,
}

impl Arena {
    fn fresh(&mut self, type_name: &str) -> usize {
        self.out.push(ObjectRecord::new(self.next_oid, type_name));
        self.next_oid += 1;
        self.out.len() - 1
    }

    fn oid(&self, idx: usize) -> u64 {
        self.out[idx].oid
    }
}

pub fn generate(
    size: Oo7Size,
    _seed: u64,
) -> Result<(ApplicationModel, Vec<ObjectRecord>, BTreeMap<String, u64>), SpecError> {
    let (levels, fanout, comps_per_leaf, parts_per_comp) = size.shape();
    let mut arena = Arena {
        out: Vec::new(),
        next_oid: MODULE_OID,
    };

    let module = arena.fresh("Module");
    let manual = arena.fresh("Manual");
    let manual_oid = arena.oid(manual);
    arena.out[module]
        .singles
        .insert("man".to_string(), Some(manual_oid));

    // assembly tree, breadth first so each level is contiguous
    let root_asm = arena.fresh("Assembly");
    let root_oid = arena.oid(root_asm);
    arena.out[module]
        .collections
        .insert("assemblies".to_string(), vec![root_oid]);
    let mut level: Vec<usize> = vec![root_asm];
    for _ in 1..levels {
        let mut next_level = Vec::new();
        for parent_pos in 0..level.len() {
            let parent = level[parent_pos];
            let kids: Vec<usize> = (0..fanout).map(|_| arena.fresh("Assembly")).collect();
            let kid_oids: Vec<u64> = kids.iter().map(|&k| arena.oid(k)).collect();
            arena.out[parent]
                .collections
                .insert("subAssemblies".to_string(), kid_oids);
            next_level.extend(kids);
        }
        level = next_level;
    }
    let leaves = level;

    // composites per leaf assembly; elements contiguous per kind so
    // round-robin placement spreads them
    let mut composites = Vec::new();
    for &leaf in &leaves {
        let comps: Vec<usize> = (0..comps_per_leaf)
            .map(|_| arena.fresh("CompositePart"))
            .collect();
        let oids: Vec<u64> = comps.iter().map(|&c| arena.oid(c)).collect();
        arena.out[leaf]
            .collections
            .insert("components".to_string(), oids);
        composites.extend(comps);
    }

    for &comp in &composites {
        let doc = arena.fresh("Document");
        let doc_oid = arena.oid(doc);
        arena.out[comp]
            .singles
            .insert("documentation".to_string(), Some(doc_oid));
    }
    let mut atomics = Vec::new();
    for &comp in &composites {
        let parts: Vec<usize> = (0..parts_per_comp)
            .map(|_| arena.fresh("AtomicPart"))
            .collect();
        let oids: Vec<u64> = parts.iter().map(|&p| arena.oid(p)).collect();
        // the root part is the first element of the parts collection
        arena.out[comp]
            .singles
            .insert("rootPart".to_string(), Some(oids[0]));
        arena.out[comp]
            .collections
            .insert("parts".to_string(), oids);
        atomics.extend(parts);
    }
    let mut details = Vec::new();
    for &p in &atomics {
        let detail = arena.fresh("PartDetail");
        let detail_oid = arena.oid(detail);
        arena.out[p]
            .singles
            .insert("detail".to_string(), Some(detail_oid));
        details.push(detail);
    }
    let mut blueprints = Vec::new();
    for &d in &details {
        let bp = arena.fresh("Blueprint");
        let bp_oid = arena.oid(bp);
        arena.out[d]
            .singles
            .insert("blueprint".to_string(), Some(bp_oid));
        blueprints.push(bp);
    }
    let mut authors = Vec::new();
    for &b in &blueprints {
        let author = arena.fresh("Author");
        let author_oid = arena.oid(author);
        arena.out[b]
            .singles
            .insert("author".to_string(), Some(author_oid));
        authors.push(author);
    }
    let orgs: Vec<usize> = (0..ORG_POOL).map(|_| arena.fresh("Org")).collect();
    let org_oids: Vec<u64> = orgs.iter().map(|&o| arena.oid(o)).collect();
    for (n, &a) in authors.iter().enumerate() {
        arena.out[a]
            .singles
            .insert("org".to_string(), Some(org_oids[n % org_oids.len()]));
    }
    let out = arena.out;

    let stats = BTreeMap::from([
        ("objects".to_string(), out.len() as u64),
        (
            "assemblies".to_string(),
            out.iter().filter(|r| r.type_name == "Assembly").count() as u64,
        ),
        ("composites".to_string(), composites.len() as u64),
        (
            "atomics".to_string(),
            out.iter().filter(|r| r.type_name == "AtomicPart").count() as u64,
        ),
    ]);
    Ok((model(), out, stats))
}

pub fn trace_for(
    name: &str,
    _dataset: &[ObjectRecord],
    _seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    let branch = match name {
        "t1" => BranchPolicy::Seeded { p_true: 0.6 },
        "t2a" | "t2b" | "t2c" => BranchPolicy::Fixed { value: true },
        other => return Err(SpecError(format!("oo7 has no traversal `{other}`"))),
    };
    Ok(WorkloadTrace::new(
        vec![TraceStep {
            method: MethodRef::new("Module", name),
            root: MODULE_OID,
        }],
        branch,
    ))
}

pub fn traversals() -> &'static [&'static str] {
    &["t1", "t2a", "t2b", "t2c"]
}
