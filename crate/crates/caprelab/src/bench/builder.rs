//! Convenience builder for method instruction streams.

use crate::model::{InstrOp, IrInstruction, ScopeFrame};

#[derive(Default)]
pub struct MethodBuilder {
    instrs: Vec<IrInstruction>,
    scopes: Vec<ScopeFrame>,
    next_var: usize,
}

impl MethodBuilder {
    pub fn new() -> Self {
        // v0/v1 are conventionally reserved for constants and the receiver
        Self {
            instrs: Vec::new(),
            scopes: Vec::new(),
            next_var: 2,
        }
    }

    fn fresh(&mut self) -> String {
        let v = format!("v{}", self.next_var);
        self.next_var += 1;
        v
    }

    fn push(&mut self, op: InstrOp, def: Option<String>, used: Vec<&str>) {
        self.instrs.push(IrInstruction {
            ii: self.instrs.len(),
            op,
            def_var: def,
            used_vars: used.into_iter().map(str::to_string).collect(),
            scope_chain: self.scopes.clone(),
        });
    }

    pub fn getfield(&mut self, owner: &str, field: &str, ftype: &str, recv: &str) -> String {
        let def = self.fresh();
        self.push(
            InstrOp::GetField {
                owner_type: owner.to_string(),
                field_name: field.to_string(),
                field_type: ftype.to_string(),
            },
            Some(def.clone()),
            vec![recv],
        );
        def
    }

    pub fn arrayload(&mut self, coll: &str) -> String {
        let def = self.fresh();
        self.push(InstrOp::ArrayLoad, Some(def.clone()), vec![coll]);
        def
    }

    pub fn invoke(&mut self, owner: &str, method: &str, recv: &str, args: &[&str]) -> String {
        let def = self.fresh();
        let mut used = vec![recv];
        used.extend_from_slice(args);
        self.push(
            InstrOp::InvokeMethod {
                owner_type: owner.to_string(),
                method_name: method.to_string(),
            },
            Some(def.clone()),
            used,
        );
        def
    }

    pub fn invoke_void(&mut self, owner: &str, method: &str, recv: &str, args: &[&str]) {
        let mut used = vec![recv];
        used.extend_from_slice(args);
        self.push(
            InstrOp::InvokeMethod {
                owner_type: owner.to_string(),
                method_name: method.to_string(),
            },
            None,
            used,
        );
    }

    pub fn cond(&mut self, branch: &str, used: Vec<&str>) {
        self.push(
            InstrOp::ConditionalBranch {
                branch: branch.to_string(),
            },
            None,
            used,
        );
    }

    pub fn noop(&mut self) {
        self.push(InstrOp::Noop, None, vec![]);
    }

    pub fn goto(&mut self) {
        self.push(InstrOp::Goto, None, vec![]);
    }

    pub fn ret(&mut self, var: Option<&str>) {
        self.push(InstrOp::Return, None, var.into_iter().collect());
    }

    pub fn open_loop(&mut self, id: &str) {
        self.scopes.push(ScopeFrame::loop_frame(id));
    }

    pub fn open_arm(&mut self, branch: &str, arm: &str) {
        self.scopes.push(ScopeFrame::branch_frame(branch, arm));
    }

    pub fn close(&mut self) {
        self.scopes.pop();
    }

    pub fn build(self) -> Vec<IrInstruction> {
        self.instrs
    }
}
