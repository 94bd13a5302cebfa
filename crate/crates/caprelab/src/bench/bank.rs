//! The banking example: seven domain entities plus the management class
//! that drives them. `setAllTransCustomers` walks every transaction,
//! chains a getter into a guarded setter, and passes a persistent object
//! as an argument, which together exercise every augmentation rule.

use crate::error::SpecError;
use crate::model::{ApplicationModel, Cardinality, FieldDecl, MethodDecl, MethodRef, TypeDecl};
use crate::sim::{BranchPolicy, ObjectRecord, TraceStep, WorkloadTrace};

use super::builder::MethodBuilder;

fn ty(name: &str, fields: Vec<FieldDecl>, methods: Vec<MethodDecl>) -> TypeDecl {
    TypeDecl {
        name: name.to_string(),
        persistent: true,
        fields,
        methods,
    }
}

fn single(name: &str, target: &str) -> FieldDecl {
    FieldDecl {
        name: name.to_string(),
        target_type: target.to_string(),
        cardinality: Cardinality::Single,
    }
}

fn collection(name: &str, target: &str) -> FieldDecl {
    FieldDecl {
        name: name.to_string(),
        target_type: target.to_string(),
        cardinality: Cardinality::Collection,
    }
}

pub fn model() -> ApplicationModel {
    // BankManagement.setAllTransCustomers:
    //   for (trans : this.transactions) trans.getAccount().setCustomer(this.manager)
    let mut b = MethodBuilder::new();
    let transactions = b.getfield("BankManagement", "transactions", "Transaction", "v_self");
    b.open_loop("l0");
    let trans = b.arrayload(&transactions);
    let account = b.invoke("Transaction", "getAccount", &trans, &[]);
    let manager = b.getfield("BankManagement", "manager", "Customer", "v_self");
    b.invoke_void("Account", "setCustomer", &account, &[manager.as_str()]);
    b.goto();
    b.close();
    let set_all = MethodDecl {
        name: "setAllTransCustomers".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    // Transaction.getAccount:
    //   if (this.type.typeID == 1) {} else { this.emp.dept }  -- then-arm
    //   work touches no objects; return this.account
    let mut b = MethodBuilder::new();
    let ttype = b.getfield("Transaction", "type", "TransactionType", "v_self");
    let _type_id = b.getfield("TransactionType", "typeID", "int", &ttype);
    let emp = b.getfield("Transaction", "emp", "Employee", "v_self");
    b.cond("b0", vec![_type_id.as_str()]);
    b.open_arm("b0", "else");
    let _dept = b.getfield("Employee", "dept", "Department", &emp);
    b.close();
    let account = b.getfield("Transaction", "account", "Account", "v_self");
    b.ret(Some(&account));
    let get_account = MethodDecl {
        name: "getAccount".to_string(),
        params: vec![],
        instructions: b.build(),
        overrides_method_of: None,
    };

    // Account.setCustomer(newCust):
    //   if (this.cust.company == newCust.company) this.cust = newCust
    let mut b = MethodBuilder::new();
    let cust = b.getfield("Account", "cust", "Customer", "v_self");
    let _c1 = b.getfield("Customer", "company", "Company", &cust);
    let _c2 = b.getfield("Customer", "company", "Company", "p0");
    b.cond("b0", vec![_c1.as_str(), _c2.as_str()]);
    b.open_arm("b0", "then");
    b.noop(); // the field write
    b.close();
    b.ret(None);
    let set_customer = MethodDecl {
        name: "setCustomer".to_string(),
        params: vec![("newCust".to_string(), "Customer".to_string())],
        instructions: b.build(),
        overrides_method_of: None,
    };

    ApplicationModel {
        types: vec![
            ty(
                "BankManagement",
                vec![
                    collection("transactions", "Transaction"),
                    single("manager", "Customer"),
                ],
                vec![set_all],
            ),
            ty(
                "Transaction",
                vec![
                    single("account", "Account"),
                    single("emp", "Employee"),
                    single("type", "TransactionType"),
                ],
                vec![get_account],
            ),
            ty("TransactionType", vec![single("typeID", "int")], vec![]),
            ty(
                "Account",
                vec![single("cust", "Customer"), single("balance", "int")],
                vec![set_customer],
            ),
            ty(
                "Customer",
                vec![single("company", "Company"), single("name", "string")],
                vec![],
            ),
            ty(
                "Employee",
                vec![single("dept", "Department"), single("name", "string")],
                vec![],
            ),
            ty("Department", vec![single("name", "string")], vec![]),
            ty("Company", vec![single("name", "string")], vec![]),
        ],
        entry_points: vec![MethodRef::new("BankManagement", "setAllTransCustomers")],
    }
}

const ROOT_OID: u64 = 1;

/// Deterministic dataset: the management root, its manager chain, and
/// `transactions` contiguous transactions with per-transaction account,
/// customer, and employee chains over small shared pools.
pub fn dataset(transactions: usize, _seed: u64) -> Vec<ObjectRecord> {
    let n = transactions as u64;
    let mgr = 2u64;
    let mgr_company = 3u64;
    let first_type = 4u64;
    let n_types = 2u64;
    let first_trans = first_type + n_types;
    let first_account = first_trans + n;
    let first_cust = first_account + n;
    let first_emp = first_cust + n;
    let first_dept = first_emp + n;
    let n_depts = 4u64.min(n.max(1));
    let first_company = first_dept + n_depts;
    let n_companies = 3u64.min(n.max(1));

    let mut out = Vec::new();
    let mut root = ObjectRecord::new(ROOT_OID, "BankManagement");
    root.singles.insert("manager".to_string(), Some(mgr));
    root.collections.insert(
        "transactions".to_string(),
        (0..n).map(|i| first_trans + i).collect(),
    );
    out.push(root);
    let mut m = ObjectRecord::new(mgr, "Customer");
    m.singles.insert("company".to_string(), Some(mgr_company));
    out.push(m);
    out.push(ObjectRecord::new(mgr_company, "Company"));
    for t in 0..n_types {
        out.push(ObjectRecord::new(first_type + t, "TransactionType"));
    }
    for i in 0..n {
        let mut rec = ObjectRecord::new(first_trans + i, "Transaction");
        rec.singles
            .insert("account".to_string(), Some(first_account + i));
        rec.singles.insert("emp".to_string(), Some(first_emp + i));
        rec.singles
            .insert("type".to_string(), Some(first_type + i % n_types));
        out.push(rec);
    }
    for i in 0..n {
        let mut rec = ObjectRecord::new(first_account + i, "Account");
        rec.singles.insert("cust".to_string(), Some(first_cust + i));
        out.push(rec);
    }
    for i in 0..n {
        let mut rec = ObjectRecord::new(first_cust + i, "Customer");
        rec.singles
            .insert("company".to_string(), Some(first_company + i % n_companies));
        out.push(rec);
    }
    for i in 0..n {
        let mut rec = ObjectRecord::new(first_emp + i, "Employee");
        rec.singles
            .insert("dept".to_string(), Some(first_dept + i % n_depts));
        out.push(rec);
    }
    for d in 0..n_depts {
        out.push(ObjectRecord::new(first_dept + d, "Department"));
    }
    for c in 0..n_companies {
        out.push(ObjectRecord::new(first_company + c, "Company"));
    }
    out
}

pub fn trace_for(
    name: &str,
    _dataset: &[ObjectRecord],
    _seed: u64,
) -> Result<WorkloadTrace, SpecError> {
    match name {
        "setAllTransCustomers" => Ok(WorkloadTrace::new(
            vec![TraceStep {
                method: MethodRef::new("BankManagement", "setAllTransCustomers"),
                root: ROOT_OID,
            }],
            BranchPolicy::Seeded { p_true: 0.5 },
        )),
        other => Err(SpecError(format!("bank has no traversal `{other}`"))),
    }
}

pub fn traversals() -> &'static [&'static str] {
    &["setAllTransCustomers"]
}
