//! Random corpora for property tests.

use proptest::prelude::*;

/// One statement: (op, a, b). Operand indices are reduced modulo what is in scope.
pub type Op = (u8, u8, u8);

#[derive(Debug, Clone)]
pub struct DefPlan {
    pub arity: usize,
    pub ops: Vec<Op>,
    pub returns: bool,
}

pub fn plan(max_defs: usize, max_ops: usize) -> impl Strategy<Value = Vec<DefPlan>> {
    prop::collection::vec(
        (0usize..3, prop::collection::vec((0u8..4, any::<u8>(), any::<u8>()), 0..=max_ops), any::<bool>())
            .prop_map(|(arity, ops, returns)| DefPlan { arity, ops, returns }),
        2..=max_defs,
    )
}

/// Renders a plan as a single-type corpus: every value is a `String`, two
/// fields act as shared state, and definitions call each other freely.
pub fn render(plan: &[DefPlan]) -> String {
    let mut out = String::from("package gen;\n\ntype Node {\n  field f0: String;\n  field f1: String;\n");
    for (i, d) in plan.iter().enumerate() {
        let params: Vec<String> = (0..d.arity).map(|k| format!("p{k}: String")).collect();
        let ret = if d.returns { "String" } else { "void" };
        out.push_str(&format!("  def m{i}({}): {ret} {{\n", params.join(", ")));
        let mut vars: Vec<String> = (0..d.arity).map(|k| format!("p{k}")).collect();
        let mut fresh = 0;
        let operand = |vars: &Vec<String>, x: u8| -> String {
            let n = vars.len() + 2;
            let k = x as usize % n;
            if k < vars.len() {
                vars[k].clone()
            } else {
                format!("this.f{}", k - vars.len())
            }
        };
        for &(op, a, b) in &d.ops {
            match op {
                // let v = x + y;
                0 => {
                    let e = format!("{} + {}", operand(&vars, a), operand(&vars, b));
                    let v = format!("v{fresh}");
                    fresh += 1;
                    out.push_str(&format!("    let {v} = {e};\n"));
                    vars.push(v);
                }
                // let v = mJ(args...);  or a bare call for void callees
                1 | 2 => {
                    let j = a as usize % plan.len();
                    let callee = &plan[j];
                    let args: Vec<String> = (0..callee.arity).map(|k| operand(&vars, b.wrapping_add(k as u8))).collect();
                    let call = format!("m{j}({})", args.join(", "));
                    if callee.returns {
                        let v = format!("v{fresh}");
                        fresh += 1;
                        out.push_str(&format!("    let {v} = {call};\n"));
                        vars.push(v);
                    } else {
                        out.push_str(&format!("    {call};\n"));
                    }
                }
                // this.fK = x;
                _ => {
                    out.push_str(&format!("    this.f{} = {};\n", b % 2, operand(&vars, a)));
                }
            }
        }
        if d.returns {
            let last = vars.last().cloned().unwrap_or_else(|| "this.f0".into());
            out.push_str(&format!("    return {last};\n"));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
