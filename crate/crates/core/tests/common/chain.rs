//! Random linear SecDFDs: one process per contract, a running value and a side asset.

use flowmap::secdfd::{ContractKind, Label};
use proptest::prelude::*;

/// One step of a chain: the contract kind and, for single-input kinds,
/// whether it consumes the side asset `b` instead of the running value.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub kind: ContractKind,
    pub takes_side: bool,
    pub declared_high: bool,
}

pub fn kind() -> impl Strategy<Value = ContractKind> {
    prop_oneof![
        Just(ContractKind::EncryptOrHash),
        Just(ContractKind::Decrypt),
        Just(ContractKind::Forward),
        Just(ContractKind::Join),
    ]
}

pub fn steps() -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec(
        (kind(), any::<bool>(), any::<bool>()).prop_map(|(kind, takes_side, declared_high)| Step {
            kind,
            takes_side,
            declared_high,
        }),
        1..8,
    )
}

pub fn lbl(high: bool) -> &'static str {
    if high {
        "high"
    } else {
        "low"
    }
}

/// E -> P1 -> ... -> Pn -> S. Flow i enters Pi carrying the running value
/// x{i-1} and a side asset b; Pi produces x{i}.
pub fn chain(a_high: bool, b_high: bool, steps: &[Step]) -> String {
    let n = steps.len();
    let node = |i: usize| if i == 0 { "E".to_string() } else if i > n { "S".to_string() } else { format!("P{i}") };
    let mut t = String::from("model chain\nexternal E\nstore S\n");
    for i in 1..=n {
        t.push_str(&format!("process P{i}\n"));
    }
    t.push_str(&format!("asset x0 : T {} from E to P1\n", lbl(a_high)));
    t.push_str(&format!("asset b : T {} from E to S\n", lbl(b_high)));
    for (i, s) in steps.iter().enumerate() {
        let i = i + 1;
        t.push_str(&format!("asset x{i} : T {} from P{i} to {}\n", lbl(s.declared_high), node(i + 1)));
    }
    for i in 1..=n + 1 {
        t.push_str(&format!("flow {i} : {} -> {} carrying x{}, b\n", node(i - 1), node(i), i - 1));
    }
    for (i, s) in steps.iter().enumerate() {
        let i = i + 1;
        let ins = match s.kind {
            ContractKind::Join => format!("x{}, b", i - 1),
            _ if s.takes_side => "b".to_string(),
            _ => format!("x{}", i - 1),
        };
        t.push_str(&format!("contract P{i} {} in {ins} out x{i}\n", s.kind.keyword()));
    }
    t
}

/// Labels of x0..xn and b walked straight down the chain.
pub fn walk(a: Label, b: Label, steps: &[Step]) -> Vec<Label> {
    let mut xs = vec![a];
    for s in steps {
        let cur = *xs.last().unwrap();
        let input = if s.takes_side { b } else { cur };
        xs.push(match s.kind {
            ContractKind::EncryptOrHash => Label::Low,
            ContractKind::Join => {
                if cur == Label::High || b == Label::High {
                    Label::High
                } else {
                    Label::Low
                }
            }
            ContractKind::Decrypt | ContractKind::Forward => input,
        });
    }
    xs
}

pub fn label(high: bool) -> Label {
    if high {
        Label::High
    } else {
        Label::Low
    }
}

