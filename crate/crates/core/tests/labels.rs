mod common;

use common::chain::{chain, label, steps, walk};
use flowmap::secdfd::{parse_secdfd, print_secdfd, propagate_labels, ContractKind, Label, SecDfd};
use proptest::prelude::*;

fn parse(text: &str) -> SecDfd {
    parse_secdfd(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chain_labels_follow_contract_semantics(a in any::<bool>(), b in any::<bool>(), steps in steps()) {
        let m = parse(&chain(a, b, &steps));
        let got = propagate_labels(&m);
        let want = walk(label(a), label(b), &steps);
        for i in 0..=steps.len() {
            let flow = i as u32 + 1;
            prop_assert_eq!(got.get(flow, &format!("x{i}")), Some(want[i]), "x{}", i);
            // the side asset is never produced, so it passes through unchanged
            prop_assert_eq!(got.get(flow, "b"), Some(label(b)));
        }
        for (i, s) in steps.iter().enumerate() {
            let out = got.get(i as u32 + 2, &format!("x{}", i + 1)).unwrap();
            let cur = want[i];
            match s.kind {
                ContractKind::EncryptOrHash => prop_assert_eq!(out, Label::Low),
                ContractKind::Join => prop_assert_eq!(out == Label::High, cur == Label::High || b),
                ContractKind::Forward | ContractKind::Decrypt => {
                    prop_assert_eq!(out, if s.takes_side { label(b) } else { cur })
                }
            }
        }
    }

    #[test]
    fn propagation_is_idempotent_and_stable_under_reprinting(a in any::<bool>(), b in any::<bool>(), steps in steps()) {
        let m = parse(&chain(a, b, &steps));
        let first = propagate_labels(&m);
        prop_assert_eq!(&propagate_labels(&m), &first);
        let reparsed = parse(&print_secdfd(&m));
        prop_assert_eq!(&reparsed, &m);
        prop_assert_eq!(propagate_labels(&reparsed), first.clone());

        // writing the computed labels back as declarations changes nothing
        let mut fixed = m.clone();
        for asset in &mut fixed.assets {
            let flow = fixed.flows.iter().find(|f| f.source == asset.source && f.carries(&asset.name)).unwrap();
            asset.label = first.get(flow.index, &asset.name).unwrap();
        }
        prop_assert_eq!(propagate_labels(&fixed), first);
    }

    #[test]
    fn raising_an_input_never_lowers_an_output(b in any::<bool>(), steps in steps()) {
        let low = propagate_labels(&parse(&chain(false, b, &steps)));
        let high = propagate_labels(&parse(&chain(true, b, &steps)));
        for (k, l) in &low.entries {
            prop_assert!(high.entries[k] >= *l, "{:?}", k);
        }
    }
}
