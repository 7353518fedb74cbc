//! One-to-one assignment of expected flows to implemented flows.

use std::collections::{BTreeMap, BTreeSet};

/// A perfect injective assignment, found by backtracking. Keys are tried
/// fail-first (fewest candidates, then key order), candidates in order.
pub fn find_biunique<K, I>(matches: &BTreeMap<K, BTreeSet<I>>) -> Option<BTreeMap<K, I>>
where
    K: Ord + Clone,
    I: Ord + Clone,
{
    let mut keys: Vec<(&K, Vec<&I>)> = matches.iter().map(|(k, c)| (k, c.iter().collect())).collect();
    keys.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| a.0.cmp(b.0)));

    fn go<'a, K, I: Ord>(
        keys: &[(&'a K, Vec<&'a I>)],
        at: usize,
        used: &mut BTreeSet<&'a I>,
        chosen: &mut Vec<&'a I>,
    ) -> bool {
        if at == keys.len() {
            return true;
        }
        // prune: every remaining key still needs a free candidate
        if keys[at..].iter().any(|(_, c)| c.iter().all(|i| used.contains(*i))) {
            return false;
        }
        for &i in &keys[at].1 {
            if used.insert(i) {
                chosen.push(i);
                if go(keys, at + 1, used, chosen) {
                    return true;
                }
                chosen.pop();
                used.remove(i);
            }
        }
        false
    }

    let mut chosen = Vec::new();
    if go(&keys, 0, &mut BTreeSet::new(), &mut chosen) {
        Some(
            keys.iter()
                .zip(chosen)
                .map(|((k, _), i)| ((*k).clone(), i.clone()))
                .collect(),
        )
    } else {
        None
    }
}

/// A maximum partial assignment; keys earlier in `priority` are preferred
/// when not all can be served.
pub fn max_assignment<K, I>(matches: &BTreeMap<K, BTreeSet<I>>, priority: &[K]) -> BTreeMap<K, I>
where
    K: Ord + Clone,
    I: Ord + Clone,
{
    let keys: Vec<&K> = priority.iter().filter(|k| matches.contains_key(*k)).collect();
    let mut owner: BTreeMap<&I, usize> = BTreeMap::new();

    fn augment<'a, K: Ord, I: Ord>(
        k: usize,
        keys: &[&K],
        matches: &'a BTreeMap<K, BTreeSet<I>>,
        owner: &mut BTreeMap<&'a I, usize>,
        seen: &mut BTreeSet<&'a I>,
    ) -> bool {
        for i in &matches[keys[k]] {
            if !seen.insert(i) {
                continue;
            }
            let free = match owner.get(i) {
                None => true,
                Some(&other) => augment(other, keys, matches, owner, seen),
            };
            if free {
                owner.insert(i, k);
                return true;
            }
        }
        false
    }

    for k in 0..keys.len() {
        augment(k, &keys, matches, &mut owner, &mut BTreeSet::new());
    }
    owner
        .into_iter()
        .map(|(i, k)| (keys[k].clone(), i.clone()))
        .collect()
}
