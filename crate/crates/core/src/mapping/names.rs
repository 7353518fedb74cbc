//! Identifier splitting and fuzzy name correspondence.

/// Splits an identifier into lower-cased words at `_`, `-`, `.`, whitespace,
/// digit boundaries and lower→upper case transitions.
pub fn split_name(name: &str) -> Vec<String> {
    let mut words = Vec::new();
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for c in name.chars() {
        if c == '_' || c == '-' || c == '.' || c.is_whitespace() {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            let boundary = (p.is_lowercase() && c.is_uppercase())
                || (p.is_ascii_digit() != c.is_ascii_digit());
            if boundary && !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
        }
        cur.extend(c.to_lowercase());
        prev = Some(c);
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

/// Edit distance tolerated between two words whose longer one has `len` characters.
pub fn tolerance(len: usize) -> usize {
    match len {
        0..=4 => 0,
        5..=8 => 1,
        _ => 2,
    }
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

pub fn words_equivalent(w1: &str, w2: &str) -> bool {
    let len = w1.chars().count().max(w2.chars().count());
    levenshtein(w1, w2) <= tolerance(len)
}

/// Maximum pairing of equivalent words; earlier words win ties.
fn pair_words(w1: &[String], w2: &[String]) -> Vec<(usize, usize)> {
    let adj: Vec<Vec<usize>> = w1
        .iter()
        .map(|a| {
            w2.iter()
                .enumerate()
                .filter(|(_, b)| words_equivalent(a, b))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; w2.len()];

    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..w1.len() {
        let mut seen = vec![false; w2.len()];
        augment(i, &adj, &mut owner, &mut seen);
    }
    let mut pairs: Vec<(usize, usize)> = owner
        .iter()
        .enumerate()
        .filter_map(|(j, o)| o.map(|i| (i, j)))
        .collect();
    pairs.sort();
    pairs
}

/// Match quality in `(0, 1]` when the two names correspond, `None` otherwise.
///
/// Names correspond when at least one word pair matches and the matched
/// pairs cover at least half of the longer word list.
pub fn names_correspond(n1: &str, n2: &str) -> Option<f64> {
    let w1 = split_name(n1);
    let w2 = split_name(n2);
    if w1.is_empty() || w2.is_empty() {
        return None;
    }
    let pairs = pair_words(&w1, &w2);
    let m = pairs.len();
    if m == 0 || 2 * m < w1.len().max(w2.len()) {
        return None;
    }
    let avg_dist: f64 = pairs
        .iter()
        .map(|&(i, j)| {
            let len = w1[i].chars().count().max(w2[j].chars().count()).max(1);
            levenshtein(&w1[i], &w2[j]) as f64 / len as f64
        })
        .sum::<f64>()
        / m as f64;
    Some(2.0 * m as f64 / (w1.len() + w2.len()) as f64 * (1.0 - avg_dist))
}
