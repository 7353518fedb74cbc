use super::model::*;
use std::collections::BTreeSet;

/// Traces where an asset originates, following contract inputs backwards
/// through the processes that produce it.
///
/// Returns the element where tracing stopped together with the asset that was
/// being traced there.
pub fn trace_asset_origin_pairs(model: &SecDfd, asset: &str) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    let mut visiting = BTreeSet::new();
    trace(model, asset, &mut visiting, &mut out);
    out
}

/// Elements at which the given asset originates.
pub fn trace_asset_origin(model: &SecDfd, asset: &str) -> BTreeSet<String> {
    trace_asset_origin_pairs(model, asset)
        .into_iter()
        .map(|(node, _)| node)
        .collect()
}

fn trace(
    model: &SecDfd,
    asset: &str,
    visiting: &mut BTreeSet<String>,
    out: &mut BTreeSet<(String, String)>,
) {
    let Some(a) = model.asset(asset) else {
        return;
    };
    if !visiting.insert(asset.to_string()) {
        return;
    }
    let source = &a.source;
    let producers: Vec<&ProcessContract> = match model.node(source) {
        Some(n) if n.kind == NodeKind::Process => n
            .contracts
            .iter()
            .filter(|c| c.out_assets.iter().any(|o| o == asset))
            .collect(),
        _ => Vec::new(),
    };
    if producers.is_empty() {
        out.insert((source.clone(), asset.to_string()));
        return;
    }
    let before = out.len();
    for c in producers {
        for input in &c.in_assets {
            trace(model, input, visiting, out);
        }
    }
    if out.len() == before {
        // every input led back into a cycle
        out.insert((source.clone(), asset.to_string()));
    }
}
