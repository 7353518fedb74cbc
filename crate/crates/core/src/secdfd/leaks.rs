use super::labels::LabelAssignment;
use super::model::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A confidential asset observable by an attacker zone member.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DesignLeak {
    pub asset: String,
    pub zone: String,
    pub element: ZoneMember,
}

/// Reports every (asset, zone member) where a HIGH occurrence of the asset
/// enters or leaves a member node, or travels on a member flow.
pub fn check_design_leaks(model: &SecDfd, labels: &LabelAssignment) -> Vec<DesignLeak> {
    let mut out = BTreeSet::new();
    for zone in &model.zones {
        for member in &zone.members {
            let flows: Vec<&DfdFlow> = match member {
                ZoneMember::Flow(ix) => model.flows.iter().filter(|f| f.index == *ix).collect(),
                ZoneMember::Node(id) => model
                    .flows
                    .iter()
                    .filter(|f| &f.source == id || &f.target == id)
                    .collect(),
            };
            for f in flows {
                for asset in &f.assets {
                    if labels.get(f.index, asset) == Some(Label::High) {
                        out.insert(DesignLeak {
                            asset: asset.clone(),
                            zone: zone.name.clone(),
                            element: member.clone(),
                        });
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secdfd::{parse_secdfd, propagate_labels};

    #[test]
    fn no_zones_no_findings() {
        let m = parse_secdfd(crate::secdfd::dsl::tests::FIG2_EXCERPT).unwrap();
        assert!(check_design_leaks(&m, &propagate_labels(&m)).is_empty());
    }

    #[test]
    fn trusted_plugin_in_excerpt() {
        let mut m = parse_secdfd(crate::secdfd::dsl::tests::FIG2_EXCERPT).unwrap();
        m.zones.push(AttackerZone {
            name: "Other".into(),
            members: vec![ZoneMember::Node("Get_Value".into())],
        });
        // encr.data is LOW, so observing Get_Value reveals nothing confidential
        assert!(check_design_leaks(&m, &propagate_labels(&m)).is_empty());
        m.zones[0].members.push(ZoneMember::Node("Plugin".into()));
        let leaks = check_design_leaks(&m, &propagate_labels(&m));
        let assets: Vec<&str> = leaks.iter().map(|l| l.asset.as_str()).collect();
        assert_eq!(assets, vec!["password", "secret"]);
    }

    #[test]
    fn flow_member_checks_edge_only() {
        let text = "model M\nexternal E\nprocess P\nstore S\nasset a : T high from E to S\n\
                    flow 1 : E -> P carrying a\nflow 2 : P -> S carrying a\nzone Z { 2 }\n";
        let m = parse_secdfd(text).unwrap();
        let leaks = check_design_leaks(&m, &propagate_labels(&m));
        assert_eq!(leaks.len(), 1);
        assert_eq!(leaks[0].element, ZoneMember::Flow(2));
    }
}
