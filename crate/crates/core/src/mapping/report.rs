use super::state::{ActiveMapping, DfdElementKind, DfdRef, MappingEntry, MappingState, Workspace};
use crate::pm::{communicated_type, out_flows};
use crate::secdfd::NodeKind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Absence {
    pub element: DfdRef,
    pub kind: DfdElementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Divergence {
    /// Data leaves a process's definitions towards a definition mapped to no design node.
    UnmappedTarget {
        process: DfdRef,
        definition: String,
        edges: Vec<String>,
    },
    /// Data flows between two mapped processes the design does not connect.
    UnspecifiedFlow {
        source: DfdRef,
        target: DfdRef,
        edges: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplianceReport {
    pub convergences: Vec<MappingEntry>,
    pub absences: Vec<Absence>,
    pub divergences: Vec<Divergence>,
}

/// Convergences, absences and divergences of the confirmed mapping.
///
/// Only edges communicating a type some asset is mapped to are considered;
/// external entities are never reported absent.
pub fn compliance_report(ws: &Workspace, state: &MappingState) -> ComplianceReport {
    let am = ActiveMapping::new(ws, state);
    let mut convergences: Vec<MappingEntry> = state.active().cloned().collect();
    convergences.sort_by(|a, b| a.id.cmp(&b.id));

    let absences = ws
        .dfd_elements()
        .into_iter()
        .filter(|(r, k)| *k != DfdElementKind::Entity && !am.has_any(&r.model, &r.element))
        .map(|(element, kind)| Absence { element, kind })
        .collect();

    let mut divergences = BTreeSet::new();
    for m in &ws.models {
        let asset_types: BTreeSet<String> = m
            .assets
            .iter()
            .flat_map(|a| am.asset_types(&m.name, &a.name))
            .collect();
        let mut node_of_def: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
        for n in &m.nodes {
            for d in am.node_definitions(&m.name, &n.id) {
                node_of_def.entry(d).or_default().insert(&n.id);
            }
        }
        for p in m.processes() {
            let defs = am.process_definitions(&m.name, &p.id);
            if defs.is_empty() {
                continue;
            }
            let Ok(out) = out_flows(&ws.pm, &defs) else { continue };
            let mut unmapped: BTreeMap<String, Vec<String>> = BTreeMap::new();
            let mut unspecified: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            for e in out.iter().filter(|e| asset_types.contains(communicated_type(e))) {
                let Some(target) = e.to.owner() else { continue };
                match node_of_def.get(target) {
                    None => unmapped.entry(target.to_string()).or_default().push(e.id.clone()),
                    Some(nodes) => {
                        for q in nodes {
                            let is_other_process = *q != p.id && m.node_kind(q) == Some(NodeKind::Process);
                            if is_other_process && !defs.contains(target) && !m.has_flow_between(&p.id, q) {
                                unspecified.entry(q).or_default().push(e.id.clone());
                            }
                        }
                    }
                }
            }
            for (definition, edges) in unmapped {
                divergences.insert(Divergence::UnmappedTarget {
                    process: DfdRef::new(&m.name, &p.id),
                    definition,
                    edges,
                });
            }
            for (q, edges) in unspecified {
                divergences.insert(Divergence::UnspecifiedFlow {
                    source: DfdRef::new(&m.name, &p.id),
                    target: DfdRef::new(&m.name, q),
                    edges,
                });
            }
        }
    }
    ComplianceReport {
        convergences,
        absences,
        divergences: divergences.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{decide, map_manually, run_iteration, Decision};
    use crate::pm::extract_pm;
    use crate::secdfd::parse_secdfd;

    const CODE: &str = "type Item { }\n\
        type S { def alpha(i: Item): void { gamma(i); helper(i); }\n\
        def gamma(i: Item): void { }\n\
        def helper(i: Item): void { } }\n";

    fn ws(dfd: &str) -> Workspace {
        Workspace::new(
            vec![parse_secdfd(dfd).unwrap()],
            extract_pm(&[("c.mini".into(), CODE.into())]).unwrap(),
        )
    }

    fn mapped(dfd: &str) -> (Workspace, MappingState) {
        let w = ws(dfd);
        let mut st = MappingState::new(&w);
        map_manually(&w, &mut st, &DfdRef::new("M", "item"), "type:Item").unwrap();
        map_manually(&w, &mut st, &DfdRef::new("M", "Alpha"), "def:S.alpha(Item):void").unwrap();
        map_manually(&w, &mut st, &DfdRef::new("M", "Gamma"), "def:S.gamma(Item):void").unwrap();
        (w, st)
    }

    const DFD: &str = "model M\nprocess Alpha\nprocess Gamma\nstore Box\n\
        asset item : Item high from Alpha to Gamma\nflow 1 : Alpha -> Gamma carrying item\n";

    #[test]
    fn unmapped_store_is_absent_and_helper_diverges() {
        let (w, st) = mapped(DFD);
        let r = compliance_report(&w, &st);
        assert_eq!(r.convergences.len(), 3);
        assert_eq!(
            r.absences,
            vec![Absence {
                element: DfdRef::new("M", "Box"),
                kind: DfdElementKind::Store
            }]
        );
        assert_eq!(r.divergences.len(), 1);
        assert!(matches!(&r.divergences[0], Divergence::UnmappedTarget { definition, .. } if definition == "def:S.helper(Item):void"));
    }

    #[test]
    fn missing_design_flow_diverges() {
        let dfd = "model M\nprocess Alpha\nprocess Gamma\nexternal X\n\
            asset item : Item high from Alpha to X\nflow 1 : Alpha -> X carrying item\nflow 2 : X -> Gamma carrying item\n";
        let (w, mut st) = mapped(dfd);
        map_manually(&w, &mut st, &DfdRef::new("M", "Alpha"), "def:S.helper(Item):void").unwrap();
        let r = compliance_report(&w, &st);
        assert_eq!(
            r.divergences,
            vec![Divergence::UnspecifiedFlow {
                source: DfdRef::new("M", "Alpha"),
                target: DfdRef::new("M", "Gamma"),
                edges: vec![w.pm.flows.iter().find(|e| e.to.to_string().contains("gamma")).unwrap().id.clone()],
            }]
        );
    }

    #[test]
    fn pending_entries_do_not_converge() {
        let w = ws(DFD);
        let mut st = MappingState::new(&w);
        run_iteration(&w, &mut st);
        assert!(compliance_report(&w, &st).convergences.is_empty());
        let id = st.entries[0].id.clone();
        decide(&mut st, &id, Decision::Accept).unwrap();
        assert_eq!(compliance_report(&w, &st).convergences.len(), 1);
    }
}
