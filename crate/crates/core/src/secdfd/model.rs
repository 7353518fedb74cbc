use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Confidentiality label of an asset occurrence. `Low < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Low,
    High,
}

impl Label {
    pub fn join(self, other: Label) -> Label {
        self.max(other)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Low => f.write_str("low"),
            Label::High => f.write_str("high"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Process,
    ExternalEntity,
    DataStore,
}

impl NodeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            NodeKind::Process => "process",
            NodeKind::ExternalEntity => "external",
            NodeKind::DataStore => "store",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ContractKind {
    EncryptOrHash,
    Decrypt,
    Join,
    Forward,
}

impl ContractKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ContractKind::EncryptOrHash => "encrypt",
            ContractKind::Decrypt => "decrypt",
            ContractKind::Join => "join",
            ContractKind::Forward => "forward",
        }
    }

    pub fn is_crypto(self) -> bool {
        matches!(self, ContractKind::EncryptOrHash | ContractKind::Decrypt)
    }

    pub fn is_processing(self) -> bool {
        matches!(self, ContractKind::Join | ContractKind::Forward)
    }
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessContract {
    pub kind: ContractKind,
    pub in_assets: Vec<String>,
    pub out_assets: Vec<String>,
}

impl ProcessContract {
    pub fn new(kind: ContractKind, ins: &[&str], outs: &[&str]) -> Self {
        ProcessContract {
            kind,
            in_assets: ins.iter().map(|s| s.to_string()).collect(),
            out_assets: outs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Two contracts are equivalent when kind, input set and output set agree.
    pub fn equivalent(&self, other: &ProcessContract) -> bool {
        let set = |v: &[String]| v.iter().cloned().collect::<BTreeSet<_>>();
        self.kind == other.kind
            && set(&self.in_assets) == set(&other.in_assets)
            && set(&self.out_assets) == set(&other.out_assets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfdNode {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contracts: Vec<ProcessContract>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfdFlow {
    pub index: u32,
    pub source: String,
    pub target: String,
    pub assets: Vec<String>,
}

impl DfdFlow {
    pub fn carries(&self, asset: &str) -> bool {
        self.assets.iter().any(|a| a == asset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Asset {
    pub name: String,
    pub value_type: String,
    pub label: Label,
    pub source: String,
    pub targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ref", rename_all = "lowercase")]
pub enum ZoneMember {
    Node(String),
    Flow(u32),
}

impl fmt::Display for ZoneMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneMember::Node(id) => f.write_str(id),
            ZoneMember::Flow(ix) => write!(f, "{ix}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackerZone {
    pub name: String,
    pub members: Vec<ZoneMember>,
}

/// Trust boundaries are accepted by the parser and kept for printing only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustBoundary {
    pub name: String,
    pub members: Vec<String>,
}

/// A security data flow diagram.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SecDfd {
    pub name: String,
    pub nodes: Vec<DfdNode>,
    pub flows: Vec<DfdFlow>,
    pub assets: Vec<Asset>,
    pub zones: Vec<AttackerZone>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundaries: Vec<TrustBoundary>,
}

/// Identifies a contract by its owning process and position in that process's list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ContractRef {
    pub process: String,
    pub index: usize,
}

impl fmt::Display for ContractRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.process, self.index)
    }
}

impl SecDfd {
    pub fn node(&self, id: &str) -> Option<&DfdNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_kind(&self, id: &str) -> Option<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    pub fn asset(&self, name: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.name == name)
    }

    pub fn flow(&self, index: u32) -> Option<&DfdFlow> {
        self.flows.iter().find(|f| f.index == index)
    }

    pub fn processes(&self) -> impl Iterator<Item = &DfdNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Process)
    }

    pub fn contract(&self, r: &ContractRef) -> Option<&ProcessContract> {
        self.node(&r.process).and_then(|n| n.contracts.get(r.index))
    }

    /// Flows in index order.
    pub fn flows_sorted(&self) -> Vec<&DfdFlow> {
        let mut v: Vec<&DfdFlow> = self.flows.iter().collect();
        v.sort_by_key(|f| f.index);
        v
    }

    pub fn incoming(&self, node: &str) -> impl Iterator<Item = &DfdFlow> {
        let node = node.to_string();
        self.flows.iter().filter(move |f| f.target == node)
    }

    pub fn outgoing(&self, node: &str) -> impl Iterator<Item = &DfdFlow> {
        let node = node.to_string();
        self.flows.iter().filter(move |f| f.source == node)
    }

    /// Assets carried by flows entering `node`, sorted and deduplicated.
    pub fn in_assets(&self, node: &str) -> BTreeSet<String> {
        self.incoming(node).flat_map(|f| f.assets.iter().cloned()).collect()
    }

    pub fn out_assets(&self, node: &str) -> BTreeSet<String> {
        self.outgoing(node).flat_map(|f| f.assets.iter().cloned()).collect()
    }

    pub fn has_flow_between(&self, from: &str, to: &str) -> bool {
        self.flows.iter().any(|f| f.source == from && f.target == to)
    }

    /// Every (flow index, asset) pair where the flow carries the asset.
    pub fn occurrences(&self) -> BTreeSet<(u32, String)> {
        self.flows
            .iter()
            .flat_map(|f| f.assets.iter().map(move |a| (f.index, a.clone())))
            .collect()
    }

    pub fn contracts(&self) -> impl Iterator<Item = (ContractRef, &ProcessContract)> {
        self.nodes.iter().flat_map(|n| {
            n.contracts.iter().enumerate().map(move |(i, c)| {
                (
                    ContractRef {
                        process: n.id.clone(),
                        index: i,
                    },
                    c,
                )
            })
        })
    }
}
