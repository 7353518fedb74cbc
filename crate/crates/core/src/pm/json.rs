//! Canonical JSON interchange for program models (`.pm.json`).

use super::model::*;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPm {
    types: Vec<RawType>,
    #[serde(rename = "methodNames")]
    method_names: Vec<RawName>,
    signatures: Vec<RawSig>,
    definitions: Vec<RawDef>,
    fields: Vec<RawField>,
    calls: Vec<RawCall>,
    flows: Vec<RawFlow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawType {
    id: String,
    #[serde(rename = "qualifiedName")]
    qualified_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    supertype: Option<String>,
    #[serde(rename = "memberFields")]
    member_fields: Vec<String>,
    #[serde(rename = "memberDefs")]
    member_defs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawName {
    id: String,
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSig {
    id: String,
    name: String,
    params: Vec<String>,
    #[serde(rename = "return")]
    ret: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoc {
    file: String,
    start: u32,
    end: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDef {
    id: String,
    signature: String,
    #[serde(rename = "declaringType")]
    declaring_type: String,
    loc: RawLoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    id: String,
    name: String,
    #[serde(rename = "declaringType")]
    declaring_type: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCall {
    caller: String,
    callee: String,
    site: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    id: String,
    kind: String,
    from: String,
    to: String,
    #[serde(rename = "type")]
    ty: String,
}

/// Parses and validates a program model.
pub fn load_pm(bytes: &[u8]) -> Result<ProgramModel, PmError> {
    let raw: RawPm = serde_json::from_slice(bytes).map_err(|e| PmError::Schema(e.to_string()))?;
    let mut parts = PmParts {
        types: Vec::new(),
        ..PmParts::default()
    };
    parts.types = raw
        .types
        .into_iter()
        .map(|t| TypeDecl {
            id: t.id,
            qualified_name: t.qualified_name,
            supertype: t.supertype,
            member_fields: t.member_fields,
            member_defs: t.member_defs,
        })
        .collect();
    parts.method_names = raw
        .method_names
        .into_iter()
        .map(|n| MethodName { id: n.id, name: n.name })
        .collect();
    parts.signatures = raw
        .signatures
        .into_iter()
        .map(|s| MethodSignature {
            id: s.id,
            name: s.name,
            params: s.params,
            ret: s.ret,
        })
        .collect();
    parts.definitions = raw
        .definitions
        .into_iter()
        .map(|d| MethodDefinition {
            id: d.id,
            signature: d.signature,
            declaring_type: d.declaring_type,
            loc: SourceLoc {
                file: d.loc.file,
                start: d.loc.start,
                end: d.loc.end,
            },
        })
        .collect();
    parts.fields = raw
        .fields
        .into_iter()
        .map(|f| FieldDecl {
            id: f.id,
            name: f.name,
            declaring_type: f.declaring_type,
            ty: f.ty,
        })
        .collect();
    parts.calls = raw
        .calls
        .into_iter()
        .map(|c| CallEdge {
            caller: c.caller,
            callee: c.callee,
            site: c.site,
        })
        .collect();
    parts.flows = raw
        .flows
        .into_iter()
        .map(|f| {
            Ok(DataFlowEdge {
                kind: f.kind.parse()?,
                from: f.from.parse()?,
                to: f.to.parse()?,
                id: f.id,
                ty: f.ty,
            })
        })
        .collect::<Result<_, PmError>>()?;
    ProgramModel::from_parts(parts)
}

/// Serializes in canonical form: collections sorted by id, two-space indentation, trailing newline.
pub fn save_pm(pm: &ProgramModel) -> Vec<u8> {
    let raw = RawPm {
        types: pm
            .types
            .iter()
            .map(|t| RawType {
                id: t.id.clone(),
                qualified_name: t.qualified_name.clone(),
                supertype: t.supertype.clone(),
                member_fields: t.member_fields.clone(),
                member_defs: t.member_defs.clone(),
            })
            .collect(),
        method_names: pm
            .method_names
            .iter()
            .map(|n| RawName {
                id: n.id.clone(),
                name: n.name.clone(),
            })
            .collect(),
        signatures: pm
            .signatures
            .iter()
            .map(|s| RawSig {
                id: s.id.clone(),
                name: s.name.clone(),
                params: s.params.clone(),
                ret: s.ret.clone(),
            })
            .collect(),
        definitions: pm
            .definitions
            .iter()
            .map(|d| RawDef {
                id: d.id.clone(),
                signature: d.signature.clone(),
                declaring_type: d.declaring_type.clone(),
                loc: RawLoc {
                    file: d.loc.file.clone(),
                    start: d.loc.start,
                    end: d.loc.end,
                },
            })
            .collect(),
        fields: pm
            .fields
            .iter()
            .map(|f| RawField {
                id: f.id.clone(),
                name: f.name.clone(),
                declaring_type: f.declaring_type.clone(),
                ty: f.ty.clone(),
            })
            .collect(),
        calls: pm
            .calls
            .iter()
            .map(|c| RawCall {
                caller: c.caller.clone(),
                callee: c.callee.clone(),
                site: c.site,
            })
            .collect(),
        flows: pm
            .flows
            .iter()
            .map(|f| RawFlow {
                id: f.id.clone(),
                kind: f.kind.as_str().to_string(),
                from: f.from.to_string(),
                to: f.to.to_string(),
                ty: f.ty.clone(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&raw).expect("pm serializes");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{
  "types": [
    {"id": "type:A", "qualifiedName": "A", "memberFields": [], "memberDefs": ["def:A.f(String):String", "def:A.g(String):String"]},
    {"id": "type:String", "qualifiedName": "String", "memberFields": [], "memberDefs": []}
  ],
  "methodNames": [{"id": "name:f", "name": "f"}, {"id": "name:g", "name": "g"}],
  "signatures": [
    {"id": "sig:f(String):String", "name": "name:f", "params": ["type:String"], "return": "type:String"},
    {"id": "sig:g(String):String", "name": "name:g", "params": ["type:String"], "return": "type:String"}
  ],
  "definitions": [
    {"id": "def:A.f(String):String", "signature": "sig:f(String):String", "declaringType": "type:A", "loc": {"file": "a.mini", "start": 1, "end": 3}},
    {"id": "def:A.g(String):String", "signature": "sig:g(String):String", "declaringType": "type:A", "loc": {"file": "a.mini", "start": 4, "end": 6}}
  ],
  "fields": [],
  "calls": [{"caller": "def:A.f(String):String", "callee": "def:A.g(String):String", "site": 0}],
  "flows": [
    {"id": "flow:000001", "kind": "PARAM_PASS", "from": "param:def:A.f(String):String:0", "to": "param:def:A.g(String):String:0", "type": "type:String"},
    {"id": "flow:000002", "kind": "RETURN_FLOW", "from": "return:def:A.g(String):String", "to": "local:def:A.f(String):String:0", "type": "type:String"},
    {"id": "flow:000003", "kind": "INTRA", "from": "local:def:A.f(String):String:0", "to": "return:def:A.f(String):String", "type": "type:String"}
  ]
}"#;

    #[test]
    fn hand_written_model_loads_with_listed_edges() {
        let pm = load_pm(THREE.as_bytes()).unwrap();
        assert_eq!(pm.definitions.len(), 2);
        assert_eq!(pm.flows.len(), 3);
        let kinds: Vec<_> = pm.flows.iter().map(|f| f.kind).collect();
        assert_eq!(
            kinds,
            vec![FlowKind::ParamPass, FlowKind::ReturnFlow, FlowKind::Intra]
        );
        assert_eq!(
            pm.flows[1].from,
            Endpoint::Return("def:A.g(String):String".into())
        );
        assert_eq!(
            pm.flows[1].to,
            Endpoint::Local("def:A.f(String):String".into(), 0)
        );
    }

    #[test]
    fn save_load_is_byte_stable() {
        let pm = load_pm(THREE.as_bytes()).unwrap();
        let bytes = save_pm(&pm);
        let again = load_pm(&bytes).unwrap();
        assert_eq!(pm, again);
        assert_eq!(bytes, save_pm(&again));
    }

    #[test]
    fn truncated_input_is_schema_error() {
        let cut = &THREE.as_bytes()[..THREE.len() / 2];
        assert!(matches!(load_pm(cut), Err(PmError::Schema(_))));
    }

    #[test]
    fn dangling_signature_rejected() {
        let bad = THREE.replace(
            "\"signature\": \"sig:g(String):String\"",
            "\"signature\": \"sig:h()\"",
        );
        assert!(matches!(
            load_pm(bad.as_bytes()),
            Err(PmError::Dangling { .. })
        ));
    }

    #[test]
    fn return_flow_must_leave_a_return() {
        let bad = THREE.replace(
            "\"from\": \"return:def:A.g(String):String\"",
            "\"from\": \"param:def:A.g(String):String:0\"",
        );
        assert!(matches!(load_pm(bad.as_bytes()), Err(PmError::Invariant(_))));
    }

    #[test]
    fn endpoint_strings_round_trip() {
        for s in [
            "param:def:A.f(String,int):String:1",
            "return:def:A.f():void",
            "field:A.x",
            "local:def:A.f():void:12",
        ] {
            let ep: Endpoint = s.parse().unwrap();
            assert_eq!(ep.to_string(), s);
        }
        assert!("param:def:x".parse::<Endpoint>().is_err());
        assert!("bogus".parse::<Endpoint>().is_err());
    }
}
