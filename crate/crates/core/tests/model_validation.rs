mod common;

use cloudcost::model::{parse_model_unchecked, Artifact, ArtifactKind, Group, Node, NodeKind, Rule};
use cloudcost::{parse_model, validate, DeploymentModel, ModelError};
use common::fixture;

fn lease() -> DeploymentModel {
    parse_model(&fixture("school-lease.cloudmodel.json")).unwrap()
}

fn rules(m: &DeploymentModel) -> Vec<Rule> {
    validate(m).into_iter().map(|v| v.rule).collect()
}

#[test]
fn fixtures_round_trip() {
    for file in ["school-lease.cloudmodel.json", "school-elastic.cloudmodel.json"] {
        let m = parse_model(&fixture(file)).unwrap();
        assert_eq!(m.nodes.len(), 13);
        assert_eq!(m.groups.len(), 8);
        assert!(validate(&m).is_empty());
        assert_eq!(parse_model(&m.to_json()).unwrap(), m);
    }
}

#[test]
fn injected_violations_are_reported() {
    let mut m = lease();
    m.artifacts[0].deployed_on = "nowhere".into();
    assert_eq!(rules(&m), vec![Rule::UnknownDeploymentTarget]);

    let mut m = lease();
    m.artifacts.push(Artifact {
        id: "stray".into(),
        kind: ArtifactKind::Data,
        deployed_on: "teaching-vm".into(),
    });
    assert_eq!(rules(&m), vec![Rule::IncompatibleDeploymentTarget]);

    let mut m = lease();
    m.paths[0].to = m.paths[0].from.clone();
    assert_eq!(rules(&m), vec![Rule::SelfLoop]);

    let mut m = lease();
    m.groups[0].members.push("ghost".into());
    assert_eq!(rules(&m), vec![Rule::DanglingMember]);

    let mut m = lease();
    m.groups.push(Group { id: "empty".into(), label: "Empty".into(), members: vec![] });
    assert_eq!(rules(&m), vec![Rule::EmptyGroup]);

    let mut m = lease();
    m.groups[1].members.push("teaching-vm".into());
    assert_eq!(rules(&m), vec![Rule::MultipleGroups]);

    let mut m = lease();
    m.provider_bindings.remove("email-vm");
    assert_eq!(rules(&m), vec![Rule::UnboundNode]);

    let mut m = lease();
    m.nodes.push(Node::new("email-vm", NodeKind::RemoteNode));
    assert!(rules(&m).contains(&Rule::DuplicateId));

    let mut m = lease();
    m.provider_bindings.get_mut("email-vm").unwrap().term_months = None;
    assert_eq!(rules(&m), vec![Rule::ReservedWithoutTerm]);
}

#[test]
fn strict_parse_lists_every_violation() {
    let mut m = lease();
    m.paths[0].to = m.paths[0].from.clone();
    m.provider_bindings.remove("email-vm");
    match parse_model(&m.to_json()) {
        Err(ModelError::Invalid(v)) => assert_eq!(v.len(), 2),
        other => panic!("{other:?}"),
    }
    assert!(parse_model_unchecked(&m.to_json()).is_ok());
}

#[test]
fn malformed_documents() {
    assert!(matches!(parse_model("{"), Err(ModelError::Syntax { .. })));
    assert!(matches!(
        parse_model(r#"{"schema": 2, "name": "x"}"#),
        Err(ModelError::Schema(2))
    ));
    assert!(matches!(
        parse_model(r#"{"schema": 1, "name": "x", "nodes": [{"id": "a", "kind": "mainframe"}]}"#),
        Err(ModelError::UnknownNodeKind(k)) if k == "mainframe"
    ));
    let bad_pattern = r#"{"schema": 1, "name": "x", "nodes": [{"id": "a", "kind": "virtual-machine",
        "server_type": "s", "instance_count": {"baseline": 1, "patterns": "perm: every month on weekends +1"}}]}"#;
    let err = parse_model(bad_pattern).unwrap_err();
    assert!(err.to_string().contains("perm cannot carry day scope"), "{err}");
}
