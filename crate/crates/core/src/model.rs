//! Deployment models: nodes, deployed artifacts, communication paths and groups.
//!
//! Models are read from `.cloudmodel.json` documents carrying `"schema": 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::PurchaseMode;
use crate::error::{syntax_parts, ModelError};
use crate::patterns::UsageSpec;

pub const MODEL_SCHEMA: u64 = 1;

static ZERO_USAGE: UsageSpec = UsageSpec {
    baseline: 0.0,
    patterns: Vec::new(),
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    VirtualMachine,
    VirtualStorage,
    Database,
    RemoteNode,
}

impl NodeKind {
    pub const ALL: [NodeKind; 4] = [
        NodeKind::VirtualMachine,
        NodeKind::VirtualStorage,
        NodeKind::Database,
        NodeKind::RemoteNode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::VirtualMachine => "virtual-machine",
            NodeKind::VirtualStorage => "virtual-storage",
            NodeKind::Database => "database",
            NodeKind::RemoteNode => "remote-node",
        }
    }

    pub fn is_billable(self) -> bool {
        self != NodeKind::RemoteNode
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerSpecs {
    pub cpu_ghz: f64,
    pub ram_gb: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub os: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub server_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specs: Option<ServerSpecs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_gb: Option<UsageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_count: Option<UsageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub io_in_requests_per_month: Option<UsageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub io_out_requests_per_month: Option<UsageSpec>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Node {
            id: id.into(),
            kind,
            os: None,
            server_type: None,
            specs: None,
            storage_type: None,
            size_gb: None,
            instance_count: None,
            io_in_requests_per_month: None,
            io_out_requests_per_month: None,
        }
    }

    pub fn size_gb(&self) -> &UsageSpec {
        self.size_gb.as_ref().unwrap_or(&ZERO_USAGE)
    }

    pub fn instance_count(&self) -> &UsageSpec {
        self.instance_count.as_ref().unwrap_or(&ZERO_USAGE)
    }

    pub fn io_in(&self) -> &UsageSpec {
        self.io_in_requests_per_month.as_ref().unwrap_or(&ZERO_USAGE)
    }

    pub fn io_out(&self) -> &UsageSpec {
        self.io_out_requests_per_month.as_ref().unwrap_or(&ZERO_USAGE)
    }

    fn usage_fields(&self) -> [(&'static str, Option<&UsageSpec>); 4] {
        [
            ("size_gb", self.size_gb.as_ref()),
            ("instance_count", self.instance_count.as_ref()),
            ("io_in_requests_per_month", self.io_in_requests_per_month.as_ref()),
            ("io_out_requests_per_month", self.io_out_requests_per_month.as_ref()),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    Application,
    Data,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub id: String,
    pub kind: ArtifactKind,
    pub deployed_on: String,
}

/// Default SKU used to price transfer on a path without an explicit `transfer_type`.
pub const DEFAULT_TRANSFER_TYPE: &str = "internet";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunicationPath {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "UsageSpec::is_zero")]
    pub data_in_gb_per_month: UsageSpec,
    #[serde(default, skip_serializing_if = "UsageSpec::is_zero")]
    pub data_out_gb_per_month: UsageSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer_type: Option<String>,
}

impl CommunicationPath {
    pub fn transfer_type(&self) -> &str {
        self.transfer_type.as_deref().unwrap_or(DEFAULT_TRANSFER_TYPE)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Group {
    pub id: String,
    pub label: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderBinding {
    pub provider: String,
    pub region: String,
    pub purchase_mode: PurchaseMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_months: Option<u32>,
}

impl ProviderBinding {
    pub fn on_demand(provider: impl Into<String>, region: impl Into<String>) -> Self {
        ProviderBinding {
            provider: provider.into(),
            region: region.into(),
            purchase_mode: PurchaseMode::OnDemand,
            term_months: None,
        }
    }

    pub fn reserved(provider: impl Into<String>, region: impl Into<String>, term: u32) -> Self {
        ProviderBinding {
            provider: provider.into(),
            region: region.into(),
            purchase_mode: PurchaseMode::Reserved,
            term_months: Some(term),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeploymentModel {
    pub name: String,
    pub nodes: Vec<Node>,
    pub artifacts: Vec<Artifact>,
    pub paths: Vec<CommunicationPath>,
    pub groups: Vec<Group>,
    pub provider_bindings: BTreeMap<String, ProviderBinding>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    schema: u64,
    name: String,
    #[serde(default)]
    nodes: Vec<Node>,
    #[serde(default)]
    artifacts: Vec<Artifact>,
    #[serde(default)]
    paths: Vec<CommunicationPath>,
    #[serde(default)]
    groups: Vec<Group>,
    #[serde(default)]
    provider_bindings: BTreeMap<String, ProviderBinding>,
}

impl DeploymentModel {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Group each node is attributed to, directly or through an artifact deployed on it.
    /// Direct membership wins; otherwise the first group (in declaration order) listing
    /// an artifact hosted on the node.
    pub fn node_groups(&self) -> HashMap<&str, &str> {
        let mut out: HashMap<&str, &str> = HashMap::new();
        let node_ids: BTreeSet<&str> = self.nodes.iter().map(|n| n.id.as_str()).collect();
        for g in &self.groups {
            for m in &g.members {
                if node_ids.contains(m.as_str()) {
                    out.entry(m.as_str()).or_insert(g.id.as_str());
                }
            }
        }
        for g in &self.groups {
            for m in &g.members {
                if let Some(a) = self.artifacts.iter().find(|a| &a.id == m) {
                    if node_ids.contains(a.deployed_on.as_str()) {
                        out.entry(a.deployed_on.as_str()).or_insert(g.id.as_str());
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            schema: MODEL_SCHEMA,
            name: self.name.clone(),
            nodes: self.nodes.clone(),
            artifacts: self.artifacts.clone(),
            paths: self.paths.clone(),
            groups: self.groups.clone(),
            provider_bindings: self.provider_bindings.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }
}

/// Reads a model document without checking structural invariants beyond
/// well-formedness, known node kinds and id uniqueness.
pub fn parse_model_unchecked(document: &str) -> Result<DeploymentModel, ModelError> {
    let syntax = |e: serde_json::Error| {
        let (line, column, message) = syntax_parts(&e);
        ModelError::Syntax {
            line,
            column,
            message,
        }
    };
    let value: serde_json::Value = serde_json::from_str(document).map_err(syntax)?;
    match value.get("schema").and_then(|s| s.as_u64()) {
        Some(MODEL_SCHEMA) => {}
        Some(other) => return Err(ModelError::Schema(other)),
        None => {
            return Err(ModelError::Syntax {
                line: 1,
                column: 1,
                message: "missing required field `schema`".into(),
            })
        }
    }
    if let Some(nodes) = value.get("nodes").and_then(|n| n.as_array()) {
        for n in nodes {
            if let Some(kind) = n.get("kind").and_then(|k| k.as_str()) {
                if !NodeKind::ALL.iter().any(|k| k.as_str() == kind) {
                    return Err(ModelError::UnknownNodeKind(kind.to_string()));
                }
            }
        }
    }
    let doc: ModelDocument = serde_json::from_str(document).map_err(syntax)?;
    let model = DeploymentModel {
        name: doc.name,
        nodes: doc.nodes,
        artifacts: doc.artifacts,
        paths: doc.paths,
        groups: doc.groups,
        provider_bindings: doc.provider_bindings,
    };
    if let Some(dup) = first_duplicate(&model) {
        return Err(ModelError::DuplicateId(dup));
    }
    Ok(model)
}

/// Reads a model document and rejects it unless every structural invariant holds.
pub fn parse_model(document: &str) -> Result<DeploymentModel, ModelError> {
    let model = parse_model_unchecked(document)?;
    let violations = validate(&model);
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(ModelError::Invalid(violations))
    }
}

fn first_duplicate(model: &DeploymentModel) -> Option<String> {
    let mut seen = BTreeSet::new();
    model
        .nodes
        .iter()
        .map(|n| &n.id)
        .chain(model.artifacts.iter().map(|a| &a.id))
        .chain(model.paths.iter().map(|p| &p.id))
        .find(|id| !seen.insert(id.as_str()))
        .cloned()
        .or_else(|| {
            let mut groups = BTreeSet::new();
            model
                .groups
                .iter()
                .map(|g| &g.id)
                .find(|id| !groups.insert(id.as_str()))
                .cloned()
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    DuplicateId,
    UnknownDeploymentTarget,
    IncompatibleDeploymentTarget,
    UnknownEndpoint,
    SelfLoop,
    EmptyGroup,
    DanglingMember,
    MultipleGroups,
    ServerTypeAndSpecs,
    MissingServer,
    InvalidSpecs,
    MissingStorageType,
    FieldNotApplicable,
    NegativeBaseline,
    RemoteNodeUsage,
    UnboundNode,
    BindingUnknownNode,
    BindingOnRemoteNode,
    ReservedWithoutTerm,
    TermWithoutReservation,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::DuplicateId => "duplicate id",
            Rule::UnknownDeploymentTarget => "unknown deployment target",
            Rule::IncompatibleDeploymentTarget => "incompatible deployment target",
            Rule::UnknownEndpoint => "unknown endpoint",
            Rule::SelfLoop => "self-loop",
            Rule::EmptyGroup => "empty group",
            Rule::DanglingMember => "dangling member",
            Rule::MultipleGroups => "multiple groups",
            Rule::ServerTypeAndSpecs => "both server type and specs",
            Rule::MissingServer => "missing server type or specs",
            Rule::InvalidSpecs => "invalid server specs",
            Rule::MissingStorageType => "missing storage type",
            Rule::FieldNotApplicable => "field not applicable",
            Rule::NegativeBaseline => "negative baseline",
            Rule::RemoteNodeUsage => "remote node has usage",
            Rule::UnboundNode => "unbound node",
            Rule::BindingUnknownNode => "binding for unknown node",
            Rule::BindingOnRemoteNode => "binding on remote node",
            Rule::ReservedWithoutTerm => "reserved without term",
            Rule::TermWithoutReservation => "term without reservation",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A broken model invariant and the element that breaks it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub element: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn new(element: &str, rule: Rule, detail: impl Into<String>) -> Self {
        Violation {
            element: element.to_string(),
            rule,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.rule)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn check_baseline(out: &mut Vec<Violation>, element: &str, field: &str, spec: &UsageSpec) {
    if !(spec.baseline >= 0.0 && spec.baseline.is_finite()) {
        out.push(Violation::new(
            element,
            Rule::NegativeBaseline,
            format!("{field} = {}", spec.baseline),
        ));
    }
}

fn check_node(out: &mut Vec<Violation>, node: &Node) {
    let id = node.id.as_str();
    let not_applicable = |out: &mut Vec<Violation>, field: &str| {
        out.push(Violation::new(
            id,
            Rule::FieldNotApplicable,
            format!("{field} on {}", node.kind),
        ));
    };
    for (field, spec) in node.usage_fields() {
        if let Some(spec) = spec {
            check_baseline(out, id, field, spec);
        }
    }
    match node.kind {
        NodeKind::VirtualMachine => {
            match (&node.server_type, &node.specs) {
                (Some(_), Some(_)) => out.push(Violation::new(id, Rule::ServerTypeAndSpecs, "")),
                (None, None) => out.push(Violation::new(id, Rule::MissingServer, "")),
                _ => {}
            }
            if let Some(s) = node.specs {
                if !(s.cpu_ghz > 0.0 && s.ram_gb > 0.0) {
                    out.push(Violation::new(id, Rule::InvalidSpecs, "cpu_ghz and ram_gb must be positive"));
                }
            }
            if node.storage_type.is_some() {
                not_applicable(out, "storage_type");
            }
            for (field, spec) in node.usage_fields() {
                if field != "instance_count" && spec.is_some() {
                    not_applicable(out, field);
                }
            }
        }
        NodeKind::VirtualStorage | NodeKind::Database => {
            if node.storage_type.is_none() {
                out.push(Violation::new(id, Rule::MissingStorageType, ""));
            }
            if node.os.is_some() {
                not_applicable(out, "os");
            }
            if node.specs.is_some() {
                not_applicable(out, "specs");
            }
            if node.kind == NodeKind::VirtualStorage && node.server_type.is_some() {
                not_applicable(out, "server_type");
            }
            if node.instance_count.is_some() {
                not_applicable(out, "instance_count");
            }
        }
        NodeKind::RemoteNode => {
            let has_usage = node.usage_fields().iter().any(|(_, s)| s.is_some())
                || node.server_type.is_some()
                || node.specs.is_some()
                || node.storage_type.is_some();
            if has_usage {
                out.push(Violation::new(id, Rule::RemoteNodeUsage, ""));
            }
        }
    }
}

/// Checks every structural invariant and returns the violations found, in a stable order.
pub fn validate(model: &DeploymentModel) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut seen = BTreeSet::new();
    for id in model
        .nodes
        .iter()
        .map(|n| &n.id)
        .chain(model.artifacts.iter().map(|a| &a.id))
        .chain(model.paths.iter().map(|p| &p.id))
    {
        if !seen.insert(id.as_str()) {
            out.push(Violation::new(id, Rule::DuplicateId, ""));
        }
    }
    let mut group_ids = BTreeSet::new();
    for g in &model.groups {
        if !group_ids.insert(g.id.as_str()) {
            out.push(Violation::new(&g.id, Rule::DuplicateId, "group"));
        }
    }

    let nodes: HashMap<&str, &Node> = model.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

    for node in &model.nodes {
        check_node(&mut out, node);
    }

    for a in &model.artifacts {
        match nodes.get(a.deployed_on.as_str()) {
            None => out.push(Violation::new(
                &a.id,
                Rule::UnknownDeploymentTarget,
                a.deployed_on.clone(),
            )),
            Some(n) => {
                let ok = match a.kind {
                    ArtifactKind::Application => n.kind == NodeKind::VirtualMachine,
                    ArtifactKind::Data => {
                        matches!(n.kind, NodeKind::VirtualStorage | NodeKind::Database)
                    }
                };
                if !ok {
                    out.push(Violation::new(
                        &a.id,
                        Rule::IncompatibleDeploymentTarget,
                        format!("{} on {}", a.deployed_on, n.kind),
                    ));
                }
            }
        }
    }

    for p in &model.paths {
        for end in [&p.from, &p.to] {
            if !nodes.contains_key(end.as_str()) {
                out.push(Violation::new(&p.id, Rule::UnknownEndpoint, end.clone()));
            }
        }
        if p.from == p.to {
            out.push(Violation::new(&p.id, Rule::SelfLoop, p.from.clone()));
        }
        check_baseline(&mut out, &p.id, "data_in_gb_per_month", &p.data_in_gb_per_month);
        check_baseline(&mut out, &p.id, "data_out_gb_per_month", &p.data_out_gb_per_month);
    }

    let artifacts: HashMap<&str, &Artifact> =
        model.artifacts.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut node_group: BTreeMap<&str, &str> = BTreeMap::new();
    for g in &model.groups {
        if g.members.is_empty() {
            out.push(Violation::new(&g.id, Rule::EmptyGroup, ""));
        }
        for m in &g.members {
            let host = if nodes.contains_key(m.as_str()) {
                Some(m.as_str())
            } else if let Some(a) = artifacts.get(m.as_str()) {
                nodes.contains_key(a.deployed_on.as_str()).then_some(a.deployed_on.as_str())
            } else {
                out.push(Violation::new(&g.id, Rule::DanglingMember, m.clone()));
                None
            };
            if let Some(host) = host {
                match node_group.get(host) {
                    Some(prev) if *prev != g.id.as_str() => out.push(Violation::new(
                        host,
                        Rule::MultipleGroups,
                        format!("{prev} and {}", g.id),
                    )),
                    Some(_) => {}
                    None => {
                        node_group.insert(host, g.id.as_str());
                    }
                }
            }
        }
    }

    for node in &model.nodes {
        if node.kind.is_billable() && !model.provider_bindings.contains_key(&node.id) {
            out.push(Violation::new(&node.id, Rule::UnboundNode, ""));
        }
    }
    for (id, b) in &model.provider_bindings {
        match nodes.get(id.as_str()) {
            None => out.push(Violation::new(id, Rule::BindingUnknownNode, "")),
            Some(n) if n.kind == NodeKind::RemoteNode => {
                out.push(Violation::new(id, Rule::BindingOnRemoteNode, ""))
            }
            Some(_) => {}
        }
        match (b.purchase_mode, b.term_months) {
            (PurchaseMode::Reserved, None) | (PurchaseMode::Reserved, Some(0)) => {
                out.push(Violation::new(id, Rule::ReservedWithoutTerm, ""))
            }
            (PurchaseMode::OnDemand, Some(_)) => {
                out.push(Violation::new(id, Rule::TermWithoutReservation, ""))
            }
            _ => {}
        }
    }

    out
}
