//! Month-by-month cost simulation of a deployment model.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rust_decimal::prelude::FromPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

use crate::calendar::{MonthWindow, YearMonth};
use crate::catalog::{
    apply_scenario, reservation_charges, PriceCatalog, PriceEntry, PriceKey, PriceResource,
    PriceScenario, PurchaseMode, ScenarioOverlay,
};
use crate::error::{CatalogError, EvalError, ModelError, SimulationError};
use crate::model::{validate, CommunicationPath, DeploymentModel, Node, NodeKind, ProviderBinding};
use crate::patterns::{month_quantity, Aggregation, UsageSpec};

/// Group key for lines whose element belongs to no group.
pub const UNGROUPED: &str = "ungrouped";

const HOURS_PER_DAY: f64 = 24.0;

/// What a cost line charges for: one of the priced resources or a reservation fee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CostResource {
    Priced(PriceResource),
    ReservationFee,
}

impl CostResource {
    pub fn as_str(self) -> &'static str {
        match self {
            CostResource::Priced(r) => r.as_str(),
            CostResource::ReservationFee => "reservation-fee",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            CostResource::Priced(PriceResource::InstanceHour) => "h",
            CostResource::Priced(PriceResource::StorageGbMonth) => "GB-month",
            CostResource::Priced(PriceResource::InputRequest)
            | CostResource::Priced(PriceResource::OutputRequest) => "requests",
            CostResource::Priced(PriceResource::DataInGb)
            | CostResource::Priced(PriceResource::DataOutGb) => "GB",
            CostResource::ReservationFee => "reservation",
        }
    }
}

impl fmt::Display for CostResource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CostResource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "reservation-fee" {
            return Ok(CostResource::ReservationFee);
        }
        PriceResource::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .map(CostResource::Priced)
            .ok_or_else(|| format!("unknown cost resource {s:?}"))
    }
}

impl Serialize for CostResource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CostResource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLine {
    pub month: YearMonth,
    pub element_id: String,
    pub resource: CostResource,
    pub quantity: f64,
    pub unit: String,
    pub unit_price: Decimal,
    pub cost: Decimal,
    pub group_id: Option<String>,
}

impl CostLine {
    fn sort_key(&self) -> (YearMonth, &str, CostResource) {
        (self.month, self.element_id.as_str(), self.resource)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyNode {
    pub id: String,
    pub kind: NodeKind,
    pub group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyEdge {
    pub id: String,
    pub from: String,
    pub to: String,
}

/// Shape of the simulated model, kept for rendering diagrams.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<TopologyNode>,
    pub edges: Vec<TopologyEdge>,
    /// Group id to display label.
    pub groups: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub model_name: String,
    pub catalog_label: String,
    pub scenario_label: Option<String>,
    pub window: MonthWindow,
    pub lines: Vec<CostLine>,
    pub monthly_totals: BTreeMap<YearMonth, Decimal>,
    pub group_totals: BTreeMap<String, BTreeMap<YearMonth, Decimal>>,
    pub topology: Topology,
}

impl CostReport {
    pub fn total(&self) -> Decimal {
        self.monthly_totals.values().copied().sum()
    }
}

/// Rounds a currency amount to cents, halves away from zero.
pub fn round_cents(amount: Decimal) -> Decimal {
    amount.round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero)
}

#[derive(Clone, Debug)]
pub struct Vertex<'m> {
    pub node: &'m Node,
    pub binding: Option<&'m ProviderBinding>,
    pub group: Option<&'m str>,
}

impl Vertex<'_> {
    pub fn is_billable(&self) -> bool {
        self.node.kind.is_billable()
    }
}

#[derive(Clone, Debug)]
pub struct Edge<'m> {
    pub path: &'m CommunicationPath,
    /// Binding of the endpoint that pays for transfer: `from` if it is a cloud node, else `to`.
    pub billed_to: Option<(&'m str, &'m ProviderBinding)>,
    pub group: Option<&'m str>,
}

/// The billable view of a model: one vertex per node, one edge per path.
#[derive(Clone, Debug, Default)]
pub struct CostGraph<'m> {
    pub vertices: Vec<Vertex<'m>>,
    pub edges: Vec<Edge<'m>>,
}

impl CostGraph<'_> {
    pub fn billable_vertices(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_billable()).count()
    }
}

pub fn build_graph(model: &DeploymentModel) -> Result<CostGraph<'_>, ModelError> {
    let violations = validate(model);
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    let groups = model.node_groups();
    let vertices = model
        .nodes
        .iter()
        .map(|node| Vertex {
            node,
            binding: model.provider_bindings.get(&node.id),
            group: groups.get(node.id.as_str()).copied(),
        })
        .collect();
    let edges = model
        .paths
        .iter()
        .map(|path| {
            let billed_to = [path.from.as_str(), path.to.as_str()]
                .into_iter()
                .find_map(|end| model.provider_bindings.get_key_value(end))
                .map(|(id, b)| (id.as_str(), b));
            Edge {
                path,
                billed_to,
                group: billed_to.and_then(|(id, _)| groups.get(id).copied()),
            }
        })
        .collect();
    Ok(CostGraph { vertices, edges })
}

fn topology(model: &DeploymentModel, graph: &CostGraph<'_>) -> Topology {
    Topology {
        nodes: graph
            .vertices
            .iter()
            .map(|v| TopologyNode {
                id: v.node.id.clone(),
                kind: v.node.kind,
                group: v.group.map(str::to_string),
            })
            .collect(),
        edges: model
            .paths
            .iter()
            .map(|p| TopologyEdge {
                id: p.id.clone(),
                from: p.from.clone(),
                to: p.to.clone(),
            })
            .collect(),
        groups: model
            .groups
            .iter()
            .map(|g| (g.id.clone(), g.label.clone()))
            .collect(),
    }
}

struct LineSink<'a> {
    catalog: &'a PriceCatalog,
    scenario: Option<&'a ScenarioOverlay>,
    lines: Vec<CostLine>,
}

impl LineSink<'_> {
    fn priced(
        &mut self,
        month: YearMonth,
        element: &str,
        group: Option<&str>,
        entry: &PriceEntry,
        quantity: f64,
    ) -> Result<(), SimulationError> {
        if quantity == 0.0 {
            return Ok(());
        }
        let price = apply_scenario(entry.unit_price, entry.resource, month, self.scenario)?;
        self.push(month, element, group, CostResource::Priced(entry.resource), quantity, price)
    }

    fn push(
        &mut self,
        month: YearMonth,
        element: &str,
        group: Option<&str>,
        resource: CostResource,
        quantity: f64,
        unit_price: Decimal,
    ) -> Result<(), SimulationError> {
        let overflow = || SimulationError::Overflow(format!("{element}/{resource} in {month}"));
        let q = Decimal::from_f64(quantity).ok_or_else(overflow)?;
        let cost = q.checked_mul(unit_price).ok_or_else(overflow)?;
        self.lines.push(CostLine {
            month,
            element_id: element.to_string(),
            resource,
            quantity,
            unit: resource.unit().to_string(),
            unit_price,
            cost,
            group_id: group.map(str::to_string),
        });
        Ok(())
    }
}

/// Per-day values of a usage spec for every month of the window.
fn window_days(
    spec: &UsageSpec,
    window: &MonthWindow,
    element: &str,
    field: &str,
) -> Result<Vec<(YearMonth, Vec<f64>)>, SimulationError> {
    let wrap = |source: EvalError| SimulationError::Usage {
        element: element.to_string(),
        field: field.to_string(),
        source,
    };
    spec.baselines(window.start)
        .take(window.len() as usize)
        .map(|step| {
            let (month, base) = step.map_err(wrap)?;
            let days = spec.days_from_baseline(base, month).map_err(wrap)?;
            Ok((month, days))
        })
        .collect()
}

fn monthly_average(
    spec: &UsageSpec,
    window: &MonthWindow,
    element: &str,
    field: &str,
) -> Result<Vec<(YearMonth, f64)>, SimulationError> {
    Ok(window_days(spec, window, element, field)?
        .into_iter()
        .map(|(m, days)| (m, month_quantity(&days, Aggregation::Average)))
        .collect())
}

fn instance_entry<'c>(
    catalog: &'c PriceCatalog,
    node: &Node,
    binding: &ProviderBinding,
) -> Result<&'c PriceEntry, CatalogError> {
    let entry = match (&node.server_type, node.specs) {
        (Some(sku), _) => catalog.entry(&PriceKey::new(
            &binding.provider,
            &binding.region,
            PriceResource::InstanceHour,
            sku,
            binding.purchase_mode,
        ))?,
        (None, Some(specs)) => {
            catalog.match_specs(&binding.provider, &binding.region, binding.purchase_mode, specs)?
        }
        (None, None) => unreachable!("validated model"),
    };
    if binding.purchase_mode == PurchaseMode::Reserved {
        let wanted = binding.term_months.unwrap_or_default();
        let offered = entry.term_months.unwrap_or_default();
        if wanted != offered {
            return Err(CatalogError::TermMismatch {
                key: entry.key().to_string(),
                wanted,
                offered,
            });
        }
    }
    Ok(entry)
}

fn simulate_vm(
    sink: &mut LineSink<'_>,
    vertex: &Vertex<'_>,
    binding: &ProviderBinding,
    window: &MonthWindow,
) -> Result<(), SimulationError> {
    let node = vertex.node;
    let entry = instance_entry(sink.catalog, node, binding)?;
    let days = window_days(node.instance_count(), window, &node.id, "instance_count")?;
    let mut peaks = Vec::with_capacity(days.len());
    for (month, series) in &days {
        let running: Vec<f64> = series.iter().map(|v| v.ceil()).collect();
        let hours = month_quantity(&running, Aggregation::SumOfDaily) * HOURS_PER_DAY;
        sink.priced(*month, &node.id, vertex.group, entry, hours)?;
        peaks.push(running.iter().copied().fold(0.0, f64::max));
    }
    if binding.purchase_mode == PurchaseMode::Reserved {
        let term = entry.term_months.unwrap_or(1).max(1) as usize;
        for (month, fee) in reservation_charges(entry, window) {
            let offset = month.months_since(window.start) as usize;
            let reservations = peaks[offset..(offset + term).min(peaks.len())]
                .iter()
                .copied()
                .fold(0.0, f64::max);
            if reservations > 0.0 {
                sink.push(
                    month,
                    &node.id,
                    vertex.group,
                    CostResource::ReservationFee,
                    reservations,
                    fee,
                )?;
            }
        }
    }
    Ok(())
}

fn simulate_storage(
    sink: &mut LineSink<'_>,
    vertex: &Vertex<'_>,
    binding: &ProviderBinding,
    window: &MonthWindow,
) -> Result<(), SimulationError> {
    let node = vertex.node;
    let sku = node.storage_type.as_deref().unwrap_or_default();
    let key = |resource| {
        PriceKey::new(&binding.provider, &binding.region, resource, sku, PurchaseMode::OnDemand)
    };
    let fields: [(&str, &UsageSpec, PriceResource); 3] = [
        ("size_gb", node.size_gb(), PriceResource::StorageGbMonth),
        ("io_in_requests_per_month", node.io_in(), PriceResource::InputRequest),
        ("io_out_requests_per_month", node.io_out(), PriceResource::OutputRequest),
    ];
    for (field, spec, resource) in fields {
        if spec.is_zero() {
            continue;
        }
        let entry = sink.catalog.entry(&key(resource))?;
        for (month, qty) in monthly_average(spec, window, &node.id, field)? {
            sink.priced(month, &node.id, vertex.group, entry, qty)?;
        }
    }
    if node.kind == NodeKind::Database {
        if let Some(server) = &node.server_type {
            let key = PriceKey::new(
                &binding.provider,
                &binding.region,
                PriceResource::InstanceHour,
                server,
                binding.purchase_mode,
            );
            if let Ok(entry) = sink.catalog.entry(&key) {
                for month in window.months() {
                    let hours = f64::from(month.days()) * HOURS_PER_DAY;
                    sink.priced(month, &node.id, vertex.group, entry, hours)?;
                }
            }
        }
    }
    Ok(())
}

fn simulate_edge(
    sink: &mut LineSink<'_>,
    edge: &Edge<'_>,
    window: &MonthWindow,
) -> Result<(), SimulationError> {
    let Some((_, binding)) = edge.billed_to else {
        return Ok(());
    };
    let path = edge.path;
    let fields: [(&str, &UsageSpec, PriceResource); 2] = [
        ("data_in_gb_per_month", &path.data_in_gb_per_month, PriceResource::DataInGb),
        ("data_out_gb_per_month", &path.data_out_gb_per_month, PriceResource::DataOutGb),
    ];
    for (field, spec, resource) in fields {
        if spec.is_zero() {
            continue;
        }
        let entry = sink.catalog.entry(&PriceKey::new(
            &binding.provider,
            &binding.region,
            resource,
            path.transfer_type(),
            PurchaseMode::OnDemand,
        ))?;
        for (month, qty) in monthly_average(spec, window, &path.id, field)? {
            sink.priced(month, &path.id, edge.group, entry, qty)?;
        }
    }
    Ok(())
}

/// Simulates every month of `window` and prices each node and path.
pub fn simulate(
    model: &DeploymentModel,
    catalog: &PriceCatalog,
    window: &MonthWindow,
    scenario: Option<&PriceScenario>,
) -> Result<CostReport, SimulationError> {
    let graph = build_graph(model)?;
    let overlay = scenario.map(|s| s.resolve(window.start));
    let mut sink = LineSink {
        catalog,
        scenario: overlay.as_ref(),
        lines: Vec::new(),
    };
    for vertex in &graph.vertices {
        let Some(binding) = vertex.binding else {
            continue;
        };
        match vertex.node.kind {
            NodeKind::VirtualMachine => simulate_vm(&mut sink, vertex, binding, window)?,
            NodeKind::VirtualStorage | NodeKind::Database => {
                simulate_storage(&mut sink, vertex, binding, window)?
            }
            NodeKind::RemoteNode => {}
        }
    }
    for edge in &graph.edges {
        simulate_edge(&mut sink, edge, window)?;
    }

    let mut lines = sink.lines;
    lines.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let (monthly_totals, group_totals) = totals(&lines, window, model.groups.iter().map(|g| g.id.as_str()));
    Ok(CostReport {
        model_name: model.name.clone(),
        catalog_label: catalog.label.clone(),
        scenario_label: scenario.map(|s| s.label.clone()),
        window: *window,
        lines,
        monthly_totals,
        group_totals,
        topology: topology(model, &graph),
    })
}

type MonthSeries = BTreeMap<YearMonth, Decimal>;

fn totals<'g>(
    lines: &[CostLine],
    window: &MonthWindow,
    groups: impl Iterator<Item = &'g str>,
) -> (MonthSeries, BTreeMap<String, MonthSeries>) {
    let zeros: MonthSeries = window.months().map(|m| (m, Decimal::ZERO)).collect();
    let mut monthly = zeros.clone();
    let mut by_group: BTreeMap<String, MonthSeries> =
        groups.map(|g| (g.to_string(), zeros.clone())).collect();
    for line in lines {
        *monthly.entry(line.month).or_default() += line.cost;
        let g = line.group_id.as_deref().unwrap_or(UNGROUPED);
        *by_group
            .entry(g.to_string())
            .or_insert_with(|| zeros.clone())
            .entry(line.month)
            .or_default() += line.cost;
    }
    (monthly, by_group)
}

/// Monthly cost series per group of `model`, plus [`UNGROUPED`] when any line
/// falls outside every group. The series sum to the report's monthly totals.
pub fn group_breakdown(
    report: &CostReport,
    model: &DeploymentModel,
) -> BTreeMap<String, BTreeMap<YearMonth, Decimal>> {
    totals(
        &report.lines,
        &report.window,
        model.groups.iter().map(|g| g.id.as_str()),
    )
    .1
}

/// Cost of each element over the whole window, largest first.
pub fn element_totals(report: &CostReport) -> Vec<(String, Decimal)> {
    let mut map: HashMap<&str, Decimal> = HashMap::new();
    for l in &report.lines {
        *map.entry(l.element_id.as_str()).or_default() += l.cost;
    }
    let mut v: Vec<(String, Decimal)> = map.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::model::{Group, NodeKind};

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn price(resource: PriceResource, sku: &str, p: &str) -> PriceEntry {
        PriceEntry {
            provider: "aws".into(),
            region: "eu".into(),
            resource,
            sku: sku.into(),
            unit_price: d(p),
            currency: "USD".into(),
            purchase_mode: PurchaseMode::OnDemand,
            upfront_fee: None,
            term_months: None,
            specs: None,
        }
    }

    fn catalog() -> PriceCatalog {
        PriceCatalog::new(
            "test",
            NaiveDate::from_ymd_opt(2010, 8, 1).unwrap(),
            vec![
                price(PriceResource::InstanceHour, "HighCPU.Medium", "0.19"),
                price(PriceResource::StorageGbMonth, "S3", "0.15"),
                PriceEntry {
                    purchase_mode: PurchaseMode::Reserved,
                    upfront_fee: Some(d("700")),
                    term_months: Some(36),
                    ..price(PriceResource::InstanceHour, "HighCPU.Medium", "0.07")
                },
            ],
        )
        .unwrap()
    }

    fn vm_model(count: UsageSpec, binding: ProviderBinding) -> DeploymentModel {
        let mut vm = Node::new("vm1", NodeKind::VirtualMachine);
        vm.server_type = Some("HighCPU.Medium".into());
        vm.instance_count = Some(count);
        DeploymentModel {
            name: "one-vm".into(),
            nodes: vec![vm],
            provider_bindings: [("vm1".to_string(), binding)].into(),
            ..Default::default()
        }
    }

    #[test]
    fn constant_vm_hours() {
        let m = vm_model(UsageSpec::constant(4.0), ProviderBinding::on_demand("aws", "eu"));
        let w = MonthWindow::with_len(ym("2010-12"), 1).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        assert_eq!(r.lines.len(), 1);
        assert_eq!(r.lines[0].quantity, 2976.0);
        assert_eq!(r.lines[0].cost, d("565.44"));
        assert_eq!(r.lines[0].unit, "h");
        assert_eq!(r.monthly_totals[&ym("2010-12")], d("565.44"));
    }

    #[test]
    fn fractional_instances_round_up_per_day() {
        let m = vm_model(UsageSpec::constant(1.2), ProviderBinding::on_demand("aws", "eu"));
        let w = MonthWindow::with_len(ym("2011-02"), 1).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        assert_eq!(r.lines[0].quantity, 2.0 * 24.0 * 28.0);
    }

    #[test]
    fn storage_uses_average_gb() {
        let mut s = Node::new("store", NodeKind::VirtualStorage);
        s.storage_type = Some("S3".into());
        s.size_gb = Some(
            UsageSpec::parse(
                100.0,
                "perm: every month +10, temp: every jun-aug on weekends /2, temp: every dec on 25-30 *2",
            )
            .unwrap(),
        );
        let m = DeploymentModel {
            name: "s".into(),
            nodes: vec![s],
            provider_bindings: [("store".to_string(), ProviderBinding::on_demand("aws", "eu"))].into(),
            ..Default::default()
        };
        let w = MonthWindow::new(ym("2010-09"), ym("2010-12")).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        let dec = r.lines.iter().find(|l| l.month == ym("2010-12")).unwrap();
        assert!((dec.quantity - 4810.0 / 31.0).abs() < 1e-12);
        let expected = 4810.0 / 31.0 * 0.15;
        let got: f64 = dec.cost.to_string().parse().unwrap();
        assert!((got - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn empty_model_has_zero_totals() {
        let m = DeploymentModel {
            name: "empty".into(),
            ..Default::default()
        };
        let g = build_graph(&m).unwrap();
        assert!(g.vertices.is_empty() && g.edges.is_empty());
        let w = MonthWindow::with_len(ym("2010-09"), 12).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        assert!(r.lines.is_empty());
        assert_eq!(r.monthly_totals.len(), 12);
        assert!(r.monthly_totals.values().all(|v| v.is_zero()));
    }

    #[test]
    fn remote_only_model_is_one_free_vertex() {
        let m = DeploymentModel {
            name: "remote".into(),
            nodes: vec![Node::new("campus", NodeKind::RemoteNode)],
            ..Default::default()
        };
        let g = build_graph(&m).unwrap();
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.billable_vertices(), 0);
        let r = simulate(&m, &catalog(), &MonthWindow::with_len(ym("2010-09"), 3).unwrap(), None).unwrap();
        assert!(r.lines.is_empty());
    }

    #[test]
    fn reserved_vm_pays_fees_per_term() {
        let m = vm_model(UsageSpec::constant(2.0), ProviderBinding::reserved("aws", "eu", 36));
        let w = MonthWindow::with_len(ym("2010-09"), 72).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        let fees: Vec<_> = r
            .lines
            .iter()
            .filter(|l| l.resource == CostResource::ReservationFee)
            .collect();
        assert_eq!(fees.len(), 2);
        assert_eq!(fees[0].month, ym("2010-09"));
        assert_eq!(fees[1].month, ym("2013-09"));
        assert_eq!(fees[0].quantity, 2.0);
        assert_eq!(fees[0].cost, d("1400"));
        let hours = r.lines.iter().find(|l| l.resource != CostResource::ReservationFee).unwrap();
        assert_eq!(hours.unit_price, d("0.07"));
    }

    #[test]
    fn reserved_term_mismatch_is_an_error() {
        let m = vm_model(UsageSpec::constant(1.0), ProviderBinding::reserved("aws", "eu", 12));
        let w = MonthWindow::with_len(ym("2010-09"), 12).unwrap();
        let err = simulate(&m, &catalog(), &w, None).unwrap_err();
        assert!(matches!(err, SimulationError::Price(CatalogError::TermMismatch { .. })));
    }

    #[test]
    fn missing_price_reports_key() {
        let mut m = vm_model(UsageSpec::constant(1.0), ProviderBinding::on_demand("aws", "eu"));
        m.nodes[0].server_type = Some("Huge".into());
        let w = MonthWindow::with_len(ym("2010-09"), 1).unwrap();
        let err = simulate(&m, &catalog(), &w, None).unwrap_err();
        assert_eq!(err.to_string(), "price not found: aws/eu/instance-hour/Huge/on-demand");
    }

    #[test]
    fn single_group_series_equals_totals() {
        let mut m = vm_model(UsageSpec::constant(1.0), ProviderBinding::on_demand("aws", "eu"));
        m.groups.push(Group {
            id: "all".into(),
            label: "All".into(),
            members: vec!["vm1".into()],
        });
        let w = MonthWindow::with_len(ym("2010-09"), 3).unwrap();
        let r = simulate(&m, &catalog(), &w, None).unwrap();
        let g = group_breakdown(&r, &m);
        assert_eq!(g.len(), 1);
        assert_eq!(g["all"], r.monthly_totals);
    }

    #[test]
    fn invalid_model_is_rejected() {
        let mut m = vm_model(UsageSpec::constant(1.0), ProviderBinding::on_demand("aws", "eu"));
        m.provider_bindings.clear();
        let w = MonthWindow::with_len(ym("2010-09"), 1).unwrap();
        assert!(matches!(
            simulate(&m, &catalog(), &w, None),
            Err(SimulationError::Model(ModelError::Invalid(_)))
        ));
    }

    #[test]
    fn cost_resource_names_round_trip() {
        for r in PriceResource::ALL.map(CostResource::Priced).into_iter().chain([CostResource::ReservationFee]) {
            assert_eq!(r.as_str().parse::<CostResource>().unwrap(), r);
        }
    }

    #[test]
    fn cents_round_half_away_from_zero() {
        assert_eq!(round_cents(d("1.005")), d("1.01"));
        assert_eq!(round_cents(d("1.0049")), d("1.00"));
    }
}
