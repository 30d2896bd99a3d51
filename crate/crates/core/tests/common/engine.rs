//! Random small models and price tables, a brute-force re-computation of
//! monthly totals, and the simulator properties checked against them.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use cloudcost::calendar::{MonthWindow, YearMonth};
use cloudcost::catalog::{PriceEntry, PriceResource, PurchaseMode};
use cloudcost::engine::CostReport;
use cloudcost::model::{CommunicationPath, Group, Node, NodeKind, ProviderBinding};
use cloudcost::patterns::{DaySpec, Mode, MonthSpec, Op, Pattern};
use cloudcost::report::emit_json;
use cloudcost::{simulate, DeploymentModel, PriceCatalog, PriceScenario, UsageSpec};
use proptest::prelude::*;
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;

use super::rel_close;

pub const TOL: f64 = 1e-9;
pub const TERM: u32 = 12;
pub const SKUS: [&str; 2] = ["small", "large"];

#[derive(Clone, Debug)]
pub struct Prices {
    pub hourly: [(Decimal, Decimal, Decimal); 2],
    pub storage: Decimal,
    pub input: Decimal,
    pub output: Decimal,
    pub data_in: Decimal,
    pub data_out: Decimal,
}

pub fn catalog(p: &Prices) -> PriceCatalog {
    let entry = |resource, sku: &str, unit_price, mode, fee: Option<Decimal>| PriceEntry {
        provider: "p".into(),
        region: "r".into(),
        resource,
        sku: sku.into(),
        unit_price,
        currency: "USD".into(),
        purchase_mode: mode,
        upfront_fee: fee,
        term_months: fee.map(|_| TERM),
        specs: None,
    };
    let mut entries = Vec::new();
    for (sku, (od, rh, fee)) in SKUS.iter().zip(p.hourly) {
        entries.push(entry(PriceResource::InstanceHour, sku, od, PurchaseMode::OnDemand, None));
        entries.push(entry(PriceResource::InstanceHour, sku, rh, PurchaseMode::Reserved, Some(fee)));
    }
    for (res, price) in [
        (PriceResource::StorageGbMonth, p.storage),
        (PriceResource::InputRequest, p.input),
        (PriceResource::OutputRequest, p.output),
    ] {
        entries.push(entry(res, "disk", price, PurchaseMode::OnDemand, None));
    }
    entries.push(entry(PriceResource::DataInGb, "internet", p.data_in, PurchaseMode::OnDemand, None));
    entries.push(entry(PriceResource::DataOutGb, "internet", p.data_out, PurchaseMode::OnDemand, None));
    PriceCatalog::new("random", NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(), entries).unwrap()
}

pub fn scaled(p: &Prices, k: Decimal) -> Prices {
    Prices {
        hourly: p.hourly.map(|(a, b, c)| (a * k, b * k, c * k)),
        storage: p.storage * k,
        input: p.input * k,
        output: p.output * k,
        data_in: p.data_in * k,
        data_out: p.data_out * k,
    }
}

pub fn price() -> impl Strategy<Value = Decimal> {
    (1i64..=5000).prop_map(|n| Decimal::new(n, 4))
}

pub fn prices() -> impl Strategy<Value = Prices> {
    let hourly = || (price(), price(), (0i64..=2000).prop_map(Decimal::from));
    (
        [hourly(), hourly()],
        price(),
        (1i64..=100).prop_map(|n| Decimal::new(n, 8)),
        (1i64..=100).prop_map(|n| Decimal::new(n, 8)),
        price(),
        price(),
    )
        .prop_map(|(hourly, storage, input, output, data_in, data_out)| Prices {
            hourly,
            storage,
            input,
            output,
            data_in,
            data_out,
        })
}

pub fn usage(max: i32) -> impl Strategy<Value = UsageSpec> {
    let temp = (
        prop_oneof![Just(MonthSpec::Every), (1u32..=12, 1u32..=12).prop_map(|(a, b)| MonthSpec::Range(a, b))],
        prop_oneof![Just(DaySpec::Default), Just(DaySpec::Weekends), (1u32..=28).prop_map(|d| DaySpec::Range(d, d + 3))],
        prop_oneof![Just(Op::Add), Just(Op::Sub), Just(Op::Mul)],
        0i32..=4,
    )
        .prop_map(|(months, days, op, v)| Pattern {
            mode: Mode::Temp,
            months,
            days,
            op,
            value: f64::from(v) / 2.0,
        });
    let perm = (prop_oneof![Just(Op::Add), Just(Op::Sub)], 0i32..=4).prop_map(|(op, v)| Pattern {
        mode: Mode::Perm,
        months: MonthSpec::Every,
        days: DaySpec::Default,
        op,
        value: f64::from(v),
    });
    (0..=max, prop::collection::vec(prop_oneof![temp, perm], 0..3)).prop_map(|(b, patterns)| UsageSpec {
        baseline: f64::from(b),
        patterns,
    })
}

#[derive(Clone, Debug)]
pub enum NodeShape {
    Vm { sku: usize, count: UsageSpec, reserved: bool },
    Storage { size: UsageSpec, io_in: UsageSpec, io_out: UsageSpec },
    Remote,
}

pub fn node_shape() -> impl Strategy<Value = NodeShape> {
    prop_oneof![
        3 => (0usize..2, usage(4), any::<bool>()).prop_map(|(sku, count, reserved)| NodeShape::Vm { sku, count, reserved }),
        2 => (usage(500), usage(1_000_000), usage(1_000_000)).prop_map(|(size, io_in, io_out)| NodeShape::Storage { size, io_in, io_out }),
        1 => Just(NodeShape::Remote),
    ]
}

#[derive(Clone, Debug)]
pub struct ModelShape {
    pub nodes: Vec<NodeShape>,
    pub paths: Vec<(usize, usize, UsageSpec, UsageSpec)>,
    pub grouped: bool,
}

/// Up to five vertices and a few paths between distinct ones.
pub fn model_shape() -> impl Strategy<Value = ModelShape> {
    prop::collection::vec(node_shape(), 1..=5).prop_flat_map(|nodes| {
        let n = nodes.len();
        let paths = if n < 2 {
            Just(Vec::new()).boxed()
        } else {
            prop::collection::vec((0..n, 1..n, usage(300), usage(300)), 0..3)
                .prop_map(move |ps| {
                    ps.into_iter()
                        .map(|(a, step, i, o)| (a, (a + step) % n, i, o))
                        .collect()
                })
                .boxed()
        };
        (Just(nodes), paths, any::<bool>()).prop_map(|(nodes, paths, grouped)| ModelShape { nodes, paths, grouped })
    })
}

pub fn build(shape: &ModelShape, prefix: &str) -> DeploymentModel {
    let mut model = DeploymentModel {
        name: format!("{prefix}model"),
        ..Default::default()
    };
    for (i, s) in shape.nodes.iter().enumerate() {
        let id = format!("{prefix}n{i}");
        let node = match s {
            NodeShape::Vm { sku, count, reserved } => {
                let mut n = Node::new(&id, NodeKind::VirtualMachine);
                n.server_type = Some(SKUS[*sku].into());
                n.instance_count = Some(count.clone());
                let b = if *reserved {
                    ProviderBinding::reserved("p", "r", TERM)
                } else {
                    ProviderBinding::on_demand("p", "r")
                };
                model.provider_bindings.insert(id.clone(), b);
                n
            }
            NodeShape::Storage { size, io_in, io_out } => {
                let mut n = Node::new(&id, NodeKind::VirtualStorage);
                n.storage_type = Some("disk".into());
                n.size_gb = Some(size.clone());
                n.io_in_requests_per_month = Some(io_in.clone());
                n.io_out_requests_per_month = Some(io_out.clone());
                model.provider_bindings.insert(id.clone(), ProviderBinding::on_demand("p", "r"));
                n
            }
            NodeShape::Remote => Node::new(&id, NodeKind::RemoteNode),
        };
        model.nodes.push(node);
    }
    for (k, (a, b, i, o)) in shape.paths.iter().enumerate() {
        model.paths.push(CommunicationPath {
            id: format!("{prefix}p{k}"),
            from: format!("{prefix}n{a}"),
            to: format!("{prefix}n{b}"),
            data_in_gb_per_month: i.clone(),
            data_out_gb_per_month: o.clone(),
            transfer_type: None,
        });
    }
    if shape.grouped {
        model.groups.push(Group {
            id: format!("{prefix}g"),
            label: "first".into(),
            members: vec![format!("{prefix}n0")],
        });
    }
    model
}

pub fn window() -> impl Strategy<Value = MonthWindow> {
    (2009i32..2013, 1u32..=12, 1u32..=30)
        .prop_map(|(y, m, len)| MonthWindow::with_len(YearMonth::new(y, m).unwrap(), len).unwrap())
}

pub fn f(d: Decimal) -> f64 {
    d.to_f64().unwrap()
}

pub fn monthly(report: &CostReport) -> Vec<f64> {
    report.monthly_totals.values().map(|v| f(*v)).collect()
}

pub fn days(spec: &UsageSpec, w: &MonthWindow, m: YearMonth) -> Vec<f64> {
    spec.daily_series(w.start, m).unwrap()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Monthly totals recomputed straight from the usage series and price table.
pub fn brute_force(shape: &ModelShape, p: &Prices, w: &MonthWindow) -> Vec<f64> {
    let months: Vec<YearMonth> = w.months().collect();
    let mut out = vec![0.0; months.len()];
    for s in &shape.nodes {
        match s {
            NodeShape::Vm { sku, count, reserved } => {
                let (od, rh, fee) = p.hourly[*sku];
                let rate = if *reserved { f(rh) } else { f(od) };
                let mut peaks = Vec::new();
                for (i, m) in months.iter().enumerate() {
                    let d = days(count, w, *m);
                    let running: f64 = d.iter().map(|x| x.ceil()).sum();
                    out[i] += running * 24.0 * rate;
                    peaks.push(d.iter().map(|x| x.ceil()).fold(0.0, f64::max));
                }
                if *reserved {
                    for start in (0..months.len()).step_by(TERM as usize) {
                        let end = (start + TERM as usize).min(months.len());
                        let peak = peaks[start..end].iter().copied().fold(0.0, f64::max);
                        out[start] += peak * f(fee);
                    }
                }
            }
            NodeShape::Storage { size, io_in, io_out } => {
                for (i, m) in months.iter().enumerate() {
                    out[i] += mean(&days(size, w, *m)) * f(p.storage)
                        + mean(&days(io_in, w, *m)) * f(p.input)
                        + mean(&days(io_out, w, *m)) * f(p.output);
                }
            }
            NodeShape::Remote => {}
        }
    }
    for (a, b, din, dout) in &shape.paths {
        let billable = |i: usize| !matches!(shape.nodes[i], NodeShape::Remote);
        if !billable(*a) && !billable(*b) {
            continue;
        }
        for (i, m) in months.iter().enumerate() {
            out[i] += mean(&days(din, w, *m)) * f(p.data_in) + mean(&days(dout, w, *m)) * f(p.data_out);
        }
    }
    out
}

pub fn all_close(a: &[f64], b: &[f64]) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("lengths {} and {}", a.len(), b.len()));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if !rel_close(*x, *y, TOL) {
            return Err(format!("month {i}: {x} vs {y}"));
        }
    }
    Ok(())
}



pub type Single = (ModelShape, Prices, MonthWindow);

pub fn single() -> impl Strategy<Value = Single> {
    (model_shape(), prices(), window())
}

pub fn check_brute_force((shape, p, w): &Single) -> Result<(), String> {
    let report = simulate(&build(shape, ""), &catalog(p), w, None).map_err(|e| e.to_string())?;
    all_close(&monthly(&report), &brute_force(shape, p, w))
}

pub fn check_deterministic((shape, p, w): &Single) -> Result<(), String> {
    let model = build(shape, "");
    let cat = catalog(p);
    let run = || simulate(&model, &cat, w, None).map(|r| emit_json(&r, &[])).map_err(|e| e.to_string());
    if run()? == run()? {
        Ok(())
    } else {
        Err("two runs differ".into())
    }
}

pub fn scale() -> impl Strategy<Value = Decimal> {
    (1i64..=400).prop_map(|n| Decimal::new(n, 2))
}

pub fn check_linear(((shape, p, w), k): &(Single, Decimal)) -> Result<(), String> {
    let model = build(shape, "");
    let base = simulate(&model, &catalog(p), w, None).map_err(|e| e.to_string())?;
    let moved = simulate(&model, &catalog(&scaled(p, *k)), w, None).map_err(|e| e.to_string())?;
    let expected: Vec<f64> = monthly(&base).iter().map(|v| v * f(*k)).collect();
    all_close(&monthly(&moved), &expected)?;
    if base.lines.len() != moved.lines.len() {
        return Err(format!("{} lines vs {}", base.lines.len(), moved.lines.len()));
    }
    Ok(())
}

pub type Pair = (ModelShape, ModelShape, Prices, MonthWindow);

pub fn pair() -> impl Strategy<Value = Pair> {
    (model_shape(), model_shape(), prices(), window())
}

pub fn check_superposition((a, b, p, w): &Pair) -> Result<(), String> {
    let cat = catalog(p);
    let ma = build(a, "a-");
    let mb = build(b, "b-");
    let mut union = ma.clone();
    union.name = "union".into();
    union.nodes.extend(mb.nodes.iter().cloned());
    union.paths.extend(mb.paths.iter().cloned());
    union.groups.extend(mb.groups.iter().cloned());
    union.provider_bindings.extend(mb.provider_bindings.clone());
    let run = |m: &DeploymentModel| simulate(m, &cat, w, None).map_err(|e| e.to_string());
    let (ra, rb, ru) = (run(&ma)?, run(&mb)?, run(&union)?);
    let sum: Vec<f64> = monthly(&ra).iter().zip(monthly(&rb)).map(|(x, y)| x + y).collect();
    all_close(&monthly(&ru), &sum)?;
    if ru.lines.len() != ra.lines.len() + rb.lines.len() {
        return Err("line counts do not add up".into());
    }
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in [&ra, &rb] {
        for (g, series) in &r.group_totals {
            let v: Vec<f64> = series.values().map(|d| f(*d)).collect();
            let slot = groups.entry(g.clone()).or_insert_with(|| vec![0.0; v.len()]);
            for (s, x) in slot.iter_mut().zip(v) {
                *s += x;
            }
        }
    }
    for (g, series) in &ru.group_totals {
        let v: Vec<f64> = series.values().map(|d| f(*d)).collect();
        let zero = vec![0.0; v.len()];
        all_close(&v, groups.get(g).unwrap_or(&zero)).map_err(|e| format!("group {g}: {e}"))?;
    }
    Ok(())
}

pub type Shift = (Single, Decimal, Vec<PriceResource>, u32);

pub fn shift() -> impl Strategy<Value = Shift> {
    (
        single(),
        (50i64..=200).prop_map(|n| Decimal::new(n, 2)),
        prop::sample::subsequence(PriceResource::ALL.to_vec(), 1..=6),
        0u32..30,
    )
}

/// Raising prices never lowers a month's total and cutting them never raises it.
pub fn check_monotone(((shape, p, w), mult, resources, offset): &Shift) -> Result<(), String> {
    let model = build(shape, "");
    let cat = catalog(p);
    let scenario = PriceScenario::uniform("s", resources, *mult, *offset).map_err(|e| e.to_string())?;
    let base = monthly(&simulate(&model, &cat, w, None).map_err(|e| e.to_string())?);
    let moved = monthly(&simulate(&model, &cat, w, Some(&scenario)).map_err(|e| e.to_string())?);
    for (i, (b, m)) in base.iter().zip(&moved).enumerate() {
        let slack = TOL * b.abs().max(1.0);
        let ok = if *mult >= Decimal::ONE { *m >= b - slack } else { *m <= b + slack };
        if !ok {
            return Err(format!("month {i}: {m} vs {b} under x{mult}"));
        }
        if (i as u32) < *offset && !rel_close(*m, *b, TOL) {
            return Err(format!("month {i} changed before the scenario starts"));
        }
    }
    Ok(())
}
