//! CSV, JSON and HTML renderings of a cost report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calendar::YearMonth;
use crate::engine::{round_cents, CostLine, CostReport, UNGROUPED};
use crate::finance::{Comparison, NpvResult};
use crate::model::NodeKind;

pub const CSV_HEADER: &str = "month,element_id,resource,quantity,unit,unit_price,cost,group";
pub const REPORT_SCHEMA: u64 = 1;

/// The three renderings of one report, identified by the hash of its JSON.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportBundle {
    pub csv: Vec<u8>,
    pub json: Vec<u8>,
    pub html: Vec<u8>,
    pub report_id: String,
}

pub fn bundle(report: &CostReport, npv_results: &[NpvResult], comparison: Option<&Comparison>) -> ReportBundle {
    let json = emit_json(report, npv_results);
    ReportBundle {
        csv: emit_csv(report),
        html: emit_html(report, npv_results, comparison),
        report_id: content_id(&json),
        json,
    }
}

/// Hex SHA-256 of `bytes`.
pub fn content_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Line costs rounded to cents so that each month's rounded lines add up to
/// that month's rounded total: every line shows the change in the rounded
/// running sum.
pub fn displayed_costs(lines: &[CostLine]) -> Vec<Decimal> {
    let mut out = Vec::with_capacity(lines.len());
    let mut month: Option<YearMonth> = None;
    let mut running = Decimal::ZERO;
    let mut shown = Decimal::ZERO;
    for line in lines {
        if month != Some(line.month) {
            month = Some(line.month);
            running = Decimal::ZERO;
            shown = Decimal::ZERO;
        }
        running += line.cost;
        let rounded = round_cents(running);
        out.push(rounded - shown);
        shown = rounded;
    }
    out
}

fn money(d: Decimal) -> String {
    format!("{:.2}", round_cents(d))
}

pub fn emit_csv(report: &CostReport) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for (line, cost) in report.lines.iter().zip(displayed_costs(&report.lines)) {
        w.write_record([
            line.month.to_string(),
            line.element_id.clone(),
            line.resource.to_string(),
            line.quantity.to_string(),
            line.unit.clone(),
            line.unit_price.normalize().to_string(),
            format!("{cost:.2}"),
            line.group_id.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    schema: u64,
    report: CostReport,
    npv: Vec<NpvResult>,
}

/// Canonical JSON: sorted keys, decimal amounts as strings, two-space indent.
pub fn emit_json(report: &CostReport, npv_results: &[NpvResult]) -> Vec<u8> {
    let doc = JsonDocument {
        schema: REPORT_SCHEMA,
        report: report.clone(),
        npv: npv_results.to_vec(),
    };
    // serde_json::Value keeps object keys sorted.
    let value = serde_json::to_value(&doc).expect("report serializes");
    let mut out = serde_json::to_vec_pretty(&value).expect("report serializes");
    out.push(b'\n');
    out
}

/// Reads back what [`emit_json`] wrote.
pub fn parse_json(bytes: &[u8]) -> Result<(CostReport, Vec<NpvResult>), serde_json::Error> {
    let doc: JsonDocument = serde_json::from_slice(bytes)?;
    Ok((doc.report, doc.npv))
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const CHART_W: f64 = 760.0;
const CHART_H: f64 = 260.0;
const PAD_L: f64 = 70.0;
const PAD_B: f64 = 40.0;
const PAD_T: f64 = 20.0;

struct Series<'a> {
    name: &'a str,
    values: Vec<f64>,
}

fn axis_max(series: &[Series<'_>]) -> f64 {
    let m = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .fold(0.0, f64::max);
    if m <= 0.0 {
        1.0
    } else {
        m * 1.1
    }
}

fn chart_frame(svg: &mut String, id: &str, title: &str, max: f64) {
    let _ = write!(
        svg,
        r##"<figure class="chart" id="{id}"><figcaption>{}</figcaption><svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {CHART_W} {}" role="img">"##,
        esc(title),
        CHART_H + 30.0
    );
    let plot_h = CHART_H - PAD_B - PAD_T;
    for i in 0..=4 {
        let v = max * f64::from(i) / 4.0;
        let y = PAD_T + plot_h - plot_h * f64::from(i) / 4.0;
        let _ = write!(
            svg,
            r##"<line x1="{PAD_L}" y1="{y:.1}" x2="{CHART_W}" y2="{y:.1}" class="grid"/><text x="{:.1}" y="{:.1}" class="tick" text-anchor="end">{v:.0}</text>"##,
            PAD_L - 6.0,
            y + 4.0
        );
    }
}

fn legend(svg: &mut String, series: &[Series<'_>]) {
    let mut x = PAD_L;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            svg,
            r##"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}" class="legend">{}</text>"##,
            CHART_H + 8.0,
            x + 14.0,
            CHART_H + 17.0,
            esc(s.name)
        );
        x += 24.0 + 7.0 * s.name.chars().count() as f64;
    }
}

fn line_chart(id: &str, title: &str, labels: &[String], series: &[Series<'_>]) -> String {
    let mut svg = String::new();
    let max = axis_max(series);
    chart_frame(&mut svg, id, title, max);
    let plot_w = CHART_W - PAD_L - 10.0;
    let plot_h = CHART_H - PAD_B - PAD_T;
    let n = labels.len().max(2) - 1;
    let x_at = |i: usize| PAD_L + plot_w * i as f64 / n as f64;
    let step = (labels.len() / 12).max(1);
    for (i, label) in labels.iter().enumerate().step_by(step) {
        let _ = write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" class="tick" text-anchor="middle">{}</text>"##,
            x_at(i),
            CHART_H - PAD_B + 16.0,
            esc(label)
        );
    }
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.1},{:.1}", x_at(i), PAD_T + plot_h - plot_h * v / max))
            .collect();
        let _ = write!(
            svg,
            r##"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"##,
            points.join(" ")
        );
    }
    legend(&mut svg, series);
    svg.push_str("</svg></figure>\n");
    svg
}

fn bar_chart(id: &str, title: &str, labels: &[String], series: &[Series<'_>], notes: &[String]) -> String {
    let mut svg = String::new();
    let max = axis_max(series);
    chart_frame(&mut svg, id, title, max);
    let plot_w = CHART_W - PAD_L - 10.0;
    let plot_h = CHART_H - PAD_B - PAD_T;
    let slot = plot_w / labels.len().max(1) as f64;
    let bar = (slot * 0.8) / series.len().max(1) as f64;
    for (i, label) in labels.iter().enumerate() {
        let x0 = PAD_L + slot * i as f64 + slot * 0.1;
        for (si, s) in series.iter().enumerate() {
            let v = s.values.get(i).copied().unwrap_or(0.0);
            let h = plot_h * v / max;
            let _ = write!(
                svg,
                r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"><title>{}: {v:.2}</title></rect>"##,
                x0 + bar * si as f64,
                PAD_T + plot_h - h,
                bar.max(1.0),
                PALETTE[si % PALETTE.len()],
                esc(s.name)
            );
        }
        let _ = write!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" class="tick" text-anchor="middle">{}</text>"##,
            x0 + slot * 0.4,
            CHART_H - PAD_B + 16.0,
            esc(label)
        );
        if let Some(note) = notes.get(i).filter(|n| !n.is_empty()) {
            let _ = write!(
                svg,
                r##"<text x="{:.1}" y="{:.1}" class="note" text-anchor="middle">{}</text>"##,
                x0 + slot * 0.4,
                CHART_H - PAD_B + 30.0,
                esc(note)
            );
        }
    }
    if series.len() > 1 {
        legend(&mut svg, series);
    }
    svg.push_str("</svg></figure>\n");
    svg
}

fn diagram(report: &CostReport) -> String {
    let topo = &report.topology;
    if topo.nodes.is_empty() {
        return String::new();
    }
    let cols = 5usize;
    let (bw, bh, gx, gy) = (130.0, 44.0, 20.0, 40.0);
    let rows = topo.nodes.len().div_ceil(cols);
    let width = cols as f64 * (bw + gx) + gx;
    let height = rows as f64 * (bh + gy) + gy;
    let pos: BTreeMap<&str, (f64, f64)> = topo
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let (r, c) = (i / cols, i % cols);
            (
                n.id.as_str(),
                (gx + c as f64 * (bw + gx), gy / 2.0 + r as f64 * (bh + gy)),
            )
        })
        .collect();
    let groups: Vec<&String> = topo.groups.keys().collect();
    let mut svg = format!(
        r##"<figure class="diagram" id="model-diagram"><figcaption>Deployment model</figcaption><svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">"##
    );
    for e in &topo.edges {
        if let (Some((x1, y1)), Some((x2, y2))) = (pos.get(e.from.as_str()), pos.get(e.to.as_str())) {
            let _ = write!(
                svg,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" class="edge"><title>{}</title></line>"##,
                x1 + bw / 2.0,
                y1 + bh / 2.0,
                x2 + bw / 2.0,
                y2 + bh / 2.0,
                esc(&e.id)
            );
        }
    }
    for n in &topo.nodes {
        let (x, y) = pos[n.id.as_str()];
        let color = n
            .group
            .as_ref()
            .and_then(|g| groups.iter().position(|k| *k == g))
            .map_or("#cccccc", |i| PALETTE[i % PALETTE.len()]);
        let dash = if n.kind == NodeKind::RemoteNode { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = write!(
            svg,
            r##"<rect x="{x:.1}" y="{y:.1}" width="{bw}" height="{bh}" rx="6" fill="white" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" text-anchor="middle" class="node">{}</text><text x="{:.1}" y="{:.1}" text-anchor="middle" class="kind">{}</text>"##,
            x + bw / 2.0,
            y + 18.0,
            esc(&n.id),
            x + bw / 2.0,
            y + 34.0,
            n.kind
        );
    }
    svg.push_str("</svg></figure>\n");
    svg
}

#[derive(Serialize)]
struct ChartData<'a> {
    months: Vec<String>,
    monthly_totals: Vec<String>,
    groups: BTreeMap<&'a str, Vec<String>>,
    yearly: Vec<YearlySeries>,
    npv: Vec<NpvBar>,
}

#[derive(Serialize)]
struct YearlySeries {
    label: String,
    flows: Vec<String>,
}

#[derive(Serialize)]
struct NpvBar {
    label: String,
    npv: String,
    vs_reference: Option<String>,
}

fn chart_data<'a>(
    report: &'a CostReport,
    npv_results: &[NpvResult],
    comparison: Option<&Comparison>,
) -> ChartData<'a> {
    let months: Vec<String> = report.monthly_totals.keys().map(ToString::to_string).collect();
    let yearly = match comparison {
        Some(c) => c
            .ranking
            .iter()
            .map(|r| YearlySeries {
                label: r.label.clone(),
                flows: r.cash_flows.values().map(|v| money(*v)).collect(),
            })
            .collect(),
        None => {
            let mut years: BTreeMap<i64, Decimal> = BTreeMap::new();
            for (m, v) in &report.monthly_totals {
                *years.entry(m.months_since(report.window.start) / 12).or_default() += *v;
            }
            vec![YearlySeries {
                label: report.model_name.clone(),
                flows: years.values().map(|v| money(*v)).collect(),
            }]
        }
    };
    let npv = match comparison {
        Some(c) => c
            .ranking
            .iter()
            .map(|r| NpvBar {
                label: r.label.clone(),
                npv: money(r.npv),
                vs_reference: r.vs_reference.map(|p| format!("{:.1}", p * Decimal::ONE_HUNDRED)),
            })
            .collect(),
        None => npv_results
            .iter()
            .map(|r| NpvBar {
                label: r.label.clone(),
                npv: money(r.npv),
                vs_reference: None,
            })
            .collect(),
    };
    ChartData {
        months,
        monthly_totals: report.monthly_totals.values().map(|v| money(*v)).collect(),
        groups: report
            .group_totals
            .iter()
            .map(|(g, s)| (g.as_str(), s.values().map(|v| money(*v)).collect()))
            .collect(),
        yearly,
        npv,
    }
}

fn parse_f64(s: &str) -> f64 {
    s.parse().unwrap_or(0.0)
}

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse;font-size:12px}td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}\
td.l,th.l{text-align:left}.chart,.diagram{margin:1em 0}.grid{stroke:#eee}\
.tick,.legend,.kind,.note{font-size:10px;fill:#555}.node{font-size:11px}.edge{stroke:#888;stroke-width:1.5}\
.summary td{border:none}.placeholder{color:#888;font-style:italic}";

/// Self-contained page with charts, a model diagram and the full cost table.
pub fn emit_html(report: &CostReport, npv_results: &[NpvResult], comparison: Option<&Comparison>) -> Vec<u8> {
    let data = chart_data(report, npv_results, comparison);
    let title = format!("Cost report: {}", report.model_name);
    let mut h = String::new();
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>{}</title><style>{STYLE}</style></head><body>\n<h1>{}</h1>\n",
        esc(&title),
        esc(&title)
    );
    let _ = write!(
        h,
        "<table class=\"summary\"><tr><td class=\"l\">Catalog</td><td class=\"l\">{}</td></tr><tr><td class=\"l\">Scenario</td><td class=\"l\">{}</td></tr><tr><td class=\"l\">Window</td><td class=\"l\">{} to {}</td></tr><tr><td class=\"l\">Total</td><td class=\"l\">{}</td></tr></table>\n",
        esc(&report.catalog_label),
        esc(report.scenario_label.as_deref().unwrap_or("none")),
        report.window.start,
        report.window.end,
        money(report.total())
    );

    if report.lines.is_empty() {
        h.push_str("<p class=\"placeholder\">no cost lines</p>\n");
    } else {
        h.push_str(&line_chart(
            "monthly-chart",
            "Monthly cost",
            &data.months,
            &[Series {
                name: "total",
                values: data.monthly_totals.iter().map(|v| parse_f64(v)).collect(),
            }],
        ));
        let group_series: Vec<Series<'_>> = data
            .groups
            .iter()
            .map(|(g, vals)| Series {
                name: report.topology.groups.get(*g).map_or(*g, String::as_str),
                values: vals.iter().map(|v| parse_f64(v)).collect(),
            })
            .collect();
        h.push_str(&line_chart("group-chart", "Monthly cost by group", &data.months, &group_series));

        let years = data.yearly.iter().map(|y| y.flows.len()).max().unwrap_or(0);
        let year_labels: Vec<String> = (0..years).map(|y| format!("Year {y}")).collect();
        let yearly_series: Vec<Series<'_>> = data
            .yearly
            .iter()
            .map(|y| Series {
                name: &y.label,
                values: y.flows.iter().map(|v| parse_f64(v)).collect(),
            })
            .collect();
        h.push_str(&bar_chart("yearly-chart", "Yearly cost by option", &year_labels, &yearly_series, &[]));

        if !data.npv.is_empty() {
            let labels: Vec<String> = data.npv.iter().map(|n| n.label.clone()).collect();
            let notes: Vec<String> = data
                .npv
                .iter()
                .map(|n| n.vs_reference.as_ref().map(|p| format!("{p}%")).unwrap_or_default())
                .collect();
            let series = [Series {
                name: "NPV",
                values: data.npv.iter().map(|n| parse_f64(&n.npv)).collect(),
            }];
            h.push_str(&bar_chart("npv-chart", "Net present value", &labels, &series, &notes));
        }
    }

    if let Some(c) = comparison {
        let _ = write!(
            h,
            "<h2>Option comparison</h2>\n<p>Discount rate {} per year, reference option {}.</p>\n<table id=\"comparison\"><tr><th class=\"l\">option</th><th>NPV</th><th>vs reference</th><th>year 0</th>",
            c.rate,
            esc(&c.reference)
        );
        let years = c.ranking.iter().map(|r| r.cash_flows.len()).max().unwrap_or(0);
        for y in 0..years {
            let _ = write!(h, "<th>Y{y}</th>");
        }
        h.push_str("</tr>\n");
        for r in &c.ranking {
            let pct = r
                .vs_reference
                .map(|p| format!("{:+.1}%", p * Decimal::ONE_HUNDRED))
                .unwrap_or_else(|| "n/a".into());
            let _ = write!(
                h,
                "<tr><td class=\"l\">{}</td><td>{}</td><td>{pct}</td><td>{}</td>",
                esc(&r.label),
                money(r.npv),
                money(r.year0)
            );
            for v in r.cash_flows.values() {
                let _ = write!(h, "<td>{}</td>", money(*v));
            }
            h.push_str("</tr>\n");
        }
        h.push_str("</table>\n");
    } else if !npv_results.is_empty() {
        h.push_str("<h2>Net present value</h2>\n<table id=\"npv\"><tr><th class=\"l\">option</th><th>rate</th><th>NPV</th></tr>\n");
        for r in npv_results {
            let _ = write!(
                h,
                "<tr><td class=\"l\">{}</td><td>{}</td><td>{}</td></tr>\n",
                esc(&r.label),
                r.rate,
                money(r.npv)
            );
        }
        h.push_str("</table>\n");
    }

    h.push_str(&diagram(report));

    if !report.lines.is_empty() {
        h.push_str("<h2>Cost lines</h2>\n<table id=\"lines\"><tr>");
        for col in CSV_HEADER.split(',') {
            let _ = write!(h, "<th>{col}</th>");
        }
        h.push_str("</tr>\n");
        for (l, cost) in report.lines.iter().zip(displayed_costs(&report.lines)) {
            let _ = write!(
                h,
                "<tr><td class=\"l\">{}</td><td class=\"l\">{}</td><td class=\"l\">{}</td><td>{}</td><td class=\"l\">{}</td><td>{}</td><td>{cost:.2}</td><td class=\"l\">{}</td></tr>\n",
                l.month,
                esc(&l.element_id),
                l.resource,
                l.quantity,
                l.unit,
                l.unit_price.normalize(),
                esc(l.group_id.as_deref().unwrap_or(UNGROUPED))
            );
        }
        h.push_str("</table>\n");
    }

    let island = serde_json::to_string(&data)
        .expect("chart data serializes")
        .replace('<', "\\u003c");
    let _ = write!(
        h,
        "<script type=\"application/json\" id=\"cost-data\">{island}</script>\n</body></html>\n"
    );
    h.into_bytes()
}

/// Extracts the embedded chart data from a page written by [`emit_html`].
pub fn chart_island(html: &[u8]) -> Option<serde_json::Value> {
    let text = std::str::from_utf8(html).ok()?;
    let open = "<script type=\"application/json\" id=\"cost-data\">";
    let start = text.find(open)? + open.len();
    let end = start + text[start..].find("</script>")?;
    serde_json::from_str(&text[start..end]).ok()
}
