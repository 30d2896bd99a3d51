#![allow(dead_code)]

pub mod engine;
pub mod oracle;

use std::path::PathBuf;

use cloudcost::calendar::{MonthWindow, YearMonth};
use cloudcost::finance::{annualize, load_plan, on_premise_cash_flows, FinancialOption};
use cloudcost::{load_catalog, load_scenario, parse_model, simulate, PriceScenario};
use rust_decimal::Decimal;

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn case_window() -> MonthWindow {
    let start: YearMonth = "2010-09".parse().unwrap();
    MonthWindow::with_len(start, 72).unwrap()
}

pub fn scenario(name: &str) -> PriceScenario {
    load_scenario(&fixture(name)).unwrap()
}

/// Buy, lease and elastic options for the school case study.
pub fn case_options(scenario: Option<&PriceScenario>) -> Vec<FinancialOption> {
    let catalog = load_catalog(&fixture("aws-2010-eu.prices.json")).unwrap();
    let window = case_window();
    let mut out = vec![on_premise_cash_flows(&load_plan(&fixture("school-buy.onprem.json")).unwrap(), 6).unwrap()];
    for (label, file) in [
        ("lease", "school-lease.cloudmodel.json"),
        ("elastic", "school-elastic.cloudmodel.json"),
    ] {
        let model = parse_model(&fixture(file)).unwrap();
        let report = simulate(&model, &catalog, &window, scenario).unwrap();
        let mut option = annualize(&report, window.start).unwrap();
        option.label = label.to_string();
        out.push(option);
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= tol * scale
}

pub fn dec(s: &str) -> Decimal {
    s.parse().unwrap()
}
