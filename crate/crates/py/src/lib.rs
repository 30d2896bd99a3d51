//! Python bindings. Documents go in and out as JSON text; money crosses the
//! boundary as decimal strings so no precision is lost to floats.

use std::collections::BTreeMap;

use cloudcost::calendar::{MonthWindow, YearMonth};
use cloudcost::finance::{annualize, load_plan, on_premise_cash_flows, FinancialOption, OptionSource};
use cloudcost::report::ReportBundle;
use cloudcost::{Decimal, UsageSpec};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn month(s: &str) -> PyResult<YearMonth> {
    s.parse().map_err(err)
}

fn money(s: &str) -> PyResult<Decimal> {
    s.parse().map_err(|_| err(format!("not a decimal amount: {s:?}")))
}

fn flows(raw: BTreeMap<u32, String>) -> PyResult<BTreeMap<u32, Decimal>> {
    raw.into_iter().map(|(y, v)| Ok((y, money(&v)?))).collect()
}

fn strings(flows: &BTreeMap<u32, Decimal>) -> BTreeMap<u32, String> {
    flows.iter().map(|(y, v)| (*y, v.to_string())).collect()
}

/// Parses pattern text and returns each clause in normalized form.
#[pyfunction]
fn parse_patterns(text: &str) -> PyResult<Vec<String>> {
    Ok(cloudcost::parse_patterns(text).map_err(err)?.iter().map(ToString::to_string).collect())
}

/// Per-day values of a usage spec for one month of a window starting at `window_start`.
#[pyfunction]
fn daily_series(baseline: f64, patterns: &str, window_start: &str, month_: &str) -> PyResult<Vec<f64>> {
    let spec = UsageSpec::parse(baseline, patterns).map_err(err)?;
    spec.daily_series(month(window_start)?, month(month_)?).map_err(err)
}

/// Structural violations of a model document, as readable strings. Empty means valid.
#[pyfunction]
fn validate_model(document: &str) -> PyResult<Vec<String>> {
    let model = cloudcost::model::parse_model_unchecked(document).map_err(err)?;
    Ok(cloudcost::validate(&model).iter().map(ToString::to_string).collect())
}

/// A simulated cost report with its rendered outputs.
#[pyclass(frozen, module = "cloudcost")]
struct Report {
    report: cloudcost::CostReport,
    npv: Vec<cloudcost::NpvResult>,
    bundle: ReportBundle,
}

#[pymethods]
impl Report {
    #[getter]
    fn report_id(&self) -> String {
        self.bundle.report_id.clone()
    }

    #[getter]
    fn model_name(&self) -> String {
        self.report.model_name.clone()
    }

    #[getter]
    fn total(&self) -> String {
        self.report.total().to_string()
    }

    /// Present only when a discount rate was given.
    #[getter]
    fn npv(&self) -> Option<String> {
        self.npv.first().map(|r| r.npv.to_string())
    }

    #[getter]
    fn line_count(&self) -> usize {
        self.report.lines.len()
    }

    fn monthly_totals(&self) -> BTreeMap<String, String> {
        self.report
            .monthly_totals
            .iter()
            .map(|(m, v)| (m.to_string(), v.to_string()))
            .collect()
    }

    /// Whole-year cash flows keyed by year offset.
    fn yearly(&self) -> PyResult<BTreeMap<u32, String>> {
        let option = annualize(&self.report, self.report.window.start).map_err(err)?;
        Ok(strings(&option.cash_flows))
    }

    fn to_json(&self) -> String {
        String::from_utf8_lossy(&self.bundle.json).into_owned()
    }

    fn to_csv(&self) -> String {
        String::from_utf8_lossy(&self.bundle.csv).into_owned()
    }

    fn to_html(&self) -> String {
        String::from_utf8_lossy(&self.bundle.html).into_owned()
    }

    fn __repr__(&self) -> String {
        format!("<Report {} total={} id={}>", self.report.model_name, self.report.total(), &self.bundle.report_id[..12])
    }
}

/// Simulates `model` against `catalog` over `start..=end` (YYYY-MM, inclusive).
#[pyfunction]
#[pyo3(signature = (model, catalog, start, end, scenario=None, discount_rate=None))]
fn simulate(
    py: Python<'_>,
    model: &str,
    catalog: &str,
    start: &str,
    end: &str,
    scenario: Option<&str>,
    discount_rate: Option<&str>,
) -> PyResult<Report> {
    let model = cloudcost::parse_model(model).map_err(err)?;
    let catalog = cloudcost::load_catalog(catalog).map_err(err)?;
    let scenario = scenario.map(cloudcost::load_scenario).transpose().map_err(err)?;
    let window = MonthWindow::new(month(start)?, month(end)?).map_err(err)?;
    let rate = discount_rate.map(money).transpose()?;
    py.detach(|| {
        let report = cloudcost::simulate(&model, &catalog, &window, scenario.as_ref()).map_err(err)?;
        let npv = match rate {
            Some(r) => vec![cloudcost::npv(&annualize(&report, window.start).map_err(err)?, r).map_err(err)?],
            None => Vec::new(),
        };
        let bundle = cloudcost::bundle(&report, &npv, None);
        Ok(Report { report, npv, bundle })
    })
}

/// Net present value of `{year: amount}` flows at `rate`.
#[pyfunction]
fn npv(flows_: BTreeMap<u32, String>, rate: &str) -> PyResult<String> {
    let option = FinancialOption::new("flows", OptionSource::Manual, flows(flows_)?);
    Ok(cloudcost::npv(&option, money(rate)?).map_err(err)?.npv.to_string())
}

/// Yearly cash flows of an on-premise plan document over `years`.
#[pyfunction]
fn on_premise_flows(document: &str, years: u32) -> PyResult<BTreeMap<u32, String>> {
    let plan = load_plan(document).map_err(err)?;
    Ok(strings(&on_premise_cash_flows(&plan, years).map_err(err)?.cash_flows))
}

/// Ranks `(label, {year: amount})` options by NPV; returns the comparison as JSON.
#[pyfunction]
fn compare_options(options: Vec<(String, BTreeMap<u32, String>)>, rate: &str, reference: &str) -> PyResult<String> {
    let options = options
        .into_iter()
        .map(|(label, f)| Ok(FinancialOption::new(&label, OptionSource::Manual, flows(f)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let cmp = cloudcost::compare_options(&options, money(rate)?, reference).map_err(err)?;
    serde_json::to_string(&cmp).map_err(err)
}

/// Evaluates an assessment document; returns the outcome as JSON.
#[pyfunction]
fn assess(document: &str) -> PyResult<String> {
    use cloudcost::assessment::{assess, load_assessment};
    let outcome = assess(&load_assessment(document).map_err(err)?).map_err(err)?;
    serde_json::to_string(&outcome).map_err(err)
}

#[pymodule]
#[pyo3(name = "cloudcost")]
fn cloudcost_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(parse_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(daily_series, m)?)?;
    m.add_function(wrap_pyfunction!(validate_model, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(npv, m)?)?;
    m.add_function(wrap_pyfunction!(on_premise_flows, m)?)?;
    m.add_function(wrap_pyfunction!(compare_options, m)?)?;
    m.add_function(wrap_pyfunction!(assess, m)?)?;
    Ok(())
}
