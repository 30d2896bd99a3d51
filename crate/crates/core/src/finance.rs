//! Yearly cash flows, net present value and option ranking.

use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::engine::CostReport;
use crate::error::{syntax_parts, FinanceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionSource {
    CloudReport,
    OnPremise,
    /// Flows entered directly.
    Manual,
}

/// A named schedule of yearly costs; year 0 is the first year.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinancialOption {
    pub label: String,
    pub cash_flows: BTreeMap<u32, Decimal>,
    pub source: OptionSource,
}

impl FinancialOption {
    /// Builds an option, dropping negative (incoming) flows.
    pub fn new(
        label: impl Into<String>,
        source: OptionSource,
        flows: impl IntoIterator<Item = (u32, Decimal)>,
    ) -> Self {
        FinancialOption {
            label: label.into(),
            source,
            cash_flows: flows
                .into_iter()
                .map(|(y, c)| (y, c.max(Decimal::ZERO)))
                .collect(),
        }
    }

    pub fn year0(&self) -> Decimal {
        self.cash_flows.get(&0).copied().unwrap_or_default()
    }

    pub fn undiscounted_total(&self) -> Decimal {
        self.cash_flows.values().copied().sum()
    }

    pub fn scaled(&self, factor: Decimal) -> Self {
        FinancialOption {
            label: self.label.clone(),
            source: self.source,
            cash_flows: self.cash_flows.iter().map(|(y, c)| (*y, *c * factor)).collect(),
        }
    }
}

/// Sums a monthly report into yearly flows counted from `window_start`.
pub fn annualize(report: &CostReport, window_start: YearMonth) -> Result<FinancialOption, FinanceError> {
    if report.window.start != window_start {
        return Err(FinanceError::WindowStart {
            expected: window_start,
            actual: report.window.start,
        });
    }
    let months = report.window.len();
    if !report.window.is_year_aligned() {
        return Err(FinanceError::NotYearAligned(months));
    }
    let mut flows: BTreeMap<u32, Decimal> = (0..months / 12).map(|y| (y, Decimal::ZERO)).collect();
    for (month, total) in &report.monthly_totals {
        let offset = month.months_since(window_start);
        if offset >= 0 {
            *flows.entry((offset / 12) as u32).or_default() += *total;
        }
    }
    Ok(FinancialOption::new(
        report.model_name.clone(),
        OptionSource::CloudReport,
        flows,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerClass {
    pub label: String,
    pub unit_capital: Decimal,
    pub count: u32,
    pub electricity_per_year: Decimal,
}

/// Physical servers bought up front and replaced every `upgrade_cycle_years`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnPremisePlan {
    pub label: String,
    pub server_classes: Vec<ServerClass>,
    pub upgrade_cycle_years: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDocument {
    schema: u64,
    label: String,
    server_classes: Vec<ServerClass>,
    upgrade_cycle_years: u32,
}

impl OnPremisePlan {
    pub fn validate(&self) -> Result<(), FinanceError> {
        if self.upgrade_cycle_years == 0 {
            return Err(FinanceError::InvalidPlan("upgrade_cycle_years must be >= 1".into()));
        }
        for c in &self.server_classes {
            if c.count == 0 {
                return Err(FinanceError::InvalidPlan(format!("{}: count must be >= 1", c.label)));
            }
            if c.unit_capital < Decimal::ZERO || c.electricity_per_year < Decimal::ZERO {
                return Err(FinanceError::InvalidPlan(format!("{}: negative cost", c.label)));
            }
        }
        Ok(())
    }

    pub fn capital(&self) -> Decimal {
        self.server_classes
            .iter()
            .map(|c| c.unit_capital * Decimal::from(c.count))
            .sum()
    }

    pub fn electricity_per_year(&self) -> Decimal {
        self.server_classes
            .iter()
            .map(|c| c.electricity_per_year * Decimal::from(c.count))
            .sum()
    }
}

/// Reads a `.onprem.json` plan.
pub fn load_plan(document: &str) -> Result<OnPremisePlan, FinanceError> {
    let doc: PlanDocument = serde_json::from_str(document).map_err(|e| {
        let (line, column, message) = syntax_parts(&e);
        FinanceError::InvalidPlan(format!("line {line}, column {column}: {message}"))
    })?;
    if doc.schema != 1 {
        return Err(FinanceError::InvalidPlan(format!("unsupported schema {}", doc.schema)));
    }
    let plan = OnPremisePlan {
        label: doc.label,
        server_classes: doc.server_classes,
        upgrade_cycle_years: doc.upgrade_cycle_years,
    };
    plan.validate()?;
    Ok(plan)
}

/// Capital at year 0 and every upgrade cycle before the horizon, electricity every year.
pub fn on_premise_cash_flows(
    plan: &OnPremisePlan,
    horizon_years: u32,
) -> Result<FinancialOption, FinanceError> {
    plan.validate()?;
    let capital = plan.capital();
    let power = plan.electricity_per_year();
    let flows = (0..horizon_years).map(|y| {
        let buy = if y % plan.upgrade_cycle_years == 0 {
            capital
        } else {
            Decimal::ZERO
        };
        (y, buy + power)
    });
    Ok(FinancialOption::new(
        plan.label.clone(),
        OptionSource::OnPremise,
        flows,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpvResult {
    pub label: String,
    pub rate: Decimal,
    pub npv: Decimal,
    pub per_year_discounted: BTreeMap<u32, Decimal>,
}

/// Discounts each yearly cost `C` at year `Y` to `C / (1 + rate)^Y` and sums them.
pub fn npv(option: &FinancialOption, rate: Decimal) -> Result<NpvResult, FinanceError> {
    if rate <= -Decimal::ONE {
        return Err(FinanceError::InvalidRate(rate.to_string()));
    }
    let base = Decimal::ONE + rate;
    let mut factor = Decimal::ONE;
    let mut year = 0u32;
    let mut per_year = BTreeMap::new();
    for (&y, &c) in &option.cash_flows {
        while year < y {
            factor = factor.checked_mul(base).ok_or(FinanceError::Overflow)?;
            year += 1;
        }
        let pv = c.checked_div(factor).ok_or(FinanceError::Overflow)?;
        per_year.insert(y, pv);
    }
    Ok(NpvResult {
        label: option.label.clone(),
        rate,
        npv: per_year.values().copied().sum(),
        per_year_discounted: per_year,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedOption {
    pub label: String,
    pub npv: Decimal,
    /// `(npv - npv_ref) / npv_ref`; absent when the reference NPV is zero.
    pub vs_reference: Option<Decimal>,
    pub year0: Decimal,
    /// Year-0 cost relative to the reference option's year-0 cost.
    pub year0_vs_reference: Option<Decimal>,
    pub cash_flows: BTreeMap<u32, Decimal>,
    pub discounted: BTreeMap<u32, Decimal>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    pub rate: Decimal,
    /// Ascending by NPV, ties broken by label.
    pub ranking: Vec<RankedOption>,
}

impl Comparison {
    pub fn cheapest(&self) -> &RankedOption {
        &self.ranking[0]
    }

    pub fn get(&self, label: &str) -> Option<&RankedOption> {
        self.ranking.iter().find(|r| r.label == label)
    }
}

fn ratio(num: Decimal, den: Decimal) -> Option<Decimal> {
    if den.is_zero() {
        None
    } else {
        num.checked_div(den)
    }
}

pub fn compare_options(
    options: &[FinancialOption],
    rate: Decimal,
    reference: &str,
) -> Result<Comparison, FinanceError> {
    if options.len() < 2 {
        return Err(FinanceError::TooFewOptions(options.len()));
    }
    let reference_option = options
        .iter()
        .find(|o| o.label == reference)
        .ok_or_else(|| FinanceError::UnknownReference(reference.to_string()))?;
    let ref_npv = npv(reference_option, rate)?.npv;
    let ref_year0 = reference_option.year0();
    let mut ranking = options
        .iter()
        .map(|o| {
            let r = npv(o, rate)?;
            Ok(RankedOption {
                label: o.label.clone(),
                npv: r.npv,
                vs_reference: ratio(r.npv - ref_npv, ref_npv),
                year0: o.year0(),
                year0_vs_reference: ratio(o.year0(), ref_year0),
                cash_flows: o.cash_flows.clone(),
                discounted: r.per_year_discounted,
            })
        })
        .collect::<Result<Vec<_>, FinanceError>>()?;
    ranking.sort_by(|a, b| a.npv.cmp(&b.npv).then_with(|| a.label.cmp(&b.label)));
    Ok(Comparison {
        reference: reference.to_string(),
        rate,
        ranking,
    })
}
