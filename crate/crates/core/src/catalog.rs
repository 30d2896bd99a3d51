//! Unit price catalogs and price-change scenarios.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::calendar::{MonthWindow, YearMonth};
use crate::error::{syntax_parts, CatalogError};
use crate::model::ServerSpecs;

pub const CATALOG_SCHEMA: u64 = 1;

/// The six priced resource kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriceResource {
    InstanceHour,
    StorageGbMonth,
    InputRequest,
    OutputRequest,
    DataInGb,
    DataOutGb,
}

impl PriceResource {
    pub const ALL: [PriceResource; 6] = [
        PriceResource::InstanceHour,
        PriceResource::StorageGbMonth,
        PriceResource::InputRequest,
        PriceResource::OutputRequest,
        PriceResource::DataInGb,
        PriceResource::DataOutGb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PriceResource::InstanceHour => "instance-hour",
            PriceResource::StorageGbMonth => "storage-gb-month",
            PriceResource::InputRequest => "input-request",
            PriceResource::OutputRequest => "output-request",
            PriceResource::DataInGb => "data-in-gb",
            PriceResource::DataOutGb => "data-out-gb",
        }
    }
}

impl fmt::Display for PriceResource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurchaseMode {
    OnDemand,
    Reserved,
}

impl PurchaseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PurchaseMode::OnDemand => "on-demand",
            PurchaseMode::Reserved => "reserved",
        }
    }
}

impl fmt::Display for PurchaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PriceKey {
    pub provider: String,
    pub region: String,
    pub resource: PriceResource,
    pub sku: String,
    pub purchase_mode: PurchaseMode,
}

impl PriceKey {
    pub fn new(
        provider: &str,
        region: &str,
        resource: PriceResource,
        sku: &str,
        purchase_mode: PurchaseMode,
    ) -> Self {
        PriceKey {
            provider: provider.to_string(),
            region: region.to_string(),
            resource,
            sku: sku.to_string(),
            purchase_mode,
        }
    }
}

impl fmt::Display for PriceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}/{}/{}/{}",
            self.provider, self.region, self.resource, self.sku, self.purchase_mode
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceEntry {
    pub provider: String,
    pub region: String,
    pub resource: PriceResource,
    pub sku: String,
    pub unit_price: Decimal,
    pub currency: String,
    pub purchase_mode: PurchaseMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upfront_fee: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term_months: Option<u32>,
    /// Hardware description, used to match virtual machines given by specs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specs: Option<ServerSpecs>,
}

impl PriceEntry {
    pub fn key(&self) -> PriceKey {
        PriceKey::new(
            &self.provider,
            &self.region,
            self.resource,
            &self.sku,
            self.purchase_mode,
        )
    }
}

#[derive(Clone, Debug)]
pub struct PriceCatalog {
    pub label: String,
    pub as_of: NaiveDate,
    entries: Vec<PriceEntry>,
    index: HashMap<PriceKey, usize>,
}

impl PartialEq for PriceCatalog {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.as_of == other.as_of && self.entries == other.entries
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDocument {
    schema: u64,
    label: String,
    as_of: NaiveDate,
    #[serde(default)]
    entries: Vec<PriceEntry>,
}

impl PriceCatalog {
    pub fn new(
        label: impl Into<String>,
        as_of: NaiveDate,
        entries: Vec<PriceEntry>,
    ) -> Result<Self, CatalogError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let key = e.key();
            if e.unit_price.is_sign_negative() && !e.unit_price.is_zero() {
                return Err(CatalogError::NegativePrice(key.to_string()));
            }
            match e.purchase_mode {
                PurchaseMode::Reserved => match (e.upfront_fee, e.term_months) {
                    (Some(fee), Some(term)) if term > 0 => {
                        if fee.is_sign_negative() && !fee.is_zero() {
                            return Err(CatalogError::NegativePrice(key.to_string()));
                        }
                    }
                    _ => return Err(CatalogError::IncompleteReservation(key.to_string())),
                },
                PurchaseMode::OnDemand => {}
            }
            if index.insert(key.clone(), i).is_some() {
                return Err(CatalogError::Duplicate(key.to_string()));
            }
        }
        Ok(PriceCatalog {
            label: label.into(),
            as_of,
            entries,
            index,
        })
    }

    pub fn entries(&self) -> &[PriceEntry] {
        &self.entries
    }

    pub fn entry(&self, key: &PriceKey) -> Result<&PriceEntry, CatalogError> {
        self.index
            .get(key)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| CatalogError::PriceNotFound(key.to_string()))
    }

    /// Cheapest instance-hour entry whose hardware meets or exceeds `specs`.
    pub fn match_specs(
        &self,
        provider: &str,
        region: &str,
        purchase_mode: PurchaseMode,
        specs: ServerSpecs,
    ) -> Result<&PriceEntry, CatalogError> {
        self.entries
            .iter()
            .filter(|e| {
                e.provider == provider
                    && e.region == region
                    && e.resource == PriceResource::InstanceHour
                    && e.purchase_mode == purchase_mode
                    && e.specs
                        .is_some_and(|s| s.cpu_ghz >= specs.cpu_ghz && s.ram_gb >= specs.ram_gb)
            })
            .min_by(|a, b| a.unit_price.cmp(&b.unit_price).then_with(|| a.sku.cmp(&b.sku)))
            .ok_or_else(|| {
                CatalogError::PriceNotFound(format!(
                    "{provider}/{region}/instance-hour/specs({}GHz,{}GB)/{purchase_mode}",
                    specs.cpu_ghz, specs.ram_gb
                ))
            })
    }

    pub fn to_json(&self) -> String {
        let doc = CatalogDocument {
            schema: CATALOG_SCHEMA,
            label: self.label.clone(),
            as_of: self.as_of,
            entries: self.entries.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("catalog serializes")
    }
}

fn catalog_syntax(e: serde_json::Error) -> CatalogError {
    let (line, column, message) = syntax_parts(&e);
    CatalogError::Syntax {
        line,
        column,
        message,
    }
}

/// Reads and validates a `.prices.json` document.
pub fn load_catalog(document: &str) -> Result<PriceCatalog, CatalogError> {
    let doc: CatalogDocument = serde_json::from_str(document).map_err(catalog_syntax)?;
    if doc.schema != CATALOG_SCHEMA {
        return Err(CatalogError::Schema(doc.schema));
    }
    PriceCatalog::new(doc.label, doc.as_of, doc.entries)
}

/// When a price adjustment takes effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioStart {
    Month(YearMonth),
    /// Months after the simulation window start; 0 is the first simulated month.
    Offset(u32),
}

impl ScenarioStart {
    pub fn resolve(self, window_start: YearMonth) -> YearMonth {
        match self {
            ScenarioStart::Month(m) => m,
            ScenarioStart::Offset(n) => window_start.add_months(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adjustment {
    pub resources: BTreeSet<PriceResource>,
    pub multiplier: Decimal,
    pub from: ScenarioStart,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdjustmentRepr {
    resources: BTreeSet<PriceResource>,
    multiplier: Decimal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from_month: Option<YearMonth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from_offset_months: Option<u32>,
}

impl Serialize for Adjustment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (from_month, from_offset_months) = match self.from {
            ScenarioStart::Month(m) => (Some(m), None),
            ScenarioStart::Offset(n) => (None, Some(n)),
        };
        AdjustmentRepr {
            resources: self.resources.clone(),
            multiplier: self.multiplier,
            from_month,
            from_offset_months,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Adjustment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = AdjustmentRepr::deserialize(d)?;
        let from = match (r.from_month, r.from_offset_months) {
            (Some(m), None) => ScenarioStart::Month(m),
            (None, Some(n)) => ScenarioStart::Offset(n),
            (None, None) => ScenarioStart::Offset(0),
            (Some(_), Some(_)) => {
                return Err(serde::de::Error::custom(
                    "give either from_month or from_offset_months, not both",
                ))
            }
        };
        Ok(Adjustment {
            resources: r.resources,
            multiplier: r.multiplier,
            from,
        })
    }
}

/// Dated multiplicative overlay on catalog prices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceScenario {
    pub label: String,
    pub adjustments: Vec<Adjustment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDocument {
    schema: u64,
    label: String,
    adjustments: Vec<Adjustment>,
}

impl PriceScenario {
    pub fn new(label: impl Into<String>, adjustments: Vec<Adjustment>) -> Result<Self, CatalogError> {
        for a in &adjustments {
            if a.multiplier <= Decimal::ZERO {
                return Err(CatalogError::NonPositiveMultiplier(a.multiplier.to_string()));
            }
        }
        Ok(PriceScenario {
            label: label.into(),
            adjustments,
        })
    }

    /// Uniform adjustment of `resources` by `multiplier` from `offset` months into the window.
    pub fn uniform(
        label: impl Into<String>,
        resources: &[PriceResource],
        multiplier: Decimal,
        offset: u32,
    ) -> Result<Self, CatalogError> {
        PriceScenario::new(
            label,
            vec![Adjustment {
                resources: resources.iter().copied().collect(),
                multiplier,
                from: ScenarioStart::Offset(offset),
            }],
        )
    }

    /// Pins every adjustment to a calendar month.
    pub fn resolve(&self, window_start: YearMonth) -> ScenarioOverlay {
        ScenarioOverlay {
            label: self.label.clone(),
            adjustments: self
                .adjustments
                .iter()
                .map(|a| (a.resources.clone(), a.multiplier, a.from.resolve(window_start)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("scenario serializes");
        v["schema"] = CATALOG_SCHEMA.into();
        serde_json::to_string_pretty(&v).expect("scenario serializes")
    }
}

/// Reads a `.scenario.json` document.
pub fn load_scenario(document: &str) -> Result<PriceScenario, CatalogError> {
    let doc: ScenarioDocument = serde_json::from_str(document).map_err(catalog_syntax)?;
    if doc.schema != CATALOG_SCHEMA {
        return Err(CatalogError::Schema(doc.schema));
    }
    PriceScenario::new(doc.label, doc.adjustments)
}

/// A scenario with every start month resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOverlay {
    pub label: String,
    adjustments: Vec<(BTreeSet<PriceResource>, Decimal, YearMonth)>,
}

impl ScenarioOverlay {
    /// Product of every multiplier covering `resource` in force at `month`.
    pub fn multiplier(&self, resource: PriceResource, month: YearMonth) -> Result<Decimal, CatalogError> {
        self.adjustments
            .iter()
            .filter(|(rs, _, from)| rs.contains(&resource) && *from <= month)
            .try_fold(Decimal::ONE, |acc, (_, m, _)| {
                acc.checked_mul(*m).ok_or(CatalogError::Overflow)
            })
    }
}

/// Unit price for `key` in `month`, with any scenario multipliers applied.
pub fn price_lookup(
    catalog: &PriceCatalog,
    key: &PriceKey,
    month: YearMonth,
    scenario: Option<&ScenarioOverlay>,
) -> Result<Decimal, CatalogError> {
    let base = catalog.entry(key)?.unit_price;
    apply_scenario(base, key.resource, month, scenario)
}

pub(crate) fn apply_scenario(
    base: Decimal,
    resource: PriceResource,
    month: YearMonth,
    scenario: Option<&ScenarioOverlay>,
) -> Result<Decimal, CatalogError> {
    match scenario {
        None => Ok(base),
        Some(s) => base
            .checked_mul(s.multiplier(resource, month)?)
            .ok_or(CatalogError::Overflow),
    }
}

/// Upfront fees owed by a reserved entry: at the window start and at every
/// whole term after it that still falls inside the window.
pub fn reservation_charges(entry: &PriceEntry, window: &MonthWindow) -> Vec<(YearMonth, Decimal)> {
    let (Some(fee), Some(term)) = (entry.upfront_fee, entry.term_months) else {
        return Vec::new();
    };
    if entry.purchase_mode != PurchaseMode::Reserved || term == 0 {
        return Vec::new();
    }
    (0..window.len())
        .step_by(term as usize)
        .map(|offset| (window.start.add_months(offset), fee))
        .collect()
}
