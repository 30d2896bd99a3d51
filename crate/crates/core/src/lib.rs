//! Cost modeling for cloud adoption decisions.
//!
//! A [`DeploymentModel`] describes nodes, paths and groups with usage given as
//! a baseline plus a small pattern language. [`simulate`] prices it month by
//! month against a [`PriceCatalog`], optionally under a [`PriceScenario`].
//! The [`finance`] module turns reports and on-premise plans into yearly cash
//! flows and compares them by net present value, and [`assessment`] covers
//! the qualitative suitability checklist and stakeholder impact.

pub mod assessment;
pub mod calendar;
pub mod catalog;
pub mod engine;
pub mod error;
pub mod finance;
pub mod model;
pub mod patterns;
pub mod report;

pub use calendar::{MonthWindow, YearMonth};
pub use catalog::{load_catalog, load_scenario, PriceCatalog, PriceScenario};
pub use engine::{simulate, CostLine, CostReport};
pub use error::{
    AssessmentError, CatalogError, FinanceError, ModelError, PatternError, SimulationError,
};
pub use finance::{compare_options, npv, Comparison, FinancialOption, NpvResult};
pub use model::{parse_model, validate, DeploymentModel};
pub use patterns::{parse_patterns, Pattern, UsageSpec};
pub use report::{bundle, emit_csv, emit_html, emit_json, ReportBundle};

pub use rust_decimal::Decimal;
