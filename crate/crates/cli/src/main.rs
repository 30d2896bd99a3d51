use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cloudcost::assessment::{assess, load_assessment};
use cloudcost::calendar::{MonthWindow, YearMonth};
use cloudcost::engine::round_cents;
use cloudcost::finance::{annualize, load_plan, on_premise_cash_flows, Comparison};
use cloudcost::model::parse_model_unchecked;
use cloudcost::report::{emit_csv, emit_html, emit_json};
use cloudcost::{
    compare_options, load_catalog, load_scenario, npv, parse_model, simulate, validate, CostReport,
    Decimal, FinancialOption, NpvResult, PriceCatalog, PriceScenario,
};
use cloudcost_service::ServiceConfig;

/// Cost modeling for moving systems to infrastructure clouds.
#[derive(Parser)]
#[command(name = "cloudcost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one deployment model and write its cost report.
    Simulate(SimulateArgs),
    /// Compare cloud models and on-premise plans by yearly cost and NPV.
    Compare(CompareArgs),
    /// Evaluate a suitability checklist and stakeholder ledger.
    Assess {
        /// Path to a .assessment.json file.
        file: PathBuf,
    },
    /// List structural violations in a deployment model.
    Validate {
        /// Path to a .cloudmodel.json file.
        #[arg(long)]
        model: PathBuf,
    },
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct WindowArgs {
    /// First simulated month, YYYY-MM.
    #[arg(long)]
    from: YearMonth,
    /// Last simulated month (inclusive), YYYY-MM.
    #[arg(long)]
    to: YearMonth,
    /// Yearly discount rate for NPV, e.g. 0.05. Needs a whole number of years.
    #[arg(long)]
    discount_rate: Option<Decimal>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the HTML report here.
    #[arg(long)]
    html: Option<PathBuf>,
    /// Write the CSV cost lines here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Path to a .cloudmodel.json file.
    #[arg(long)]
    model: PathBuf,
    /// Path to a .prices.json catalog.
    #[arg(long)]
    catalog: PathBuf,
    /// Optional .scenario.json price overlay.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Cloud option as LABEL=PATH (or PATH, labelled by file stem). Repeatable.
    #[arg(long = "model", value_name = "LABEL=PATH")]
    models: Vec<String>,
    /// On-premise plan (.onprem.json), labelled by its own label. Repeatable.
    #[arg(long = "on-premise", value_name = "PATH")]
    plans: Vec<PathBuf>,
    /// Path to a .prices.json catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Optional .scenario.json price overlay applied to every cloud option.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Option the others are measured against; defaults to the first on-premise plan.
    #[arg(long)]
    reference: Option<String>,
    #[command(flatten)]
    window: WindowArgs,
    /// Write the HTML comparison (charts use the first cloud option's report).
    #[arg(long)]
    html: Option<PathBuf>,
    /// Write the comparison as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address; defaults to $CLOUDCOST_ADDR or 127.0.0.1:8080.
    #[arg(long)]
    addr: Option<String>,
    /// Directory of *.prices.json catalogs; defaults to $CLOUDCOST_CATALOG_DIR.
    #[arg(long)]
    catalog_dir: Option<PathBuf>,
    /// Report store; defaults to $CLOUDCOST_REPORT_DIR or ./reports.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

enum Failure {
    /// Bad input: exit 2.
    User(String),
    /// Anything else: exit 1.
    Internal(String),
}

type Result<T> = std::result::Result<T, Failure>;

fn user(e: impl ToString) -> Failure {
    Failure::User(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::User(format!("{}: {e}", path.display()))
}

fn load_inputs(catalog: &Path, scenario: Option<&PathBuf>) -> Result<(PriceCatalog, Option<PriceScenario>)> {
    let cat = load_catalog(&read(catalog)?).map_err(|e| in_file(catalog, e))?;
    let sc = match scenario {
        Some(p) => Some(load_scenario(&read(p)?).map_err(|e| in_file(p, e))?),
        None => None,
    };
    Ok((cat, sc))
}

fn window(w: &WindowArgs) -> Result<MonthWindow> {
    MonthWindow::new(w.from, w.to).map_err(user)
}

fn rate(w: &WindowArgs) -> Result<Decimal> {
    let r = w.discount_rate.unwrap_or(Decimal::new(5, 2));
    if r <= -Decimal::ONE {
        return Err(user(format!("discount rate must exceed -1, got {r}")));
    }
    Ok(r)
}

fn simulate_file(path: &Path, catalog: &PriceCatalog, w: &MonthWindow, sc: Option<&PriceScenario>) -> Result<CostReport> {
    let model = parse_model(&read(path)?).map_err(|e| in_file(path, e))?;
    simulate(&model, catalog, w, sc).map_err(|e| in_file(path, e))
}

fn money(d: Decimal) -> String {
    format!("{:.2}", round_cents(d))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (catalog, scenario) = load_inputs(&args.catalog, args.scenario.as_ref())?;
    let w = window(&args.window)?;
    let report = simulate_file(&args.model, &catalog, &w, scenario.as_ref())?;
    let r = rate(&args.window)?;
    let npvs: Vec<NpvResult> = if w.is_year_aligned() {
        let option = annualize(&report, w.start).map_err(user)?;
        vec![npv(&option, r).map_err(user)?]
    } else if args.window.discount_rate.is_some() {
        return Err(user(format!("window not year-aligned: {} months", w.len())));
    } else {
        Vec::new()
    };
    if let Some(p) = &args.out.csv {
        write(p, &emit_csv(&report))?;
    }
    if let Some(p) = &args.out.json {
        write(p, &emit_json(&report, &npvs))?;
    }
    if let Some(p) = &args.out.html {
        write(p, &emit_html(&report, &npvs, None))?;
    }
    let mut out = String::new();
    let _ = writeln!(out, "model     {}", report.model_name);
    let _ = writeln!(out, "catalog   {}", report.catalog_label);
    if let Some(s) = &report.scenario_label {
        let _ = writeln!(out, "scenario  {s}");
    }
    let _ = writeln!(out, "window    {} to {} ({} months)", w.start, w.end, w.len());
    let _ = writeln!(out, "lines     {}", report.lines.len());
    let _ = writeln!(out, "total     {}", money(report.total()));
    for n in &npvs {
        let _ = writeln!(out, "npv       {} at {}", money(n.npv), n.rate);
    }
    print!("{out}");
    Ok(())
}

fn parse_option_arg(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((label, path)) if !label.is_empty() => (label.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(arg);
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let stem = name.split('.').next().unwrap_or(&name).to_string();
            (stem, path)
        }
    }
}

fn comparison_table(cmp: &Comparison) -> String {
    let years = cmp.ranking.iter().map(|r| r.cash_flows.len()).max().unwrap_or(0);
    let width = cmp.ranking.iter().map(|r| r.label.len()).max().unwrap_or(6).max(6);
    let mut out = String::new();
    let _ = writeln!(out, "yearly cost");
    let _ = write!(out, "{:width$}", "option");
    for y in 0..years {
        let _ = write!(out, " {:>12}", format!("Y{y}"));
    }
    let _ = writeln!(out);
    for r in &cmp.ranking {
        let _ = write!(out, "{:width$}", r.label);
        for v in r.cash_flows.values() {
            let _ = write!(out, " {:>12}", money(*v));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "net present value at {}", cmp.rate);
    let _ = writeln!(out, "{:width$} {:>12} {:>10}", "option", "npv", format!("vs {}", cmp.reference));
    for r in &cmp.ranking {
        let pct = r
            .vs_reference
            .map(|p| format!("{:+.1}%", p * Decimal::ONE_HUNDRED))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(out, "{:width$} {:>12} {:>10}", r.label, money(r.npv), pct);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "cheapest: {}", cmp.cheapest().label);
    out
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let count = args.models.len() + args.plans.len();
    if count < 2 {
        return Err(user(format!("need ≥ 2 options, got {count}")));
    }
    let w = window(&args.window)?;
    if !w.is_year_aligned() {
        return Err(user(format!("window not year-aligned: {} months", w.len())));
    }
    let r = rate(&args.window)?;

    let mut options: Vec<FinancialOption> = Vec::new();
    for p in &args.plans {
        let plan = load_plan(&read(p)?).map_err(|e| in_file(p, e))?;
        options.push(on_premise_cash_flows(&plan, w.len() / 12).map_err(|e| in_file(p, e))?);
    }
    let mut first_report = None;
    if !args.models.is_empty() {
        let catalog_path = args
            .catalog
            .as_ref()
            .ok_or_else(|| user("--catalog is required with --model"))?;
        let (catalog, scenario) = load_inputs(catalog_path, args.scenario.as_ref())?;
        let specs: Vec<(String, PathBuf)> = args.models.iter().map(|m| parse_option_arg(m)).collect();
        let reports: Vec<Result<CostReport>> = std::thread::scope(|s| {
            let handles: Vec<_> = specs
                .iter()
                .map(|(_, path)| s.spawn(|| simulate_file(path, &catalog, &w, scenario.as_ref())))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Failure::Internal("simulation thread panicked".into()))))
                .collect()
        });
        for ((label, _), report) in specs.iter().zip(reports) {
            let report = report?;
            let mut option = annualize(&report, w.start).map_err(user)?;
            option.label = label.clone();
            options.push(option);
            first_report.get_or_insert(report);
        }
    }
    let mut labels: Vec<&str> = options.iter().map(|o| o.label.as_str()).collect();
    labels.sort_unstable();
    if let Some(dup) = labels.windows(2).find(|p| p[0] == p[1]) {
        return Err(user(format!("duplicate option label {:?}", dup[0])));
    }
    let reference = args
        .reference
        .clone()
        .unwrap_or_else(|| options[0].label.clone());
    let cmp = compare_options(&options, r, &reference).map_err(user)?;

    if let Some(p) = &args.json {
        let mut bytes = serde_json::to_vec_pretty(&serde_json::to_value(&cmp).map_err(|e| Failure::Internal(e.to_string()))?)
            .map_err(|e| Failure::Internal(e.to_string()))?;
        bytes.push(b'\n');
        write(p, &bytes)?;
    }
    if let Some(p) = &args.html {
        let report = first_report.ok_or_else(|| user("--html needs at least one --model"))?;
        write(p, &emit_html(&report, &[], Some(&cmp)))?;
    }
    print!("{}", comparison_table(&cmp));
    Ok(())
}

fn cmd_assess(file: &Path) -> Result<()> {
    let doc = load_assessment(&read(file)?).map_err(|e| in_file(file, e))?;
    let outcome = assess(&doc).map_err(|e| in_file(file, e))?;
    let rec = &outcome.recommendation;
    let mut out = format!("{}\n{}\n", rec.verdict, rec.narrative);
    for item in &rec.blocking_items {
        let _ = writeln!(out, "  - {item}");
    }
    if let Some(s) = &outcome.stakeholders {
        let _ = writeln!(out, "stakeholders:");
        for (bucket, names) in &s.buckets {
            let label = serde_json::to_value(bucket).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            let _ = writeln!(out, "  {label}: {}", names.join(", "));
        }
    }
    print!("{out}");
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<()> {
    let model = parse_model_unchecked(&read(path)?).map_err(|e| in_file(path, e))?;
    let violations = validate(&model);
    if violations.is_empty() {
        println!("ok");
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(user(format!("{}: {} violation(s)", path.display(), violations.len())))
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let mut config = ServiceConfig::from_env().map_err(user)?;
    if let Some(a) = args.addr {
        config.addr = a.parse().map_err(|e| user(format!("--addr {a}: {e}")))?;
    }
    if args.catalog_dir.is_some() {
        config.catalog_dir = args.catalog_dir;
    }
    if let Some(d) = args.report_dir {
        config.report_dir = d;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
    runtime.block_on(cloudcost_service::serve(config)).map_err(user)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Assess { file } => cmd_assess(&file),
        Command::Validate { model } => cmd_validate(&model),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
