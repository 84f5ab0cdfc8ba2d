//! End-to-end runs behind the `calm` binary: load files, run the engines,
//! write tables, machine-readable reports and charts.
//!
//! Every artifact is a pure function of the inputs, the seed and the tool
//! version. Files are written atomically.

pub mod plot;
pub mod recommend;
pub mod tables;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::balance_sheet::AssetClass;
use crate::capital_risk::{car_report, reconcile, ClassSummary, Reconciliation, RiskSource};
use crate::crypto_mc::MonteCarloConfig;
use crate::error::{CalmError, Result};
use crate::ingestion::{load_holders, load_scenario, load_vault_book, read_snapshot, AppliedDefault, Loaded, Scenario};
use crate::liquidity::{asset_liquidity_schedule, bucket_liabilities, funding_gap, Bucket};
use crate::{CarReport, GapReport, LiabilityProfile, Liquidity, Money};

pub use recommend::{recommend, Recommendation, RecommendationKind};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Healthy,
    InputError,
    /// Capitalization ratio at or below the threshold.
    Breach,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Healthy => 0,
            ExitStatus::InputError => 1,
            ExitStatus::Breach => 2,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scenario's Monte Carlo seed.
    pub seed: Option<u64>,
    /// Replaces the scenario's status threshold.
    pub threshold: Option<Money>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub snapshot: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holders: Option<String>,
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_override: Option<u64>,
    pub defaults_applied: Vec<AppliedDefault>,
    pub monte_carlo: MonteCarloConfig,
}

/// Loads a scenario and applies command-line overrides.
pub fn scenario_with(path: &Path, opts: &RunOptions) -> Result<Loaded<Scenario>> {
    let mut loaded = load_scenario(path)?;
    if let Some(seed) = opts.seed {
        loaded.value.risk.market_model.seed = seed;
        loaded.defaults.retain(|d| d.field != "monte_carlo.seed");
    }
    if let Some(t) = opts.threshold {
        loaded.value.status_threshold = t;
        loaded.defaults.retain(|d| d.field != "capital.status_threshold");
    }
    Ok(loaded)
}

fn provenance(snapshot: &Path, holders: Option<&Path>, scenario: &Path, s: &Loaded<Scenario>, opts: &RunOptions) -> Provenance {
    Provenance {
        snapshot: snapshot.display().to_string(),
        holders: holders.map(|h| h.display().to_string()),
        scenario: scenario.display().to_string(),
        seed_override: opts.seed,
        defaults_applied: s.defaults.clone(),
        monte_carlo: s.value.risk.market_model.clone(),
    }
}

fn load_snapshot_for(path: &Path, scenario: &Scenario, defaults: &mut Vec<AppliedDefault>) -> Result<crate::Snapshot> {
    let loaded = read_snapshot(path, scenario.tolerances.balance)?;
    defaults.extend(loaded.defaults);
    Ok(loaded.value)
}

#[derive(Debug, Clone)]
pub struct CarRun {
    pub report: CarReport,
    pub reconciliation: Option<Reconciliation<Money>>,
    pub threshold: Money,
    pub provenance: Provenance,
}

impl CarRun {
    pub fn breached(&self) -> bool {
        self.report.cr.at_or_below(self.threshold)
    }

    pub fn status(&self) -> ExitStatus {
        if self.breached() {
            ExitStatus::Breach
        } else {
            ExitStatus::Healthy
        }
    }

    pub fn summary(&self) -> String {
        tables::car_summary(&self.report, self.reconciliation.as_ref())
    }
}

fn car_from(snapshot_path: &Path, scenario_path: &Path, s: &Loaded<Scenario>, opts: &RunOptions) -> Result<CarRun> {
    let mut prov = provenance(snapshot_path, None, scenario_path, s, opts);
    let snapshot = load_snapshot_for(snapshot_path, &s.value, &mut prov.defaults_applied)?;
    let base = snapshot_path.parent().unwrap_or(Path::new("."));
    let vaults = load_vault_book(&snapshot, base)?;
    let report = car_report(&snapshot, &s.value.risk, &vaults)?;
    let reconciliation = s.value.reference.as_ref().map(|r| reconcile(&report, r));
    Ok(CarRun { report, reconciliation, threshold: s.value.status_threshold, provenance: prov })
}

/// Capital at risk for one snapshot, without writing anything.
pub fn compute_car(snapshot: &Path, scenario: &Path, opts: &RunOptions) -> Result<CarRun> {
    let s = scenario_with(scenario, opts)?;
    car_from(snapshot, scenario, &s, opts)
}

#[derive(Debug, Clone)]
pub struct GapRun {
    pub profile: LiabilityProfile,
    pub liquidity: Liquidity,
    pub gap: GapReport,
    pub provenance: Provenance,
}

fn gap_from(
    snapshot_path: &Path,
    holders_path: &Path,
    scenario_path: &Path,
    s: &Loaded<Scenario>,
    opts: &RunOptions,
) -> Result<GapRun> {
    let mut prov = provenance(snapshot_path, Some(holders_path), scenario_path, s, opts);
    let snapshot = load_snapshot_for(snapshot_path, &s.value, &mut prov.defaults_applied)?;
    let holders = load_holders(holders_path)?;
    // every funding source, equity included, is slotted into some bucket
    let bucketing = s.value.liquidity.bucketing(Some(snapshot.total_funding()));
    let profile = bucket_liabilities(&holders, snapshot.as_of, &bucketing)?;
    let liquidity = asset_liquidity_schedule(&snapshot, &s.value.liquidity.haircuts)?;
    let gap = funding_gap(&profile, &liquidity)?;
    Ok(GapRun { profile, liquidity, gap, provenance: prov })
}

/// Funding gap for one snapshot, without writing anything.
pub fn compute_liquidity(snapshot: &Path, holders: &Path, scenario: &Path, opts: &RunOptions) -> Result<GapRun> {
    let s = scenario_with(scenario, opts)?;
    gap_from(snapshot, holders, scenario, &s, opts)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CalmError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CalmError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CalmError::io(path, e))?;
    tmp.persist(path).map_err(|e| CalmError::io(path, e.error))?;
    Ok(())
}

fn json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Envelope<'a, B: Serialize> {
    schema_version: u32,
    kind: &'static str,
    tool_version: &'static str,
    as_of: NaiveDate,
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: B,
}

fn envelope<B: Serialize>(kind: &'static str, as_of: NaiveDate, provenance: &Provenance, body: B) -> String {
    json(&Envelope {
        schema_version: REPORT_SCHEMA_VERSION,
        kind,
        tool_version: env!("CARGO_PKG_VERSION"),
        as_of,
        provenance,
        body,
    })
}

#[derive(Serialize)]
struct CarBody<'a> {
    status_threshold: Money,
    threshold_breached: bool,
    by_class: BTreeMap<AssetClass, ClassSummary<Money>>,
    by_source: BTreeMap<RiskSource, Money>,
    clamped_positions: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconciliation: Option<&'a Reconciliation<Money>>,
    report: &'a CarReport,
}

#[derive(Serialize)]
struct GapBody<'a> {
    profile: &'a LiabilityProfile,
    liquidity: &'a Liquidity,
    funding_gap: &'a GapReport,
}

fn car_json(run: &CarRun) -> String {
    envelope(
        "capital_at_risk",
        run.report.as_of,
        &run.provenance,
        CarBody {
            status_threshold: run.threshold,
            threshold_breached: run.breached(),
            by_class: run.report.by_class(),
            by_source: run.report.by_source(),
            clamped_positions: run.report.clamped_positions(),
            reconciliation: run.reconciliation.as_ref(),
            report: &run.report,
        },
    )
}

fn gap_json(run: &GapRun) -> String {
    envelope(
        "funding_gap",
        run.gap.as_of,
        &run.provenance,
        GapBody { profile: &run.profile, liquidity: &run.liquidity, funding_gap: &run.gap },
    )
}

fn to_f64(x: Money) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(0.0)
}

fn gap_chart(g: &GapReport) -> String {
    let bars: Vec<(String, f64)> = g.rows.iter().map(|r| (r.bucket.label().to_string(), to_f64(r.cumulative_gap))).collect();
    plot::bar_chart(&format!("Cumulative funding gap, {}", g.as_of), "USD (liquidity minus outflow)", &bars)
}

fn write_car(run: &CarRun, out: &Path) -> Result<()> {
    write_atomic(&out.join("car-table.csv"), &tables::car_table(&run.report))?;
    write_atomic(&out.join("car-components.csv"), &tables::component_table(&run.report))?;
    write_atomic(&out.join("car-summary.txt"), &run.summary())?;
    write_atomic(&out.join("car-report.json"), &car_json(run))
}

fn write_gap(run: &GapRun, out: &Path) -> Result<()> {
    write_atomic(&out.join("funding-gap.csv"), &tables::gap_table(&run.gap))?;
    write_atomic(&out.join("funding-gap.txt"), &tables::gap_summary(&run.gap))?;
    write_atomic(&out.join("funding-gap.svg"), &gap_chart(&run.gap))?;
    write_atomic(&out.join("gap-report.json"), &gap_json(run))
}

/// Capital at risk for one snapshot; writes tables, summary and JSON report.
pub fn run_car(snapshot: &Path, scenario: &Path, out: &Path, opts: &RunOptions) -> Result<CarRun> {
    let run = compute_car(snapshot, scenario, opts)?;
    write_car(&run, out)?;
    Ok(run)
}

/// Funding gap for one snapshot; writes table, bar chart and JSON report.
pub fn run_liquidity(snapshot: &Path, holders: &Path, scenario: &Path, out: &Path, opts: &RunOptions) -> Result<GapRun> {
    let run = compute_liquidity(snapshot, holders, scenario, opts)?;
    write_gap(&run, out)?;
    Ok(run)
}

#[derive(Debug, Clone)]
pub struct RecommendRun {
    pub car: CarRun,
    pub gap: GapRun,
    pub recommendations: Vec<Recommendation<Money>>,
}

/// Both engines plus the recommendations they imply.
pub fn run_recommend(
    snapshot: &Path,
    holders: &Path,
    scenario: &Path,
    out: &Path,
    opts: &RunOptions,
) -> Result<RecommendRun> {
    let s = scenario_with(scenario, opts)?;
    let car = car_from(snapshot, scenario, &s, opts)?;
    let gap = gap_from(snapshot, holders, scenario, &s, opts)?;
    let recommendations = recommend(&car.report, &gap.gap)?;
    write_car(&car, out)?;
    write_gap(&gap, out)?;
    write_atomic(&out.join("recommendations.csv"), &tables::recommendation_table(&recommendations))?;
    #[derive(Serialize)]
    struct Body<'a> {
        recommendations: &'a [Recommendation<Money>],
    }
    write_atomic(
        &out.join("recommendations.json"),
        &envelope("recommendations", car.report.as_of, &gap.provenance, Body { recommendations: &recommendations }),
    )?;
    Ok(RecommendRun { car, gap, recommendations })
}

/// One date of a time series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub as_of: NaiveDate,
    pub total_car: Money,
    pub car_by_source: BTreeMap<RiskSource, Money>,
    pub car_by_class: BTreeMap<AssetClass, Money>,
    pub cr: String,
    pub classification: crate::capital_risk::Classification,
    pub threshold_breached: bool,
    /// Present when a holders file exists for the date.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<BTreeMap<Bucket, Money>>,
    #[serde(skip)]
    cr_value: Option<Money>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedDate {
    pub as_of: NaiveDate,
    pub file: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRun {
    pub rows: Vec<SeriesRow>,
    pub skipped: Vec<SkippedDate>,
    pub warnings: Vec<String>,
}

impl SeriesRun {
    /// Input error if any date was skipped, else breach if the latest date
    /// breaches, else healthy.
    pub fn status(&self) -> ExitStatus {
        if !self.skipped.is_empty() {
            ExitStatus::InputError
        } else if self.rows.last().is_some_and(|r| r.threshold_breached) {
            ExitStatus::Breach
        } else {
            ExitStatus::Healthy
        }
    }
}

fn dated(name: &str, prefix: &str) -> Option<NaiveDate> {
    let stem = name.strip_prefix(prefix)?.strip_suffix(".toml")?;
    NaiveDate::parse_from_str(stem, "%Y-%m-%d").ok()
}

/// Snapshot files `snapshot-YYYY-MM-DD.toml` in `dir`, in date order, each
/// with its `holders-YYYY-MM-DD.toml` when present.
pub fn discover_series(dir: &Path) -> Result<Vec<(NaiveDate, PathBuf, Option<PathBuf>)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CalmError::io(dir, e))?;
    let mut names = Vec::new();
    for e in entries {
        let e = e.map_err(|e| CalmError::io(dir, e))?;
        names.push(e.file_name().to_string_lossy().into_owned());
    }
    let mut out: Vec<_> = names
        .iter()
        .filter_map(|n| dated(n, "snapshot-").map(|d| (d, dir.join(n))))
        .map(|(d, p)| {
            let holders = dir.join(format!("holders-{d}.toml"));
            (d, p, holders.is_file().then_some(holders))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn series_row(car: &CarRun, gap: Option<&GapRun>) -> SeriesRow {
    let r = &car.report;
    SeriesRow {
        as_of: r.as_of,
        total_car: r.total_car,
        car_by_source: r.by_source(),
        car_by_class: r.by_class().into_iter().map(|(c, s)| (c, s.car)).collect(),
        cr: tables::ratio_percent(&r.cr),
        classification: r.classification,
        threshold_breached: car.breached(),
        gaps: gap.map(|g| g.gap.rows.iter().map(|row| (row.bucket, row.cumulative_gap)).collect()),
        cr_value: r.cr.finite(),
    }
}

fn series_csv(rows: &[SeriesRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["date".to_string(), "total_car".into()];
    header.extend(RiskSource::ALL.iter().map(|s| format!("car_{s:?}").to_lowercase()));
    header.extend(AssetClass::ALL.iter().map(|c| format!("car_{c}")));
    header.push("cr_pct".into());
    header.extend(Bucket::ALL.iter().map(|b| format!("gap_{b}")));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.as_of.to_string(), tables::whole(r.total_car)];
        rec.extend(RiskSource::ALL.iter().map(|s| tables::whole(r.car_by_source[s])));
        rec.extend(AssetClass::ALL.iter().map(|c| tables::whole(r.car_by_class.get(c).copied().unwrap_or_default())));
        rec.push(r.cr.trim_end_matches('%').to_string());
        rec.extend(Bucket::ALL.iter().map(|b| r.gaps.as_ref().map_or_else(String::new, |g| tables::whole(g[b]))));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn series_charts(rows: &[SeriesRow]) -> Vec<(&'static str, String)> {
    let x: Vec<String> = rows.iter().map(|r| r.as_of.to_string()).collect();
    let millions = |v: Money| to_f64(v) / 1e6;
    let by_source: Vec<(String, Vec<f64>)> = RiskSource::ALL
        .iter()
        .map(|s| (s.as_str().to_string(), rows.iter().map(|r| millions(r.car_by_source[s])).collect()))
        .collect();
    let classes: Vec<AssetClass> =
        AssetClass::ALL.into_iter().filter(|c| rows.iter().any(|r| r.car_by_class.contains_key(c))).collect();
    let by_class: Vec<(String, Vec<f64>)> = classes
        .iter()
        .map(|c| {
            let values = rows.iter().map(|r| millions(r.car_by_class.get(c).copied().unwrap_or_default())).collect();
            (c.label().to_string(), values)
        })
        .collect();
    // infinite ratios have no finite point to draw; they are plotted at zero
    let cr = vec![(
        "CR".to_string(),
        rows.iter().map(|r| r.cr_value.map_or(0.0, |v| to_f64(v) * 100.0)).collect(),
    )];
    vec![
        ("car-by-source.svg", plot::line_chart("Capital at risk by risk source", "USD millions", &x, &by_source)),
        ("car-by-class.svg", plot::line_chart("Capital at risk by asset class", "USD millions", &x, &by_class)),
        ("capital-ratio.svg", plot::line_chart("Capitalization ratio", "percent", &x, &cr)),
    ]
}

/// Runs both engines over every dated snapshot in `dir`.
///
/// Dates are evaluated in parallel. A date whose files fail to load or
/// evaluate is skipped and listed; the rest still run.
pub fn run_timeseries(dir: &Path, scenario: &Path, out: &Path, opts: &RunOptions) -> Result<SeriesRun> {
    let s = scenario_with(scenario, opts)?;
    let dates = discover_series(dir)?;
    let results: Vec<std::result::Result<SeriesRow, SkippedDate>> = dates
        .par_iter()
        .map(|(date, snapshot, holders)| {
            let eval = || -> Result<SeriesRow> {
                let car = car_from(snapshot, scenario, &s, opts)?;
                let gap = holders.as_deref().map(|h| gap_from(snapshot, h, scenario, &s, opts)).transpose()?;
                if car.report.as_of != *date {
                    return Err(CalmError::Structural(format!(
                        "file named for {date} holds a snapshot dated {}",
                        car.report.as_of
                    )));
                }
                let day_dir = out.join(date.to_string());
                write_car(&car, &day_dir)?;
                if let Some(g) = &gap {
                    write_gap(g, &day_dir)?;
                }
                Ok(series_row(&car, gap.as_ref()))
            };
            eval().map_err(|e| SkippedDate { as_of: *date, file: snapshot.display().to_string(), error: e.to_string() })
        })
        .collect();

    let mut run = SeriesRun { rows: Vec::new(), skipped: Vec::new(), warnings: Vec::new() };
    for r in results {
        match r {
            Ok(row) => run.rows.push(row),
            Err(skip) => run.skipped.push(skip),
        }
    }
    if dates.is_empty() {
        run.warnings.push(format!("no snapshot-YYYY-MM-DD.toml files in {}", dir.display()));
    }
    write_atomic(&out.join("timeseries.csv"), &series_csv(&run.rows))?;
    write_atomic(
        &out.join("timeseries.json"),
        &json(&serde_json::json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": "timeseries",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "scenario": scenario.display().to_string(),
            "seed_override": opts.seed,
            "defaults_applied": s.defaults,
            "series": run,
        })),
    )?;
    for (name, svg) in series_charts(&run.rows) {
        write_atomic(&out.join(name), &svg)?;
    }
    Ok(run)
}
