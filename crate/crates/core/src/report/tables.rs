//! Delimited and plain-text renderings of the reports.
//!
//! Delimited tables carry money in whole units and fractions as percent to
//! one decimal. The plain-text summary shows money in millions to one
//! decimal. Rounding is half-to-even throughout.

use std::fmt::Write as _;

use rust_decimal_macros::dec;

use super::recommend::Recommendation;
use crate::capital_risk::{CapitalRatio, Reconciliation, RiskSource};
use crate::num::Scalar;
use crate::{CarReport, GapReport, Money};

/// `x` rounded to `dp` places and printed with exactly `dp` places.
pub fn fixed(x: Money, dp: u32) -> String {
    format!("{:.*}", dp as usize, x.round_half_even(dp))
}

pub fn whole(x: Money) -> String {
    fixed(x, 0)
}

pub fn percent(fraction: Money) -> String {
    fixed(fraction * dec!(100), 1)
}

pub fn millions(x: Money) -> String {
    fixed(x / dec!(1000000), 1)
}

pub fn ratio_percent(cr: &CapitalRatio<Money>) -> String {
    match cr.finite() {
        Some(v) => format!("{}%", percent(v)),
        None => cr.to_string(),
    }
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Exposure, capital at risk and CaRR per asset class, with a total row.
pub fn car_table(r: &CarReport) -> String {
    let mut rows: Vec<Vec<String>> = r
        .by_class()
        .into_iter()
        .map(|(class, s)| vec![class.label().to_string(), whole(s.exposure), whole(s.car), percent(s.carr)])
        .collect();
    rows.push(vec![
        "Total".into(),
        whole(r.total_exposure),
        whole(r.total_car),
        percent(r.aggregate_carr.unwrap_or_default()),
    ]);
    csv_text(&["asset_class", "exposure", "car", "carr_pct"], rows)
}

/// CaRR split by risk source per asset class.
pub fn component_table(r: &CarReport) -> String {
    let rows = r
        .by_class()
        .into_iter()
        .map(|(class, s)| {
            let mut row = vec![class.label().to_string()];
            row.extend(RiskSource::ALL.iter().map(|src| percent(s.components[src])));
            row.push(percent(s.carr));
            row
        })
        .collect();
    csv_text(&["asset_class", "duration_pct", "credit_pct", "market_pct", "operational_pct", "carr_pct"], rows)
}

pub fn gap_table(g: &GapReport) -> String {
    let rows = g
        .rows
        .iter()
        .map(|r| vec![r.bucket.label().to_string(), whole(r.outflow), whole(r.liquidity), whole(r.cumulative_gap)])
        .collect();
    csv_text(&["bucket", "outflow", "liquidity", "cumulative_gap"], rows)
}

pub fn recommendation_table(recs: &[Recommendation<Money>]) -> String {
    let rows = recs.iter().map(|r| vec![r.kind.to_string(), whole(r.amount), r.rationale.clone()]).collect();
    csv_text(&["kind", "amount", "rationale"], rows)
}

/// Plain-text capital summary in millions.
pub fn car_summary(r: &CarReport, reconciliation: Option<&Reconciliation<Money>>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Capital at risk as of {}", r.as_of);
    let _ = writeln!(out, "{:<22}{:>16}{:>12}{:>8}", "Asset class", "Exposure ($M)", "CaR ($M)", "CaRR");
    for (class, s) in r.by_class() {
        let _ = writeln!(
            out,
            "{:<22}{:>16}{:>12}{:>8}",
            class.label(),
            millions(s.exposure),
            millions(s.car),
            format!("{}%", percent(s.carr))
        );
    }
    let total_carr = r.aggregate_carr.map_or_else(|| "-".to_string(), |c| format!("{}%", percent(c)));
    let _ = writeln!(
        out,
        "{:<22}{:>16}{:>12}{:>8}",
        "Total",
        millions(r.total_exposure),
        millions(r.total_car),
        total_carr
    );
    let _ = writeln!(
        out,
        "Capital {}M, CR {}, {}",
        millions(r.capital),
        ratio_percent(&r.cr),
        match r.classification {
            crate::capital_risk::Classification::Undercapitalized => "undercapitalized",
            crate::capital_risk::Classification::SufficientlyCapitalized => "sufficiently capitalized",
        }
    );
    if let Some(rec) = reconciliation {
        if let Some(t) = rec.published_total {
            let _ = writeln!(
                out,
                "Reference: total {}M, rows sum {}M, computed {}M{}",
                millions(t),
                millions(rec.published_rows_sum),
                millions(rec.computed_total),
                if rec.published_inconsistent { " (reference total and rows disagree)" } else { "" }
            );
        }
        if rec.discrepancy {
            let _ = writeln!(out, "Discrepancy against reference figures flagged");
        }
    }
    if !r.clamped_positions().is_empty() {
        let _ = writeln!(out, "Clamped to full exposure: {}", r.clamped_positions().join(", "));
    }
    out
}

pub fn gap_summary(g: &GapReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Funding gap as of {} (liquidity minus outflow)", g.as_of);
    let _ = writeln!(out, "{:<10}{:>18}{:>18}{:>18}", "Bucket", "Outflow", "Liquidity", "Cumulative gap");
    for r in &g.rows {
        let _ = writeln!(
            out,
            "{:<10}{:>18}{:>18}{:>18}",
            r.bucket.label(),
            whole(r.outflow),
            whole(r.liquidity),
            whole(r.cumulative_gap)
        );
    }
    out
}
