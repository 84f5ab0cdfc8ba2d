use std::fmt;

use serde::Serialize;

use crate::capital_risk::{CaRReport, CapitalRatio};
use crate::error::{CalmError, Result};
use crate::liquidity::{Bucket, FundingGapReport};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecommendationKind {
    RetainEarnings,
    ReleaseCapital,
    IncreaseDayLiquidity,
    ExtendMaturity,
}

impl RecommendationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecommendationKind::RetainEarnings => "retain_earnings",
            RecommendationKind::ReleaseCapital => "release_capital",
            RecommendationKind::IncreaseDayLiquidity => "increase_day_liquidity",
            RecommendationKind::ExtendMaturity => "extend_maturity",
        }
    }
}

impl fmt::Display for RecommendationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation<T> {
    pub kind: RecommendationKind,
    /// Never negative.
    pub amount: T,
    pub rationale: String,
}

fn percent<T: Scalar>(cr: &CapitalRatio<T>) -> String {
    match cr.finite() {
        Some(v) => format!("{}%", (v * T::from_i32(100).unwrap()).round_half_even(1)),
        None => cr.to_string(),
    }
}

/// Capital and liquidity actions implied by a pair of same-date reports.
///
/// Actions whose amount comes out as zero are left out, so two all-zero
/// reports yield nothing. Release is the full excess; pacing is left to
/// the operator.
pub fn recommend<T: Scalar>(car: &CaRReport<T>, gap: &FundingGapReport<T>) -> Result<Vec<Recommendation<T>>> {
    if car.as_of != gap.as_of {
        return Err(CalmError::Structural(format!(
            "capital report dated {} but funding gap dated {}",
            car.as_of, gap.as_of
        )));
    }
    let mut out = Vec::new();
    let mut push = |kind, amount: T, rationale: String| {
        if amount > T::zero() {
            out.push(Recommendation { kind, amount, rationale });
        }
    };

    let cr = percent(&car.cr);
    if car.cr.at_or_below(T::one()) {
        push(
            RecommendationKind::RetainEarnings,
            (car.total_car - car.capital).max_of(T::zero()),
            format!("CR {cr} is at or below 100%; add profit to the capital buffer until it covers CaR"),
        );
    } else {
        push(
            RecommendationKind::ReleaseCapital,
            car.capital - car.total_car,
            format!("CR {cr} is above 100%; capital beyond CaR may be spent"),
        );
    }

    let day = gap.gap(Bucket::Day);
    push(
        RecommendationKind::IncreaseDayLiquidity,
        (-day).max_of(T::zero()),
        format!("cumulative gap in the day bucket is {}; raise day liquidity to close it", day.round_half_even(0)),
    );

    // surplus that survives to the last bucket before the remainder bucket
    if gap.gap(Bucket::Month) > T::zero() {
        let peak = gap.rows.iter().map(|r| r.cumulative_gap).fold(T::zero(), |a, b| a.max_of(b));
        push(
            RecommendationKind::ExtendMaturity,
            peak,
            format!("cumulative surplus persists through the month bucket (peak {}); room for longer maturities", peak.round_half_even(0)),
        );
    }
    Ok(out)
}
