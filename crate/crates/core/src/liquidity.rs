//! Liquidity risk: stressed outflows per maturity bucket, the liquidity the
//! asset side can raise in each bucket, and the cumulative funding gap.
//!
//! Gaps are reported as liquidity minus outflow, so a negative gap is a
//! shortfall. Outflows are incremental per bucket; the one-year bucket takes
//! whatever remains so that every liability is slotted somewhere.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::balance_sheet::{AssetClass, BalanceSheetSnapshot};
use crate::error::{CalmError, Result};
use crate::num::{sum, Scalar};

/// Money amounts are rounded to cents.
const MONEY_DP: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Day,
    Week,
    Month,
    Year,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [Bucket::Day, Bucket::Week, Bucket::Month, Bucket::Year];

    pub fn span_days(self) -> u32 {
        match self {
            Bucket::Day => 1,
            Bucket::Week => 7,
            Bucket::Month => 30,
            Bucket::Year => 365,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Day => "day",
            Bucket::Week => "week",
            Bucket::Month => "month",
            Bucket::Year => "year",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bucket::Day => "1. Day",
            Bucket::Week => "2. Week",
            Bucket::Month => "3. Month",
            Bucket::Year => "4. Year",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderKind {
    ExternallyOwned,
    Contract,
}

/// Behavioural class of a stablecoin holding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingClass {
    /// Held by contracts that interact with applications; flighty.
    Volatile,
    /// Held by externally-owned addresses; sticky.
    Organic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderRecord<T> {
    pub address_id: String,
    pub holder_kind: HolderKind,
    pub balance_series: Vec<(NaiveDate, T)>,
}

impl<T: Scalar> HolderRecord<T> {
    /// Latest balance observed on or before `date`; zero before the first
    /// observation.
    pub fn balance_at(&self, date: NaiveDate) -> T {
        let idx = self.balance_series.partition_point(|(d, _)| *d <= date);
        if idx == 0 {
            T::zero()
        } else {
            self.balance_series[idx - 1].1
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(w) = self.balance_series.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(CalmError::Domain(format!(
                "holder `{}`: dates not strictly increasing at {} -> {}",
                self.address_id, w[0].0, w[1].0
            )));
        }
        if let Some((d, b)) = self.balance_series.iter().find(|(_, b)| *b < T::zero()) {
            return Err(CalmError::Domain(format!("holder `{}`: negative balance {b} on {d}", self.address_id)));
        }
        Ok(())
    }
}

pub fn classify_holder<T>(h: &HolderRecord<T>) -> HoldingClass {
    match h.holder_kind {
        HolderKind::Contract => HoldingClass::Volatile,
        HolderKind::ExternallyOwned => HoldingClass::Organic,
    }
}

/// Largest relative fall from any positive observation to the lowest
/// observation at most `window_days` later.
///
/// Runs in linear time with a monotone queue over the window minimum.
pub fn max_drawdown<T: Scalar>(series: &[(NaiveDate, T)], window_days: u32) -> T {
    let Some(&(first, _)) = series.first() else {
        return T::zero();
    };
    let offsets: Vec<i64> = series.iter().map(|(d, _)| (*d - first).num_days()).collect();
    let values: Vec<T> = series.iter().map(|(_, v)| *v).collect();
    drawdown_scan(&offsets, &values, i64::from(window_days))
}

/// [`max_drawdown`] for consecutive daily observations.
pub fn max_drawdown_daily<T: Scalar>(values: &[T], window_days: u32) -> T {
    let offsets: Vec<i64> = (0..values.len() as i64).collect();
    drawdown_scan(&offsets, values, i64::from(window_days))
}

fn drawdown_scan<T: Scalar>(offsets: &[i64], values: &[T], window: i64) -> T {
    let mut best = T::zero();
    // indices into `values`, increasing values front to back
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for start in 0..values.len() {
        while next < values.len() && offsets[next] - offsets[start] <= window {
            while queue.back().is_some_and(|&j| values[j] >= values[next]) {
                queue.pop_back();
            }
            queue.push_back(next);
            next += 1;
        }
        while queue.front().is_some_and(|&j| j < start) {
            queue.pop_front();
        }
        let peak = values[start];
        if peak > T::zero() {
            let trough = values[*queue.front().expect("window contains its start")];
            let dd = (peak - trough) / peak;
            best = best.max_of(dd);
        }
    }
    best.clamp_unit()
}

/// Stressed outflows per bucket, each newly attributable to that bucket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketedLiabilityProfile<T> {
    pub as_of: NaiveDate,
    pub outflow: BTreeMap<Bucket, T>,
    pub total: T,
    /// Cumulative outflow fraction applied up to each bucket.
    pub drawdown: BTreeMap<Bucket, T>,
    /// Per holding class outflows, present when split reporting is enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by_class: Option<BTreeMap<HoldingClass, BTreeMap<Bucket, T>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketingOptions<T> {
    /// Drawdown window in days per bucket; defaults to the bucket span.
    pub stress_windows: BTreeMap<Bucket, u32>,
    /// Cumulative outflow fractions that replace the measured drawdowns.
    pub overrides: Option<BTreeMap<Bucket, T>>,
    /// Measure volatile and organic holdings separately.
    pub split_by_class: bool,
    /// Liabilities to slot; defaults to total holdings at the as-of date.
    pub total: Option<T>,
}

impl<T> Default for BucketingOptions<T> {
    fn default() -> Self {
        BucketingOptions {
            stress_windows: Bucket::ALL.iter().map(|b| (*b, b.span_days())).collect(),
            overrides: None,
            split_by_class: false,
            total: None,
        }
    }
}

/// Aggregate balance of `holders` on every observation date up to `as_of`.
fn aggregate_series<T: Scalar>(holders: &[&HolderRecord<T>], as_of: NaiveDate) -> Vec<(NaiveDate, T)> {
    let mut dates: Vec<NaiveDate> = holders
        .iter()
        .flat_map(|h| h.balance_series.iter().map(|(d, _)| *d))
        .filter(|d| *d <= as_of)
        .collect();
    dates.sort_unstable();
    dates.dedup();
    dates.into_iter().map(|d| (d, sum(holders.iter().map(|h| h.balance_at(d))))).collect()
}

fn check_fraction<T: Scalar>(bucket: Bucket, f: T) -> Result<()> {
    if f < T::zero() || f > T::one() {
        return Err(CalmError::Domain(format!("{bucket} outflow fraction {f} outside [0, 1]")));
    }
    Ok(())
}

/// Cumulative outflow fractions for Day, Week and Month.
fn cumulative_fractions<T: Scalar>(
    series: &[(NaiveDate, T)],
    opts: &BucketingOptions<T>,
) -> Result<BTreeMap<Bucket, T>> {
    let mut out = BTreeMap::new();
    let mut prev: Option<(Bucket, T)> = None;
    for bucket in Bucket::ALL {
        let given = opts.overrides.as_ref().and_then(|o| o.get(&bucket).copied());
        let value = match given {
            Some(f) => {
                check_fraction(bucket, f)?;
                if let Some((pb, pf)) = prev {
                    if f < pf {
                        return Err(CalmError::Domain(format!(
                            "outflow overrides must be non-decreasing: {pb} = {pf} > {bucket} = {f}"
                        )));
                    }
                }
                f
            }
            None if bucket == Bucket::Year => T::one(),
            None => {
                let window = opts.stress_windows.get(&bucket).copied().unwrap_or(bucket.span_days());
                let d = max_drawdown(series, window);
                prev.map_or(d, |(_, pf)| d.max_of(pf))
            }
        };
        out.insert(bucket, value);
        prev = Some((bucket, value));
    }
    Ok(out)
}

/// Slots liabilities into the four buckets from holder histories.
pub fn bucket_liabilities<T: Scalar>(
    holders: &[HolderRecord<T>],
    as_of: NaiveDate,
    opts: &BucketingOptions<T>,
) -> Result<BucketedLiabilityProfile<T>> {
    for h in holders {
        h.check()?;
    }
    let mut sorted: Vec<&HolderRecord<T>> = holders.iter().collect();
    sorted.sort_by(|a, b| a.address_id.cmp(&b.address_id));

    let holdings = sum(sorted.iter().map(|h| h.balance_at(as_of)));
    let total = opts.total.unwrap_or(holdings);
    if total < T::zero() {
        return Err(CalmError::Domain(format!("liabilities to slot are negative: {total}")));
    }

    let groups: Vec<(Option<HoldingClass>, Vec<&HolderRecord<T>>)> = if opts.split_by_class {
        [HoldingClass::Volatile, HoldingClass::Organic]
            .into_iter()
            .map(|c| (Some(c), sorted.iter().copied().filter(|h| classify_holder(h) == c).collect()))
            .collect()
    } else {
        vec![(None, sorted)]
    };

    let mut outflow: BTreeMap<Bucket, T> = Bucket::ALL.iter().map(|b| (*b, T::zero())).collect();
    let mut by_class = BTreeMap::new();
    let mut headline_fractions = None;
    for (class, members) in &groups {
        let series = aggregate_series(members, as_of);
        let fractions = cumulative_fractions(&series, opts)?;
        let share = match class {
            Some(_) if holdings > T::zero() => {
                total * sum(members.iter().map(|h| h.balance_at(as_of))) / holdings
            }
            Some(HoldingClass::Organic) => total,
            Some(HoldingClass::Volatile) => T::zero(),
            None => total,
        };
        let mut prev = T::zero();
        let mut class_out = BTreeMap::new();
        for bucket in [Bucket::Day, Bucket::Week, Bucket::Month] {
            let f = fractions[&bucket];
            let amount = (share * (f - prev).max_of(T::zero())).round_half_even(MONEY_DP);
            prev = prev.max_of(f);
            class_out.insert(bucket, amount);
        }
        let slotted = sum(class_out.values().copied());
        class_out.insert(Bucket::Year, share - slotted);
        for (b, v) in &class_out {
            *outflow.get_mut(b).expect("all buckets present") = outflow[b] + *v;
        }
        if let Some(c) = class {
            by_class.insert(*c, class_out);
        }
        headline_fractions.get_or_insert(fractions);
    }

    // the remainder keeps the total exact when per-class shares were rounded
    let earlier = outflow[&Bucket::Day] + outflow[&Bucket::Week] + outflow[&Bucket::Month];
    outflow.insert(Bucket::Year, total - earlier);
    if let Some((b, v)) = outflow.iter().find(|(_, v)| **v < T::zero()) {
        return Err(CalmError::Domain(format!("negative outflow {v} in bucket {b}")));
    }

    let drawdown = if opts.split_by_class && total > T::zero() {
        let mut cum = T::zero();
        Bucket::ALL
            .iter()
            .map(|b| {
                cum = cum + outflow[b];
                (*b, cum / total)
            })
            .collect()
    } else {
        headline_fractions.unwrap_or_default()
    };

    Ok(BucketedLiabilityProfile {
        as_of,
        outflow,
        total,
        drawdown,
        by_class: opts.split_by_class.then_some(by_class),
    })
}

/// Liquidity newly available in each bucket after haircuts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiquiditySchedule<T> {
    pub as_of: NaiveDate,
    pub available: BTreeMap<Bucket, T>,
}

pub fn asset_liquidity_schedule<T: Scalar>(
    s: &BalanceSheetSnapshot<T>,
    haircuts: &BTreeMap<AssetClass, T>,
) -> Result<LiquiditySchedule<T>> {
    for (class, h) in haircuts {
        if *h < T::zero() || *h > T::one() {
            return Err(CalmError::Domain(format!("haircut {h} for {class} outside [0, 1]")));
        }
    }
    let mut assets: Vec<_> = s.assets.iter().collect();
    assets.sort_by(|a, b| a.id.cmp(&b.id));
    let mut available: BTreeMap<Bucket, T> = Bucket::ALL.iter().map(|b| (*b, T::zero())).collect();
    for a in assets {
        let haircut = haircuts.get(&a.class).copied().unwrap_or_else(T::zero);
        let raised = (a.exposure * (T::one() - haircut)).round_half_even(MONEY_DP);
        let slot = available.get_mut(&a.liquidity_tenor).expect("all buckets present");
        *slot = *slot + raised;
    }
    Ok(LiquiditySchedule { as_of: s.as_of, available })
}

/// Which difference a reported gap denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// Negative values are shortfalls.
    LiquidityMinusOutflow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow<T> {
    pub bucket: Bucket,
    pub outflow: T,
    pub liquidity: T,
    pub cumulative_gap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundingGapReport<T> {
    pub as_of: NaiveDate,
    pub sign_convention: SignConvention,
    pub rows: Vec<GapRow<T>>,
    pub terminal_gap: T,
}

impl<T: Scalar> FundingGapReport<T> {
    pub fn row(&self, bucket: Bucket) -> &GapRow<T> {
        self.rows.iter().find(|r| r.bucket == bucket).expect("report covers all buckets")
    }

    pub fn gap(&self, bucket: Bucket) -> T {
        self.row(bucket).cumulative_gap
    }
}

/// Cumulative funding gap, bucket by bucket.
pub fn funding_gap<T: Scalar>(
    outflows: &BucketedLiabilityProfile<T>,
    liquidity: &LiquiditySchedule<T>,
) -> Result<FundingGapReport<T>> {
    if outflows.as_of != liquidity.as_of {
        return Err(CalmError::Structural(format!(
            "outflows dated {} but liquidity dated {}",
            outflows.as_of, liquidity.as_of
        )));
    }
    let keys = |m: &BTreeMap<Bucket, T>| m.keys().copied().collect::<Vec<_>>();
    if keys(&outflows.outflow) != Bucket::ALL || keys(&liquidity.available) != Bucket::ALL {
        return Err(CalmError::Structural(format!(
            "bucket sets differ: outflows {:?}, liquidity {:?}",
            keys(&outflows.outflow),
            keys(&liquidity.available)
        )));
    }
    let mut cumulative = T::zero();
    let rows: Vec<GapRow<T>> = Bucket::ALL
        .iter()
        .map(|b| {
            let outflow = outflows.outflow[b];
            let liquidity = liquidity.available[b];
            cumulative = cumulative + (liquidity - outflow);
            GapRow { bucket: *b, outflow, liquidity, cumulative_gap: cumulative }
        })
        .collect();
    let terminal_gap = sum(rows.iter().map(|r| r.liquidity)) - sum(rows.iter().map(|r| r.outflow));
    Ok(FundingGapReport {
        as_of: outflows.as_of,
        sign_convention: SignConvention::LiquidityMinusOutflow,
        rows,
        terminal_gap,
    })
}
