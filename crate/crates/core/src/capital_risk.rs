//! Capital at risk.
//!
//! Each asset position gets a capital-at-risk ratio, the sum of duration,
//! credit, crypto-market and operational loss fractions. Capital at risk is
//! exposure times that ratio summed over positions, and the capitalization
//! ratio is capital over capital at risk.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize, Serializer};

use crate::balance_sheet::{capital, AssetClass, AssetPosition, BalanceSheetSnapshot, Rating};
use crate::crypto_mc::{expected_loss_ratio, MonteCarloConfig, VaultPortfolio};
use crate::error::{CalmError, Result};
use crate::num::{sum, Scalar};

/// Digits kept from the floating-point Monte Carlo estimate.
const MARKET_DP: u32 = 10;

/// How credit loss is expressed for a position or class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CreditMethod<T> {
    /// Loss as a flat fraction of exposure.
    Flat(T),
    /// Probability of default times loss given default.
    PdLgd { pd: T, lgd: T },
}

impl<T: Scalar> CreditMethod<T> {
    pub fn fraction(&self) -> Result<T> {
        match *self {
            CreditMethod::Flat(f) => {
                check_fraction("credit fraction", f)?;
                Ok(f)
            }
            CreditMethod::PdLgd { pd, lgd } => {
                check_fraction("pd", pd)?;
                check_fraction("lgd", lgd)?;
                Ok(pd * lgd)
            }
        }
    }
}

fn check_fraction<T: Scalar>(what: &str, f: T) -> Result<()> {
    if f < T::zero() || f > T::one() {
        return Err(CalmError::Domain(format!("{what} {f} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskParameterSet<T> {
    /// Parallel upward rate shock in basis points.
    pub rate_shock_bps: T,
    pub credit_rating_table: BTreeMap<Rating, T>,
    pub credit_class_overrides: BTreeMap<AssetClass, CreditMethod<T>>,
    /// Keyed by position id; takes precedence over class overrides.
    pub credit_position_overrides: BTreeMap<String, CreditMethod<T>>,
    /// Credit fraction for stablecoin positions nothing else covers.
    pub stablecoin_credit_default: T,
    /// Operational loss fraction by position id; absent means 0.
    pub operational_table: BTreeMap<String, T>,
    pub market_model: MonteCarloConfig,
}

impl<T: Scalar> Default for RiskParameterSet<T> {
    fn default() -> Self {
        RiskParameterSet {
            rate_shock_bps: T::from_i64(200).expect("small integer"),
            credit_rating_table: BTreeMap::new(),
            credit_class_overrides: BTreeMap::new(),
            credit_position_overrides: BTreeMap::new(),
            stablecoin_credit_default: T::ratio(1, 100),
            operational_table: BTreeMap::new(),
            market_model: MonteCarloConfig::default(),
        }
    }
}

impl<T: Scalar> RiskParameterSet<T> {
    pub fn check(&self) -> Result<()> {
        if self.rate_shock_bps < T::zero() {
            return Err(CalmError::Domain(format!("rate shock {} bps is negative", self.rate_shock_bps)));
        }
        for (r, f) in &self.credit_rating_table {
            check_fraction(&format!("credit fraction for rating {r}"), *f)?;
        }
        for m in self.credit_class_overrides.values().chain(self.credit_position_overrides.values()) {
            m.fraction()?;
        }
        check_fraction("stablecoin credit default", self.stablecoin_credit_default)?;
        for (id, f) in &self.operational_table {
            check_fraction(&format!("operational fraction for {id}"), *f)?;
        }
        self.market_model.check()
    }
}

/// Loss fraction from a parallel rate shock, with average maturity standing
/// in for modified duration.
pub fn duration_carr<T: Scalar>(p: &AssetPosition<T>, shock_bps: T) -> Result<T> {
    if shock_bps < T::zero() {
        return Err(CalmError::Domain(format!("rate shock {shock_bps} bps is negative")));
    }
    if p.avg_maturity < T::zero() {
        return Err(CalmError::Domain(format!("position `{}` has negative maturity", p.id)));
    }
    let shock = shock_bps / T::from_i64(10_000).expect("small integer");
    Ok((p.avg_maturity * shock).clamp_unit())
}

/// Credit loss fraction.
///
/// Lookup order: position override, class override, rating table, then
/// zero for credit-free classes and the stablecoin default. A rated position
/// whose rating is missing from the table is an error.
pub fn credit_carr<T: Scalar>(p: &AssetPosition<T>, params: &RiskParameterSet<T>) -> Result<T> {
    if let Some(m) = params.credit_position_overrides.get(&p.id) {
        return m.fraction();
    }
    if let Some(m) = params.credit_class_overrides.get(&p.class) {
        return m.fraction();
    }
    if let Some(rating) = p.rating {
        return match params.credit_rating_table.get(&rating) {
            Some(f) => {
                check_fraction("credit fraction", *f)?;
                Ok(*f)
            }
            None => Err(CalmError::Config(format!(
                "position `{}` is rated {rating} but the rating table has no entry for it",
                p.id
            ))),
        };
    }
    if p.class.is_credit_free() {
        return Ok(T::zero());
    }
    if p.class == AssetClass::Stablecoin {
        return Ok(params.stablecoin_credit_default);
    }
    Err(CalmError::Config(format!(
        "no credit parameter covers position `{}` ({}); add a rating or an override",
        p.id, p.class
    )))
}

/// Expected credit loss in money: exposure × PD × LGD.
pub fn credit_loss_pd_lgd<T: Scalar>(exposure: T, pd: T, lgd: T) -> Result<T> {
    check_fraction("pd", pd)?;
    check_fraction("lgd", lgd)?;
    Ok(exposure * pd * lgd)
}

fn market_fraction<T: Scalar>(
    p: &AssetPosition<T>,
    model: &MonteCarloConfig,
    vaults: &BTreeMap<String, VaultPortfolio<T>>,
) -> Result<T> {
    let Some(reference) = p.collateral_ref.as_deref() else {
        return Err(CalmError::Config(format!("crypto-backed loan `{}` has no collateral_ref", p.id)));
    };
    let portfolio = vaults.get(reference).ok_or_else(|| {
        CalmError::Config(format!("position `{}` references unknown vault portfolio `{reference}`", p.id))
    })?;
    portfolio.check()?;
    let ratio = expected_loss_ratio(&portfolio.to_float::<f64>(), model)?;
    let ratio = T::from_f64(ratio).ok_or_else(|| CalmError::Domain(format!("loss ratio {ratio} not representable")))?;
    Ok(ratio.round_half_even(MARKET_DP).clamp_unit())
}

/// Crypto-market loss fraction; non-zero only for crypto-backed loans.
pub fn market_carr<T: Scalar>(
    p: &AssetPosition<T>,
    params: &RiskParameterSet<T>,
    vaults: &BTreeMap<String, VaultPortfolio<T>>,
) -> Result<T> {
    if p.class != AssetClass::CryptoBackedLoan {
        return Ok(T::zero());
    }
    market_fraction(p, &params.market_model, vaults)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaRLine<T> {
    pub position_id: String,
    pub class: AssetClass,
    pub exposure: T,
    pub duration_carr: T,
    pub credit_carr: T,
    pub market_carr: T,
    pub operational_carr: T,
    pub carr: T,
    pub car: T,
    /// The components summed past 1 and `carr` was capped.
    pub clamped: bool,
}

impl<T: Scalar> CaRLine<T> {
    fn assemble(p: &AssetPosition<T>, duration: T, credit: T, market: T, operational: T) -> Self {
        let raw = duration + credit + market + operational;
        let clamped = raw > T::one();
        let carr = raw.clamp_unit();
        CaRLine {
            position_id: p.id.clone(),
            class: p.class,
            exposure: p.exposure,
            duration_carr: duration,
            credit_carr: credit,
            market_carr: market,
            operational_carr: operational,
            carr,
            car: p.exposure * carr,
            clamped,
        }
    }

    pub fn component(&self, source: RiskSource) -> T {
        match source {
            RiskSource::Duration => self.duration_carr,
            RiskSource::Credit => self.credit_carr,
            RiskSource::Market => self.market_carr,
            RiskSource::Operational => self.operational_carr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskSource {
    Duration,
    Credit,
    Market,
    Operational,
}

impl RiskSource {
    pub const ALL: [RiskSource; 4] = [RiskSource::Duration, RiskSource::Credit, RiskSource::Market, RiskSource::Operational];

    pub fn as_str(self) -> &'static str {
        match self {
            RiskSource::Duration => "duration",
            RiskSource::Credit => "credit",
            RiskSource::Market => "market",
            RiskSource::Operational => "operational",
        }
    }
}

fn operational<T: Scalar>(p: &AssetPosition<T>, params: &RiskParameterSet<T>) -> Result<T> {
    let f = params.operational_table.get(&p.id).copied().unwrap_or_else(T::zero);
    check_fraction("operational fraction", f)?;
    Ok(f)
}

/// One line of the capital-at-risk table.
pub fn carr<T: Scalar>(
    p: &AssetPosition<T>,
    params: &RiskParameterSet<T>,
    vaults: &BTreeMap<String, VaultPortfolio<T>>,
) -> Result<CaRLine<T>> {
    Ok(CaRLine::assemble(
        p,
        duration_carr(p, params.rate_shock_bps)?,
        credit_carr(p, params)?,
        market_carr(p, params, vaults)?,
        operational(p, params)?,
    ))
}

/// Capital over capital at risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapitalRatio<T> {
    Finite(T),
    /// No capital at risk and non-negative capital.
    Infinite,
    /// No capital at risk but negative capital.
    NegativeInfinite,
}

impl<T: Scalar> CapitalRatio<T> {
    pub fn finite(&self) -> Option<T> {
        match self {
            CapitalRatio::Finite(v) => Some(*v),
            _ => None,
        }
    }

    /// True when the ratio is at or below `threshold`.
    pub fn at_or_below(&self, threshold: T) -> bool {
        match self {
            CapitalRatio::Finite(v) => *v <= threshold,
            CapitalRatio::Infinite => false,
            CapitalRatio::NegativeInfinite => true,
        }
    }
}

impl<T: Scalar> fmt::Display for CapitalRatio<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapitalRatio::Finite(v) => write!(f, "{v}"),
            CapitalRatio::Infinite => f.write_str("infinite"),
            CapitalRatio::NegativeInfinite => f.write_str("-infinite"),
        }
    }
}

impl<T: Scalar> Serialize for CapitalRatio<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Undercapitalized,
    SufficientlyCapitalized,
}

impl Classification {
    pub fn of<T: Scalar>(cr: &CapitalRatio<T>) -> Self {
        if cr.at_or_below(T::one()) {
            Classification::Undercapitalized
        } else {
            Classification::SufficientlyCapitalized
        }
    }
}

/// Per-class aggregation of report lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary<T> {
    pub exposure: T,
    pub car: T,
    /// `car / exposure`, zero for an empty class.
    pub carr: T,
    /// Exposure-weighted component fractions.
    pub components: BTreeMap<RiskSource, T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct CaRReport<T> {
    pub as_of: NaiveDate,
    /// Sorted by position id.
    pub lines: Vec<CaRLine<T>>,
    pub total_exposure: T,
    pub total_car: T,
    /// `None` when there is no exposure.
    pub aggregate_carr: Option<T>,
    pub capital: T,
    pub cr: CapitalRatio<T>,
    pub classification: Classification,
}

impl<T: Scalar> CaRReport<T> {
    pub fn by_class(&self) -> BTreeMap<AssetClass, ClassSummary<T>> {
        let mut out = BTreeMap::new();
        for class in AssetClass::ALL {
            let lines: Vec<&CaRLine<T>> = self.lines.iter().filter(|l| l.class == class).collect();
            if lines.is_empty() {
                continue;
            }
            let exposure = sum(lines.iter().map(|l| l.exposure));
            let car = sum(lines.iter().map(|l| l.car));
            let ratio = |x: T| if exposure.is_zero() { T::zero() } else { x / exposure };
            let components = RiskSource::ALL
                .iter()
                .map(|s| (*s, ratio(sum(lines.iter().map(|l| l.exposure * l.component(*s))))))
                .collect();
            out.insert(class, ClassSummary { exposure, car, carr: ratio(car), components });
        }
        out
    }

    /// Exposure times component fraction, summed per risk source.
    pub fn by_source(&self) -> BTreeMap<RiskSource, T> {
        RiskSource::ALL
            .iter()
            .map(|s| (*s, sum(self.lines.iter().map(|l| l.exposure * l.component(*s)))))
            .collect()
    }

    pub fn clamped_positions(&self) -> Vec<&str> {
        self.lines.iter().filter(|l| l.clamped).map(|l| l.position_id.as_str()).collect()
    }
}

/// Capital at risk for every asset position plus the capitalization ratio.
///
/// Each distinct vault portfolio is simulated once. Lines are summed in
/// position-id order.
pub fn car_report<T: Scalar>(
    s: &BalanceSheetSnapshot<T>,
    params: &RiskParameterSet<T>,
    vaults: &BTreeMap<String, VaultPortfolio<T>>,
) -> Result<CaRReport<T>> {
    params.check()?;
    let mut positions: Vec<&AssetPosition<T>> = s.assets.iter().collect();
    positions.sort_by(|a, b| a.id.cmp(&b.id));

    let mut market: BTreeMap<&str, T> = BTreeMap::new();
    for p in positions.iter().filter(|p| p.class == AssetClass::CryptoBackedLoan) {
        let reference = p.collateral_ref.as_deref().unwrap_or_default();
        if !market.contains_key(reference) {
            let f = market_fraction(p, &params.market_model, vaults)?;
            market.insert(reference, f);
        }
    }

    let lines = positions
        .iter()
        .map(|p| {
            let m = match p.class {
                AssetClass::CryptoBackedLoan => market[p.collateral_ref.as_deref().unwrap_or_default()],
                _ => T::zero(),
            };
            Ok(CaRLine::assemble(
                p,
                duration_carr(p, params.rate_shock_bps)?,
                credit_carr(p, params)?,
                m,
                operational(p, params)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let total_exposure = sum(lines.iter().map(|l| l.exposure));
    let total_car = sum(lines.iter().map(|l| l.car));
    let capital = capital(s);
    let cr = if total_car > T::zero() {
        CapitalRatio::Finite(capital / total_car)
    } else if capital >= T::zero() {
        CapitalRatio::Infinite
    } else {
        CapitalRatio::NegativeInfinite
    };
    Ok(CaRReport {
        as_of: s.as_of,
        aggregate_carr: (total_exposure > T::zero()).then(|| total_car / total_exposure),
        lines,
        total_exposure,
        total_car,
        capital,
        classification: Classification::of(&cr),
        cr,
    })
}

/// Published figures a report is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFigures<T> {
    pub total_car: Option<T>,
    pub class_car: BTreeMap<AssetClass, T>,
    /// Absolute tolerance for every comparison.
    pub tolerance: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconciliation<T> {
    pub published_total: Option<T>,
    pub published_rows_sum: T,
    pub computed_total: T,
    /// Published total differs from the sum of published rows.
    pub published_inconsistent: bool,
    /// Computed minus published, per class.
    pub class_deltas: BTreeMap<AssetClass, T>,
    /// Any comparison exceeded the tolerance.
    pub discrepancy: bool,
}

pub fn reconcile<T: Scalar>(report: &CaRReport<T>, reference: &ReferenceFigures<T>) -> Reconciliation<T> {
    let by_class = report.by_class();
    let rows_sum = sum(reference.class_car.values().copied());
    let published_inconsistent =
        reference.total_car.is_some_and(|t| (t - rows_sum).abs() > reference.tolerance);
    let class_deltas: BTreeMap<AssetClass, T> = reference
        .class_car
        .iter()
        .map(|(c, v)| (*c, by_class.get(c).map_or_else(T::zero, |s| s.car) - *v))
        .collect();
    let off = class_deltas.values().any(|d| d.abs() > reference.tolerance)
        || reference.total_car.is_some_and(|t| (report.total_car - t).abs() > reference.tolerance);
    Reconciliation {
        published_total: reference.total_car,
        published_rows_sum: rows_sum,
        computed_total: report.total_car,
        published_inconsistent,
        class_deltas,
        discrepancy: published_inconsistent || off,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance_sheet::{LiabilityKind, LiabilityPosition};
    use crate::crypto_mc::{LossStatistic, Vault};
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    fn params() -> RiskParameterSet<Decimal> {
        RiskParameterSet {
            credit_rating_table: [(Rating::Aaa, dec!(0.01))].into(),
            ..Default::default()
        }
    }

    fn position(class: AssetClass, exposure: Decimal) -> AssetPosition<Decimal> {
        AssetPosition::new("p", class, exposure)
    }

    fn no_vaults() -> BTreeMap<String, VaultPortfolio<Decimal>> {
        BTreeMap::new()
    }

    fn crash_model() -> MonteCarloConfig {
        MonteCarloConfig {
            n_paths: 8,
            horizon_days: 1,
            daily_volatility: 0.0,
            daily_drift: 0.0,
            jump_probability: 1.0,
            jump_size: 0.99,
            seed: 1,
            loss_statistic: LossStatistic::Mean,
        }
    }

    fn one_vault(debt: Decimal) -> BTreeMap<String, VaultPortfolio<Decimal>> {
        let v = Vault {
            id: "v".into(),
            collateral_units: dec!(1),
            collateral_price: dec!(200),
            debt,
            liquidation_ratio: dec!(1.7),
            liquidation_penalty: dec!(0),
        };
        [(
            "eth".to_string(),
            VaultPortfolio { name: "eth".into(), vaults: vec![v], market_depth: dec!(1e6), slippage_coefficient: dec!(0) },
        )]
        .into()
    }

    #[test]
    fn duration_examples() {
        let bills = position(AssetClass::PublicCredit, dec!(1)).with_maturity(dec!(0.25));
        assert_eq!(duration_carr(&bills, dec!(200)).unwrap(), dec!(0.005));
        let loan = position(AssetClass::CryptoBackedLoan, dec!(1));
        assert_eq!(duration_carr(&loan, dec!(750)).unwrap(), dec!(0));
        let private = position(AssetClass::PrivateCredit, dec!(1)).with_maturity(dec!(4.45));
        assert_eq!(duration_carr(&private, dec!(200)).unwrap(), dec!(0.089));
        assert!(matches!(duration_carr(&bills, dec!(-1)), Err(CalmError::Domain(_))));
        let long = position(AssetClass::PublicCredit, dec!(1)).with_maturity(dec!(100));
        assert_eq!(duration_carr(&long, dec!(200)).unwrap(), dec!(1));
    }

    #[test]
    fn credit_lookup_order() {
        let p = params();
        assert_eq!(credit_carr(&position(AssetClass::Stablecoin, dec!(1)), &p).unwrap(), dec!(0.01));
        let bond = position(AssetClass::PrivateCredit, dec!(1)).with_rating(Rating::Aaa);
        assert_eq!(credit_carr(&bond, &p).unwrap(), dec!(0.01));
        assert_eq!(credit_carr(&position(AssetClass::CryptoBackedLoan, dec!(1)), &p).unwrap(), dec!(0));

        let mut p2 = p.clone();
        p2.credit_class_overrides.insert(AssetClass::PrivateCredit, CreditMethod::Flat(dec!(0.1)));
        assert_eq!(credit_carr(&bond, &p2).unwrap(), dec!(0.1));
        p2.credit_position_overrides.insert("p".into(), CreditMethod::Flat(dec!(0.05)));
        assert_eq!(credit_carr(&bond, &p2).unwrap(), dec!(0.05));
    }

    #[test]
    fn missing_credit_parameters_are_errors() {
        let p = params();
        let rated = position(AssetClass::PrivateCredit, dec!(1)).with_rating(Rating::Bb);
        assert!(matches!(credit_carr(&rated, &p), Err(CalmError::Config(_))));
        let unrated = position(AssetClass::PublicCredit, dec!(1));
        assert!(matches!(credit_carr(&unrated, &p), Err(CalmError::Config(_))));
    }

    #[test]
    fn pd_lgd_examples() {
        assert_eq!(credit_loss_pd_lgd(dec!(1000), dec!(0), dec!(1)).unwrap(), dec!(0));
        assert_eq!(credit_loss_pd_lgd(dec!(1000), dec!(1), dec!(1)).unwrap(), dec!(1000));
        let loss = credit_loss_pd_lgd(dec!(263e6), dec!(0.162), dec!(0.5)).unwrap();
        assert_eq!(loss, dec!(21303000));
        assert_eq!(loss, dec!(263e6) * dec!(0.081));
        assert!(credit_loss_pd_lgd(dec!(1), dec!(1.1), dec!(1)).is_err());
        assert!(credit_loss_pd_lgd(dec!(1), dec!(0.5), dec!(-0.1)).is_err());
    }

    #[test]
    fn pd_lgd_override_matches_flat_fraction() {
        let mut p = params();
        let pos = position(AssetClass::PrivateCredit, dec!(263e6));
        p.credit_position_overrides.insert("p".into(), CreditMethod::PdLgd { pd: dec!(0.162), lgd: dec!(0.5) });
        let a = carr(&pos, &p, &no_vaults()).unwrap();
        p.credit_position_overrides.insert("p".into(), CreditMethod::Flat(dec!(0.081)));
        let b = carr(&pos, &p, &no_vaults()).unwrap();
        assert_eq!(a.car, b.car);
    }

    #[test]
    fn market_component() {
        let p = RiskParameterSet { market_model: crash_model(), ..params() };
        assert_eq!(market_carr(&position(AssetClass::PublicCredit, dec!(1)), &p, &no_vaults()).unwrap(), dec!(0));
        let loan = position(AssetClass::CryptoBackedLoan, dec!(100)).with_collateral("eth");
        assert_eq!(market_carr(&loan, &p, &one_vault(dec!(0))).unwrap(), dec!(0));
        assert_eq!(market_carr(&loan, &p, &one_vault(dec!(100))).unwrap(), dec!(0.98));
        let bare = position(AssetClass::CryptoBackedLoan, dec!(100));
        assert!(matches!(market_carr(&bare, &p, &one_vault(dec!(100))), Err(CalmError::Config(_))));
        let dangling = position(AssetClass::CryptoBackedLoan, dec!(100)).with_collateral("btc");
        assert!(matches!(market_carr(&dangling, &p, &one_vault(dec!(100))), Err(CalmError::Config(_))));
    }

    #[test]
    fn carr_sums_components() {
        let mut p = params();
        p.credit_position_overrides.insert("p".into(), CreditMethod::Flat(dec!(0.081)));
        let private = position(AssetClass::PrivateCredit, dec!(263e6)).with_maturity(dec!(4.45));
        let line = carr(&private, &p, &no_vaults()).unwrap();
        assert_eq!(line.carr, dec!(0.17));
        assert!(!line.clamped);

        let stable = position(AssetClass::Stablecoin, dec!(260e6));
        let line = carr(&stable, &params(), &no_vaults()).unwrap();
        assert_eq!(line.car, dec!(2.6e6));

        let zero = RiskParameterSet { stablecoin_credit_default: dec!(0), ..params() };
        let line = carr(&stable, &zero, &no_vaults()).unwrap();
        assert_eq!((line.carr, line.car), (dec!(0), dec!(0)));
    }

    #[test]
    fn carr_clamps_with_flag() {
        let mut p = params();
        p.credit_position_overrides.insert("p".into(), CreditMethod::Flat(dec!(0.9)));
        p.operational_table.insert("p".into(), dec!(0.5));
        let line = carr(&position(AssetClass::PrivateCredit, dec!(10)), &p, &no_vaults()).unwrap();
        assert_eq!(line.carr, dec!(1));
        assert_eq!(line.car, dec!(10));
        assert!(line.clamped);
    }

    fn sheet(assets: Vec<AssetPosition<Decimal>>, equity: Decimal) -> BalanceSheetSnapshot<Decimal> {
        BalanceSheetSnapshot {
            as_of: NaiveDate::from_ymd_opt(2023, 12, 31).unwrap(),
            assets,
            liabilities: vec![LiabilityPosition::new("equity", LiabilityKind::Equity, equity)],
        }
    }

    #[test]
    fn empty_book_is_infinitely_capitalized() {
        let r = car_report(&sheet(vec![], dec!(0)), &params(), &no_vaults()).unwrap();
        assert_eq!(r.total_car, dec!(0));
        assert_eq!(r.cr, CapitalRatio::Infinite);
        assert_eq!(r.classification, Classification::SufficientlyCapitalized);
        assert_eq!(r.aggregate_carr, None);

        let r = car_report(&sheet(vec![], dec!(-1)), &params(), &no_vaults()).unwrap();
        assert_eq!(r.cr, CapitalRatio::NegativeInfinite);
        assert_eq!(r.classification, Classification::Undercapitalized);
    }

    #[test]
    fn ratio_and_classification() {
        // 41.5% from the published 53.4M against 128.7M
        let cr = dec!(53.4e6) / dec!(128.7e6);
        assert!((cr - dec!(0.415)).abs() < dec!(0.005));
        assert_eq!(Classification::of(&CapitalRatio::Finite(cr)), Classification::Undercapitalized);
        assert_eq!(Classification::of(&CapitalRatio::Finite(dec!(1))), Classification::Undercapitalized);
        assert_eq!(
            Classification::of(&CapitalRatio::Finite(dec!(1.0000001))),
            Classification::SufficientlyCapitalized
        );
    }

    #[test]
    fn report_totals() {
        let assets = vec![
            AssetPosition::new("b", AssetClass::Stablecoin, dec!(100)),
            AssetPosition::new("a", AssetClass::PublicCredit, dec!(300)).with_maturity(dec!(0.5)),
        ];
        let mut p = params();
        p.credit_class_overrides.insert(AssetClass::PublicCredit, CreditMethod::Flat(dec!(0)));
        let r = car_report(&sheet(assets, dec!(2)), &p, &no_vaults()).unwrap();
        assert_eq!(r.lines[0].position_id, "a");
        assert_eq!(r.total_car, dec!(4));
        assert_eq!(r.aggregate_carr, Some(dec!(0.01)));
        assert_eq!(r.cr, CapitalRatio::Finite(dec!(0.5)));
        assert_eq!(r.by_source()[&RiskSource::Duration], dec!(3));
        assert_eq!(r.by_class()[&AssetClass::PublicCredit].components[&RiskSource::Duration], dec!(0.01));
    }

    #[test]
    fn reconciliation_flags_inconsistent_publication() {
        let r = car_report(&sheet(vec![AssetPosition::new("s", AssetClass::Stablecoin, dec!(100))], dec!(1)), &params(), &no_vaults())
            .unwrap();
        let reference = ReferenceFigures {
            total_car: Some(dec!(1.5)),
            class_car: [(AssetClass::Stablecoin, dec!(1))].into(),
            tolerance: dec!(0.1),
        };
        let rec = reconcile(&r, &reference);
        assert!(rec.published_inconsistent);
        assert!(rec.discrepancy);
        assert_eq!(rec.class_deltas[&AssetClass::Stablecoin], dec!(0));

        let clean = ReferenceFigures { total_car: Some(dec!(1)), ..reference };
        assert!(!reconcile(&r, &clean).discrepancy);
    }

    #[test]
    fn parameters_are_checked() {
        let p = RiskParameterSet { rate_shock_bps: dec!(-1), ..params() };
        assert!(p.check().is_err());
        let mut p = params();
        p.credit_rating_table.insert(Rating::B, dec!(1.2));
        assert!(p.check().is_err());
    }
}
