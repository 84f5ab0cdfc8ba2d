//! Balance-sheet data model for a stablecoin protocol.
//!
//! Equity sits on the liability side as a position of kind
//! [`LiabilityKind::Equity`], so the accounting identity is a single sum:
//! total assets = non-equity liabilities + equity.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CalmError, Result};
use crate::liquidity::Bucket;
use crate::num::{sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetClass {
    CryptoBackedLoan,
    PublicCredit,
    PrivateCredit,
    Stablecoin,
    Cash,
    Other,
}

impl AssetClass {
    pub const ALL: [AssetClass; 6] = [
        AssetClass::CryptoBackedLoan,
        AssetClass::PublicCredit,
        AssetClass::PrivateCredit,
        AssetClass::Stablecoin,
        AssetClass::Cash,
        AssetClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssetClass::CryptoBackedLoan => "crypto_backed_loan",
            AssetClass::PublicCredit => "public_credit",
            AssetClass::PrivateCredit => "private_credit",
            AssetClass::Stablecoin => "stablecoin",
            AssetClass::Cash => "cash",
            AssetClass::Other => "other",
        }
    }

    /// Human label used in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            AssetClass::CryptoBackedLoan => "Crypto-Backed Loans",
            AssetClass::PublicCredit => "Public Credit",
            AssetClass::PrivateCredit => "Private Credit",
            AssetClass::Stablecoin => "Stablecoins",
            AssetClass::Cash => "Cash",
            AssetClass::Other => "Other",
        }
    }

    /// Bucket in which a position of this class is assumed to be liquidated
    /// under stress when the snapshot does not say otherwise.
    pub fn default_tenor(self) -> Bucket {
        match self {
            AssetClass::Stablecoin | AssetClass::Cash => Bucket::Day,
            AssetClass::CryptoBackedLoan => Bucket::Week,
            AssetClass::PublicCredit => Bucket::Month,
            AssetClass::PrivateCredit | AssetClass::Other => Bucket::Year,
        }
    }

    /// Classes that never carry credit risk of their own.
    pub fn is_credit_free(self) -> bool {
        matches!(self, AssetClass::CryptoBackedLoan | AssetClass::Cash)
    }
}

impl fmt::Display for AssetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rating {
    Aaa,
    Aa,
    A,
    Bbb,
    Bb,
    B,
    Unrated,
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rating::Aaa => "aaa",
            Rating::Aa => "aa",
            Rating::A => "a",
            Rating::Bbb => "bbb",
            Rating::Bb => "bb",
            Rating::B => "b",
            Rating::Unrated => "unrated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetPosition<T> {
    pub id: String,
    pub class: AssetClass,
    pub exposure: T,
    /// Average maturity in years.
    pub avg_maturity: T,
    pub rating: Option<Rating>,
    pub liquidity_tenor: Bucket,
    /// Name of the vault portfolio backing a crypto-backed loan.
    pub collateral_ref: Option<String>,
}

impl<T: Scalar> AssetPosition<T> {
    /// A position with zero maturity, no rating and the class's default tenor.
    pub fn new(id: impl Into<String>, class: AssetClass, exposure: T) -> Self {
        AssetPosition {
            id: id.into(),
            class,
            exposure,
            avg_maturity: T::zero(),
            rating: None,
            liquidity_tenor: class.default_tenor(),
            collateral_ref: None,
        }
    }

    pub fn with_maturity(mut self, years: T) -> Self {
        self.avg_maturity = years;
        self
    }

    pub fn with_rating(mut self, rating: Rating) -> Self {
        self.rating = Some(rating);
        self
    }

    pub fn with_tenor(mut self, tenor: Bucket) -> Self {
        self.liquidity_tenor = tenor;
        self
    }

    pub fn with_collateral(mut self, portfolio: impl Into<String>) -> Self {
        self.collateral_ref = Some(portfolio.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiabilityKind {
    CirculatingStablecoin,
    SavingsDeposit,
    Equity,
}

impl fmt::Display for LiabilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiabilityKind::CirculatingStablecoin => "circulating_stablecoin",
            LiabilityKind::SavingsDeposit => "savings_deposit",
            LiabilityKind::Equity => "equity",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiabilityPosition<T> {
    pub id: String,
    pub kind: LiabilityKind,
    pub amount: T,
}

impl<T> LiabilityPosition<T> {
    pub fn new(id: impl Into<String>, kind: LiabilityKind, amount: T) -> Self {
        LiabilityPosition { id: id.into(), kind, amount }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSheetSnapshot<T> {
    pub as_of: NaiveDate,
    pub assets: Vec<AssetPosition<T>>,
    pub liabilities: Vec<LiabilityPosition<T>>,
}

impl<T: Scalar> BalanceSheetSnapshot<T> {
    pub fn total_assets(&self) -> T {
        let mut exposures: Vec<(&str, T)> = self.assets.iter().map(|a| (a.id.as_str(), a.exposure)).collect();
        exposures.sort_by(|a, b| a.0.cmp(b.0));
        sum(exposures.into_iter().map(|(_, e)| e))
    }

    /// Non-equity liabilities plus equity.
    pub fn total_funding(&self) -> T {
        let mut amounts: Vec<(&str, T)> = self.liabilities.iter().map(|l| (l.id.as_str(), l.amount)).collect();
        amounts.sort_by(|a, b| a.0.cmp(b.0));
        sum(amounts.into_iter().map(|(_, a)| a))
    }

    /// Converts every scalar field, maturities included, to another scalar type.
    pub fn convert<U: Scalar>(&self, f: impl Fn(T) -> U) -> BalanceSheetSnapshot<U> {
        BalanceSheetSnapshot {
            as_of: self.as_of,
            assets: self
                .assets
                .iter()
                .map(|a| AssetPosition {
                    id: a.id.clone(),
                    class: a.class,
                    exposure: f(a.exposure),
                    avg_maturity: f(a.avg_maturity),
                    rating: a.rating,
                    liquidity_tenor: a.liquidity_tenor,
                    collateral_ref: a.collateral_ref.clone(),
                })
                .collect(),
            liabilities: self
                .liabilities
                .iter()
                .map(|l| LiabilityPosition { id: l.id.clone(), kind: l.kind, amount: f(l.amount) })
                .collect(),
        }
    }

    /// Multiplies every money amount by `k`; maturities are unchanged.
    pub fn scaled(&self, k: T) -> Self {
        let mut out = self.clone();
        out.assets.iter_mut().for_each(|a| a.exposure = a.exposure * k);
        out.liabilities.iter_mut().for_each(|l| l.amount = l.amount * k);
        out
    }
}

/// One failed check from [`validate_snapshot`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId { id: String },
    EquityCount { found: usize },
    NegativeExposure { id: String, exposure: String },
    NegativeMaturity { id: String },
    MissingCollateralRef { id: String },
    UnexpectedCollateralRef { id: String },
    NegativeLiability { id: String, amount: String },
    /// Assets minus liabilities minus equity.
    Imbalance { imbalance: String, tolerance: String },
}

impl Violation {
    /// Duplicate ids and a wrong number of equity positions make the
    /// snapshot unusable rather than merely inconsistent.
    pub fn is_structural(&self) -> bool {
        matches!(self, Violation::DuplicateId { .. } | Violation::EquityCount { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate position id `{id}`"),
            Violation::EquityCount { found } => write!(f, "expected exactly one equity position, found {found}"),
            Violation::NegativeExposure { id, exposure } => write!(f, "asset `{id}` has negative exposure {exposure}"),
            Violation::NegativeMaturity { id } => write!(f, "asset `{id}` has negative average maturity"),
            Violation::MissingCollateralRef { id } => {
                write!(f, "crypto-backed loan `{id}` has no collateral_ref")
            }
            Violation::UnexpectedCollateralRef { id } => {
                write!(f, "asset `{id}` carries a collateral_ref but is not a crypto-backed loan")
            }
            Violation::NegativeLiability { id, amount } => write!(f, "liability `{id}` has negative amount {amount}"),
            Violation::Imbalance { imbalance, tolerance } => {
                write!(f, "assets - liabilities - equity = {imbalance} exceeds tolerance {tolerance}")
            }
        }
    }
}

/// Checks every type invariant and the accounting identity.
///
/// All problems are collected; the result does not depend on the order of
/// the position lists.
pub fn validate_snapshot<T: Scalar>(s: &BalanceSheetSnapshot<T>, tol: T) -> Result<()> {
    let mut violations = Vec::new();

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for id in s.assets.iter().map(|a| a.id.as_str()).chain(s.liabilities.iter().map(|l| l.id.as_str())) {
        *seen.entry(id).or_default() += 1;
    }
    violations.extend(
        seen.iter()
            .filter(|(_, &n)| n > 1)
            .map(|(id, _)| Violation::DuplicateId { id: id.to_string() }),
    );

    let equities = s.liabilities.iter().filter(|l| l.kind == LiabilityKind::Equity).count();
    if equities != 1 {
        violations.push(Violation::EquityCount { found: equities });
    }

    let mut assets: Vec<&AssetPosition<T>> = s.assets.iter().collect();
    assets.sort_by(|a, b| a.id.cmp(&b.id));
    for a in assets {
        if a.exposure < T::zero() {
            violations.push(Violation::NegativeExposure { id: a.id.clone(), exposure: a.exposure.to_string() });
        }
        if a.avg_maturity < T::zero() {
            violations.push(Violation::NegativeMaturity { id: a.id.clone() });
        }
        match (a.class == AssetClass::CryptoBackedLoan, a.collateral_ref.is_some()) {
            (true, false) => violations.push(Violation::MissingCollateralRef { id: a.id.clone() }),
            (false, true) => violations.push(Violation::UnexpectedCollateralRef { id: a.id.clone() }),
            _ => {}
        }
    }

    let mut liabilities: Vec<&LiabilityPosition<T>> = s.liabilities.iter().collect();
    liabilities.sort_by(|a, b| a.id.cmp(&b.id));
    for l in liabilities {
        if l.kind != LiabilityKind::Equity && l.amount < T::zero() {
            violations.push(Violation::NegativeLiability { id: l.id.clone(), amount: l.amount.to_string() });
        }
    }

    let imbalance = s.total_assets() - s.total_funding();
    if imbalance.abs() > tol {
        violations.push(Violation::Imbalance { imbalance: imbalance.to_string(), tolerance: tol.to_string() });
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(CalmError::Validation(violations))
    }
}

/// The protocol's capital: the amount of its equity position.
pub fn capital<T: Scalar>(s: &BalanceSheetSnapshot<T>) -> T {
    sum(s.liabilities.iter().filter(|l| l.kind == LiabilityKind::Equity).map(|l| l.amount))
}
