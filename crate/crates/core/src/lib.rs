//! Crypto asset-liability management engines for stablecoin protocols.
//!
//! - [`capital_risk`]: capital at risk, capital-at-risk ratios and the
//!   capitalization ratio.
//! - [`crypto_mc`]: Monte Carlo bad-debt model for crypto-backed loans,
//!   feeding the crypto-market component.
//! - [`liquidity`]: stressed outflows, asset liquidity and the cumulative
//!   funding gap per maturity bucket.
//! - [`ingestion`]: strict loaders for snapshot, holder, vault and scenario
//!   files.
//! - [`report`]: recommendations, tables, plots and the end-to-end runs
//!   behind the `calm` binary.
//!
//! The accounting engines are generic over [`Scalar`]; the aliases below fix
//! the exact-decimal instantiation used for money throughout the files and
//! reports.

pub mod balance_sheet;
pub mod capital_risk;
pub mod crypto_mc;
pub mod error;
pub mod ingestion;
pub mod liquidity;
pub mod num;
pub mod report;

pub use error::{CalmError, Result};
pub use num::Scalar;

/// Exact decimal money and fractions.
pub type Money = rust_decimal::Decimal;

pub type Snapshot = balance_sheet::BalanceSheetSnapshot<Money>;
pub type Asset = balance_sheet::AssetPosition<Money>;
pub type Liability = balance_sheet::LiabilityPosition<Money>;
pub type RiskParameters = capital_risk::RiskParameterSet<Money>;
pub type CarReport = capital_risk::CaRReport<Money>;
pub type Holder = liquidity::HolderRecord<Money>;
pub type LiabilityProfile = liquidity::BucketedLiabilityProfile<Money>;
pub type Liquidity = liquidity::LiquiditySchedule<Money>;
pub type GapReport = liquidity::FundingGapReport<Money>;
pub type Portfolio = crypto_mc::VaultPortfolio<Money>;
