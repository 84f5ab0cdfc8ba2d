//! Monte Carlo model of bad debt on over-collateralized crypto-backed loans.
//!
//! Collateral prices follow geometric daily returns with an independent
//! downward jump on each day. A vault is liquidated in full on the first day
//! its collateral value drops below `debt * liquidation_ratio`; the sale
//! moves the price against the protocol in proportion to its size relative
//! to the market depth, and any shortfall against the debt plus penalty is
//! bad debt.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path_index)`,
//! and per-path results are reduced in path order, so results do not depend
//! on the thread count.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CalmError, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Vault<T> {
    pub id: String,
    pub collateral_units: T,
    /// Price per collateral unit at the start of the horizon.
    pub collateral_price: T,
    pub debt: T,
    /// Minimum collateral value over debt, e.g. 1.70.
    pub liquidation_ratio: T,
    pub liquidation_penalty: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaultPortfolio<T> {
    pub name: String,
    pub vaults: Vec<Vault<T>>,
    /// Liquidation volume that moves the price by `slippage_coefficient`.
    pub market_depth: T,
    pub slippage_coefficient: T,
}

impl<T: Scalar> VaultPortfolio<T> {
    pub fn total_debt(&self) -> T {
        crate::num::sum(self.vaults.iter().map(|v| v.debt))
    }

    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(CalmError::Domain(format!("portfolio `{}`: {msg}", self.name)));
        if self.market_depth <= T::zero() {
            return fail(format!("market_depth must be positive, got {}", self.market_depth));
        }
        if self.slippage_coefficient < T::zero() {
            return fail("slippage_coefficient must be non-negative".into());
        }
        for v in &self.vaults {
            if v.collateral_units < T::zero() || v.collateral_price < T::zero() || v.debt < T::zero() {
                return fail(format!("vault `{}` has a negative quantity", v.id));
            }
            if v.liquidation_ratio <= T::one() {
                return fail(format!("vault `{}` liquidation_ratio must exceed 1", v.id));
            }
            if v.liquidation_penalty < T::zero() {
                return fail(format!("vault `{}` has a negative liquidation_penalty", v.id));
            }
            if v.debt > T::zero() && v.collateral_units * v.collateral_price < v.debt * v.liquidation_ratio {
                return fail(format!("vault `{}` starts below its liquidation ratio", v.id));
            }
        }
        Ok(())
    }

    /// Converts to the floating type used by the simulation.
    pub fn to_float<F: Float>(&self) -> VaultPortfolio<F> {
        let cast = |x: T| F::from(x.to_f64().expect("finite amount")).expect("representable");
        VaultPortfolio {
            name: self.name.clone(),
            vaults: self
                .vaults
                .iter()
                .map(|v| Vault {
                    id: v.id.clone(),
                    collateral_units: cast(v.collateral_units),
                    collateral_price: cast(v.collateral_price),
                    debt: cast(v.debt),
                    liquidation_ratio: cast(v.liquidation_ratio),
                    liquidation_penalty: cast(v.liquidation_penalty),
                })
                .collect(),
            market_depth: cast(self.market_depth),
            slippage_coefficient: cast(self.slippage_coefficient),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossStatistic {
    Mean,
    /// Nearest-rank percentile, `p` in (0, 1].
    Percentile(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig<F = f64> {
    pub n_paths: usize,
    pub horizon_days: u32,
    pub daily_volatility: F,
    pub daily_drift: F,
    pub jump_probability: F,
    /// Fractional instantaneous drop applied on a jump day.
    pub jump_size: F,
    pub seed: u64,
    pub loss_statistic: LossStatistic,
}

impl<F: Float> MonteCarloConfig<F> {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(CalmError::Domain(format!("monte carlo config: {msg}")));
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1");
        }
        if self.horizon_days == 0 {
            return bad("horizon_days must be at least 1");
        }
        if self.daily_volatility.is_nan() || self.daily_volatility < F::zero() {
            return bad("daily_volatility must be non-negative");
        }
        if !self.daily_drift.is_finite() {
            return bad("daily_drift must be finite");
        }
        if !(F::zero()..=F::one()).contains(&self.jump_probability) {
            return bad("jump_probability must lie in [0, 1]");
        }
        if !(F::zero()..F::one()).contains(&self.jump_size) {
            return bad("jump_size must lie in [0, 1)");
        }
        if let LossStatistic::Percentile(p) = self.loss_statistic {
            if !(p > 0.0 && p <= 1.0) {
                return bad("percentile must lie in (0, 1]");
            }
        }
        Ok(())
    }
}

impl Default for MonteCarloConfig<f64> {
    fn default() -> Self {
        MonteCarloConfig {
            n_paths: 10_000,
            horizon_days: 30,
            daily_volatility: 0.05,
            daily_drift: 0.0,
            jump_probability: 0.0,
            jump_size: 0.0,
            seed: 0,
            loss_statistic: LossStatistic::Mean,
        }
    }
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Cumulative price multipliers relative to the starting price, one per day.
pub fn simulate_price_path<F: Float>(cfg: &MonteCarloConfig<F>, path_index: u64) -> Vec<F> {
    let mut rng = path_rng(cfg.seed, path_index);
    let half = F::from(0.5).expect("constant");
    let carry = cfg.daily_drift - half * cfg.daily_volatility * cfg.daily_volatility;
    let mut level = F::one();
    (0..cfg.horizon_days)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            let mut step = (carry + cfg.daily_volatility * F::from(z).expect("finite draw")).exp();
            if F::from(u).expect("finite draw") < cfg.jump_probability {
                step = step * (F::one() - cfg.jump_size);
            }
            level = level * step;
            level
        })
        .collect()
}

/// Bad debt left by one vault along one price path.
pub fn liquidation_loss<F: Float>(v: &Vault<F>, path: &[F], p: &VaultPortfolio<F>) -> F {
    if v.debt <= F::zero() {
        return F::zero();
    }
    let trigger = v.debt * v.liquidation_ratio;
    let Some(price) = path
        .iter()
        .map(|m| v.collateral_price * *m)
        .find(|price| v.collateral_units * *price < trigger)
    else {
        return F::zero();
    };
    let sale_value = v.collateral_units * price;
    let slippage = (p.slippage_coefficient * sale_value / p.market_depth).min(F::one());
    let recovered = sale_value * (F::one() - slippage);
    (v.debt * (F::one() + v.liquidation_penalty) - recovered).max(F::zero())
}

fn path_ratio<F: Float>(p: &VaultPortfolio<F>, cfg: &MonteCarloConfig<F>, total_debt: F, i: u64) -> F {
    let path = simulate_price_path(cfg, i);
    let loss = p.vaults.iter().fold(F::zero(), |acc, v| acc + liquidation_loss(v, &path, p));
    (loss / total_debt).max(F::zero()).min(F::one())
}

/// Portfolio loss over total debt for every path, in path order.
pub fn path_loss_ratios<F>(p: &VaultPortfolio<F>, cfg: &MonteCarloConfig<F>) -> Result<Vec<F>>
where
    F: Float + Send + Sync,
{
    cfg.check()?;
    let total_debt = p.vaults.iter().fold(F::zero(), |acc, v| acc + v.debt);
    if total_debt <= F::zero() {
        return Ok(vec![F::zero(); cfg.n_paths]);
    }
    Ok((0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| path_ratio(p, cfg, total_debt, i))
        .collect())
}

fn summarize<F: Float>(mut ratios: Vec<F>, stat: LossStatistic) -> F {
    match stat {
        LossStatistic::Mean => {
            let n = F::from(ratios.len()).expect("path count");
            ratios.iter().fold(F::zero(), |acc, r| acc + *r) / n
        }
        LossStatistic::Percentile(q) => {
            ratios.sort_by(|a, b| a.partial_cmp(b).expect("loss ratios are finite"));
            let rank = (q * ratios.len() as f64).ceil() as usize;
            ratios[rank.clamp(1, ratios.len()) - 1]
        }
    }
}

/// Loss statistic of path loss / total debt, in [0, 1].
///
/// A portfolio without debt carries no market risk and yields 0.
pub fn expected_loss_ratio<F>(p: &VaultPortfolio<F>, cfg: &MonteCarloConfig<F>) -> Result<F>
where
    F: Float + Send + Sync,
{
    let ratios = path_loss_ratios(p, cfg)?;
    Ok(summarize(ratios, cfg.loss_statistic))
}

/// [`expected_loss_ratio`] on a dedicated pool of `threads` workers.
pub fn expected_loss_ratio_with_threads<F>(p: &VaultPortfolio<F>, cfg: &MonteCarloConfig<F>, threads: usize) -> Result<F>
where
    F: Float + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CalmError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| expected_loss_ratio(p, cfg))
}
