//! Properties shared by the property tests and the acceptance run. Each
//! checker drives a deterministic proptest runner for `cases` inputs.
#![allow(dead_code)]

use std::collections::BTreeMap;

use calm::balance_sheet::{validate_snapshot, AssetClass, AssetPosition, BalanceSheetSnapshot, LiabilityKind, LiabilityPosition, Rating};
use calm::capital_risk::{car_report, CreditMethod, RiskParameterSet, RiskSource};
use calm::crypto_mc::{
    expected_loss_ratio, expected_loss_ratio_with_threads, liquidation_loss, path_loss_ratios, MonteCarloConfig, Vault,
    VaultPortfolio,
};
use calm::liquidity::{funding_gap, max_drawdown, BucketedLiabilityProfile, Bucket, LiquiditySchedule};
use calm::{Money, Portfolio, Snapshot};
use chrono::NaiveDate;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rust_decimal_macros::dec;

pub fn as_of() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 12, 31).unwrap()
}

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn outcome<E: std::fmt::Display>(r: Result<(), E>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn cents(max: i64) -> impl Strategy<Value = Money> {
    (0..=max).prop_map(|c| Money::new(c, 2))
}

const CLASSES: [AssetClass; 6] = AssetClass::ALL;
const RATINGS: [Rating; 7] = [Rating::Aaa, Rating::Aa, Rating::A, Rating::Bbb, Rating::Bb, Rating::B, Rating::Unrated];

pub fn small_book() -> Portfolio {
    let vault = |id: &str, units: Money, debt: Money, lr: Money| Vault {
        id: id.into(),
        collateral_units: units,
        collateral_price: dec!(2000),
        debt,
        liquidation_ratio: lr,
        liquidation_penalty: dec!(0.13),
    };
    VaultPortfolio {
        name: "book".into(),
        vaults: vec![
            vault("v1", dec!(10), dec!(12000), dec!(1.5)),
            vault("v2", dec!(4), dec!(5000), dec!(1.45)),
            vault("v3", dec!(50), dec!(40000), dec!(1.7)),
        ],
        market_depth: dec!(100000),
        slippage_coefficient: dec!(0.5),
    }
}

pub fn vault_map() -> BTreeMap<String, Portfolio> {
    BTreeMap::from([("book".to_string(), small_book())])
}

/// Parameters covering every rating, with a cheap market model.
pub fn params(shock_bps: Money) -> RiskParameterSet<Money> {
    let fractions = [dec!(0.005), dec!(0.01), dec!(0.02), dec!(0.04), dec!(0.08), dec!(0.15), dec!(0.10)];
    RiskParameterSet {
        rate_shock_bps: shock_bps,
        credit_rating_table: RATINGS.iter().copied().zip(fractions).collect(),
        credit_class_overrides: BTreeMap::from([(AssetClass::PublicCredit, CreditMethod::Flat(dec!(0)))]),
        market_model: MonteCarloConfig { n_paths: 200, horizon_days: 10, daily_volatility: 0.05, seed: 7, ..Default::default() },
        ..RiskParameterSet::default()
    }
}

/// Balanced snapshots of 1 to 8 positions over every asset class.
pub fn snapshots() -> impl Strategy<Value = Snapshot> {
    let asset = (0..CLASSES.len(), cents(100_000_000_000), 0i64..=1500, 0..RATINGS.len());
    (prop::collection::vec(asset, 1..8), 0u32..=100).prop_map(|(assets, stable_pct)| {
        let assets: Vec<AssetPosition<Money>> = assets
            .into_iter()
            .enumerate()
            .map(|(i, (c, exposure, maturity, r))| {
                let class = CLASSES[c];
                let mut a = AssetPosition::new(format!("a{i}"), class, exposure).with_maturity(Money::new(maturity, 2));
                match class {
                    AssetClass::CryptoBackedLoan => a = a.with_collateral("book"),
                    AssetClass::PrivateCredit | AssetClass::Other => a = a.with_rating(RATINGS[r]),
                    _ => {}
                }
                a
            })
            .collect();
        let total: Money = assets.iter().map(|a| a.exposure).sum();
        let stable = (total * Money::from(stable_pct) / dec!(100)).round_dp(2);
        BalanceSheetSnapshot {
            as_of: as_of(),
            assets,
            liabilities: vec![
                LiabilityPosition::new("dai", LiabilityKind::CirculatingStablecoin, stable),
                LiabilityPosition::new("buffer", LiabilityKind::Equity, total - stable),
            ],
        }
    })
}

/// Capital at risk scales exactly with exposures; the ratio is unchanged.
pub fn linearity(cases: u32) -> Result<(), String> {
    let strategy = (snapshots(), 0i64..=1000, prop::sample::select(vec![dec!(0.5), dec!(2), dec!(10)]));
    outcome(runner(cases).run(&strategy, |(s, shock, k)| {
        let p = params(Money::from(shock));
        let base = car_report(&s, &p, &vault_map()).unwrap();
        let scaled = car_report(&s.scaled(k), &p, &vault_map()).unwrap();
        prop_assert_eq!(scaled.total_car, k * base.total_car);
        for (a, b) in base.lines.iter().zip(&scaled.lines) {
            prop_assert_eq!(b.car, k * a.car);
            prop_assert_eq!(b.carr, a.carr);
        }
        prop_assert_eq!(scaled.cr, base.cr);
        Ok(())
    }))
}

/// Line ratios are the sum of their components unless capped; totals are
/// sums of lines and per-source sums add up to the total when nothing is
/// capped.
pub fn additivity(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(snapshots(), 0i64..=1000), |(s, shock)| {
        let r = car_report(&s, &params(Money::from(shock)), &vault_map()).unwrap();
        for l in &r.lines {
            let raw = l.duration_carr + l.credit_carr + l.market_carr + l.operational_carr;
            prop_assert_eq!(l.carr, if l.clamped { Money::ONE } else { raw });
            prop_assert!(l.carr >= Money::ZERO && l.carr <= Money::ONE);
        }
        prop_assert_eq!(r.total_car, r.lines.iter().map(|l| l.car).sum::<Money>());
        if r.clamped_positions().is_empty() {
            let by_source: Money = r.by_source().values().copied().sum();
            prop_assert_eq!(by_source, r.total_car);
        }
        Ok(())
    }))
}

/// A larger rate shock never lowers capital at risk.
pub fn shock_monotonicity(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(snapshots(), 0i64..=1000, 0i64..=500), |(s, shock, extra)| {
        let low = car_report(&s, &params(Money::from(shock)), &vault_map()).unwrap();
        let high = car_report(&s, &params(Money::from(shock + extra)), &vault_map()).unwrap();
        prop_assert!(high.total_car >= low.total_car);
        Ok(())
    }))
}

/// Reordering positions changes neither validation nor the report.
pub fn order_invariance(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&snapshots(), |s| {
        let mut reversed = s.clone();
        reversed.assets.reverse();
        reversed.liabilities.reverse();
        prop_assert_eq!(validate_snapshot(&s, dec!(1)).is_ok(), validate_snapshot(&reversed, dec!(1)).is_ok());
        let p = params(dec!(200));
        prop_assert_eq!(car_report(&s, &p, &vault_map()).unwrap(), car_report(&reversed, &p, &vault_map()).unwrap());
        Ok(())
    }))
}

/// Balanced snapshots stay balanced when scaled with their tolerance.
pub fn scale_invariance(cases: u32) -> Result<(), String> {
    let strategy = (snapshots(), cents(100), prop::sample::select(vec![dec!(0.5), dec!(2), dec!(10)]));
    outcome(runner(cases).run(&strategy, |(mut s, skew, k)| {
        s.liabilities[1].amount += skew;
        let tol = dec!(0.5);
        prop_assert_eq!(validate_snapshot(&s, tol).is_ok(), validate_snapshot(&s.scaled(k), tol * k).is_ok());
        Ok(())
    }))
}

fn bucket_map(values: [Money; 4]) -> BTreeMap<Bucket, Money> {
    Bucket::ALL.iter().copied().zip(values).collect()
}

fn four() -> impl Strategy<Value = [Money; 4]> {
    [cents(10_000_000_000), cents(10_000_000_000), cents(10_000_000_000), cents(10_000_000_000)]
}

fn profile(outflow: [Money; 4]) -> BucketedLiabilityProfile<Money> {
    BucketedLiabilityProfile {
        as_of: as_of(),
        total: outflow.iter().copied().sum(),
        outflow: bucket_map(outflow),
        drawdown: BTreeMap::new(),
        by_class: None,
    }
}

/// Differences of consecutive cumulative gaps recover each bucket's net
/// flow, and the last gap is total liquidity minus total outflow.
pub fn telescoping(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(four(), four()), |(out, liq)| {
        let g = funding_gap(&profile(out), &LiquiditySchedule { as_of: as_of(), available: bucket_map(liq) }).unwrap();
        let mut prev = Money::ZERO;
        for (i, row) in g.rows.iter().enumerate() {
            prop_assert_eq!(row.cumulative_gap - prev, liq[i] - out[i]);
            prev = row.cumulative_gap;
        }
        let total = liq.iter().copied().sum::<Money>() - out.iter().copied().sum::<Money>();
        prop_assert_eq!(g.gap(Bucket::Year), total);
        prop_assert_eq!(g.terminal_gap, total);
        Ok(())
    }))
}

/// Extra day liquidity lifts every cumulative gap by exactly that amount.
pub fn day_shift(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(four(), four(), cents(1_000_000_000)), |(out, liq, delta)| {
        let sched = |l: [Money; 4]| LiquiditySchedule { as_of: as_of(), available: bucket_map(l) };
        let base = funding_gap(&profile(out), &sched(liq)).unwrap();
        let mut more = liq;
        more[0] += delta;
        let shifted = funding_gap(&profile(out), &sched(more)).unwrap();
        for (a, b) in base.rows.iter().zip(&shifted.rows) {
            prop_assert_eq!(b.cumulative_gap, a.cumulative_gap + delta);
        }
        Ok(())
    }))
}

/// Exhaustive oracle: every (peak, later trough) pair within the window.
pub fn brute_force_drawdown(series: &[(NaiveDate, Money)], window: u32) -> Money {
    let mut best = Money::ZERO;
    for (i, (di, vi)) in series.iter().enumerate() {
        if *vi <= Money::ZERO {
            continue;
        }
        for (dj, vj) in &series[i..] {
            if (*dj - *di).num_days() <= i64::from(window) {
                best = best.max((*vi - *vj) / *vi);
            }
        }
    }
    best.clamp(Money::ZERO, Money::ONE)
}

pub fn drawdown_oracle(cases: u32) -> Result<(), String> {
    let series = prop::collection::vec((1i64..=5, cents(1_000_000)), 0..=50);
    outcome(runner(cases).run(&(series, 1u32..=40), |(steps, window)| {
        let mut date = as_of();
        let series: Vec<(NaiveDate, Money)> = steps
            .into_iter()
            .map(|(gap, v)| {
                date += chrono::Duration::days(gap);
                (date, v)
            })
            .collect();
        prop_assert_eq!(max_drawdown(&series, window), brute_force_drawdown(&series, window));
        Ok(())
    }))
}

pub fn float_book() -> VaultPortfolio<f64> {
    small_book().to_float()
}

/// Bitwise-identical estimates on one worker and on eight.
pub fn mc_thread_determinism(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(any::<u64>(), 0.0..0.2f64, 0.0..0.1f64), |(seed, vol, jump_p)| {
        let cfg = MonteCarloConfig {
            n_paths: 500,
            horizon_days: 20,
            daily_volatility: vol,
            jump_probability: jump_p,
            jump_size: 0.3,
            seed,
            ..Default::default()
        };
        let one = expected_loss_ratio_with_threads(&float_book(), &cfg, 1).unwrap();
        let eight = expected_loss_ratio_with_threads(&float_book(), &cfg, 8).unwrap();
        prop_assert_eq!(one.to_bits(), eight.to_bits());
        Ok(())
    }))
}

fn float_vaults() -> impl Strategy<Value = Vec<Vault<f64>>> {
    let vault = (0.1..100.0f64, 100.0..5000.0f64, 1.0..1e6f64, 1.0..2.0f64, 0.0..0.2f64);
    prop::collection::vec(vault, 1..6).prop_map(|vs| {
        vs.into_iter()
            .enumerate()
            .map(|(i, (units, price, debt, lr, penalty))| Vault {
                id: format!("v{i}"),
                collateral_units: units,
                collateral_price: price,
                debt,
                liquidation_ratio: lr,
                liquidation_penalty: penalty,
            })
            .collect()
    })
}

/// With no volatility, drift or jumps, vaults at or above their liquidation
/// ratio are never liquidated.
pub fn mc_zero_volatility(cases: u32) -> Result<(), String> {
    outcome(runner(cases).run(&(float_vaults(), any::<u64>()), |(mut vaults, seed)| {
        for v in &mut vaults {
            v.collateral_units = v.debt * v.liquidation_ratio / v.collateral_price * 1.000001;
        }
        let book = VaultPortfolio { name: "z".into(), vaults, market_depth: 1e6, slippage_coefficient: 0.5 };
        let cfg = MonteCarloConfig { n_paths: 50, daily_volatility: 0.0, seed, ..Default::default() };
        prop_assert_eq!(expected_loss_ratio(&book, &cfg).unwrap(), 0.0);
        Ok(())
    }))
}

/// One certain jump of size `j` on a one-day horizon matches the loss
/// worked out by hand for a single vault.
pub fn mc_single_jump(cases: u32) -> Result<(), String> {
    let strategy = (float_vaults(), 0.0..0.9f64, 1e3..1e8f64, 0.0..1.0f64);
    outcome(runner(cases).run(&strategy, |(vaults, jump, depth, slip)| {
        let v = vaults[0].clone();
        let price = v.collateral_price * (1.0 - jump);
        let sale = v.collateral_units * price;
        let expected = if sale < v.debt * v.liquidation_ratio {
            let recovered = sale * (1.0 - (slip * sale / depth).min(1.0));
            (v.debt * (1.0 + v.liquidation_penalty) - recovered).max(0.0)
        } else {
            0.0
        };
        let book = VaultPortfolio { name: "j".into(), vaults: vec![v.clone()], market_depth: depth, slippage_coefficient: slip };
        let cfg = MonteCarloConfig {
            n_paths: 3,
            horizon_days: 1,
            daily_volatility: 0.0,
            jump_probability: 1.0,
            jump_size: jump,
            ..Default::default()
        };
        let ratios = path_loss_ratios(&book, &cfg).unwrap();
        let closed = (expected / v.debt).min(1.0);
        for r in ratios {
            prop_assert!((r - closed).abs() <= 1e-12 * closed.max(1.0), "{r} vs {closed}");
        }
        prop_assert!((liquidation_loss(&v, &[1.0 - jump], &book) - expected).abs() <= 1e-9 * expected.max(1.0));
        Ok(())
    }))
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Spread of the estimate across independent seeds at each path count.
pub fn mc_standard_errors(groups: u64, sizes: &[usize]) -> Vec<f64> {
    let book = float_book();
    sizes
        .iter()
        .map(|&n| {
            let estimates: Vec<f64> = (0..groups)
                .map(|g| {
                    let cfg = MonteCarloConfig {
                        n_paths: n,
                        horizon_days: 10,
                        daily_volatility: 0.05,
                        seed: 1_000 + g,
                        ..Default::default()
                    };
                    expected_loss_ratio(&book, &cfg).unwrap()
                })
                .collect();
            std_dev(&estimates)
        })
        .collect()
}

/// Each tenfold increase in paths shrinks the spread by about sqrt(10).
pub fn mc_sqrt_n() -> Result<(), String> {
    let se = mc_standard_errors(50, &[1_000, 10_000, 100_000]);
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        let expected = 10f64.sqrt();
        if (ratio / expected - 1.0).abs() > 0.30 {
            return Err(format!("standard errors {se:?}: ratio {ratio:.3} vs {expected:.3}"));
        }
    }
    Ok(())
}

pub fn source_total(r: &calm::CarReport, s: RiskSource) -> Money {
    r.by_source()[&s]
}

/// Every check with its case count, in a fixed order.
pub fn property_suite(cases: u32) -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("linearity", linearity(cases)),
        ("additivity", additivity(cases)),
        ("shock monotonicity", shock_monotonicity(cases)),
        ("order invariance", order_invariance(cases)),
        ("scale invariance", scale_invariance(cases)),
        ("telescoping", telescoping(cases)),
        ("day-liquidity shift", day_shift(cases)),
        ("max drawdown oracle", drawdown_oracle(cases)),
        ("mc 1 vs 8 workers", mc_thread_determinism(cases.min(32))),
        ("mc zero volatility", mc_zero_volatility(cases)),
        ("mc single jump", mc_single_jump(cases)),
        ("mc sqrt(n) standard error", mc_sqrt_n()),
    ]
}
