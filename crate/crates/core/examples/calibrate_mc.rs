//! Grid search for market-model parameters whose mean loss ratio on a vault
//! book lands inside a target window.
//!
//! cargo run --release -p calm-core --example calibrate_mc -- <vaults.toml> [lo hi] [seed] [market_depth slippage]

use std::path::PathBuf;

use calm::crypto_mc::{expected_loss_ratio, MonteCarloConfig};
use calm::ingestion::load_vaults;

fn main() -> calm::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/makerdao-2023-12-31/vaults-2023-12-31.toml".into()));
    let lo: f64 = args.next().map_or(0.0283, |a| a.parse().expect("lo"));
    let hi: f64 = args.next().map_or(0.0290, |a| a.parse().expect("hi"));
    let seed: u64 = args.next().map_or(20231231, |a| a.parse().expect("seed"));
    let mut book = load_vaults(&path)?.to_float::<f64>();
    if let (Some(depth), Some(slippage)) = (args.next(), args.next()) {
        book.market_depth = depth.parse().expect("market_depth");
        book.slippage_coefficient = slippage.parse().expect("slippage");
    }

    let centre = (lo + hi) / 2.0;
    let mut best: Option<(f64, MonteCarloConfig)> = None;
    for vol in (300..=310).map(|i| i as f64 * 0.0001) {
        for jump_probability in [0.0, 0.01] {
            for jump_size in [0.2, 0.3] {
                if jump_probability == 0.0 && jump_size != 0.2 {
                    continue;
                }
                let cfg = MonteCarloConfig {
                    n_paths: 10_000,
                    horizon_days: 30,
                    daily_volatility: vol,
                    daily_drift: 0.0,
                    jump_probability,
                    jump_size: if jump_probability == 0.0 { 0.0 } else { jump_size },
                    seed,
                    ..Default::default()
                };
                let ratio = expected_loss_ratio(&book, &cfg)?;
                if ratio >= lo && ratio <= hi {
                    println!("{ratio:.6}  vol={vol:.4} jump_p={jump_probability} jump={}", cfg.jump_size);
                }
                if best.as_ref().is_none_or(|(r, _)| (ratio - centre).abs() < (r - centre).abs()) {
                    best = Some((ratio, cfg));
                }
            }
        }
    }
    if let Some((ratio, cfg)) = best {
        println!("closest: {ratio:.6} {cfg:?}");
    }
    Ok(())
}
