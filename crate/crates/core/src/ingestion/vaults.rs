use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_toml, to_toml, Problems, SCHEMA_VERSION};
use crate::crypto_mc::{Vault, VaultPortfolio};
use crate::error::Result;
use crate::Portfolio;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VaultsFile {
    schema_version: u32,
    name: String,
    market_depth: String,
    slippage_coefficient: String,
    #[serde(default)]
    vaults: Vec<VaultRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VaultRecord {
    id: String,
    collateral_units: String,
    collateral_price: String,
    debt: String,
    liquidation_ratio: String,
    liquidation_penalty: String,
}

pub fn load_vaults(path: &Path) -> Result<Portfolio> {
    let file: VaultsFile = read_toml(path)?;
    let mut p = Problems::default();
    p.version(file.schema_version);
    let depth = p.decimal("portfolio", "market_depth", &file.market_depth);
    let slippage = p.decimal("portfolio", "slippage_coefficient", &file.slippage_coefficient);
    let mut vaults = Vec::with_capacity(file.vaults.len());
    for (i, v) in file.vaults.iter().enumerate() {
        let ctx = format!("vaults[{i}] `{}`", v.id);
        let fields = (
            p.decimal(&ctx, "collateral_units", &v.collateral_units),
            p.decimal(&ctx, "collateral_price", &v.collateral_price),
            p.decimal(&ctx, "debt", &v.debt),
            p.decimal(&ctx, "liquidation_ratio", &v.liquidation_ratio),
            p.decimal(&ctx, "liquidation_penalty", &v.liquidation_penalty),
        );
        if let (Some(units), Some(price), Some(debt), Some(lr), Some(penalty)) = fields {
            vaults.push(Vault {
                id: v.id.clone(),
                collateral_units: units,
                collateral_price: price,
                debt,
                liquidation_ratio: lr,
                liquidation_penalty: penalty,
            });
        }
    }
    let portfolio = match (depth, slippage) {
        (Some(market_depth), Some(slippage_coefficient)) => {
            Some(VaultPortfolio { name: file.name, vaults, market_depth, slippage_coefficient })
        }
        _ => None,
    };
    let portfolio = p.finish(path, portfolio)?;
    portfolio.check()?;
    Ok(portfolio)
}

pub fn vaults_to_toml(p: &Portfolio) -> String {
    to_toml(&VaultsFile {
        schema_version: SCHEMA_VERSION,
        name: p.name.clone(),
        market_depth: p.market_depth.to_string(),
        slippage_coefficient: p.slippage_coefficient.to_string(),
        vaults: p
            .vaults
            .iter()
            .map(|v| VaultRecord {
                id: v.id.clone(),
                collateral_units: v.collateral_units.to_string(),
                collateral_price: v.collateral_price.to_string(),
                debt: v.debt.to_string(),
                liquidation_ratio: v.liquidation_ratio.to_string(),
                liquidation_penalty: v.liquidation_penalty.to_string(),
            })
            .collect(),
    })
}
