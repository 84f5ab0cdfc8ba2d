use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{keyword_str, read_toml, to_toml, Problems, SCHEMA_VERSION};
use crate::error::Result;
use crate::liquidity::{HolderKind, HolderRecord};
use crate::{Holder, Money};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HoldersFile {
    schema_version: u32,
    #[serde(default)]
    holders: Vec<HolderEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HolderEntry {
    address_id: String,
    holder_kind: String,
    /// `[date, balance]` pairs.
    #[serde(default)]
    balances: Vec<(String, String)>,
}

pub fn load_holders(path: &Path) -> Result<Vec<Holder>> {
    let file: HoldersFile = read_toml(path)?;
    let mut p = Problems::default();
    p.version(file.schema_version);
    let mut holders = Vec::with_capacity(file.holders.len());
    for (i, h) in file.holders.iter().enumerate() {
        let ctx = format!("holders[{i}] `{}`", h.address_id);
        let kind: Option<HolderKind> = p.keyword(&ctx, "holder_kind", &h.holder_kind);
        let mut series = Vec::with_capacity(h.balances.len());
        for (j, (date, balance)) in h.balances.iter().enumerate() {
            let field = format!("balances[{j}]");
            if let (Some(d), Some(b)) = (p.date(&ctx, &field, date), p.decimal(&ctx, &field, balance)) {
                if b < Money::ZERO {
                    p.push(format!("{ctx}: {field}: negative balance {b}"));
                }
                series.push((d, b));
            }
        }
        if let Some(w) = series.windows(2).find(|w| w[0].0 >= w[1].0) {
            p.push(format!("{ctx}: dates not strictly increasing at {} -> {}", w[0].0, w[1].0));
        }
        if let Some(holder_kind) = kind {
            holders.push(HolderRecord { address_id: h.address_id.clone(), holder_kind, balance_series: series });
        }
    }
    p.finish(path, Some(holders))
}

pub fn holders_to_toml(holders: &[Holder]) -> String {
    to_toml(&HoldersFile {
        schema_version: SCHEMA_VERSION,
        holders: holders
            .iter()
            .map(|h| HolderEntry {
                address_id: h.address_id.clone(),
                holder_kind: keyword_str(&h.holder_kind),
                balances: h.balance_series.iter().map(|(d, b)| (d.to_string(), b.to_string())).collect(),
            })
            .collect(),
    })
}
