use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{keyword_str, load_vaults, read_toml, to_toml, AppliedDefault, Loaded, Problems, SCHEMA_VERSION};
use crate::balance_sheet::{validate_snapshot, AssetClass, AssetPosition, LiabilityKind, LiabilityPosition, Rating};
use crate::error::Result;
use crate::liquidity::Bucket;
use crate::{Money, Portfolio, Snapshot};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    schema_version: u32,
    as_of: String,
    #[serde(default)]
    assets: Vec<AssetRecord>,
    #[serde(default)]
    liabilities: Vec<LiabilityRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssetRecord {
    id: String,
    class: String,
    exposure: String,
    avg_maturity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rating: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    liquidity_tenor: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    collateral_ref: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiabilityRecord {
    id: String,
    kind: String,
    amount: String,
}

fn convert(file: SnapshotFile, p: &mut Problems, defaults: &mut Vec<AppliedDefault>) -> Option<Snapshot> {
    p.version(file.schema_version);
    let as_of = p.date("snapshot", "as_of", &file.as_of);
    let mut assets = Vec::new();
    for (i, a) in file.assets.iter().enumerate() {
        let ctx = format!("assets[{i}] `{}`", a.id);
        let class: Option<AssetClass> = p.keyword(&ctx, "class", &a.class);
        let exposure = p.decimal(&ctx, "exposure", &a.exposure);
        let maturity = p.decimal(&ctx, "avg_maturity", &a.avg_maturity);
        let rating: Option<Option<Rating>> = match &a.rating {
            Some(r) => p.keyword(&ctx, "rating", r).map(Some),
            None => Some(None),
        };
        let tenor: Option<Bucket> = match (&a.liquidity_tenor, class) {
            (Some(t), _) => p.keyword(&ctx, "liquidity_tenor", t),
            (None, Some(c)) => {
                defaults.push(AppliedDefault {
                    field: format!("assets.{}.liquidity_tenor", a.id),
                    value: c.default_tenor().to_string(),
                });
                Some(c.default_tenor())
            }
            (None, None) => None,
        };
        if let (Some(class), Some(exposure), Some(avg_maturity), Some(rating), Some(liquidity_tenor)) =
            (class, exposure, maturity, rating, tenor)
        {
            assets.push(AssetPosition {
                id: a.id.clone(),
                class,
                exposure,
                avg_maturity,
                rating,
                liquidity_tenor,
                collateral_ref: a.collateral_ref.clone(),
            });
        }
    }
    let mut liabilities = Vec::new();
    for (i, l) in file.liabilities.iter().enumerate() {
        let ctx = format!("liabilities[{i}] `{}`", l.id);
        let kind: Option<LiabilityKind> = p.keyword(&ctx, "kind", &l.kind);
        let amount = p.decimal(&ctx, "amount", &l.amount);
        if let (Some(kind), Some(amount)) = (kind, amount) {
            liabilities.push(LiabilityPosition { id: l.id.clone(), kind, amount });
        }
    }
    Some(Snapshot { as_of: as_of?, assets, liabilities })
}

/// Loads and validates a snapshot, reporting defaulted fields.
pub fn read_snapshot(path: &Path, tolerance: Money) -> Result<Loaded<Snapshot>> {
    let file: SnapshotFile = read_toml(path)?;
    let mut problems = Problems::default();
    let mut defaults = Vec::new();
    let snapshot = convert(file, &mut problems, &mut defaults);
    let snapshot = problems.finish(path, snapshot)?;
    validate_snapshot(&snapshot, tolerance)?;
    Ok(Loaded { value: snapshot, defaults })
}

/// Loads a snapshot and checks it against a $1 balance tolerance.
pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    read_snapshot(path, Money::ONE).map(|l| l.value)
}

/// Loads every vault portfolio the snapshot's crypto-backed loans reference,
/// resolving `collateral_ref` relative to `base_dir`.
pub fn load_vault_book(snapshot: &Snapshot, base_dir: &Path) -> Result<BTreeMap<String, Portfolio>> {
    let mut book = BTreeMap::new();
    for reference in snapshot.assets.iter().filter_map(|a| a.collateral_ref.as_deref()) {
        if !book.contains_key(reference) {
            let portfolio = load_vaults(&base_dir.join(reference))?;
            book.insert(reference.to_string(), portfolio);
        }
    }
    Ok(book)
}

pub fn snapshot_to_toml(s: &Snapshot) -> String {
    let file = SnapshotFile {
        schema_version: SCHEMA_VERSION,
        as_of: s.as_of.to_string(),
        assets: s
            .assets
            .iter()
            .map(|a| AssetRecord {
                id: a.id.clone(),
                class: keyword_str(&a.class),
                exposure: a.exposure.to_string(),
                avg_maturity: a.avg_maturity.to_string(),
                rating: a.rating.map(|r| keyword_str(&r)),
                liquidity_tenor: Some(keyword_str(&a.liquidity_tenor)),
                collateral_ref: a.collateral_ref.clone(),
            })
            .collect(),
        liabilities: s
            .liabilities
            .iter()
            .map(|l| LiabilityRecord { id: l.id.clone(), kind: keyword_str(&l.kind), amount: l.amount.to_string() })
            .collect(),
    };
    to_toml(&file)
}
