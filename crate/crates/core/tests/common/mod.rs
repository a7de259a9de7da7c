//! Golden decoherence curves: regeneration, tolerance comparison and the
//! SHA-256 manifest. Shared by the golden tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use susy_decoherence::cli::{cmd_decoherence, load_config, Scenario, Table};

/// Scenario stems; each has `<stem>.toml` and `<stem>.csv` in the golden directory.
pub const GOLDEN: [&str; 4] = ["quartic_c0.1", "quartic_c0.5", "quartic_c1.0", "quartic_c0.5_full"];
pub const MANIFEST: &str = "SHA256SUMS";
/// Per-cell agreement demanded of a regenerated curve, `|a - b| <= TOL·max(1, |a|)`.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;
/// Set to rewrite golden files whose regenerated values move beyond tolerance.
pub const UPDATE_VAR: &str = "SUSY_DECOHERENCE_UPDATE_GOLDEN";

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn regenerate(stem: &str) -> Table {
    let config = load_config(&golden_dir().join(format!("{stem}.toml")), None).expect("golden config loads");
    let scenario = Scenario::resolve(&config).expect("golden scenario resolves");
    cmd_decoherence(&scenario).expect("golden run succeeds").0
}

pub fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r.headers().expect("header").iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.expect("record").iter().map(|c| c.parse().expect("numeric cell")).collect())
        .collect();
    (header, rows)
}

/// Largest scaled cell difference, or an error if the shapes differ.
pub fn max_scaled_difference(golden: &[u8], fresh: &[u8]) -> Result<f64, String> {
    let (gh, gr) = parse_csv(golden);
    let (fh, fr) = parse_csv(fresh);
    if gh != fh {
        return Err(format!("header changed: {gh:?} -> {fh:?}"));
    }
    if gr.len() != fr.len() {
        return Err(format!("row count changed: {} -> {}", gr.len(), fr.len()));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in gr.iter().flatten().zip(fr.iter().flatten()) {
        worst = worst.max((a - b).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}

pub fn read_manifest() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(golden_dir().join(MANIFEST)).unwrap_or_default();
    text.lines()
        .filter_map(|l| l.split_once("  "))
        .map(|(hash, name)| (name.to_string(), hash.to_string()))
        .collect()
}

pub fn write_manifest() {
    let mut text = String::new();
    for stem in GOLDEN {
        let name = format!("{stem}.csv");
        let bytes = std::fs::read(golden_dir().join(&name)).expect("golden csv present");
        text.push_str(&format!("{}  {name}\n", sha256_hex(&bytes)));
    }
    std::fs::write(golden_dir().join(MANIFEST), text).unwrap();
}

#[derive(Debug)]
pub struct GoldenCheck {
    pub stem: &'static str,
    pub hash_ok: bool,
    pub byte_identical: bool,
    pub max_difference: Result<f64, String>,
    pub table: Table,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        self.hash_ok && matches!(self.max_difference, Ok(d) if d <= GOLDEN_TOLERANCE)
    }
}

/// Regenerates every curve and compares it with the stored file and manifest.
/// With [`UPDATE_VAR`] set, files outside tolerance (or missing) are rewritten
/// first and the manifest is refreshed.
pub fn check_all() -> Vec<GoldenCheck> {
    let update = std::env::var_os(UPDATE_VAR).is_some();
    let mut checks = Vec::new();
    for stem in GOLDEN {
        let table = regenerate(stem);
        let fresh = table.to_csv();
        let path = golden_dir().join(format!("{stem}.csv"));
        let stored = std::fs::read(&path).ok();
        if update {
            let stale = match &stored {
                Some(g) => !matches!(max_scaled_difference(g, &fresh), Ok(d) if d <= GOLDEN_TOLERANCE),
                None => true,
            };
            if stale {
                std::fs::write(&path, &fresh).unwrap();
            }
        }
        checks.push((stem, table, fresh));
    }
    if update {
        write_manifest();
    }
    let manifest = read_manifest();
    checks
        .into_iter()
        .map(|(stem, table, fresh)| {
            let stored = std::fs::read(golden_dir().join(format!("{stem}.csv"))).unwrap_or_default();
            let hash_ok = manifest.get(&format!("{stem}.csv")) == Some(&sha256_hex(&stored));
            GoldenCheck {
                stem,
                hash_ok,
                byte_identical: stored == fresh,
                max_difference: max_scaled_difference(&stored, &fresh),
                table,
            }
        })
        .collect()
}
