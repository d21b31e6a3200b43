//! Model descriptor files and run configuration.
//!
//! Descriptors are plain-text `key = value` lines; `#` starts a comment.
//! Recognized kinds and their keys:
//!
//! ```text
//! kind = schwinger        omega0, omega, theta
//! kind = jaynes_cummings  g, delta, photon_n          (alias: jc)
//! kind = driven_tls       epsilon, v, omega0, picture (schroedinger|interaction)
//! ```
//!
//! `hbar` is accepted for every kind (default 1).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use adiseries::models::{
    make_driven_tls, make_jaynes_cummings, make_schwinger_spin, HamiltonianModel, Picture,
};

pub struct ParsedModel {
    pub model: HamiltonianModel,
    /// Canonical `key=value` rendering used for the config hash.
    pub canonical: String,
}

fn parse_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64, String> {
    let raw = map
        .get(key)
        .ok_or_else(|| format!("missing key `{key}` in model file"))?;
    raw.parse::<f64>()
        .map_err(|_| format!("key `{key}`: `{raw}` is not a number"))
}

fn parse_u32(map: &BTreeMap<String, String>, key: &str) -> Result<u32, String> {
    let raw = map
        .get(key)
        .ok_or_else(|| format!("missing key `{key}` in model file"))?;
    raw.parse::<u32>()
        .map_err(|_| format!("key `{key}`: `{raw}` is not a non-negative integer"))
}

fn check_keys(map: &BTreeMap<String, String>, allowed: &[&str]) -> Result<(), String> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!("unknown key `{key}` in model file"));
        }
    }
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ParsedModel, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read model file {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
        let key = key.trim().to_ascii_lowercase();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(format!("duplicate key `{key}` in model file"));
        }
    }
    let kind = map
        .get("kind")
        .ok_or("missing key `kind` in model file")?
        .to_ascii_lowercase();
    let hbar = match map.get("hbar") {
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| format!("key `hbar`: `{raw}` is not a number"))?,
        None => 1.0,
    };

    let model = match kind.as_str() {
        "schwinger" | "schwinger_spin" => {
            check_keys(&map, &["kind", "hbar", "omega0", "omega", "theta"])?;
            make_schwinger_spin(
                parse_f64(&map, "omega0")?,
                parse_f64(&map, "omega")?,
                parse_f64(&map, "theta")?,
            )
        }
        "jaynes_cummings" | "jc" => {
            check_keys(&map, &["kind", "hbar", "g", "delta", "photon_n"])?;
            make_jaynes_cummings(
                parse_f64(&map, "g")?,
                parse_f64(&map, "delta")?,
                parse_u32(&map, "photon_n")?,
            )
        }
        "driven_tls" => {
            check_keys(&map, &["kind", "hbar", "epsilon", "v", "omega0", "picture"])?;
            let picture = match map.get("picture").map(|s| s.to_ascii_lowercase()) {
                None => Picture::Schroedinger,
                Some(p) if p == "schroedinger" => Picture::Schroedinger,
                Some(p) if p == "interaction" => Picture::Interaction,
                Some(p) => return Err(format!("unknown picture `{p}`")),
            };
            make_driven_tls(
                parse_f64(&map, "epsilon")?,
                parse_f64(&map, "v")?,
                parse_f64(&map, "omega0")?,
                picture,
            )
        }
        other => return Err(format!("unknown model kind `{other}`")),
    }
    .map_err(|e| e.to_string())?
    .with_hbar(hbar)
    .map_err(|e| e.to_string())?;

    let mut canonical = String::new();
    for (key, value) in &map {
        let _ = write!(canonical, "{key}={value};");
    }
    Ok(ParsedModel { model, canonical })
}

/// 64-bit FNV-1a over the canonical configuration string; hex-rendered into
/// the CSV provenance comment.
pub fn fnv1a64(data: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in data.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
