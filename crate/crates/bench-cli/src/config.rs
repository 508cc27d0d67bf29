//! Experiment configuration: the JSON-facing description of a benchmark grid.
//!
//! A configuration names a fixed design shape (n, p, AR(1) correlation), the
//! grid axes (tail indices ν, sketch sizes r, sketch kinds), the number of
//! replications per grid cell, and the master seed that makes the whole run
//! reproducible. Every field has a default, so a config file only needs to
//! mention the fields it wants to change; an empty object `{}` is the default
//! grid.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sketchls::SketchKind;

/// Environment variable that, when set to a decimal u64, overrides
/// `master_seed` from the config file.
pub const SEED_ENV_VAR: &str = "BENCH_SEED";

/// Full description of one benchmark run.
///
/// Serialized as JSON with exactly these snake_case keys. `nu_list` entries
/// are JSON numbers or the string `"inf"` (Gaussian rows, no tail mixing);
/// `sketch_kinds` entries are short labels (`"S_R"`, `"S_GP"`, ...) or
/// expanded `{tag, theta, ...}` objects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Number of design rows.
    pub n: usize,
    /// Number of design columns; must satisfy p < n.
    pub p: usize,
    /// Tail indices ν of the row distribution (degrees of freedom of the
    /// inverse-chi-square row scaling). Smaller ν ⇒ heavier leverage tails.
    #[serde(with = "nu_serde")]
    pub nu_list: Vec<f64>,
    /// Sketch sizes r, one grid column per entry.
    pub r_list: Vec<usize>,
    /// Sketching schemes to compare.
    pub sketch_kinds: Vec<SketchKind>,
    /// Independent sketch draws per (ν, r, kind) cell.
    pub replications: usize,
    /// Master seed; all randomness in the run derives from it.
    pub master_seed: u64,
    /// AR(1) correlation of the design columns.
    pub ar_rho: f64,
    /// When true, estimate the criteria by Monte Carlo over noise draws
    /// instead of the closed-form per-draw evaluation.
    pub mc_mode: bool,
    /// Directory for the emitted tables (created if missing).
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        default_grid()
    }
}

/// The benchmark grid used when no overrides are given: a 1024×50 design,
/// ν ∈ {1, 2, 10}, r from 80 to 1000, and the six standard sketch kinds.
pub fn default_grid() -> ExperimentConfig {
    ExperimentConfig {
        n: 1024,
        p: 50,
        nu_list: vec![1.0, 2.0, 10.0],
        r_list: vec![80, 90, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000],
        sketch_kinds: ["S_R", "S_NR", "S_Unif", "S_Shr", "S_GP", "S_Had"]
            .iter()
            .map(|name| SketchKind::from_short_name(name).expect("known short label"))
            .collect(),
        replications: 100,
        master_seed: 1729,
        ar_rho: 0.5,
        mc_mode: false,
        output_dir: PathBuf::from("results"),
    }
}

impl ExperimentConfig {
    /// Check internal consistency; called by the loaders and the runner.
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n <= self.p {
            bail!("need 1 ≤ p < n, got n={} p={}", self.n, self.p);
        }
        if self.nu_list.is_empty() || self.r_list.is_empty() || self.sketch_kinds.is_empty() {
            bail!("nu_list, r_list and sketch_kinds must all be non-empty");
        }
        for &nu in &self.nu_list {
            if !(nu > 0.0) {
                bail!("tail index nu must be positive, got {nu}");
            }
        }
        for &r in &self.r_list {
            if r == 0 {
                bail!("sketch size r must be positive");
            }
        }
        if self.replications == 0 {
            bail!("replications must be positive");
        }
        if !(-1.0..1.0).contains(&self.ar_rho) {
            bail!("ar_rho must lie in (-1, 1), got {}", self.ar_rho);
        }
        for kind in &self.sketch_kinds {
            kind.validate()
                .with_context(|| format!("invalid sketch kind {}", kind.label()))?;
        }
        Ok(())
    }

    /// Parse a config from JSON text and apply the `BENCH_SEED` override.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut config: ExperimentConfig =
            serde_json::from_str(text).context("failed to parse experiment config JSON")?;
        config.apply_seed_override()?;
        config.validate()?;
        Ok(config)
    }

    /// Load a config file and apply the `BENCH_SEED` override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("failed to read config file {}", path.display()))?;
        Self::from_json(&text)
    }

    fn apply_seed_override(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            let seed: u64 = raw
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV_VAR} must be a decimal u64, got {raw:?}"))?;
            self.master_seed = seed;
        }
        Ok(())
    }
}

/// Serde adapter for `nu_list`: numbers serialize as numbers, infinity as the
/// string `"inf"` (JSON has no infinity literal), and both forms parse back.
mod nu_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum NuRepr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<NuRepr> = values
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    NuRepr::Number(v)
                } else {
                    NuRepr::Text("inf".to_string())
                }
            })
            .collect();
        repr.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<f64>, D::Error> {
        let repr = Vec::<NuRepr>::deserialize(deserializer)?;
        repr.into_iter()
            .map(|entry| match entry {
                NuRepr::Number(v) => Ok(v),
                NuRepr::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => Ok(f64::INFINITY),
                    other => Err(D::Error::custom(format!(
                        "nu_list entries must be numbers or \"inf\", got {other:?}"
                    ))),
                },
            })
            .collect()
    }
}
