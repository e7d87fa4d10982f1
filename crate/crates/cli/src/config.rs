//! Flat `key = value` run configuration.
//!
//! Keys come from a config file, then from command-line flags (flags win),
//! and are resolved into a [`RunConfig`] with every default filled in. The
//! resolved config is what goes into the manifest and what the run id hashes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xyconv_core::eigensolver::{DegeneracyPolicy, Method};
use xyconv_core::sweep::{Criterion, HGrid, SweepConfig, TransitionKind};
use xyconv_core::{AlphaGrid, BlockSpec, LanczosOptions};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<xyconv_core::Error> for ConfigError {
    fn from(e: xyconv_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub const KEYS: &[&str] = &[
    "L",
    "gamma",
    "h",
    "h_min",
    "h_max",
    "h_step",
    "delta",
    "block",
    "alpha_min",
    "alpha_max",
    "alpha_count",
    "policy",
    "method",
    "tolerance",
    "max_applications",
    "basis_size",
    "keep",
    "lengths",
    "kind",
    "criterion",
];

/// Raw key/value pairs before resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig(pub BTreeMap<String, String>);

impl RawConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    n + 1
                ));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"').to_string();
            if !KEYS.contains(&key.as_str()) {
                return err(format!("line {}: unknown key `{key}`", n + 1));
            }
            map.insert(key, value);
        }
        Ok(RawConfig(map))
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.0.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError(format!("`{key}` must be a number (got `{v}`)"))),
        }
    }
}

/// A real number, `sqrt(x)`, `sqrt(x)/y` or `x/y`.
pub fn parse_real(text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim())),
        None => (t, None),
    };
    let num = match num.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        Some(inner) => parse_plain(inner)?.sqrt(),
        None => parse_plain(num)?,
    };
    match den {
        None => Ok(num),
        Some(d) => Ok(num / parse_plain(d)?),
    }
}

fn parse_plain(t: &str) -> Result<f64, ConfigError> {
    t.trim()
        .parse()
        .map_err(|_| ConfigError(format!("`{t}` is not a number")))
}

/// Comma-separated reals, or `min:max:step`.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let (a, b, s) = (
            parse_real(parts[0])?,
            parse_real(parts[1])?,
            parse_real(parts[2])?,
        );
        return Ok(HGrid::new(a, b, s)?.values());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_real)
        .collect()
}

/// Comma-separated integers, or `first..=last`.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, ConfigError> {
    let bad = |t: &str| ConfigError(format!("`{t}` is not a non-negative integer"));
    if let Some((a, b)) = text.split_once("..=") {
        let a: usize = a.trim().parse().map_err(|_| bad(a))?;
        let b: usize = b.trim().parse().map_err(|_| bad(b))?;
        return Ok((a..=b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| bad(s)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Lowest,
    MinEntanglement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Dense,
    Iterative,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionName {
    Elocc,
    Locc,
}

fn choice<T: Copy>(
    raw: &RawConfig,
    key: &str,
    default: T,
    options: &[(&str, T)],
) -> Result<T, ConfigError> {
    let Some(v) = raw.get(key) else {
        return Ok(default);
    };
    let v = v.replace('-', "_");
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|o| o.0).collect();
            ConfigError(format!(
                "`{key}` must be one of {} (got `{v}`)",
                names.join(", ")
            ))
        })
}

/// Fully resolved configuration; every field has a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub chain_len: usize,
    pub gamma: Vec<f64>,
    /// Explicit field values (`renyi`, `majorization`).
    pub h: Vec<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub h_step: f64,
    pub delta: f64,
    pub block: Vec<usize>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_count: usize,
    pub policy: PolicyName,
    pub method: MethodName,
    pub tolerance: f64,
    pub max_applications: usize,
    pub basis_size: usize,
    pub keep: usize,
    /// Chain lengths of a scaling run.
    pub lengths: Vec<usize>,
    pub kind: KindName,
    pub criterion: CriterionName,
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, ConfigError> {
        let solver = LanczosOptions::default();
        let h_step = match raw.get("h_step") {
            Some(v) => parse_real(v)?,
            None => 0.005,
        };
        let config = RunConfig {
            chain_len: raw.number("L", 8)?,
            gamma: match raw.get("gamma") {
                Some(v) => parse_real_list(v)?,
                None => vec![1.0],
            },
            h: match raw.get("h") {
                Some(v) => parse_real_list(v)?,
                None => Vec::new(),
            },
            h_min: raw.get("h_min").map(parse_real).transpose()?.unwrap_or(0.0),
            h_max: raw.get("h_max").map(parse_real).transpose()?.unwrap_or(1.5),
            h_step,
            delta: raw
                .get("delta")
                .map(parse_real)
                .transpose()?
                .unwrap_or(h_step),
            block: match raw.get("block") {
                Some(v) => parse_usize_list(v)?,
                None => vec![0, 1],
            },
            alpha_min: raw
                .get("alpha_min")
                .map(parse_real)
                .transpose()?
                .unwrap_or(1e-2),
            alpha_max: raw
                .get("alpha_max")
                .map(parse_real)
                .transpose()?
                .unwrap_or(1e2),
            alpha_count: raw.number("alpha_count", 60)?,
            policy: choice(
                raw,
                "policy",
                PolicyName::Lowest,
                &[
                    ("lowest", PolicyName::Lowest),
                    ("min_entanglement", PolicyName::MinEntanglement),
                ],
            )?,
            method: choice(
                raw,
                "method",
                MethodName::Auto,
                &[
                    ("auto", MethodName::Auto),
                    ("dense", MethodName::Dense),
                    ("iterative", MethodName::Iterative),
                ],
            )?,
            tolerance: raw.number("tolerance", solver.tolerance)?,
            max_applications: raw.number("max_applications", solver.max_applications)?,
            basis_size: raw.number("basis_size", solver.basis_size)?,
            keep: raw.number("keep", solver.keep)?,
            lengths: match raw.get("lengths") {
                Some(v) => parse_usize_list(v)?,
                None => (8..=16).collect(),
            },
            kind: choice(
                raw,
                "kind",
                KindName::Second,
                &[("first", KindName::First), ("second", KindName::Second)],
            )?,
            criterion: choice(
                raw,
                "criterion",
                CriterionName::Elocc,
                &[
                    ("elocc", CriterionName::Elocc),
                    ("locc", CriterionName::Locc),
                ],
            )?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks shared by every command; command-specific checks live with the command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tolerance > 0.0)
            || self.max_applications == 0
            || self.basis_size < 2
            || self.keep == 0
        {
            return err("solver settings must satisfy tolerance > 0, max_applications >= 1, basis_size >= 2, keep >= 1");
        }
        if self.gamma.iter().any(|g| !g.is_finite()) || self.h.iter().any(|h| !h.is_finite()) {
            return err("gamma and h values must be finite");
        }
        self.sweep_for(self.chain_len)?;
        Ok(())
    }

    pub fn alpha_grid(&self) -> Result<AlphaGrid, ConfigError> {
        Ok(AlphaGrid::log_spaced(
            self.alpha_min,
            self.alpha_max,
            self.alpha_count,
        )?)
    }

    pub fn solver(&self) -> LanczosOptions {
        LanczosOptions {
            tolerance: self.tolerance,
            max_applications: self.max_applications,
            basis_size: self.basis_size,
            keep: self.keep,
        }
    }

    pub fn policy(&self) -> DegeneracyPolicy {
        match self.policy {
            PolicyName::Lowest => DegeneracyPolicy::Lowest,
            PolicyName::MinEntanglement => DegeneracyPolicy::MinEntanglement,
        }
    }

    pub fn method(&self) -> Method {
        match self.method {
            MethodName::Auto => Method::Auto,
            MethodName::Dense => Method::Dense,
            MethodName::Iterative => Method::Iterative,
        }
    }

    pub fn kind(&self) -> TransitionKind {
        match self.kind {
            KindName::First => TransitionKind::FirstOrder,
            KindName::Second => TransitionKind::SecondOrder,
        }
    }

    pub fn criterion(&self) -> Criterion {
        match self.criterion {
            CriterionName::Elocc => Criterion::Elocc,
            CriterionName::Locc => Criterion::Locc,
        }
    }

    /// Sweep description for chain length `chain_len`.
    pub fn sweep_for(&self, chain_len: usize) -> Result<SweepConfig, ConfigError> {
        let config = SweepConfig {
            chain_len,
            gammas: self.gamma.clone(),
            h: HGrid::new(self.h_min, self.h_max, self.h_step)?,
            delta: self.delta,
            block: BlockSpec::new(self.block.clone(), chain_len)?,
            alphas: self.alpha_grid()?,
            policy: self.policy(),
            method: self.method(),
            solver: self.solver(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Deterministic 64-bit FNV-1a hash of the resolved config, as hex.
    pub fn run_id(&self, command: &str) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in command.bytes().chain([0]).chain(text.bytes()) {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let raw =
            RawConfig::parse("# comment\nL = 10\ngamma = 0.5, 1.0  # two rows\nh-step=0.01\n")
                .unwrap();
        let c = RunConfig::resolve(&raw).unwrap();
        assert_eq!(c.chain_len, 10);
        assert_eq!(c.gamma, vec![0.5, 1.0]);
        assert_eq!(c.h_step, 0.01);
        assert_eq!(c.delta, 0.01);
        assert_eq!(c.block, vec![0, 1]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(RawConfig::parse("colour = red").is_err());
        assert!(RawConfig::parse("L 8").is_err());
    }

    #[test]
    fn invalid_chain_names_invariant() {
        let raw = RawConfig::parse("L = 1").unwrap();
        let e = RunConfig::resolve(&raw).unwrap_err();
        assert!(e.0.contains("2 <= L"), "{e}");
    }

    #[test]
    fn real_expressions() {
        assert_eq!(parse_real("sqrt(3)/2").unwrap(), 3f64.sqrt() / 2.0);
        assert_eq!(parse_real("1/4").unwrap(), 0.25);
        assert_eq!(parse_real("0.75").unwrap(), 0.75);
        assert!(parse_real("abc").is_err());
        assert_eq!(parse_real_list("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_usize_list("8..=10").unwrap(), vec![8, 9, 10]);
    }

    #[test]
    fn run_id_tracks_config() {
        let a = RunConfig::resolve(&RawConfig::default()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.run_id("scan"), b.run_id("scan"));
        assert_ne!(a.run_id("scan"), a.run_id("renyi"));
        b.h_max = 1.0;
        assert_ne!(a.run_id("scan"), b.run_id("scan"));
    }

    #[test]
    fn manifest_round_trip_is_exact() {
        let mut raw = RawConfig::default();
        raw.set("gamma", "sqrt(3)/2");
        let a = RunConfig::resolve(&raw).unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a, back);
    }
}
