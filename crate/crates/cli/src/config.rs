//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. List values are comma
//! separated. Unknown keys are rejected.

use std::path::PathBuf;

use crmcast_core::{ScenarioParams, Scheme, SweepVariable, TreeKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: ScenarioParams,
    pub schemes: Vec<Scheme>,
    pub trees: Vec<TreeKind>,
    pub variable: Option<SweepVariable>,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: ScenarioParams::default(),
            schemes: Scheme::ALL.to_vec(),
            trees: TreeKind::ALL.to_vec(),
            variable: None,
            values: Vec::new(),
            trials: crmcast_core::experiment::DEFAULT_TRIALS,
            seed: 1,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}` (known keys: {})", KEYS.join(", "))]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    Value {
        line: usize,
        key: String,
        reason: String,
    },
}

pub const KEYS: &[&str] = &[
    "n_nodes",
    "n_dest",
    "channels",
    "bandwidth",
    "packet_bits",
    "packet_kb",
    "pt",
    "p_idle",
    "mu_min",
    "mu_max",
    "area_side",
    "comm_range",
    "carrier_hz",
    "path_loss_exp",
    "noise_psd",
    "schemes",
    "trees",
    "variable",
    "values",
    "trials",
    "seed",
    "out",
];

fn list<T: std::str::FromStr>(raw: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn one<T: std::str::FromStr>(raw: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| format!("`{raw}`: {e}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|reason| match reason {
                SetError::Unknown => ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                },
                SetError::Bad(reason) => ConfigError::Value {
                    line,
                    key: key.to_string(),
                    reason,
                },
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        let p = &mut self.params;
        match key {
            "n_nodes" => p.n_nodes = one(value)?,
            "n_dest" => p.n_dest = one(value)?,
            "channels" => p.channels = one(value)?,
            "bandwidth" => p.bandwidth = one(value)?,
            "packet_bits" => p.packet_bits = one(value)?,
            "packet_kb" => {
                p.packet_bits = one::<f64>(value)? * crmcast_core::phy::BITS_PER_KB
            }
            "pt" => p.pt = one(value)?,
            "p_idle" => p.p_idle = one(value)?,
            "mu_min" => p.mu_min = one(value)?,
            "mu_max" => p.mu_max = one(value)?,
            "area_side" => p.area_side = one(value)?,
            "comm_range" => p.comm_range = one(value)?,
            "carrier_hz" => p.carrier_hz = one(value)?,
            "path_loss_exp" => p.path_loss_exp = one(value)?,
            "noise_psd" => p.noise_psd = one(value)?,
            "schemes" => self.schemes = list(value)?,
            "trees" => self.trees = list(value)?,
            "variable" => self.variable = Some(one(value)?),
            "values" => self.values = list(value)?,
            "trials" => self.trials = one(value)?,
            "seed" => self.seed = one(value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }
}

enum SetError {
    Unknown,
    Bad(String),
}

impl From<String> for SetError {
    fn from(s: String) -> Self {
        SetError::Bad(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "\
# sweep over idle probability
n_nodes = 20
n_dest = 11
channels = 6
bandwidth = 2e6
packet_kb = 8
pt = 0.5
p_idle = 0.7
mu_min = 0.01
mu_max = 0.06
area_side = 150
comm_range = 70
carrier_hz = 900e6
path_loss_exp = 3
noise_psd = 1e-17
schemes = pos, rs
trees = mst
variable = p_idle
values = 0.1, 0.5, 0.9
trials = 25
seed = 99   # trailing comment
out = results
";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.params.n_nodes, 20);
        assert_eq!(cfg.params.packet_bits, 65536.0);
        assert_eq!(cfg.schemes, vec![Scheme::Pos, Scheme::Rs]);
        assert_eq!(cfg.trees, vec![TreeKind::Mst]);
        assert_eq!(cfg.variable, Some(SweepVariable::PIdle));
        assert_eq!(cfg.values, vec![0.1, 0.5, 0.9]);
        assert_eq!((cfg.trials, cfg.seed), (25, 99));
        assert_eq!(cfg.out, PathBuf::from("results"));
        assert_eq!(KEYS.len(), 22);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = Config::parse("n_nodes = 5\nwavelength = 0.5\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 2,
                key: "wavelength".into()
            }
        );
        assert!(err.to_string().contains("wavelength"));
    }

    #[test]
    fn bad_values_and_syntax() {
        assert!(matches!(
            Config::parse("trials = many"),
            Err(ConfigError::Value { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("schemes = pos, best"),
            Err(ConfigError::Value { .. })
        ));
        assert!(matches!(
            Config::parse("variable = wavelength"),
            Err(ConfigError::Value { .. })
        ));
        assert_eq!(Config::parse("\n\nseed 5"), Err(ConfigError::Syntax { line: 3 }));
    }
}
