//! Run configuration: defaults, then a `key = value` file, then flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const CONFIG_ENV: &str = "LIOUVILLE_LAB_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub quadrature_tol: f64,
    pub ode_tol: f64,
    pub grid_nodes: usize,
    pub r_max: f64,
    /// `None` picks the command's natural format.
    pub output_format: Option<Format>,
    pub output_path: Option<PathBuf>,
    /// Worker threads; 0 means one per core.
    pub parallelism: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quadrature_tol: 1e-10,
            ode_tol: 1e-10,
            grid_nodes: 401,
            r_max: 1e3,
            output_format: None,
            output_path: None,
            parallelism: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

pub fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        _ => Err(format!("unknown format {s:?} (json|csv)")),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: String| ConfigError::Syntax { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|e| syntax(format!("{key}: {e}")));
            let int = |v: &str| v.parse::<usize>().map_err(|e| syntax(format!("{key}: {e}")));
            match key {
                "quadrature_tol" => self.quadrature_tol = num(value)?,
                "ode_tol" => self.ode_tol = num(value)?,
                "grid_nodes" => self.grid_nodes = int(value)?,
                "r_max" => self.r_max = num(value)?,
                "output_format" => self.output_format = Some(parse_format(value).map_err(syntax)?),
                "output_path" => self.output_path = Some(PathBuf::from(value)),
                "parallelism" => self.parallelism = int(value)?,
                _ => return Err(syntax(format!("unknown key {key:?}"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.quadrature_tol > 0.0) || !(self.ode_tol > 0.0) {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        if self.grid_nodes < 64 {
            return Err(ConfigError::Invalid(format!(
                "grid_nodes = {} is below 64",
                self.grid_nodes
            )));
        }
        if !(self.r_max > 0.0) {
            return Err(ConfigError::Invalid("r_max must be positive".into()));
        }
        Ok(())
    }

    /// Canonical `key=value` text of the settings that affect results.
    /// Output location and thread count are excluded: they do not change
    /// the payload.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "grid_nodes={}", self.grid_nodes);
        let _ = writeln!(s, "ode_tol={:e}", self.ode_tol);
        let _ = writeln!(s, "quadrature_tol={:e}", self.quadrature_tol);
        let _ = writeln!(s, "r_max={:e}", self.r_max);
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nr_max = 50\ngrid_nodes=128 # trailing\noutput_format = csv\n")
            .unwrap();
        assert_eq!(c.r_max, 50.0);
        assert_eq!(c.grid_nodes, 128);
        assert_eq!(c.output_format, Some(Format::Csv));
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("r_max").is_err());
    }

    #[test]
    fn hash_ignores_parallelism() {
        let a = RunConfig::default();
        let b = RunConfig {
            parallelism: 7,
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            r_max: 10.0,
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn small_grids_rejected() {
        let c = RunConfig {
            grid_nodes: 10,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
