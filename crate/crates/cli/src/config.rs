//! `key = value` configuration files.

use std::path::{Path, PathBuf};

use pipir::model::{DesignParams, Preset};
use pipir::singularity::Tolerances;

use crate::CliError;

pub const ENV_VAR: &str = "PIPIR_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: DesignParams,
    pub preset: Preset,
    pub tol: Tolerances,
    /// Default grid resolution for map subcommands.
    pub resolution: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: DesignParams::default(),
            preset: Preset::Consistent,
            tol: Tolerances::default(),
            resolution: 256,
            output_dir: None,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", n + 1));
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            let num = || {
                value
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{key}` needs a number, got `{value}`")))
            };
            match key {
                "d1" => cfg.params.d1 = num()?,
                "d2" => cfg.params.d2 = num()?,
                "d3" => cfg.params.d3 = num()?,
                "d4" => cfg.params.d4 = num()?,
                "l" => cfg.params.l = num()?,
                "tol_parallel" => cfg.tol.parallel = num()?,
                "tol_serial" => cfg.tol.serial = num()?,
                "preset" => cfg.preset = value.parse().map_err(|e| bad(format!("{e}")))?,
                "resolution" => {
                    cfg.resolution = value
                        .parse()
                        .map_err(|_| bad(format!("`resolution` needs a positive integer, got `{value}`")))?
                }
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        cfg.params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Explicit path, else `PIPIR_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, CliError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(ENV_VAR) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let cfg = Config::parse(
            "# robot\nd1 = 0.6\nl=1.2  # longer legs\npreset = paper-ik-mode4\nresolution = 64\noutput_dir = out\n",
        )
        .unwrap();
        assert_eq!(cfg.params.d1, 0.6);
        assert_eq!(cfg.params.l, 1.2);
        assert_eq!(cfg.params.d2, 1.0);
        assert_eq!(cfg.preset, Preset::PaperIkMode4);
        assert_eq!(cfg.resolution, 64);
        assert_eq!(cfg.output_dir, Some(PathBuf::from("out")));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("d5 = 1").is_err());
        assert!(Config::parse("d1 = abc").is_err());
        assert!(Config::parse("d1").is_err());
        assert!(Config::parse("d1 = -1").is_err());
        assert!(Config::parse("preset = other").is_err());
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::parse("\n# nothing\n").unwrap(), Config::default());
    }
}
