//! TOML run configuration. Keys mirror the long flags; a flag given on the
//! command line always wins over the file.
//!
//! ```toml
//! format = "json"
//! seed = 7
//!
//! [ideal]
//! L = 1.0
//! a = 0.3
//! xi = 0.1
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub si: Option<f64>,
    pub seed: Option<u64>,
    pub emit_plot_data: Option<PathBuf>,
    #[serde(default)]
    pub ideal: Section,
    #[serde(default)]
    pub perturb: Section,
    #[serde(default)]
    pub laurent: Section,
}

/// Parameters of one command family.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Section {
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub a: Option<f64>,
    pub xi: Option<f64>,
    pub method: Option<String>,
    pub max_terms: Option<u64>,
    pub zero_mode_weight: Option<f64>,
    pub side: Option<String>,
    pub m: Option<u32>,
    pub lambda: Option<u8>,
    pub kpar: Option<f64>,
    pub profile: Option<String>,
    pub alpha: Option<f64>,
    pub layers: Option<usize>,
    pub zero_mode: Option<bool>,
    pub quantity: Option<String>,
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
    pub points: Option<usize>,
    pub basis: Option<String>,
    pub ideal_basis: Option<String>,
    pub a_grid: Option<String>,
}

pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Flag value if given, else file value, else nothing.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

pub fn require<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Usage(format!("missing required parameter --{name} (flag or config key)"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_rejects_unknown_keys() {
        let cfg: FileConfig = toml::from_str(
            "format = \"csv\"\nseed = 3\n[ideal]\nL = 2.0\na = 0.5\nxi-min = 0.001\n",
        )
        .unwrap();
        assert_eq!(cfg.format, Some(Format::Csv));
        assert_eq!(cfg.ideal.length, Some(2.0));
        assert_eq!(cfg.ideal.xi_min, Some(0.001));
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
        assert!(toml::from_str::<FileConfig>("[ideal]\nlength = 1.0").is_err());
        assert!(toml::from_str::<FileConfig>("[plots]\nx = 1").is_err());
    }

    #[test]
    fn flags_override_file() {
        assert_eq!(pick(Some(1.0), &Some(2.0)), Some(1.0));
        assert_eq!(pick(None, &Some(2.0)), Some(2.0));
        assert_eq!(pick::<f64>(None, &None), None);
    }
}
