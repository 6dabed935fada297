use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

/// Flat TOML experiment description. Command-line flags take precedence
/// over the matching keys.
///
/// ```toml
/// scenario = "ii-a"
/// n = 500
/// p = 100
/// reps = 1000
/// seed = 7
/// mu0 = [0.30, 0.45]
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// `A-i` .. `C-iii` for size runs, `i` .. `iv-b` for power and key-player runs.
    pub scenario: String,
    pub n: Option<usize>,
    /// Sample sizes of a key-player run.
    pub n_list: Option<Vec<usize>>,
    pub p: Option<usize>,
    /// Number of stationary predictors under persistence scheme C.
    pub p1: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub mu0: Option<Vec<f64>>,
    /// Local-to-null slopes `(a, b, c, d)`: one row, or one row per power column.
    pub slopes: Option<Slopes>,
    pub burn_in: Option<usize>,
    /// Nominal size of the rejection frequencies.
    pub nominal: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Slopes {
    Row([f64; 4]),
    Grid(Vec<[f64; 4]>),
}

impl Slopes {
    pub fn rows(&self) -> Vec<[f64; 4]> {
        match self {
            Slopes::Row(r) => vec![*r],
            Slopes::Grid(g) => g.clone(),
        }
    }
}

pub fn parse_manifest(text: &str) -> Result<Manifest, CliError> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
    parse_manifest(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let m = parse_manifest("scenario = \"iv-b\"\nn_list = [200, 500]\nslopes = [2, 0, 13, 0]\nreps = 10\n").unwrap();
        assert_eq!(m.scenario, "iv-b");
        assert_eq!(m.n_list, Some(vec![200, 500]));
        assert_eq!(m.slopes.unwrap().rows(), vec![[2.0, 0.0, 13.0, 0.0]]);
        let grid = parse_manifest("scenario = \"x\"\nslopes = [[1, 2, 0, 0], [3, 4, 0, 0]]\n").unwrap();
        assert_eq!(grid.slopes.unwrap().rows().len(), 2);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_scenario() {
        assert!(parse_manifest("scenario = \"A-i\"\nreplications = 5\n").is_err());
        assert!(parse_manifest("n = 5\n").is_err());
    }
}
