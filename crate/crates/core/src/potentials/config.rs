use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PairPotential, PotentialError, RadialTable};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialParameters {
    pub radius: Option<f64>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub exponent: Option<f64>,
    /// Two-column CSV (r, phi) for tabulated potentials.
    pub table: Option<PathBuf>,
}

/// Potential description as found in config files:
/// `{ kind, parameters, beta, dimension }`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: Option<String>,
    pub beta: Option<f64>,
    pub dimension: Option<usize>,
    #[serde(default)]
    pub parameters: PotentialParameters,
}

impl PotentialConfig {
    /// Fields set in `other` win.
    pub fn overlay(&self, other: &PotentialConfig) -> PotentialConfig {
        let p = &self.parameters;
        let q = &other.parameters;
        PotentialConfig {
            kind: other.kind.clone().or_else(|| self.kind.clone()),
            beta: other.beta.or(self.beta),
            dimension: other.dimension.or(self.dimension),
            parameters: PotentialParameters {
                radius: q.radius.or(p.radius),
                epsilon: q.epsilon.or(p.epsilon),
                sigma: q.sigma.or(p.sigma),
                exponent: q.exponent.or(p.exponent),
                table: q.table.clone().or_else(|| p.table.clone()),
            },
        }
    }

    /// Relative table paths are resolved against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<PairPotential, PotentialError> {
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| PotentialError::Config("potential kind is required".into()))?
            .replace('_', "-");
        let beta = self.beta.unwrap_or(1.0);
        let dim = self.dimension.unwrap_or(3);
        let p = &self.parameters;
        match kind.as_str() {
            "hard-sphere" => PairPotential::hard_sphere(p.radius.unwrap_or(1.0), dim),
            "power-law" => {
                let exponent = p
                    .exponent
                    .ok_or_else(|| PotentialError::Config("power-law potential needs an exponent".into()))?;
                PairPotential::power_law(p.epsilon.unwrap_or(1.0), p.sigma.unwrap_or(1.0), exponent, beta, dim)
            }
            "tabulated" => {
                let path = p
                    .table
                    .as_ref()
                    .ok_or_else(|| PotentialError::Config("tabulated potential needs a table path".into()))?;
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                PairPotential::tabulated(read_radial_table(&path)?, beta, dim)
            }
            "ideal" => PairPotential::ideal(dim),
            other => Err(PotentialError::Config(format!("unknown potential kind '{other}'"))),
        }
    }
}

pub fn parse_potential_toml(text: &str) -> Result<PotentialConfig, PotentialError> {
    toml::from_str(text).map_err(|e| PotentialError::Config(e.to_string()))
}

/// Reads a potential description from a `.toml` or `.json` file.
pub fn load_potential_file(path: &Path) -> Result<PairPotential, PotentialError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PotentialError::Config(format!("{}: {e}", path.display())))?;
    let cfg: PotentialConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| PotentialError::Config(e.to_string()))?,
        _ => parse_potential_toml(&text)?,
    };
    cfg.build(path.parent())
}

/// Two-column CSV of (r, phi). A non-numeric first row is taken as a header;
/// `inf` marks a hard core.
pub fn read_radial_table(path: &Path) -> Result<RadialTable, PotentialError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| PotentialError::Config(format!("{}: {e}", path.display())))?;
    let mut r = Vec::new();
    let mut phi = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| PotentialError::Config(e.to_string()))?;
        if rec.len() != 2 {
            return Err(PotentialError::Config(format!("row {} must have two columns", i + 1)));
        }
        let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(b)) => {
                r.push(a);
                phi.push(b);
            }
            _ if i == 0 => continue,
            _ => return Err(PotentialError::Config(format!("row {} is not numeric", i + 1))),
        }
    }
    RadialTable::new(r, phi)
}
