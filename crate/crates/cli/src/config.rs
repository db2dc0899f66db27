use anyhow::{bail, Context, Result};
use fractal_onb::filters::{MatrixSpec, UnitaryMatrix};
use fractal_onb::ifs::AffineIfs;
use serde::Deserialize;
use std::path::Path;

/// Contents of a `--config` file (TOML, or JSON for a `.json` extension).
///
/// A system is given by `R`, `B` and optionally `L`; a matrix by `N` and
/// `rows` (each entry `[re, im]`). The remaining keys supply defaults for the
/// matching command-line flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "R")]
    pub scale: Option<f64>,
    #[serde(rename = "B")]
    pub digits: Option<Vec<f64>>,
    #[serde(rename = "L")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub dim: Option<usize>,
    pub rows: Option<Vec<Vec<[f64; 2]>>>,
    pub max_len: Option<usize>,
    pub p_max: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub probes: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub iters: Option<usize>,
}

pub enum Model {
    System { ifs: AffineIfs, spectrum: Option<Vec<f64>> },
    Matrix(UnitaryMatrix),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config: RunConfig = if is_json {
            serde_json::from_str(&text).with_context(|| format!("invalid JSON config {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("invalid TOML config {}", path.display()))?
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("tol must be positive, got {tol}");
            }
        }
        let has_system = self.scale.is_some() || self.digits.is_some() || self.spectrum.is_some();
        let has_matrix = self.dim.is_some() || self.rows.is_some();
        if has_system && has_matrix {
            bail!("config gives both a system (R, B, L) and a matrix (N, rows); use one");
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model> {
        match (self.scale, &self.digits, self.dim, &self.rows) {
            (Some(r), Some(b), None, None) => Ok(Model::System {
                ifs: AffineIfs::new(r, b.clone())?,
                spectrum: self.spectrum.clone(),
            }),
            (None, None, Some(n), Some(rows)) => Ok(Model::Matrix(UnitaryMatrix::from_spec(&MatrixSpec {
                n,
                rows: rows.clone(),
            })?)),
            (None, None, None, None) if self.spectrum.is_none() => {
                bail!("config needs a system (R, B) or a matrix (N, rows)")
            }
            (_, _, None, None) => bail!("a system needs both R and B"),
            _ => bail!("a matrix needs both N and rows"),
        }
    }

    /// A system with its spectrum `L`.
    pub fn pair(&self) -> Result<(AffineIfs, Vec<f64>)> {
        match self.model()? {
            Model::System {
                ifs,
                spectrum: Some(l),
            } => Ok((ifs, l)),
            Model::System { spectrum: None, .. } => bail!("this command needs L in the config"),
            Model::Matrix(_) => bail!("this command needs a system (R, B, L), not a matrix"),
        }
    }

    pub fn system(&self) -> Result<AffineIfs> {
        match self.model()? {
            Model::System { ifs, .. } => Ok(ifs),
            Model::Matrix(_) => bail!("this command needs a system (R, B), not a matrix"),
        }
    }

    pub fn matrix(&self) -> Result<UnitaryMatrix> {
        match self.model()? {
            Model::Matrix(a) => Ok(a),
            Model::System { .. } => bail!("this command needs a matrix (N, rows), not a system"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_system() {
        let c: RunConfig = toml::from_str("R = 3\nB = [0, 2]\nL = [0, 0.75]\nmax_len = 4\n").unwrap();
        let (ifs, l) = c.pair().unwrap();
        assert_eq!(ifs.scale(), 3.0);
        assert_eq!(l, vec![0.0, 0.75]);
        assert_eq!(c.max_len, Some(4));
    }

    #[test]
    fn parses_json_matrix() {
        let c: RunConfig = serde_json::from_str(r#"{"N": 2, "rows": [[[0.7071067811865476, 0], [0.7071067811865476, 0]], [[0.7071067811865476, 0], [-0.7071067811865476, 0]]]}"#).unwrap();
        assert!(c.matrix().unwrap().first_row_constant());
        assert!(c.system().is_err());
    }

    #[test]
    fn rejects_mixed_and_partial_configs() {
        let both = RunConfig {
            scale: Some(2.0),
            dim: Some(2),
            ..Default::default()
        };
        assert!(both.validate().is_err());
        let partial = RunConfig {
            scale: Some(2.0),
            ..Default::default()
        };
        assert!(partial.model().is_err());
        let no_l: RunConfig = toml::from_str("R = 2\nB = [0, 1]\n").unwrap();
        assert!(no_l.pair().is_err());
        assert!(toml::from_str::<RunConfig>("R = 2\nB = [0, 1]\nunknown = 1\n").is_err());
        let bad_tol = RunConfig {
            tol: Some(-1.0),
            ..Default::default()
        };
        assert!(bad_tol.validate().is_err());
    }
}
