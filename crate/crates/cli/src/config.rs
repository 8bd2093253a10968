//! Model and perturbation file formats.

use std::fs;
use std::path::Path;

use semistab_core::model::{build_diagonal_model, build_disk_model};
use semistab_core::presets::{disk_monomial_factors, power_law_factors};
use semistab_core::{Complex64, DiagonalRule, PerturbationFactors, SpectralModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `[re, im]` pairs on disk.
pub type Pair = [f64; 2];

fn to_c(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    /// `-1/k`
    NegReciprocal,
    /// `-1/k + ik`
    DampedOscillator,
    /// `-k`
    NegLinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    DiagonalSequence {
        rule: RuleName,
        n: usize,
    },
    DiskMultiplication {
        center: Pair,
        radius: f64,
        n_radial: usize,
        n_angular: usize,
    },
    CustomNormal {
        eigenvalues: Vec<Pair>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        closure_points: Vec<Pair>,
    },
}

/// A model file: the spectral data plus optional model-specific constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(flatten)]
    pub spec: ModelSpec,
    /// Analytic bound on `sup ‖(iω_k - A)^α R(λ, A)‖` near the resonances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_m1: Option<f64>,
    /// Use the boundary supremum of the exact resolvent norm for `M₂`.
    #[serde(default)]
    pub direct_m2: bool,
}

impl ModelFile {
    pub fn build(&self) -> Result<SpectralModel, CliError> {
        let m = match &self.spec {
            ModelSpec::DiagonalSequence { rule, n } => {
                let rule = match rule {
                    RuleName::NegReciprocal => DiagonalRule::NegReciprocal,
                    RuleName::DampedOscillator => DiagonalRule::DampedOscillator,
                    RuleName::NegLinear => DiagonalRule::NegLinear,
                };
                build_diagonal_model(&rule, *n)?
            }
            ModelSpec::DiskMultiplication { center, radius, n_radial, n_angular } => build_disk_model(to_c(center), *radius, *n_radial, *n_angular)?,
            ModelSpec::CustomNormal { eigenvalues, weights, closure_points } => {
                let w = weights.clone().unwrap_or_else(|| vec![1.0; eigenvalues.len()]);
                SpectralModel::custom(eigenvalues.iter().map(to_c).collect(), w, closure_points.iter().map(to_c).collect())?
            }
        };
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    /// Explicit columns `b_j`, `c_j` as lists of `[re, im]`.
    Explicit { b: Vec<Vec<Pair>>, c: Vec<Vec<Pair>> },
    /// `b = c = (k^{-p})_k`, then scaled by `scale_b`, `scale_c`.
    PowerLaw {
        p: f64,
        #[serde(default = "one")]
        scale_b: f64,
        #[serde(default = "one")]
        scale_c: f64,
    },
    /// `b = c = s·μ` on the spectral samples.
    Monomial { s: f64 },
    /// `b = c = s e_k` (0-based `k`).
    Unit { index: usize, s: f64 },
}

fn one() -> f64 {
    1.0
}

impl PerturbationSpec {
    pub fn build(&self, model: &SpectralModel) -> Result<PerturbationFactors, CliError> {
        let n = model.len();
        let f = match self {
            PerturbationSpec::Explicit { b, c } => {
                let cols = |v: &Vec<Vec<Pair>>| v.iter().map(|col| col.iter().map(to_c).collect()).collect();
                PerturbationFactors::new(cols(b), cols(c))?
            }
            PerturbationSpec::PowerLaw { p, scale_b, scale_c } => power_law_factors(n, *p)?.scaled(*scale_b, *scale_c),
            PerturbationSpec::Monomial { s } => disk_monomial_factors(model, *s)?,
            PerturbationSpec::Unit { index, s } => {
                if *index >= n {
                    return Err(CliError::Config(format!("unit index {index} out of range for N = {n}")));
                }
                let mut b = vec![Complex64::new(0.0, 0.0); n];
                b[*index] = Complex64::new(*s, 0.0);
                PerturbationFactors::rank_one(b.clone(), b)?
            }
        };
        f.check_model(model)?;
        Ok(f)
    }

    pub fn explicit(f: &PerturbationFactors) -> Self {
        let cols = |v: &Vec<Vec<Complex64>>| v.iter().map(|col| col.iter().map(to_pair).collect()).collect();
        PerturbationSpec::Explicit { b: cols(&f.b_columns), c: cols(&f.c_columns) }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_files_round_trip() {
        let text = r#"{"kind": "disk_multiplication", "center": [-1, 0], "radius": 1, "n_radial": 4, "n_angular": 8, "analytic_m1": 8}"#;
        let f: ModelFile = serde_json::from_str(text).unwrap();
        assert_eq!(f.analytic_m1, Some(8.0));
        assert!(!f.direct_m2);
        assert_eq!(f.build().unwrap().len(), 32);
        let back: ModelFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);

        let d: ModelFile = serde_json::from_str(r#"{"kind": "diagonal_sequence", "rule": "neg_reciprocal", "n": 7}"#).unwrap();
        assert_eq!(d.build().unwrap().eigenvalues[6], Complex64::new(-1.0 / 7.0, 0.0));

        let bad: ModelFile = serde_json::from_str(r#"{"kind": "custom_normal", "eigenvalues": [[0, 1]]}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn perturbation_files() {
        let m = ModelFile { spec: ModelSpec::DiagonalSequence { rule: RuleName::NegReciprocal, n: 5 }, analytic_m1: None, direct_m2: false }.build().unwrap();
        let u: PerturbationSpec = serde_json::from_str(r#"{"kind": "unit", "index": 0, "s": 2}"#).unwrap();
        let f = u.build(&m).unwrap();
        assert_eq!(f.b_columns[0][0], Complex64::new(2.0, 0.0));
        let e = PerturbationSpec::explicit(&f);
        assert_eq!(e.build(&m).unwrap(), f);
        let short = PerturbationSpec::Explicit { b: vec![vec![[1.0, 0.0]]], c: vec![vec![[1.0, 0.0]]] };
        assert!(short.build(&m).is_err());
        assert!(PerturbationSpec::Unit { index: 9, s: 1.0 }.build(&m).is_err());
    }
}
