//! Normal generators represented by a weighted sample of their spectrum.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::quadrature::gauss_legendre;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DiagonalSequence,
    DiskMultiplication,
    CustomNormal,
}

/// Closed disk carried as a continuous part of the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskRegion {
    pub center: Complex64,
    pub radius: f64,
}

impl DiskRegion {
    pub fn distance(&self, z: Complex64) -> f64 {
        // |z-c|² - r² factored so that a point just off the boundary keeps its gap
        let d = z - self.center;
        let r = self.radius;
        let (a, b) = if d.re.abs() >= d.im.abs() { (d.re.abs(), d.im) } else { (d.im.abs(), d.re) };
        let excess = (a - r) * (a + r) + b * b;
        if excess <= 0.0 {
            0.0
        } else {
            excess / (d.norm() + r)
        }
    }

    /// Point of contact with the imaginary axis, if the disk touches it.
    pub fn imaginary_contact(&self) -> Option<f64> {
        let gap = self.center.re + self.radius;
        let tol = 1e-14 * (self.center.norm() + self.radius);
        if gap.abs() <= tol {
            Some(self.center.im)
        } else {
            None
        }
    }
}

/// Eigenvalue generators for diagonal models, indexed from `k = 1`.
#[derive(Clone, Debug)]
pub enum DiagonalRule {
    /// `λ_k = -1/k`
    NegReciprocal,
    /// `λ_k = -1/k + ik`
    DampedOscillator,
    /// `λ_k = -k`
    NegLinear,
    Custom {
        generator: fn(usize) -> Complex64,
        closure_points: Vec<Complex64>,
        note: String,
    },
}

impl DiagonalRule {
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        let kf = k as f64;
        match self {
            DiagonalRule::NegReciprocal => Complex64::new(-1.0 / kf, 0.0),
            DiagonalRule::DampedOscillator => Complex64::new(-1.0 / kf, kf),
            DiagonalRule::NegLinear => Complex64::new(-kf, 0.0),
            DiagonalRule::Custom { generator, .. } => generator(k),
        }
    }

    pub fn closure_points(&self) -> Vec<Complex64> {
        match self {
            DiagonalRule::NegReciprocal => vec![Complex64::new(0.0, 0.0)],
            DiagonalRule::DampedOscillator | DiagonalRule::NegLinear => Vec::new(),
            DiagonalRule::Custom { closure_points, .. } => closure_points.clone(),
        }
    }

    pub fn note(&self) -> String {
        match self {
            DiagonalRule::NegReciprocal => "lambda_k = -1/k".to_string(),
            DiagonalRule::DampedOscillator => "lambda_k = -1/k + i k".to_string(),
            DiagonalRule::NegLinear => "lambda_k = -k".to_string(),
            DiagonalRule::Custom { note, .. } => note.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub kind: ModelKind,
    pub eigenvalues: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// Spectrum of the untruncated operator not represented by any sample.
    pub closure_points: Vec<Complex64>,
    /// Continuous spectral component (the disk of a multiplication model).
    pub continuum: Option<DiskRegion>,
    pub truncation_note: String,
}

impl SpectralModel {
    /// Validates the invariants shared by every constructor.
    pub fn new(
        kind: ModelKind,
        eigenvalues: Vec<Complex64>,
        weights: Vec<f64>,
        closure_points: Vec<Complex64>,
        continuum: Option<DiskRegion>,
        truncation_note: String,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidModel("model needs at least one spectral sample".into()));
        }
        if weights.len() != eigenvalues.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: weights.len() });
        }
        for (j, z) in eigenvalues.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidModel(format!("sample {j} is not finite")));
            }
            if z.re == 0.0 {
                return Err(Error::InvalidModel(format!(
                    "sample {j} = {}i lies on the imaginary axis",
                    z.im
                )));
            }
        }
        if let Some(j) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidModel(format!("weight {j} is not strictly positive")));
        }
        Ok(SpectralModel { kind, eigenvalues, weights, closure_points, continuum, truncation_note })
    }

    pub fn custom(eigenvalues: Vec<Complex64>, weights: Vec<f64>, closure_points: Vec<Complex64>) -> Result<Self> {
        SpectralModel::new(
            ModelKind::CustomNormal,
            eigenvalues,
            weights,
            closure_points,
            None,
            "explicit spectral sample".to_string(),
        )
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Whether the certified (bounded semigroup) path applies.
    pub fn is_certifiable(&self) -> bool {
        self.eigenvalues.iter().all(|z| z.re <= 0.0)
            && self.closure_points.iter().all(|z| z.re <= 0.0)
            && self.continuum.map_or(true, |d| d.center.re + d.radius <= 1e-14 * (1.0 + d.center.norm()))
    }

    /// Retained sample closest to the imaginary axis.
    pub fn slowest_mode(&self) -> Complex64 {
        let mut best = self.eigenvalues[0];
        for &z in &self.eigenvalues[1..] {
            if z.re > best.re {
                best = z;
            }
        }
        best
    }

    /// Resonances: points of the imaginary axis in the closure of the spectrum.
    pub fn imaginary_axis_points(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .closure_points
            .iter()
            .filter(|z| z.re.abs() <= 1e-12 * (1.0 + z.im.abs()))
            .map(|z| z.im)
            .collect();
        if let Some(w) = self.continuum.and_then(|d| d.imaginary_contact()) {
            out.push(w);
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        out
    }

    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        linalg::weighted_inner(&self.weights, x, y)
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        linalg::weighted_norm(&self.weights, x)
    }

    pub fn check_len(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: x.len() });
        }
        Ok(())
    }

    /// Distance from `z` to the retained samples only.
    pub fn sample_distance(&self, z: Complex64) -> f64 {
        self.eigenvalues.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Distance from `z` to the part of the spectrum lost to truncation.
    pub fn lost_distance(&self, z: Complex64) -> f64 {
        let mut d = self.closure_points.iter().map(|c| (z - c).norm()).fold(f64::INFINITY, f64::min);
        if let Some(disk) = self.continuum {
            d = d.min(disk.distance(z));
        }
        d
    }

    /// Exact distance from `z` to the spectrum of the untruncated operator.
    pub fn spectral_distance(&self, z: Complex64) -> f64 {
        self.sample_distance(z).min(self.lost_distance(z))
    }

    fn check_sample_point(&self, z: Complex64) -> Result<()> {
        if self.eigenvalues.iter().any(|l| *l == z) {
            return Err(Error::Singular { point: z, reason: "coincides with a spectral sample" });
        }
        Ok(())
    }

    /// Rejects points of the untruncated spectrum.
    pub fn check_resolvent_point(&self, z: Complex64) -> Result<()> {
        self.check_sample_point(z)?;
        if self.closure_points.iter().any(|c| *c == z) {
            return Err(Error::Singular { point: z, reason: "coincides with a closure point" });
        }
        if let Some(disk) = self.continuum {
            if disk.distance(z) == 0.0 {
                return Err(Error::Singular { point: z, reason: "lies in the continuous spectrum" });
            }
        }
        Ok(())
    }

    /// Multipliers `1/(λ - λ_j)`. With `strict = false` only the retained
    /// samples are excluded, which gives the continuous extension of the
    /// truncated resolvent at closure points.
    pub fn resolvent_multipliers(&self, z: Complex64, strict: bool) -> Result<Vec<Complex64>> {
        if strict {
            self.check_resolvent_point(z)?;
        } else {
            self.check_sample_point(z)?;
        }
        Ok(self.eigenvalues.iter().map(|l| (z - l).inv()).collect())
    }
}

pub fn build_diagonal_model(rule: &DiagonalRule, n: usize) -> Result<SpectralModel> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let eig: Vec<Complex64> = (1..=n).map(|k| rule.eigenvalue(k)).collect();
    if let Some(k) = eig.iter().position(|z| z.re == 0.0) {
        return Err(Error::InvalidModel(format!(
            "rule {} puts lambda_{} on the imaginary axis",
            rule.note(),
            k + 1
        )));
    }
    SpectralModel::new(
        ModelKind::DiagonalSequence,
        eig,
        vec![1.0; n],
        rule.closure_points(),
        None,
        format!("{}, k = 1..{}", rule.note(), n),
    )
}

/// Multiplication operator on `L²(Ω)` for a closed disk `Ω`, sampled at a
/// tensor polar Gauss–Legendre × uniform-angle rule with area weights.
pub fn build_disk_model(center: Complex64, radius: f64, n_radial: usize, n_angular: usize) -> Result<SpectralModel> {
    if n_radial < 2 || n_angular < 2 {
        return Err(Error::InvalidArgument("disk quadrature needs at least 2 nodes per direction".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument("disk radius must be positive".into()));
    }
    let disk = DiskRegion { center, radius };
    let gap = center.re + radius;
    if gap > 1e-14 * (center.norm() + radius) {
        return Err(Error::InvalidModel(format!(
            "disk reaches Re = {gap} in the open right half-plane"
        )));
    }
    let (t, wt) = gauss_legendre(n_radial);
    let dtheta = 2.0 * PI / n_angular as f64;
    let mut eig = Vec::with_capacity(n_radial * n_angular);
    let mut w = Vec::with_capacity(n_radial * n_angular);
    for (ti, wi) in t.iter().zip(&wt) {
        let rho = 0.5 * radius * (1.0 + ti);
        let wr = 0.5 * radius * wi * rho;
        for j in 0..n_angular {
            let th = dtheta * (j as f64 + 0.5);
            eig.push(center + Complex64::new(rho * math::cos(th), rho * math::sin(th)));
            w.push(wr * dtheta);
        }
    }
    let closure = match disk.imaginary_contact() {
        Some(w0) => vec![Complex64::new(0.0, w0)],
        None => Vec::new(),
    };
    SpectralModel::new(
        ModelKind::DiskMultiplication,
        eig,
        w,
        closure,
        Some(disk),
        format!(
            "multiplication by mu on L2(disk center {}{:+}i radius {}), {}x{} polar nodes",
            center.re, center.im, radius, n_radial, n_angular
        ),
    )
}

pub fn apply_resolvent(model: &SpectralModel, z: Complex64, x: &[Complex64]) -> Result<Vec<Complex64>> {
    model.check_len(x)?;
    let r = model.resolvent_multipliers(z, true)?;
    Ok(r.iter().zip(x).map(|(a, b)| a * b).collect())
}

/// `‖R(λ, A)‖ = 1/dist(λ, σ(A))` for the untruncated normal operator.
pub fn resolvent_norm_exact(model: &SpectralModel, z: Complex64) -> Result<f64> {
    model.check_resolvent_point(z)?;
    let d = model.spectral_distance(z);
    if d == 0.0 {
        return Err(Error::Singular { point: z, reason: "zero distance to the spectrum" });
    }
    Ok(1.0 / d)
}

/// Rank-`p` factors with `BC = Σ_j ⟨·, c_j⟩ b_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFactors {
    pub rank: usize,
    pub b_columns: Vec<Vec<Complex64>>,
    pub c_columns: Vec<Vec<Complex64>>,
}

impl PerturbationFactors {
    pub fn new(b_columns: Vec<Vec<Complex64>>, c_columns: Vec<Vec<Complex64>>) -> Result<Self> {
        let rank = b_columns.len();
        if rank == 0 {
            return Err(Error::InvalidArgument("perturbation rank must be at least 1".into()));
        }
        if c_columns.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, found: c_columns.len() });
        }
        let n = b_columns[0].len();
        for col in b_columns.iter().chain(&c_columns) {
            if col.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: col.len() });
            }
            if col.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::InvalidArgument("factor entries must be finite".into()));
            }
        }
        Ok(PerturbationFactors { rank, b_columns, c_columns })
    }

    pub fn rank_one(b: Vec<Complex64>, c: Vec<Complex64>) -> Result<Self> {
        PerturbationFactors::new(vec![b], vec![c])
    }

    pub fn zero(n: usize, rank: usize) -> Self {
        let z = vec![vec![Complex64::new(0.0, 0.0); n]; rank.max(1)];
        PerturbationFactors { rank: rank.max(1), b_columns: z.clone(), c_columns: z }
    }

    pub fn dim(&self) -> usize {
        self.b_columns[0].len()
    }

    pub fn check_model(&self, model: &SpectralModel) -> Result<()> {
        if self.dim() != model.len() {
            return Err(Error::DimensionMismatch { expected: model.len(), found: self.dim() });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.b_columns.iter().chain(&self.c_columns).all(|c| c.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// Factors of `(BC)* = Σ_j ⟨·, b_j⟩ c_j`.
    pub fn adjoint(&self) -> Self {
        PerturbationFactors { rank: self.rank, b_columns: self.c_columns.clone(), c_columns: self.b_columns.clone() }
    }

    pub fn scaled(&self, sb: f64, sc: f64) -> Self {
        let scale = |cols: &Vec<Vec<Complex64>>, s: f64| cols.iter().map(|c| c.iter().map(|z| z * s).collect()).collect();
        PerturbationFactors { rank: self.rank, b_columns: scale(&self.b_columns, sb), c_columns: scale(&self.c_columns, sc) }
    }

    /// `‖B‖` as a map `C^p → X`.
    pub fn norm_b(&self, model: &SpectralModel) -> f64 {
        linalg::column_operator_norm(&model.weights, &self.b_columns)
    }

    /// `‖C‖ = ‖C*‖`.
    pub fn norm_c(&self, model: &SpectralModel) -> f64 {
        linalg::column_operator_norm(&model.weights, &self.c_columns)
    }

    /// `BC x`.
    pub fn apply(&self, model: &SpectralModel, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        for (b, c) in self.b_columns.iter().zip(&self.c_columns) {
            let s = model.inner(x, c);
            for (o, bj) in out.iter_mut().zip(b) {
                *o += bj * s;
            }
        }
        out
    }
}
