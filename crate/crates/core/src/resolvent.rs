//! Transfer matrices `C R(λ, A) B` and Sherman–Morrison–Woodbury resolvents.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{dense_generator, norm_one};
use crate::error::{Error, Result};
use crate::linalg::{self, SmallLu};
use crate::math;
use crate::model::{PerturbationFactors, SpectralModel};

/// Relative tolerance for an eigenvalue of the transfer matrix at 1.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-10;

/// Largest dimension accepted by the dense oracle.
pub const DENSE_LIMIT: usize = 2000;

/// `entries[i*p + j] = ⟨R(λ, A) b_j, c_i⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub lambda: Complex64,
    pub p: usize,
    pub entries: Vec<Complex64>,
}

impl TransferMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.p + j]
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(self.p, &self.entries)
    }

    /// `I - T` row-major.
    pub fn defect(&self) -> Vec<Complex64> {
        let p = self.p;
        let mut d: Vec<Complex64> = self.entries.iter().map(|z| -z).collect();
        for i in 0..p {
            d[i * p + i] += 1.0;
        }
        d
    }
}

fn build_transfer(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64, r: &[Complex64]) -> TransferMatrix {
    let p = factors.rank;
    let mut entries = vec![Complex64::new(0.0, 0.0); p * p];
    for j in 0..p {
        let rb: Vec<Complex64> = r.iter().zip(&factors.b_columns[j]).map(|(a, b)| a * b).collect();
        for i in 0..p {
            entries[i * p + j] = model.inner(&rb, &factors.c_columns[i]);
        }
    }
    TransferMatrix { lambda, p, entries }
}

pub fn transfer_matrix(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64) -> Result<TransferMatrix> {
    factors.check_model(model)?;
    let r = model.resolvent_multipliers(lambda, true)?;
    Ok(build_transfer(model, factors, lambda, &r))
}

/// Transfer matrix of the truncation, continuous at closure points (which
/// carry no factor mass).
pub fn transfer_matrix_extended(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64) -> Result<TransferMatrix> {
    factors.check_model(model)?;
    let r = model.resolvent_multipliers(lambda, false)?;
    Ok(build_transfer(model, factors, lambda, &r))
}

pub fn transfer_norm(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64) -> Result<f64> {
    Ok(transfer_matrix(model, factors, lambda)?.norm())
}

/// Prepared SMW data at one spectral parameter.
struct Smw {
    r: Vec<Complex64>,
    lu: SmallLu,
}

fn smw_prepare(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64, strict: bool) -> Result<Smw> {
    factors.check_model(model)?;
    let r = model.resolvent_multipliers(lambda, strict)?;
    let t = build_transfer(model, factors, lambda, &r);
    for mu in linalg::eigenvalues(t.p, &t.entries) {
        let dist = (mu - 1.0).norm();
        if dist <= UNIT_EIGENVALUE_TOL * mu.norm().max(1.0) {
            return Err(Error::NearPerturbedSpectrum { lambda, distance: dist });
        }
    }
    let lu = SmallLu::new(t.p, t.defect()).map_err(|_| Error::NearPerturbedSpectrum { lambda, distance: 0.0 })?;
    Ok(Smw { r, lu })
}

impl Smw {
    fn apply(&self, model: &SpectralModel, factors: &PerturbationFactors, x: &[Complex64]) -> Vec<Complex64> {
        let y: Vec<Complex64> = self.r.iter().zip(x).map(|(a, b)| a * b).collect();
        let u: Vec<Complex64> = factors.c_columns.iter().map(|c| model.inner(&y, c)).collect();
        let v = self.lu.solve(&u);
        let mut out = y;
        for (vj, b) in v.iter().zip(&factors.b_columns) {
            for ((o, rk), bk) in out.iter_mut().zip(&self.r).zip(b) {
                *o += rk * bk * vj;
            }
        }
        out
    }

    fn apply_adjoint(&self, model: &SpectralModel, factors: &PerturbationFactors, x: &[Complex64]) -> Vec<Complex64> {
        let y: Vec<Complex64> = self.r.iter().zip(x).map(|(a, b)| a.conj() * b).collect();
        let u: Vec<Complex64> = factors.b_columns.iter().map(|b| model.inner(&y, b)).collect();
        let v = self.lu.solve_adjoint(&u);
        let mut out = y;
        for (vj, c) in v.iter().zip(&factors.c_columns) {
            for ((o, rk), ck) in out.iter_mut().zip(&self.r).zip(c) {
                *o += rk.conj() * ck * vj;
            }
        }
        out
    }
}

/// `R(λ, A + BC) x` by Sherman–Morrison–Woodbury.
pub fn perturbed_resolvent_apply(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    lambda: Complex64,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    model.check_len(x)?;
    Ok(smw_prepare(model, factors, lambda, true)?.apply(model, factors, x))
}

/// `R(λ, A + BC)* x` in the weighted inner product.
pub fn perturbed_resolvent_adjoint_apply(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    lambda: Complex64,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    model.check_len(x)?;
    Ok(smw_prepare(model, factors, lambda, true)?.apply_adjoint(model, factors, x))
}

/// Both applications with shared setup, on the truncation only (closure
/// points are not rejected).
pub struct PerturbedResolvent<'a> {
    model: &'a SpectralModel,
    factors: &'a PerturbationFactors,
    smw: Smw,
}

impl<'a> PerturbedResolvent<'a> {
    pub fn new(model: &'a SpectralModel, factors: &'a PerturbationFactors, lambda: Complex64, strict: bool) -> Result<Self> {
        Ok(PerturbedResolvent { model, factors, smw: smw_prepare(model, factors, lambda, strict)? })
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.smw.apply(self.model, self.factors, x)
    }

    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.smw.apply_adjoint(self.model, self.factors, x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `max(truncated, lost_part)`.
    pub value: f64,
    /// Power-iteration norm of the truncated perturbed resolvent.
    pub truncated: f64,
    /// `1/dist(λ, spectrum lost to truncation)`, 0 if none.
    pub lost_part: f64,
    pub iterations: usize,
    /// When false, `truncated` is only a lower bound.
    pub converged: bool,
}

/// Power iteration for the operator norm of a map given by its action and
/// adjoint action in the weighted inner product. Returns `(norm, iters, converged)`.
pub fn power_norm<F, G>(model: &SpectralModel, apply: F, adjoint: G, tol: f64, max_iter: usize) -> (f64, usize, bool)
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = model.len();
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let mut v = normalized(model, ones);
    let mut restarted = false;
    let mut est = 0.0f64;
    let mut best = 0.0f64;
    for it in 1..=max_iter {
        let y = apply(&v);
        let s = model.norm(&y);
        best = best.max(s);
        let z = adjoint(&y);
        let zn = model.norm(&z);
        if !(zn > 1e-300) || !zn.is_finite() {
            if restarted || n == 1 {
                return (best, it, s == 0.0 || zn.is_finite());
            }
            restarted = true;
            v = normalized(model, alternating_orthogonal(model, &v));
            continue;
        }
        if it > 1 && (s - est).abs() <= tol * s {
            return (best, it, true);
        }
        est = s;
        v = z.into_iter().map(|c| c / zn).collect();
    }
    (best, max_iter, false)
}

fn normalized(model: &SpectralModel, v: Vec<Complex64>) -> Vec<Complex64> {
    let n = model.norm(&v);
    v.into_iter().map(|c| c / n).collect()
}

fn alternating_orthogonal(model: &SpectralModel, v: &[Complex64]) -> Vec<Complex64> {
    let alt: Vec<Complex64> = (0..v.len()).map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let proj = model.inner(&alt, v);
    let mut out: Vec<Complex64> = alt.iter().zip(v).map(|(a, b)| a - b * proj).collect();
    if model.norm(&out) <= 1e-12 {
        out = vec![Complex64::new(0.0, 0.0); v.len()];
        out[0] = Complex64::new(1.0, 0.0);
    }
    out
}

/// `‖R(λ, A + BC)‖` on the truncation, combined with the exact norm on the
/// spectrum lost to truncation.
pub fn perturbed_resolvent_norm(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    lambda: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<NormEstimate> {
    model.check_resolvent_point(lambda)?;
    let (truncated, iterations, converged) = if factors.is_zero() {
        // normal truncation: the norm is the largest multiplier
        (1.0 / model.sample_distance(lambda), 0, true)
    } else {
        let pr = PerturbedResolvent::new(model, factors, lambda, true)?;
        power_norm(model, |x| pr.apply(x), |x| pr.apply_adjoint(x), tol, max_iter)
    };
    let ld = model.lost_distance(lambda);
    let lost_part = if ld.is_finite() { 1.0 / ld } else { 0.0 };
    Ok(NormEstimate { value: truncated.max(lost_part), truncated, lost_part, iterations, converged })
}

/// Dense inverse of `λ - A - BC` for testing the SMW path.
pub fn dense_resolvent_oracle(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64) -> Result<DMatrix<Complex64>> {
    let n = model.len();
    if n > DENSE_LIMIT {
        return Err(Error::InvalidArgument(alloc::format!("dense oracle limited to N <= {DENSE_LIMIT}, got {n}")));
    }
    factors.check_model(model)?;
    let mut m = -dense_generator(model, Some(factors));
    for j in 0..n {
        m[(j, j)] += lambda;
    }
    let a_norm = norm_one(&m);
    let inv = m.lu().try_inverse().ok_or(Error::NumericallySingular { condition: f64::INFINITY })?;
    let cond = a_norm * norm_one(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::NumericallySingular { condition: cond });
    }
    Ok(inv)
}

/// Operator norm of `(I - T)^{-1}` for a transfer matrix.
pub fn defect_inverse_norm(t: &TransferMatrix) -> Result<f64> {
    let lu = SmallLu::new(t.p, t.defect())?;
    Ok(linalg::spectral_norm(t.p, &lu.inverse()))
}

/// `‖R(λ,A) B‖ · ‖C R(λ,A)‖` on the truncation.
pub fn split_product_norm(model: &SpectralModel, factors: &PerturbationFactors, lambda: Complex64) -> Result<f64> {
    let r = model.resolvent_multipliers(lambda, false)?;
    let rb: Vec<Vec<Complex64>> = factors.b_columns.iter().map(|b| r.iter().zip(b).map(|(x, y)| x * y).collect()).collect();
    let rc: Vec<Vec<Complex64>> = factors.c_columns.iter().map(|c| r.iter().zip(c).map(|(x, y)| x.conj() * y).collect()).collect();
    let nb = linalg::column_operator_norm(&model.weights, &rb);
    let nc = linalg::column_operator_norm(&model.weights, &rc);
    Ok(nb * nc)
}

/// Euclidean `‖a - b‖ / ‖b‖`.
pub fn relative_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    math::sqrt(num) / math::sqrt(den).max(f64::MIN_POSITIVE)
}
