//! Matrix exponential by Padé-13 scaling and squaring, plus an
//! eigendecomposition propagator for diagonalizable generators.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dense::norm_one;
use crate::error::{Error, Result};
use crate::math;

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn scaled_sum(terms: &[(f64, &DMatrix<Complex64>)], n: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(n, n);
    for (c, m) in terms {
        out += *m * Complex64::new(*c, 0.0);
    }
    out
}

/// `exp(A)`; non-finite input gives a non-finite result rather than an error.
pub fn matrix_exp(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix exponential needs a square matrix");
    if n == 0 {
        return a.clone();
    }
    let norm = norm_one(a);
    let s = if norm > THETA_13 { math::ceil(math::log2(norm / THETA_13)).max(0.0) as i32 } else { 0 };
    let a = a * Complex64::new(math::powf(2.0, -(s as f64)), 0.0);
    let b = &PADE_13;
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let w1 = scaled_sum(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n);
    let w2 = scaled_sum(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)], n);
    let u = &a * (&a6 * w1 + w2);
    let z1 = scaled_sum(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n);
    let z2 = scaled_sum(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)], n);
    let v = &a6 * z1 + z2;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = match q.lu().solve(&p) {
        Some(r) => r,
        None => DMatrix::from_element(n, n, Complex64::new(f64::NAN, f64::NAN)),
    };
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `M = V diag(μ) V⁻¹` from a complex Schur form.
#[derive(Clone, Debug)]
pub struct EigenPropagator {
    pub eigenvalues: Vec<Complex64>,
    v: DMatrix<Complex64>,
    vinv: DMatrix<Complex64>,
    /// 1-norm condition number of the eigenvector matrix.
    pub condition: f64,
}

impl EigenPropagator {
    pub fn new(m: &DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        let scale = norm_one(m).max(f64::MIN_POSITIVE);
        let (q, t) = nalgebra::Schur::new(m.clone()).unpack();
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let small = f64::EPSILON * scale;
        for k in 0..n {
            y[(k, k)] = Complex64::new(1.0, 0.0);
            let tkk = t[(k, k)];
            for i in (0..k).rev() {
                let mut s = Complex64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    s += t[(i, j)] * y[(j, k)];
                }
                let mut d = t[(i, i)] - tkk;
                if d.norm() < small {
                    d = Complex64::new(small, 0.0);
                }
                y[(i, k)] = -s / d;
            }
            let nrm = y.column(k).norm();
            y.column_mut(k).unscale_mut(nrm);
        }
        let v = q * y;
        let vinv = v.clone().lu().try_inverse().ok_or(Error::NumericallySingular { condition: f64::INFINITY })?;
        let condition = norm_one(&v) * norm_one(&vinv);
        if !condition.is_finite() || condition > 1e12 {
            return Err(Error::NumericallySingular { condition });
        }
        let eigenvalues = (0..n).map(|i| t[(i, i)]).collect();
        Ok(EigenPropagator { eigenvalues, v, vinv, condition })
    }

    /// `f(M) x` for the diagonal multipliers `d = f(μ)`.
    pub fn apply_diag(&self, d: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let mut y = &self.vinv * DVector::from_column_slice(x);
        for (yi, di) in y.iter_mut().zip(d) {
            *yi *= *di;
        }
        (&self.v * y).iter().cloned().collect()
    }

    /// Adjoint of `f(M)` in the inner product weighted by `w`.
    pub fn apply_diag_adjoint(&self, d: &[Complex64], w: &[f64], x: &[Complex64]) -> Vec<Complex64> {
        let wx: Vec<Complex64> = x.iter().zip(w).map(|(a, b)| a * b).collect();
        let mut y = self.v.ad_mul(&DVector::from_column_slice(&wx));
        for (yi, di) in y.iter_mut().zip(d) {
            *yi *= di.conj();
        }
        let z = self.vinv.ad_mul(&y);
        z.iter().zip(w).map(|(a, b)| a / b).collect()
    }

    /// Dense `V diag(d) V⁻¹`.
    pub fn dense_diag(&self, d: &[Complex64]) -> DMatrix<Complex64> {
        let mut vd = self.v.clone();
        for (j, dj) in d.iter().enumerate() {
            for z in vd.column_mut(j).iter_mut() {
                *z *= *dj;
            }
        }
        vd * &self.vinv
    }

    pub fn propagate(&self, t: f64, x: &[Complex64]) -> Vec<Complex64> {
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|mu| (mu * t).exp()).collect();
        self.apply_diag(&d, x)
    }
}
