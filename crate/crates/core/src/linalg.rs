//! Small dense helpers: weighted inner products, p×p solves and Gram norms.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// `⟨x, y⟩_w = Σ w_j x_j conj(y_j)`.
pub fn weighted_inner(w: &[f64], x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert!(w.len() == x.len() && x.len() == y.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for ((wi, xi), yi) in w.iter().zip(x).zip(y) {
        acc += *xi * yi.conj() * *wi;
    }
    acc
}

pub fn weighted_norm_sqr(w: &[f64], x: &[Complex64]) -> f64 {
    w.iter().zip(x).map(|(wi, xi)| wi * xi.norm_sqr()).sum()
}

pub fn weighted_norm(w: &[f64], x: &[Complex64]) -> f64 {
    math::sqrt(weighted_norm_sqr(w, x))
}

/// Largest eigenvalue of a Hermitian p×p matrix stored row-major.
pub fn hermitian_top_eigenvalue(p: usize, entries: &[Complex64]) -> f64 {
    if p == 1 {
        return entries[0].re;
    }
    let m = DMatrix::from_row_slice(p, p, entries);
    let eig = nalgebra::SymmetricEigen::new(m);
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Operator norm of the map `C^p → X`, `e_j ↦ cols[j]`, in the weighted norm.
pub fn column_operator_norm(w: &[f64], cols: &[Vec<Complex64>]) -> f64 {
    let p = cols.len();
    if p == 0 {
        return 0.0;
    }
    if p == 1 {
        return weighted_norm(w, &cols[0]);
    }
    let mut gram = vec![Complex64::new(0.0, 0.0); p * p];
    for i in 0..p {
        for j in i..p {
            let g = weighted_inner(w, &cols[j], &cols[i]);
            gram[i * p + j] = g;
            gram[j * p + i] = g.conj();
        }
    }
    math::sqrt(hermitian_top_eigenvalue(p, &gram).max(0.0))
}

/// Largest singular value of a p×p matrix stored row-major.
pub fn spectral_norm(p: usize, entries: &[Complex64]) -> f64 {
    if p == 1 {
        return entries[0].norm();
    }
    let mut gram = vec![Complex64::new(0.0, 0.0); p * p];
    for i in 0..p {
        for j in 0..p {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..p {
                acc += entries[k * p + i].conj() * entries[k * p + j];
            }
            gram[i * p + j] = acc;
        }
    }
    math::sqrt(hermitian_top_eigenvalue(p, &gram).max(0.0))
}

/// Eigenvalues of a general p×p complex matrix stored row-major.
pub fn eigenvalues(p: usize, entries: &[Complex64]) -> Vec<Complex64> {
    if p == 1 {
        return vec![entries[0]];
    }
    let m = DMatrix::from_row_slice(p, p, entries);
    let schur = nalgebra::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..p).map(|i| t[(i, i)]).collect()
}

/// LU factorisation with partial pivoting of a small dense matrix.
#[derive(Clone, Debug)]
pub struct SmallLu {
    p: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl SmallLu {
    pub fn new(p: usize, mut a: Vec<Complex64>) -> Result<Self> {
        if a.len() != p * p {
            return Err(Error::DimensionMismatch { expected: p * p, found: a.len() });
        }
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..p).collect();
        for k in 0..p {
            let mut piv = k;
            let mut best = a[k * p + k].norm();
            for i in (k + 1)..p {
                let v = a[i * p + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best <= 1e-300 || best <= scale * 1e-15 {
                return Err(Error::NumericallySingular { condition: f64::INFINITY });
            }
            if piv != k {
                for j in 0..p {
                    a.swap(k * p + j, piv * p + j);
                }
                perm.swap(k, piv);
            }
            let d = a[k * p + k];
            for i in (k + 1)..p {
                let f = a[i * p + k] / d;
                a[i * p + k] = f;
                for j in (k + 1)..p {
                    let u = a[k * p + j];
                    a[i * p + j] -= f * u;
                }
            }
        }
        Ok(SmallLu { p, lu: a, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let p = self.p;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..p {
            for k in 0..i {
                let l = self.lu[i * p + k];
                let xk = x[k];
                x[i] -= l * xk;
            }
        }
        for i in (0..p).rev() {
            for k in (i + 1)..p {
                let u = self.lu[i * p + k];
                let xk = x[k];
                x[i] -= u * xk;
            }
            x[i] /= self.lu[i * p + i];
        }
        x
    }

    /// Solve `Aᴴ x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let p = self.p;
        // With P A = L U we have Aᴴ = Uᴴ Lᴴ P.
        let mut y = b.to_vec();
        for i in 0..p {
            for k in 0..i {
                let u = self.lu[k * p + i].conj();
                let yk = y[k];
                y[i] -= u * yk;
            }
            y[i] /= self.lu[i * p + i].conj();
        }
        for i in (0..p).rev() {
            for k in (i + 1)..p {
                let l = self.lu[k * p + i].conj();
                let yk = y[k];
                y[i] -= l * yk;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); p];
        for (row, &orig) in self.perm.iter().enumerate() {
            x[orig] = y[row];
        }
        x
    }

    /// Dense inverse, columns obtained by solving against unit vectors.
    pub fn inverse(&self) -> Vec<Complex64> {
        let p = self.p;
        let mut inv = vec![Complex64::new(0.0, 0.0); p * p];
        let mut e = vec![Complex64::new(0.0, 0.0); p];
        for j in 0..p {
            e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..p {
                inv[i * p + j] = col[i];
            }
        }
        inv
    }
}
