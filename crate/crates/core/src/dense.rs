//! Dense matrices of truncated generators, for oracles and time stepping.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::model::{PerturbationFactors, SpectralModel};

/// Matrix of `A + BC` in model coordinates: `diag(λ) + Σ_j b_j (w ∘ c_j)ᴴ`.
pub fn dense_generator(model: &SpectralModel, factors: Option<&PerturbationFactors>) -> DMatrix<Complex64> {
    let n = model.len();
    let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&model.eigenvalues));
    if let Some(f) = factors {
        for (b, c) in f.b_columns.iter().zip(&f.c_columns) {
            for col in 0..n {
                let cw = c[col].conj() * model.weights[col];
                if cw == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for row in 0..n {
                    m[(row, col)] += b[row] * cw;
                }
            }
        }
    }
    m
}

/// Induced 1-norm (max column sum).
pub fn norm_one(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn mat_vec(m: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    let v = m * DVector::from_column_slice(x);
    v.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_diagonal_model, DiagonalRule};
    use alloc::vec;

    #[test]
    fn generator_matches_factor_action() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 4).unwrap();
        let b = vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, 0.0), Complex64::new(-0.3, 0.0), Complex64::new(0.1, 0.1)];
        let c = vec![Complex64::new(0.2, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.4, 0.0), Complex64::new(0.0, 0.0)];
        let f = PerturbationFactors::rank_one(b, c).unwrap();
        let g = dense_generator(&m, Some(&f));
        let x = vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 0.0)];
        let y = mat_vec(&g, &x);
        let bc = f.apply(&m, &x);
        for j in 0..4 {
            let expect = m.eigenvalues[j] * x[j] + bc[j];
            assert!((y[j] - expect).norm() < 1e-14);
        }
    }
}
