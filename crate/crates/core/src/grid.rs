//! Sampling grids for frequency and half-plane scans.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n).map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64)).collect(),
    }
}

/// `n` points from `a` to `b` (both > 0), equally spaced in log scale.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (math::ln(a), math::ln(b));
    linspace(la, lb, n).into_iter().map(math::exp).collect()
}

/// Polar grid of the half-disk `{0 < |λ - iω| ≤ ε, Re λ ≥ 0}` with log-spaced radii.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGridSpec {
    pub r_min: f64,
    pub n_radii: usize,
    pub n_angles: usize,
}

impl Default for PolarGridSpec {
    fn default() -> Self {
        PolarGridSpec { r_min: 1e-8, n_radii: 33, n_angles: 17 }
    }
}

impl PolarGridSpec {
    pub fn points(&self, omega: f64, eps: f64) -> Vec<Complex64> {
        let center = Complex64::new(0.0, omega);
        let radii = logspace(self.r_min.min(eps), eps, self.n_radii);
        let angles = linspace(-PI / 2.0, PI / 2.0, self.n_angles.max(2));
        let mut out = Vec::with_capacity(radii.len() * angles.len());
        for &r in &radii {
            for &t in &angles {
                out.push(center + Complex64::new(r * math::cos(t), r * math::sin(t)));
            }
        }
        out
    }

    pub fn refined(&self) -> Self {
        PolarGridSpec { r_min: self.r_min, n_radii: 2 * self.n_radii - 1, n_angles: 2 * self.n_angles - 1 }
    }
}

/// Rectangle `[0, re_max] × [-im_half, im_half]` of the closed right half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub re_max: f64,
    pub im_half: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { re_max: 10.0, im_half: 10.0, n_re: 41, n_im: 81 }
    }
}

impl WindowSpec {
    pub fn points(&self) -> Vec<Complex64> {
        let res = linspace(0.0, self.re_max, self.n_re);
        let ims = linspace(-self.im_half, self.im_half, self.n_im);
        let mut out = Vec::with_capacity(res.len() * ims.len());
        for &x in &res {
            for &y in &ims {
                out.push(Complex64::new(x, y));
            }
        }
        out
    }

    pub fn refined(&self) -> Self {
        WindowSpec { n_re: 2 * self.n_re - 1, n_im: 2 * self.n_im - 1, ..*self }
    }
}

/// Order-preserving map, parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
