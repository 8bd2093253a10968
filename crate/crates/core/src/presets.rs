//! Ready-made models, factors and certificates for the worked examples.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::certificate::{compose_certificate, direct_m2, estimate_resolvent_profile, scale_to_budget, CertifyOptions, ProfileScan, RobustnessCertificate};
use crate::error::Result;
use crate::fractional::{positive_graph_norm, Side};
use crate::grid::logspace;
use crate::math;
use crate::model::{build_diagonal_model, build_disk_model, DiagonalRule, PerturbationFactors, SpectralModel};

/// Analytic bound `sup_λ ‖(-A)² R(λ, A)‖ ≤ 8` for the unit disk centred at `-1`.
pub const DISK_ANALYTIC_M1: f64 = 8.0;
pub const DISK_C: f64 = 0.8;
pub const DISK_NODES: (usize, usize) = (16, 32);

/// Multiplication by `μ` on the closed disk `|μ + 1| ≤ 1`.
pub fn disk_model(n_radial: usize, n_angular: usize) -> Result<SpectralModel> {
    build_disk_model(Complex64::new(-1.0, 0.0), 1.0, n_radial, n_angular)
}

/// Certificate for the disk with `β = γ = 1`, analytic `M₁` and the direct `M₂`.
pub fn disk_certificate(model: &SpectralModel, c: f64) -> Result<RobustnessCertificate> {
    let profile = estimate_resolvent_profile(model, &ProfileScan::default())?;
    let m2 = direct_m2(model, &profile, 4001, 257)?;
    let opts = CertifyOptions { m1_override: Some(DISK_ANALYTIC_M1), m2_override: Some(m2), moment_constant: 1.0 };
    compose_certificate(&profile, 1.0, 1.0, c, &opts)
}

/// `b = c = s·μ`, i.e. `BCx = s² ⟨x, μ⟩ μ`.
pub fn disk_monomial_factors(model: &SpectralModel, s: f64) -> Result<PerturbationFactors> {
    let b: Vec<Complex64> = model.eigenvalues.iter().map(|m| m * s).collect();
    PerturbationFactors::rank_one(b.clone(), b)
}

/// `λ_k = -1/k`, `k = 1..n`.
pub fn reciprocal_model(n: usize) -> Result<SpectralModel> {
    build_diagonal_model(&DiagonalRule::NegReciprocal, n)
}

/// `λ_k = -1/k + ik`, `k = 1..n`.
pub fn oscillator_model(n: usize) -> Result<SpectralModel> {
    build_diagonal_model(&DiagonalRule::DampedOscillator, n)
}

/// Certificate for `λ_k = -1/k` with `β = γ = 1/2` and the generic constants.
pub fn reciprocal_certificate(model: &SpectralModel, c: f64) -> Result<RobustnessCertificate> {
    let profile = estimate_resolvent_profile(model, &ProfileScan::default())?;
    compose_certificate(&profile, 0.5, 0.5, c, &CertifyOptions::default())
}

/// `b_k = c_k = k^{-p}` (unscaled).
pub fn power_law_factors(n: usize, p: f64) -> Result<PerturbationFactors> {
    let b: Vec<Complex64> = (1..=n).map(|k| Complex64::new(math::powf(k as f64, -p), 0.0)).collect();
    PerturbationFactors::rank_one(b.clone(), b)
}

/// Rank-one `k^{-3/2}` factors scaled so every budgeted norm is `fraction·δ`.
pub fn budget_factors(model: &SpectralModel, cert: &RobustnessCertificate, fraction: f64) -> Result<PerturbationFactors> {
    scale_to_budget(model, &power_law_factors(model.len(), 1.5)?, cert, fraction)
}

/// Rank-one `k^{-3/2}` factors with `‖(-A)^β B‖ = ‖(-A*)^γ C*‖ = level`.
pub fn positive_budget_factors(model: &SpectralModel, beta: f64, gamma: f64, level: f64) -> Result<PerturbationFactors> {
    let f = power_law_factors(model.len(), 1.5)?;
    let nb = positive_graph_norm(model, &f, beta, Side::B)?;
    let nc = positive_graph_norm(model, &f, gamma, Side::C)?;
    Ok(f.scaled(level / nb, level / nc))
}

/// `b = c = 2e₁`: moves `-1` to `3`.
pub fn oversized_factors(n: usize) -> Result<PerturbationFactors> {
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[0] = Complex64::new(2.0, 0.0);
    PerturbationFactors::rank_one(b.clone(), b)
}

/// Times on which `‖T(t)(-A)^{-1}‖ ≈ 1/(e t)` for the oscillator truncated at `n`.
pub fn decay_window(n: usize, count: usize) -> Vec<f64> {
    let top = (n as f64 / 2.0).min(200.0);
    logspace(top / 10.0, top, count)
}
