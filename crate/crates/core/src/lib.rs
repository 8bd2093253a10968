//! Robustness certificates for strongly and polynomially stable semigroups
//! under finite-rank perturbations `A + BC` of the generator.
//!
//! Generators are normal operators represented by a weighted sample of their
//! spectrum. On top of that representation the crate provides exact resolvent
//! application, fractional powers `(iω - A)^{-β}`, transfer matrices
//! `C R(λ, A) B` with Sherman–Morrison–Woodbury updates, the constant chain
//! that yields a perturbation budget `δ`, and numerical checks of every
//! conclusion a certificate promises.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature distributes grid scans over a rayon pool;
//! results are always merged in grid order.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod certificate;
pub mod dense;
pub mod expm;
pub mod fractional;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod resolvent;
pub mod verification;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use certificate::{
    bound_delta1, bound_delta2, bound_m0, bound_m1, bound_m2, check_budget, compose_certificate,
    estimate_resolvent_profile, BudgetCheck, CertifyOptions, ProfileScan, ResolventProfile,
    RobustnessCertificate,
};
pub use fractional::{
    apply_fractional_resolvent_power, apply_generator_power, check_moment_inequality, graph_norm,
    positive_graph_norm, MomentDirection, Side,
};
pub use model::{DiagonalRule, DiskRegion, ModelKind, PerturbationFactors, SpectralModel};
pub use resolvent::{
    dense_resolvent_oracle, perturbed_resolvent_adjoint_apply, perturbed_resolvent_apply,
    perturbed_resolvent_norm, relative_deviation, transfer_matrix, transfer_norm, NormEstimate, TransferMatrix,
};
pub use verification::{CheckRecord, Verdict, VerificationReport};
