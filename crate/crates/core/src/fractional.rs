//! Fractional powers `(iω - A)^{-β}` and `(-iω - A*)^{-γ}` of normal generators.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::math;
use crate::model::{PerturbationFactors, SpectralModel};

/// Which factor a fractional power acts on: `B` uses `(iω - A)`, `C` uses
/// `(-iω - A*)` acting on `C*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    B,
    C,
}

fn base(omega: f64, lambda: Complex64, side: Side) -> Complex64 {
    match side {
        Side::B => Complex64::new(0.0, omega) - lambda,
        Side::C => Complex64::new(0.0, -omega) - lambda.conj(),
    }
}

/// Principal-branch power `z^s`; the bases here lie in the closed right
/// half-plane minus the origin.
fn cpow(z: Complex64, s: f64) -> Complex64 {
    if s == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = z.norm();
    let th = z.arg();
    Complex64::from_polar(math::powf(r, s), th * s)
}

/// Entrywise multipliers of `(iω - A)^{-β}` (or the C-side analogue).
/// Negative `beta` gives positive powers; callers validate the sign.
pub fn fractional_multipliers(model: &SpectralModel, omega: f64, beta: f64, side: Side) -> Result<Vec<Complex64>> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument("fractional exponent must be finite".into()));
    }
    let mut out = Vec::with_capacity(model.len());
    for &l in &model.eigenvalues {
        let z = base(omega, l, side);
        if z.norm() == 0.0 {
            return Err(Error::Singular { point: Complex64::new(0.0, omega), reason: "sample at the resonance point" });
        }
        out.push(cpow(z, -beta));
    }
    Ok(out)
}

pub fn apply_fractional_resolvent_power(
    model: &SpectralModel,
    omega: f64,
    beta: f64,
    x: &[Complex64],
    side: Side,
) -> Result<Vec<Complex64>> {
    if beta < 0.0 {
        return Err(Error::InvalidArgument(format!("exponent {beta} must be nonnegative")));
    }
    model.check_len(x)?;
    let m = fractional_multipliers(model, omega, beta, side)?;
    Ok(m.iter().zip(x).map(|(a, b)| a * b).collect())
}

/// Positive power `(iω - A)^{β} x` (or the C-side analogue).
pub fn apply_generator_power(
    model: &SpectralModel,
    omega: f64,
    beta: f64,
    x: &[Complex64],
    side: Side,
) -> Result<Vec<Complex64>> {
    if beta < 0.0 {
        return Err(Error::InvalidArgument(format!("exponent {beta} must be nonnegative")));
    }
    model.check_len(x)?;
    let m = fractional_multipliers(model, omega, -beta, side)?;
    Ok(m.iter().zip(x).map(|(a, b)| a * b).collect())
}

fn scaled_columns_norm(model: &SpectralModel, mult: &[Complex64], cols: &[Vec<Complex64>], side: Side) -> Result<f64> {
    let scaled: Vec<Vec<Complex64>> = cols.iter().map(|c| c.iter().zip(mult).map(|(a, m)| a * m).collect()).collect();
    for (j, col) in scaled.iter().enumerate() {
        let n = model.norm(col);
        if !n.is_finite() {
            return Err(Error::OutsideFractionalDomain { side, column: j });
        }
    }
    Ok(linalg::column_operator_norm(&model.weights, &scaled))
}

/// `‖(iω - A)^{-β} B‖` or `‖(-iω - A*)^{-β} C*‖`.
pub fn graph_norm(model: &SpectralModel, factors: &PerturbationFactors, omega: f64, beta: f64, side: Side) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::InvalidArgument(format!("exponent {beta} must be nonnegative")));
    }
    factors.check_model(model)?;
    let mult = fractional_multipliers(model, omega, beta, side)?;
    let cols = match side {
        Side::B => &factors.b_columns,
        Side::C => &factors.c_columns,
    };
    scaled_columns_norm(model, &mult, cols, side)
}

/// `‖(-A)^{β} B‖` or `‖(-A*)^{β} C*‖`.
pub fn positive_graph_norm(model: &SpectralModel, factors: &PerturbationFactors, beta: f64, side: Side) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::InvalidArgument(format!("exponent {beta} must be nonnegative")));
    }
    factors.check_model(model)?;
    let mult = fractional_multipliers(model, 0.0, -beta, side)?;
    let cols = match side {
        Side::B => &factors.b_columns,
        Side::C => &factors.c_columns,
    };
    scaled_columns_norm(model, &mult, cols, side)
}

/// A norm counts as finite on the untruncated operator when one quadrature
/// refinement changes it by less than 1%.
pub fn check_refinement_stable(coarse: f64, fine: f64, side: Side, column: usize) -> Result<()> {
    let stable = coarse.is_finite() && fine.is_finite() && (fine - coarse).abs() <= 0.01 * coarse.abs().max(fine.abs());
    if stable {
        Ok(())
    } else {
        Err(Error::OutsideFractionalDomain { side, column })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentDirection {
    PositivePower,
    InversePowerB,
    InversePowerC,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub holds: bool,
}

/// Relative slack on `lhs ≤ rhs` absorbing rounding in saturated cases.
pub const MOMENT_SLACK: f64 = 1e-12;

/// `‖P^{α̃} x‖ ≤ M ‖x‖^{1-α̃/α} ‖P^{α} x‖^{α̃/α}` with `P` the chosen power
/// family and `M = 1` for normal operators.
pub fn check_moment_inequality(
    model: &SpectralModel,
    omega: f64,
    alpha_tilde: f64,
    alpha: f64,
    x: &[Complex64],
    direction: MomentDirection,
) -> Result<MomentCheck> {
    if !(alpha_tilde > 0.0 && alpha_tilde < alpha) {
        return Err(Error::InvalidArgument(format!("need 0 < {alpha_tilde} < {alpha}")));
    }
    model.check_len(x)?;
    let (sign, side) = match direction {
        MomentDirection::PositivePower => (-1.0, Side::B),
        MomentDirection::InversePowerB => (1.0, Side::B),
        MomentDirection::InversePowerC => (1.0, Side::C),
    };
    let m_small = fractional_multipliers(model, omega, sign * alpha_tilde, side)?;
    let m_big = fractional_multipliers(model, omega, sign * alpha, side)?;
    let apply = |m: &[Complex64]| -> Vec<Complex64> { m.iter().zip(x).map(|(a, b)| a * b).collect() };
    let lhs = model.norm(&apply(&m_small));
    let big = model.norm(&apply(&m_big));
    let theta = alpha_tilde / alpha;
    let constant = 1.0;
    let rhs = constant * math::powf(model.norm(x), 1.0 - theta) * math::powf(big, theta);
    Ok(MomentCheck { lhs, rhs, constant_used: constant, holds: lhs <= rhs * (1.0 + MOMENT_SLACK) })
}
