use alloc::string::String;
use core::fmt;

use num_complex::Complex64;

use crate::fractional::Side;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// `λ` coincides with a spectral sample, a closure point, or lies in the
    /// continuum part of the spectrum.
    Singular { point: Complex64, reason: &'static str },
    /// The transfer matrix has an eigenvalue within tolerance of 1.
    NearPerturbedSpectrum { lambda: Complex64, distance: f64 },
    InvalidModel(String),
    InvalidArgument(String),
    DimensionMismatch { expected: usize, found: usize },
    /// A fractionally scaled factor column has no finite (or no stable)
    /// weighted norm.
    OutsideFractionalDomain { side: Side, column: usize },
    ProfileNotPolynomial { alpha_max: f64 },
    NumericallySingular { condition: f64 },
    Uncertifiable(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Singular { point, reason } => {
                write!(f, "singular point {}{:+}i: {}", point.re, point.im, reason)
            }
            Error::NearPerturbedSpectrum { lambda, distance } => write!(
                f,
                "λ = {}{:+}i may belong to σ(A+BC): transfer eigenvalue within {:e} of 1",
                lambda.re, lambda.im, distance
            ),
            Error::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::OutsideFractionalDomain { side, column } => {
                write!(f, "{side:?} column {column} is outside the fractional domain")
            }
            Error::ProfileNotPolynomial { alpha_max } => write!(
                f,
                "profile not polynomial: no bounded exponent on the ladder up to {alpha_max}"
            ),
            Error::NumericallySingular { condition } => {
                write!(f, "numerically singular matrix (condition estimate {condition:e})")
            }
            Error::Uncertifiable(msg) => write!(f, "uncertifiable model: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
