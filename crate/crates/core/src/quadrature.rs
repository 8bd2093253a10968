//! Gauss–Legendre rules, adaptive Gauss–Kronrod and real-line integrals.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::math;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = math::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // One more derivative at the converged node.
        let (mut p0, mut p1) = (1.0, 0.0);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        if (z * z - 1.0).abs() > 0.0 {
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// 15-point Kronrod estimate and the |K15 - G7| error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut peak = fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs(), peak)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Tail cut: integrate outward until the integrand drops below this
    /// fraction of its observed peak.
    pub tail_fraction: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-300, rel_tol: 1e-9, max_intervals: 4000, tail_fraction: 1e-14 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Adaptive Gauss–Kronrod over a list of consecutive breakpoints.
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, breaks: &[f64], opts: &QuadOptions) -> QuadResult {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut evals = 0;
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b <= a {
            continue;
        }
        let (value, error, _) = gk15(f, a, b);
        evals += 15;
        pieces.push(Piece { a, b, value, error });
    }
    let mut converged = false;
    loop {
        let total = pairwise_sum(&pieces.iter().map(|p| p.value).collect::<Vec<_>>());
        let err: f64 = pieces.iter().map(|p| p.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            converged = true;
            break;
        }
        if pieces.len() >= opts.max_intervals {
            break;
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, p)| if p.error > acc.1 { (i, p.error) } else { acc });
        let worst = pieces[idx];
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            break;
        }
        let (v1, e1, _) = gk15(f, worst.a, mid);
        let (v2, e2, _) = gk15(f, mid, worst.b);
        evals += 30;
        pieces[idx] = Piece { a: worst.a, b: mid, value: v1, error: e1 };
        pieces.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
    }
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = pairwise_sum(&pieces.iter().map(|p| p.value).collect::<Vec<_>>());
    let error = pieces.iter().map(|p| p.error).sum();
    QuadResult { value, error, evaluations: evals, converged }
}

/// `∫_{-∞}^{∞} f(η) dη` for a nonnegative integrand with algebraic tails.
///
/// The integration range grows geometrically from `scale` around `center`
/// until `f` falls below `tail_fraction` times the largest value seen; the
/// geometric points double as breakpoints so narrow peaks are resolved.
/// `hints` are extra breakpoints (peak locations) inside the range.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(
    f: &mut F,
    center: f64,
    scale: f64,
    hints: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let mut peak = f(center).abs();
    for &h in hints {
        peak = peak.max(f(h).abs());
    }
    let mut offsets = vec![0.0];
    let mut d = scale * 1e-3;
    let mut converged_tail = false;
    for _ in 0..200 {
        let lo = f(center - d).abs();
        let hi = f(center + d).abs();
        peak = peak.max(lo).max(hi);
        offsets.push(d);
        let beyond_hints = hints.iter().all(|&h| (h - center).abs() < d);
        if lo.max(hi) <= opts.tail_fraction * peak && beyond_hints && d >= scale {
            converged_tail = true;
            break;
        }
        d *= 2.0;
    }
    let mut breaks: Vec<f64> = Vec::with_capacity(2 * offsets.len() + hints.len());
    for &o in offsets.iter().rev() {
        breaks.push(center - o);
    }
    for &o in offsets.iter().skip(1) {
        breaks.push(center + o);
    }
    let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
    for &h in hints {
        if h > lo && h < hi {
            breaks.push(h);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut res = adaptive(f, &breaks, opts);
    res.converged &= converged_tail;
    res
}

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
