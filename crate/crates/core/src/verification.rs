//! Numerical checks of everything a certificate promises.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{check_budget, OmegaRegion, ResolventProfile, RobustnessCertificate};
use crate::dense::dense_generator;
use crate::error::{Error, Result};
use crate::expm::{matrix_exp, EigenPropagator};
use crate::fractional::{graph_norm, positive_graph_norm, Side};
use crate::grid::{linspace, logspace, par_map, PolarGridSpec, WindowSpec};
use crate::math;
use crate::model::{PerturbationFactors, SpectralModel};
use crate::quadrature::{integrate_real_line, QuadOptions};
use crate::resolvent::{perturbed_resolvent_norm, split_product_norm, transfer_matrix_extended, PerturbedResolvent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Grid or quadrature specification behind the measurement.
    pub spec: String,
    pub measured: f64,
    pub threshold: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl CheckRecord {
    /// Passes when `measured ≤ threshold·(1 + tolerance)`.
    pub fn at_most(name: impl Into<String>, spec: impl Into<String>, measured: f64, threshold: f64, tolerance: f64) -> Self {
        let ok = measured.is_finite() && measured <= threshold * (1.0 + tolerance);
        CheckRecord {
            name: name.into(),
            spec: spec.into(),
            measured,
            threshold: Some(threshold),
            tolerance,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    /// Passes when `measured < threshold` strictly.
    pub fn below(name: impl Into<String>, spec: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let ok = measured.is_finite() && measured < threshold;
        CheckRecord {
            name: name.into(),
            spec: spec.into(),
            measured,
            threshold: Some(threshold),
            tolerance: 0.0,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub initial_norm: f64,
    pub sup: f64,
    pub final_norm: f64,
    /// Norm exceeded `1e6·‖x‖` or overflowed.
    pub growth: bool,
    /// Matrix exponentials formed, or accepted steps of the adaptive path.
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayVerdict {
    Polynomial,
    FasterThanPolynomial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub label: String,
    pub times: Vec<f64>,
    pub envelope: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub target: f64,
    pub relative_deviation: f64,
    pub verdict: DecayVerdict,
    pub method: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
    pub trajectories: Vec<Trajectory>,
    pub decay_fits: Vec<DecayFit>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    /// Every record passed.
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| r.verdict != Verdict::Pass).collect()
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Unit vector in the weighted norm with seeded random complex entries.
pub fn random_unit_vector(model: &SpectralModel, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..model.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n = model.norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Weighted-unit vector along the first coordinate.
pub fn first_unit_vector(model: &SpectralModel) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); model.len()];
    e[0] = Complex64::new(1.0 / math::sqrt(model.weights[0]), 0.0);
    e
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferScan {
    pub max: f64,
    pub argmax: Complex64,
    pub evaluated: usize,
    pub skipped: Vec<Complex64>,
}

/// Maximum of `‖C R(λ, A) B‖` over polar grids of each `Ω_k` (including the
/// resonance point itself, as the limit of the truncation) and over a
/// window of the closed right half-plane outside them.
pub fn scan_transfer_norm(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    regions: &[OmegaRegion],
    polar: &PolarGridSpec,
    window: &WindowSpec,
) -> Result<TransferScan> {
    factors.check_model(model)?;
    let mut pts = Vec::new();
    for r in regions {
        pts.push(Complex64::new(0.0, r.omega));
        pts.extend(polar.points(r.omega, r.eps));
    }
    for z in window.points() {
        if regions.iter().all(|r| (z - Complex64::new(0.0, r.omega)).norm() > r.eps) {
            pts.push(z);
        }
    }
    let vals = par_map(&pts, |&z| transfer_matrix_extended(model, factors, z).map(|t| t.norm()));
    let mut out = TransferScan { max: 0.0, argmax: Complex64::new(0.0, 0.0), evaluated: 0, skipped: Vec::new() };
    for (z, v) in pts.iter().zip(vals) {
        match v {
            Ok(v) => {
                out.evaluated += 1;
                if v > out.max || !v.is_finite() {
                    out.max = v;
                    out.argmax = *z;
                }
            }
            Err(_) => out.skipped.push(*z),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityCheck {
    pub omega: f64,
    pub beta1: f64,
    pub gamma1: f64,
    pub product: f64,
    pub pass: bool,
}

/// `‖(iω_k - A)^{-β₁} B‖·‖(-iω_k - A*)^{-γ₁} C*‖ < 1` with `β₁ = β/α`, `γ₁ = 1 - β₁`.
pub fn check_injectivity_at_resonances(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    resonances: &[f64],
    alpha: f64,
    beta: f64,
) -> Result<Vec<InjectivityCheck>> {
    let beta1 = (beta / alpha).clamp(0.0, beta.min(1.0));
    let gamma1 = 1.0 - beta1;
    let mut out = Vec::with_capacity(resonances.len());
    for &w in resonances {
        let product = graph_norm(model, factors, w, beta1, Side::B)? * graph_norm(model, factors, w, gamma1, Side::C)?;
        out.push(InjectivityCheck { omega: w, beta1, gamma1, product, pass: product < 1.0 });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthOptions {
    pub n_radii: usize,
    pub n_off: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        GrowthOptions { n_radii: 33, n_off: 401, tol: 1e-10, max_iter: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub alpha: f64,
    /// `sup |ω-ω_k|^α ‖R(iω, A+BC)‖` over the resonance neighbourhoods.
    pub sup_near: f64,
    /// `sup ‖R(iω, A+BC)‖` on the rest of the window.
    pub sup_off: f64,
    /// Per resonance, `sup |ω-ω_k|^α ‖R(iω,A)B‖‖CR(iω,A)‖`.
    pub m_k: Vec<f64>,
    /// `M_A + M_D max_k M_k`.
    pub bound_near: f64,
    /// `M_A + M_D ‖B‖‖C‖ M_A²`.
    pub bound_off: f64,
    /// Worst ratio of the weighted norm at the smallest radius to its value at `ε_A`.
    pub blowup_ratio: f64,
    pub all_converged: bool,
    pub pass: bool,
}

pub fn check_resolvent_growth(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    profile: &ResolventProfile,
    c: f64,
    alpha: f64,
    opts: &GrowthOptions,
) -> Result<GrowthCheck> {
    factors.check_model(model)?;
    let m_d = 1.0 / (1.0 - c);
    let eps = profile.eps_a;
    let radii = logspace(profile.scan.r_min, eps, opts.n_radii);
    let mut near_pts = Vec::new();
    for (k, &w) in profile.resonances.iter().enumerate() {
        for sign in [1.0, -1.0] {
            for (i, &r) in radii.iter().enumerate() {
                near_pts.push((k, i, sign * r, w));
            }
        }
    }
    let near_vals = par_map(&near_pts, |&(_, _, off, w)| -> Result<(f64, f64, bool)> {
        let z = Complex64::new(0.0, w + off);
        let est = perturbed_resolvent_norm(model, factors, z, opts.tol, opts.max_iter)?;
        let split = split_product_norm(model, factors, z)?;
        let ra = math::powf(off.abs(), alpha);
        Ok((ra * est.value, ra * split, est.converged))
    });
    let mut sup_near: f64 = 0.0;
    let mut m_k = vec![0.0f64; profile.resonances.len()];
    let mut all_converged = true;
    let nr = radii.len();
    let mut inner_outer: Vec<(f64, f64)> = vec![(0.0, 0.0); 2 * profile.resonances.len()];
    for (&(k, i, off, _), v) in near_pts.iter().zip(near_vals) {
        let (g, split, conv) = v?;
        sup_near = sup_near.max(g);
        m_k[k] = m_k[k].max(split);
        all_converged &= conv;
        let slot = 2 * k + usize::from(off < 0.0);
        if i == 0 {
            inner_outer[slot].0 = g;
        }
        if i == nr - 1 {
            inner_outer[slot].1 = g;
        }
    }
    let blowup_ratio = inner_outer.iter().map(|(a, b)| a / b).fold(0.0, f64::max);

    let w = profile.scan.window;
    let off_pts: Vec<f64> = linspace(-w, w, opts.n_off)
        .into_iter()
        .filter(|x| profile.resonances.iter().all(|r| (x - r).abs() >= eps))
        .collect();
    let off_vals = par_map(&off_pts, |&x| perturbed_resolvent_norm(model, factors, Complex64::new(0.0, x), opts.tol, opts.max_iter));
    let mut sup_off: f64 = 0.0;
    for v in off_vals {
        let est = v?;
        sup_off = sup_off.max(est.value);
        all_converged &= est.converged;
    }
    let mk_max = m_k.iter().cloned().fold(0.0, f64::max);
    let bound_near = profile.m_a + m_d * mk_max;
    let bound_off = profile.m_a + m_d * factors.norm_b(model) * factors.norm_c(model) * profile.m_a * profile.m_a;
    let tol = 1e-9;
    let pass = sup_near.is_finite()
        && sup_off.is_finite()
        && sup_near <= bound_near * (1.0 + tol)
        && sup_off <= bound_off * (1.0 + tol);
    Ok(GrowthCheck { alpha, sup_near, sup_off, m_k, bound_near, bound_off, blowup_ratio, all_converged, pass })
}

/// Log-spaced abscissae `ξ` for the half-plane integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Default for XiGrid {
    fn default() -> Self {
        XiGrid { min: 1e-3, max: 1e3, n: 25 }
    }
}

impl XiGrid {
    pub fn points(&self) -> Vec<f64> {
        logspace(self.min, self.max, self.n)
    }

    /// Geometric midpoints of consecutive grid points.
    pub fn midpoints(&self) -> Vec<f64> {
        self.points().windows(2).map(|w| math::sqrt(w[0] * w[1])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiSample {
    pub xi: f64,
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSup {
    pub samples: Vec<XiSample>,
    /// Supremum over every evaluated abscissa, refinements included.
    pub sup: f64,
    pub argsup: f64,
    /// Supremum over the coarse grid alone.
    pub grid_sup: f64,
    /// Bisection levels spent around the maximiser after the midpoint pass.
    pub refinements: usize,
    pub converged: bool,
    /// The last refinement changed the supremum by less than 1%.
    pub stable: bool,
}

impl IntegralSup {
    pub fn verdict(&self) -> Verdict {
        if !self.converged || !self.sup.is_finite() {
            Verdict::Inconclusive
        } else if self.stable {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn peak_hints(model: &SpectralModel) -> Vec<f64> {
    let mut ims: Vec<f64> = model.eigenvalues.iter().map(|z| z.im).collect();
    ims.sort_by(f64::total_cmp);
    ims.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    if ims.len() > 64 {
        Vec::new()
    } else {
        ims
    }
}

/// `ξ ∫ f(ξ + iη) dη` for each `ξ`, where `f` may fail (recorded as
/// non-convergence).
fn xi_integrals<F>(model: &SpectralModel, xis: &[f64], quad: &QuadOptions, f: F) -> Vec<XiSample>
where
    F: Fn(Complex64) -> Option<f64> + Sync + Send,
{
    let hints = peak_hints(model);
    let scale0 = model.eigenvalues.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    par_map(xis, |&xi| {
        let mut failed = false;
        let mut g = |eta: f64| match f(Complex64::new(xi, eta)) {
            Some(v) if v.is_finite() => v,
            _ => {
                failed = true;
                0.0
            }
        };
        let r = integrate_real_line(&mut g, 0.0, xi + scale0, &hints, quad);
        XiSample { xi, value: xi * r.value, error: xi * r.error, converged: r.converged && !failed }
    })
}

const MAX_REFINEMENTS: usize = 8;

fn max_sample(samples: &[XiSample]) -> (f64, f64) {
    samples.iter().fold((0.0f64, samples.first().map_or(0.0, |s| s.xi)), |(m, a), s| if s.value > m { (s.value, s.xi) } else { (m, a) })
}

/// Coarse grid, then the midpoint pass, then log-bisection on both sides of
/// the current maximiser until one step moves the supremum by under 1%.
fn refine_sup<S>(grid: &XiGrid, sample: S) -> IntegralSup
where
    S: Fn(&[f64]) -> Vec<XiSample>,
{
    let mut samples = sample(&grid.points());
    let (grid_sup, _) = max_sample(&samples);
    samples.extend(sample(&grid.midpoints()));
    samples.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    let (mut prev, mut cur) = (grid_sup, max_sample(&samples).0);
    let mut refinements = 0;
    let close = |a: f64, b: f64| (b - a).abs() <= 0.01 * b.abs();
    while !close(prev, cur) && cur.is_finite() && refinements < MAX_REFINEMENTS {
        let (_, arg) = max_sample(&samples);
        let i = samples.iter().position(|s| s.xi == arg).unwrap_or(0);
        let mut xs = Vec::new();
        if i > 0 {
            xs.push(math::sqrt(samples[i - 1].xi * arg));
        }
        if i + 1 < samples.len() {
            xs.push(math::sqrt(arg * samples[i + 1].xi));
        }
        if xs.is_empty() {
            break;
        }
        samples.extend(sample(&xs));
        samples.sort_by(|a, b| a.xi.total_cmp(&b.xi));
        prev = cur;
        cur = max_sample(&samples).0;
        refinements += 1;
    }
    let (sup, argsup) = max_sample(&samples);
    let converged = samples.iter().all(|s| s.converged);
    IntegralSup { samples, sup, argsup, grid_sup, refinements, converged, stable: close(prev, cur) }
}

/// `ξ ∫ ‖R(ξ+iη, A+BC) x‖² dη` (or with `R*` when `adjoint`) at the given `ξ`.
pub fn gomilko_samples(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    x: &[Complex64],
    xis: &[f64],
    quad: &QuadOptions,
    adjoint: bool,
) -> Result<Vec<XiSample>> {
    factors.check_model(model)?;
    model.check_len(x)?;
    Ok(xi_integrals(model, xis, quad, |z| {
        let pr = PerturbedResolvent::new(model, factors, z, true).ok()?;
        let y = if adjoint { pr.apply_adjoint(x) } else { pr.apply(x) };
        let n = model.norm(&y);
        Some(n * n)
    }))
}

/// `sup_ξ ξ ∫ ‖R(ξ+iη, A+BC) x‖² dη` with a refinement-stability verdict.
pub fn uniform_boundedness_functional(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    x: &[Complex64],
    grid: &XiGrid,
    quad: &QuadOptions,
    adjoint: bool,
) -> Result<IntegralSup> {
    factors.check_model(model)?;
    model.check_len(x)?;
    Ok(refine_sup(grid, |xis| gomilko_samples(model, factors, x, xis, quad, adjoint).unwrap_or_default()))
}

/// `sup_ξ ξ ∫ ‖R(ξ+iη, A)B‖² ‖C R(ξ+iη, A)‖² dη`.
pub fn rbcr_integral(model: &SpectralModel, factors: &PerturbationFactors, grid: &XiGrid, quad: &QuadOptions) -> Result<IntegralSup> {
    factors.check_model(model)?;
    let f = |z: Complex64| split_product_norm(model, factors, z).ok().map(|v| v * v);
    Ok(refine_sup(grid, |xis| xi_integrals(model, xis, quad, f)))
}

/// `‖e^{t(A+BC)} x‖` on a nondecreasing time grid, by Padé scaling and
/// squaring with one exponential per distinct time increment.
pub fn simulate_semigroup(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    x: &[Complex64],
    times: &[f64],
) -> Result<Trajectory> {
    factors.check_model(model)?;
    model.check_len(x)?;
    if model.len() > crate::resolvent::DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!("dense simulation limited to N <= {}", crate::resolvent::DENSE_LIMIT)));
    }
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be nonnegative and nondecreasing".into()));
    }
    let gen = dense_generator(model, Some(factors));
    let mut cache: Vec<(f64, DMatrix<Complex64>)> = Vec::new();
    let mut expm_evaluations = 0;
    let mut step = |dt: f64, v: &DVector<Complex64>| -> DVector<Complex64> {
        if dt == 0.0 {
            return v.clone();
        }
        let idx = cache.iter().position(|(d, _)| (d - dt).abs() <= 1e-12 * dt);
        let idx = match idx {
            Some(i) => i,
            None => {
                cache.push((dt, matrix_exp(&(&gen * Complex64::new(dt, 0.0)))));
                expm_evaluations += 1;
                cache.len() - 1
            }
        };
        &cache[idx].1 * v
    };
    let initial_norm = model.norm(x);
    let mut state = DVector::from_column_slice(x);
    let mut t_prev = 0.0;
    let mut norms = Vec::with_capacity(times.len());
    let mut growth = false;
    for &t in times {
        if state.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            state = step(t - t_prev, &state);
        }
        t_prev = t;
        let v: Vec<Complex64> = state.iter().cloned().collect();
        let n = model.norm(&v);
        if !n.is_finite() || n > 1e6 * initial_norm.max(f64::MIN_POSITIVE) {
            growth = true;
        }
        norms.push(n);
    }
    let sup = norms.iter().cloned().fold(0.0, |a: f64, b| if b.is_finite() { a.max(b) } else { f64::INFINITY });
    let final_norm = *norms.last().unwrap();
    Ok(Trajectory { times: times.to_vec(), norms, initial_norm, sup, final_norm, growth, steps: expm_evaluations })
}

/// Matrix-free `‖e^{t(A+BC)} x‖` by Dormand–Prince 5(4) with error control
/// in the weighted norm. No size limit.
pub fn simulate_semigroup_adaptive(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    x: &[Complex64],
    times: &[f64],
    rel_tol: f64,
) -> Result<Trajectory> {
    factors.check_model(model)?;
    model.check_len(x)?;
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be nonnegative and nondecreasing".into()));
    }
    let f = |y: &[Complex64]| -> Vec<Complex64> {
        let mut out = factors.apply(model, y);
        for ((o, l), yi) in out.iter_mut().zip(&model.eigenvalues).zip(y) {
            *o += l * yi;
        }
        out
    };
    const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // fifth-order weights are the last row of A; E = b5 - b4
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let spread = model.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max) + factors.norm_b(model) * factors.norm_c(model);
    let mut h = 0.1 / spread.max(1e-300);
    let initial_norm = model.norm(x);
    let mut y = x.to_vec();
    let mut t = 0.0;
    let mut norms = Vec::with_capacity(times.len());
    let mut growth = false;
    let mut k1 = f(&y);
    let mut steps = 0usize;
    for &target in times {
        while t < target && !growth {
            let hs = h.min(target - t);
            let mut ks: Vec<Vec<Complex64>> = vec![k1.clone()];
            for row in A.iter() {
                let stage: Vec<Complex64> = (0..y.len())
                    .map(|i| y[i] + ks.iter().zip(row.iter()).map(|(k, a)| k[i] * (a * hs)).sum::<Complex64>())
                    .collect();
                ks.push(f(&stage));
            }
            // ks[6] was evaluated at the fifth-order solution
            let y5: Vec<Complex64> = (0..y.len())
                .map(|i| y[i] + ks.iter().zip(A[5].iter()).map(|(k, a)| k[i] * (a * hs)).sum::<Complex64>())
                .collect();
            let err: Vec<Complex64> = (0..y.len()).map(|i| ks.iter().zip(E.iter()).map(|(k, e)| k[i] * (e * hs)).sum()).collect();
            let scale = rel_tol * model.norm(&y).max(model.norm(&y5)).max(1e-300);
            let ratio = model.norm(&err) / scale;
            if ratio <= 1.0 || hs < 1e-14 * t.max(1.0) {
                t += hs;
                y = y5;
                k1 = ks.pop().unwrap();
                steps += 1;
                let n = model.norm(&y);
                if !n.is_finite() || n > 1e6 * initial_norm.max(f64::MIN_POSITIVE) {
                    growth = true;
                }
            }
            let fac = if ratio > 0.0 { 0.9 * math::powf(ratio, -0.2) } else { 5.0 };
            h = hs * fac.clamp(0.2, 5.0);
        }
        norms.push(model.norm(&y));
    }
    let sup = norms.iter().cloned().fold(0.0, |a: f64, b| if b.is_finite() { a.max(b) } else { f64::INFINITY });
    let final_norm = *norms.last().unwrap();
    Ok(Trajectory { times: times.to_vec(), norms, initial_norm, sup, final_norm, growth, steps })
}

/// Time by which the slowest retained mode has decayed by `e^{-multiple}`.
pub fn decay_horizon(model: &SpectralModel, multiple: f64) -> f64 {
    multiple / model.slowest_mode().re.abs()
}

/// Operator norm of `m` in the weighted inner product: `‖W^{1/2} m W^{-1/2}‖₂`.
pub fn weighted_operator_norm(model: &SpectralModel, m: &DMatrix<Complex64>) -> f64 {
    let sw: Vec<f64> = model.weights.iter().map(|w| math::sqrt(*w)).collect();
    let s = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (sw[i] / sw[j]));
    s.singular_values().iter().cloned().fold(0.0, f64::max)
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the exponent of `‖T(t)(-G)^{-1}‖ ~ t^{s}` with `G = A + BC`.
pub fn fit_polynomial_decay(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    times: &[f64],
    target: f64,
    label: &str,
) -> Result<DecayFit> {
    factors.check_model(model)?;
    if !model.imaginary_axis_points().is_empty() {
        return Err(Error::InvalidArgument("decay fit needs a spectrum disjoint from the imaginary axis".into()));
    }
    if times.len() < 6 || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("decay fit needs at least 6 increasing positive times".into()));
    }
    let (envelope, method) = if factors.is_zero() {
        let env: Vec<f64> = times
            .iter()
            .map(|&t| model.eigenvalues.iter().map(|l| (l * t).exp().norm() / l.norm()).fold(0.0, f64::max))
            .collect();
        (env, String::from("exact spectral envelope max_j |exp(t lambda_j)| / |lambda_j|"))
    } else {
        let gen = dense_generator(model, Some(factors));
        let ep = EigenPropagator::new(&gen)?;
        let env = par_map(times, |&t| {
            let d: Vec<Complex64> = ep.eigenvalues.iter().map(|mu| (mu * t).exp() / (-mu)).collect();
            weighted_operator_norm(model, &ep.dense_diag(&d))
        });
        (env, format!("eigendecomposition propagator (cond {:.3e}), weighted SVD per t", ep.condition))
    };
    let lt: Vec<f64> = times.iter().map(|&t| math::ln(t)).collect();
    let le: Vec<f64> = envelope.iter().map(|&e| math::ln(e)).collect();
    let (slope, intercept) = least_squares(&lt, &le);
    let monotone = envelope.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6));
    let third = times.len() / 3;
    let (s_first, _) = least_squares(&lt[..third.max(2)], &le[..third.max(2)]);
    let (s_last, _) = least_squares(&lt[times.len() - third.max(2)..], &le[times.len() - third.max(2)..]);
    let verdict = if !monotone || !slope.is_finite() {
        DecayVerdict::Inconclusive
    } else if s_last < 1.5 * s_first && s_last < -2.0 {
        DecayVerdict::FasterThanPolynomial
    } else {
        DecayVerdict::Polynomial
    };
    Ok(DecayFit {
        label: label.into(),
        times: times.to_vec(),
        envelope,
        slope,
        intercept,
        target,
        relative_deviation: ((slope - target) / target).abs(),
        verdict,
        method,
    })
}

/// Grids and policies for [`verify_certificate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub polar: PolarGridSpec,
    pub window: WindowSpec,
    pub growth: GrowthOptions,
    pub xi: XiGrid,
    pub quad: QuadOptions,
    pub trajectory_steps: usize,
    pub horizon_multiple: f64,
    /// Explicit horizon overriding `horizon_multiple`.
    pub horizon: Option<f64>,
    /// Trajectories pass when `sup ≤ sup_factor·‖x‖` ...
    pub sup_factor: f64,
    /// ... and the value at the horizon is at most `final_fraction·‖x‖`.
    pub final_fraction: f64,
    pub seed: u64,
    pub simulate: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            polar: PolarGridSpec::default(),
            window: WindowSpec::default(),
            growth: GrowthOptions::default(),
            xi: XiGrid::default(),
            quad: QuadOptions::default(),
            trajectory_steps: 50,
            horizon_multiple: 5.0,
            horizon: None,
            sup_factor: 2.0,
            final_fraction: 0.2,
            seed: 20_240_601,
            simulate: true,
        }
    }
}

/// Budget, transfer scan, injectivity, growth, half-plane integrals and a
/// trajectory, all against one certificate.
pub fn verify_certificate(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    cert: &RobustnessCertificate,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    factors.check_model(model)?;
    let mut rep = VerificationReport::default();
    rep.notes.push(format!("model: {}", model.truncation_note));
    rep.notes.push(format!(
        "resonances taken from closure points on the imaginary axis: {:?}",
        cert.profile.resonances
    ));

    let budget = check_budget(model, factors, cert)?;
    rep.push(CheckRecord::below("budget.norm_b", "weighted Gram norm", budget.norm_b, cert.delta));
    rep.push(CheckRecord::below("budget.norm_c", "weighted Gram norm", budget.norm_c, cert.delta));
    for g in &budget.graph {
        rep.push(CheckRecord::below(format!("budget.graph_b@{}", g.omega), format!("beta = {}", cert.beta), g.b, cert.delta));
        rep.push(CheckRecord::below(format!("budget.graph_c@{}", g.omega), format!("gamma = {}", cert.gamma), g.c, cert.delta));
    }

    let scan = scan_transfer_norm(model, factors, &cert.regions, &opts.polar, &opts.window)?;
    rep.push(CheckRecord::at_most(
        "transfer.scan",
        format!(
            "polar {}x{} from r = {:e}, window [0,{}]x[-{},{}] {}x{}; {} points, {} skipped; max at {}{:+}i",
            opts.polar.n_radii,
            opts.polar.n_angles,
            opts.polar.r_min,
            opts.window.re_max,
            opts.window.im_half,
            opts.window.im_half,
            opts.window.n_re,
            opts.window.n_im,
            scan.evaluated,
            scan.skipped.len(),
            scan.argmax.re,
            scan.argmax.im
        ),
        scan.max,
        cert.c,
        0.0,
    ));

    for inj in check_injectivity_at_resonances(model, factors, &cert.profile.resonances, cert.profile.alpha, cert.beta)? {
        rep.push(CheckRecord::below(
            format!("injectivity@{}", inj.omega),
            format!("beta1 = {}, gamma1 = {}", inj.beta1, inj.gamma1),
            inj.product,
            1.0,
        ));
    }

    let growth = check_resolvent_growth(model, factors, &cert.profile, cert.c, cert.profile.alpha, &opts.growth)?;
    let gspec = format!(
        "{} log radii from {:e}, {} axis points; M_k = {:?}, converged = {}",
        opts.growth.n_radii, cert.profile.scan.r_min, opts.growth.n_off, growth.m_k, growth.all_converged
    );
    if !cert.profile.resonances.is_empty() {
        rep.push(CheckRecord::at_most("growth.near", gspec.clone(), growth.sup_near, growth.bound_near, 1e-9));
    }
    rep.push(CheckRecord::at_most("growth.off", gspec, growth.sup_off, growth.bound_off, 1e-9));

    let x = first_unit_vector(model);
    let zero = PerturbationFactors::zero(model.len(), 1);
    let rbcr = rbcr_integral(model, factors, &opts.xi, &opts.quad)?;
    let ispec = |s: &IntegralSup| {
        format!(
            "xi in [{:e}, {:e}] x {} (+ midpoints, {} bisections), rel tol {:e}, tail cut {:e}; sup at xi = {:e}, coarse-grid sup {:e}",
            opts.xi.min, opts.xi.max, opts.xi.n, s.refinements, opts.quad.rel_tol, opts.quad.tail_fraction, s.argsup, s.grid_sup
        )
    };
    let rbcr_ok = rbcr.verdict();
    rep.push(CheckRecord {
        name: "integral.rbcr".into(),
        spec: ispec(&rbcr),
        measured: rbcr.sup,
        threshold: None,
        tolerance: 0.01,
        verdict: rbcr_ok,
    });
    for (adjoint, name) in [(false, "integral.uniform_bound"), (true, "integral.uniform_bound_adjoint")] {
        let pert = uniform_boundedness_functional(model, factors, &x, &opts.xi, &opts.quad, adjoint)?;
        let base = uniform_boundedness_functional(model, &zero, &x, &opts.xi, &opts.quad, adjoint)?;
        let threshold = 2.0 * base.sup + 2.0 * cert.m_d * cert.m_d * rbcr.sup;
        let mut rec = CheckRecord::at_most(name, ispec(&pert), pert.sup, threshold, 1e-6);
        if pert.verdict() != Verdict::Pass || base.verdict() != Verdict::Pass {
            rec = rec.with_verdict(if pert.verdict() == Verdict::Fail { Verdict::Fail } else { Verdict::Inconclusive });
        }
        rep.push(rec);
    }

    if opts.simulate {
        let horizon = opts.horizon.unwrap_or_else(|| decay_horizon(model, opts.horizon_multiple));
        let times = linspace(0.0, horizon, opts.trajectory_steps + 1);
        let x0 = random_unit_vector(model, opts.seed);
        let (traj, method) = if model.len() > crate::resolvent::DENSE_LIMIT {
            (simulate_semigroup_adaptive(model, factors, &x0, &times, 1e-8)?, "matrix-free Dormand-Prince, rel tol 1e-8")
        } else {
            (simulate_semigroup(model, factors, &x0, &times)?, "Pade-13 expm")
        };
        let tspec = format!("{method}, t in [0, {horizon}] with {} steps, seed {}", opts.trajectory_steps, opts.seed);
        rep.push(CheckRecord::at_most("trajectory.sup", tspec.clone(), traj.sup, opts.sup_factor * traj.initial_norm, 0.0));
        rep.push(CheckRecord::at_most("trajectory.final", tspec, traj.final_norm, opts.final_fraction * traj.initial_norm, 0.0));
        rep.notes.push(format!(
            "finite-horizon policy: sup <= {} |x| and |T(t)x| <= {} |x| at t = {horizon}",
            opts.sup_factor, opts.final_fraction
        ));
        rep.trajectories.push(traj);
    }
    Ok(rep)
}

/// Decay-rate checks for polynomially stable models under factors with
/// bounded positive graph norms.
pub fn verify_polynomial(
    model: &SpectralModel,
    factors: &PerturbationFactors,
    beta: f64,
    gamma: f64,
    alpha: f64,
    budget: f64,
    times: &[f64],
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::default();
    rep.notes.push(format!("model: {}", model.truncation_note));
    let sum = CheckRecord::at_most("exponents", "alpha - (beta + gamma)", alpha - (beta + gamma), 0.0, 0.0);
    let sum = CheckRecord { measured: beta + gamma, threshold: Some(alpha), ..sum }
        .with_verdict(if beta + gamma >= alpha - 1e-12 { Verdict::Pass } else { Verdict::Fail });
    rep.push(sum);
    let nb = positive_graph_norm(model, factors, beta, Side::B)?;
    let nc = positive_graph_norm(model, factors, gamma, Side::C)?;
    rep.push(CheckRecord::at_most("budget.positive_b", format!("|(-A)^{beta} B|"), nb, budget, 0.0));
    rep.push(CheckRecord::at_most("budget.positive_c", format!("|(-A*)^{gamma} C*|"), nc, budget, 0.0));
    let target = -1.0 / alpha;
    let zero = PerturbationFactors::zero(model.len(), 1);
    for (f, label) in [(&zero, "decay.unperturbed"), (factors, "decay.perturbed")] {
        let fit = fit_polynomial_decay(model, f, times, target, label)?;
        let mut rec = CheckRecord::at_most(
            label,
            format!("{} on t in [{}, {}] x {}", fit.method, times[0], times[times.len() - 1], times.len()),
            fit.relative_deviation,
            0.1,
            0.0,
        );
        if fit.verdict != DecayVerdict::Polynomial {
            rec = rec.with_verdict(Verdict::Inconclusive);
        }
        rep.push(rec);
        rep.decay_fits.push(fit);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_diagonal_model, DiagonalRule};
    use core::f64::consts::PI;

    fn e(n: usize, k: usize, s: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(s, 0.0);
        v
    }

    #[test]
    fn poisson_oracle() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 8).unwrap();
        let zero = PerturbationFactors::zero(8, 1);
        let x = e(8, 2, 1.0);
        let xs = [1e-3, 0.1, 1.0, 10.0, 1e3];
        let s = gomilko_samples(&m, &zero, &x, &xs, &QuadOptions::default(), false).unwrap();
        for p in &s {
            let exact = p.xi * PI / (p.xi + 1.0 / 3.0);
            assert!(p.converged);
            assert!(((p.value - exact) / exact).abs() < 1e-4, "xi {} got {} want {}", p.xi, p.value, exact);
        }
        let zx = vec![Complex64::new(0.0, 0.0); 8];
        let s0 = gomilko_samples(&m, &zero, &zx, &xs, &QuadOptions::default(), false).unwrap();
        assert!(s0.iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn refinement_tracks_a_peak_between_grid_points() {
        // log-Lorentzian peak of height 1 at xi = 0.75, narrower than the grid spacing
        let peak = |xi: f64| 1.0 / (1.0 + (math::ln(xi / 0.75) / 0.15).powi(2));
        let sample = |xs: &[f64]| xs.iter().map(|&xi| XiSample { xi, value: peak(xi), error: 0.0, converged: true }).collect();
        let r = refine_sup(&XiGrid::default(), sample);
        assert!(r.grid_sup < 0.9);
        assert!(r.refinements > 0 && r.stable);
        assert!(r.sup > 0.99 && r.sup <= 1.0);
        assert_eq!(r.verdict(), Verdict::Pass);
        let flat = refine_sup(&XiGrid::default(), |xs: &[f64]| xs.iter().map(|&xi| XiSample { xi, value: 2.0, error: 0.0, converged: true }).collect());
        assert_eq!((flat.refinements, flat.sup), (0, 2.0));
    }

    #[test]
    fn rank_one_rbcr_closed_form() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 6).unwrap();
        let s = 0.1;
        let f = PerturbationFactors::rank_one(e(6, 0, s), e(6, 0, s)).unwrap();
        let grid = XiGrid { min: 0.5, max: 0.5, n: 1 };
        let r = xi_integrals(&m, &grid.points(), &QuadOptions::default(), |z| split_product_norm(&m, &f, z).ok().map(|v| v * v));
        let exact = PI * s.powi(4) / 13.5;
        assert!(((r[0].value - exact) / exact).abs() < 1e-6);
        let f2 = f.scaled(2.0, 3.0);
        let r2 = xi_integrals(&m, &grid.points(), &QuadOptions::default(), |z| split_product_norm(&m, &f2, z).ok().map(|v| v * v));
        assert!((r2[0].value / r[0].value - 36.0).abs() < 1e-6);
    }

    #[test]
    fn unperturbed_trajectory() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 5).unwrap();
        let zero = PerturbationFactors::zero(5, 1);
        let t = simulate_semigroup(&m, &zero, &e(5, 0, 1.0), &[0.0, 0.5, 1.0]).unwrap();
        assert!((t.norms[2] - (-1f64).exp()).abs() < 1e-13);
        assert_eq!(t.steps, 1);
        assert!(!t.growth);
    }

    #[test]
    fn eigen_and_pade_paths_agree() {
        let m = build_diagonal_model(&DiagonalRule::DampedOscillator, 12).unwrap();
        let f = PerturbationFactors::rank_one(
            (0..12).map(|k| Complex64::new(0.05 / (k + 1) as f64, 0.0)).collect(),
            (0..12).map(|k| Complex64::new(0.0, 0.03 / (k + 1) as f64)).collect(),
        )
        .unwrap();
        let x = random_unit_vector(&m, 3);
        let times = [0.0, 0.7, 3.0, 10.0];
        let tr = simulate_semigroup(&m, &f, &x, &times).unwrap();
        let ep = EigenPropagator::new(&dense_generator(&m, Some(&f))).unwrap();
        for (&t, &n) in times.iter().zip(&tr.norms) {
            let y = ep.propagate(t, &x);
            assert!((m.norm(&y) - n).abs() < 1e-9);
        }
    }

    #[test]
    fn adaptive_path_matches_pade() {
        let m = build_diagonal_model(&DiagonalRule::DampedOscillator, 10).unwrap();
        let f = PerturbationFactors::rank_one(
            (0..10).map(|k| Complex64::new(0.1 / (k + 1) as f64, 0.0)).collect(),
            (0..10).map(|k| Complex64::new(0.05, 0.02 * k as f64)).collect(),
        )
        .unwrap();
        let x = random_unit_vector(&m, 11);
        let times = linspace(0.0, 8.0, 9);
        let a = simulate_semigroup(&m, &f, &x, &times).unwrap();
        let b = simulate_semigroup_adaptive(&m, &f, &x, &times, 1e-10).unwrap();
        for (p, q) in a.norms.iter().zip(&b.norms) {
            assert!((p - q).abs() < 1e-7, "{p} {q}");
        }
        let neg = simulate_semigroup_adaptive(&m, &PerturbationFactors::zero(10, 1), &x, &[0.0, 1.0], 1e-10).unwrap();
        assert!(neg.final_norm < neg.initial_norm);
    }

    #[test]
    fn exponential_decay_is_flagged() {
        let m = build_diagonal_model(&DiagonalRule::NegLinear, 5).unwrap();
        let zero = PerturbationFactors::zero(5, 1);
        let times = logspace(1.0, 30.0, 20);
        let fit = fit_polynomial_decay(&m, &zero, &times, -1.0, "exp").unwrap();
        assert_eq!(fit.verdict, DecayVerdict::FasterThanPolynomial);
    }

    #[test]
    fn injectivity_examples() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 10).unwrap();
        let zero = PerturbationFactors::zero(10, 1);
        let r = check_injectivity_at_resonances(&m, &zero, &[0.0], 1.0, 0.5).unwrap();
        assert_eq!(r[0].product, 0.0);
        let big = PerturbationFactors::rank_one(e(10, 0, 2.0), e(10, 0, 2.0)).unwrap();
        let r = check_injectivity_at_resonances(&m, &big, &[0.0], 1.0, 0.5).unwrap();
        assert!(!r[0].pass && (r[0].product - 4.0).abs() < 1e-12);
    }
}
