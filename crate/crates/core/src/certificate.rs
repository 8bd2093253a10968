//! Resolvent profiles, the constant chain and perturbation budgets.

use alloc::format;
use alloc::string::String;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{graph_norm, Side};
use crate::grid::{linspace, logspace, par_map};
use crate::math;
use crate::model::{resolvent_norm_exact, PerturbationFactors, SpectralModel};

/// Grid and policy for estimating the resolvent growth on the imaginary axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileScan {
    /// Half-width `W` of the scanned window `[-W, W]` of the imaginary axis.
    pub window: f64,
    pub n_window: usize,
    /// Smallest distance to a resonance probed by the ladder.
    pub r_min: f64,
    pub n_radii: usize,
    pub ladder_step: f64,
    pub alpha_max: f64,
    /// A rung is bounded when `sup g ≤ margin · g(ε)`.
    pub margin: f64,
    /// Inflation applied to every grid-estimated constant.
    pub headroom: f64,
}

impl Default for ProfileScan {
    fn default() -> Self {
        ProfileScan {
            window: 10.0,
            n_window: 2001,
            r_min: 1e-8,
            n_radii: 65,
            ladder_step: 0.25,
            alpha_max: 6.0,
            margin: 10.0,
            headroom: 1.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub alpha: f64,
    /// `sup_r g(r) / g(ε)` with `g(r) = r^α ‖R(i(ω_k ± r), A)‖`, worst resonance.
    pub ratio: f64,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventProfile {
    pub resonances: Vec<f64>,
    pub alpha: f64,
    pub eps_a: f64,
    /// Grid supremum before headroom.
    pub m_a_measured: f64,
    pub m_a: f64,
    pub d_a: Option<f64>,
    /// Semigroup bound; 1 for normal generators with spectrum in the closed
    /// left half-plane.
    pub m: f64,
    pub ladder: Vec<LadderRung>,
    /// Per resonance: the resolvent norm grows towards `iω_k` on both sides.
    pub cross_checked: Vec<bool>,
    pub scan: ProfileScan,
}

/// `|r|^α ‖R(i(ω_k + r), A)‖`.
pub fn weighted_resolvent_norm(model: &SpectralModel, omega_k: f64, alpha: f64, r: f64) -> Result<f64> {
    let n = resolvent_norm_exact(model, Complex64::new(0.0, omega_k + r))?;
    Ok(math::powf(r.abs(), alpha) * n)
}

fn eps_from_gap(d_a: Option<f64>) -> f64 {
    match d_a {
        Some(d) => (d / 3.0).min(1.0),
        None => 1.0,
    }
}

pub fn estimate_resolvent_profile(model: &SpectralModel, scan: &ProfileScan) -> Result<ResolventProfile> {
    if !model.is_certifiable() {
        return Err(Error::Uncertifiable("spectrum reaches the open right half-plane".into()));
    }
    if !(scan.headroom >= 1.0 && scan.margin > 1.0 && scan.ladder_step > 0.0 && scan.r_min > 0.0) {
        return Err(Error::InvalidArgument("invalid profile scan parameters".into()));
    }
    let resonances = model.imaginary_axis_points();
    let d_a = resonances.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    let eps = eps_from_gap(d_a);
    if let Some(w) = resonances.iter().find(|w| w.abs() + eps > scan.window) {
        return Err(Error::InvalidArgument(format!(
            "resonance {w} with its neighbourhood is not inside the scan window [-{0}, {0}]",
            scan.window
        )));
    }
    if scan.r_min >= eps {
        return Err(Error::InvalidArgument("r_min must be below the resonance radius".into()));
    }
    let radii = logspace(scan.r_min, eps, scan.n_radii);

    let mut ladder = Vec::new();
    let mut alpha = 1.0;
    if !resonances.is_empty() {
        let mut chosen = None;
        let steps = math::floor((scan.alpha_max - 1.0) / scan.ladder_step + 1e-9) as usize;
        for i in 0..=steps {
            let a = 1.0 + i as f64 * scan.ladder_step;
            let mut ratio: f64 = 0.0;
            for &w in &resonances {
                for sign in [1.0, -1.0] {
                    let g: Vec<f64> = radii
                        .iter()
                        .map(|&r| weighted_resolvent_norm(model, w, a, sign * r))
                        .collect::<Result<_>>()?;
                    let outer = g[g.len() - 1];
                    let sup = g.iter().cloned().fold(0.0, f64::max);
                    ratio = ratio.max(if g.iter().all(|v| v.is_finite()) { sup / outer } else { f64::INFINITY });
                }
            }
            let bounded = ratio <= scan.margin;
            ladder.push(LadderRung { alpha: a, ratio, bounded });
            if bounded {
                chosen = Some(a);
                break;
            }
        }
        alpha = chosen.ok_or(Error::ProfileNotPolynomial { alpha_max: scan.alpha_max })?;
    }

    let mut near: f64 = 0.0;
    let mut cross_checked = Vec::with_capacity(resonances.len());
    for &w in &resonances {
        let mut grows = true;
        for sign in [1.0, -1.0] {
            for &r in &radii {
                near = near.max(weighted_resolvent_norm(model, w, alpha, sign * r)?);
            }
            let inner = resolvent_norm_exact(model, Complex64::new(0.0, w + sign * radii[0]))?;
            let outer = resolvent_norm_exact(model, Complex64::new(0.0, w + sign * eps))?;
            grows &= inner >= outer;
        }
        cross_checked.push(grows);
    }
    let mut off_points: Vec<f64> = linspace(-scan.window, scan.window, scan.n_window)
        .into_iter()
        .filter(|x| resonances.iter().all(|w| (x - w).abs() >= eps))
        .collect();
    for &w in &resonances {
        off_points.push(w - eps);
        off_points.push(w + eps);
    }
    let off_vals = par_map(&off_points, |&x| resolvent_norm_exact(model, Complex64::new(0.0, x)));
    let mut off: f64 = 0.0;
    for v in off_vals {
        off = off.max(v?);
    }
    let m_a_measured = near.max(off);
    Ok(ResolventProfile {
        resonances,
        alpha,
        eps_a: eps,
        m_a_measured,
        m_a: scan.headroom * m_a_measured,
        d_a,
        m: 1.0,
        ladder,
        cross_checked,
        scan: *scan,
    })
}

/// Bound on `‖R(λ, A)‖·|λ - iω_k|^α` over `Ω_k`.
pub fn bound_m0(profile: &ResolventProfile) -> f64 {
    let (ma, m, a) = (profile.m_a, profile.m, profile.alpha);
    ma.max(m).max(math::powf(2.0, a / 2.0) * (m + ma * (1.0 + m)))
}

/// Fractional part of `α`, snapped to 0 near integers.
fn frac(alpha: f64) -> f64 {
    let f = alpha - math::floor(alpha);
    if f < 1e-12 || 1.0 - f < 1e-12 {
        0.0
    } else {
        f
    }
}

/// Bound on `‖(iω_k - A)^α R(λ, A)‖` over `Ω_k` with moment constant `k`.
pub fn bound_m1(profile: &ResolventProfile, m0: f64, moment_constant: f64) -> f64 {
    let at = frac(profile.alpha);
    if at == 0.0 {
        m0
    } else {
        math::powf(2.0, at + 1.0) * moment_constant * m0
    }
}

/// Bound on `‖R(λ, A)‖` on the closed right half-plane outside `∪ Ω_k`.
pub fn bound_m2(profile: &ResolventProfile, m0: f64) -> f64 {
    let m = profile.m;
    if profile.resonances.is_empty() {
        profile.m_a * (1.0 + m)
    } else {
        profile.m_a.max(m0 / math::powf(profile.eps_a, profile.alpha)) * (1.0 + m)
    }
}

/// Upper bound for `sup_{∪Ω_k} ‖C R(λ, A) B‖` as a function of the budget `δ`:
/// `δ² (M₁ + [β̃+γ̃ > α̃] K² + (m + n) K²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferChain {
    pub m1: f64,
    pub moment_constant: f64,
    /// `β̃ + γ̃ = α̃ + 1`: the leading term splits into two.
    pub split_leading: bool,
    /// Number of tail terms, `⌊β⌋ + ⌊γ⌋`.
    pub tails: usize,
}

impl TransferChain {
    pub fn generic(alpha: f64, beta: f64, gamma: f64, m1: f64, moment_constant: f64) -> Result<Self> {
        check_exponents(alpha, beta, gamma)?;
        let (m, n) = (math::floor(beta + 1e-12), math::floor(gamma + 1e-12));
        let bt = (beta - m).max(0.0);
        let gt = (gamma - n).max(0.0);
        let at = frac(alpha);
        Ok(TransferChain { m1, moment_constant, split_leading: bt + gt > at + 0.5, tails: (m + n) as usize })
    }

    /// Model-supplied bound on `‖(iω_k - A)^α R(λ, A)‖`; the transfer norm is
    /// then at most `M₁ δ²` directly.
    pub fn analytic(m1: f64) -> Self {
        TransferChain { m1, moment_constant: 1.0, split_leading: false, tails: 0 }
    }

    pub fn coefficient(&self) -> f64 {
        let k2 = self.moment_constant * self.moment_constant;
        self.m1 + if self.split_leading { k2 } else { 0.0 } + self.tails as f64 * k2
    }

    pub fn eval(&self, delta: f64) -> f64 {
        delta * delta * self.coefficient()
    }
}

pub fn transfer_bound_chain(delta: f64, chain: &TransferChain) -> f64 {
    chain.eval(delta)
}

fn check_exponents(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    if !(beta >= 0.0 && gamma >= 0.0) {
        return Err(Error::InvalidArgument("exponents beta, gamma must be nonnegative".into()));
    }
    if (beta + gamma - alpha).abs() > 1e-12 * alpha.max(1.0) {
        return Err(Error::InvalidArgument(format!("beta + gamma = {} must equal alpha = {alpha}", beta + gamma)));
    }
    Ok(())
}

/// Largest `δ` with `chain(δ) ≤ c`, by doubling then 60 bisection steps.
/// Returns 0 and a diagnostic if even a vanishing `δ` violates the target.
pub fn bound_delta1(c: f64, chain: &TransferChain) -> (f64, Option<String>) {
    let mut hi = 1.0;
    while chain.eval(hi) <= c && hi < 1e150 {
        hi *= 2.0;
    }
    if chain.eval(hi * math::powf(2.0, -60.0)) > c {
        return (0.0, Some(format!("transfer chain exceeds c = {c} already at delta = {:e}", hi * math::powf(2.0, -60.0))));
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if chain.eval(mid) <= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, None)
}

/// Budget implying `‖(iω_k-A)^{-β₁}B‖‖(-iω_k-A*)^{-γ₁}C*‖ < 1`, `β₁+γ₁ = 1`.
pub fn bound_delta2(moment_constant: f64) -> f64 {
    1.0 / moment_constant
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    /// The generic closed forms.
    Generic,
    /// Supplied by an analytic bound for the model.
    Analytic,
    /// Supremum of the exact resolvent norm on the boundary of the region.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingTerm {
    Delta1,
    Delta2,
    OffResonance,
}

/// `Ω_k = {0 < |λ - iω_k| ≤ ε, Re λ ≥ 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaRegion {
    pub omega: f64,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub m1_override: Option<f64>,
    pub m2_override: Option<f64>,
    pub moment_constant: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { m1_override: None, m2_override: None, moment_constant: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCertificate {
    pub profile: ResolventProfile,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    pub m: f64,
    pub m0: f64,
    pub m1: f64,
    pub m1_source: ConstantSource,
    pub m2: f64,
    pub m2_source: ConstantSource,
    pub chain: TransferChain,
    /// `None` when there is no resonance (the condition is vacuous).
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    /// `√(c/M₂)`.
    pub off_resonance: f64,
    pub delta: f64,
    pub binding: BindingTerm,
    /// `1/(1-c)`, the bound on `‖(I - CR(λ,A)B)^{-1}‖`.
    pub m_d: f64,
    pub regions: Vec<OmegaRegion>,
    pub chain_assembly: String,
    pub diagnostics: Vec<String>,
}

pub fn compose_certificate(
    profile: &ResolventProfile,
    beta: f64,
    gamma: f64,
    c: f64,
    opts: &CertifyOptions,
) -> Result<RobustnessCertificate> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("contraction target c = {c} must lie in (0, 1)")));
    }
    if !(opts.moment_constant >= 1.0) {
        return Err(Error::InvalidArgument("moment constant must be at least 1".into()));
    }
    check_exponents(profile.alpha, beta, gamma)?;
    let k = opts.moment_constant;
    let m0 = bound_m0(profile);
    let (m1, m1_source, chain) = match opts.m1_override {
        Some(v) => (v, ConstantSource::Analytic, TransferChain::analytic(v)),
        None => {
            let m1 = bound_m1(profile, m0, k);
            (m1, ConstantSource::Generic, TransferChain::generic(profile.alpha, beta, gamma, m1, k)?)
        }
    };
    let (m2, m2_source) = match opts.m2_override {
        Some(v) => (v, ConstantSource::Direct),
        None => (bound_m2(profile, m0), ConstantSource::Generic),
    };
    if !(m1 >= 1.0 && m2 >= 1.0) {
        return Err(Error::InvalidArgument(format!("constants M1 = {m1}, M2 = {m2} must be at least 1")));
    }
    let mut diagnostics = Vec::new();
    let off_resonance = math::sqrt(c / m2);
    let (delta1, delta2) = if profile.resonances.is_empty() {
        (None, None)
    } else {
        let (d1, diag) = bound_delta1(c, &chain);
        if let Some(d) = diag {
            diagnostics.push(d);
        }
        (Some(d1), Some(bound_delta2(k)))
    };
    let mut delta = off_resonance;
    let mut binding = BindingTerm::OffResonance;
    if let Some(d1) = delta1 {
        if d1 < delta {
            delta = d1;
            binding = BindingTerm::Delta1;
        }
    }
    if let Some(d2) = delta2 {
        if d2 < delta {
            delta = d2;
            binding = BindingTerm::Delta2;
        }
    }
    let chain_assembly = match m1_source {
        ConstantSource::Generic => format!(
            "sup over Omega_k of |C R B| <= delta^2 * (M1 + {} K^2 + {} K^2), K = {k}",
            if chain.split_leading { 1 } else { 0 },
            chain.tails
        ),
        _ => String::from("sup over Omega_k of |C R B| <= M1 * delta^2 (analytic M1)"),
    };
    Ok(RobustnessCertificate {
        profile: profile.clone(),
        beta,
        gamma,
        c,
        m: profile.m,
        m0,
        m1,
        m1_source,
        m2,
        m2_source,
        chain,
        delta1,
        delta2,
        off_resonance,
        delta,
        binding,
        m_d: 1.0 / (1.0 - c),
        regions: profile.resonances.iter().map(|&w| OmegaRegion { omega: w, eps: profile.eps_a }).collect(),
        chain_assembly,
        diagnostics,
    })
}

/// Supremum of `‖R(λ, A)‖` over the closed right half-plane outside `∪Ω_k`
/// for a normal model, with the profile headroom applied. Moving right
/// from the imaginary axis only increases the distance to a spectrum in the
/// left half-plane, so the boundary (axis plus arcs) carries the supremum.
pub fn direct_m2(model: &SpectralModel, profile: &ResolventProfile, n_axis: usize, n_arc: usize) -> Result<f64> {
    let w = profile.scan.window;
    let eps = profile.eps_a;
    let mut pts: Vec<Complex64> = linspace(-w, w, n_axis)
        .into_iter()
        .filter(|x| profile.resonances.iter().all(|r| (x - r).abs() >= eps))
        .map(|x| Complex64::new(0.0, x))
        .collect();
    for &r in &profile.resonances {
        for t in linspace(-PI / 2.0, PI / 2.0, n_arc) {
            pts.push(Complex64::new(eps * math::cos(t), r + eps * math::sin(t)));
        }
    }
    let vals = par_map(&pts, |&z| resolvent_norm_exact(model, z));
    let mut sup: f64 = 0.0;
    for v in vals {
        sup = sup.max(v?);
    }
    Ok((profile.scan.headroom * sup).max(1.0))
}

/// `sup_λ ‖(-A)^s R(λ, A)‖ = sup_λ sup_{μ∈σ(A)} |μ|^s / |λ - μ|` over the
/// given points, using samples plus `n_boundary` points on the boundary of
/// the continuous part (where the supremum over a disk is attained).
pub fn power_resolvent_sup(model: &SpectralModel, power: f64, lambdas: &[Complex64], n_boundary: usize) -> f64 {
    let mut spectrum: Vec<Complex64> = model.eigenvalues.clone();
    spectrum.extend(model.closure_points.iter().cloned());
    if let Some(d) = model.continuum {
        for j in 0..n_boundary {
            let t = 2.0 * PI * j as f64 / n_boundary as f64;
            spectrum.push(d.center + Complex64::new(d.radius * math::cos(t), d.radius * math::sin(t)));
        }
    }
    let weights: Vec<f64> = spectrum.iter().map(|m| math::powf(m.norm(), power)).collect();
    let vals = par_map(lambdas, |&l| {
        let mut best: f64 = 0.0;
        for (m, w) in spectrum.iter().zip(&weights) {
            let d = (l - m).norm();
            if d > 0.0 {
                best = best.max(w / d);
            }
        }
        best
    });
    vals.into_iter().fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNormEntry {
    pub omega: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub delta: f64,
    pub norm_b: f64,
    pub norm_c: f64,
    pub graph: Vec<GraphNormEntry>,
    pub pass: bool,
}

impl BudgetCheck {
    pub fn largest(&self) -> f64 {
        self.graph.iter().fold(self.norm_b.max(self.norm_c), |m, g| m.max(g.b).max(g.c))
    }
}

pub fn check_budget(model: &SpectralModel, factors: &PerturbationFactors, cert: &RobustnessCertificate) -> Result<BudgetCheck> {
    factors.check_model(model)?;
    let norm_b = factors.norm_b(model);
    let norm_c = factors.norm_c(model);
    let mut graph = Vec::new();
    for &w in &cert.profile.resonances {
        graph.push(GraphNormEntry {
            omega: w,
            b: graph_norm(model, factors, w, cert.beta, Side::B)?,
            c: graph_norm(model, factors, w, cert.gamma, Side::C)?,
        });
    }
    let mut out = BudgetCheck { delta: cert.delta, norm_b, norm_c, graph, pass: false };
    out.pass = out.largest() < cert.delta;
    Ok(out)
}

/// Scale factor bringing every budgeted norm of `factors` to `fraction · δ`.
pub fn scale_to_budget(model: &SpectralModel, factors: &PerturbationFactors, cert: &RobustnessCertificate, fraction: f64) -> Result<PerturbationFactors> {
    let b = check_budget(model, factors, cert)?;
    let largest = b.largest();
    if largest == 0.0 {
        return Ok(factors.clone());
    }
    let s = fraction * cert.delta / largest;
    Ok(factors.scaled(s, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::model::{build_diagonal_model, build_disk_model, DiagonalRule};

    fn profile(alpha: f64, m_a: f64, eps: f64, res: Vec<f64>) -> ResolventProfile {
        ResolventProfile {
            resonances: res,
            alpha,
            eps_a: eps,
            m_a_measured: m_a,
            m_a,
            d_a: None,
            m: 1.0,
            ladder: vec![],
            cross_checked: vec![],
            scan: ProfileScan::default(),
        }
    }

    #[test]
    fn m0_examples() {
        assert!((bound_m0(&profile(1.0, 1.0, 1.0, vec![0.0])) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((bound_m0(&profile(2.0, 1.0, 1.0, vec![0.0])) - 6.0).abs() < 1e-12);
        assert!((bound_m0(&profile(2.0, 1e-12, 1.0, vec![0.0])) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn m1_and_m2_examples() {
        let p = profile(2.0, 1.0, 1.0, vec![0.0]);
        assert_eq!(bound_m1(&p, 6.0, 1.0), 6.0);
        let p15 = profile(1.5, 1.0, 1.0, vec![0.0]);
        assert!((bound_m1(&p15, 6.0, 1.0) - 2f64.powf(1.5) * 6.0).abs() < 1e-12);
        assert!((bound_m2(&p, 6.0) - 12.0).abs() < 1e-12);
        let none = profile(1.0, 1.3, 1.0, vec![]);
        assert!((bound_m2(&none, 100.0) - 2.6).abs() < 1e-12);
        let small = profile(2.0, 1.0, 1e-3, vec![0.0]);
        assert!(bound_m2(&small, 6.0) > 1e6);
    }

    #[test]
    fn chain_shapes() {
        let ch = TransferChain::generic(2.0, 1.0, 1.0, 8.0, 1.0).unwrap();
        assert_eq!(ch.tails, 2);
        assert!(!ch.split_leading);
        assert_eq!(transfer_bound_chain(0.0, &ch), 0.0);
        let r = ch.eval(2e-3) / ch.eval(1e-3);
        assert!((r - 4.0).abs() < 1e-12);
        let ch = TransferChain::generic(1.0, 0.5, 0.5, 4.0, 1.0).unwrap();
        assert!(ch.split_leading && ch.tails == 0);
        assert!(TransferChain::generic(2.0, 1.0, 0.5, 8.0, 1.0).is_err());
    }

    #[test]
    fn delta1_bisection() {
        let (d, diag) = bound_delta1(0.8, &TransferChain::analytic(8.0));
        assert!(diag.is_none());
        assert!((d - 1.0 / 10f64.sqrt()).abs() < 1e-12);
        let generic = TransferChain::generic(2.0, 1.0, 1.0, 8.0, 1.0).unwrap();
        let (dg, _) = bound_delta1(0.8, &generic);
        assert!(dg < d);
        assert!((dg - 0.08f64.sqrt()).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for c in [0.5, 0.1, 1e-3, 1e-6] {
            let (v, _) = bound_delta1(c, &generic);
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(bound_delta2(1.0), 1.0);
        assert_eq!(bound_delta2(4.0), 0.25);
    }

    #[test]
    fn generic_certificate_competition() {
        let p = profile(2.0, 1.0, 1.0, vec![0.0]);
        let cert = compose_certificate(&p, 1.0, 1.0, 0.8, &CertifyOptions::default()).unwrap();
        assert!((cert.m2 - 12.0).abs() < 1e-12);
        assert!((cert.off_resonance - (0.8f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!(cert.delta <= cert.off_resonance && cert.delta <= cert.delta1.unwrap() && cert.delta <= cert.delta2.unwrap());
        assert!(compose_certificate(&p, 1.0, 0.5, 0.8, &CertifyOptions::default()).is_err());
        assert!(compose_certificate(&p, 1.0, 1.0, 1.0, &CertifyOptions::default()).is_err());
    }

    #[test]
    fn example_diagonal_profile() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 200).unwrap();
        let p = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
        assert_eq!(p.resonances, vec![0.0]);
        assert_eq!(p.alpha, 1.0);
        assert!((p.m_a_measured - 1.0).abs() < 1e-12);
        assert_eq!(p.eps_a, 1.0);
        assert!(p.cross_checked[0]);
    }

    #[test]
    fn disk_profile_and_certificate() {
        let m = build_disk_model(Complex64::new(-1.0, 0.0), 1.0, 16, 32).unwrap();
        let p = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
        assert_eq!(p.alpha, 2.0);
        assert!(p.ladder.iter().any(|r| r.alpha == 1.75 && !r.bounded));
        let m2 = direct_m2(&m, &p, 2001, 65).unwrap();
        let opts = CertifyOptions { m1_override: Some(8.0), m2_override: Some(m2), moment_constant: 1.0 };
        let cert = compose_certificate(&p, 1.0, 1.0, 0.8, &opts).unwrap();
        assert!((cert.delta - 1.0 / 10f64.sqrt()).abs() < 1e-12);
        assert_eq!(cert.binding, BindingTerm::Delta1);
        assert_eq!(cert.m1_source, ConstantSource::Analytic);
    }

    #[test]
    fn empty_resonance_certificate() {
        let m = build_disk_model(Complex64::new(-2.0, 0.0), 1.0, 8, 16).unwrap();
        let p = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
        assert!(p.resonances.is_empty());
        let cert = compose_certificate(&p, 0.5, 0.5, 0.8, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.binding, BindingTerm::OffResonance);
        assert!((cert.delta - (0.8 / cert.m2).sqrt()).abs() < 1e-15);
        assert!(cert.delta1.is_none());
    }

    #[test]
    fn budget_examples() {
        let m = build_diagonal_model(&DiagonalRule::NegReciprocal, 20).unwrap();
        let p = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
        let cert = compose_certificate(&p, 0.5, 0.5, 0.8, &CertifyOptions::default()).unwrap();
        let zero = PerturbationFactors::zero(20, 1);
        assert!(check_budget(&m, &zero, &cert).unwrap().pass);
        let mut b = vec![Complex64::new(0.0, 0.0); 20];
        b[0] = Complex64::new(2.0, 0.0);
        let big = PerturbationFactors::rank_one(b.clone(), b).unwrap();
        let chk = check_budget(&m, &big, &cert).unwrap();
        assert!(!chk.pass && (chk.norm_b - 2.0).abs() < 1e-15);
    }
}
