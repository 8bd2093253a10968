//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semistab_core::certificate::{power_resolvent_sup, weighted_resolvent_norm, OmegaRegion};
use semistab_core::dense::dense_generator;
use semistab_core::grid::{PolarGridSpec, WindowSpec};
use semistab_core::linalg::eigenvalues;
use semistab_core::model::resolvent_norm_exact;
use semistab_core::presets::*;
use semistab_core::quadrature::QuadOptions;
use semistab_core::verification::*;
use semistab_core::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Collects sub-claims of one criterion.
#[derive(Default)]
struct Claims {
    parts: Vec<(bool, String)>,
}

impl Claims {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.parts.push((ok, what.into()));
    }

    fn ok(&self) -> bool {
        self.parts.iter().all(|p| p.0)
    }

    fn detail(&self) -> String {
        self.parts
            .iter()
            .map(|(ok, s)| if *ok { s.clone() } else { format!("FAILED[{s}]") })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn criterion_1() -> Claims {
    let mut cl = Claims::default();
    let t = Instant::now();
    let (nr, na) = DISK_NODES;
    let m = disk_model(nr, na).unwrap();
    let mut pts: Vec<Complex64> = WindowSpec::default().points().into_iter().filter(|z| z.norm() > 0.0).collect();
    pts.extend(PolarGridSpec::default().points(0.0, 1.0));
    let sup = power_resolvent_sup(&m, 2.0, &pts, 4096);
    cl.check(sup <= 8.0 + 1e-6, format!("grid sup |(-A)^2 R| = {sup:.6} <= 8 + 1e-6"));
    let profile = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
    cl.check(profile.alpha == 2.0, format!("ladder alpha = {}", profile.alpha));
    let g_near = weighted_resolvent_norm(&m, 0.0, 1.75, 1e-3).unwrap();
    let g_one = weighted_resolvent_norm(&m, 0.0, 1.75, 1.0).unwrap();
    let ratio = g_near / g_one;
    cl.check(ratio > 10.0, format!("alpha = 1.75 rung g(1e-3)/g(1) = {ratio:.4} > 10"));
    let cert = disk_certificate(&m, 0.8).unwrap();
    let err = (cert.delta - 1.0 / 10f64.sqrt()).abs();
    cl.check(err <= 1e-12, format!("delta = {:.15} (|delta - 1/sqrt(10)| = {err:.1e})", cert.delta));
    let secs = t.elapsed().as_secs_f64();
    cl.check(secs < 60.0, format!("{secs:.1} s < 60 s"));
    cl
}

fn criterion_2() -> Claims {
    let mut cl = Claims::default();
    let t = Instant::now();
    let n = 10_000;
    let m = reciprocal_model(n).unwrap();
    let zero = PerturbationFactors::zero(n, 1);
    for w in [0.01, 0.1, 0.5, 1.0] {
        let est = perturbed_resolvent_norm(&m, &zero, c(0.0, w), 1e-12, 100).unwrap();
        let v = w * est.truncated;
        let closed = w / (w * w + 1.0 / (n * n) as f64).sqrt();
        cl.check(
            (1.0 - 1e-3..=1.0).contains(&v) && (v - closed).abs() <= 1e-12,
            format!("w = {w}: |w| |R| = {v:.9} (closed form {closed:.9})"),
        );
        let exact = w * resolvent_norm_exact(&m, c(0.0, w)).unwrap();
        cl.check((exact - 1.0).abs() <= 1e-12, format!("w = {w}: untruncated |w| |R| = {exact:.12}"));
    }
    let p = estimate_resolvent_profile(&m, &ProfileScan::default()).unwrap();
    cl.check(p.alpha == 1.0, format!("ladder alpha = {}", p.alpha));
    let secs = t.elapsed().as_secs_f64();
    cl.check(secs < 10.0, format!("{secs:.1} s < 10 s"));
    cl
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn random_model(rng: &mut ChaCha8Rng, n: usize) -> SpectralModel {
    let eig = (0..n).map(|_| c(-rng.gen_range(0.01..3.0), rng.gen_range(-5.0..5.0))).collect();
    let w = (0..n).map(|_| rng.gen_range(0.2..3.0)).collect();
    SpectralModel::custom(eig, w, vec![]).unwrap()
}

fn criterion_3() -> Claims {
    let mut cl = Claims::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 50;
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for inst in 0..100 {
        let m = random_model(&mut rng, n);
        let p = 1 + inst % 3;
        let s = 0.5 / (n as f64).sqrt();
        let b = (0..p).map(|_| random_vec(&mut rng, n)).collect();
        let cc = (0..p).map(|_| random_vec(&mut rng, n)).collect();
        let f = PerturbationFactors::new(b, cc).unwrap().scaled(s, s);
        for _ in 0..20 {
            let lam = c(rng.gen_range(1e-3..5.0), rng.gen_range(-6.0..6.0));
            let x = random_vec(&mut rng, n);
            match (perturbed_resolvent_apply(&m, &f, lam, &x), dense_resolvent_oracle(&m, &f, lam)) {
                (Ok(y), Ok(o)) => {
                    let z: Vec<Complex64> = (&o * nalgebra::DVector::from_column_slice(&x)).iter().cloned().collect();
                    worst = worst.max(relative_deviation(&y, &z));
                }
                _ => errors += 1,
            }
        }
    }
    cl.check(errors == 0, format!("{errors} of 2000 evaluations raised"));
    cl.check(worst <= 1e-10, format!("max relative deviation {worst:.2e} <= 1e-10"));
    cl
}

fn criterion_4() -> Claims {
    let mut cl = Claims::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dirs = [MomentDirection::PositivePower, MomentDirection::InversePowerB, MomentDirection::InversePowerC];
    let (mut violations, mut worst_eq): (usize, f64) = (0, 0.0);
    for trial in 0..1000 {
        let n = rng.gen_range(2..40);
        let m = random_model(&mut rng, n);
        let omega = rng.gen_range(-5.0..5.0);
        let alpha = rng.gen_range(0.2..4.0);
        let at = alpha * rng.gen_range(0.02..0.98);
        let x = random_vec(&mut rng, n);
        let dir = dirs[trial % 3];
        let r = check_moment_inequality(&m, omega, at, alpha, &x, dir).unwrap();
        if !(r.lhs <= r.rhs) {
            violations += 1;
        }
        let j = rng.gen_range(0..n);
        let mut e = vec![c(0.0, 0.0); n];
        e[j] = x[j];
        let r = check_moment_inequality(&m, omega, at, alpha, &e, dir).unwrap();
        worst_eq = worst_eq.max((r.lhs - r.rhs).abs() / r.rhs);
    }
    cl.check(violations == 0, format!("{violations} of 1000 trials with lhs > rhs"));
    cl.check(worst_eq <= 1e-12, format!("single-point vectors: max |lhs - rhs|/rhs = {worst_eq:.1e}"));
    cl
}

fn criterion_5() -> Claims {
    let mut cl = Claims::default();
    let m = reciprocal_model(50).unwrap();
    let mut x = vec![c(0.0, 0.0); 50];
    x[2] = c(1.0, 0.0);
    let zero = PerturbationFactors::zero(50, 1);
    let r = uniform_boundedness_functional(&m, &zero, &x, &XiGrid::default(), &QuadOptions::default(), false).unwrap();
    let worst = r
        .samples
        .iter()
        .map(|s| {
            let exact = s.xi * PI / (s.xi + 1.0 / 3.0);
            (s.value - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    cl.check(worst <= 1e-3, format!("{} points, max relative error {worst:.1e}", r.samples.len()));
    cl.check(r.sup >= 0.999 * PI, format!("sup = {:.6} >= 0.999 pi", r.sup));
    cl.check(r.verdict() == Verdict::Pass, format!("verdict {:?}", r.verdict()));
    cl
}

fn criterion_6() -> Claims {
    let mut cl = Claims::default();
    let t = Instant::now();
    let m = reciprocal_model(500).unwrap();
    let cert = reciprocal_certificate(&m, 0.8).unwrap();
    let f = budget_factors(&m, &cert, 0.5).unwrap();
    let opts = VerifyOptions::default();
    let scan = scan_transfer_norm(&m, &f, &cert.regions, &opts.polar, &opts.window).unwrap();
    cl.check(scan.max <= cert.c, format!("transfer scan max {:.4} <= c", scan.max));
    let inj = check_injectivity_at_resonances(&m, &f, &cert.profile.resonances, cert.profile.alpha, cert.beta).unwrap();
    cl.check(inj.iter().all(|i| i.product < 1.0), format!("injectivity product {:.4}", inj[0].product));
    let g = check_resolvent_growth(&m, &f, &cert.profile, cert.c, cert.profile.alpha, &opts.growth).unwrap();
    let mk = g.m_k.iter().cloned().fold(0.0, f64::max);
    let bound = cert.profile.m_a + mk / (1.0 - cert.c);
    cl.check(g.sup_near.is_finite() && g.sup_near <= bound, format!("growth sup {:.4} <= M_A + M_k/(1-c) = {bound:.4}", g.sup_near));
    let horizon = 5.0 * m.len() as f64;
    let times: Vec<f64> = (0..=50).map(|k| horizon * k as f64 / 50.0).collect();
    let x = random_unit_vector(&m, opts.seed);
    let tr = simulate_semigroup(&m, &f, &x, &times).unwrap();
    cl.check(tr.sup <= 2.0 * tr.initial_norm, format!("trajectory sup {:.4} <= 2|x|", tr.sup));
    cl.check(tr.final_norm < 0.2 * tr.initial_norm, format!("|T(5N)x| = {:.2e} < 0.2|x|", tr.final_norm));
    let secs = t.elapsed().as_secs_f64();
    cl.check(secs < 120.0, format!("{secs:.1} s < 120 s"));
    cl
}

fn run_bin(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_semistab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn criterion_7() -> Claims {
    let mut cl = Claims::default();
    let n = 50;
    let m = reciprocal_model(n).unwrap();
    let f = oversized_factors(n).unwrap();
    let g = dense_generator(&m, Some(&f));
    let ev = eigenvalues(n, g.as_slice());
    let gap = ev.iter().map(|z| (z - c(3.0, 0.0)).norm()).fold(f64::INFINITY, f64::min);
    cl.check(gap <= 1e-8, format!("dense eigenvalue at 3 within {gap:.1e}"));
    let scan = scan_transfer_norm(&m, &f, &[OmegaRegion { omega: 0.0, eps: 1.0 }], &PolarGridSpec::default(), &WindowSpec::default()).unwrap();
    cl.check(scan.max >= 4.0, format!("transfer scan max {:.6} >= 4", scan.max));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("model.json"), r#"{"kind": "diagonal_sequence", "rule": "neg_reciprocal", "n": 50}"#).unwrap();
    fs::write(dir.path().join("pert.json"), r#"{"kind": "unit", "index": 0, "s": 2.0}"#).unwrap();
    let cert = run_bin(&["certify", "--model", "model.json", "--out", "cert.json"], dir.path());
    cl.check(cert.status.code() == Some(0), format!("certify exit {:?}", cert.status.code()));
    let ver = run_bin(&["verify", "--model", "model.json", "--pert", "pert.json", "--cert", "cert.json", "--out", "v.json"], dir.path());
    cl.check(ver.status.code() == Some(1), format!("verify exit {:?}", ver.status.code()));

    let tr = simulate_semigroup(&m, &f, &first_unit_vector(&m), &[10.0, 11.0]).unwrap();
    let growth = tr.norms[1] / tr.norms[0];
    cl.check(growth >= 2.9f64.exp(), format!("|T(11)e1|/|T(10)e1| = {growth:.4} >= e^2.9"));
    cl
}

fn criterion_8() -> Claims {
    let mut cl = Claims::default();
    let t = Instant::now();
    let n = 400;
    let m = oscillator_model(n).unwrap();
    let f = positive_budget_factors(&m, 0.5, 0.5, 0.05).unwrap();
    let nb = positive_graph_norm(&m, &f, 0.5, Side::B).unwrap();
    let nc = positive_graph_norm(&m, &f, 0.5, Side::C).unwrap();
    cl.check(nb <= 0.05 * (1.0 + 1e-12) && nc <= 0.05 * (1.0 + 1e-12), format!("|(-A)^1/2 B| = {nb:.4}, |(-A*)^1/2 C*| = {nc:.4}"));
    let times = decay_window(n, 24);
    for (label, ff) in [("unperturbed", PerturbationFactors::zero(n, 1)), ("perturbed", f)] {
        let fit = fit_polynomial_decay(&m, &ff, &times, -1.0, label).unwrap();
        cl.check(
            (fit.slope + 1.0).abs() <= 0.1 && fit.verdict == DecayVerdict::Polynomial,
            format!("{label} exponent {:.5} on t in [{}, {}]", fit.slope, times[0], times[times.len() - 1]),
        );
    }
    let secs = t.elapsed().as_secs_f64();
    cl.check(secs < 120.0, format!("{secs:.1} s < 120 s"));
    cl
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn criterion_9() -> Claims {
    let mut cl = Claims::default();
    let dir = tempfile::tempdir().unwrap();
    let a = run_bin(&["reproduce", "disk", "--out", "a"], dir.path());
    let b = run_bin(&["reproduce", "disk", "--out", "b"], dir.path());
    cl.check(a.status.success() && b.status.success(), format!("exit codes {:?} {:?}", a.status.code(), b.status.code()));
    let (ta, tb) = (read_tree(&dir.path().join("a")), read_tree(&dir.path().join("b")));
    cl.check(!ta.is_empty() && ta == tb, format!("{} files byte-identical", ta.len()));
    cl.check(a.stdout == b.stdout, "console tables identical");
    cl
}

fn main() {
    let criteria: [(&str, fn() -> Claims); 9] = [
        ("disk reproduction", criterion_1),
        ("reciprocal-diagonal resolvent", criterion_2),
        ("SMW against dense oracle", criterion_3),
        ("moment inequality", criterion_4),
        ("Poisson-integral oracle", criterion_5),
        ("positive control", criterion_6),
        ("negative control", criterion_7),
        ("polynomial decay exponent", criterion_8),
        ("deterministic reports", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(cl) => (cl.ok(), cl.detail()),
            Err(e) => (false, format!("panicked: {:?}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())))),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {} {} {}: {}", i + 1, if ok { "PASS" } else { "FAIL" }, name, detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
