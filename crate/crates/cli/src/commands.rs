//! One function per subcommand. Each writes its files and returns whether
//! everything it checked passed.

use std::path::Path;

use semistab_core::certificate::{direct_m2, power_resolvent_sup, scale_to_budget, BindingTerm};
use semistab_core::grid::{linspace, logspace, PolarGridSpec, WindowSpec};
use semistab_core::model::resolvent_norm_exact;
use semistab_core::presets;
use semistab_core::verification::{
    decay_horizon, random_unit_vector, simulate_semigroup, simulate_semigroup_adaptive, verify_certificate, verify_polynomial,
    Trajectory, VerifyOptions,
};
use semistab_core::{
    compose_certificate, estimate_resolvent_profile, perturbed_resolvent_norm, CertifyOptions, Complex64, PerturbationFactors, RobustnessCertificate,
    SpectralModel, VerificationReport,
};
use serde::{Deserialize, Serialize};

use crate::args::{CertifyArgs, PolyArgs, Preset, ReproduceArgs, SimulateArgs, VerifyArgs};
use crate::config::{read_json, write_json, ModelFile, PerturbationSpec};
use crate::report::{render_table, write_series, write_table, TableRow};
use crate::{CliError, Outcome};

/// Certificate on disk, with the model it was computed for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub model: ModelFile,
    pub certificate: RobustnessCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyFile {
    pub model: ModelFile,
    pub perturbation: PerturbationSpec,
    pub delta: f64,
    pub c: f64,
    pub passed: bool,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceFile {
    pub preset: String,
    pub rows: Vec<TableRow>,
    pub certificate: Option<RobustnessCertificate>,
    pub verification: Option<VerificationReport>,
    pub notes: Vec<String>,
}

pub fn certify_model(file: &ModelFile, model: &SpectralModel, args: &CertifyArgs) -> Result<RobustnessCertificate, CliError> {
    let profile = estimate_resolvent_profile(model, &args.grid.profile_scan())?;
    let alpha = profile.alpha;
    let (beta, gamma) = match (args.beta, args.gamma) {
        (None, None) => (alpha / 2.0, alpha / 2.0),
        (Some(b), None) => (b, alpha - b),
        (None, Some(g)) => (alpha - g, g),
        (Some(b), Some(g)) => (b, g),
    };
    if (beta + gamma - alpha).abs() > 1e-12 * alpha.max(1.0) {
        return Err(CliError::Config(format!("beta + gamma = {} must equal the measured alpha = {alpha}", beta + gamma)));
    }
    let m2_override = if args.direct_m2 || file.direct_m2 { Some(direct_m2(model, &profile, 4001, 257)?) } else { None };
    let opts = CertifyOptions { m1_override: args.m1.or(file.analytic_m1), m2_override, moment_constant: 1.0 };
    Ok(compose_certificate(&profile, beta, gamma, args.c, &opts)?)
}

pub fn certify(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let file: ModelFile = read_json(&args.model)?;
    let model = file.build()?;
    let cert = certify_model(&file, &model, args)?;
    println!("{}", model.truncation_note);
    println!("resonances: {:?}", cert.profile.resonances);
    println!("alpha = {}, eps_A = {}, M_A = {}", cert.profile.alpha, cert.profile.eps_a, cert.profile.m_a);
    println!("M0 = {}, M1 = {} ({:?}), M2 = {} ({:?})", cert.m0, cert.m1, cert.m1_source, cert.m2, cert.m2_source);
    println!("delta = {:.12} (binding: {})", cert.delta, binding_name(cert.binding));
    for d in &cert.diagnostics {
        println!("note: {d}");
    }
    write_json(&args.out, &CertificateFile { model: file, certificate: cert })?;
    Ok(Outcome::Pass)
}

pub fn binding_name(b: BindingTerm) -> &'static str {
    match b {
        BindingTerm::Delta1 => "delta1, the transfer bound near the resonances",
        BindingTerm::Delta2 => "delta2, injectivity at the resonances",
        BindingTerm::OffResonance => "sqrt(c/M2), the transfer bound away from the resonances",
    }
}

fn trajectory_rows(t: &Trajectory) -> Vec<Vec<f64>> {
    t.times.iter().zip(&t.norms).map(|(a, b)| vec![*a, *b]).collect()
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    if !args.cert.exists() {
        return Err(CliError::Config(format!(
            "no certificate at {}; run `semistab certify --model {} --out {}` first",
            args.cert.display(),
            args.model.display(),
            args.cert.display()
        )));
    }
    let file: ModelFile = read_json(&args.model)?;
    let cf: CertificateFile = read_json(&args.cert)?;
    if cf.model != file {
        return Err(CliError::Config(format!("certificate {} was computed for a different model", args.cert.display())));
    }
    let model = file.build()?;
    let spec: PerturbationSpec = read_json(&args.pert)?;
    let factors = spec.build(&model)?;
    let opts = VerifyOptions { simulate: !args.no_simulate, horizon: args.t_max, trajectory_steps: args.steps, ..args.grid.verify_options() };
    let report = verify_certificate(&model, &factors, &cf.certificate, &opts)?;
    let passed = report.passed();
    for r in &report.records {
        println!("{:<34} {:>14.6e}  vs {:>14}  {:?}", r.name, r.measured, r.threshold.map_or("-".to_string(), |t| format!("{t:.6e}")), r.verdict);
    }
    if let Some(dir) = &args.plots {
        plot_certificate(dir, &cf.certificate)?;
        for (i, t) in report.trajectories.iter().enumerate() {
            write_series(&dir.join(format!("trajectory_{i}.csv")), &["t", "norm"], trajectory_rows(t))?;
        }
    }
    let out = VerifyFile { model: file, perturbation: spec, delta: cf.certificate.delta, c: cf.certificate.c, passed, report };
    write_json(&args.out, &out)?;
    println!("{}", if passed { "all checks passed" } else { "verification FAILED" });
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

fn plot_certificate(dir: &Path, cert: &RobustnessCertificate) -> Result<(), CliError> {
    write_series(&dir.join("ladder.csv"), &["alpha", "ratio"], cert.profile.ladder.iter().map(|r| vec![r.alpha, r.ratio]))
}

pub fn poly_times(model: &SpectralModel, t_min: Option<f64>, t_max: Option<f64>, n: usize) -> Result<Vec<f64>, CliError> {
    let d = presets::decay_window(model.len(), n.max(6));
    let (a, b) = (t_min.unwrap_or(d[0]), t_max.unwrap_or(d[d.len() - 1]));
    if !(a > 0.0 && b > a) {
        return Err(CliError::Config(format!("time window [{a}, {b}] must satisfy 0 < t_min < t_max")));
    }
    Ok(logspace(a, b, n.max(6)))
}

pub fn verify_poly(args: &PolyArgs) -> Result<Outcome, CliError> {
    if args.beta + args.gamma < args.alpha - 1e-12 {
        return Err(CliError::Config(format!("beta + gamma = {} must be at least alpha = {}", args.beta + args.gamma, args.alpha)));
    }
    let file: ModelFile = read_json(&args.model)?;
    let model = file.build()?;
    let spec: PerturbationSpec = read_json(&args.pert)?;
    let factors = spec.build(&model)?;
    let times = poly_times(&model, args.t_min, args.t_max, args.n_times)?;
    let report = verify_polynomial(&model, &factors, args.beta, args.gamma, args.alpha, args.budget, &times)?;
    for f in &report.decay_fits {
        println!("{}: fitted exponent {:.6} (target {}) {:?}", f.label, f.slope, f.target, f.verdict);
    }
    if let Some(dir) = &args.plots {
        for f in &report.decay_fits {
            write_series(&dir.join(format!("{}.csv", f.label)), &["t", "envelope"], f.times.iter().zip(&f.envelope).map(|(a, b)| vec![*a, *b]))?;
        }
    }
    let passed = report.passed();
    write_json(&args.out, &report)?;
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

pub fn simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let file: ModelFile = read_json(&args.model)?;
    let model = file.build()?;
    let spec: PerturbationSpec = read_json(&args.pert)?;
    let factors = spec.build(&model)?;
    let x = match args.index {
        Some(k) if k < model.len() => {
            let mut e = vec![Complex64::new(0.0, 0.0); model.len()];
            e[k] = Complex64::new(1.0 / model.weights[k].sqrt(), 0.0);
            e
        }
        Some(k) => return Err(CliError::Config(format!("index {k} out of range for N = {}", model.len()))),
        None => random_unit_vector(&model, args.seed),
    };
    let t_max = args.t_max.unwrap_or_else(|| decay_horizon(&model, 5.0));
    let times = linspace(0.0, t_max, args.steps + 1);
    let traj = if args.adaptive || model.len() > semistab_core::resolvent::DENSE_LIMIT {
        simulate_semigroup_adaptive(&model, &factors, &x, &times, 1e-8)?
    } else {
        simulate_semigroup(&model, &factors, &x, &times)?
    };
    write_series(&args.out, &["t", "norm"], trajectory_rows(&traj))?;
    println!("|x| = {}, sup = {}, final = {}, growth = {}", traj.initial_norm, traj.sup, traj.final_norm, traj.growth);
    Ok(Outcome::Pass)
}

/// Points of the closed right half-plane window, excluding 0, plus half-disk
/// grids towards every resonance.
fn m1_grid(cert: &RobustnessCertificate) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = WindowSpec::default().points().into_iter().filter(|z| z.norm() > 0.0).collect();
    for r in &cert.regions {
        pts.extend(PolarGridSpec::default().points(r.omega, r.eps));
    }
    pts
}

fn reproduce_disk() -> Result<ReproduceFile, CliError> {
    let (nr, na) = presets::DISK_NODES;
    let model = presets::disk_model(nr, na)?;
    let cert = presets::disk_certificate(&model, presets::DISK_C)?;
    let m1 = power_resolvent_sup(&model, 2.0, &m1_grid(&cert), 4096);
    let r_i = resolvent_norm_exact(&model, Complex64::new(0.0, 1.0))?;
    let factors = scale_to_budget(&model, &presets::disk_monomial_factors(&model, 1.0)?, &cert, 0.5)?;
    let opts = VerifyOptions { simulate: false, ..VerifyOptions::default() };
    let rep = verify_certificate(&model, &factors, &cert, &opts)?;
    let passed = rep.records.iter().filter(|r| r.verdict == semistab_core::Verdict::Pass).count();
    let expected_delta = 0.1f64.sqrt();
    let rows = vec![
        TableRow::new("grid sup |(-A)^2 R(lambda,A)|", "<= 8", m1, m1 <= 8.0 + 1e-6),
        TableRow::new("|R(i,A)|", "1 + sqrt(2)", r_i, (r_i - (1.0 + 2f64.sqrt())).abs() < 1e-12),
        TableRow::new("alpha", "2", cert.profile.alpha, cert.profile.alpha == 2.0),
        TableRow::new("delta", "1/sqrt(10) = 0.316228", cert.delta, (cert.delta - expected_delta).abs() < 1e-12),
        TableRow::new("delta binding is delta1", "1", f64::from(u8::from(cert.binding == BindingTerm::Delta1)), cert.binding == BindingTerm::Delta1),
        TableRow::new("M_D = 1/(1-c)", "5", cert.m_d, (cert.m_d - 5.0).abs() < 1e-12),
        TableRow::new("half-budget checks passed", format!("{} of {}", rep.records.len(), rep.records.len()), passed as f64, rep.passed()),
    ];
    Ok(ReproduceFile {
        preset: "disk".into(),
        rows,
        certificate: Some(cert),
        verification: Some(rep),
        notes: vec![
            model.truncation_note.clone(),
            "factors b = c = s mu scaled to half of delta in every budgeted norm".into(),
        ],
    })
}

fn reproduce_diagonal() -> Result<ReproduceFile, CliError> {
    let big = presets::reciprocal_model(10_000)?;
    let zero = PerturbationFactors::zero(big.len(), 1);
    let mut rows = Vec::new();
    for w in [0.01, 0.1, 0.5, 1.0] {
        let est = perturbed_resolvent_norm(&big, &zero, Complex64::new(0.0, w), 1e-12, 100)?;
        let v = w * est.truncated;
        rows.push(TableRow::new(format!("|w| |R(iw,A_N)|, w = {w}, N = 10000"), "1 (truncation: 1/sqrt(1+(wN)^-2))", v, (1.0 - 1e-3..=1.0).contains(&v)));
    }
    let profile = estimate_resolvent_profile(&big, &semistab_core::ProfileScan::default())?;
    rows.push(TableRow::new("alpha, N = 10000", "1", profile.alpha, profile.alpha == 1.0));

    let model = presets::reciprocal_model(500)?;
    let cert = presets::reciprocal_certificate(&model, 0.8)?;
    let factors = presets::budget_factors(&model, &cert, 0.5)?;
    let rep = verify_certificate(&model, &factors, &cert, &VerifyOptions::default())?;
    rows.push(TableRow::new("alpha, N = 500", "1", cert.profile.alpha, cert.profile.alpha == 1.0));
    rows.push(TableRow::new("delta, N = 500", "> 0", cert.delta, cert.delta > 0.0));
    let passed = rep.records.iter().filter(|r| r.verdict == semistab_core::Verdict::Pass).count();
    rows.push(TableRow::new("half-budget checks passed", format!("{} of {}", rep.records.len(), rep.records.len()), passed as f64, rep.passed()));
    Ok(ReproduceFile {
        preset: "diagonal".into(),
        rows,
        certificate: Some(cert),
        verification: Some(rep),
        notes: vec![model.truncation_note.clone(), "factors b = c proportional to k^-3/2 at half budget".into()],
    })
}

fn reproduce_poly() -> Result<ReproduceFile, CliError> {
    let model = presets::oscillator_model(400)?;
    let factors = presets::positive_budget_factors(&model, 0.5, 0.5, 0.05)?;
    let times = presets::decay_window(400, 24);
    let rep = verify_polynomial(&model, &factors, 0.5, 0.5, 1.0, 0.05, &times)?;
    let mut rows = Vec::new();
    for f in &rep.decay_fits {
        let ok = rep.record(&f.label).is_some_and(|r| r.verdict == semistab_core::Verdict::Pass);
        rows.push(TableRow::new(format!("decay exponent ({})", f.label), "-1 +- 10%", f.slope, ok));
    }
    Ok(ReproduceFile {
        preset: "poly".into(),
        rows,
        certificate: None,
        verification: Some(rep),
        notes: vec![model.truncation_note.clone(), "|(-A)^1/2 B| = |(-A*)^1/2 C*| = 0.05".into()],
    })
}

pub fn reproduce(args: &ReproduceArgs) -> Result<Outcome, CliError> {
    let file = match args.preset {
        Preset::Disk => reproduce_disk()?,
        Preset::Diagonal => reproduce_diagonal()?,
        Preset::Poly => reproduce_poly()?,
    };
    let dir = &args.out;
    write_json(&dir.join("report.json"), &file)?;
    write_table(&dir.join("table.csv"), &file.rows)?;
    if let Some(c) = &file.certificate {
        plot_certificate(dir, c)?;
    }
    if let Some(v) = &file.verification {
        for f in &v.decay_fits {
            write_series(&dir.join(format!("{}.csv", f.label)), &["t", "envelope"], f.times.iter().zip(&f.envelope).map(|(a, b)| vec![*a, *b]))?;
        }
        for (i, t) in v.trajectories.iter().enumerate() {
            write_series(&dir.join(format!("trajectory_{i}.csv")), &["t", "norm"], trajectory_rows(t))?;
        }
    }
    print!("{}", render_table(&file.rows));
    Ok(if file.rows.iter().all(|r| r.pass) { Outcome::Pass } else { Outcome::Fail })
}
