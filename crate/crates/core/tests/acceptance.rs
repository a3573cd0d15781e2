//! Acceptance suite: one PASS/FAIL line per criterion, plus supplementary lines marked `+`.
//! Exits non-zero if any numbered criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use ndarray::s;
use num_complex::Complex64 as C64;
use rand::Rng;

use cvteleport::algebra::{CanonicalPolynomial, Monomial};
use cvteleport::experiments::{run_experiment, ExperimentConfig, Table};
use cvteleport::fock::{operator_matrix, FockState, FramedState, VectorPolicy};
use cvteleport::linalg::max_abs;
use cvteleport::phase_space::GaussianState;
use cvteleport::rng::trial_rng;
use cvteleport::teleport::{
    commutator_error, compose_noisy_gate, cvqt, loglog_slope, sigma_from, transfer_fock, transfer_gaussian, Backend, Squeezing,
    TeleportConfig, TeleportState,
};

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, started: Instant, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{id:<4} {tag}  {detail}  [{:.1}s]", started.elapsed().as_secs_f64());
        if !ok && !id.ends_with('+') {
            self.failed.push(id.to_string());
        }
    }
}

fn run(name: &str) -> Table {
    run_experiment(&ExperimentConfig::new(name)).expect("experiment runs").1
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn c1(rep: &mut Report) {
    let t0 = Instant::now();
    let t = run("cubic-correction-verify");
    let lit = t.find("deviation_literal").map(|r| r.mean).fold(0.0f64, f64::max);
    let cor = t.find("deviation_corrected").map(|r| r.mean).fold(0.0f64, f64::max);
    let conv = t.all_converged();
    let n = t.find("deviation_literal").count();
    let secs = t0.elapsed().as_secs_f64();
    rep.line(
        "C1",
        conv && lit < 1e-6 && secs < 30.0,
        t0,
        format!("exponent +3γq0q²: max deviation {lit:.3e} over {n} points (tol 1e-6)"),
    );
    rep.line("C1+", conv && cor < 1e-6, t0, format!("exponent −3γq0q²: max deviation {cor:.3e}"));
}

fn c2(rep: &mut Report) {
    let t0 = Instant::now();
    let exact = sigma_from(1.0 / 3.0, 1.0).unwrap() == 0.5;
    let mut rng = trial_rng(2, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eta: f64 = rng.random_range(0.0..1.0);
        worst = worst.max((sigma_from(eta, 1.0).unwrap() - (1.0 - eta) / (1.0 + eta)).abs());
    }
    let grid: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
    let nus: Vec<f64> = (1..=20).map(|i| 0.05 + 0.95 * i as f64 / 20.0).collect();
    let mut mono = true;
    for (i, &e) in grid.iter().enumerate() {
        for (j, &n) in nus.iter().enumerate() {
            let s = sigma_from(e, n).unwrap();
            if i + 1 < grid.len() && sigma_from(grid[i + 1], n).unwrap() >= s {
                mono = false;
            }
            if j + 1 < nus.len() && sigma_from(e, nus[j + 1]).unwrap() > s {
                mono = false;
            }
        }
    }
    rep.line(
        "C2",
        exact && worst < 1e-14 && mono,
        t0,
        format!("σ(1/3,1) = 0.5 exact: {exact}; max error {worst:.1e}; monotone: {mono}"),
    );
}

/// Per-coordinate variance added by the Gaussian protocol, from 10⁴ trials.
fn added_variance(eta: f64, seed: u64) -> [f64; 2] {
    let cfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian).unwrap();
    let input = TeleportState::Gaussian(GaussianState::coherent(0.5, -0.3));
    let (mut q, mut p, mut cond) = (Vec::new(), Vec::new(), [0.0; 2]);
    for t in 0..10_000 {
        let (out, _) = cvqt(&input, &cfg, &mut trial_rng(seed, 0, t)).unwrap();
        let TeleportState::Gaussian(g) = out else { unreachable!() };
        q.push(g.mean()[0]);
        p.push(g.mean()[1]);
        cond = [g.cov()[[0, 0]], g.cov()[[1, 1]]];
    }
    let var = |xs: &[f64]| {
        let (m, _) = mean_se(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    [var(&q) + cond[0] - 0.5, var(&p) + cond[1] - 0.5]
}

fn c3(rep: &mut Report) {
    let t0 = Instant::now();
    let (mut half, mut full) = (0.0f64, 0.0f64);
    let mut parts = Vec::new();
    for (k, eta) in [0.5, 0.76, 0.9].into_iter().enumerate() {
        let sigma = sigma_from(eta, 1.0).unwrap();
        let add = added_variance(eta, 30 + k as u64);
        for a in add {
            half = half.max((a / (sigma / 2.0) - 1.0).abs());
            full = full.max((a / sigma - 1.0).abs());
        }
        parts.push(format!("η={eta}: {:.4}/{:.4} vs σ={sigma:.4}", add[0], add[1]));
    }
    rep.line(
        "C3",
        half < 0.05,
        t0,
        format!("added variance vs σ/2: worst relative error {half:.3} (tol 0.05); {}", parts.join(", ")),
    );
    rep.line("C3+", full < 0.05, t0, format!("added variance vs σ: worst relative error {full:.3}"));
}

fn c4(rep: &mut Report) {
    let t0 = Instant::now();
    let t = run("gate-teleport-equivalence");
    let gauss = t.find("moment_deviation_max").map(|r| r.mean).fold(0.0f64, f64::max);
    let fid = t.find("fidelity_min").map(|r| r.mean).fold(1.0f64, f64::min);
    let ok = gauss < 1e-9 && fid > 0.999 && t.all_converged() && t0.elapsed().as_secs_f64() < 300.0;
    rep.line("C4", ok, t0, format!("Clifford moment deviation {gauss:.1e} (tol 1e-9); cubic min fidelity {fid:.12} (> 0.999)"));
}

fn c5(rep: &mut Report) {
    let t0 = Instant::now();
    let t = run("hierarchy-classify");
    let total = t.rows.len();
    let ok_n = t.rows.iter().filter(|r| r.note.ends_with("; match")).count();
    rep.line("C5", ok_n == total, t0, format!("{ok_n}/{total} built-in gates classified as expected"));
}

fn c6(rep: &mut Report) {
    let t0 = Instant::now();
    let t = run("commutator-scaling");
    let slope = t.find("loglog_slope").next().map(|r| r.mean).unwrap_or(f64::NAN);
    let errs: Vec<String> = t.find("op_norm_error").map(|r| format!("{:.3e}", r.mean)).collect();
    let ok = (slope - 3.0).abs() <= 0.2 && t.all_converged();
    rep.line("C6", ok, t0, format!("t ∈ {{0.2, 0.1, 0.05}}: slope {slope:.3} (3.0 ± 0.2); errors [{}]", errs.join(", ")));

    let t1 = Instant::now();
    let a = cvteleport::algebra::parse_polynomial("q^3", Some(1)).unwrap();
    let b = cvteleport::algebra::parse_polynomial("0.5*p^2", Some(1)).unwrap();
    let ts = [0.02, 0.01, 0.005];
    let mut errs = Vec::new();
    let mut conv = true;
    for &tt in &ts {
        let (e, c) = commutator_error(&a, &b, tt, 48, 24, 1e-10, 400).unwrap();
        conv &= c.converged;
        errs.push(e);
    }
    let slope = loglog_slope(&ts, &errs);
    rep.line("C6+", conv && (slope - 3.0).abs() <= 0.2, t1, format!("t ∈ {{0.02, 0.01, 0.005}}: slope {slope:.3}"));
}

/// Ensemble first and second moments: [⟨q⟩, ⟨p⟩, ⟨q²⟩, ⟨p²⟩, ⟨(qp+pq)/2⟩].
fn moments5(m: &ndarray::Array1<f64>, c: &ndarray::Array2<f64>) -> [f64; 5] {
    [m[0], m[1], c[[0, 0]] + m[0] * m[0], c[[1, 1]] + m[1] * m[1], c[[0, 1]] + m[0] * m[1]]
}

const NAMES: [&str; 5] = ["q", "p", "qq", "pp", "qp"];

/// Largest |z| between sampled moments and exact reference values.
fn worst_z(samples: &[[f64; 5]], want: &[f64; 5]) -> (f64, String) {
    let mut worst = (0.0f64, String::new());
    for k in 0..5 {
        let xs: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (m, se) = mean_se(&xs);
        let z = (m - want[k]).abs() / se.max(1e-300);
        if z > worst.0 {
            worst = (z, NAMES[k].to_string());
        }
    }
    worst
}

fn c7(rep: &mut Report) {
    let t0 = Instant::now();
    let q = std::f64::consts::SQRT_2;
    let base = FramedState::new(FockState::coherent(q, 0.0, 40), VectorPolicy::default()).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, sigma) in [0.25, 1.0].into_iter().enumerate() {
        let g = transfer_gaussian(&GaussianState::coherent(q, 0.0), sigma).unwrap();
        let want = moments5(g.mean(), g.cov());
        let samples: Vec<[f64; 5]> = (0..10_000)
            .map(|t| {
                let s = transfer_fock(&base, sigma, &mut trial_rng(70, k as u32, t)).unwrap();
                let (m, c) = s.moments().unwrap();
                moments5(&m, &c)
            })
            .collect();
        let (z, at) = worst_z(&samples, &want);
        ok &= z <= 3.0;
        parts.push(format!("σ={sigma}: max |z| {z:.2} ({at})"));
    }
    rep.line("C7", ok, t0, parts.join("; "));
}

fn c8(rep: &mut Report) {
    let t0 = Instant::now();
    let mut cfg = ExperimentConfig::new("noise-model-equivalence");
    cfg.seed = 8;
    let (cfg, t) = run_experiment(&cfg).unwrap();
    let zs: Vec<(String, f64)> =
        t.rows.iter().filter(|r| r.statistic.starts_with("diff:")).map(|r| (r.statistic.clone(), r.mean / r.stderr)).collect();
    let worst = zs.iter().fold(0.0f64, |m, (_, z)| m.max(z.abs()));
    let detail: Vec<String> = zs.iter().map(|(s, z)| format!("{} {z:+.1}", &s[5..])).collect();
    rep.line("C8", worst <= 3.0, t0, format!("protocol vs ℰ_U∘ℰ_σ: z = [{}] (|z| ≤ 3)", detail.join(", ")));

    // the same protocol samples against the model with twice the kernel variance
    let t1 = Instant::now();
    let input = cfg.input.unwrap();
    let sigma = sigma_from(cfg.eta[0], cfg.nu[0]).unwrap();
    let u = cvteleport::algebra::parse_gate_expression(&cfg.gates[0]).unwrap();
    let model = compose_noisy_gate(u, 2.0 * sigma, None)
        .unwrap()
        .apply_gaussian(&GaussianState::coherent(input[0], input[1]), &mut trial_rng(0, 0, 0))
        .unwrap();
    let want = moments5(model.mean(), model.cov());
    let stats = ["protocol:mean_q", "protocol:mean_p", "protocol:second_qq", "protocol:second_pp", "protocol:second_qp"];
    let mut worst = 0.0f64;
    for (k, s) in stats.iter().enumerate() {
        let r = t.find(s).next().unwrap();
        worst = worst.max(((r.mean - want[k]) / r.stderr).abs());
    }
    rep.line("C8+", worst <= 3.0, t1, format!("protocol vs ℰ_U∘ℰ_2σ: max |z| {worst:.2}"));
}

fn c9(rep: &mut Report) {
    let t0 = Instant::now();
    let t = run("teleport-fidelity-sweep");
    let col = t.axes.iter().position(|a| a == "sigma").unwrap();
    let mut pts: Vec<(f64, f64)> = t.find("fidelity").map(|r| (r.axes[col].parse().unwrap(), r.mean)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let crit = t.find("critical_sigma").next().map(|r| (r.mean, r.stderr));
    let ok = lo.1 > 0.9 && hi.1 < 0.9 && crit.is_some_and(|c| c.0.is_finite());
    let (c, se) = crit.unwrap_or((f64::NAN, f64::NAN));
    rep.line(
        "C9",
        ok,
        t0,
        format!("F(σ={:.3}) = {:.3}, F(σ={:.3}) = {:.3}; crossing at σ ≈ {c:.3} ± {se:.3} (recorded)", lo.0, lo.1, hi.0, hi.1),
    );
}

fn random_poly<R: Rng>(rng: &mut R, nmodes: usize, max_exp: u32) -> CanonicalPolynomial {
    let nterms = rng.random_range(0..4);
    let terms: Vec<(Monomial, C64)> = (0..nterms)
        .map(|_| {
            let e: Vec<u32> = (0..2 * nmodes).map(|_| rng.random_range(0..=max_exp)).collect();
            // quarter-integer coefficients keep products exact
            let c = C64::new(rng.random_range(-8..=8) as f64 / 4.0, rng.random_range(-8..=8) as f64 / 4.0);
            (Monomial::from_exponents(e), c)
        })
        .collect();
    CanonicalPolynomial::from_terms(nmodes, terms)
}

fn c10(rep: &mut Report) {
    let t0 = Instant::now();
    let mut rng = trial_rng(10, 0, 0);
    let (mut ring, mut jac, mut hom) = (0, 0, 0);
    let n = 500;
    for _ in 0..n {
        let (a, b, c) = (random_poly(&mut rng, 2, 2), random_poly(&mut rng, 2, 2), random_poly(&mut rng, 2, 2));
        let assoc = &(&a * &b) * &c == &a * &(&b * &c);
        let dist = &a * &(&b + &c) == &(&a * &b) + &(&a * &c) && &(&a + &b) * &c == &(&a * &c) + &(&b * &c);
        let neg = -a.clone();
        let unit = &a * &CanonicalPolynomial::identity(2) == a && (&a + &neg).is_zero();
        ring += (assoc && dist && unit) as usize;

        let (x, y, z) = (random_poly(&mut rng, 1, 3), random_poly(&mut rng, 1, 3), random_poly(&mut rng, 1, 3));
        let cm = |u: &CanonicalPolynomial, v: &CanonicalPolynomial| u.commutator(v).unwrap();
        let j = cm(&x, &cm(&y, &z)) + cm(&y, &cm(&z, &x)) + cm(&z, &cm(&x, &y));
        jac += j.is_zero() as usize;

        let (u, v) = (random_poly(&mut rng, 1, 2), random_poly(&mut rng, 1, 2));
        let (k, m) = (10, 14);
        let prod = operator_matrix(&u, m).unwrap().matrix.dot(&operator_matrix(&v, m).unwrap().matrix);
        let direct = operator_matrix(&(&u * &v), k).unwrap().matrix;
        let d = max_abs(&(prod.slice(s![..k, ..k]).to_owned() - &direct));
        hom += (d <= 1e-8 * max_abs(&direct).max(1.0)) as usize;
    }
    let ok = ring == n && jac == n && hom == n && t0.elapsed().as_secs_f64() < 60.0;
    rep.line("C10", ok, t0, format!("ring {ring}/{n}, Jacobi {jac}/{n}, matrix homomorphism {hom}/{n}"));
}

fn main() -> ExitCode {
    let mut rep = Report { failed: Vec::new() };
    c1(&mut rep);
    c2(&mut rep);
    c3(&mut rep);
    c4(&mut rep);
    c5(&mut rep);
    c6(&mut rep);
    c7(&mut rep);
    c8(&mut rep);
    c9(&mut rep);
    c10(&mut rep);
    if rep.failed.is_empty() {
        println!("all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("failing: {}", rep.failed.join(", "));
        ExitCode::FAILURE
    }
}
