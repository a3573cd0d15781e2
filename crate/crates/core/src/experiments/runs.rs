use std::f64::consts::FRAC_PI_4;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{ExperimentConfig, Row};
use crate::algebra::{
    classify, cubic_correction_exponent, format_gate, parse_gate_expression, parse_polynomial, pauli_exponent,
    CanonicalPolynomial, GateSpec, HierarchyLevel,
};
use crate::error::{Error, Result};
use crate::fock::matrix::dagger;
use crate::fock::{
    converge, displacement_matrix, gate_matrix_full, max_diff_mod_phase, Convergence, ExpMethod, FockState, FramedState,
    VectorPolicy,
};
use crate::linalg::max_abs;
use crate::phase_space::{apply_gate, fidelity_gaussian, GaussianState};
use crate::rng::trial_rng;
use crate::teleport::{
    commutator_error, compose_noisy_gate, cvqt, sigma_from, teleport_gate, Backend, Squeezing, TeleportConfig, TeleportState,
};

type Output = (Vec<&'static str>, Vec<Row>);

fn v(x: f64) -> String {
    format!("{x}")
}

fn grid2<A: Copy + Send + Sync, B: Copy + Send + Sync>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// Run `f` over the points on the pool; rows come back in point order.
fn sweep<P: Sync, F>(points: &[P], f: F) -> Result<Vec<Row>>
where
    F: Fn(u32, &P) -> Result<Vec<Row>> + Sync,
{
    let parts: Vec<Result<Vec<Row>>> = points.par_iter().enumerate().map(|(k, p)| f(k as u32, p)).collect();
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

fn framed_coherent(q: f64, p: f64, cutoff: usize) -> Result<FramedState> {
    let mut st = FramedState::new(FockState::vacuum(cutoff, 1), VectorPolicy::default())?;
    st.apply_gate(&GateSpec::displacement(q, p))?;
    Ok(st)
}

fn input_state(backend: Backend, q: f64, p: f64, cutoff: usize) -> Result<TeleportState> {
    Ok(match backend {
        Backend::Gaussian => TeleportState::Gaussian(GaussianState::coherent(q, p)),
        Backend::Fock => TeleportState::Fock(framed_coherent(q, p, cutoff)?),
    })
}

fn teleport_config(eta: f64, nu: f64, backend: Backend, cutoff: usize) -> Result<TeleportConfig> {
    let mut tc = TeleportConfig::new(Squeezing::Eta(eta), nu, backend)?;
    tc.cutoff = cutoff;
    tc.validate()?;
    Ok(tc)
}

fn converged(st: &TeleportState) -> bool {
    match st {
        TeleportState::Gaussian(_) => true,
        TeleportState::Fock(f) => f.converged,
    }
}

fn state_fidelity(a: &TeleportState, b: &TeleportState) -> Result<f64> {
    match (a, b) {
        (TeleportState::Gaussian(x), TeleportState::Gaussian(y)) => fidelity_gaussian(x, y),
        (TeleportState::Fock(x), TeleportState::Fock(y)) => x.fidelity(y),
        _ => Err(Error::Domain("fidelity across backends".into())),
    }
}

fn moments(st: &TeleportState) -> Result<(ndarray::Array1<f64>, ndarray::Array2<f64>)> {
    match st {
        TeleportState::Gaussian(g) => Ok((g.mean().clone(), g.cov().clone())),
        TeleportState::Fock(f) => f.moments(),
    }
}

fn apply_to(st: &mut TeleportState, u: &GateSpec) -> Result<()> {
    match st {
        TeleportState::Gaussian(g) => *g = apply_gate(u, g)?,
        TeleportState::Fock(f) => f.apply_gate(u)?,
    }
    Ok(())
}

fn fock_cutoff(cfg: &ExperimentConfig) -> usize {
    cfg.cutoff.first().copied().unwrap_or(48)
}

/// Backend for a gate: Gaussian gates follow the config, anything else needs Fock.
fn backend_for(cfg: &ExperimentConfig, u: &GateSpec) -> Backend {
    if u.max_degree() > 2 {
        Backend::Fock
    } else {
        cfg.backend.unwrap_or_default()
    }
}

pub(super) fn fidelity_sweep(cfg: &ExperimentConfig) -> Result<Output> {
    let backend = cfg.backend.unwrap_or_default();
    let spread = cfg.input_spread.unwrap_or(1.0);
    let cutoff = fock_cutoff(cfg);
    let n = cfg.trials();
    let points = grid2(&cfg.eta, &cfg.nu);
    let mut rows = sweep(&points, |k, &(eta, nu)| {
        let tc = teleport_config(eta, nu, backend, cutoff)?;
        let sigma = tc.sigma();
        let axes = [v(eta), v(nu), v(sigma)];
        let mut fs = Vec::with_capacity(n);
        let mut ok = true;
        for trial in 0..n {
            let mut rng = trial_rng(cfg.seed, k, trial as u32);
            let (q, p) = if spread > 0.0 {
                let d = Normal::new(0.0, spread).expect("positive spread");
                (d.sample(&mut rng), d.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            let input = input_state(backend, q, p, cutoff)?;
            let (out, _) = cvqt(&input, &tc, &mut rng)?;
            ok &= converged(&out);
            fs.push(state_fidelity(&out, &input)?);
        }
        Ok(vec![
            Row::from_samples(&axes, "fidelity", &fs).converged(ok).note(format!("coherent inputs, spread {spread}")),
            Row::exact(&axes, "fidelity_unit_gain", 1.0 / (1.0 + sigma)).note("closed form 1/(1+σ) for coherent inputs"),
        ])
    })?;
    rows.push(critical_sigma(&rows));
    Ok((vec!["eta", "nu", "sigma"], rows))
}

/// Where the sampled fidelity falls through 1/2, interpolated linearly in σ.
fn critical_sigma(rows: &[Row]) -> Row {
    let mut pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.statistic == "fidelity")
        .map(|r| (r.axes[2].parse::<f64>().unwrap_or(f64::NAN), r.mean, r.stderr))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let trials = rows.iter().filter(|r| r.statistic == "fidelity").map(|r| r.trials).sum();
    for w in pts.windows(2) {
        let ((s0, f0, e0), (s1, f1, e1)) = (w[0], w[1]);
        if f0 > 0.5 && f1 <= 0.5 && s1 > s0 {
            let slope = (f1 - f0) / (s1 - s0);
            let sc = s0 + (0.5 - f0) / slope;
            let se = e0.max(e1) / slope.abs();
            return Row::new(&[], "critical_sigma", sc, se, trials)
                .note("fidelity crosses 1/2 here; depends on the input ensemble");
        }
    }
    Row::new(&[], "critical_sigma", f64::NAN, f64::NAN, trials).note("no crossing inside the sweep")
}

/// Lower n×n block of V(γ) R(q0, p0) V(γ)† for every displacement, with the working cutoff
/// grown until all blocks are stable to `tol`. Only the top rows of V are needed, so each
/// product costs O(n·w²) on top of one exponential per working cutoff.
fn conjugated_blocks(
    gamma: f64,
    n: usize,
    disps: &[(f64, f64)],
    tol: f64,
    maxc: usize,
) -> Result<(Vec<Array2<C64>>, Convergence)> {
    let g = GateSpec::cubic(gamma);
    let build = |w: usize| -> Result<Vec<Array2<C64>>> {
        let v = gate_matrix_full(&g, w, 1, ExpMethod::Eigh)?;
        let top = v.slice(s![..n, ..]).to_owned();
        let top_d = dagger(&top);
        Ok(disps.iter().map(|&(q0, p0)| top.dot(&displacement_matrix(q0, p0, w)).dot(&top_d)).collect())
    };
    let mut work = n + 8;
    let mut prev = build(work)?;
    let mut change = f64::INFINITY;
    loop {
        let next = (work + (work / 4).max(8)).min(maxc);
        if next <= work {
            return Ok((prev, Convergence { working_cutoff: work, change, converged: false }));
        }
        let cur = build(next)?;
        change = cur.iter().zip(&prev).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max);
        work = next;
        if change < tol {
            return Ok((cur, Convergence { working_cutoff: work, change, converged: true }));
        }
        prev = cur;
    }
}

pub(super) fn cubic_correction(cfg: &ExperimentConfig) -> Result<Output> {
    let tol = cfg.tol.unwrap_or(1e-8);
    let maxc = cfg.max_cutoff.unwrap_or(1000);
    let disps = grid2(&cfg.displacement, &cfg.displacement);
    let points = grid2(&cfg.gamma, &cfg.cutoff);
    let rows = sweep(&points, |_, &(gamma, n)| {
        let (lhs, c0) = conjugated_blocks(gamma, n, &disps, tol, maxc)?;
        let block = (n * 3) / 5;
        let sub = |a: &Array2<C64>| a.slice(s![..block, ..block]).to_owned();
        let q2 = CanonicalPolynomial::mode_monomial(0, 1, 2, 0, 1.0);
        let mut rows = Vec::new();
        for (&(q0, p0), lhs) in disps.iter().zip(&lhs) {
            let target = |h: CanonicalPolynomial| {
                let g = GateSpec::exponential(h, 1.0);
                converge(n, 1, tol, n + 8, maxc, |w| gate_matrix_full(&g, w, 1, ExpMethod::Eigh))
            };
            let (lit, c1) = target(pauli_exponent(0, 1, q0, p0) - q2.scale(3.0 * gamma * q0))?;
            let (cor, c2) = target(cubic_correction_exponent(gamma, q0, p0))?;
            let ok = c0.converged && c1.converged && c2.converged;
            let work = c0.working_cutoff.max(c1.working_cutoff).max(c2.working_cutoff);
            let change = c0.change.max(c1.change).max(c2.change);
            let axes = [v(gamma), v(q0), v(p0), n.to_string()];
            let tail = format!("block {block}, working cutoff {work}, change {change:.1e}");
            rows.push(
                Row::exact(&axes, "deviation_literal", max_diff_mod_phase(&sub(lhs), &sub(&lit)))
                    .converged(ok)
                    .note(format!("exponent −(q0 p − p0 q + 3γ q0 q²); {tail}")),
            );
            rows.push(
                Row::exact(&axes, "deviation_corrected", max_diff_mod_phase(&sub(lhs), &sub(&cor)))
                    .converged(ok)
                    .note(format!("exponent −(q0 p − p0 q − 3γ q0 q²); {tail}")),
            );
        }
        Ok(rows)
    })?;
    Ok((vec!["gamma", "q0", "p0", "cutoff"], rows))
}

pub(super) fn gate_equivalence(cfg: &ExperimentConfig) -> Result<Output> {
    let gates = cfg.gates.iter().map(|t| parse_gate_expression(t)).collect::<Result<Vec<_>>>()?;
    let cutoff = fock_cutoff(cfg);
    let [q, p] = cfg.input.unwrap_or([1.0, 0.0]);
    let n = cfg.trials();
    let mut points = Vec::new();
    for (gi, _) in gates.iter().enumerate() {
        for &(eta, nu) in &grid2(&cfg.eta, &cfg.nu) {
            points.push((gi, eta, nu));
        }
    }
    let rows = sweep(&points, |k, &(gi, eta, nu)| {
        let u = &gates[gi];
        let backend = backend_for(cfg, u);
        let tc = teleport_config(eta, nu, backend, cutoff)?;
        let input = input_state(backend, q, p, cutoff)?;
        let axes = [format_gate(u), v(eta), v(nu)];
        let mut devs = Vec::with_capacity(n);
        let mut ok = true;
        for trial in 0..n {
            let (mut a, _) = cvqt(&input, &tc, &mut trial_rng(cfg.seed, k, trial as u32))?;
            apply_to(&mut a, u)?;
            let (b, _) = teleport_gate(u, &input, &tc, &mut trial_rng(cfg.seed, k, trial as u32))?;
            ok &= converged(&a) && converged(&b);
            devs.push(match backend {
                Backend::Gaussian => {
                    let ((ma, va), (mb, vb)) = (moments(&a)?, moments(&b)?);
                    let dm = (&ma - &mb).iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    dm.max(max_abs(&(&va - &vb)))
                }
                Backend::Fock => state_fidelity(&a, &b)?,
            });
        }
        let (stat, extreme, worst) = match backend {
            Backend::Gaussian => ("moment_deviation", "moment_deviation_max", devs.iter().cloned().fold(0.0, f64::max)),
            Backend::Fock => ("fidelity", "fidelity_min", devs.iter().cloned().fold(1.0, f64::min)),
        };
        let tag = format!("{backend:?} backend, seed-paired").to_lowercase();
        Ok(vec![
            Row::from_samples(&axes, stat, &devs).converged(ok).note(tag.clone()),
            Row::new(&axes, extreme, worst, 0.0, n).converged(ok).note(tag),
        ])
    })?;
    Ok((vec!["gate", "eta", "nu"], rows))
}

/// The built-in gate table with the expected levels.
pub fn builtin_gates() -> Vec<(&'static str, GateSpec, &'static str)> {
    let q4 = CanonicalPolynomial::mode_monomial(0, 1, 4, 0, 1.0);
    let cz = CanonicalPolynomial::q(0, 2).multiply(&CanonicalPolynomial::q(1, 2)).expect("same modes");
    vec![
        ("displacement", GateSpec::displacement(1.0, 0.5), "1"),
        ("rotation", GateSpec::rotation(0.7), "2"),
        ("squeezer", GateSpec::squeezer(0.3), "2"),
        ("beamsplitter", GateSpec::beamsplitter(FRAC_PI_4, 0, 1, 2), "2"),
        ("controlled-z", GateSpec::exponential(cz, 1.0), "2"),
        ("cubic", GateSpec::cubic(0.05), "3"),
        ("controlled-phase", GateSpec::controlled_phase(1.0, 0, 1, 2), "3"),
        ("quartic", GateSpec::exponential(q4, 0.01), "4"),
        ("kerr", GateSpec::kerr(0.1), "NonTerminatingAdjoint"),
    ]
}

pub(super) fn hierarchy(cfg: &ExperimentConfig) -> Result<Output> {
    let max_level = cfg.max_level.unwrap_or(4);
    let table: Vec<(String, GateSpec, Option<&str>)> = if cfg.gates.is_empty() {
        builtin_gates().into_iter().map(|(n, g, e)| (n.to_string(), g, Some(e))).collect()
    } else {
        cfg.gates.iter().map(|t| Ok((t.clone(), parse_gate_expression(t)?, None))).collect::<Result<_>>()?
    };
    let rows = sweep(&table, |_, (name, g, expected)| {
        let axes = [name.clone(), format_gate(g)];
        let (value, got) = match classify(g, max_level) {
            Ok(HierarchyLevel::Level(k)) => (k as f64, k.to_string()),
            Ok(HierarchyLevel::NotDetermined(m)) => (f64::NAN, format!("above level {m}")),
            Err(Error::NonTerminatingAdjoint(_)) => (f64::NAN, "NonTerminatingAdjoint".to_string()),
            Err(e) => return Err(e),
        };
        let mut note = if got == "NonTerminatingAdjoint" {
            "NonTerminatingAdjoint: compose via commutator".to_string()
        } else {
            got.clone()
        };
        if let Some(e) = expected {
            note = format!("{note}; expected {e}; {}", if *e == got { "match" } else { "MISMATCH" });
        }
        Ok(vec![Row::exact(&axes, "level", value).note(note)])
    })?;
    Ok((vec!["gate", "expression"], rows))
}

/// Slope of log err against log t with its least-squares standard error.
fn fitted_slope(ts: &[f64], es: &[f64]) -> (f64, f64) {
    let slope = crate::teleport::loglog_slope(ts, es);
    let k = ts.len();
    if k < 3 {
        return (slope, 0.0);
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = es.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / k as f64, ys.iter().sum::<f64>() / k as f64);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (ssr / (k as f64 - 2.0) / sxx).sqrt())
}

pub(super) fn commutator_scaling(cfg: &ExperimentConfig) -> Result<Output> {
    let a = parse_polynomial(cfg.a.as_deref().unwrap_or("q^3"), Some(1))?;
    let b = parse_polynomial(cfg.b.as_deref().unwrap_or("0.5*p^2"), Some(1))?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let maxc = cfg.max_cutoff.unwrap_or(400);
    let points = grid2(&cfg.cutoff, &cfg.t);
    let mut rows = sweep(&points, |_, &(n, t)| {
        let (err, conv) = commutator_error(&a, &b, t, n, n / 2, tol, maxc)?;
        Ok(vec![Row::exact(&[v(t), n.to_string()], "op_norm_error", err).converged(conv.converged).note(format!(
            "block {}, working cutoff {}",
            n / 2,
            conv.working_cutoff
        ))])
    })?;
    for &n in &cfg.cutoff {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.axes[1] == n.to_string()).collect();
        let ts: Vec<f64> = mine.iter().map(|r| r.axes[0].parse().expect("written above")).collect();
        let es: Vec<f64> = mine.iter().map(|r| r.mean).collect();
        let ok = mine.iter().all(|r| r.converged);
        let (slope, se) = fitted_slope(&ts, &es);
        let row = Row::new(&[String::new(), n.to_string()], "loglog_slope", slope, se, ts.len())
            .converged(ok)
            .note("least-squares slope of log error against log t");
        rows.push(row);
    }
    Ok((vec!["t", "cutoff"], rows))
}

pub(super) fn sigma_table(cfg: &ExperimentConfig) -> Result<Output> {
    let points = grid2(&cfg.eta, &cfg.nu);
    let rows = sweep(&points, |_, &(eta, nu)| {
        let sigma = sigma_from(eta, nu)?;
        let axes = [v(eta), v(nu)];
        let verdict = if sigma < 1.0 { "σ < 1" } else { "σ ≥ 1" };
        Ok(vec![
            Row::exact(&axes, "sigma", sigma).note(verdict),
            Row::exact(&axes, "fidelity_unit_gain", 1.0 / (1.0 + sigma)).note("coherent inputs"),
        ])
    })?;
    Ok((vec!["eta", "nu"], rows))
}

const MOMENTS: [&str; 5] = ["mean_q", "mean_p", "second_qq", "second_pp", "second_qp"];

/// Per-trial contributions to the ensemble's first and second raw moments.
fn moment_sample(st: &TeleportState) -> Result<[f64; 5]> {
    let (m, c) = moments(st)?;
    Ok([m[0], m[1], c[[0, 0]] + m[0] * m[0], c[[1, 1]] + m[1] * m[1], c[[0, 1]] + m[0] * m[1]])
}

pub(super) fn noise_model(cfg: &ExperimentConfig) -> Result<Output> {
    let gates = cfg.gates.iter().map(|t| parse_gate_expression(t)).collect::<Result<Vec<_>>>()?;
    let cutoff = fock_cutoff(cfg);
    let [q, p] = cfg.input.unwrap_or([1.0, 0.5]);
    let n = cfg.trials();
    let mut points = Vec::new();
    for (gi, _) in gates.iter().enumerate() {
        for &(eta, nu) in &grid2(&cfg.eta, &cfg.nu) {
            points.push((gi, eta, nu));
        }
    }
    let rows = sweep(&points, |k, &(gi, eta, nu)| {
        let u = &gates[gi];
        let backend = backend_for(cfg, u);
        let tc = teleport_config(eta, nu, backend, cutoff)?;
        let sigma = sigma_from(eta, nu)?;
        let channel = compose_noisy_gate(u.clone(), sigma, None)?;
        let input = input_state(backend, q, p, cutoff)?;
        let mut proto = (0..5).map(|_| Vec::with_capacity(n)).collect::<Vec<Vec<f64>>>();
        let mut model = (0..5).map(|_| Vec::with_capacity(n)).collect::<Vec<Vec<f64>>>();
        let mut ok = true;
        for trial in 0..n {
            // independent streams for the two estimates
            let (out, _) = teleport_gate(u, &input, &tc, &mut trial_rng(cfg.seed, 2 * k, trial as u32))?;
            ok &= converged(&out);
            let mut rng = trial_rng(cfg.seed, 2 * k + 1, trial as u32);
            let modeled = match &input {
                TeleportState::Gaussian(g) => TeleportState::Gaussian(channel.apply_gaussian(g, &mut rng)?),
                TeleportState::Fock(f) => TeleportState::Fock(channel.apply_fock(f, &mut rng)?),
            };
            ok &= converged(&modeled);
            for (j, x) in moment_sample(&out)?.into_iter().enumerate() {
                proto[j].push(x);
            }
            for (j, x) in moment_sample(&modeled)?.into_iter().enumerate() {
                model[j].push(x);
            }
        }
        let axes = [format_gate(u), v(eta), v(nu), v(sigma)];
        let mut rows = Vec::new();
        for (j, name) in MOMENTS.iter().enumerate() {
            let a = Row::from_samples(&axes, &format!("protocol:{name}"), &proto[j]).converged(ok);
            let b = Row::from_samples(&axes, &format!("model:{name}"), &model[j]).converged(ok);
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            let d = a.mean - b.mean;
            let z = if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let diff = Row::new(&axes, &format!("diff:{name}"), d, se, n).converged(ok).note(format!("z = {z:.2}"));
            rows.extend([a, b, diff]);
        }
        Ok(rows)
    })?;
    Ok((vec!["gate", "eta", "nu", "sigma"], rows))
}
