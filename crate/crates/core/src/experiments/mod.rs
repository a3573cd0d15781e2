//! Batch experiments: configuration, the registry, and result tables.
//!
//! Every run is a pure function of the resolved configuration and its seed. Sweep points
//! run on the rayon pool; rows come back in sweep order.

mod runs;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::teleport::Backend;

pub const EXPERIMENTS: [&str; 7] = [
    "teleport-fidelity-sweep",
    "cubic-correction-verify",
    "gate-teleport-equivalence",
    "hierarchy-classify",
    "commutator-scaling",
    "sigma-table",
    "noise-model-equivalence",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Domain(format!("unknown format `{other}` (csv or json)"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Sweep description. Empty lists and unset options take per-experiment defaults in
/// [`ExperimentConfig::resolve`]; scalar values are accepted wherever a list is.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub backend: Option<Backend>,
    #[serde(deserialize_with = "one_or_many")]
    pub eta: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub nu: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub gamma: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub t: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub cutoff: Vec<usize>,
    /// Displacement grid for cubic-correction-verify, used for both q0 and p0.
    #[serde(deserialize_with = "one_or_many")]
    pub displacement: Vec<f64>,
    /// Gate expressions.
    #[serde(deserialize_with = "one_or_many")]
    pub gates: Vec<String>,
    /// Generators for commutator-scaling.
    pub a: Option<String>,
    pub b: Option<String>,
    /// Input coherent amplitude (q, p) where a single input is used.
    pub input: Option<[f64; 2]>,
    /// Spread of the random coherent inputs in the fidelity sweep, per quadrature.
    pub input_spread: Option<f64>,
    pub max_level: Option<u32>,
    pub trials: Option<usize>,
    pub seed: u64,
    /// Convergence tolerance of truncated matrices.
    pub tol: Option<f64>,
    pub max_cutoff: Option<usize>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig { experiment: experiment.to_string(), ..Default::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Fill defaults for the named experiment and check every sweep domain.
    pub fn resolve(&self) -> Result<Self> {
        let mut c = self.clone();
        let name = c.experiment.as_str();
        if !EXPERIMENTS.contains(&name) {
            return Err(Error::UnknownExperiment(c.experiment.clone()));
        }
        fn fill<T: Clone>(v: &mut Vec<T>, d: &[T]) {
            if v.is_empty() {
                *v = d.to_vec();
            }
        }
        let backend = *c.backend.get_or_insert(Backend::Gaussian);
        match name {
            "teleport-fidelity-sweep" => {
                fill(&mut c.eta, &[0.0, 0.1, 0.2, 1.0 / 3.0, 0.5, 0.7, 0.9, 0.99]);
                // ν < 1 pushes σ past 1 so the sweep brackets the crossing
                fill(&mut c.nu, &[1.0, 0.85, 0.7]);
                c.input_spread.get_or_insert(1.0);
                c.trials.get_or_insert(if backend == Backend::Fock { 400 } else { 10_000 });
            }
            "cubic-correction-verify" => {
                fill(&mut c.gamma, &[0.02, 0.05, 0.1]);
                fill(&mut c.displacement, &[-1.0, 0.0, 1.0]);
                fill(&mut c.cutoff, &[40]);
                c.trials.get_or_insert(1);
                // V(0.1) spreads the low levels past 800 photons
                c.tol.get_or_insert(1e-8);
                c.max_cutoff.get_or_insert(1000);
            }
            "gate-teleport-equivalence" => {
                fill(&mut c.gates, &["(rotate 0.7)".into(), "(squeeze 0.3)".into(), "(cubic 0.05)".into()]);
                fill(&mut c.eta, &[0.99]);
                fill(&mut c.nu, &[1.0]);
                fill(&mut c.cutoff, &[48]);
                c.input.get_or_insert([1.0, 0.0]);
                c.trials.get_or_insert(200);
            }
            "hierarchy-classify" => {
                c.max_level.get_or_insert(4);
                c.trials.get_or_insert(1);
            }
            "commutator-scaling" => {
                fill(&mut c.t, &[0.2, 0.1, 0.05]);
                fill(&mut c.cutoff, &[48]);
                c.a.get_or_insert_with(|| "q^3".into());
                c.b.get_or_insert_with(|| "0.5*p^2".into());
                c.trials.get_or_insert(1);
            }
            "sigma-table" => {
                fill(&mut c.eta, &[0.0, 1.0 / 3.0, 0.9]);
                fill(&mut c.nu, &[1.0]);
                c.trials.get_or_insert(1);
            }
            "noise-model-equivalence" => {
                fill(&mut c.gates, &["(squeeze 0.3)".into()]);
                fill(&mut c.eta, &[0.76]);
                fill(&mut c.nu, &[0.95]);
                c.input.get_or_insert([1.0, 0.5]);
                c.trials.get_or_insert(10_000);
            }
            _ => unreachable!(),
        }
        c.tol.get_or_insert(1e-10);
        c.max_cutoff.get_or_insert(400);
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: &dyn fmt::Display| Err(Error::Domain(format!("{what} out of range: {v}")));
        for &e in &self.eta {
            if !(0.0..1.0).contains(&e) {
                return bad("η", &e);
            }
        }
        for &n in &self.nu {
            if !(n > 0.0 && n <= 1.0) {
                return bad("ν", &n);
            }
        }
        for &t in &self.t {
            if !(t > 0.0 && t.is_finite()) {
                return bad("t", &t);
            }
        }
        for &g in self.gamma.iter().chain(&self.displacement) {
            if !g.is_finite() {
                return bad("γ or displacement", &g);
            }
        }
        for &n in &self.cutoff {
            if n < 2 {
                return bad("cutoff", &n);
            }
        }
        if self.trials == Some(0) {
            return bad("trials", &0);
        }
        if let Some(s) = self.input_spread {
            if !(s >= 0.0 && s.is_finite()) {
                return bad("input_spread", &s);
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad("tol", &t);
            }
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration, output sink excluded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("plain data");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub(crate) fn trials(&self) -> usize {
        self.trials.unwrap_or(1)
    }
}

/// One statistic at one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    /// Axis values, in the table's axis order; empty for summary rows.
    pub axes: Vec<String>,
    pub statistic: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub converged: bool,
    pub note: String,
}

impl Row {
    pub fn new(axes: &[String], statistic: &str, mean: f64, stderr: f64, trials: usize) -> Self {
        Row { axes: axes.to_vec(), statistic: statistic.into(), mean, stderr, trials, converged: true, note: String::new() }
    }

    /// An exact value: one evaluation, no sampling error.
    pub fn exact(axes: &[String], statistic: &str, value: f64) -> Self {
        Self::new(axes, statistic, value, 0.0, 1)
    }

    pub fn from_samples(axes: &[String], statistic: &str, xs: &[f64]) -> Self {
        let (m, se) = mean_stderr(xs);
        Self::new(axes, statistic, m, se, xs.len())
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn converged(mut self, ok: bool) -> Self {
        self.converged = ok;
        self
    }
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub axes: Vec<String>,
    pub rows: Vec<Row>,
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 || x.is_infinite() || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Table {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    pub fn find<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a Row> {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
        let mut header = self.axes.clone();
        header.extend(["statistic", "mean", "stderr", "trials", "converged", "note"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = r.axes.clone();
            rec.resize(self.axes.len(), String::new());
            rec.extend([
                r.statistic.clone(),
                num(r.mean),
                num(r.stderr),
                r.trials.to_string(),
                r.converged.to_string(),
                r.note.clone(),
            ]);
            w.write_record(&rec).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        format!("# cvteleport {} config-sha256={} seed={}\n{body}", self.experiment, self.config_hash, self.seed)
    }

    pub fn to_json(&self, cfg: &ExperimentConfig) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let axes: serde_json::Map<String, serde_json::Value> =
                    self.axes.iter().cloned().zip(r.axes.iter().map(|v| serde_json::Value::String(v.clone()))).collect();
                serde_json::json!({
                    "axes": axes,
                    "statistic": r.statistic,
                    "mean": r.mean,
                    "stderr": r.stderr,
                    "trials": r.trials,
                    "converged": r.converged,
                    "note": r.note,
                })
            })
            .collect();
        serde_json::json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "config": cfg,
            "rows": rows,
        })
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        match cfg.format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(cfg)).expect("plain data");
                s.push('\n');
                s
            }
        }
    }
}

/// Resolve the configuration and run the experiment it names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentConfig, Table)> {
    let cfg = cfg.resolve()?;
    let (axes, rows) = match cfg.experiment.as_str() {
        "teleport-fidelity-sweep" => runs::fidelity_sweep(&cfg)?,
        "cubic-correction-verify" => runs::cubic_correction(&cfg)?,
        "gate-teleport-equivalence" => runs::gate_equivalence(&cfg)?,
        "hierarchy-classify" => runs::hierarchy(&cfg)?,
        "commutator-scaling" => runs::commutator_scaling(&cfg)?,
        "sigma-table" => runs::sigma_table(&cfg)?,
        "noise-model-equivalence" => runs::noise_model(&cfg)?,
        other => return Err(Error::UnknownExperiment(other.into())),
    };
    let table = Table {
        experiment: cfg.experiment.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        axes: axes.into_iter().map(String::from).collect(),
        rows,
    };
    Ok((cfg, table))
}
