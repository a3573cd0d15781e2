use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;

use super::state::FockState;
use crate::error::{Error, Result};
use crate::phase_space::Quadrature;

/// Harmonic-oscillator eigenfunctions φ_0(x) .. φ_{len−1}(x).
pub fn hermite_functions(len: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp());
    if len > 1 {
        out.push(std::f64::consts::SQRT_2 * x * out[0]);
    }
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// ⟨x|n⟩ in the chosen quadrature representation.
fn quadrature_wavefunctions(len: usize, x: f64, quad: Quadrature) -> Vec<C64> {
    let phi = hermite_functions(len, x);
    match quad {
        Quadrature::Q => phi.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        Quadrature::P => phi
            .into_iter()
            .enumerate()
            .map(|(n, v)| {
                let ph = match n % 4 {
                    0 => C64::new(1.0, 0.0),
                    1 => C64::new(0.0, -1.0),
                    2 => C64::new(-1.0, 0.0),
                    _ => C64::new(0.0, 1.0),
                };
                ph * v
            })
            .collect(),
    }
}

const GRID_POINTS: usize = 8193;

/// Continuous homodyne outcome distribution of one mode, tabulated once for repeated draws.
pub struct HomodyneSampler {
    state: FockState,
    mode: usize,
    quad: Quadrature,
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl HomodyneSampler {
    pub fn new(state: &FockState, mode: usize, quad: Quadrature) -> Result<Self> {
        let (m, n) = (state.nmodes(), state.cutoff());
        if mode >= m {
            return Err(Error::Domain(format!("mode {mode} out of range for {m} modes")));
        }
        let post = n.pow((m - mode - 1) as u32);
        let pre = n.pow(mode as u32);
        let amps = state.amplitudes();
        let mut rho = Array2::<C64>::zeros((n, n));
        for a in 0..pre {
            for r in 0..post {
                for j in 0..n {
                    let cj = amps[(a * n + j) * post + r];
                    if cj == C64::default() {
                        continue;
                    }
                    for k in 0..n {
                        rho[[j, k]] += cj * amps[(a * n + k) * post + r].conj();
                    }
                }
            }
        }
        let top = (0..n).rev().find(|&j| rho[[j, j]].re > 1e-30).unwrap_or(0);
        let half = (2.0 * top as f64 + 1.0).sqrt() + 8.0;
        let dx = 2.0 * half / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| -half + i as f64 * dx).collect();
        let dens: Vec<f64> = grid
            .iter()
            .map(|&x| {
                let w = quadrature_wavefunctions(top + 1, x, quad);
                let mut acc = C64::default();
                for j in 0..=top {
                    let mut v = C64::default();
                    for k in 0..=top {
                        v += rho[[j, k]] * w[k].conj();
                    }
                    acc += w[j] * v;
                }
                acc.re.max(0.0)
            })
            .collect();
        let mut cdf = vec![0.0; GRID_POINTS];
        for i in 1..GRID_POINTS {
            cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * dx;
        }
        if !(cdf[GRID_POINTS - 1] > 1e-150) {
            return Err(Error::DegenerateMeasurement("outcome density vanishes".into()));
        }
        Ok(HomodyneSampler { state: state.clone(), mode, quad, grid, cdf })
    }

    /// Probability that the outcome is at most `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let total = self.cdf[GRID_POINTS - 1];
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[GRID_POINTS - 1] {
            return 1.0;
        }
        let i = self.grid.partition_point(|&g| g <= x) - 1;
        let t = (x - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        (self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])) / total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.cdf[GRID_POINTS - 1];
        let u: f64 = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, GRID_POINTS - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[i - 1] + t * (self.grid[i] - self.grid[i - 1])
    }

    /// Normalized state of the other modes given outcome `x`.
    pub fn condition(&self, x: f64) -> Result<FockState> {
        let (m, n) = (self.state.nmodes(), self.state.cutoff());
        let post = n.pow((m - self.mode - 1) as u32);
        let pre = n.pow(self.mode as u32);
        let w = quadrature_wavefunctions(n, x, self.quad);
        let amps = self.state.amplitudes();
        let mut out = Array1::<C64>::zeros(pre * post);
        for a in 0..pre {
            for r in 0..post {
                let mut acc = C64::default();
                for j in 0..n {
                    acc += w[j] * amps[(a * n + j) * post + r];
                }
                out[a * post + r] = acc;
            }
        }
        let st = if m == 1 { FockState::scalar(out[0]) } else { FockState::from_amplitudes(out, n, m - 1)? };
        st.normalized().map_err(|_| Error::DegenerateMeasurement("conditioned state has zero norm".into()))
    }
}

/// Sample a quadrature outcome and return the normalized state of the remaining modes.
pub fn homodyne_sample<R: Rng + ?Sized>(s: &FockState, mode: usize, quad: Quadrature, rng: &mut R) -> Result<(f64, FockState)> {
    let sampler = HomodyneSampler::new(s, mode, quad)?;
    let x = sampler.sample(rng);
    Ok((x, sampler.condition(x)?))
}

/// ψ ⊗ |0⟩ after a 50:50 beamsplitter with a† → (a₁† + a₂†)/√2, in closed form.
fn split_with_vacuum(state: &FockState) -> Result<FockState> {
    if state.nmodes() != 1 {
        return Err(Error::Domain("heterodyne sampling is single-mode".into()));
    }
    let n = state.cutoff();
    let amps = state.amplitudes();
    let mut out = Array1::<C64>::zeros(n * n);
    // ln C(m, k) via running log-factorials
    let mut lf = vec![0.0f64; n];
    for k in 1..n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    for m in 0..n {
        if amps[m] == C64::default() {
            continue;
        }
        for k in 0..=m {
            let w = (0.5 * (lf[m] - lf[k] - lf[m - k]) - 0.5 * m as f64 * std::f64::consts::LN_2).exp();
            out[k * n + (m - k)] = amps[m] * w;
        }
    }
    FockState::from_amplitudes(out, n, 2)
}

/// Heterodyne outcome of a single-mode state, distributed as its Husimi function.
///
/// Realized as a 50:50 split with vacuum followed by homodyne q on one arm and p on the
/// other; the returned pair is rescaled by √2 so its mean is (⟨q⟩, ⟨p⟩).
pub fn heterodyne_sample<R: Rng + ?Sized>(state: &FockState, rng: &mut R) -> Result<(f64, f64)> {
    let two = split_with_vacuum(state)?;
    let (x, rest) = homodyne_sample(&two, 0, Quadrature::Q, rng)?;
    let (y, _) = homodyne_sample(&rest, 0, Quadrature::P, rng)?;
    Ok((std::f64::consts::SQRT_2 * x, std::f64::consts::SQRT_2 * y))
}
