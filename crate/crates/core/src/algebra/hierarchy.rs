use serde::Serialize;

use super::evolve::{heisenberg_evolve, DEFAULT_MAX_DEPTH};
use super::gate::GateSpec;
use super::poly::CanonicalPolynomial;
use crate::error::Result;

/// Position of a gate in the Clifford hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HierarchyLevel {
    Level(u32),
    /// The level exceeds the given bound.
    NotDetermined(u32),
}

// Coefficients below this are treated as roundoff from floating-point affine maps.
const CHOP: f64 = 1e-12;

/// Smallest k such that conjugating every q_i, p_i by the gate lands in level k−1.
pub fn classify(gate: &GateSpec, max_level: u32) -> Result<HierarchyLevel> {
    match level(gate, max_level)? {
        Some(k) => Ok(HierarchyLevel::Level(k)),
        None => Ok(HierarchyLevel::NotDetermined(max_level)),
    }
}

fn level(gate: &GateSpec, max_level: u32) -> Result<Option<u32>> {
    if max_level == 0 {
        return Ok(None);
    }
    let n = gate.nmodes();
    let mut images = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let x = CanonicalPolynomial::coordinate(k, n);
        let img = heisenberg_evolve(gate, &x, DEFAULT_MAX_DEPTH)?;
        let scale = img.max_coeff().max(1.0);
        images.push((x, img.chop(CHOP * scale)));
    }
    let pauli = images.iter().all(|(x, img)| {
        let rest = img - x;
        rest.degree().unwrap_or(0) == 0
    });
    if pauli {
        return Ok(Some(1));
    }
    if images.iter().all(|(_, img)| img.degree().unwrap_or(0) <= 1) {
        return Ok((max_level >= 2).then_some(2));
    }
    let mut worst = 1;
    for (_, img) in &images {
        if img.degree().unwrap_or(0) <= 1 {
            continue;
        }
        match level(&GateSpec::exponential(img.clone(), 1.0), max_level - 1)? {
            Some(k) => worst = worst.max(k),
            None => return Ok(None),
        }
    }
    Ok((worst < max_level).then_some(worst + 1))
}
