//! Spatially delocalized qubits: one boson above a background `nbar` shared by
//! two adjacent sites. Logical `|0>` puts the extra boson on the left site of the
//! pair, logical `|1>` on the right one.
//!
//! Two-qubit matrices are indexed by `2 * alpha + beta`, qubit A (the left pair)
//! being the more significant bit: `|00>, |01>, |10>, |11>`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entanglement::{dense_log_negativity, Side};
use crate::error::{BhError, Result};
use crate::solve::StateVector;

/// Below this success probability the conditional state is not reported.
pub const P_THRESHOLD: f64 = 1e-9;

/// Two qubits on the site pairs `(a, a+1)` and `(b, b+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdqDefinition {
    pub qubit_a: usize,
    pub qubit_b: usize,
    pub background: u8,
}

impl SdqDefinition {
    pub fn new(qubit_a: usize, qubit_b: usize, background: u8) -> Result<Self> {
        if qubit_a.abs_diff(qubit_b) < 2 {
            return Err(BhError::InvalidParameter(format!(
                "qubit pairs starting at sites {qubit_a} and {qubit_b} overlap"
            )));
        }
        Ok(Self { qubit_a, qubit_b, background })
    }

    /// Qubits on the first two and the last two sites of a chain.
    pub fn chain_ends(sites: usize, background: u8) -> Result<Self> {
        if sites < 4 {
            return Err(BhError::InvalidParameter(format!(
                "two qubits need at least 4 sites, got {sites}"
            )));
        }
        Self::new(0, sites - 2, background)
    }

    fn sites(&self) -> [usize; 4] {
        [self.qubit_a, self.qubit_a + 1, self.qubit_b, self.qubit_b + 1]
    }

    fn logical(&self, left: u8, right: u8) -> Option<usize> {
        let (hi, lo) = (self.background + 1, self.background);
        match (left, right) {
            (l, r) if l == hi && r == lo => Some(0),
            (l, r) if l == lo && r == hi => Some(1),
            _ => None,
        }
    }
}

/// Unnormalized two-qubit matrix after projecting onto one extra boson per pair.
#[derive(Debug, Clone)]
pub struct SdqState {
    pub matrix: DMatrix<Complex64>,
    /// Success probability of the projection, `tr(matrix)`.
    pub probability: f64,
}

impl SdqState {
    /// Diagonal of the conditional state, `<ab|rho/p|ab>`. `None` when the
    /// projection essentially never succeeds.
    pub fn populations(&self) -> Option<[f64; 4]> {
        if self.probability < P_THRESHOLD {
            return None;
        }
        Some(std::array::from_fn(|k| self.matrix[(k, k)].re / self.probability))
    }
}

/// Projects `psi` onto one extra boson per qubit pair and traces out the rest
/// of the chain.
pub fn sdq_project(psi: &StateVector, def: &SdqDefinition) -> Result<SdqState> {
    let basis = psi.basis();
    let sites = basis.sites();
    let qubit_sites = def.sites();
    if let Some(&s) = qubit_sites.iter().find(|&&s| s >= sites) {
        return Err(BhError::SiteOutOfRange { site: s, sites });
    }
    let radix = (basis.cap() + 1) as u128;
    let mut groups: BTreeMap<u128, Vec<(usize, Complex64)>> = BTreeMap::new();
    for (cfg, &amp) in basis.configs().zip(psi.amplitudes()) {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let Some(alpha) = def.logical(cfg[qubit_sites[0]], cfg[qubit_sites[1]]) else {
            continue;
        };
        let Some(beta) = def.logical(cfg[qubit_sites[2]], cfg[qubit_sites[3]]) else {
            continue;
        };
        let env = cfg
            .iter()
            .enumerate()
            .filter(|(i, _)| !qubit_sites.contains(i))
            .fold(0u128, |key, (_, &n)| key * radix + n as u128);
        groups.entry(env).or_default().push((2 * alpha + beta, amp));
    }
    let mut matrix = DMatrix::<Complex64>::zeros(4, 4);
    for members in groups.values() {
        for &(r, cr) in members {
            for &(c, cc) in members {
                matrix[(r, c)] += cr * cc.conj();
            }
        }
    }
    let probability = matrix.trace().re;
    Ok(SdqState { matrix, probability })
}

/// Success probability and the negativity of the conditional two-qubit state.
pub fn sdq_entanglement(state: &SdqState) -> Result<(f64, f64)> {
    let p = state.probability;
    if p < P_THRESHOLD {
        return Err(BhError::ProjectionUnlikely { p, threshold: P_THRESHOLD });
    }
    let normalized = &state.matrix / Complex64::new(p, 0.0);
    let ln = dense_log_negativity(&normalized, 2, 2, Side::B)?;
    Ok((p, ln))
}
