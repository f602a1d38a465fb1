//! Ground states and real-time propagation on a fixed-N sector.
//!
//! [`ground_state`] is a restarted Lanczos iteration with full
//! reorthogonalization, started from a seeded pseudo-random vector so that runs
//! are reproducible. [`evolve`] applies `exp(-iHt)` through short Lanczos
//! recursions (at most [`MAX_KRYLOV_DIM`] vectors) and halves the sub-step until
//! the a posteriori error estimate is below tolerance. Small problems go through
//! dense Hermitian diagonalization instead.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BhError, Result};
use crate::fock::{Occupation, OccupationBasis};
use crate::linalg::{hermitian_eigh, symmetric_eigh, Eigh};
use crate::operators::SparseOperator;

/// Seed of the Lanczos starting vector.
pub const LANCZOS_SEED: u64 = 0x5EED_B05E;
/// Largest Krylov subspace used per propagation step.
pub const MAX_KRYLOV_DIM: usize = 30;
/// Default propagation tolerance.
pub const DEFAULT_EVOLVE_TOL: f64 = 1e-10;
/// Spectral gap below which a ground state is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

const DENSE_LIMIT: usize = 160;
const LANCZOS_DIM: usize = 80;
const MAX_RESTARTS: usize = 200;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Complex amplitudes over an occupation basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<OccupationBasis>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(BhError::InvalidParameter(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalized Fock state `|config>`.
    pub fn basis_state(basis: Arc<OccupationBasis>, config: &[Occupation]) -> Result<Self> {
        let k = basis.rank(config)?;
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if !self.basis.same_sector(&other.basis) {
            return Err(BhError::SectorMismatch);
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// `<n_i>` for every site.
    pub fn occupations(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.sites()];
        for (cfg, a) in self.basis.configs().zip(&self.amplitudes) {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for (slot, &n) in out.iter_mut().zip(cfg) {
                *slot += w * n as f64;
            }
        }
        out
    }
}

/// Lowest eigenpair of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// `||H psi - E psi||`.
    pub residual: f64,
    /// Set when the gap to the next (Ritz) eigenvalue is below [`DEGENERACY_GAP`].
    pub degenerate: bool,
    pub restarts: usize,
}

/// Lowest eigenpair of `h` with residual at most `tol`.
pub fn ground_state(h: &SparseOperator, tol: f64) -> Result<GroundState> {
    if h.dim() <= DENSE_LIMIT {
        return dense_ground_state(h);
    }
    lanczos_ground_state(h, tol)
}

fn dense_ground_state(h: &SparseOperator) -> Result<GroundState> {
    let eig = hermitian_eigh(&h.to_dense());
    let energy = eig.values[0];
    let degenerate = eig.values.get(1).is_some_and(|&e1| e1 - energy < DEGENERACY_GAP);
    let amps: Vec<Complex64> = eig.vectors.column(0).iter().copied().collect();
    let mut state = StateVector::new(Arc::clone(h.basis()), amps)?;
    state.normalize();
    let residual = residual_norm(h, state.amplitudes(), energy);
    Ok(GroundState { energy, state, residual, degenerate, restarts: 0 })
}

fn lanczos_ground_state(h: &SparseOperator, tol: f64) -> Result<GroundState> {
    let dim = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    let n0 = norm(&start);
    scale(&mut start, 1.0 / n0);

    let m = LANCZOS_DIM.min(dim);
    let mut residual = f64::INFINITY;
    for restart in 0..MAX_RESTARTS {
        let krylov = lanczos(h, &start, m);
        let tri = krylov.tridiagonal();
        let eig = symmetric_eigh(&tri);
        let theta = eig.values[0];
        let coeffs: Vec<Complex64> = eig
            .vectors
            .column(0)
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .collect();
        let mut ritz = krylov.combine(&coeffs);
        let nr = norm(&ritz);
        scale(&mut ritz, 1.0 / nr);
        residual = residual_norm(h, &ritz, theta);
        if residual <= tol {
            let degenerate = eig.values.get(1).is_some_and(|&e1| e1 - theta < DEGENERACY_GAP);
            let state = StateVector::new(Arc::clone(h.basis()), ritz)?;
            return Ok(GroundState {
                energy: theta,
                state,
                residual,
                degenerate,
                restarts: restart,
            });
        }
        start = ritz;
    }
    Err(BhError::NoConvergence {
        iterations: MAX_RESTARTS * m,
        residual,
    })
}

/// `exp(-i H t) psi0` to accuracy `tol`.
pub fn evolve(h: &SparseOperator, psi0: &StateVector, t: f64, tol: f64) -> Result<StateVector> {
    if !psi0.basis().same_sector(h.basis()) {
        return Err(BhError::SectorMismatch);
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let total = t.abs();
    let direction = t.signum();
    let mut v = psi0.amplitudes().to_vec();
    let mut elapsed = 0.0;
    let mut step = total;
    while elapsed < total {
        step = step.min(total - elapsed);
        let beta0 = norm(&v);
        let mut unit = v.clone();
        scale(&mut unit, 1.0 / beta0);
        let krylov = lanczos(h, &unit, MAX_KRYLOV_DIM.min(h.dim()));
        let eig = symmetric_eigh(&krylov.tridiagonal());
        loop {
            let w = propagate_tridiagonal(&eig, direction * step);
            let estimate = if krylov.exhausted {
                0.0
            } else {
                krylov.next_beta * w[w.len() - 1].norm()
            };
            if estimate <= 0.1 * tol * step / total {
                let mut next = krylov.combine(&w);
                scale(&mut next, beta0);
                v = next;
                elapsed += step;
                // grow again after an easy step
                if estimate < 0.01 * tol * step / total {
                    step *= 1.5;
                }
                break;
            }
            step *= 0.5;
            if step < total * 1e-14 {
                return Err(BhError::StepUnderflow { time: elapsed, step });
            }
        }
    }
    StateVector::new(Arc::clone(psi0.basis()), v)
}

/// `exp(-i H t) psi0` through dense diagonalization of `H`.
pub fn evolve_dense(h: &SparseOperator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    if !psi0.basis().same_sector(h.basis()) {
        return Err(BhError::SectorMismatch);
    }
    let eig = hermitian_eigh(&h.to_dense());
    let psi = DVector::from_column_slice(psi0.amplitudes());
    let mut coeffs = eig.vectors.adjoint() * psi;
    for (c, &e) in coeffs.iter_mut().zip(&eig.values) {
        *c *= Complex64::from_polar(1.0, -e * t);
    }
    let out = &eig.vectors * coeffs;
    StateVector::new(Arc::clone(psi0.basis()), out.iter().copied().collect())
}

/// Probability distribution of the classical random walk on an open chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    pub time: f64,
    pub probabilities: Vec<f64>,
}

/// `p(t) = exp(G t) p(0)` for the rate matrix `G` of an open chain with hopping
/// rate `rate`, starting from the middle site of an odd chain.
pub fn ctrw_distribution(sites: usize, rate: f64, t: f64) -> Result<ClassicalDistribution> {
    if sites % 2 == 0 {
        return Err(BhError::EvenChain(sites));
    }
    let mut generator = DMatrix::<f64>::zeros(sites, sites);
    for i in 0..sites - 1 {
        generator[(i, i + 1)] = rate;
        generator[(i + 1, i)] = rate;
    }
    for i in 0..sites {
        let out: f64 = (0..sites).filter(|&j| j != i).map(|j| generator[(j, i)]).sum();
        generator[(i, i)] = -out;
    }
    let eig = symmetric_eigh(&generator);
    let middle = sites / 2;
    let probabilities = (0..sites)
        .map(|i| {
            let p: f64 = (0..sites)
                .map(|k| {
                    eig.vectors[(i, k)] * (eig.values[k] * t).exp() * eig.vectors[(middle, k)]
                })
                .sum();
            p.max(0.0)
        })
        .collect();
    Ok(ClassicalDistribution { time: t, probabilities })
}

struct Krylov {
    vectors: Vec<Vec<Complex64>>,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    next_beta: f64,
    exhausted: bool,
}

impl Krylov {
    fn tridiagonal(&self) -> DMatrix<f64> {
        let k = self.alphas.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = self.alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = self.betas[i];
                t[(i + 1, i)] = self.betas[i];
            }
        }
        t
    }

    fn combine(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.vectors[0].len()];
        for (v, &c) in self.vectors.iter().zip(coeffs) {
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }
}

// `start` must be normalized.
fn lanczos(h: &SparseOperator, start: &[Complex64], max_dim: usize) -> Krylov {
    let mut vectors = vec![start.to_vec()];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut w = vec![ZERO; start.len()];
    let scale_ref = h.triplets().map(|(_, _, v)| v.norm()).fold(0.0, f64::max).max(1.0);
    loop {
        let j = vectors.len() - 1;
        h.apply_into(&vectors[j], &mut w);
        let alpha = dot(&vectors[j], &w).re;
        alphas.push(alpha);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &vectors {
                let c = dot(v, &w);
                for (x, y) in w.iter_mut().zip(v) {
                    *x -= c * y;
                }
            }
        }
        let beta = norm(&w);
        let exhausted = beta <= 1e-12 * scale_ref;
        if exhausted || vectors.len() == max_dim {
            return Krylov {
                vectors,
                alphas,
                betas,
                next_beta: beta,
                exhausted,
            };
        }
        betas.push(beta);
        let mut next = w.clone();
        scale(&mut next, 1.0 / beta);
        vectors.push(next);
    }
}

fn propagate_tridiagonal(eig: &Eigh<f64>, t: f64) -> Vec<Complex64> {
    let k = eig.values.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let s = eig.vectors[(i, j)] * eig.vectors[(0, j)];
                    Complex64::from_polar(s, -eig.values[j] * t)
                })
                .sum()
        })
        .collect()
}

fn residual_norm(h: &SparseOperator, v: &[Complex64], energy: f64) -> f64 {
    let hv = h.apply(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * energy).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_hamiltonian, BhParams};
    use approx::assert_abs_diff_eq;

    fn hamiltonian(m: usize, n: usize, cap: usize, u: f64) -> SparseOperator {
        let b = Arc::new(OccupationBasis::new(m, n, cap).unwrap());
        build_hamiltonian(&b, &BhParams::new(1.0, u)).unwrap()
    }

    fn distance(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn three_site_ground_energy() {
        let gs = ground_state(&hamiltonian(3, 1, 1, 0.0), 1e-12).unwrap();
        assert_abs_diff_eq!(gs.energy, -2f64.sqrt(), epsilon = 1e-12);
        assert!(!gs.degenerate);
    }

    #[test]
    fn vacuum_ground_energy() {
        let gs = ground_state(&hamiltonian(4, 0, 3, 2.0), 1e-12).unwrap();
        assert_eq!(gs.energy, 0.0);
    }

    #[test]
    fn strong_coupling_ground_state_is_mott() {
        let h = hamiltonian(5, 5, 3, 100.0);
        let gs = ground_state(&h, 1e-10).unwrap();
        let mi = StateVector::basis_state(Arc::clone(h.basis()), &[1; 5]).unwrap();
        let fidelity = mi.overlap(&gs.state).unwrap().norm_sqr();
        assert!(fidelity > 0.99, "fidelity {fidelity}");
    }

    #[test]
    fn lanczos_matches_dense() {
        // dim 1001, so the sparse path is taken
        let h = hamiltonian(6, 6, 6, 3.0);
        assert!(h.dim() > DENSE_LIMIT);
        let gs = ground_state(&h, 1e-10).unwrap();
        assert!(gs.residual <= 1e-10);
        let dense = dense_ground_state(&h).unwrap();
        assert_abs_diff_eq!(gs.energy, dense.energy, epsilon = 1e-10);
        let f = gs.state.overlap(&dense.state).unwrap().norm();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn lanczos_is_reproducible() {
        let h = hamiltonian(7, 7, 2, 5.0);
        let a = ground_state(&h, 1e-10).unwrap();
        let b = ground_state(&h, 1e-10).unwrap();
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.state.amplitudes(), b.state.amplitudes());
    }

    #[test]
    fn zero_time_is_identity() {
        let h = hamiltonian(5, 2, 2, 1.0);
        let psi = StateVector::basis_state(Arc::clone(h.basis()), &[0, 1, 1, 0, 0]).unwrap();
        let out = evolve(&h, &psi, 0.0, 1e-10).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn three_site_middle_amplitude() {
        let h = hamiltonian(3, 1, 1, 0.0);
        let psi = StateVector::basis_state(Arc::clone(h.basis()), &[0, 1, 0]).unwrap();
        for &t in &[0.3, 1.7, 4.0, 9.5] {
            let out = evolve(&h, &psi, t, 1e-12).unwrap();
            let mid = out.amplitudes()[1];
            assert_abs_diff_eq!(mid.re, (2f64.sqrt() * t).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(mid.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn krylov_matches_dense_and_conserves() {
        let h = hamiltonian(6, 4, 3, 2.3);
        assert!(h.dim() <= 500);
        let psi = StateVector::basis_state(Arc::clone(h.basis()), &[0, 2, 1, 1, 0, 0]).unwrap();
        let e0 = h.expectation(&psi).unwrap();
        for &t in &[0.5, 3.0, 12.0] {
            let krylov = evolve(&h, &psi, t, 1e-10).unwrap();
            let dense = evolve_dense(&h, &psi, t).unwrap();
            assert!(distance(&krylov, &dense) < 1e-9);
            assert_abs_diff_eq!(krylov.norm(), 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(h.expectation(&krylov).unwrap(), e0, epsilon = 1e-9);
        }
    }

    #[test]
    fn backward_evolution_inverts() {
        let h = hamiltonian(5, 3, 3, 4.0);
        let psi = StateVector::basis_state(Arc::clone(h.basis()), &[0, 0, 3, 0, 0]).unwrap();
        let fwd = evolve(&h, &psi, 2.5, 1e-11).unwrap();
        let back = evolve(&h, &fwd, -2.5, 1e-11).unwrap();
        assert!(distance(&back, &psi) < 1e-9);
    }

    #[test]
    fn classical_walk_limits() {
        let p0 = ctrw_distribution(5, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(p0.probabilities[2], 1.0, epsilon = 1e-12);
        let late = ctrw_distribution(3, 1.0, 60.0).unwrap();
        for p in &late.probabilities {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-12);
        }
        for &t in &[0.1, 1.0, 7.0, 30.0] {
            let d = ctrw_distribution(41, 1.0, t).unwrap();
            assert_abs_diff_eq!(d.probabilities.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(d.probabilities.iter().all(|&p| p >= 0.0));
        }
        assert!(ctrw_distribution(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn occupations_sum_to_particle_number() {
        let h = hamiltonian(4, 3, 3, 1.0);
        let psi = StateVector::basis_state(Arc::clone(h.basis()), &[3, 0, 0, 0]).unwrap();
        let out = evolve(&h, &psi, 1.3, 1e-10).unwrap();
        assert_abs_diff_eq!(out.occupations().iter().sum::<f64>(), 3.0, epsilon = 1e-10);
    }
}
