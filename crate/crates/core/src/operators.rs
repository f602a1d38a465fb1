//! Sparse operators on a fixed-N occupation basis.
//!
//! Sites are 0-based throughout the library: site `i` is the `(i+1)`-th lattice
//! site of an `M`-site open chain.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{BhError, Result};
use crate::fock::{Occupation, OccupationBasis};
use crate::solve::StateVector;

/// Parameters of the open-chain Bose-Hubbard Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct BhParams {
    /// Nearest-neighbour tunneling amplitude `J`; sets the time unit `1/J`.
    pub tunneling: f64,
    /// On-site pair interaction `U`.
    pub interaction: f64,
    /// Single-particle on-site energies; empty means all zero.
    pub onsite: Vec<f64>,
    /// Chemical potential. In a fixed-N sector it only shifts the spectrum by `-mu*N`.
    pub chemical_potential: f64,
}

impl BhParams {
    pub fn new(tunneling: f64, interaction: f64) -> Self {
        Self {
            tunneling,
            interaction,
            onsite: Vec::new(),
            chemical_potential: 0.0,
        }
    }

    pub fn with_onsite(mut self, onsite: Vec<f64>) -> Self {
        self.onsite = onsite;
        self
    }

    pub fn with_chemical_potential(mut self, mu: f64) -> Self {
        self.chemical_potential = mu;
        self
    }
}

/// Hermitian sparse matrix in CSR layout over one occupation basis.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<OccupationBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseOperator {
    /// Builds an operator from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(
        basis: Arc<OccupationBasis>,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        let dim = basis.dim();
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(BhError::InvalidParameter(format!(
                "entry ({r}, {c}) outside a {dim}-dimensional basis"
            )));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self { basis, row_ptr, cols, values })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.values[k]))
        })
    }

    /// `out = self * input`.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * input[self.cols[k]];
            }
            *slot = acc;
        }
    }

    pub fn apply(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(input, &mut out);
        out
    }

    /// Real part of `<psi|A|psi>`; exact for Hermitian `A`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if !psi.basis().same_sector(&self.basis) {
            return Err(BhError::SectorMismatch);
        }
        let a_psi = self.apply(psi.amplitudes());
        Ok(psi
            .amplitudes()
            .iter()
            .zip(&a_psi)
            .map(|(x, y)| (x.conj() * y).re)
            .sum())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest `|A_rc - conj(A_cr)|` over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, c, v) in self.triplets() {
            let mirror = self.entry(c, r);
            worst = worst.max((v - mirror.conj()).norm());
        }
        worst
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let span = &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]];
        match span.binary_search(&col) {
            Ok(k) => self.values[self.row_ptr[row] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

/// Bose-Hubbard Hamiltonian with open boundaries on `basis`.
///
/// Hops that would push a site above the basis cap are left out; this is the
/// truncation of the occupation basis, not a physical constraint.
pub fn build_hamiltonian(basis: &Arc<OccupationBasis>, params: &BhParams) -> Result<SparseOperator> {
    let sites = basis.sites();
    if !params.onsite.is_empty() && params.onsite.len() != sites {
        return Err(BhError::InvalidParameter(format!(
            "{} on-site energies for {sites} sites",
            params.onsite.len()
        )));
    }
    let cap = basis.cap() as Occupation;
    let mut triplets = Vec::new();
    let mut scratch: Vec<Occupation> = vec![0; sites];
    for k in 0..basis.dim() {
        let cfg = basis.config(k);
        let mut diag = -params.chemical_potential * basis.particles() as f64;
        for (i, &n) in cfg.iter().enumerate() {
            let n = n as f64;
            diag += 0.5 * params.interaction * n * (n - 1.0);
            if let Some(eps) = params.onsite.get(i) {
                diag += eps * n;
            }
        }
        if diag != 0.0 {
            triplets.push((k, k, Complex64::new(diag, 0.0)));
        }
        for i in 0..sites.saturating_sub(1) {
            for (from, to) in [(i + 1, i), (i, i + 1)] {
                if cfg[from] == 0 || cfg[to] == cap {
                    continue;
                }
                let amp = -params.tunneling * ((cfg[to] as f64 + 1.0) * cfg[from] as f64).sqrt();
                scratch.copy_from_slice(cfg);
                scratch[from] -= 1;
                scratch[to] += 1;
                let target = basis.rank(&scratch)?;
                triplets.push((target, k, Complex64::new(amp, 0.0)));
            }
        }
    }
    SparseOperator::from_triplets(Arc::clone(basis), triplets)
}

/// Diagonal operator `n_site`.
pub fn number_operator(basis: &Arc<OccupationBasis>, site: usize) -> Result<SparseOperator> {
    check_site(basis, site)?;
    let triplets = basis
        .configs()
        .enumerate()
        .filter(|(_, c)| c[site] != 0)
        .map(|(k, c)| (k, k, Complex64::new(c[site] as f64, 0.0)))
        .collect();
    SparseOperator::from_triplets(Arc::clone(basis), triplets)
}

/// Applies `a†_site` to `state`, mapping it into `target` (one more particle).
///
/// Components that would exceed the target cap are dropped. The result is
/// renormalized; the returned factor is the norm before renormalization.
pub fn create_particle(
    state: &StateVector,
    target: &Arc<OccupationBasis>,
    site: usize,
) -> Result<(StateVector, f64)> {
    let source = state.basis();
    if source.sites() != target.sites() || target.particles() != source.particles() + 1 {
        return Err(BhError::SectorMismatch);
    }
    check_site(target, site)?;
    let mut out = vec![Complex64::new(0.0, 0.0); target.dim()];
    let mut scratch: Vec<Occupation> = vec![0; source.sites()];
    for (k, amp) in state.amplitudes().iter().enumerate() {
        let cfg = source.config(k);
        if cfg[site] as usize >= target.cap() {
            continue;
        }
        scratch.copy_from_slice(cfg);
        scratch[site] += 1;
        let j = target.rank(&scratch)?;
        out[j] += amp * (scratch[site] as f64).sqrt();
    }
    finish_ladder(Arc::clone(target), out)
}

/// Applies `a_site` to `state`, mapping it into `target` (one fewer particle).
pub fn annihilate_particle(
    state: &StateVector,
    target: &Arc<OccupationBasis>,
    site: usize,
) -> Result<(StateVector, f64)> {
    let source = state.basis();
    if source.sites() != target.sites() || target.particles() + 1 != source.particles() {
        return Err(BhError::SectorMismatch);
    }
    check_site(target, site)?;
    let mut out = vec![Complex64::new(0.0, 0.0); target.dim()];
    let mut scratch: Vec<Occupation> = vec![0; source.sites()];
    for (k, amp) in state.amplitudes().iter().enumerate() {
        let cfg = source.config(k);
        if cfg[site] == 0 {
            continue;
        }
        scratch.copy_from_slice(cfg);
        scratch[site] -= 1;
        // a lower-N configuration always fits under the same or a larger cap
        let Some(j) = target.find(&scratch) else { continue };
        out[j] += amp * (cfg[site] as f64).sqrt();
    }
    finish_ladder(Arc::clone(target), out)
}

fn finish_ladder(basis: Arc<OccupationBasis>, amps: Vec<Complex64>) -> Result<(StateVector, f64)> {
    let mut psi = StateVector::new(basis, amps)?;
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(BhError::InvalidParameter(
            "ladder operator annihilated the state".into(),
        ));
    }
    psi.normalize();
    Ok((psi, norm))
}

fn check_site(basis: &OccupationBasis, site: usize) -> Result<()> {
    if site >= basis.sites() {
        return Err(BhError::SiteOutOfRange { site, sites: basis.sites() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn basis(m: usize, n: usize, cap: usize) -> Arc<OccupationBasis> {
        Arc::new(OccupationBasis::new(m, n, cap).unwrap())
    }

    #[test]
    fn single_particle_one_bond() {
        let h = build_hamiltonian(&basis(2, 1, 1), &BhParams::new(1.0, 0.0)).unwrap();
        let d = h.to_dense();
        assert_eq!(d[(0, 0)].re, 0.0);
        assert_eq!(d[(1, 1)].re, 0.0);
        assert_eq!(d[(0, 1)].re, -1.0);
        assert_eq!(d[(1, 0)].re, -1.0);
    }

    #[test]
    fn two_bosons_two_sites() {
        // order: (2,0), (1,1), (0,2)
        let h = build_hamiltonian(&basis(2, 2, 2), &BhParams::new(1.0, 4.0)).unwrap();
        let d = h.to_dense();
        let s2 = 2f64.sqrt();
        let expect = [[4.0, -s2, 0.0], [-s2, 0.0, -s2], [0.0, -s2, 4.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_abs_diff_eq!(d[(r, c)].re, expect[r][c], epsilon = 1e-15);
                assert_eq!(d[(r, c)].im, 0.0);
            }
        }
    }

    #[test]
    fn vacuum_hamiltonian_is_zero() {
        let h = build_hamiltonian(&basis(3, 0, 2), &BhParams::new(1.0, 3.0)).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.to_dense()[(0, 0)].norm(), 0.0);
    }

    #[test]
    fn single_particle_sector_is_path_graph() {
        let eps = vec![0.3, -0.1, 0.0, 0.7, 0.2];
        let h = build_hamiltonian(&basis(5, 1, 3), &BhParams::new(1.3, 9.0).with_onsite(eps.clone()))
            .unwrap()
            .to_dense();
        for r in 0..5 {
            for c in 0..5 {
                let want = if r == c {
                    eps[r]
                } else if r.abs_diff(c) == 1 {
                    -1.3
                } else {
                    0.0
                };
                assert_abs_diff_eq!(h[(r, c)].re, want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = build_hamiltonian(&basis(5, 5, 3), &BhParams::new(1.0, 2.5)).unwrap();
        assert_eq!(h.hermiticity_error(), 0.0);
    }

    #[test]
    fn chemical_potential_shifts_spectrum() {
        let b = basis(4, 4, 3);
        let base = build_hamiltonian(&b, &BhParams::new(1.0, 3.0)).unwrap().to_dense();
        let shifted = build_hamiltonian(&b, &BhParams::new(1.0, 3.0).with_chemical_potential(0.7))
            .unwrap()
            .to_dense();
        let e0 = SymmetricEigen::new(base).eigenvalues;
        let e1 = SymmetricEigen::new(shifted.clone()).eigenvalues;
        let mut e0: Vec<f64> = e0.iter().copied().collect();
        let mut e1: Vec<f64> = e1.iter().copied().collect();
        e0.sort_by(f64::total_cmp);
        e1.sort_by(f64::total_cmp);
        for (a, b) in e0.iter().zip(&e1) {
            assert_abs_diff_eq!(b - a, -0.7 * 4.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn number_operators_sum_to_n() {
        let b = basis(4, 3, 2);
        let mut total = DMatrix::<Complex64>::zeros(b.dim(), b.dim());
        for i in 0..4 {
            total += number_operator(&b, i).unwrap().to_dense();
        }
        assert_eq!(total, DMatrix::identity(b.dim(), b.dim()) * Complex64::new(3.0, 0.0));
    }

    #[test]
    fn number_operator_on_first_site() {
        let n0 = number_operator(&basis(2, 1, 1), 0).unwrap().to_dense();
        assert_eq!(n0[(0, 0)].re, 1.0);
        assert_eq!(n0[(1, 1)].re, 0.0);
        assert!(number_operator(&basis(2, 1, 1), 2).is_err());
    }

    #[test]
    fn occupations_of_uniform_config() {
        let b = basis(2, 2, 2);
        let psi = StateVector::basis_state(Arc::clone(&b), &[1, 1]).unwrap();
        for i in 0..2 {
            assert_eq!(number_operator(&b, i).unwrap().expectation(&psi).unwrap(), 1.0);
        }
    }

    #[test]
    fn creation_on_vacuum() {
        let vac = StateVector::basis_state(basis(2, 0, 2), &[0, 0]).unwrap();
        let (psi, norm) = create_particle(&vac, &basis(2, 1, 2), 0).unwrap();
        assert_eq!(norm, 1.0);
        assert_eq!(psi.amplitudes()[psi.basis().rank(&[1, 0]).unwrap()].re, 1.0);
    }

    #[test]
    fn creation_is_bosonically_enhanced() {
        let one = StateVector::basis_state(basis(2, 1, 2), &[1, 0]).unwrap();
        let (psi, norm) = create_particle(&one, &basis(2, 2, 2), 0).unwrap();
        assert_abs_diff_eq!(norm, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[0].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn creation_on_mott_state() {
        let mi = StateVector::basis_state(basis(3, 3, 2), &[1, 1, 1]).unwrap();
        let target = basis(3, 4, 2);
        let (psi, norm) = create_particle(&mi, &target, 1).unwrap();
        assert_abs_diff_eq!(norm, 2f64.sqrt(), epsilon = 1e-15);
        let k = target.rank(&[1, 2, 1]).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[k].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn creation_beyond_cap_is_dropped() {
        let b1 = basis(2, 1, 1);
        let amps = vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let psi = StateVector::new(b1, amps).unwrap();
        let (out, norm) = create_particle(&psi, &basis(2, 2, 1), 0).unwrap();
        // only the (0,1) component can take another boson on site 0
        assert_abs_diff_eq!(norm, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[0].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn creation_rejects_mismatched_sectors() {
        let vac = StateVector::basis_state(basis(2, 0, 2), &[0, 0]).unwrap();
        assert!(create_particle(&vac, &basis(2, 2, 2), 0).is_err());
        assert!(create_particle(&vac, &basis(3, 1, 2), 0).is_err());
    }

    #[test]
    fn annihilation_undoes_creation() {
        let b = basis(3, 2, 2);
        let psi = StateVector::basis_state(Arc::clone(&b), &[0, 2, 0]).unwrap();
        let (down, norm) = annihilate_particle(&psi, &basis(3, 1, 2), 1).unwrap();
        assert_abs_diff_eq!(norm, 2f64.sqrt(), epsilon = 1e-15);
        let (up, _) = create_particle(&down, &b, 1).unwrap();
        assert_abs_diff_eq!(up.overlap(&psi).unwrap().norm(), 1.0, epsilon = 1e-15);
    }
}
