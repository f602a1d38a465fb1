//! Continuous-time quantum walk on an open chain, in closed form.
//!
//! The single-particle propagator of `H = -J * adjacency(path)` is diagonal in
//! the sine modes `sin(pi k i / (M+1))` with energies `-2J cos(pi k / (M+1))`.
//! These expressions are the analytic reference for the N=1 sector and, through
//! permanents, for any number of non-interacting bosons.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{BhError, Result};
use crate::fock::{Occupation, OccupationBasis};
use crate::solve::StateVector;

/// Default sampling step of figure time grids, in units of `1/J`.
pub const DEFAULT_DT: f64 = 0.05;

/// Amplitudes `c_i(t)` of a walker launched from the middle of an odd chain.
#[derive(Debug, Clone)]
pub struct WalkAmplitudes {
    pub sites: usize,
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl WalkAmplitudes {
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Closed-form amplitudes of a walker started on the middle site (0-based
/// `sites / 2`) of an odd chain.
pub fn walk_amplitudes(sites: usize, tunneling: f64, t: f64) -> Result<WalkAmplitudes> {
    if sites % 2 == 0 {
        return Err(BhError::EvenChain(sites));
    }
    if t == 0.0 {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); sites];
        amplitudes[sites / 2] = Complex64::new(1.0, 0.0);
        return Ok(WalkAmplitudes { sites, time: t, amplitudes });
    }
    let m1 = (sites + 1) as f64;
    // sin(pi k / 2) vanishes for even k
    let modes: Vec<(f64, Complex64)> = (1..=sites)
        .step_by(2)
        .map(|k| {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let phase = Complex64::from_polar(1.0, 2.0 * tunneling * t * (k as f64 * PI / m1).cos());
            (k as f64, phase * sign)
        })
        .collect();
    let amplitudes = (1..=sites)
        .map(|i| {
            let sum: Complex64 = modes
                .iter()
                .map(|&(k, w)| w * (PI * k * i as f64 / m1).sin())
                .sum();
            sum * (2.0 / m1)
        })
        .collect();
    Ok(WalkAmplitudes { sites, time: t, amplitudes })
}

/// Single-particle propagator `U_ij(t) = <i| exp(-iHt) |j>` on an open chain of
/// any length.
pub fn propagator(sites: usize, tunneling: f64, t: f64) -> DMatrix<Complex64> {
    let m1 = (sites + 1) as f64;
    let modes: Vec<Vec<f64>> = (1..=sites)
        .map(|k| {
            (1..=sites)
                .map(|i| (2.0 / m1).sqrt() * (PI * (k * i) as f64 / m1).sin())
                .collect()
        })
        .collect();
    let phases: Vec<Complex64> = (1..=sites)
        .map(|k| Complex64::from_polar(1.0, 2.0 * tunneling * t * (k as f64 * PI / m1).cos()))
        .collect();
    DMatrix::from_fn(sites, sites, |i, j| {
        modes
            .iter()
            .zip(&phases)
            .map(|(v, &ph)| ph * (v[i] * v[j]))
            .sum()
    })
}

/// Standard deviation of the site index under `p`.
pub fn spread(p: &[f64]) -> f64 {
    let (mut first, mut second) = (0.0, 0.0);
    for (i, &w) in p.iter().enumerate() {
        let x = (i + 1) as f64;
        first += w * x;
        second += w * x * x;
    }
    (second - first * first).max(0.0).sqrt()
}

/// Exact state of non-interacting bosons that started in the Fock state
/// `start`, built from single-particle propagators:
/// `<n|psi(t)> = perm(U[n, m]) / sqrt(prod n_i! prod m_j!)`.
pub fn free_boson_state(
    basis: &Arc<OccupationBasis>,
    start: &[Occupation],
    tunneling: f64,
    t: f64,
) -> Result<StateVector> {
    basis.rank(start)?;
    let u = propagator(basis.sites(), tunneling, t);
    let cols = expand_modes(start);
    let col_norm: f64 = start.iter().map(|&m| factorial(m)).product();
    let amplitudes = basis
        .configs()
        .map(|cfg| {
            let rows = expand_modes(cfg);
            let row_norm: f64 = cfg.iter().map(|&n| factorial(n)).product();
            let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]);
            permanent(&sub) / (row_norm * col_norm).sqrt()
        })
        .collect();
    StateVector::new(Arc::clone(basis), amplitudes)
}

/// Permanent of a square complex matrix (Ryser's formula).
pub fn permanent(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for subset in 1u64..(1u64 << n) {
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..n {
            let row_sum: Complex64 = (0..n)
                .filter(|&j| subset & (1 << j) != 0)
                .map(|j| a[(i, j)])
                .sum();
            prod *= row_sum;
        }
        let sign = if (n - subset.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

fn expand_modes(config: &[Occupation]) -> Vec<usize> {
    config
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| std::iter::repeat(i).take(n as usize))
        .collect()
}

fn factorial(n: Occupation) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_hamiltonian, BhParams};
    use crate::solve::{ctrw_distribution, evolve};
    use approx::assert_abs_diff_eq;

    // Mode sum over every k, even terms included.
    fn full_sum(sites: usize, j: f64, t: f64) -> Vec<Complex64> {
        let m1 = (sites + 1) as f64;
        (1..=sites)
            .map(|i| {
                let s: Complex64 = (1..=sites)
                    .map(|k| {
                        let k = k as f64;
                        let w = (PI * k / 2.0).sin() * (PI * k * i as f64 / m1).sin();
                        Complex64::from_polar(w, 2.0 * j * t * (k * PI / m1).cos())
                    })
                    .sum();
                s * (2.0 / m1)
            })
            .collect()
    }

    #[test]
    fn odd_mode_sum_equals_full_sum() {
        for &m in &[3, 7, 21, 41] {
            for &t in &[0.0, 0.8, 5.0, 13.3] {
                let fast = walk_amplitudes(m, 1.0, t).unwrap();
                for (a, b) in fast.amplitudes.iter().zip(full_sum(m, 1.0, t)) {
                    assert!((a - b).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn starts_on_middle_site() {
        let w = walk_amplitudes(9, 1.0, 0.0).unwrap();
        for (i, c) in w.amplitudes.iter().enumerate() {
            let want = if i == 4 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(c.re, want, epsilon = 1e-14);
            assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn three_site_closed_form() {
        for &t in &[0.2, 1.1, 3.7] {
            let w = walk_amplitudes(3, 1.0, t).unwrap();
            let s = 2f64.sqrt() * t;
            assert_abs_diff_eq!(w.amplitudes[1].re, s.cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(w.amplitudes[1].im, 0.0, epsilon = 1e-14);
            let p = w.probabilities();
            assert_abs_diff_eq!(p[0], p[2], epsilon = 1e-14);
            assert_abs_diff_eq!(p[0], s.sin().powi(2) / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn even_chain_is_rejected() {
        assert!(matches!(walk_amplitudes(4, 1.0, 1.0), Err(BhError::EvenChain(4))));
    }

    #[test]
    fn ballistic_peaks_at_jt_five() {
        let p = walk_amplitudes(41, 1.0, 5.0).unwrap().probabilities();
        let left = (0..20).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap() + 1;
        let right = (21..41).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap() + 1;
        // fronts at 21 -+ 2Jt; the Bessel maximum sits slightly inside them
        assert!(left.abs_diff(11) <= 3, "left peak at site {left}");
        assert!(right.abs_diff(31) <= 3, "right peak at site {right}");
    }

    #[test]
    fn conserves_and_mirrors() {
        for &m in &[5, 11, 41] {
            for step in 0..40 {
                let p = walk_amplitudes(m, 1.0, 0.25 * step as f64).unwrap().probabilities();
                assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                for i in 0..m {
                    assert_abs_diff_eq!(p[i], p[m - 1 - i], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn spread_examples() {
        assert_eq!(spread(&[0.0, 1.0, 0.0]), 0.0);
        let third = 1.0 / 3.0;
        assert_abs_diff_eq!(spread(&[third; 3]), (2.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn quantum_spread_outruns_classical() {
        let t = 4.0;
        let q = spread(&walk_amplitudes(41, 1.0, t).unwrap().probabilities());
        let c = spread(&ctrw_distribution(41, 1.0, t).unwrap().probabilities);
        // infinite-line values: sqrt(2) J t and sqrt(2 J t)
        assert_abs_diff_eq!(q, 2f64.sqrt() * t, epsilon = 1e-6);
        assert_abs_diff_eq!(c, (2.0 * t).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn propagator_column_is_walk() {
        let u = propagator(11, 1.0, 2.3);
        let w = walk_amplitudes(11, 1.0, 2.3).unwrap();
        for i in 0..11 {
            assert!((u[(i, 5)] - w.amplitudes[i]).norm() < 1e-13);
        }
        let unit = u.adjoint() * &u;
        assert!((unit - DMatrix::identity(11, 11)).norm() < 1e-12);
    }

    #[test]
    fn permanent_small_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).map(|x| Complex64::new(x, 0.0));
        assert_abs_diff_eq!(permanent(&a).re, 10.0, epsilon = 1e-14);
        let ones = DMatrix::from_element(4, 4, Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(permanent(&ones).re, 24.0, epsilon = 1e-12);
    }

    #[test]
    fn walk_matches_krylov_single_particle() {
        let b = Arc::new(OccupationBasis::new(9, 1, 2).unwrap());
        let h = build_hamiltonian(&b, &BhParams::new(1.0, 0.0)).unwrap();
        let mut cfg = vec![0; 9];
        cfg[4] = 1;
        let psi0 = StateVector::basis_state(Arc::clone(&b), &cfg).unwrap();
        for &t in &[0.7, 4.0, 10.0] {
            let num = evolve(&h, &psi0, t, 1e-12).unwrap();
            let exact = walk_amplitudes(9, 1.0, t).unwrap();
            for (a, c) in num.amplitudes().iter().zip(&exact.amplitudes) {
                assert!((a - c).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn free_bosons_match_exact_evolution() {
        // two bosons, then a doublon, then three bosons
        let cases: [(usize, usize, usize, Vec<Occupation>); 3] = [
            (6, 2, 2, vec![0, 0, 1, 1, 0, 0]),
            (5, 2, 2, vec![0, 0, 2, 0, 0]),
            (5, 3, 3, vec![1, 0, 2, 0, 0]),
        ];
        for (m, n, cap, start) in cases {
            let b = Arc::new(OccupationBasis::new(m, n, cap).unwrap());
            let h = build_hamiltonian(&b, &BhParams::new(1.0, 0.0)).unwrap();
            let psi0 = StateVector::basis_state(Arc::clone(&b), &start).unwrap();
            for &t in &[0.5, 2.0, 6.0] {
                let num = evolve(&h, &psi0, t, 1e-12).unwrap();
                let perm = free_boson_state(&b, &start, 1.0, t).unwrap();
                for (a, c) in num.amplitudes().iter().zip(perm.amplitudes()) {
                    assert!((a - c).norm() < 1e-9);
                }
            }
        }
    }
}
