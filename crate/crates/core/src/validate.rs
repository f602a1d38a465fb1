//! Built-in cross-checks: structural invariants plus comparisons of every
//! numerical route against an independent one.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ctqw::{free_boson_state, walk_amplitudes};
use crate::entanglement::{
    ln_single_particle, log_negativity, log_negativity_dense, log_negativity_side, reduce_two_sites,
    sf_weights, single_particle_rdm, Side, TwoSiteRdm,
};
use crate::error::Result;
use crate::experiments::{run_cotunneling, run_mott_transport, run_sdq_scenario, uniform_grid, ScenarioSpec, SdqScenario};
use crate::fock::{sector_dimension, Occupation, OccupationBasis};
use crate::linalg::hermitian_eigenvalues;
use crate::operators::{build_hamiltonian, BhParams};
use crate::sdq::{sdq_project, SdqDefinition};
use crate::solve::{evolve, evolve_dense, ground_state, StateVector, DEFAULT_EVOLVE_TOL};

/// Drift allowed in conserved quantities along a trajectory.
pub const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("basis-rank-round-trip", basis_round_trip),
    ("hamiltonian-hermitian", hamiltonian_hermitian),
    ("lanczos-vs-dense", lanczos_vs_dense),
    ("krylov-vs-dense", krylov_vs_dense),
    ("walk-closed-form-vs-krylov", walk_vs_krylov),
    ("permanent-vs-krylov", permanent_vs_krylov),
    ("conservation", conservation),
    ("rdm-state-and-blocks", rdm_checks),
    ("ln-blockwise-vs-dense", ln_blockwise_vs_dense),
    ("partial-transpose-side", partial_transpose_side),
    ("ln-closed-form", ln_closed_form),
    ("walker-rdm-closed-form", walker_rdm),
    ("superfluid-weights", superfluid_weights),
    ("sdq-trace-and-positivity", sdq_positivity),
];

/// Names of the checks in the order [`run_all`] runs them.
pub fn check_names() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|(name, _)| *name)
}

/// Runs every check. A check that errors counts as failed with the error as detail.
pub fn run_all() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name: name.to_string(),
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn verdict(value: f64, tol: f64, what: &str) -> (bool, String) {
    (value <= tol, format!("{what} {value:.3e} (tolerance {tol:.0e})"))
}

fn basis_round_trip() -> Result<(bool, String)> {
    let sectors = [(9, 10, 3), (24, 2, 2), (5, 6, 3), (7, 2, 2), (4, 4, 2), (1, 3, 3)];
    let mut total = 0;
    for (m, n, cap) in sectors {
        let b = OccupationBasis::new(m, n, cap)?;
        if b.dim() as u128 != sector_dimension(m, n, cap) {
            return Ok((false, format!("dimension mismatch for ({m}, {n}, {cap})")));
        }
        for k in 0..b.dim() {
            let cfg = b.config(k);
            let count: usize = cfg.iter().map(|&x| x as usize).sum();
            if b.rank(cfg)? != k || count != n || cfg.iter().any(|&x| x as usize > cap) {
                return Ok((false, format!("round trip broken at index {k} of ({m}, {n}, {cap})")));
            }
        }
        total += b.dim();
    }
    Ok((true, format!("{total} configurations across {} sectors", sectors.len())))
}

fn hamiltonian_hermitian() -> Result<(bool, String)> {
    let basis = Arc::new(OccupationBasis::new(9, 10, 3)?);
    let onsite = (0..9).map(|i| 0.1 * (i as f64) - 0.3).collect();
    let params = BhParams::new(1.0, 7.5).with_onsite(onsite).with_chemical_potential(0.4);
    let h = build_hamiltonian(&basis, &params)?;
    Ok(verdict(h.hermiticity_error(), 1e-12, "max |H - H^dagger|"))
}

fn lanczos_vs_dense() -> Result<(bool, String)> {
    let basis = Arc::new(OccupationBasis::new(7, 7, 2)?);
    let h = build_hamiltonian(&basis, &BhParams::new(1.0, 4.0))?;
    let gs = ground_state(&h, 1e-10)?;
    let exact = hermitian_eigenvalues(&h.to_dense())[0];
    let (ok, detail) = verdict((gs.energy - exact).abs(), 1e-9, "energy difference");
    Ok((ok, format!("{detail}, dim {}", h.dim())))
}

fn krylov_vs_dense() -> Result<(bool, String)> {
    let basis = Arc::new(OccupationBasis::new(5, 6, 3)?);
    let h = build_hamiltonian(&basis, &BhParams::new(1.0, 10.0))?;
    let psi0 = StateVector::basis_state(Arc::clone(&basis), &[1, 1, 2, 1, 1])?;
    let mut worst: f64 = 0.0;
    for t in [0.3, 2.0, -1.5, 7.0] {
        let a = evolve(&h, &psi0, t, DEFAULT_EVOLVE_TOL)?;
        let b = evolve_dense(&h, &psi0, t)?;
        worst = worst.max(max_deviation(a.amplitudes(), b.amplitudes()));
    }
    Ok(verdict(worst, 1e-9, "max amplitude deviation"))
}

fn walk_vs_krylov() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for m in [3, 11, 41] {
        let basis = Arc::new(OccupationBasis::new(m, 1, 1)?);
        let h = build_hamiltonian(&basis, &BhParams::new(1.0, 0.0))?;
        let mut start = vec![0 as Occupation; m];
        start[m / 2] = 1;
        let psi0 = StateVector::basis_state(Arc::clone(&basis), &start)?;
        for t in [0.5, 2.5, 10.0] {
            let numeric = evolve(&h, &psi0, t, 1e-12)?;
            let closed = walk_amplitudes(m, 1.0, t)?;
            let by_site: Vec<Complex64> = (0..m)
                .map(|site| {
                    let mut cfg = vec![0 as Occupation; m];
                    cfg[site] = 1;
                    numeric.amplitudes()[basis.find(&cfg).expect("single-particle config")]
                })
                .collect();
            worst = worst.max(max_deviation(&by_site, &closed.amplitudes));
        }
    }
    Ok(verdict(worst, 1e-10, "max amplitude deviation"))
}

fn permanent_vs_krylov() -> Result<(bool, String)> {
    let basis = Arc::new(OccupationBasis::new(8, 3, 3)?);
    let h = build_hamiltonian(&basis, &BhParams::new(1.0, 0.0))?;
    let start = [0, 0, 1, 2, 0, 0, 0, 0];
    let psi0 = StateVector::basis_state(Arc::clone(&basis), &start)?;
    let mut worst: f64 = 0.0;
    for t in [0.7, 3.0] {
        let numeric = evolve(&h, &psi0, t, 1e-12)?;
        let oracle = free_boson_state(&basis, &start, 1.0, t)?;
        worst = worst.max(max_deviation(numeric.amplitudes(), oracle.amplitudes()));
    }
    Ok(verdict(worst, 1e-9, "max amplitude deviation"))
}

fn drift(values: &[f64], reference: f64) -> f64 {
    values.iter().map(|v| (v - reference).abs()).fold(0.0, f64::max)
}

fn conservation() -> Result<(bool, String)> {
    let grid = uniform_grid(4.0, 0.25);
    let transport = run_mott_transport(&ScenarioSpec::new("check", 7, 1, 3, 10.0, grid.clone()))?;
    let pair = run_cotunneling(&ScenarioSpec::new("check", 7, 0, 2, 20.0, grid.clone()), 2)?;
    let mut worst: f64 = 0.0;
    for (series, particles) in [(&transport, 8.0), (&pair, 2.0)] {
        let energy = series.column("energy").expect("energy column");
        worst = worst
            .max(drift(series.column("norm").expect("norm column"), 1.0))
            .max(drift(energy, energy[0]))
            .max(drift(series.column("particles").expect("particles column"), particles));
    }
    let sdq = run_sdq_scenario(&SdqScenario::fig5(20.0, grid))?;
    worst = worst.max(drift(sdq.column("norm").expect("norm column"), 1.0));
    Ok(verdict(worst, CONSERVATION_TOL, "max drift of norm, energy, particle number"))
}

// Reduced states of a generic interacting trajectory, for the RDM checks.
fn sample_rdms() -> Result<Vec<TwoSiteRdm>> {
    let basis = Arc::new(OccupationBasis::new(6, 6, 3)?);
    let h = build_hamiltonian(&basis, &BhParams::new(1.0, 3.0))?;
    let psi0 = StateVector::basis_state(Arc::clone(&basis), &[0, 2, 1, 0, 3, 0])?;
    let mut out = Vec::new();
    for t in [0.4, 1.3, 3.1] {
        let psi = evolve(&h, &psi0, t, DEFAULT_EVOLVE_TOL)?;
        for (a, b) in [(0, 5), (1, 2), (4, 1)] {
            out.push(reduce_two_sites(&psi, a, b)?);
        }
    }
    Ok(out)
}

fn rdm_checks() -> Result<(bool, String)> {
    let rdms = sample_rdms()?;
    let mut worst_trace: f64 = 0.0;
    for rho in &rdms {
        rho.validate()?;
        worst_trace = worst_trace.max((rho.trace() - 1.0).abs());
        // the dense form must carry no weight outside the n_a + n_b blocks
        TwoSiteRdm::from_dense(rho.cutoff(), &rho.to_dense())?;
    }
    let (ok, detail) = verdict(worst_trace, 1e-12, "max |tr rho - 1|");
    Ok((ok, format!("{} states Hermitian, PSD and block diagonal; {detail}", rdms.len())))
}

fn ln_blockwise_vs_dense() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for rho in sample_rdms()? {
        worst = worst.max((log_negativity(&rho)? - log_negativity_dense(&rho, Side::B)?).abs());
    }
    Ok(verdict(worst, 1e-10, "max LN difference"))
}

fn partial_transpose_side() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for rho in sample_rdms()? {
        let a = log_negativity_side(&rho, Side::A)?;
        let b = log_negativity_side(&rho, Side::B)?;
        worst = worst.max((a - b).abs());
    }
    Ok(verdict(worst, 1e-12, "max LN difference between sides"))
}

fn ln_closed_form() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let p1 = 0.5 * i as f64 / 199.0;
        let numeric = log_negativity(&single_particle_rdm(p1, 2)?)?;
        worst = worst.max((ln_single_particle(p1)? - numeric).abs());
    }
    let endpoints = ln_single_particle(0.0)? == 0.0 && ln_single_particle(0.5)? == 1.0;
    let (ok, detail) = verdict(worst, 1e-12, "max difference over 200 samples");
    Ok((ok && endpoints, format!("{detail}; endpoints exact: {endpoints}")))
}

fn walker_rdm() -> Result<(bool, String)> {
    let m = 9;
    let basis = Arc::new(OccupationBasis::new(m, 1, 1)?);
    let mut worst: f64 = 0.0;
    for t in [0.8, 2.0, 4.5] {
        let walk = walk_amplitudes(m, 1.0, t)?;
        let psi = StateVector::new(Arc::clone(&basis), site_ordered(&basis, &walk.amplitudes))?;
        let rho = reduce_two_sites(&psi, 0, m - 1)?;
        let model = single_particle_rdm(walk.probabilities()[0], 2)?;
        let diff = rho.to_dense() - model.to_dense();
        worst = worst.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(verdict(worst, 1e-12, "max entry deviation"))
}

// Single-particle amplitudes indexed by site, rearranged into basis order.
fn site_ordered(basis: &OccupationBasis, by_site: &[Complex64]) -> Vec<Complex64> {
    basis
        .configs()
        .map(|cfg| by_site[cfg.iter().position(|&n| n == 1).expect("one particle")])
        .collect()
}

fn superfluid_weights() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for nbar in 0..=4 {
        for extra in [false, true] {
            let total: f64 = sf_weights(20, nbar, extra)?.iter().sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok(verdict(worst, 1e-12, "max |sum of weights - 1|"))
}

fn sdq_positivity() -> Result<(bool, String)> {
    let basis = Arc::new(OccupationBasis::new(4, 2, 2)?);
    let h = build_hamiltonian(&basis, &BhParams::new(1.0, 20.0))?;
    let psi0 = StateVector::basis_state(Arc::clone(&basis), &[0, 1, 1, 0])?;
    let def = SdqDefinition::chain_ends(4, 0)?;
    let mut lowest = f64::INFINITY;
    let mut largest_p: f64 = 0.0;
    for t in uniform_grid(6.0, 0.1) {
        let s = sdq_project(&evolve(&h, &psi0, t, DEFAULT_EVOLVE_TOL)?, &def)?;
        lowest = lowest.min(hermitian_eigenvalues(&s.matrix)[0]);
        largest_p = largest_p.max(s.probability);
    }
    let ok = lowest >= -1e-12 && largest_p <= 1.0 + 1e-12;
    Ok((ok, format!("min eigenvalue {lowest:.3e}, max p {largest_p:.12}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for r in run_all() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = check_names().collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
    }
}
