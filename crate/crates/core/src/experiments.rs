//! Scenario runners built on the lower-level modules.
//!
//! Every runner works in a fixed particle-number sector: filling `nbar` is
//! imposed by diagonalizing in the `N = M * nbar` sector instead of tuning a
//! chemical potential. Runs are deterministic; sweeps are evaluated in parallel
//! but returned in input order.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctqw::{free_boson_state, spread, walk_amplitudes};
use crate::entanglement::{first_maximum, first_maximum_above, log_negativity, reduce_two_sites};
use crate::error::{BhError, Result};
use crate::fock::{sector_dimension, Occupation, OccupationBasis};
use crate::operators::{build_hamiltonian, create_particle, BhParams, SparseOperator};
use crate::sdq::{sdq_entanglement, sdq_project, SdqDefinition};
use crate::solve::{evolve, ground_state, StateVector, DEFAULT_EVOLVE_TOL};

/// Largest basis a scenario may allocate.
pub const DEFAULT_DIM_CAP: u128 = 5_000_000;
/// Residual tolerance of scenario ground states.
pub const GROUND_STATE_TOL: f64 = 1e-9;

/// Uniform time grid `0, dt, 2 dt, ..., t_max` in units of `1/J`.
pub fn uniform_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt).round() as usize;
    (0..=steps).map(|i| i as f64 * dt).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Occupations,
    LnEdges,
    LnSymmetricPairs,
    Sdq,
    Spread,
}

/// Parameters shared by the lattice scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub sites: usize,
    pub nbar: usize,
    /// Per-site occupation cap of the truncated basis.
    pub cap: usize,
    pub u_over_j: f64,
    pub times: Vec<f64>,
    pub observables: Vec<Observable>,
    pub dim_cap: u128,
}

impl ScenarioSpec {
    pub fn new(name: &str, sites: usize, nbar: usize, cap: usize, u_over_j: f64, times: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            sites,
            nbar,
            cap,
            u_over_j,
            times,
            observables: vec![Observable::Occupations, Observable::LnSymmetricPairs],
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    pub fn with_observables(mut self, observables: Vec<Observable>) -> Self {
        self.observables = observables;
        self
    }

    fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }

    /// Checks the grid and that every sector with `particles` bosons fits under
    /// the dimension cap, before anything is allocated.
    pub fn check(&self, particle_counts: &[usize]) -> Result<()> {
        if self.sites == 0 {
            return Err(BhError::InvalidParameter("scenario needs at least one site".into()));
        }
        if self.times.is_empty() || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BhError::InvalidParameter("time grid must be non-empty and strictly increasing".into()));
        }
        if self.u_over_j < 0.0 || !self.u_over_j.is_finite() {
            return Err(BhError::InvalidParameter(format!("U/J = {} is not allowed", self.u_over_j)));
        }
        for &n in particle_counts {
            let dim = sector_dimension(self.sites, n, self.cap);
            if dim > self.dim_cap {
                return Err(BhError::InfeasibleDimension { dim, cap: self.dim_cap });
            }
        }
        Ok(())
    }

    fn params(&self) -> BhParams {
        BhParams::new(1.0, self.u_over_j)
    }
}

/// Observables sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl TimeSeries {
    fn with_columns(names: Vec<String>) -> Self {
        Self {
            times: Vec::new(),
            columns: names.into_iter().map(|name| Column { name, values: Vec::new() }).collect(),
        }
    }

    fn push(&mut self, t: f64, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.times.push(t);
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.values.push(v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    /// Row `i` as `(t, values...)`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        std::iter::once(self.times[i])
            .chain(self.columns.iter().map(|c| c.values[i]))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn site_columns(prefix: &str, sites: usize) -> Vec<String> {
    (1..=sites).map(|i| format!("{prefix}_{i}")).collect()
}

/// Closed-form walk from the middle of an odd chain; columns `p_1..p_M`.
pub fn run_ctqw_figure(sites: usize, t_max: f64, dt: f64) -> Result<TimeSeries> {
    let mut series = TimeSeries::with_columns(site_columns("p", sites));
    for t in uniform_grid(t_max, dt) {
        series.push(t, walk_amplitudes(sites, 1.0, t)?.probabilities());
    }
    Ok(series)
}

/// Ground state of the `nbar`-filled chain plus one boson injected on the middle
/// site, normalized, together with the Hamiltonian of the `N+1` sector.
pub fn injected_ground_state(spec: &ScenarioSpec) -> Result<(SparseOperator, StateVector)> {
    if spec.sites % 2 == 0 {
        return Err(BhError::EvenChain(spec.sites));
    }
    let n = spec.sites * spec.nbar;
    spec.check(&[n, n + 1])?;
    let background = Arc::new(OccupationBasis::new(spec.sites, n, spec.cap)?);
    let gs = ground_state(&build_hamiltonian(&background, &spec.params())?, GROUND_STATE_TOL)?;
    let target = Arc::new(OccupationBasis::new(spec.sites, n + 1, spec.cap)?);
    let h = build_hamiltonian(&target, &spec.params())?;
    let (psi, _) = create_particle(&gs.state, &target, spec.sites / 2)?;
    Ok((h, psi))
}

struct Trajectory<'a> {
    h: &'a SparseOperator,
    psi: StateVector,
    now: f64,
}

impl<'a> Trajectory<'a> {
    fn new(h: &'a SparseOperator, psi: StateVector) -> Self {
        Self { h, psi, now: 0.0 }
    }

    fn advance_to(&mut self, t: f64) -> Result<&StateVector> {
        if t != self.now {
            self.psi = evolve(self.h, &self.psi, t - self.now, DEFAULT_EVOLVE_TOL)?;
            self.now = t;
        }
        Ok(&self.psi)
    }
}

fn conservation_row(h: &SparseOperator, psi: &StateVector) -> Result<[f64; 3]> {
    Ok([psi.norm(), h.expectation(psi)?, psi.occupations().iter().sum()])
}

const CONSERVATION: [&str; 3] = ["norm", "energy", "particles"];

/// Extra boson launched from the middle of a ground state.
///
/// Columns: `n_1..n_M`, `ln_k` for the pairs `(mid - k, mid + k)` with
/// `k = 1..=(M-1)/2` (so `ln_{(M-1)/2}` is the end-site pair), then `norm`,
/// `energy` and `particles`.
pub fn run_mott_transport(spec: &ScenarioSpec) -> Result<TimeSeries> {
    let (h, psi) = injected_ground_state(spec)?;
    let mid = spec.sites / 2;
    let mut names = Vec::new();
    if spec.wants(Observable::Occupations) {
        names.extend(site_columns("n", spec.sites));
    }
    let pairs: Vec<usize> = if spec.wants(Observable::LnSymmetricPairs) {
        (1..=mid).collect()
    } else if spec.wants(Observable::LnEdges) {
        vec![mid]
    } else {
        Vec::new()
    };
    names.extend(pairs.iter().map(|k| format!("ln_{k}")));
    names.extend(CONSERVATION.iter().map(|s| s.to_string()));
    let mut series = TimeSeries::with_columns(names);
    let mut traj = Trajectory::new(&h, psi);
    for &t in &spec.times {
        let psi = traj.advance_to(t)?;
        let mut row = Vec::new();
        if spec.wants(Observable::Occupations) {
            row.extend(psi.occupations());
        }
        for &k in &pairs {
            row.push(log_negativity(&reduce_two_sites(psi, mid - k, mid + k)?)?);
        }
        row.extend(conservation_row(&h, psi)?);
        series.push(t, row);
    }
    Ok(series)
}

/// Ground state of the `nbar`-filled chain without the extra boson.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub u_over_j: f64,
    pub dim: usize,
    pub energy: f64,
    pub residual: f64,
    pub degenerate: bool,
    /// Negativity and purity of the two end sites.
    pub ln_edges: f64,
    pub purity_edges: f64,
    pub occupations: Vec<f64>,
}

pub fn ground_state_summary(spec: &ScenarioSpec) -> Result<GroundStateSummary> {
    let n = spec.sites * spec.nbar;
    spec.check(&[n])?;
    let basis = Arc::new(OccupationBasis::new(spec.sites, n, spec.cap)?);
    let gs = ground_state(&build_hamiltonian(&basis, &spec.params())?, GROUND_STATE_TOL)?;
    let (ln_edges, purity_edges) = if spec.sites > 1 {
        let rho = reduce_two_sites(&gs.state, 0, spec.sites - 1)?;
        (log_negativity(&rho)?, rho.purity())
    } else {
        (0.0, 1.0)
    };
    Ok(GroundStateSummary {
        u_over_j: spec.u_over_j,
        dim: basis.dim(),
        energy: gs.energy,
        residual: gs.residual,
        degenerate: gs.degenerate,
        ln_edges,
        purity_edges,
        occupations: gs.state.occupations(),
    })
}

/// First maximum of the end-site negativity for one interaction strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub u_over_j: f64,
    pub t_first_max: Option<f64>,
    pub ln_first_max: Option<f64>,
}

/// End-site negativity after injecting a boson, sampled until its first maximum.
pub fn edge_ln_first_maximum(spec: &ScenarioSpec) -> Result<SweepPoint> {
    let (h, psi) = injected_ground_state(spec)?;
    let mut traj = Trajectory::new(&h, psi);
    let mut values = Vec::with_capacity(spec.times.len());
    let mut found = None;
    for (i, &t) in spec.times.iter().enumerate() {
        let psi = traj.advance_to(t)?;
        values.push(log_negativity(&reduce_two_sites(psi, 0, spec.sites - 1)?)?);
        if let Some(hit) = first_maximum(&spec.times[..=i], &values) {
            found = Some(hit);
            break;
        }
    }
    Ok(SweepPoint {
        u_over_j: spec.u_over_j,
        t_first_max: found.map(|f| f.0),
        ln_first_max: found.map(|f| f.1),
    })
}

/// First-maximum end-site negativity for each interaction strength, in input order.
pub fn run_ln_vs_u_sweep(base: &ScenarioSpec, u_values: &[f64]) -> Result<Vec<SweepPoint>> {
    let n = base.sites * base.nbar;
    base.check(&[n, n + 1])?;
    u_values
        .par_iter()
        .map(|&u| {
            let spec = ScenarioSpec { u_over_j: u, ..base.clone() };
            edge_ln_first_maximum(&spec)
        })
        .collect()
}

/// `particles` bosons start together on the middle site of an empty chain.
///
/// Columns: `n_1..n_M`, `spread` (of the normalized density), `edge_pair`
/// (probability of two or more bosons on the last site), then `norm`,
/// `energy` and `particles`.
pub fn run_cotunneling(spec: &ScenarioSpec, particles: usize) -> Result<TimeSeries> {
    spec.check(&[particles])?;
    let cap = spec.cap.max(particles);
    let basis = Arc::new(OccupationBasis::new(spec.sites, particles, cap)?);
    let h = build_hamiltonian(&basis, &spec.params())?;
    let mut start = vec![0 as Occupation; spec.sites];
    start[spec.sites / 2] = particles as Occupation;
    let psi = StateVector::basis_state(Arc::clone(&basis), &start)?;
    let last = spec.sites - 1;
    let mut names = site_columns("n", spec.sites);
    names.push("spread".into());
    names.push("edge_pair".into());
    names.extend(CONSERVATION.iter().map(|s| s.to_string()));
    let mut series = TimeSeries::with_columns(names);
    let mut traj = Trajectory::new(&h, psi);
    for &t in &spec.times {
        let psi = traj.advance_to(t)?;
        let occ = psi.occupations();
        let density: Vec<f64> = occ.iter().map(|n| n / particles as f64).collect();
        let edge_pair: f64 = basis
            .configs()
            .zip(psi.amplitudes())
            .filter(|(cfg, _)| cfg[last] >= 2)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let mut row = occ;
        row.push(spread(&density));
        row.push(edge_pair);
        row.extend(conservation_row(&h, psi)?);
        series.push(t, row);
    }
    Ok(series)
}

/// `edge_pair` must exceed this before a local maximum counts as the arrival.
pub const PAIR_ARRIVAL_THRESHOLD: f64 = 0.05;

/// Arrival time of the bound pair at the last site: the first maximum of the
/// `edge_pair` column of [`run_cotunneling`] above [`PAIR_ARRIVAL_THRESHOLD`].
/// The column is first averaged over one period `2 pi / U` of the fast
/// oscillation caused by virtual pair breaking, which otherwise puts spurious
/// local maxima on the rising edge. Expects a uniform grid.
pub fn pair_arrival_time(series: &TimeSeries, u_over_j: f64) -> Option<f64> {
    let edge = series.column("edge_pair")?;
    if series.len() < 3 {
        return None;
    }
    let dt = series.times[1] - series.times[0];
    let window = if u_over_j > 0.0 {
        ((2.0 * std::f64::consts::PI / u_over_j) / dt).ceil() as usize | 1
    } else {
        1
    };
    let smooth = running_mean(edge, window);
    first_maximum_above(&series.times, &smooth, PAIR_ARRIVAL_THRESHOLD).map(|(t, _)| t)
}

// Centered mean over `window` samples (odd), shrinking at the ends.
fn running_mean(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Two-boson launch for the delocalized-qubit scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct SdqScenario {
    pub sites: usize,
    pub u_over_j: f64,
    /// Background filling under the two extra bosons.
    pub nbar: usize,
    pub cap: usize,
    /// 0-based sites that receive the two extra bosons.
    pub launch: [usize; 2],
    pub qubits: SdqDefinition,
    pub times: Vec<f64>,
}

impl SdqScenario {
    /// 24 sites, bosons on the two central sites (12 and 13 counting from 1),
    /// qubits on the two end pairs.
    pub fn fig4(u_over_j: f64, times: Vec<f64>) -> Self {
        Self::ends(24, u_over_j, 0, times)
    }

    /// 4 sites, bosons on sites 2 and 3 (counting from 1), qubits (1,2) and (3,4).
    pub fn fig5(u_over_j: f64, times: Vec<f64>) -> Self {
        Self::ends(4, u_over_j, 0, times)
    }

    /// Even chain with both extra bosons on the central pair and the qubits on
    /// the end pairs, above a uniform background `nbar`.
    pub fn ends(sites: usize, u_over_j: f64, nbar: usize, times: Vec<f64>) -> Self {
        Self {
            sites,
            u_over_j,
            nbar,
            cap: nbar + 2,
            launch: [sites / 2 - 1, sites / 2],
            qubits: SdqDefinition {
                qubit_a: 0,
                qubit_b: sites.saturating_sub(2),
                background: nbar as u8,
            },
            times,
        }
    }

    fn start(&self) -> Result<(Arc<OccupationBasis>, Vec<Occupation>)> {
        let particles = self.sites * self.nbar + 2;
        let basis = Arc::new(OccupationBasis::new(self.sites, particles, self.cap)?);
        let mut start = vec![self.nbar as Occupation; self.sites];
        for &s in &self.launch {
            if s >= self.sites {
                return Err(BhError::SiteOutOfRange { site: s, sites: self.sites });
            }
            start[s] += 1;
        }
        Ok((basis, start))
    }
}

/// Columns of [`run_sdq_scenario`] after the time.
pub const SDQ_COLUMNS: [&str; 8] = ["p", "ln", "p_ln", "pop_00", "pop_01", "pop_10", "pop_11", "norm"];

/// Projection probability, conditional negativity and populations along the
/// trajectory. `ln`, `p_ln` and the populations are NaN where the projection
/// probability is below the reporting threshold. Occupations `n_1..n_M` follow
/// the columns listed in [`SDQ_COLUMNS`].
pub fn run_sdq_scenario(scenario: &SdqScenario) -> Result<TimeSeries> {
    let spec = ScenarioSpec::new("sdq", scenario.sites, scenario.nbar, scenario.cap, scenario.u_over_j, scenario.times.clone());
    spec.check(&[scenario.sites * scenario.nbar + 2])?;
    SdqDefinition::new(scenario.qubits.qubit_a, scenario.qubits.qubit_b, scenario.qubits.background)?;
    let (basis, start) = scenario.start()?;
    let psi0 = StateVector::basis_state(basis, &start)?;
    let h = build_hamiltonian(psi0.basis(), &spec.params())?;
    let mut names: Vec<String> = SDQ_COLUMNS.iter().map(|s| s.to_string()).collect();
    names.extend(site_columns("n", scenario.sites));
    let mut series = TimeSeries::with_columns(names);
    let mut traj = Trajectory::new(&h, psi0);
    for &t in &scenario.times {
        let psi = traj.advance_to(t)?;
        let mut row = sdq_row(psi, &scenario.qubits)?;
        row.push(psi.norm());
        row.extend(psi.occupations());
        series.push(t, row);
    }
    Ok(series)
}

fn sdq_row(psi: &StateVector, qubits: &SdqDefinition) -> Result<Vec<f64>> {
    let s = sdq_project(psi, qubits)?;
    let (ln, pops) = match sdq_entanglement(&s) {
        Ok((_, ln)) => (ln, s.populations().expect("above threshold")),
        Err(BhError::ProjectionUnlikely { .. }) => (f64::NAN, [f64::NAN; 4]),
        Err(e) => return Err(e),
    };
    let mut row = vec![s.probability, ln, s.probability * ln];
    row.extend(pops);
    Ok(row)
}

/// Non-interacting two-boson trajectory from the permanent formula, with the
/// same `p, ln, p_ln, pop_*` columns as [`run_sdq_scenario`] (no norm or
/// occupations).
pub fn sdq_free_boson_oracle(scenario: &SdqScenario) -> Result<TimeSeries> {
    let (basis, start) = scenario.start()?;
    let mut series = TimeSeries::with_columns(SDQ_COLUMNS[..7].iter().map(|s| s.to_string()).collect());
    for &t in &scenario.times {
        let psi = free_boson_state(&basis, &start, 1.0, t)?;
        series.push(t, sdq_row(&psi, &scenario.qubits)?);
    }
    Ok(series)
}

/// Fidelity between the exact trajectory of an injected boson on a Mott
/// background and the effective single-defect walk hopping at `(nbar+1) J`.
pub fn mott_effective_fidelity(spec: &ScenarioSpec) -> Result<Vec<f64>> {
    let (h, psi) = injected_ground_state(spec)?;
    let basis = Arc::clone(psi.basis());
    let defect_states: Vec<usize> = (0..spec.sites)
        .map(|i| {
            let mut cfg = vec![spec.nbar as Occupation; spec.sites];
            cfg[i] += 1;
            basis.rank(&cfg)
        })
        .collect::<Result<_>>()?;
    let speed = (spec.nbar + 1) as f64;
    let mut traj = Trajectory::new(&h, psi);
    spec.times
        .iter()
        .map(|&t| {
            let psi = traj.advance_to(t)?;
            let walk = walk_amplitudes(spec.sites, speed, t)?;
            let overlap: num_complex::Complex64 = defect_states
                .iter()
                .zip(&walk.amplitudes)
                .map(|(&k, c)| c.conj() * psi.amplitudes()[k])
                .sum();
            Ok(overlap.norm_sqr())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ctqw_figure_starts_as_delta() {
        let s = run_ctqw_figure(41, 10.0, 0.05).unwrap();
        assert_eq!(s.len(), 201);
        assert_eq!(s.columns.len(), 41);
        let first = s.row(0);
        for (i, p) in first[1..].iter().enumerate() {
            assert_abs_diff_eq!(*p, if i == 20 { 1.0 } else { 0.0 }, epsilon = 1e-13);
        }
        let slice = s.row(100);
        assert_abs_diff_eq!(slice[0], 5.0, epsilon = 1e-12);
        for i in 1..=41 {
            assert_abs_diff_eq!(slice[i], slice[42 - i], epsilon = 1e-12);
        }
    }

    #[test]
    fn mott_limit_ground_state() {
        let spec = ScenarioSpec::new("gs", 5, 1, 3, 1000.0, vec![0.0]);
        let g = ground_state_summary(&spec).unwrap();
        assert_eq!(g.dim, 101);
        assert!(!g.degenerate);
        assert!(g.ln_edges < 1e-3);
        for n in &g.occupations {
            assert_abs_diff_eq!(*n, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn grid_must_increase() {
        let spec = ScenarioSpec::new("bad", 5, 1, 3, 10.0, vec![0.0, 0.5, 0.5]);
        assert!(spec.check(&[5]).is_err());
    }

    #[test]
    fn oversized_scenario_is_rejected_before_allocation() {
        let spec = ScenarioSpec::new("huge", 41, 1, 5, 10.0, vec![0.0]);
        match injected_ground_state(&spec) {
            Err(BhError::InfeasibleDimension { dim, .. }) => assert!(dim > DEFAULT_DIM_CAP),
            other => panic!("expected a dimension error, got {other:?}"),
        }
    }

    #[test]
    fn transport_conserves() {
        let spec = ScenarioSpec::new("t", 5, 1, 3, 8.0, uniform_grid(3.0, 0.25));
        let s = run_mott_transport(&spec).unwrap();
        let e0 = s.column("energy").unwrap()[0];
        for i in 0..s.len() {
            assert_abs_diff_eq!(s.column("norm").unwrap()[i], 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.column("particles").unwrap()[i], 6.0, epsilon = 1e-9);
            assert_abs_diff_eq!(s.column("energy").unwrap()[i], e0, epsilon = 1e-9);
            for k in 1..=2 {
                assert!(s.column(&format!("ln_{k}")).unwrap()[i] >= 0.0);
            }
        }
    }

    #[test]
    fn empty_background_sweep_ignores_interaction() {
        let base = ScenarioSpec::new("vac", 7, 0, 2, 0.0, uniform_grid(6.0, 0.05));
        let pts = run_ln_vs_u_sweep(&base, &[0.0, 6.0, 40.0]).unwrap();
        for p in &pts[1..] {
            assert_eq!(p.ln_first_max, pts[0].ln_first_max);
            assert_eq!(p.t_first_max, pts[0].t_first_max);
        }
        assert_eq!(pts.iter().map(|p| p.u_over_j).collect::<Vec<_>>(), vec![0.0, 6.0, 40.0]);
    }

    #[test]
    fn sdq_four_site_start() {
        let s = run_sdq_scenario(&SdqScenario::fig5(0.0, vec![0.0, 0.1])).unwrap();
        let row = s.row(0);
        assert_eq!(&row[1..8], &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn running_mean_removes_alternation() {
        let v: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let m = running_mean(&v, 3);
        assert_abs_diff_eq!(m[3], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[4], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0], 0.5, epsilon = 1e-15);
        assert_eq!(running_mean(&v, 1), v);
    }

    #[test]
    fn cotunneling_free_cloud_is_two_walkers() {
        let spec = ScenarioSpec::new("c", 7, 0, 2, 0.0, uniform_grid(2.0, 0.5));
        let s = run_cotunneling(&spec, 2).unwrap();
        // each boson independently follows the single-particle walk
        for (i, &t) in s.times.iter().enumerate() {
            let p = walk_amplitudes(7, 1.0, t).unwrap().probabilities();
            for site in 0..7 {
                let n = s.column(&format!("n_{}", site + 1)).unwrap()[i];
                assert_abs_diff_eq!(n, 2.0 * p[site], epsilon = 1e-9);
            }
        }
    }
}
