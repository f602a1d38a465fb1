//! Two-site reduced density matrices in the occupation-number basis and their
//! logarithmic negativity.
//!
//! A two-site state of a fixed-N chain is block diagonal in the number of
//! bosons `k = n_a + n_b` shared by the two sites, so [`TwoSiteRdm`] stores one
//! dense block per `k`. Block `k` is written in the basis `|j, k - j>` with `j`
//! running over the values allowed by the cutoff, in increasing order.
//!
//! The partial transpose maps `|x, y><x', y'|` to `|x, y'><x', y|`, which keeps
//! `x - y` fixed, so `rho^Gamma` is itself block diagonal in `x - y`. The
//! negativity is evaluated block by block; [`log_negativity_dense`] does the
//! same computation on the full `d^2 x d^2` matrix and serves as a cross-check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{BhError, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::solve::StateVector;

/// Tolerance on Hermiticity of density matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;
/// Local maxima of `LN(t)` below this value are ignored by [`first_maximum`].
pub const FIRST_MAX_THRESHOLD: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which subsystem the partial transpose acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Density matrix of two sites over occupations `0..cutoff` each.
#[derive(Debug, Clone)]
pub struct TwoSiteRdm {
    cutoff: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

impl TwoSiteRdm {
    pub fn zeros(cutoff: usize) -> Self {
        assert!(cutoff > 0);
        let blocks = (0..2 * cutoff - 1)
            .map(|k| {
                let n = block_len(cutoff, k);
                DMatrix::zeros(n, n)
            })
            .collect();
        Self { cutoff, blocks }
    }

    /// Pure state from amplitudes on `|n_a, n_b>`. Amplitudes that mix
    /// different `n_a + n_b` are rejected, since no fixed-N state produces them.
    pub fn pure(cutoff: usize, amplitudes: &[((usize, usize), Complex64)]) -> Result<Self> {
        let mut rho = Self::zeros(cutoff);
        let sector = amplitudes.first().map(|((a, b), _)| a + b);
        for &((a1, b1), c1) in amplitudes {
            if Some(a1 + b1) != sector {
                return Err(BhError::InvalidParameter(
                    "pure two-site state mixes particle-number sectors".into(),
                ));
            }
            for &((a2, b2), c2) in amplitudes {
                rho.add(a1, b1, a2, b2, c1 * c2.conj())?;
            }
        }
        Ok(rho)
    }

    /// Rebuilds the block form from a dense `d^2 x d^2` matrix indexed by
    /// `n_a * d + n_b`. Entries coupling different sectors must vanish.
    pub fn from_dense(cutoff: usize, dense: &DMatrix<Complex64>) -> Result<Self> {
        let d2 = cutoff * cutoff;
        if dense.nrows() != d2 || dense.ncols() != d2 {
            return Err(BhError::InvalidParameter(format!(
                "expected a {d2}x{d2} matrix for cutoff {cutoff}"
            )));
        }
        let mut rho = Self::zeros(cutoff);
        for r in 0..d2 {
            for c in 0..d2 {
                let v = dense[(r, c)];
                let (a1, b1, a2, b2) = (r / cutoff, r % cutoff, c / cutoff, c % cutoff);
                if a1 + b1 != a2 + b2 {
                    if v.norm() > HERMITIAN_TOL {
                        return Err(BhError::InvalidParameter(
                            "matrix couples different particle-number sectors".into(),
                        ));
                    }
                    continue;
                }
                rho.add(a1, b1, a2, b2, v)?;
            }
        }
        Ok(rho)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Block of states with `k` bosons on the two sites.
    pub fn block(&self, k: usize) -> &DMatrix<Complex64> {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    /// `<a1, b1| rho |a2, b2>`.
    pub fn entry(&self, a1: usize, b1: usize, a2: usize, b2: usize) -> Complex64 {
        if a1.max(b1).max(a2).max(b2) >= self.cutoff || a1 + b1 != a2 + b2 {
            return ZERO;
        }
        let k = a1 + b1;
        let lo = block_lo(self.cutoff, k);
        self.blocks[k][(a1 - lo, a2 - lo)]
    }

    fn add(&mut self, a1: usize, b1: usize, a2: usize, b2: usize, v: Complex64) -> Result<()> {
        if a1.max(b1).max(a2).max(b2) >= self.cutoff {
            return Err(BhError::InvalidParameter(format!(
                "occupation above cutoff {}",
                self.cutoff
            )));
        }
        if a1 + b1 != a2 + b2 {
            return Err(BhError::InvalidParameter(
                "entry couples different particle-number sectors".into(),
            ));
        }
        let k = a1 + b1;
        let lo = block_lo(self.cutoff, k);
        self.blocks[k][(a1 - lo, a2 - lo)] += v;
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        for b in &mut self.blocks {
            *b *= Complex64::new(s, 0.0);
        }
    }

    /// Probability of finding `k` bosons on the two sites.
    pub fn sector_weight(&self, k: usize) -> f64 {
        self.blocks.get(k).map_or(0.0, |b| b.trace().re)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.cutoff;
        let mut m = DMatrix::zeros(d * d, d * d);
        for (k, block) in self.blocks.iter().enumerate() {
            let lo = block_lo(d, k);
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    let (a1, a2) = (lo + r, lo + c);
                    m[(a1 * d + (k - a1), a2 * d + (k - a2))] = block[(r, c)];
                }
            }
        }
        m
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all sector blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.nrows() > 0)
            .flat_map(|b| hermitian_eigenvalues(b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, positivity and unit trace.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(BhError::NotHermitian(herm));
        }
        let low = self.min_eigenvalue();
        if low < -PSD_TOL {
            return Err(BhError::NotPositive(low));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(BhError::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }

    /// Blocks of the partial transpose, labelled by `x - y` of the row state
    /// `|x, y>`, from `-(d-1)` to `d-1`. Rows of each block run over `x`.
    pub fn partial_transpose_blocks(&self, side: Side) -> Vec<DMatrix<Complex64>> {
        let d = self.cutoff as isize;
        (-(d - 1)..d)
            .map(|diff| {
                let xs: Vec<usize> = (0..d)
                    .filter(|&x| (0..d).contains(&(x - diff)))
                    .map(|x| x as usize)
                    .collect();
                let shift = |x: usize| (x as isize - diff) as usize;
                DMatrix::from_fn(xs.len(), xs.len(), |r, c| {
                    let (x, xp) = (xs[r], xs[c]);
                    match side {
                        Side::B => self.entry(x, shift(xp), xp, shift(x)),
                        Side::A => self.entry(xp, shift(x), x, shift(xp)),
                    }
                })
            })
            .collect()
    }
}

fn block_lo(cutoff: usize, k: usize) -> usize {
    k.saturating_sub(cutoff - 1)
}

fn block_len(cutoff: usize, k: usize) -> usize {
    k.min(cutoff - 1) + 1 - block_lo(cutoff, k)
}

/// Reduced state of sites `a` and `b` of a chain state. The cutoff is the
/// basis cap plus one.
pub fn reduce_two_sites(psi: &StateVector, a: usize, b: usize) -> Result<TwoSiteRdm> {
    let basis = psi.basis();
    let sites = basis.sites();
    for s in [a, b] {
        if s >= sites {
            return Err(BhError::SiteOutOfRange { site: s, sites });
        }
    }
    if a == b {
        return Err(BhError::InvalidParameter("the two sites must differ".into()));
    }
    let cutoff = basis.cap() + 1;
    let radix = cutoff as u128;
    let mut groups: BTreeMap<u128, Vec<(usize, usize, Complex64)>> = BTreeMap::new();
    for (cfg, &amp) in basis.configs().zip(psi.amplitudes()) {
        if amp == ZERO {
            continue;
        }
        let env = cfg
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != a && i != b)
            .fold(0u128, |key, (_, &n)| key * radix + n as u128);
        groups
            .entry(env)
            .or_default()
            .push((cfg[a] as usize, cfg[b] as usize, amp));
    }
    let mut rho = TwoSiteRdm::zeros(cutoff);
    // a fixed environment fixes n_a + n_b, so every pair lands in one block
    for members in groups.values() {
        for &(a1, b1, c1) in members {
            for &(a2, b2, c2) in members {
                rho.add(a1, b1, a2, b2, c1 * c2.conj())?;
            }
        }
    }
    Ok(rho)
}

/// `log2 || rho^Gamma ||_1`, with the partial transpose taken on site `b`.
pub fn log_negativity(rho: &TwoSiteRdm) -> Result<f64> {
    log_negativity_side(rho, Side::B)
}

pub fn log_negativity_side(rho: &TwoSiteRdm, side: Side) -> Result<f64> {
    let herm = rho.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(BhError::NotHermitian(herm));
    }
    let norm: f64 = rho
        .partial_transpose_blocks(side)
        .iter()
        .filter(|b| b.nrows() > 0)
        .flat_map(|b| hermitian_eigenvalues(b))
        .map(f64::abs)
        .sum();
    log2_trace_norm(norm)
}

/// Logarithmic negativity from the full `d^2 x d^2` partial transpose.
pub fn log_negativity_dense(rho: &TwoSiteRdm, side: Side) -> Result<f64> {
    let d = rho.cutoff();
    dense_log_negativity(&rho.to_dense(), d, d, side)
}

/// Partial transpose of a bipartite matrix with local dimensions `da x db`,
/// indexed by `x * db + y`.
pub fn partial_transpose_dense(
    m: &DMatrix<Complex64>,
    da: usize,
    db: usize,
    side: Side,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(da * db, da * db, |r, c| {
        let (x, y, xp, yp) = (r / db, r % db, c / db, c % db);
        match side {
            Side::B => m[(x * db + yp, xp * db + y)],
            Side::A => m[(xp * db + y, x * db + yp)],
        }
    })
}

/// `log2` of the trace norm of the partial transpose of a dense bipartite matrix.
pub fn dense_log_negativity(m: &DMatrix<Complex64>, da: usize, db: usize, side: Side) -> Result<f64> {
    let herm = (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    if herm > HERMITIAN_TOL {
        return Err(BhError::NotHermitian(herm));
    }
    let pt = partial_transpose_dense(m, da, db, side);
    let norm: f64 = hermitian_eigenvalues(&pt).into_iter().map(f64::abs).sum();
    log2_trace_norm(norm)
}

// Rounding can push the trace norm of a separable state just below 1.
fn log2_trace_norm(norm: f64) -> Result<f64> {
    if !norm.is_finite() {
        return Err(BhError::NumericalFailure(format!("trace norm evaluated to {norm}")));
    }
    Ok(norm.log2().max(0.0))
}

/// Intermediates of the single-particle closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnClosedFormTerms {
    pub p1: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LnClosedFormTerms {
    pub fn new(p1: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p1) {
            return Err(BhError::InvalidParameter(format!(
                "edge probability {p1} outside [0, 1/2]"
            )));
        }
        Ok(Self {
            p1,
            alpha: 1.0 - 4.0 * p1 + 6.0 * p1 * p1,
            beta: 1.0 - 4.0 * p1 + 8.0 * p1 * p1,
        })
    }
}

/// Closed-form negativity between the end sites of a single walker whose
/// edge-site probability is `p1`.
pub fn ln_single_particle(p1: f64) -> Result<f64> {
    let LnClosedFormTerms { alpha, beta, .. } = LnClosedFormTerms::new(p1)?;
    let vacuum = 1.0 - 2.0 * p1;
    let cross = vacuum * beta.sqrt();
    // (alpha - cross) / 2 == 2 p1^4 / (alpha + cross), without the cancellation
    let small = 2.0 * p1.powi(4) / (alpha + cross);
    let norm = 2.0 * p1 + ((alpha + cross) / 2.0).sqrt() + small.sqrt();
    Ok(norm.log2().max(0.0))
}

/// End-site state of a single walker: `(1 - 2 p1) |0,0><0,0| + 2 p1 |Psi+><Psi+|`.
pub fn single_particle_rdm(p1: f64, cutoff: usize) -> Result<TwoSiteRdm> {
    if !(0.0..=0.5).contains(&p1) {
        return Err(BhError::InvalidParameter(format!(
            "edge probability {p1} outside [0, 1/2]"
        )));
    }
    if cutoff < 2 {
        return Err(BhError::InvalidParameter("cutoff must allow one boson".into()));
    }
    let mut rho = TwoSiteRdm::zeros(cutoff);
    rho.add(0, 0, 0, 0, Complex64::new(1.0 - 2.0 * p1, 0.0))?;
    for (a1, b1) in [(1, 0), (0, 1)] {
        for (a2, b2) in [(1, 0), (0, 1)] {
            rho.add(a1, b1, a2, b2, Complex64::new(p1, 0.0))?;
        }
    }
    Ok(rho)
}

/// End-site state of a Mott insulator with filling `nbar`: `|nbar, nbar>`.
pub fn mott_rdm(nbar: usize) -> TwoSiteRdm {
    TwoSiteRdm::pure(nbar + 2, &[((nbar, nbar), Complex64::new(1.0, 0.0))]).expect("valid state")
}

/// Mott background plus one boson shared evenly by the end sites.
pub fn mott_extra_rdm(nbar: usize) -> TwoSiteRdm {
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    TwoSiteRdm::pure(nbar + 2, &[((nbar + 1, nbar), c), ((nbar, nbar + 1), c)]).expect("valid state")
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Amplitude `gamma_k` of finding `k` of the `M * nbar` superfluid bosons in
/// the symmetric end-site mode.
pub fn sf_gamma(sites: usize, nbar: usize, k: usize) -> Result<f64> {
    if sites <= 2 {
        return Err(BhError::InvalidParameter(format!(
            "superfluid end-site decomposition needs more than 2 sites, got {sites}"
        )));
    }
    let total = sites * nbar;
    if k > total {
        return Ok(0.0);
    }
    let m = sites as f64;
    let ln_sq = ln_binomial(total, k) + k as f64 * 2f64.ln() + (total - k) as f64 * (m - 2.0).ln()
        - total as f64 * m.ln();
    Ok((0.5 * ln_sq).exp())
}

/// Weights of `|phi_k>` for `k = 0..=M*nbar` (ground state) or `k = 0..=M*nbar+1`
/// (with an extra boson shared by the end sites).
pub fn sf_weights(sites: usize, nbar: usize, extra: bool) -> Result<Vec<f64>> {
    let total = sites * nbar;
    let gamma_sq = (0..=total)
        .map(|k| sf_gamma(sites, nbar, k).map(|g| g * g))
        .collect::<Result<Vec<_>>>()?;
    if !extra {
        return Ok(gamma_sq);
    }
    let denom = 1.0 + 2.0 * nbar as f64;
    Ok((0..=total + 1)
        .map(|k| if k == 0 { 0.0 } else { k as f64 * gamma_sq[k - 1] / denom })
        .collect())
}

/// Superfluid end-site state together with the weight dropped by the cutoff.
#[derive(Debug, Clone)]
pub struct SfRdm {
    pub rdm: TwoSiteRdm,
    pub truncated_weight: f64,
}

/// End-site state of the superfluid ground state (or of the ground state plus
/// one boson in `(|1><| + |M><|)/sqrt2` form), as a mixture of
/// `|phi_k> = ((a1+ + aM+)/sqrt2)^k / sqrt(k!) |0>`.
///
/// With `cutoff = None` every sector is kept (`d = M*nbar + 2`). A smaller
/// cutoff drops the sectors with `k >= d`, renormalizes and reports the loss.
pub fn sf_rdm(sites: usize, nbar: usize, extra: bool, cutoff: Option<usize>) -> Result<SfRdm> {
    let weights = sf_weights(sites, nbar, extra)?;
    let d = cutoff.unwrap_or(sites * nbar + 2);
    if d < 1 {
        return Err(BhError::InvalidParameter("cutoff must be positive".into()));
    }
    let mut rdm = TwoSiteRdm::zeros(d);
    let mut kept = 0.0;
    for (k, &w) in weights.iter().enumerate() {
        if k >= d || w == 0.0 {
            continue;
        }
        kept += w;
        // <j, k-j | phi_k> = sqrt(C(k, j) / 2^k)
        let amps: Vec<f64> = (0..=k)
            .map(|j| (0.5 * (ln_binomial(k, j) - k as f64 * 2f64.ln())).exp())
            .collect();
        let block = &mut rdm.blocks[k];
        for r in 0..=k {
            for c in 0..=k {
                block[(r, c)] += Complex64::new(w * amps[r] * amps[c], 0.0);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    rdm.scale(1.0 / kept);
    Ok(SfRdm { rdm, truncated_weight: total - kept })
}

/// Earliest local maximum of `values` above [`FIRST_MAX_THRESHOLD`], refined by
/// a parabola through the sample and its two neighbours. Returns `(t, value)`.
/// Non-finite samples never qualify.
pub fn first_maximum(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    first_maximum_above(times, values, FIRST_MAX_THRESHOLD)
}

pub fn first_maximum_above(times: &[f64], values: &[f64], threshold: f64) -> Option<(f64, f64)> {
    let n = times.len().min(values.len());
    for i in 1..n.saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if !(l.is_finite() && c.is_finite() && r.is_finite()) {
            continue;
        }
        if c > threshold && c >= l && c > r {
            return Some(refine_peak(
                (times[i - 1], l),
                (times[i], c),
                (times[i + 1], r),
            ));
        }
    }
    None
}

fn refine_peak((t0, y0): (f64, f64), (t1, y1): (f64, f64), (t2, y2): (f64, f64)) -> (f64, f64) {
    // Lagrange parabola through the three samples
    let d0 = (t0 - t1) * (t0 - t2);
    let d1 = (t1 - t0) * (t1 - t2);
    let d2 = (t2 - t0) * (t2 - t1);
    let a = y0 / d0 + y1 / d1 + y2 / d2;
    let b = -(y0 * (t1 + t2) / d0 + y1 * (t0 + t2) / d1 + y2 * (t0 + t1) / d2);
    if a >= 0.0 {
        return (t1, y1);
    }
    let t = (-b / (2.0 * a)).clamp(t0, t2);
    let y = y0 * (t - t1) * (t - t2) / d0 + y1 * (t - t0) * (t - t2) / d1 + y2 * (t - t0) * (t - t1) / d2;
    (t, y)
}
