//! Bosonic occupation-number bases restricted to a fixed particle-number sector.
//!
//! A basis holds every configuration of `particles` bosons on `sites` sites with
//! at most `cap` bosons per site. Configurations are stored in lexicographically
//! decreasing order, so for `(M=2, N=1)` the first element is `(1, 0)`.

use std::collections::HashMap;

use crate::error::{BhError, Result};

/// Particles per site, one entry per lattice site.
pub type Occupation = u8;

/// Number of configurations of `particles` bosons on `sites` sites with at most
/// `cap` per site. Saturates at `u128::MAX`, which only matters for estimates.
pub fn sector_dimension(sites: usize, particles: usize, cap: usize) -> u128 {
    // count[n] = number of ways to place n particles on the sites seen so far
    let mut count = vec![0u128; particles + 1];
    count[0] = 1;
    for _ in 0..sites {
        let mut next = vec![0u128; particles + 1];
        for (n, slot) in next.iter_mut().enumerate() {
            let lo = n.saturating_sub(cap);
            *slot = count[lo..=n]
                .iter()
                .fold(0u128, |acc, &c| acc.saturating_add(c));
        }
        count = next;
    }
    count[particles]
}

/// Enumerated occupation basis with O(1) rank lookup.
#[derive(Debug, Clone)]
pub struct OccupationBasis {
    sites: usize,
    particles: usize,
    cap: usize,
    // row-major, `sites` entries per configuration
    configs: Vec<Occupation>,
    index: HashMap<u128, usize>,
}

impl OccupationBasis {
    /// Enumerates the sector `(sites, particles)` with per-site cap `cap`.
    pub fn new(sites: usize, particles: usize, cap: usize) -> Result<Self> {
        if sites == 0 {
            return Err(BhError::InvalidParameter("a chain needs at least one site".into()));
        }
        if cap == 0 {
            return Err(BhError::InvalidParameter("occupation cap must be positive".into()));
        }
        if cap > Occupation::MAX as usize {
            return Err(BhError::InvalidParameter(format!("occupation cap {cap} exceeds 255")));
        }
        if particles > sites * cap {
            return Err(BhError::InfeasibleSector { sites, particles, cap });
        }
        // packed keys must fit in u128
        let bits_per_site = ((cap + 1) as f64).log2();
        if bits_per_site * sites as f64 >= 127.0 {
            return Err(BhError::InvalidParameter(format!(
                "{sites} sites with cap {cap} cannot be packed into a 128-bit key"
            )));
        }

        let dim = sector_dimension(sites, particles, cap) as usize;
        let mut configs = Vec::with_capacity(dim * sites);
        let mut current = vec![0 as Occupation; sites];
        fill_decreasing(&mut current, 0, particles, cap, &mut configs);
        debug_assert_eq!(configs.len(), dim * sites);

        let mut basis = Self {
            sites,
            particles,
            cap,
            configs,
            index: HashMap::with_capacity(dim),
        };
        for k in 0..dim {
            let key = basis.pack(basis.config(k));
            basis.index.insert(key, k);
        }
        Ok(basis)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.configs.len() / self.sites
    }

    /// Occupations of the `k`-th configuration.
    pub fn config(&self, k: usize) -> &[Occupation] {
        &self.configs[k * self.sites..(k + 1) * self.sites]
    }

    pub fn configs(&self) -> impl ExactSizeIterator<Item = &[Occupation]> + '_ {
        self.configs.chunks_exact(self.sites)
    }

    /// Ordinal of `config`, or `None` if it does not belong to this sector.
    pub fn find(&self, config: &[Occupation]) -> Option<usize> {
        if config.len() != self.sites || config.iter().any(|&n| n as usize > self.cap) {
            return None;
        }
        self.index.get(&self.pack(config)).copied()
    }

    /// Ordinal of `config`; errors if it is not an element of the basis.
    pub fn rank(&self, config: &[Occupation]) -> Result<usize> {
        self.find(config).ok_or_else(|| BhError::ConfigNotInBasis(config.to_vec()))
    }

    /// Two bases describe the same sector.
    pub fn same_sector(&self, other: &Self) -> bool {
        self.sites == other.sites && self.particles == other.particles && self.cap == other.cap
    }

    fn pack(&self, config: &[Occupation]) -> u128 {
        let radix = (self.cap + 1) as u128;
        config.iter().fold(0u128, |key, &n| key * radix + n as u128)
    }
}

fn fill_decreasing(
    current: &mut [Occupation],
    site: usize,
    remaining: usize,
    cap: usize,
    out: &mut Vec<Occupation>,
) {
    let sites = current.len();
    if site + 1 == sites {
        current[site] = remaining as Occupation;
        out.extend_from_slice(current);
        return;
    }
    let room_after = (sites - site - 1) * cap;
    let lo = remaining.saturating_sub(room_after);
    let hi = remaining.min(cap);
    for n in (lo..=hi).rev() {
        current[site] = n as Occupation;
        fill_decreasing(current, site + 1, remaining - n, cap, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(sites: usize, particles: usize, cap: usize) -> Vec<Vec<Occupation>> {
        let total = (cap + 1).pow(sites as u32);
        let mut found = Vec::new();
        for code in 0..total {
            let mut c = code;
            let mut cfg = vec![0; sites];
            for slot in cfg.iter_mut().rev() {
                *slot = (c % (cap + 1)) as Occupation;
                c /= cap + 1;
            }
            if cfg.iter().map(|&n| n as usize).sum::<usize>() == particles {
                found.push(cfg);
            }
        }
        // decreasing lexicographic
        found.sort_by(|a, b| b.cmp(a));
        found
    }

    #[test]
    fn single_particle_two_sites() {
        let b = OccupationBasis::new(2, 1, 1).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.config(0), &[1, 0]);
        assert_eq!(b.config(1), &[0, 1]);
    }

    #[test]
    fn vacuum_sector() {
        let b = OccupationBasis::new(3, 0, 5).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.config(0), &[0, 0, 0]);
    }

    #[test]
    fn four_sites_four_particles_cap_two() {
        let b = OccupationBasis::new(4, 4, 2).unwrap();
        let oracle = brute_force(4, 4, 2);
        assert_eq!(oracle.len(), 19);
        assert_eq!(b.dim(), 19);
        assert_eq!(b.rank(&[2, 2, 0, 0]).unwrap(), 0);
        let pos = oracle.iter().position(|c| c == &vec![1, 1, 1, 1]).unwrap();
        assert_eq!(b.rank(&[1, 1, 1, 1]).unwrap(), pos);
    }

    #[test]
    fn matches_brute_force_over_small_range() {
        for sites in 1..=6 {
            for particles in 0..=8 {
                for cap in 1..=4 {
                    let oracle = brute_force(sites, particles, cap);
                    assert_eq!(sector_dimension(sites, particles, cap) as usize, oracle.len());
                    match OccupationBasis::new(sites, particles, cap) {
                        Ok(b) => {
                            let listed: Vec<_> = b.configs().map(|c| c.to_vec()).collect();
                            assert_eq!(listed, oracle, "M={sites} N={particles} cap={cap}");
                            for (k, c) in listed.iter().enumerate() {
                                assert_eq!(b.rank(c).unwrap(), k);
                            }
                        }
                        Err(BhError::InfeasibleSector { .. }) => assert!(oracle.is_empty()),
                        Err(e) => panic!("unexpected error {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn infeasible_sector_is_rejected() {
        assert!(matches!(
            OccupationBasis::new(2, 5, 2),
            Err(BhError::InfeasibleSector { .. })
        ));
    }

    #[test]
    fn foreign_config_is_rejected() {
        let b = OccupationBasis::new(3, 2, 2).unwrap();
        assert!(b.rank(&[1, 1, 1]).is_err());
        assert!(b.rank(&[3, 0, 0]).is_err());
        assert!(b.rank(&[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn single_particle_sector_is_the_chain(sites in 1usize..40, cap in 1usize..6) {
            let b = OccupationBasis::new(sites, 1, cap).unwrap();
            prop_assert_eq!(b.dim(), sites);
            for k in 0..sites {
                prop_assert_eq!(b.config(k)[k], 1);
            }
        }

        #[test]
        fn rank_inverts_config(sites in 1usize..7, particles in 0usize..9, cap in 1usize..5) {
            prop_assume!(particles <= sites * cap);
            let b = OccupationBasis::new(sites, particles, cap).unwrap();
            for k in 0..b.dim() {
                prop_assert_eq!(b.rank(b.config(k)).unwrap(), k);
            }
        }
    }
}
