use crate::error::{invalid, Error, Result};

/// Default cap on the number of states in one particle-number sector.
pub const DEFAULT_CAPACITY: usize = 5_000_000;

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of Fock states of `particles` bosons on `sites` sites.
pub fn sector_dimension(sites: usize, particles: usize) -> Option<u128> {
    if sites == 0 {
        return Some(u128::from(particles == 0));
    }
    binomial((particles + sites - 1) as u64, (sites - 1) as u64)
}

/// All occupation vectors with fixed site count and particle number,
/// in lexicographically descending order: `|N,0,..,0>` comes first.
#[derive(Debug, Clone)]
pub struct FockBasis {
    sites: usize,
    particles: usize,
    occupations: Vec<u8>,
    // ranks[i][r] = C(r + k_i, k_i) with k_i = sites - 1 - i
    ranks: Vec<Vec<usize>>,
}

impl FockBasis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        Self::with_capacity(sites, particles, DEFAULT_CAPACITY)
    }

    pub fn with_capacity(sites: usize, particles: usize, cap: usize) -> Result<Self> {
        if sites == 0 {
            return Err(invalid("a Fock basis needs at least one site"));
        }
        if particles > u8::MAX as usize {
            return Err(invalid(format!(
                "occupations are stored as bytes; {particles} particles is too many"
            )));
        }
        let dim = sector_dimension(sites, particles).unwrap_or(u128::MAX);
        if dim > cap as u128 {
            return Err(Error::Capacity { dim, cap });
        }
        let dim = dim as usize;

        let ranks = (0..sites)
            .map(|i| {
                let k = (sites - 1 - i) as u64;
                (0..=particles as u64)
                    .map(|r| binomial(r + k, k).expect("bounded by the sector dimension") as usize)
                    .collect()
            })
            .collect();

        let mut occupations = Vec::with_capacity(dim * sites);
        let mut n = vec![0u8; sites];
        n[0] = particles as u8;
        loop {
            occupations.extend_from_slice(&n);
            // Successor in descending order: move one particle from the last
            // movable site one step right and gather the tail behind it.
            let Some(i) = (0..sites.saturating_sub(1)).rev().find(|&i| n[i] > 0) else {
                break;
            };
            let tail: u8 = n[i + 1..].iter().sum();
            n[i] -= 1;
            n[i + 1..].iter_mut().for_each(|x| *x = 0);
            n[i + 1] = tail + 1;
        }
        debug_assert_eq!(occupations.len(), dim * sites);

        Ok(Self { sites, particles, occupations, ranks })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.sites
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn state(&self, k: usize) -> &[u8] {
        &self.occupations[k * self.sites..(k + 1) * self.sites]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.occupations.chunks_exact(self.sites)
    }

    /// Position of an occupation vector, or `None` if it is not in this sector.
    pub fn index_of(&self, n: &[u8]) -> Option<usize> {
        if n.len() != self.sites {
            return None;
        }
        let mut remaining = self.particles;
        let mut idx = 0;
        for (i, &ni) in n[..self.sites - 1].iter().enumerate() {
            let ni = ni as usize;
            if ni > remaining {
                return None;
            }
            // States that agree up to site i but hold more particles there.
            let surplus = remaining - ni;
            if surplus > 0 {
                idx += self.ranks[i][surplus - 1];
            }
            remaining -= ni;
        }
        (n[self.sites - 1] as usize == remaining).then_some(idx)
    }

    /// Like [`FockBasis::index_of`] but for generic integer occupations.
    pub fn index_of_counts(&self, n: &[usize]) -> Option<usize> {
        let bytes: Option<Vec<u8>> = n.iter().map(|&x| u8::try_from(x).ok()).collect();
        self.index_of(&bytes?)
    }
}
