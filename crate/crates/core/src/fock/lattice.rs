use crate::error::{invalid, Result};

/// Boundary conditions of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Ring,
    OpenChain,
}

/// Parameters of a Bose-Hubbard lattice.
///
/// Every bond `(a, b)` returned by [`LatticeParams::bonds`] carries the
/// hopping term `-J e^{i phase} b†_a b_b + h.c.`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParams {
    pub sites: usize,
    pub hopping: f64,
    pub interaction: f64,
    pub phase: f64,
    pub onsite: Vec<f64>,
    pub geometry: Geometry,
}

impl LatticeParams {
    pub fn ring(sites: usize, hopping: f64, interaction: f64) -> Self {
        Self {
            sites,
            hopping,
            interaction,
            phase: 0.0,
            onsite: vec![0.0; sites],
            geometry: Geometry::Ring,
        }
    }

    pub fn open_chain(sites: usize, hopping: f64, interaction: f64) -> Self {
        Self { geometry: Geometry::OpenChain, ..Self::ring(sites, hopping, interaction) }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_onsite(mut self, onsite: Vec<f64>) -> Self {
        self.onsite = onsite;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(invalid(format!("lattice needs at least 2 sites, got {}", self.sites)));
        }
        if self.onsite.len() != self.sites {
            return Err(invalid(format!(
                "on-site energies have length {}, expected {}",
                self.onsite.len(),
                self.sites
            )));
        }
        let finite = [self.hopping, self.interaction, self.phase]
            .iter()
            .chain(&self.onsite)
            .all(|x| x.is_finite());
        if !finite {
            return Err(invalid("lattice parameters must be finite"));
        }
        Ok(())
    }

    /// Directed bonds `(a, b)`. A two-site ring has a single bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let count = match self.geometry {
            Geometry::Ring if l > 2 => l,
            _ => l.saturating_sub(1),
        };
        (0..count).map(|j| (j, (j + 1) % l)).collect()
    }
}
