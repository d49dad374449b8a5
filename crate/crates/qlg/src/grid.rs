//! Lattice geometry and units.

use crate::error::{Error, Result};

/// Uniform periodic lattice: `n_sites` cells of size `dx`, advanced in time
/// steps of `dt`. Particles hop one cell per step, so the propagation speed
/// is `c = dx/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    n_sites: usize,
    dx: f64,
    dt: f64,
    c: f64,
}

impl GridSpec {
    pub fn new(n_sites: usize, dx: f64, dt: f64) -> Result<Self> {
        if n_sites < 4 {
            return Err(Error::InvalidInput {
                what: "grid.n_sites",
                value: n_sites as f64,
                expected: ">= 4",
            });
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidInput {
                what: "grid.dx",
                value: dx,
                expected: "> 0",
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput {
                what: "grid.dt",
                value: dt,
                expected: "> 0",
            });
        }
        Ok(Self {
            n_sites,
            dx,
            dt,
            c: dx / dt,
        })
    }

    /// 256 unit cells with `dx = dt = 1`, the configuration used throughout
    /// the standard experiments.
    pub fn default_256() -> Self {
        Self::new(256, 1.0, 1.0).expect("default grid is valid")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Propagation speed `c = dx/dt`, stored so the identity holds exactly.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Domain length `n_sites * dx`.
    pub fn length(&self) -> f64 {
        self.n_sites as f64 * self.dx
    }

    /// Coordinate of site `i`.
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
}
