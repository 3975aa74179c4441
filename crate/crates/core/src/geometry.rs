//! Lattice geometry for hard rods on a ring.

use crate::error::{Error, Result};

/// Periodic lattice of `l` sites with blockade radius `lambda`.
///
/// An up-spin at site `j` forbids further up-spins within `lambda` sites on
/// either side, so each rod occupies an exclusion footprint of `lambda + 1`
/// sites and at most `floor(l / (lambda + 1))` rods fit on the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RodGeometry {
    l: usize,
    lambda: usize,
}

impl RodGeometry {
    /// Periodic boundary conditions only; `l >= lambda + 1` so at least one
    /// rod fits.
    pub fn new(l: usize, lambda: usize) -> Result<Self> {
        if l == 0 || lambda == 0 {
            return Err(Error::InvalidGeometry {
                l,
                lambda,
                reason: "L and lambda must be positive".into(),
            });
        }
        if l < lambda + 1 {
            return Err(Error::InvalidGeometry {
                l,
                lambda,
                reason: "L must be at least lambda + 1".into(),
            });
        }
        Ok(Self { l, lambda })
    }

    /// Build from the fixed length-to-critical-radius protocol: `L = (l/r_c) * lambda`.
    /// `l_over_rc` must make `L` a positive integer.
    pub fn from_ratio(l_over_rc: f64, lambda: usize) -> Result<Self> {
        let l = l_over_rc * lambda as f64;
        if !(l.is_finite() && l > 0.0 && (l - l.round()).abs() < 1e-9) {
            return Err(Error::Invalid(format!(
                "l/r_c = {l_over_rc} with lambda = {lambda} gives non-integer L = {l}"
            )));
        }
        Self::new(l.round() as usize, lambda)
    }

    pub fn sites(&self) -> usize {
        self.l
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Sites covered by one rod.
    pub fn rod_length(&self) -> usize {
        self.lambda + 1
    }

    /// Maximum number of rods on the ring.
    pub fn max_rods(&self) -> usize {
        self.l / (self.lambda + 1)
    }

    /// Hard-rod density `n * lambda / L` of a column.
    pub fn density(&self, n: usize) -> f64 {
        n as f64 * self.lambda as f64 / self.l as f64
    }

    pub(crate) fn check_column(&self, n: usize) -> Result<()> {
        if n > self.max_rods() {
            Err(Error::ColumnOutOfRange { n, n_max: self.max_rods() })
        } else {
            Ok(())
        }
    }
}
