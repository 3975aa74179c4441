//! Probability distributions over the rod number and their observables.

use crate::error::{Error, Result};
use crate::geometry::RodGeometry;

const NORM_TOL: f64 = 1e-9;

/// Probability vector `p_n` over rod counts `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDistribution {
    geometry: RodGeometry,
    p: Vec<f64>,
}

/// Moments of a rod-number distribution: the mean hard-rod density
/// `<n> lambda / L` and the variance-to-mean ratio
/// `Q = (<n^2> - <n>^2) / <n>` (defined as 0 when `<n> = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub mean_density: f64,
    pub q_ratio: f64,
}

impl NumberDistribution {
    /// Validates length, nonnegativity and normalization.
    pub fn new(geometry: RodGeometry, p: Vec<f64>) -> Result<Self> {
        if p.len() != geometry.max_rods() + 1 {
            return Err(Error::Invalid(format!(
                "distribution has {} entries, geometry needs {}",
                p.len(),
                geometry.max_rods() + 1
            )));
        }
        if let Some(bad) = p.iter().find(|&&x| !(x >= -1e-12)) {
            return Err(Error::Invalid(format!("negative probability {bad}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { geometry, p })
    }

    pub(crate) fn new_unchecked(geometry: RodGeometry, p: Vec<f64>) -> Self {
        Self { geometry, p }
    }

    /// Point mass at rod count `n0`.
    pub fn point_mass(geometry: RodGeometry, n0: usize) -> Result<Self> {
        geometry.check_column(n0)?;
        let mut p = vec![0.0; geometry.max_rods() + 1];
        p[n0] = 1.0;
        Ok(Self { geometry, p })
    }

    pub fn geometry(&self) -> &RodGeometry {
        &self.geometry
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn mean(&self) -> f64 {
        self.p.iter().enumerate().map(|(n, &x)| n as f64 * x).sum()
    }

    /// Moments of the distribution.
    pub fn observables(&self) -> Observables {
        let mean = self.mean();
        let m2: f64 = self.p.iter().enumerate().map(|(n, &x)| (n * n) as f64 * x).sum();
        let q_ratio = if mean == 0.0 { 0.0 } else { (m2 - mean * mean) / mean };
        Observables { mean_density: mean * self.geometry.lambda() as f64 / self.geometry.sites() as f64, q_ratio }
    }

    /// Total variation distance `1/2 sum |p_n - q_n|`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        self.check_same_geometry(other)?;
        Ok(0.5 * self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Overlap measure `D = 1 - 1/2 sum |p_n - q_n|`, 1 for identical
    /// distributions and 0 for disjoint supports.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(1.0 - self.total_variation(other)?)
    }

    fn check_same_geometry(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch {
                l_a: self.geometry.sites(),
                lambda_a: self.geometry.lambda(),
                l_b: other.geometry.sites(),
                lambda_b: other.geometry.lambda(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn geom(l: usize, lambda: usize) -> RodGeometry {
        RodGeometry::new(l, lambda).unwrap()
    }

    #[test]
    fn point_mass_observables() {
        let g = geom(10, 1);
        let p = NumberDistribution::point_mass(g, 0).unwrap();
        let obs = p.observables();
        assert_eq!(obs.mean_density, 0.0);
        assert_eq!(obs.q_ratio, 0.0);
        // nonzero point mass still has zero variance
        let p3 = NumberDistribution::point_mass(g, 3).unwrap();
        assert_abs_diff_eq!(p3.observables().q_ratio, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p3.observables().mean_density, 0.3, max_relative = 1e-14);
    }

    #[test]
    fn truncated_poisson_q_near_one() {
        // mean 2 on a lattice with n_max = 30 so the truncation is negligible
        let g = geom(62, 1);
        let mean = 2.0_f64;
        let mut p: Vec<f64> = (0..=g.max_rods())
            .map(|n| {
                let ln = -mean + n as f64 * mean.ln()
                    - (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
                ln.exp()
            })
            .collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let d = NumberDistribution::new(g, p).unwrap();
        assert_abs_diff_eq!(d.observables().q_ratio, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn overlap_examples() {
        let g = geom(4, 1);
        let a = NumberDistribution::new(g, vec![0.5, 0.5, 0.0]).unwrap();
        let b = NumberDistribution::new(g, vec![0.25, 0.5, 0.25]).unwrap();
        assert_abs_diff_eq!(a.overlap(&b).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(a.overlap(&a).unwrap(), 1.0, epsilon = 1e-15);
        let c = NumberDistribution::new(g, vec![0.0, 0.0, 1.0]).unwrap();
        let d = NumberDistribution::new(g, vec![1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(c.overlap(&d).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn geometry_mismatch_rejected() {
        let a = NumberDistribution::point_mass(geom(4, 1), 0).unwrap();
        let b = NumberDistribution::point_mass(geom(6, 1), 0).unwrap();
        assert!(a.overlap(&b).is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(NumberDistribution::new(geom(4, 1), vec![0.5, 0.4, 0.0]).is_err());
        assert!(NumberDistribution::new(geom(4, 1), vec![1.5, -0.5, 0.0]).is_err());
    }
}
