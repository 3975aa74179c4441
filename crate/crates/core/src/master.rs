//! Master equation for the rod-number distribution.
//!
//! The rate equation carries an explicit factor `2 Omega^2 t` on the right
//! hand side; substituting `tau = Omega t^2` renders it time-homogeneous,
//! `d p / d tau = Omega (gain - loss)`. Both parameterizations are
//! implemented and must agree; the steady state is the microcanonical
//! distribution `p_n ~ nu_n`.

use crate::combinatorics::{self, RateTable};
use crate::dist::NumberDistribution;
use crate::error::{Error, Result};
use crate::geometry::RodGeometry;

const NORM_TOL: f64 = 1e-9;
const POSITIVITY_TOL: f64 = -1e-12;

/// Tridiagonal birth-death generator with the time-independent rates
/// `up[n] = T_{n -> n+1}` and `down[n] = T_{n -> n-1}`; the scalar time
/// prefactor is applied at integration time.
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    geometry: RodGeometry,
    up: Vec<f64>,
    down: Vec<f64>,
}

/// Populate the generator from the analytic rate table.
pub fn build_generator(geom: &RodGeometry) -> MasterGenerator {
    let rates: RateTable = combinatorics::rate_table(geom);
    MasterGenerator {
        geometry: *geom,
        up: rates.t_up().to_vec(),
        down: rates.t_down().to_vec(),
    }
}

impl MasterGenerator {
    pub fn geometry(&self) -> &RodGeometry {
        &self.geometry
    }

    pub fn up_rates(&self) -> &[f64] {
        &self.up
    }

    pub fn down_rates(&self) -> &[f64] {
        &self.down
    }

    /// Gain minus loss, the tau-parameterization right hand side without the
    /// `Omega` prefactor. Columns sum to zero: probability is conserved.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        let n_max = self.geometry.max_rods();
        for n in 0..=n_max {
            let mut acc = -(self.up[n] + self.down[n]) * p[n];
            if n > 0 {
                acc += self.up[n - 1] * p[n - 1];
            }
            if n < n_max {
                acc += self.down[n + 1] * p[n + 1];
            }
            out[n] = acc;
        }
    }

    /// Max-norm of the generator applied to a distribution; zero (to
    /// rounding) at the steady state.
    pub fn stationarity_residual(&self, p: &NumberDistribution) -> f64 {
        let mut out = vec![0.0; p.probabilities().len()];
        self.apply(p.probabilities(), &mut out);
        out.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Drift and diffusion coefficients of the number-space Fokker-Planck
    /// reading, up to an overall constant:
    /// `(T_{n->n-1} - T_{n->n+1}, T_{n->n-1} + T_{n->n+1})`.
    pub fn drift_diffusion(&self, n: usize) -> Result<(f64, f64)> {
        self.geometry.check_column(n)?;
        Ok((self.down[n] - self.up[n], self.down[n] + self.up[n]))
    }

    /// The microcanonical steady state, verified as a null vector of the
    /// generator.
    pub fn steady_state(&self) -> NumberDistribution {
        let p = combinatorics::equilibrium_distribution(&self.geometry);
        debug_assert!(self.stationarity_residual(&p) < 1e-10);
        p
    }

    /// Integrate in `tau = Omega t^2`, sampling at the requested physical
    /// times.
    pub fn evolve(
        &self,
        p0: &NumberDistribution,
        t_grid: &[f64],
        omega: f64,
    ) -> Result<Vec<NumberDistribution>> {
        self.check_inputs(p0, t_grid, omega)?;
        let tau_grid: Vec<f64> = t_grid.iter().map(|&t| omega * t * t).collect();
        let rhs = |_tau: f64, p: &[f64], out: &mut [f64]| {
            self.apply(p, out);
            out.iter_mut().for_each(|x| *x *= omega);
        };
        let samples = dopri5(rhs, p0.probabilities(), &tau_grid, 1e-10)?;
        self.wrap_samples(samples)
    }

    /// Integrate the explicit-time form with the `2 Omega^2 t` prefactor
    /// directly in `t`. Must agree with [`evolve`](Self::evolve).
    pub fn evolve_in_t(
        &self,
        p0: &NumberDistribution,
        t_grid: &[f64],
        omega: f64,
    ) -> Result<Vec<NumberDistribution>> {
        self.check_inputs(p0, t_grid, omega)?;
        let rhs = |t: f64, p: &[f64], out: &mut [f64]| {
            self.apply(p, out);
            let factor = 2.0 * omega * omega * t;
            out.iter_mut().for_each(|x| *x *= factor);
        };
        let samples = dopri5(rhs, p0.probabilities(), t_grid, 1e-10)?;
        self.wrap_samples(samples)
    }

    fn check_inputs(&self, p0: &NumberDistribution, t_grid: &[f64], omega: f64) -> Result<()> {
        if p0.geometry() != &self.geometry {
            return Err(Error::GeometryMismatch {
                l_a: self.geometry.sites(),
                lambda_a: self.geometry.lambda(),
                l_b: p0.geometry().sites(),
                lambda_b: p0.geometry().lambda(),
            });
        }
        let sum: f64 = p0.probabilities().iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        if omega <= 0.0 || !omega.is_finite() {
            return Err(Error::Invalid(format!("omega must be positive, got {omega}")));
        }
        if t_grid.is_empty()
            || t_grid[0] < 0.0
            || t_grid.windows(2).any(|w| w[1] < w[0])
            || t_grid.iter().any(|t| !t.is_finite())
        {
            return Err(Error::BadTimeGrid);
        }
        Ok(())
    }

    fn wrap_samples(&self, samples: Vec<Vec<f64>>) -> Result<Vec<NumberDistribution>> {
        samples
            .into_iter()
            .map(|p| {
                if let Some(&bad) = p.iter().find(|&&x| x < POSITIVITY_TOL) {
                    return Err(Error::Invalid(format!(
                        "integration produced negative probability {bad:e}"
                    )));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(Error::NotNormalized { sum });
                }
                Ok(NumberDistribution::new_unchecked(self.geometry, p))
            })
            .collect()
    }
}

/// Dormand-Prince 5(4) with step-size control, sampling the solution exactly
/// at the (ascending) grid points.
fn dopri5<F>(rhs: F, y0: &[f64], grid: &[f64], tol: f64) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    // difference between 5th and embedded 4th order weights
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    let dim = y0.len();
    let mut t = 0.0f64;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    rhs(t, &y, &mut k[0]);
    let mut h = 1e-6f64;
    let mut out = Vec::with_capacity(grid.len());
    let mut scratch = vec![0.0; dim];

    for &t_target in grid {
        if t_target <= t {
            out.push(y.clone());
            continue;
        }
        while t < t_target {
            let mut step = h.min(t_target - t);
            loop {
                // stages
                for s in 0..6 {
                    for i in 0..dim {
                        let mut acc = 0.0;
                        for (j, kj) in k.iter().enumerate().take(s + 1) {
                            acc += A[s][j] * kj[i];
                        }
                        scratch[i] = y[i] + step * acc;
                    }
                    rhs(t + C[s] * step, &scratch, &mut k[s + 1]);
                }
                // error estimate (FSAL: k[6] is rhs at the 5th-order result)
                let mut err: f64 = 0.0;
                let mut y_new = vec![0.0; dim];
                for i in 0..dim {
                    y_new[i] = y[i]
                        + step
                            * (35.0 / 384.0 * k[0][i]
                                + 500.0 / 1113.0 * k[2][i]
                                + 125.0 / 192.0 * k[3][i]
                                - 2187.0 / 6784.0 * k[4][i]
                                + 11.0 / 84.0 * k[5][i]);
                }
                rhs(t + step, &y_new, &mut scratch);
                k[6].copy_from_slice(&scratch);
                for i in 0..dim {
                    let mut e = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        e += E[j] * kj[i];
                    }
                    let sc = tol + tol * y[i].abs().max(y_new[i].abs());
                    let r = step * e / sc;
                    err += r * r;
                }
                err = (err / dim as f64).sqrt();

                if err <= 1.0 {
                    t += step;
                    y = y_new;
                    k.swap(0, 6); // FSAL
                    let grow = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                    h = (step * grow).max(1e-12);
                    break;
                }
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                step *= shrink;
                if step < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::Invalid("step size underflow in dopri5".into()));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
