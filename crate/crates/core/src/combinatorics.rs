//! Closed-form configuration-network statistics.
//!
//! Column sizes, inter-column transition rates, and the loop / reflection /
//! transmission averages of the two-flip processes, all evaluated from the
//! analytic counting formulas. Everything is formed in log space so that
//! geometries with astronomically many configurations (L in the thousands)
//! stay finite; the transition rates themselves are only O(L).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::dist::NumberDistribution;
use crate::error::Result;
use crate::geometry::RodGeometry;

/// Largest L for which the exact big-integer path is kept alongside the log
/// value. Beyond this the counts are astronomical and only the log is stored.
pub const EXACT_COUNT_MAX_L: usize = 64;

/// A nonnegative count stored as its natural log, with an exact
/// arbitrary-precision value retained for small lattices.
#[derive(Debug, Clone, PartialEq)]
pub struct LogCount {
    log_value: f64,
    exact_value: Option<BigUint>,
}

impl LogCount {
    /// Natural log of the count; `-inf` encodes a count of zero.
    pub fn ln(&self) -> f64 {
        self.log_value
    }

    /// The count as an `f64`; may overflow to `inf` for huge counts.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// Exact integer value, present when `L <= EXACT_COUNT_MAX_L`.
    pub fn exact(&self) -> Option<&BigUint> {
        self.exact_value.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }
}

/// Cached table of ln(k!) for k = 0..=max.
struct LnFactorials(Vec<f64>);

impl LnFactorials {
    fn up_to(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        let mut acc = 0.0_f64;
        table.push(0.0);
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self(table)
    }

    fn get(&self, k: usize) -> f64 {
        self.0[k]
    }
}

fn big_factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// ln nu_n for all columns 0..=n_max.
fn ln_nu_all(geom: &RodGeometry) -> Vec<f64> {
    let l = geom.sites();
    let lambda = geom.lambda();
    let table = LnFactorials::up_to(l);
    (0..=geom.max_rods())
        .map(|n| {
            if n == 0 {
                0.0
            } else {
                (l as f64).ln() + table.get(l - 1 - lambda * n) - table.get(n)
                    - table.get(l - (lambda + 1) * n)
            }
        })
        .collect()
}

/// Maximum number of rods that fit on the ring: `floor(L / (lambda + 1))`.
pub fn max_rods(geom: &RodGeometry) -> usize {
    geom.max_rods()
}

/// Number of distinct arrangements of `n` hard rods on the ring:
/// `nu_n = L (L - 1 - lambda n)! / (n! (L - (lambda+1) n)!)`, with `nu_0 = 1`.
pub fn nu(geom: &RodGeometry, n: usize) -> Result<LogCount> {
    geom.check_column(n)?;
    if n == 0 {
        return Ok(LogCount { log_value: 0.0, exact_value: Some(BigUint::one()) });
    }
    let l = geom.sites();
    let lambda = geom.lambda();
    let log_value = ln_nu_all(geom)[n];
    let exact_value = (l <= EXACT_COUNT_MAX_L).then(|| {
        l * big_factorial(l - 1 - lambda * n)
            / (big_factorial(n) * big_factorial(l - (lambda + 1) * n))
    });
    Ok(LogCount { log_value, exact_value })
}

/// Mean single-flip transition rates between adjacent columns.
///
/// `t_down[n] = T_{n -> n-1} = n` exactly (any of the `n` rods can be
/// removed); `t_up[n] = T_{n -> n+1} = c_{n+1,n} / nu_n` from the link-count
/// formula. Boundary entries `t_up[n_max]` and `t_down[0]` are zero.
#[derive(Debug, Clone)]
pub struct RateTable {
    geometry: RodGeometry,
    t_up: Vec<f64>,
    t_down: Vec<f64>,
}

impl RateTable {
    pub fn geometry(&self) -> &RodGeometry {
        &self.geometry
    }

    pub fn t_up(&self) -> &[f64] {
        &self.t_up
    }

    pub fn t_down(&self) -> &[f64] {
        &self.t_down
    }
}

/// Build the full rate table for a geometry.
pub fn rate_table(geom: &RodGeometry) -> RateTable {
    let n_max = geom.max_rods();
    let t_down: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    // T_{n -> n+1} = (n+1) nu_{n+1} / nu_n; exact integer ratio where
    // available, log space otherwise
    let t_up: Vec<f64> = if geom.sites() <= EXACT_COUNT_MAX_L {
        let counts: Vec<BigUint> =
            (0..=n_max).map(|n| nu(geom, n).unwrap().exact().cloned().unwrap()).collect();
        (0..=n_max)
            .map(|n| {
                if n == n_max {
                    0.0
                } else {
                    let ratio = num_rational::BigRational::new(
                        (counts[n + 1].clone() * BigUint::from(n + 1)).into(),
                        counts[n].clone().into(),
                    );
                    ratio.to_f64().expect("moderate rate value")
                }
            })
            .collect()
    } else {
        let ln_nu = ln_nu_all(geom);
        (0..=n_max)
            .map(|n| {
                if n == n_max {
                    0.0
                } else {
                    (ln_nu[n + 1] + ((n + 1) as f64).ln() - ln_nu[n]).exp()
                }
            })
            .collect()
    };
    RateTable { geometry: *geom, t_up, t_down }
}

/// Mean number of loop (two-flip return) transitions from a column-`n` state:
/// `T_{n -> n+1} + T_{n -> n-1}`, which equals the column-averaged node degree.
pub fn loop_avg(geom: &RodGeometry, n: usize) -> Result<f64> {
    geom.check_column(n)?;
    let rates = rate_table(geom);
    Ok(rates.t_up[n] + rates.t_down[n])
}

/// ln(x - 1) given ln(x), stable for huge x.
fn ln_minus_one(ln_x: f64) -> f64 {
    if ln_x < 40.0 {
        (ln_x.exp() - 1.0).ln()
    } else {
        ln_x + (-(-ln_x).exp()).ln_1p()
    }
}

/// Mean number of two-flip reflection paths between two randomly selected
/// distinct states of column `n`, averaged over ordered pairs:
///
/// `[T_{n+1->n}(T_{n+1->n} - 1) nu_{n+1} + T_{n-1->n}(T_{n-1->n} - 1) nu_{n-1}]
///  / (nu_n (nu_n - 1))`
///
/// Terms referencing columns outside `0..=n_max` contribute zero, and the
/// result is defined as 0 when the column holds fewer than two states.
pub fn refl_avg(geom: &RodGeometry, n: usize) -> Result<f64> {
    geom.check_column(n)?;
    let n_max = geom.max_rods();
    let ln_nu = ln_nu_all(geom);
    if ln_nu[n] < std::f64::consts::LN_2 {
        return Ok(0.0);
    }
    let ln_pairs = ln_nu[n] + ln_minus_one(ln_nu[n]);
    let mut total = 0.0;
    if n + 1 <= n_max {
        // T_{n+1 -> n} = n + 1 exactly
        let t = (n + 1) as f64;
        total += t * (t - 1.0) * (ln_nu[n + 1] - ln_pairs).exp();
    }
    if n >= 1 {
        // T_{n-1 -> n} = n nu_n / nu_{n-1}
        let t = (ln_nu[n] + (n as f64).ln() - ln_nu[n - 1]).exp();
        total += t * (t - 1.0) * (ln_nu[n - 1] - ln_pairs).exp();
    }
    Ok(total)
}

/// Mean number of two-flip transmission paths between a column-`n` state and
/// the columns `n +- 2`:
///
/// `[T_{n+2->n+1} T_{n+1->n} + T_{n-2->n-1} T_{n-1->n}] / nu_n`
///
/// with the same out-of-range-column zero convention as `refl_avg`.
pub fn trans_avg(geom: &RodGeometry, n: usize) -> Result<f64> {
    geom.check_column(n)?;
    let n_max = geom.max_rods();
    let ln_nu = ln_nu_all(geom);
    let mut total = 0.0;
    if n + 2 <= n_max {
        total += ((n + 2) * (n + 1)) as f64 * (-ln_nu[n]).exp();
    }
    if n >= 2 {
        // T_{n-2 -> n-1} T_{n-1 -> n} / nu_n = n (n-1) / nu_{n-2}
        total += (n * (n - 1)) as f64 * (-ln_nu[n - 2]).exp();
    }
    Ok(total)
}

/// Microcanonical steady state `p_n ~ nu_n`, normalized by log-sum-exp.
pub fn equilibrium_distribution(geom: &RodGeometry) -> NumberDistribution {
    let ln_nu = ln_nu_all(geom);
    let max = ln_nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = ln_nu.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = weights.iter().sum();
    NumberDistribution::new_unchecked(*geom, weights.into_iter().map(|w| w / sum).collect())
}
