//! Explicit enumeration of the blockade-constrained configuration space and
//! its single-flip adjacency graph.
//!
//! States are cyclic bitstrings (bit `j` set means a rod anchored at site
//! `j`), grouped into columns by rod count and linked when they differ by
//! exactly one flip. The enumerated graph cross-validates the closed-form
//! counting statistics and provides the basis for the exact quantum dynamics.

use std::collections::HashMap;
use std::io::Write;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorics;
use crate::error::{Error, Result};
use crate::geometry::RodGeometry;

/// Default guard on the total number of enumerated states.
pub const DEFAULT_STATE_CAP: u128 = 5_000_000;

/// One classical arrangement of hard rods as a fixed-width cyclic bitstring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Configuration {
    bits: u64,
    geometry: RodGeometry,
}

impl Configuration {
    /// Validates the blockade condition: no two set bits at cyclic distance
    /// `<= lambda`.
    pub fn new(bits: u64, geometry: RodGeometry) -> Result<Self> {
        let l = geometry.sites();
        if l > 64 {
            return Err(Error::Invalid(format!("bitstring configurations support L <= 64, got {l}")));
        }
        if bits >> l != 0 && l < 64 {
            return Err(Error::Invalid("bits set beyond lattice width".into()));
        }
        for j in 0..l {
            if bits >> j & 1 == 1 && bits & neighbor_mask(&geometry, j) & !(1 << j) != 0 {
                return Err(Error::Invalid(format!(
                    "blockade violated near site {j} in {bits:#b}"
                )));
            }
        }
        Ok(Self { bits, geometry })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn geometry(&self) -> &RodGeometry {
        &self.geometry
    }

    pub fn rod_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Anchor sites of the rods, ascending.
    pub fn anchors(&self) -> Vec<usize> {
        (0..self.geometry.sites()).filter(|&j| self.bits >> j & 1 == 1).collect()
    }
}

/// Sites blocked by an anchor at `j`, including `j` itself.
fn neighbor_mask(geom: &RodGeometry, j: usize) -> u64 {
    let l = geom.sites();
    let mut mask = 0u64;
    for d in 0..=geom.lambda() {
        mask |= 1 << ((j + d) % l);
        mask |= 1 << ((j + l - d) % l);
    }
    mask
}

/// Mean loop / reflection / transmission counts measured on the graph for one
/// column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalColumnStats {
    pub n: usize,
    pub mean_loop: f64,
    pub mean_refl: f64,
    pub mean_trans: f64,
}

/// The same statistics as exact rationals (loop, refl, trans).
pub type ExactColumnStats = (BigRational, BigRational, BigRational);

/// Enumerated basis states grouped into columns, with single-flip adjacency.
#[derive(Debug, Clone)]
pub struct ConfigurationNetwork {
    geometry: RodGeometry,
    /// All states, ascending numeric bitstring value.
    states: Vec<u64>,
    /// Rod count of each state.
    column_of: Vec<u32>,
    /// State ids per column, ascending.
    columns: Vec<Vec<u32>>,
    /// Neighbor ids per state, ascending; every edge appears in both lists.
    adjacency: Vec<Vec<u32>>,
    index: HashMap<u64, u32>,
    blocked: Vec<u64>,
}

impl ConfigurationNetwork {
    pub fn geometry(&self) -> &RodGeometry {
        &self.geometry
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn state_bits(&self, id: usize) -> u64 {
        self.states[id]
    }

    pub fn configuration(&self, id: usize) -> Configuration {
        Configuration { bits: self.states[id], geometry: self.geometry }
    }

    pub fn column_of(&self, id: usize) -> usize {
        self.column_of[id] as usize
    }

    pub fn column(&self, n: usize) -> &[u32] {
        &self.columns[n]
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn neighbors(&self, id: usize) -> &[u32] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adjacency[id].len()
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.index.get(&bits).map(|&i| i as usize)
    }

    fn column_sizes_big(geom: &RodGeometry) -> Result<Vec<BigUint>> {
        (0..=geom.max_rods())
            .map(|n| Ok(combinatorics::nu(geom, n)?.exact().cloned().expect("L <= 64")))
            .collect()
    }

    /// Number of neighbors of state `id` in column `n`.
    fn degree_into(&self, id: u32, n: usize) -> usize {
        self.adjacency[id as usize]
            .iter()
            .filter(|&&k| self.column_of[k as usize] as usize == n)
            .count()
    }

    /// Mean node degree and pair-averaged two-flip path counts in column `n`,
    /// by explicit path counting on the graph.
    pub fn empirical_stats(&self, n: usize) -> Result<EmpiricalColumnStats> {
        let (lp, rf, tr) = self.exact_stats(n)?;
        Ok(EmpiricalColumnStats {
            n,
            mean_loop: rational_to_f64(&lp),
            mean_refl: rational_to_f64(&rf),
            mean_trans: rational_to_f64(&tr),
        })
    }

    /// Exact rational version of [`empirical_stats`](Self::empirical_stats).
    pub fn exact_stats(&self, n: usize) -> Result<ExactColumnStats> {
        self.geometry.check_column(n)?;
        let nu_n = BigUint::from(self.columns[n].len());
        let big = |x: u128| BigRational::from_integer(BigUint::from(x).into());

        // loop transitions from a node = its degree
        let total_degree: u128 = self.columns[n].iter().map(|&s| self.degree(s as usize) as u128).sum();
        let mean_loop = big(total_degree) / BigRational::from_integer(nu_n.clone().into());

        // reflections: 2-paths between ordered distinct pairs within column n,
        // midpoints in columns n -+ 1
        let mut refl_paths: u128 = 0;
        if n >= 1 {
            for &k in &self.columns[n - 1] {
                let u = self.degree_into(k, n) as u128;
                refl_paths += u * (u.saturating_sub(1));
            }
        }
        if n + 1 < self.columns.len() {
            for &k in &self.columns[n + 1] {
                let d = self.degree_into(k, n) as u128;
                refl_paths += d * (d.saturating_sub(1));
            }
        }
        let mean_refl = if nu_n < BigUint::from(2u32) {
            BigRational::zero()
        } else {
            let pairs = &nu_n * (&nu_n - 1u32);
            big(refl_paths) / BigRational::from_integer(pairs.into())
        };

        // transmissions: 2-paths between ordered pairs (column n, column n +- 2)
        let mut mean_trans = BigRational::zero();
        if n + 2 < self.columns.len() && !self.columns[n + 2].is_empty() {
            let total: u128 = self.columns[n + 1]
                .iter()
                .map(|&k| self.degree_into(k, n) as u128 * self.degree_into(k, n + 2) as u128)
                .sum();
            let denom = &nu_n * BigUint::from(self.columns[n + 2].len());
            mean_trans += big(total) / BigRational::from_integer(denom.into());
        }
        if n >= 2 && !self.columns[n - 2].is_empty() {
            let total: u128 = self.columns[n - 1]
                .iter()
                .map(|&k| self.degree_into(k, n) as u128 * self.degree_into(k, n - 2) as u128)
                .sum();
            let denom = &nu_n * BigUint::from(self.columns[n - 2].len());
            mean_trans += big(total) / BigRational::from_integer(denom.into());
        }
        Ok((mean_loop, mean_refl, mean_trans))
    }

    /// Diagnostic for the diagonal dominance of the squared coupling matrix:
    /// sum of off-diagonal two-path multiplicities over the sum of diagonal
    /// ones (node degrees).
    pub fn h2_offdiag_ratio(&self) -> f64 {
        let mut diag: u128 = 0;
        let mut offdiag: u128 = 0;
        for id in 0..self.num_states() {
            let d = self.degree(id) as u128;
            diag += d;
            offdiag += d * (d - 1);
        }
        offdiag as f64 / diag as f64
    }

    /// Uniformly random state id from column `n`; deterministic per
    /// `(self, n, seed)` via a counter-based seeded generator.
    pub fn sample_microstate(&self, n: usize, seed: u64) -> Result<Configuration> {
        self.geometry.check_column(n)?;
        let column = &self.columns[n];
        if column.is_empty() {
            return Err(Error::EmptyColumn { n });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = Uniform::from(0..column.len()).sample(&mut rng);
        Ok(self.configuration(column[idx] as usize))
    }

    /// Uniformly random state id over the whole network (column weighted by
    /// its size), as used for unconstrained initial states.
    pub fn sample_any_microstate(&self, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let idx = Uniform::from(0..self.states.len()).sample(&mut rng);
        self.configuration(idx)
    }

    /// One edge per line as two state ids, smaller id first.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, neigh) in self.adjacency.iter().enumerate() {
            for &k in neigh {
                if (id as u32) < k {
                    writeln!(w, "{id} {k}")?;
                }
            }
        }
        Ok(())
    }

    /// One state per line: id, rod count, bitstring value.
    pub fn write_columns<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for id in 0..self.num_states() {
            writeln!(w, "{id} {} {}", self.column_of[id], self.states[id])?;
        }
        Ok(())
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Enumerate the full configuration network with the default state cap.
pub fn enumerate(geom: &RodGeometry) -> Result<ConfigurationNetwork> {
    enumerate_with_cap(geom, DEFAULT_STATE_CAP)
}

/// Enumerate with an explicit guard on the total state count.
pub fn enumerate_with_cap(geom: &RodGeometry, cap: u128) -> Result<ConfigurationNetwork> {
    let l = geom.sites();
    if l > 64 {
        return Err(Error::Invalid(format!("enumeration supports L <= 64, got {l}")));
    }
    let total: BigUint = ConfigurationNetwork::column_sizes_big(geom)?.iter().sum();
    let required = total.to_u128().unwrap_or(u128::MAX);
    if required > cap {
        return Err(Error::StateCapExceeded { required, cap });
    }

    let blocked: Vec<u64> = (0..l).map(|j| neighbor_mask(geom, j)).collect();

    // depth-first placement over sites, each valid bitstring generated once
    let mut states = Vec::with_capacity(required as usize);
    let mut stack: Vec<(usize, u64)> = vec![(0, 0)];
    while let Some((site, bits)) = stack.pop() {
        if site == l {
            states.push(bits);
            continue;
        }
        // place last so lower bitstring values are emitted deeper in the
        // stack; final order comes from sorting below
        if bits & blocked[site] == 0 {
            stack.push((site + 1, bits | 1 << site));
        }
        stack.push((site + 1, bits));
    }
    states.sort_unstable();

    let index: HashMap<u64, u32> =
        states.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
    let column_of: Vec<u32> = states.iter().map(|s| s.count_ones()).collect();
    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); geom.max_rods() + 1];
    for (id, &n) in column_of.iter().enumerate() {
        columns[n as usize].push(id as u32);
    }

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); states.len()];
    for (id, &bits) in states.iter().enumerate() {
        for (j, mask) in blocked.iter().enumerate() {
            if bits >> j & 1 == 0 && bits & mask == 0 {
                let up = index[&(bits | 1 << j)];
                adjacency[id].push(up);
                adjacency[up as usize].push(id as u32);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    Ok(ConfigurationNetwork { geometry: *geom, states, column_of, columns, adjacency, index, blocked })
}

impl ConfigurationNetwork {
    /// Sites where a rod can be added to `bits` without violating the
    /// blockade.
    pub fn free_sites(&self, bits: u64) -> Vec<usize> {
        self.blocked
            .iter()
            .enumerate()
            .filter(|&(j, mask)| bits >> j & 1 == 0 && bits & mask == 0)
            .map(|(j, _)| j)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(l: usize, lambda: usize) -> RodGeometry {
        RodGeometry::new(l, lambda).unwrap()
    }

    fn net(l: usize, lambda: usize) -> ConfigurationNetwork {
        enumerate(&geom(l, lambda)).unwrap()
    }

    #[test]
    fn tiny_ring() {
        let net = net(2, 1);
        assert_eq!(net.num_states(), 3);
        assert_eq!(net.column(0).len(), 1);
        assert_eq!(net.column(1).len(), 2);
        let bits: Vec<u64> = (0..3).map(|i| net.state_bits(i)).collect();
        assert_eq!(bits, vec![0b00, 0b01, 0b10]);
    }

    #[test]
    fn column_sizes_match_counting() {
        let small = net(10, 1);
        let sizes: Vec<usize> =
            (0..small.num_columns()).map(|n| small.column(n).len()).collect();
        assert_eq!(sizes, vec![1, 10, 35, 50, 25, 2]);
        assert_eq!(small.num_states(), 123);

        let net = net(30, 3);
        assert_eq!(net.num_states(), 15_812);
        for n in 0..net.num_columns() {
            let exact = combinatorics::nu(net.geometry(), n).unwrap();
            assert_eq!(
                BigUint::from(net.column(n).len()),
                *exact.exact().unwrap(),
                "column {n}"
            );
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_bipartite() {
        let net = net(12, 2);
        for id in 0..net.num_states() {
            for &k in net.neighbors(id) {
                let dn = net.column_of(id) as isize - net.column_of(k as usize) as isize;
                assert_eq!(dn.abs(), 1);
                assert!(net.neighbors(k as usize).contains(&(id as u32)));
            }
        }
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let err = enumerate_with_cap(&geom(30, 3), 1000).unwrap_err();
        match err {
            Error::StateCapExceeded { required, cap } => {
                assert_eq!(required, 15_812);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn blockade_validation() {
        let g = geom(8, 1);
        assert!(Configuration::new(0b0000_0101, g).is_ok());
        assert!(Configuration::new(0b0000_0011, g).is_err());
        // wrap-around pair
        assert!(Configuration::new(0b1000_0001, g).is_err());
    }

    #[test]
    fn empirical_matches_table1() {
        let net = net(12, 1);
        let s2 = net.empirical_stats(2).unwrap();
        assert!((s2.mean_loop - 8.22).abs() < 0.005);
        assert!((s2.mean_refl - 0.54).abs() < 0.005);
        assert!((s2.mean_trans - 2.22).abs() < 0.005);
        let s4 = net.empirical_stats(4).unwrap();
        assert!((s4.mean_loop - 5.71).abs() < 0.005);
    }

    #[test]
    fn single_rod_on_two_sites_links_only_to_empty() {
        let net = net(2, 1);
        let s = net.empirical_stats(1).unwrap();
        assert_eq!(s.mean_loop, 1.0);
    }

    #[test]
    fn mean_degree_equals_rate_sum_exactly() {
        // Eq. 4 is a counting identity: compare as exact rationals
        for (l, lambda) in [(10, 1), (12, 2), (16, 3)] {
            let g = geom(l, lambda);
            let net = enumerate(&g).unwrap();
            for n in 0..=g.max_rods() {
                let (mean_loop, _, _) = net.exact_stats(n).unwrap();
                // T_{n->n+1} + T_{n->n-1} = (n+1) nu_{n+1}/nu_n + n, exactly
                let nu_n = combinatorics::nu(&g, n).unwrap().exact().unwrap().clone();
                let mut expected = BigRational::from_integer(BigUint::from(n).into());
                if n < g.max_rods() {
                    let nu_up = combinatorics::nu(&g, n + 1).unwrap().exact().unwrap().clone();
                    expected += BigRational::new(
                        (nu_up * BigUint::from(n + 1)).into(),
                        nu_n.into(),
                    );
                }
                assert_eq!(mean_loop, expected, "L={l} lambda={lambda} n={n}");
            }
        }
    }

    #[test]
    fn at_most_two_reflection_paths_between_pairs() {
        let net = net(12, 1);
        for n in 0..net.num_columns() {
            let col = net.column(n);
            for &a in col {
                let mut paths: HashMap<u32, u32> = HashMap::new();
                for &mid in net.neighbors(a as usize) {
                    for &b in net.neighbors(mid as usize) {
                        if b != a && net.column_of(b as usize) == n {
                            *paths.entry(b).or_insert(0) += 1;
                        }
                    }
                }
                assert!(paths.values().all(|&c| c <= 2), "column {n}");
            }
        }
    }

    #[test]
    fn h2_ratio_tiny_ring_by_hand() {
        // diagonal of the squared 3x3 adjacency is (2, 1, 1); the two
        // single-rod states are linked through the empty state, giving
        // off-diagonal weight 2
        let net = net(2, 1);
        assert_eq!(net.h2_offdiag_ratio(), 0.5);
    }

    #[test]
    fn h2_ratio_matches_dense_matrix_square() {
        let net = net(8, 1);
        let dim = net.num_states();
        let mut a = vec![vec![0u32; dim]; dim];
        for i in 0..dim {
            for &j in net.neighbors(i) {
                a[i][j as usize] = 1;
            }
        }
        let mut diag = 0u64;
        let mut offdiag = 0u64;
        for i in 0..dim {
            for j in 0..dim {
                let entry: u64 = (0..dim).map(|k| (a[i][k] * a[k][j]) as u64).sum();
                if i == j {
                    diag += entry;
                } else {
                    offdiag += entry;
                }
            }
        }
        assert_eq!(net.h2_offdiag_ratio(), offdiag as f64 / diag as f64);
    }

    #[test]
    fn sampling_is_deterministic_and_in_column() {
        let net = net(10, 1);
        let a = net.sample_microstate(3, 42).unwrap();
        let b = net.sample_microstate(3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rod_count(), 3);
        assert_eq!(net.sample_microstate(0, 7).unwrap().bits(), 0);
        let c = net.sample_microstate(5, 9).unwrap();
        assert_eq!(c.rod_count(), 5);
    }

    #[test]
    fn sampling_is_uniform() {
        // chi-square over the 54 states of column 2, L=12
        let net = net(12, 1);
        let m = net.column(2).len();
        let trials = 10_000usize;
        let mut counts = vec![0usize; net.num_states()];
        for seed in 0..trials as u64 {
            let cfg = net.sample_microstate(2, seed).unwrap();
            counts[net.index_of(cfg.bits()).unwrap()] += 1;
        }
        let expected = trials as f64 / m as f64;
        let chi2: f64 = net
            .column(2)
            .iter()
            .map(|&id| {
                let d = counts[id as usize] as f64 - expected;
                d * d / expected
            })
            .sum();
        // 53 dof: mean 53, sigma sqrt(106) ~ 10.3; 3 sigma ~ 84
        assert!(chi2 < 53.0 + 3.0 * 106.0f64.sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn edge_count_matches_link_formula() {
        // edges = sum_n c_{n,n-1} = sum_n n nu_n
        let net = net(10, 1);
        let mut expected = BigUint::zero();
        for n in 1..=net.geometry().max_rods() {
            expected += combinatorics::nu(net.geometry(), n).unwrap().exact().unwrap()
                * BigUint::from(n);
        }
        assert_eq!(BigUint::from(net.num_edges()), expected);
    }
}
