//! Metropolis and exact samplers of endpoint configurations, and empirical
//! endpoint densities.
//!
//! The chain moves one free endpoint to the neighbouring allowed site (in the
//! order of allowed, non-packed sites). Packed sites hold pinned endpoints
//! that never move. Weight ratios come from the product formula, so a move
//! costs O(k).

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::enumeration::{exact_distribution, EndpointConfig, ExactDistribution, RegionKind, RegionSpec};
use crate::exact::to_f64;
use crate::{Error, Result};

/// Steps between full recomputations of the log weight.
pub const DRIFT_CHECK_INTERVAL: u64 = 100_000;
/// Relative tolerance for the incremental log weight.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

fn ln_factorial_table(top: usize) -> Vec<f64> {
    let mut t = vec![0.0; top + 1];
    for a in 1..=top {
        t[a] = t[a - 1] + (a as f64).ln();
    }
    t
}

/// ln|1 - q^d| without overflow for large d.
fn ln_abs_one_minus_qpow(d: i64, lnq: f64) -> f64 {
    let x = d as f64 * lnq;
    if x > 0.0 {
        x + (-(-x).exp_m1()).ln()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// Log of the product-formula weight, split into one-body and two-body terms
/// and tabulated over the site range. Constants independent of m are dropped.
#[derive(Debug, Clone)]
pub struct LogWeight {
    kind: RegionKind,
    lnq: f64,
    lo: i64,
    single: Vec<f64>,
    diff: Vec<f64>,
    sum: Vec<f64>,
}

impl LogWeight {
    pub fn new(region: &RegionSpec) -> Self {
        let (lo, hi) = region.site_range();
        let (n, k) = (region.n as i64, region.k as i64);
        let span = (hi - lo) as usize;
        let lnq = crate::exact::ln(&region.q);
        match region.kind {
            RegionKind::CutHexagon => {
                let top = hi;
                let lnfq: Vec<f64> = if lnq == 0.0 {
                    ln_factorial_table(top as usize)
                } else {
                    let mut t = vec![0.0; top as usize + 1];
                    for a in 1..=top as usize {
                        t[a] = t[a - 1] + ln_abs_one_minus_qpow(a as i64, lnq);
                    }
                    t
                };
                let single = (lo..=hi)
                    .map(|m| 0.5 * (m * (m - 2 * k + 1)) as f64 * lnq - lnfq[m as usize] - lnfq[(top - m) as usize])
                    .collect();
                let diff = (0..=span as i64)
                    .map(|d| if lnq == 0.0 { (d as f64).ln() } else { ln_abs_one_minus_qpow(d, lnq) })
                    .collect();
                LogWeight { kind: region.kind, lnq, lo, single, diff, sum: vec![] }
            }
            RegionKind::HalfCutHexagon => {
                let lf = ln_factorial_table((2 * n + 2 * k) as usize);
                let single = (lo..=hi)
                    .map(|m| ((2 * m - 1) as f64).ln() - lf[(n + m + k - 1) as usize] - lf[(n - m + k) as usize])
                    .collect();
                let diff = (0..=span as i64).map(|d| (d as f64).ln()).collect();
                let sum = (0..=2 * hi).map(|s| ((s - 1) as f64).ln()).collect();
                LogWeight { kind: region.kind, lnq: 0.0, lo, single, diff, sum }
            }
        }
    }

    #[inline]
    fn one(&self, m: i64) -> f64 {
        self.single[(m - self.lo) as usize]
    }

    #[inline]
    fn pair(&self, a: i64, b: i64) -> f64 {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        match self.kind {
            RegionKind::CutHexagon => a as f64 * self.lnq + self.diff[(b - a) as usize],
            RegionKind::HalfCutHexagon => self.diff[(b - a) as usize] + self.sum[(a + b) as usize],
        }
    }

    /// Full O(k²) evaluation.
    pub fn eval(&self, m: &[i64]) -> f64 {
        let mut s = 0.0;
        for (i, &a) in m.iter().enumerate() {
            s += self.one(a);
            for &b in &m[i + 1..] {
                s += self.pair(a, b);
            }
        }
        s
    }

    /// Change of the log weight when the particle at index `i` moves to `to`.
    pub fn delta(&self, m: &[i64], i: usize, to: i64) -> f64 {
        let from = m[i];
        let mut d = self.one(to) - self.one(from);
        for (j, &b) in m.iter().enumerate() {
            if j != i {
                d += self.pair(to, b) - self.pair(from, b);
            }
        }
        d
    }
}

/// Snapshot of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub config: EndpointConfig,
    pub log_weight: f64,
    pub rng_state: ChaCha8Rng,
    pub step_count: u64,
}

/// Single-site Metropolis chain on endpoint configurations.
#[derive(Debug, Clone)]
pub struct Chain {
    region: RegionSpec,
    weight: LogWeight,
    /// allowed non-packed sites, increasing
    free_sites: Vec<i64>,
    /// site -> index in `free_sites`, or usize::MAX
    site_index: Vec<usize>,
    occupied: Vec<bool>,
    /// free particles first, then pinned ones
    positions: Vec<i64>,
    free: usize,
    log_weight: f64,
    rng: ChaCha8Rng,
    steps: u64,
    accepted: u64,
    max_drift: f64,
}

impl Chain {
    pub fn new(region: &RegionSpec, seed: u64) -> Result<Self> {
        let (lo, hi) = region.site_range();
        let free_sites: Vec<i64> = region.allowed_sites().into_iter().filter(|&s| !region.is_packed(s)).collect();
        let pinned: Vec<i64> = region.packed.iter().flat_map(|iv| iv.lo..=iv.hi).collect();
        if pinned.len() > region.k {
            return Err(Error::NoValidConfig);
        }
        let free = region.k - pinned.len();
        if free > free_sites.len() {
            return Err(Error::NoValidConfig);
        }
        let mut site_index = vec![usize::MAX; (hi - lo + 1) as usize];
        for (i, &s) in free_sites.iter().enumerate() {
            site_index[(s - lo) as usize] = i;
        }
        // spread the free particles evenly over the free sites
        let mut positions: Vec<i64> = (0..free)
            .map(|j| free_sites[((2 * j + 1) * free_sites.len()) / (2 * free)])
            .collect();
        positions.extend(pinned);
        let mut occupied = vec![false; site_index.len()];
        for &p in &positions {
            occupied[(p - lo) as usize] = true;
        }
        let weight = LogWeight::new(region);
        let log_weight = weight.eval(&positions);
        if !log_weight.is_finite() {
            return Err(Error::NoValidConfig);
        }
        Ok(Chain {
            region: region.clone(),
            weight,
            free_sites,
            site_index,
            occupied,
            positions,
            free,
            log_weight,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            accepted: 0,
            max_drift: 0.0,
        })
    }

    /// One proposal; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        self.steps += 1;
        let accepted = self.propose();
        if self.steps % DRIFT_CHECK_INTERVAL == 0 {
            self.check_drift();
        }
        accepted
    }

    fn propose(&mut self) -> bool {
        if self.free == 0 {
            return false;
        }
        let r: u64 = self.rng.random_range(0..2 * self.free as u64);
        let i = (r >> 1) as usize;
        let from = self.positions[i];
        let lo = self.region.site_range().0;
        let idx = self.site_index[(from - lo) as usize];
        let to_idx = if r & 1 == 0 {
            match idx.checked_sub(1) {
                Some(t) => t,
                None => return false,
            }
        } else {
            idx + 1
        };
        let Some(&to) = self.free_sites.get(to_idx) else {
            return false;
        };
        if self.occupied[(to - lo) as usize] {
            return false;
        }
        let d = self.weight.delta(&self.positions, i, to);
        if d < 0.0 && self.rng.random::<f64>() >= d.exp() {
            return false;
        }
        self.occupied[(from - lo) as usize] = false;
        self.occupied[(to - lo) as usize] = true;
        self.positions[i] = to;
        self.log_weight += d;
        self.accepted += 1;
        true
    }

    /// Recomputes the log weight from scratch, records the relative drift of
    /// the incremental value and resets it.
    pub fn check_drift(&mut self) -> f64 {
        let exact = self.weight.eval(&self.positions);
        let drift = (exact - self.log_weight).abs() / exact.abs().max(1.0);
        self.max_drift = self.max_drift.max(drift);
        self.log_weight = exact;
        drift
    }

    /// Endpoint positions in no particular order.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn config(&self) -> EndpointConfig {
        let mut m = self.positions.clone();
        m.sort_unstable();
        EndpointConfig::new(m)
    }

    pub fn log_weight(&self) -> f64 {
        self.log_weight
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    /// Largest relative drift seen by the periodic rechecks.
    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn state(&self) -> ChainState {
        ChainState {
            config: self.config(),
            log_weight: self.log_weight,
            rng_state: self.rng.clone(),
            step_count: self.steps,
        }
    }

    /// Runs `steps` proposals and calls `visit` after each one past `burnin`.
    pub fn run<F: FnMut(&Chain)>(&mut self, steps: u64, burnin: u64, mut visit: F) {
        for s in 0..steps {
            self.step();
            if s >= burnin {
                visit(self);
            }
        }
    }
}

/// Stream of post-burn-in configurations, one per proposal.
#[derive(Debug, Clone)]
pub struct McmcRun {
    chain: Chain,
    remaining_burnin: u64,
    remaining: u64,
}

impl McmcRun {
    pub fn chain(&self) -> &Chain {
        &self.chain
    }
}

impl Iterator for McmcRun {
    type Item = EndpointConfig;
    fn next(&mut self) -> Option<EndpointConfig> {
        while self.remaining_burnin > 0 {
            self.chain.step();
            self.remaining_burnin -= 1;
            self.remaining -= 1;
        }
        if self.remaining == 0 {
            return None;
        }
        self.chain.step();
        self.remaining -= 1;
        Some(self.chain.config())
    }
}

pub fn default_burnin(steps: u64) -> u64 {
    steps / 5
}

pub fn mcmc_run(region: &RegionSpec, steps: u64, burnin: u64, seed: u64) -> Result<McmcRun> {
    if steps <= burnin {
        return Err(Error::InvalidParameter(format!("steps ({steps}) must exceed burn-in ({burnin})")));
    }
    Ok(McmcRun { chain: Chain::new(region, seed)?, remaining_burnin: burnin, remaining: steps })
}

/// Empirical frequencies of configurations over the whole stream.
pub fn config_frequencies<I: IntoIterator<Item = EndpointConfig>>(samples: I) -> HashMap<EndpointConfig, u64> {
    let mut h = HashMap::new();
    for c in samples {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// Total-variation distance between empirical counts and the exact law.
pub fn tv_distance(dist: &ExactDistribution, counts: &HashMap<EndpointConfig, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    let p = dist.probabilities_f64();
    let mut tv = 0.0;
    let mut seen = 0u64;
    for (c, pi) in dist.configs.iter().zip(&p) {
        let n = counts.get(c).copied().unwrap_or(0);
        seen += n;
        tv += (n as f64 / total as f64 - pi).abs();
    }
    // mass on configurations outside the support
    tv += (total - seen) as f64 / total as f64;
    0.5 * tv
}

/// I.i.d. draws from the enumerated distribution by inverse CDF.
pub fn exact_sampler(region: &RegionSpec, count: usize, seed: u64) -> Result<Vec<EndpointConfig>> {
    let dist = exact_distribution(region)?;
    let mut cdf = Vec::with_capacity(dist.configs.len());
    let mut acc = crate::exact::ExactRational::from_integer(0.into());
    for w in &dist.weights {
        acc += w;
        cdf.push(to_f64(&(&acc / &dist.total)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
            dist.configs[i].clone()
        })
        .collect())
}

/// Accumulates site occupation counts; merging is addition, so it is
/// associative and order independent.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteCounts {
    pub lo: i64,
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl SiteCounts {
    pub fn new(lo: i64, hi: i64) -> Self {
        SiteCounts { lo, counts: vec![0; (hi - lo + 1) as usize], samples: 0 }
    }

    pub fn for_region(region: &RegionSpec) -> Self {
        let (lo, hi) = region.site_range();
        Self::new(lo, hi)
    }

    pub fn add(&mut self, m: &[i64]) {
        for &x in m {
            self.counts[(x - self.lo) as usize] += 1;
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &SiteCounts) -> Result<()> {
        if self.lo != other.lo || self.counts.len() != other.counts.len() {
            return Err(Error::InvalidParameter("site ranges differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        Ok(())
    }
}

/// Histogram of scaled endpoint positions. Site m occupies the cell
/// [m·eps, (m+1)·eps]; an endpoint carries mass eps, so a fully packed
/// stretch has height 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<f64>,
    pub samples: u64,
    pub eps: f64,
    pub normalization: f64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    pub fn height(&self, i: usize) -> f64 {
        self.counts[i] * self.eps / (self.samples as f64 * self.width(i))
    }

    pub fn heights(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.height(i)).collect()
    }

    pub fn mass(&self) -> f64 {
        (0..self.bins()).map(|i| self.height(i) * self.width(i)).sum()
    }

    /// Σ |height - theory| · width, with the theory averaged over each bin.
    pub fn l1_distance<F: FnMut(f64, f64) -> f64>(&self, mut cell_average: F) -> f64 {
        (0..self.bins())
            .map(|i| (self.height(i) - cell_average(self.bin_edges[i], self.bin_edges[i + 1])).abs() * self.width(i))
            .sum()
    }
}

/// Largest divisor of `sites` not exceeding max(1, points/500).
pub fn default_bins(sites: usize, points: u64) -> usize {
    let cap = ((points / 500) as usize).max(1).min(sites.max(1));
    (1..=cap).rev().find(|d| sites % d == 0).unwrap_or(1)
}

/// Bins site counts over the cells [m·eps, (m+1)·eps]. When a bin edge cuts
/// a cell the cell count is split in proportion to the overlap.
pub fn histogram_from_counts(counts: &SiteCounts, bins: usize, eps: f64) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be at least 1".into()));
    }
    if counts.samples == 0 {
        return Err(Error::EmptySamples);
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let cells = counts.counts.len();
    let start = counts.lo as f64 * eps;
    let end = (counts.lo + cells as i64) as f64 * eps;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| start + (end - start) * i as f64 / bins as f64).collect();
    let mut out = vec![0.0; bins];
    for (c, &n) in counts.counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        // in units of 1/(cells·bins): cell c is [c·bins, (c+1)·bins],
        // bin j is [j·cells, (j+1)·cells]
        let (a, b) = (c * bins, (c + 1) * bins);
        for j in a / cells..bins {
            let (lo, hi) = (j * cells, (j + 1) * cells);
            if lo >= b {
                break;
            }
            let overlap = hi.min(b) - lo.max(a);
            out[j] += if overlap == bins { n as f64 } else { n as f64 * overlap as f64 / bins as f64 };
        }
    }
    let mean_points = counts.counts.iter().sum::<u64>() as f64 / counts.samples as f64;
    Ok(Histogram { bin_edges, counts: out, samples: counts.samples, eps, normalization: mean_points * eps })
}

/// Histogram of a sample stream. `eps` is the scale per lattice site (1/k for
/// the cut hexagon at q = 1).
pub fn empirical_density<I, C>(region: &RegionSpec, samples: I, bins: usize, eps: f64) -> Result<Histogram>
where
    I: IntoIterator<Item = C>,
    C: AsRef<[i64]>,
{
    let mut counts = SiteCounts::for_region(region);
    for s in samples {
        counts.add(s.as_ref());
    }
    histogram_from_counts(&counts, bins, eps)
}

impl AsRef<[i64]> for EndpointConfig {
    fn as_ref(&self) -> &[i64] {
        &self.m
    }
}

/// Runs a chain and accumulates site counts without materializing the stream.
pub fn mcmc_site_counts(region: &RegionSpec, steps: u64, burnin: u64, seed: u64) -> Result<(SiteCounts, Chain)> {
    if steps <= burnin {
        return Err(Error::InvalidParameter(format!("steps ({steps}) must exceed burn-in ({burnin})")));
    }
    let mut chain = Chain::new(region, seed)?;
    let mut counts = SiteCounts::for_region(region);
    chain.run(steps, burnin, |c| counts.add(c.positions()));
    Ok((counts, chain))
}
