//! Partition functions of endpoint configurations of non-intersecting paths on
//! the free boundary, via LGV determinants, product formulas and brute force.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{binomial, det, int, q_binomial, q_factorial, qpow, ExactRational};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    CutHexagon,
    HalfCutHexagon,
}

/// Closed integer interval of boundary sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteInterval {
    pub lo: i64,
    pub hi: i64,
}

impl SiteInterval {
    pub fn contains(&self, m: i64) -> bool {
        self.lo <= m && m <= self.hi
    }
    pub fn len(&self) -> i64 {
        self.hi - self.lo + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub k: usize,
    pub n: usize,
    pub q: ExactRational,
    pub forbidden: Vec<SiteInterval>,
    pub packed: Vec<SiteInterval>,
}

impl RegionSpec {
    pub fn cut_hexagon(k: usize, n: usize, q: ExactRational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRegion("n must be at least 1".into()));
        }
        if !q.is_positive() {
            return Err(Error::InvalidRegion("q must be positive".into()));
        }
        Ok(RegionSpec { kind: RegionKind::CutHexagon, k, n, q, forbidden: vec![], packed: vec![] })
    }

    pub fn half_cut_hexagon(k: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRegion("n must be at least 1".into()));
        }
        Ok(RegionSpec { kind: RegionKind::HalfCutHexagon, k, n, q: int(1), forbidden: vec![], packed: vec![] })
    }

    pub fn with_forbidden(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.forbidden.push(SiteInterval { lo, hi });
        self.check_intervals()?;
        Ok(self)
    }

    pub fn with_packed(mut self, lo: i64, hi: i64) -> Result<Self> {
        self.packed.push(SiteInterval { lo, hi });
        self.check_intervals()?;
        Ok(self)
    }

    fn check_intervals(&mut self) -> Result<()> {
        if self.kind == RegionKind::HalfCutHexagon && !(self.forbidden.is_empty() && self.packed.is_empty()) {
            return Err(Error::InvalidRegion("half-cut hexagon takes no boundary intervals".into()));
        }
        let (lo, hi) = self.site_range();
        self.forbidden.sort_by_key(|i| i.lo);
        self.packed.sort_by_key(|i| i.lo);
        let mut all: Vec<SiteInterval> = self.forbidden.iter().chain(&self.packed).copied().collect();
        all.sort_by_key(|i| i.lo);
        for iv in &all {
            if iv.lo > iv.hi || iv.lo < lo || iv.hi > hi {
                return Err(Error::InvalidRegion(format!("interval [{}, {}] not inside [{lo}, {hi}]", iv.lo, iv.hi)));
            }
        }
        for w in all.windows(2) {
            if w[1].lo <= w[0].hi {
                return Err(Error::InvalidRegion(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let packed: i64 = self.packed.iter().map(|i| i.len()).sum();
        if packed > self.k as i64 {
            return Err(Error::InvalidRegion(format!("packed sites ({packed}) exceed path count {}", self.k)));
        }
        Ok(())
    }

    /// Inclusive range of admissible endpoint positions.
    pub fn site_range(&self) -> (i64, i64) {
        let (n, k) = (self.n as i64, self.k as i64);
        match self.kind {
            RegionKind::CutHexagon => (0, n + k - 1),
            RegionKind::HalfCutHexagon => (1, n + k),
        }
    }

    pub fn is_forbidden(&self, m: i64) -> bool {
        self.forbidden.iter().any(|i| i.contains(m))
    }

    pub fn is_packed(&self, m: i64) -> bool {
        self.packed.iter().any(|i| i.contains(m))
    }

    pub fn allowed_sites(&self) -> Vec<i64> {
        let (lo, hi) = self.site_range();
        (lo..=hi).filter(|&m| !self.is_forbidden(m)).collect()
    }

    pub fn validate(&self, m: &EndpointConfig) -> Result<()> {
        if m.m.len() != self.k {
            return Err(Error::InvalidConfig(format!("expected {} endpoints, got {}", self.k, m.m.len())));
        }
        let (lo, hi) = self.site_range();
        for w in m.m.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidConfig("endpoints must be strictly increasing".into()));
            }
        }
        for &x in &m.m {
            if x < lo || x > hi {
                return Err(Error::InvalidConfig(format!("endpoint {x} outside [{lo}, {hi}]")));
            }
            if self.is_forbidden(x) {
                return Err(Error::InvalidConfig(format!("endpoint {x} lies in a forbidden interval")));
            }
        }
        for iv in &self.packed {
            for s in iv.lo..=iv.hi {
                if m.m.binary_search(&s).is_err() {
                    return Err(Error::InvalidConfig(format!("packed site {s} is empty")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndpointConfig {
    pub m: Vec<i64>,
}

impl EndpointConfig {
    pub fn new(m: Vec<i64>) -> Self {
        EndpointConfig { m }
    }
    pub fn k(&self) -> usize {
        self.m.len()
    }
}

/// Single-path count for the half-cut hexagon: paths with (1, ±1) steps from
/// height 2i-2 to height 2m-2 in 2n steps that stay weakly above the floor.
pub fn halfcut_entry(i: i64, m: i64, n: i64) -> BigInt {
    binomial(2 * n, n + m - i) - binomial(2 * n, n + m + i - 1)
}

fn cut_entry(i: i64, m: i64, n: i64, q: &ExactRational) -> ExactRational {
    // i is 1-based; the single path has b = m - i + 1 horizontal steps
    let b = m - i + 1;
    if b < 0 || b > n {
        return ExactRational::zero();
    }
    qpow(q, b * (b - 1) / 2) * q_binomial(n, b, q)
}

/// LGV determinant.
pub fn z_det(region: &RegionSpec, m: &EndpointConfig) -> Result<ExactRational> {
    if m.k() != region.k {
        return Err(Error::InvalidConfig(format!("expected {} endpoints, got {}", region.k, m.k())));
    }
    let (k, n) = (region.k as i64, region.n as i64);
    let mat: Vec<Vec<ExactRational>> = (1..=k)
        .map(|i| {
            m.m.iter()
                .map(|&mj| match region.kind {
                    RegionKind::CutHexagon => cut_entry(i, mj, n, &region.q),
                    RegionKind::HalfCutHexagon => BigRational::from_integer(halfcut_entry(i, mj, n)),
                })
                .collect()
        })
        .collect();
    Ok(det(&mat))
}

fn factorial(a: i64) -> BigInt {
    (2..=a).fold(BigInt::one(), |acc, i| acc * i)
}

/// Product formula for the same partition function.
pub fn z_product(region: &RegionSpec, m: &EndpointConfig) -> Result<ExactRational> {
    if m.k() != region.k {
        return Err(Error::InvalidConfig(format!("expected {} endpoints, got {}", region.k, m.k())));
    }
    let (k, n) = (region.k as i64, region.n as i64);
    let ms = &m.m;
    if ms.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(ExactRational::zero());
    }
    match region.kind {
        RegionKind::HalfCutHexagon => {
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for (idx, &mi) in ms.iter().enumerate() {
                let i = idx as i64 + 1;
                let (u, v) = (n + mi + k - 1, n - mi + k);
                if u < 0 || v < 0 {
                    return Ok(ExactRational::zero());
                }
                num *= factorial(2 * n + 2 * i - 2);
                den *= factorial(u) * factorial(v);
            }
            for i in 0..ms.len() {
                for j in i..ms.len() {
                    if j > i {
                        num *= ms[j] - ms[i];
                    }
                    num *= ms[i] + ms[j] - 1;
                }
            }
            Ok(BigRational::new(num, den))
        }
        RegionKind::CutHexagon => {
            let top = n + k - 1;
            if ms.iter().any(|&x| x < 0 || x > top) {
                return Ok(ExactRational::zero());
            }
            let q = &region.q;
            if q.is_one() {
                let mut num = BigInt::one();
                let mut den = BigInt::one();
                for i in 0..ms.len() {
                    for j in i + 1..ms.len() {
                        num *= ms[j] - ms[i];
                    }
                    num *= factorial(n + k - 1 - i as i64);
                    den *= factorial(ms[i]) * factorial(top - ms[i]);
                }
                return Ok(BigRational::new(num, den));
            }
            // exponent C(k+1,3) + ½ Σ m_i(m_i - 2k + 1), always an integer
            let twice: i64 = (k + 1) * k * (k - 1) / 3 + ms.iter().map(|&x| x * (x - 2 * k + 1)).sum::<i64>();
            debug_assert!(twice % 2 == 0);
            let mut acc = qpow(q, twice / 2);
            for i in 0..ms.len() {
                for j in i + 1..ms.len() {
                    acc *= qpow(q, ms[i]) - qpow(q, ms[j]);
                }
                acc *= q_factorial((n + k - 1 - i as i64) as u64, q);
                acc /= q_factorial(ms[i] as u64, q) * q_factorial((top - ms[i]) as u64, q);
            }
            Ok(acc)
        }
    }
}

/// m_i -> n + k - 1 - m_i, re-sorted.
pub fn reflect_config(region: &RegionSpec, m: &EndpointConfig) -> EndpointConfig {
    let top = (region.n + region.k) as i64 - 1;
    let mut v: Vec<i64> = m.m.iter().map(|&x| top - x).collect();
    v.sort_unstable();
    EndpointConfig::new(v)
}

/// The exponent as printed alongside the symmetry identity.
pub fn printed_symmetry_exponent(k: i64, n: i64) -> ExactRational {
    -BigRational::new(BigInt::from(k * k * k - k), BigInt::from(2)) - BigRational::new(BigInt::from(n * k * (n + k)), BigInt::from(2))
        + int(k * (n + k - 1))
}

/// Exponent s with Z(m | 1/q) = q^s Z(m̄ | q), as calibrated against exact
/// determinants on small sizes (see [`calibrate_symmetry_exponent`]).
pub fn symmetry_exponent(k: i64, n: i64) -> i64 {
    -k * n * (n - 1) / 2
}

/// z_det(m | 1/q) - q^s z_det(m̄ | q) with the calibrated exponent.
pub fn q_symmetry_residual(region: &RegionSpec, m: &EndpointConfig) -> Result<ExactRational> {
    if region.kind != RegionKind::CutHexagon || !region.forbidden.is_empty() || !region.packed.is_empty() {
        return Err(Error::InvalidRegion("q-symmetry needs a plain cut hexagon".into()));
    }
    if region.q.is_zero() {
        return Err(Error::InvalidRegion("q must be nonzero".into()));
    }
    let mut inv = region.clone();
    inv.q = region.q.recip();
    let lhs = z_det(&inv, m)?;
    let rhs = z_det(region, &reflect_config(region, m))?;
    let s = symmetry_exponent(region.k as i64, region.n as i64);
    Ok(lhs - qpow(&region.q, s) * rhs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCalibrationRow {
    pub k: i64,
    pub n: i64,
    /// Exact exponent found from the determinant ratios.
    pub measured: Option<i64>,
    pub printed: ExactRational,
    pub calibrated: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCalibration {
    pub q: ExactRational,
    pub rows: Vec<SymmetryCalibrationRow>,
    /// Coefficients of k^i n^j (i + j <= 3) from an exact fit to the measured
    /// exponents, listed as ((i, j), coefficient).
    pub fit: Vec<((u32, u32), ExactRational)>,
    pub fit_exact: bool,
    pub printed_matches: bool,
    pub calibrated_matches: bool,
}

impl SymmetryCalibration {
    pub fn summary(&self) -> String {
        let terms: Vec<String> = self
            .fit
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((i, j), c)| format!("{c}*k^{i}*n^{j}"))
            .collect();
        format!(
            "printed s_(k,n) matches: {}; fitted exponent: {}; calibrated s = -k*n*(n-1)/2 matches: {}",
            self.printed_matches,
            if terms.is_empty() { "0".to_string() } else { terms.join(" + ") },
            self.calibrated_matches
        )
    }
}

/// Finds e with Z(m | 1/q) / Z(m̄ | q) = q^e for every m, if such e exists.
pub fn measured_symmetry_exponent(k: usize, n: usize, q: &ExactRational) -> Result<Option<i64>> {
    let region = RegionSpec::cut_hexagon(k, n, q.clone())?;
    let mut inv = region.clone();
    inv.q = q.recip();
    let lnq = crate::exact::ln(q);
    if lnq == 0.0 {
        return Err(Error::InvalidParameter("q = 1 carries no exponent information".into()));
    }
    let mut found: Option<i64> = None;
    for m in all_configs(&region)? {
        let ratio = z_det(&inv, &m)? / z_det(&region, &reflect_config(&region, &m))?;
        if !ratio.is_positive() {
            return Ok(None);
        }
        let e = (crate::exact::ln(&ratio) / lnq).round() as i64;
        if qpow(q, e) != ratio {
            return Ok(None);
        }
        match found {
            None => found = Some(e),
            Some(prev) if prev != e => return Ok(None),
            _ => {}
        }
    }
    Ok(found)
}

fn solve_exact(mut a: Vec<Vec<ExactRational>>, mut b: Vec<ExactRational>) -> Option<Vec<ExactRational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                for cc in c..n {
                    let v = &f * &a[c][cc];
                    a[r][cc] -= v;
                }
                let v = &f * &b[c];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Measures the symmetry exponent for every k, n <= max and fits a cubic
/// polynomial in (k, n) exactly (normal equations over the rationals).
pub fn calibrate_symmetry_exponent(max_k: usize, max_n: usize, q: &ExactRational) -> Result<SymmetryCalibration> {
    let mut rows = Vec::new();
    for k in 1..=max_k {
        for n in 1..=max_n {
            let measured = measured_symmetry_exponent(k, n, q)?;
            let (ki, ni) = (k as i64, n as i64);
            rows.push(SymmetryCalibrationRow {
                k: ki,
                n: ni,
                measured,
                printed: printed_symmetry_exponent(ki, ni),
                calibrated: symmetry_exponent(ki, ni),
            });
        }
    }
    let monomials: Vec<(u32, u32)> = (0..=3u32).flat_map(|i| (0..=3 - i).map(move |j| (i, j))).collect();
    let pts: Vec<(i64, i64, i64)> = rows.iter().filter_map(|r| r.measured.map(|e| (r.k, r.n, e))).collect();
    let basis = |k: i64, n: i64| -> Vec<ExactRational> {
        monomials.iter().map(|&(i, j)| int(k.pow(i) * n.pow(j))).collect()
    };
    let dim = monomials.len();
    let mut fit = Vec::new();
    let mut fit_exact = false;
    if pts.len() >= dim {
        let mut ata = vec![vec![ExactRational::zero(); dim]; dim];
        let mut atb = vec![ExactRational::zero(); dim];
        for &(k, n, e) in &pts {
            let phi = basis(k, n);
            for r in 0..dim {
                for c in 0..dim {
                    ata[r][c] += &phi[r] * &phi[c];
                }
                atb[r] += &phi[r] * int(e);
            }
        }
        if let Some(coef) = solve_exact(ata, atb) {
            fit_exact = pts.iter().all(|&(k, n, e)| {
                let v: ExactRational = basis(k, n).iter().zip(&coef).map(|(p, c)| p * c).sum();
                v == int(e)
            });
            fit = monomials.iter().copied().zip(coef).collect();
        }
    }
    let printed_matches = rows.iter().all(|r| r.measured.map(int) == Some(r.printed.clone()));
    let calibrated_matches = rows.iter().all(|r| r.measured == Some(r.calibrated));
    Ok(SymmetryCalibration { q: q.clone(), rows, fit, fit_exact, printed_matches, calibrated_matches })
}

fn check_brute_size(region: &RegionSpec) -> Result<()> {
    if region.k > 3 || region.n > 5 {
        return Err(Error::SizeLimit(format!("brute force limited to k <= 3, n <= 5 (got k={}, n={})", region.k, region.n)));
    }
    Ok(())
}

/// Independent oracle: enumerates families of non-intersecting paths.
///
/// Cut hexagon: path i starts at (i-1, 1-i) and takes n unit steps east or
/// north to (m_i, n-m_i); an east step leaving (x, y) carries q^{x+y}. All
/// starts sit on the antidiagonal x+y = 0, so after t steps every path is on
/// x+y = t and the family is non-intersecting iff the x coordinates stay
/// strictly increasing.
///
/// Half-cut hexagon: (1, ±1) steps from height 2i-2 to 2m_i-2 in 2n steps,
/// never below 0, heights strictly increasing at every time.
pub fn brute_force_z(region: &RegionSpec, m: &EndpointConfig) -> Result<ExactRational> {
    check_brute_size(region)?;
    region.validate(m)?;
    let n = region.n as i64;
    match region.kind {
        RegionKind::CutHexagon => {
            // each path: x-coordinate after each step, plus its weight exponent
            let mut per_path: Vec<Vec<(Vec<i64>, i64)>> = Vec::new();
            for (idx, &mi) in m.m.iter().enumerate() {
                let i = idx as i64;
                let east = mi - i;
                let mut paths = Vec::new();
                if (0..=n).contains(&east) {
                    for mask in 0u32..(1 << n) {
                        if mask.count_ones() as i64 != east {
                            continue;
                        }
                        let (mut x, mut y) = (i, -i);
                        let mut xs = vec![x];
                        let mut e = 0;
                        for t in 0..n {
                            if mask >> t & 1 == 1 {
                                e += x + y;
                                x += 1;
                            } else {
                                y += 1;
                            }
                            xs.push(x);
                        }
                        paths.push((xs, e));
                    }
                }
                per_path.push(paths);
            }
            let mut total = ExactRational::zero();
            let mut stack: Vec<&(Vec<i64>, i64)> = Vec::new();
            fn rec<'a>(
                level: usize,
                per_path: &'a [Vec<(Vec<i64>, i64)>],
                stack: &mut Vec<&'a (Vec<i64>, i64)>,
                q: &ExactRational,
                total: &mut ExactRational,
            ) {
                if level == per_path.len() {
                    let e: i64 = stack.iter().map(|p| p.1).sum();
                    *total += qpow(q, e);
                    return;
                }
                for p in &per_path[level] {
                    if let Some(prev) = stack.last() {
                        if prev.0.iter().zip(&p.0).any(|(a, b)| a >= b) {
                            continue;
                        }
                    }
                    stack.push(p);
                    rec(level + 1, per_path, stack, q, total);
                    stack.pop();
                }
            }
            rec(0, &per_path, &mut stack, &region.q, &mut total);
            Ok(total)
        }
        RegionKind::HalfCutHexagon => {
            let steps = 2 * n;
            let mut per_path: Vec<Vec<Vec<i64>>> = Vec::new();
            for (idx, &mi) in m.m.iter().enumerate() {
                let start = 2 * idx as i64;
                let end = 2 * mi - 2;
                let mut paths = Vec::new();
                for mask in 0u32..(1 << steps) {
                    let mut h = start;
                    let mut hs = vec![h];
                    let mut ok = true;
                    for t in 0..steps {
                        h += if mask >> t & 1 == 1 { 1 } else { -1 };
                        if h < 0 {
                            ok = false;
                            break;
                        }
                        hs.push(h);
                    }
                    if ok && h == end {
                        paths.push(hs);
                    }
                }
                per_path.push(paths);
            }
            let mut count = BigInt::zero();
            fn rec<'a>(level: usize, per_path: &'a [Vec<Vec<i64>>], prev: Option<&'a Vec<i64>>, count: &mut BigInt) {
                if level == per_path.len() {
                    *count += 1;
                    return;
                }
                for p in &per_path[level] {
                    if let Some(pr) = prev {
                        if pr.iter().zip(p).any(|(a, b)| a >= b) {
                            continue;
                        }
                    }
                    rec(level + 1, per_path, Some(p), count);
                }
            }
            rec(0, &per_path, None, &mut count);
            Ok(BigRational::from_integer(count))
        }
    }
}

/// Every valid endpoint configuration of the region, in lexicographic order.
pub fn all_configs(region: &RegionSpec) -> Result<Vec<EndpointConfig>> {
    let sites = region.allowed_sites();
    let k = region.k;
    let count = binomial(sites.len() as i64, k as i64);
    if count > BigInt::from(1_000_000) {
        return Err(Error::SizeLimit(format!("{count} configurations exceed the enumeration limit 10^6")));
    }
    let mut out = Vec::new();
    if k > sites.len() {
        return Ok(out);
    }
    let total = sites.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let cfg = EndpointConfig::new(idx.iter().map(|&i| sites[i]).collect());
        if region.packed.iter().all(|iv| (iv.lo..=iv.hi).all(|s| cfg.m.binary_search(&s).is_ok())) {
            out.push(cfg);
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + total - k) else {
            return Ok(out);
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub configs: Vec<EndpointConfig>,
    pub weights: Vec<ExactRational>,
    pub total: ExactRational,
}

impl ExactDistribution {
    pub fn probability(&self, i: usize) -> ExactRational {
        &self.weights[i] / &self.total
    }
    pub fn probabilities_f64(&self) -> Vec<f64> {
        (0..self.configs.len()).map(|i| crate::exact::to_f64(&self.probability(i))).collect()
    }
    pub fn index_of(&self, m: &EndpointConfig) -> Option<usize> {
        self.configs.binary_search(m).ok()
    }
}

/// Enumerates all configurations with weights z_det.
pub fn exact_distribution(region: &RegionSpec) -> Result<ExactDistribution> {
    let configs = all_configs(region)?;
    if configs.is_empty() {
        return Err(Error::NoValidConfig);
    }
    let weights: Vec<ExactRational> = configs.iter().map(|m| z_det(region, m)).collect::<Result<_>>()?;
    let total = weights.iter().sum();
    Ok(ExactDistribution { configs, weights, total })
}

/// Mean number of endpoints at each site (f64), from the exact distribution.
pub fn exact_site_occupation(dist: &ExactDistribution, region: &RegionSpec) -> Vec<f64> {
    let (lo, hi) = region.site_range();
    let mut occ = vec![0.0; (hi - lo + 1) as usize];
    for (p, cfg) in dist.probabilities_f64().iter().zip(&dist.configs) {
        for &x in &cfg.m {
            occ[(x - lo) as usize] += p;
        }
    }
    occ
}

pub fn as_u64(r: &ExactRational) -> Option<u64> {
    if r.is_integer() {
        r.to_integer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn cut(k: usize, n: usize, q: ExactRational) -> RegionSpec {
        RegionSpec::cut_hexagon(k, n, q).unwrap()
    }

    #[test]
    fn z_det_examples() {
        let q = rat(3, 1);
        assert_eq!(z_det(&cut(1, 2, q.clone()), &EndpointConfig::new(vec![1])).unwrap(), int(4));
        assert_eq!(z_det(&cut(1, 2, int(1)), &EndpointConfig::new(vec![1])).unwrap(), int(2));
        assert_eq!(z_det(&cut(1, 1, q.clone()), &EndpointConfig::new(vec![0])).unwrap(), int(1));
        assert_eq!(z_det(&cut(1, 1, q), &EndpointConfig::new(vec![1])).unwrap(), int(1));
        let h = RegionSpec::half_cut_hexagon(1, 1).unwrap();
        assert_eq!(z_det(&h, &EndpointConfig::new(vec![1])).unwrap(), int(1));
    }

    #[test]
    fn product_examples() {
        let r = cut(2, 2, rat(1, 2));
        let m = EndpointConfig::new(vec![0, 2]);
        assert_eq!(z_det(&r, &m).unwrap(), z_product(&r, &m).unwrap());
        let h = RegionSpec::half_cut_hexagon(2, 2).unwrap();
        let m = EndpointConfig::new(vec![1, 2]);
        assert_eq!(z_det(&h, &m).unwrap(), z_product(&h, &m).unwrap());
        for n in 1..5 {
            let r = cut(1, n, rat(2, 5));
            for x in 0..=n as i64 {
                let m = EndpointConfig::new(vec![x]);
                let single = qpow(&r.q, x * (x - 1) / 2) * q_binomial(n as i64, x, &r.q);
                assert_eq!(z_product(&r, &m).unwrap(), single);
            }
        }
    }

    #[test]
    fn reflect_examples() {
        let r = cut(1, 1, int(1));
        assert_eq!(reflect_config(&r, &EndpointConfig::new(vec![0])).m, vec![1]);
        let r = cut(2, 2, int(1));
        assert_eq!(reflect_config(&r, &EndpointConfig::new(vec![0, 2])).m, vec![1, 3]);
        let r = cut(3, 3, int(1));
        for m in all_configs(&r).unwrap() {
            assert_eq!(reflect_config(&r, &reflect_config(&r, &m)), m);
        }
    }

    #[test]
    fn symmetry_examples() {
        let r = cut(1, 1, rat(7, 2));
        for x in 0..2 {
            assert!(q_symmetry_residual(&r, &EndpointConfig::new(vec![x])).unwrap().is_zero());
        }
        let r = cut(2, 2, int(2));
        assert!(q_symmetry_residual(&r, &EndpointConfig::new(vec![0, 3])).unwrap().is_zero());
        let r = cut(3, 2, rat(1, 3));
        assert!(q_symmetry_residual(&r, &EndpointConfig::new(vec![0, 2, 4])).unwrap().is_zero());
    }

    #[test]
    fn printed_exponent_only_fits_single_path() {
        let cal = calibrate_symmetry_exponent(3, 3, &int(2)).unwrap();
        assert!(!cal.printed_matches);
        assert!(cal.calibrated_matches);
        for row in cal.rows.iter().filter(|r| r.k == 1) {
            assert_eq!(Some(row.printed.clone()), row.measured.map(int));
        }
    }

    #[test]
    fn brute_force_examples() {
        let q = rat(5, 3);
        assert_eq!(brute_force_z(&cut(1, 2, q.clone()), &EndpointConfig::new(vec![1])).unwrap(), int(1) + q);
        assert_eq!(brute_force_z(&cut(2, 1, int(1)), &EndpointConfig::new(vec![0, 1])).unwrap(), int(1));
        assert_eq!(brute_force_z(&cut(2, 2, int(1)), &EndpointConfig::new(vec![0, 1])).unwrap(), int(1));
        assert!(matches!(brute_force_z(&cut(4, 2, int(1)), &EndpointConfig::new(vec![0, 1, 2, 3])), Err(Error::SizeLimit(_))));
        let h = RegionSpec::half_cut_hexagon(1, 1).unwrap();
        assert_eq!(brute_force_z(&h, &EndpointConfig::new(vec![1])).unwrap(), int(1));
    }

    #[test]
    fn distribution_examples() {
        let d = exact_distribution(&cut(1, 1, int(1))).unwrap();
        assert_eq!(d.probability(0), rat(1, 2));
        assert_eq!(d.probability(1), rat(1, 2));
        let q = rat(7, 4);
        let d = exact_distribution(&cut(1, 2, q)).unwrap();
        assert_eq!(d.probability(1), rat(1, 2));
        // two single-step paths: (0,1), (0,2) and (1,2) are all non-intersecting
        let d = exact_distribution(&cut(2, 1, int(1))).unwrap();
        assert_eq!(d.configs.len(), 3);
        assert!((0..3).all(|i| d.probability(i) == rat(1, 3)));
        let forced = cut(2, 1, int(2)).with_packed(0, 1).unwrap();
        let d = exact_distribution(&forced).unwrap();
        assert_eq!(d.configs.len(), 1);
        assert_eq!(d.probability(0), int(1));
    }

    #[test]
    fn intervals_restrict_configs() {
        let r = cut(2, 3, int(1)).with_forbidden(0, 0).unwrap().with_packed(2, 2).unwrap();
        for m in all_configs(&r).unwrap() {
            assert!(!m.m.contains(&0));
            assert!(m.m.contains(&2));
            r.validate(&m).unwrap();
        }
        assert!(cut(2, 3, int(1)).with_forbidden(1, 2).unwrap().with_packed(2, 3).is_err());
        assert!(cut(1, 3, int(1)).with_packed(0, 1).is_err());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(z_det(&cut(2, 2, int(1)), &EndpointConfig::new(vec![1])).is_err());
    }

    #[test]
    fn empty_family() {
        let r = cut(0, 3, int(2));
        assert_eq!(z_det(&r, &EndpointConfig::new(vec![])).unwrap(), int(1));
    }
}
