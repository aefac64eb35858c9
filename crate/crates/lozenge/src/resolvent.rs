//! Singular-integral solver for endpoint densities on layouts with
//! forbidden and fully packed boundary intervals.
//!
//! On the liquid bands T the density solves
//!
//!   ⨍ ρ(v)/(u-v) dv = ln(u/(λ+1-u))
//!
//! where ρ includes the frozen-1 pieces. Moving those to the right side gives
//! h(u) = Σ w_p ln|u-p|, and with R(z) = ∏ sqrt(z-a_j) sqrt(z-b_j) the
//! solution bounded at every edge is
//!
//!   F_T(z) = R(z)/π ∫_T s(v) h(v) / (|R(v)| (z-v)) dv,
//!
//! s = ±1 being the sign of R(v+i0)/i on each band. F(z) = m/z + O(1/z²)
//! fixes g+1 moment conditions; equality of the effective potential across
//! the g-1 gaps gives the rest.

use std::f64::consts::PI;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::Band;
use crate::quad::{pv_chebyshev, tanh_sinh, TanhSinh};
use crate::{Error, Result};

/// Weighted principal value ⨍_a^b f(v) / (sqrt((v-a)(b-v)) (pole-v)) dv.
pub fn pv_integral<F: Fn(f64) -> f64>(f: F, band: Band, pole: f64) -> Result<f64> {
    pv_chebyshev(f, band.lo, band.hi, pole, 1e-14)
}

// ---------------------------------------------------------------- kernel identities

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelReport {
    pub checks: Vec<IdentityCheck>,
}

impl KernelReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

/// ∫_0^1 f(u)/sqrt(u(1-u)) du via u = sin²(φ/2); f gets (u, u, 1-u).
fn arcsine_integral<F: Fn(f64, f64, f64) -> f64>(f: F) -> Result<f64> {
    tanh_sinh(
        |phi, d0, dpi| {
            let u = (0.5 * d0).sin().powi(2);
            let v = (0.5 * dpi).sin().powi(2);
            let x = if phi < 0.5 * PI { u } else { 1.0 - v };
            f(x, u, v)
        },
        0.0,
        PI,
        1e-13,
    )
}

fn ln_mid(beta: f64) -> f64 {
    ((beta.sqrt() + (beta + 1.0).sqrt()) / 2.0).ln()
}

/// ∫_0^1 ln(β+u)/sqrt(u(1-u)) du and the closed form 2π ln((√β+√(β+1))/2).
pub fn firstint(beta: f64) -> Result<(f64, f64)> {
    let q = if beta == 0.0 { arcsine_integral(|_, u, _| u.ln())? } else { arcsine_integral(|x, _, _| (beta + x).ln())? };
    Ok((q, 2.0 * PI * ln_mid(beta)))
}

/// ∫_0^1 u ln(β+u)/sqrt(u(1-u)) du and its printed closed form.
pub fn secondint(beta: f64) -> Result<(f64, f64)> {
    let q = arcsine_integral(|x, _, _| x * (beta + x).ln())?;
    let d = beta.sqrt() - (beta + 1.0).sqrt();
    Ok((q, 0.5 * PI * (d * d + 2.0 * ln_mid(beta))))
}

fn ab_rhs(a: f64, b: f64, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut q = (one - w) / w;
    // limit from below: Im q -> +0, never -0
    if q.im == 0.0 {
        q.im = 0.0;
    }
    let y = q.sqrt();
    let ta = (y * (a / (1.0 + a)).sqrt()).atan();
    let tb = (y * (b / (1.0 + b)).sqrt()).atan();
    ((a + w) / (b + w)).ln() + Complex64::new(0.0, 2.0) * (tb - ta)
}

/// Both sides of the A,B kernel identity at w off [0, 1]. The right side is
/// the continuation from the lower half-plane; real w outside [-max(A,B), 1]
/// and Im w ≤ 0 are where the two agree.
pub fn abint(a: f64, b: f64, w: Complex64) -> Result<(Complex64, Complex64)> {
    let f = |x: f64| ((a + x) / (b + x)).ln();
    let re = arcsine_integral(|x, _, _| (f(x) / (w - x)).re)?;
    let im = arcsine_integral(|x, _, _| (f(x) / (w - x)).im)?;
    let r = w.sqrt() * (w - 1.0).sqrt();
    Ok((r / PI * Complex64::new(re, im), ab_rhs(a, b, w)))
}

/// On the cut 0 < w < 1 the identity holds for the boundary value from
/// below: real part ln((A+w)/(B+w)), imaginary part
/// -(sqrt(w(1-w))/π) ⨍ f/(sqrt(v(1-v))(w-v)).
pub fn abint_on_cut(a: f64, b: f64, w: f64) -> Result<(Complex64, Complex64)> {
    let f = |x: f64| ((a + x) / (b + x)).ln();
    let pv = pv_chebyshev(f, 0.0, 1.0, w, 1e-13)?;
    let lhs = Complex64::new(f(w), -(w * (1.0 - w)).sqrt() / PI * pv);
    let y = ((1.0 - w) / w).sqrt();
    let rhs = Complex64::new(f(w), 2.0 * ((y * (b / (1.0 + b)).sqrt()).atan() - (y * (a / (1.0 + a)).sqrt()).atan()));
    Ok((lhs, rhs))
}

/// Checks the three closed-form kernel integrals at 20 random parameter
/// values each (plus the β → 0 limit and the cut values).
pub fn kernel_identities_check(seed: u64) -> Result<KernelReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut run = |name: &str, vals: Vec<(f64, f64)>| {
        let max = vals.iter().map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max);
        checks.push(IdentityCheck { name: name.to_string(), samples: vals.len(), max_residual: max });
    };
    let mut v = vec![firstint(0.0)?];
    for _ in 0..20 {
        v.push(firstint(rng.random_range(0.0..5.0))?);
    }
    run("firstint", v);
    let mut v = Vec::new();
    for _ in 0..20 {
        v.push(secondint(rng.random_range(0.0..5.0))?);
    }
    run("secondint", v);
    let mut v = Vec::new();
    for i in 0..20 {
        let a: f64 = rng.random_range(0.05..3.0);
        let b: f64 = rng.random_range(0.05..3.0);
        let w = match i % 3 {
            0 => Complex64::new(rng.random_range(-2.0..3.0), -rng.random_range(0.2..2.0)),
            1 => Complex64::new(rng.random_range(1.2..4.0), 0.0),
            _ => Complex64::new(-a.max(b) - rng.random_range(0.2..2.0), 0.0),
        };
        let (l, r) = abint(a, b, w)?;
        v.push((l.re, r.re));
        v.push((l.im, r.im));
    }
    run("ABint", v);
    let mut v = Vec::new();
    for _ in 0..20 {
        let (l, r) = abint_on_cut(rng.random_range(0.05..3.0), rng.random_range(0.05..3.0), rng.random_range(0.05..0.95))?;
        v.push((l.re, r.re));
        v.push((l.im, r.im));
    }
    run("ABint on cut", v);
    Ok(KernelReport { checks })
}

// ---------------------------------------------------------------- problem

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Forbidden { lo: f64, hi: f64 },
    Packed { lo: f64, hi: f64 },
}

impl Interval {
    pub fn lo(&self) -> f64 {
        match *self {
            Interval::Forbidden { lo, .. } | Interval::Packed { lo, .. } => lo,
        }
    }
    pub fn hi(&self) -> f64 {
        match *self {
            Interval::Forbidden { hi, .. } | Interval::Packed { hi, .. } => hi,
        }
    }
    pub fn is_packed(&self) -> bool {
        matches!(self, Interval::Packed { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Outer,
    Forbidden,
    Packed,
}

/// A maximal free stretch between intervals; it carries at most one band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub below: Neighbor,
    pub above: Neighbor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventProblem {
    pub lambda: f64,
    pub intervals: Vec<Interval>,
    pub target_mass: f64,
}

impl ResolventProblem {
    pub fn new(lambda: f64, mut intervals: Vec<Interval>, target_mass: f64) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidRegion(m.to_string()));
        if !(lambda > 0.0 && lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if !(target_mass > 0.0 && target_mass <= 1.0) {
            return bad("target mass must lie in (0, 1]");
        }
        intervals.sort_by(|x, y| x.lo().total_cmp(&y.lo()));
        let top = lambda + 1.0;
        for iv in &intervals {
            if !(0.0 <= iv.lo() && iv.lo() < iv.hi() && iv.hi() <= top) {
                return bad("intervals must satisfy 0 <= lo < hi <= lambda + 1");
            }
        }
        for w in intervals.windows(2) {
            if w[1].lo() < w[0].hi() {
                return bad("intervals overlap");
            }
        }
        let p = Self { lambda, intervals, target_mass };
        if p.packed_length() >= target_mass {
            return bad("packed intervals already exceed the target mass");
        }
        if p.free_segments().is_empty() {
            return bad("no free segment left");
        }
        Ok(p)
    }

    pub fn uniform(lambda: f64) -> Result<Self> {
        Self::new(lambda, vec![], 1.0)
    }

    /// Forbidden [0, ν] and [θ, λ+1].
    pub fn two_corner(lambda: f64, nu: f64, theta: f64) -> Result<Self> {
        let mut iv = Vec::new();
        if nu > 0.0 {
            iv.push(Interval::Forbidden { lo: 0.0, hi: nu });
        }
        if theta < lambda + 1.0 {
            iv.push(Interval::Forbidden { lo: theta, hi: lambda + 1.0 });
        }
        Self::new(lambda, iv, 1.0)
    }

    pub fn top(&self) -> f64 {
        self.lambda + 1.0
    }

    pub fn packed_length(&self) -> f64 {
        self.intervals.iter().filter(|i| i.is_packed()).map(|i| i.hi() - i.lo()).sum()
    }

    pub fn free_segments(&self) -> Vec<Segment> {
        let kind = |i: &Interval| if i.is_packed() { Neighbor::Packed } else { Neighbor::Forbidden };
        let mut out = Vec::new();
        let mut lo = 0.0;
        let mut below = Neighbor::Outer;
        for iv in &self.intervals {
            if iv.lo() > lo {
                out.push(Segment { lo, hi: iv.lo(), below, above: kind(iv) });
            }
            lo = iv.hi();
            below = kind(iv);
        }
        if self.top() > lo {
            out.push(Segment { lo, hi: self.top(), below, above: Neighbor::Outer });
        }
        out
    }
}

/// Value of the frozen stretch between a band edge and its segment end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Void,
    Saturated,
}

impl EdgeKind {
    fn default_for(n: Neighbor) -> Self {
        match n {
            Neighbor::Forbidden => EdgeKind::Saturated,
            Neighbor::Outer | Neighbor::Packed => EdgeKind::Void,
        }
    }
    fn flip(self) -> Self {
        match self {
            EdgeKind::Void => EdgeKind::Saturated,
            EdgeKind::Saturated => EdgeKind::Void,
        }
    }
    pub fn value(self) -> f64 {
        match self {
            EdgeKind::Void => 0.0,
            EdgeKind::Saturated => 1.0,
        }
    }
}

/// h(v) = Σ w ln|v - p|.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub points: Vec<(f64, f64)>,
}

impl Kernel {
    fn new(top: f64, saturated: &[(f64, f64)]) -> Self {
        let mut points = vec![(0.0, 1.0), (top, -1.0)];
        for &(p, q) in saturated {
            if q != p {
                points.push((p, -1.0));
                points.push((q, 1.0));
            }
        }
        Kernel { points }
    }

    /// `near` supplies exact distances to points that may coincide with v's
    /// neighbourhood (band or gap ends).
    fn eval(&self, v: f64, near: &[(f64, f64)]) -> f64 {
        self.points
            .iter()
            .map(|&(p, w)| {
                let d = near.iter().find(|n| n.0 == p).map(|n| n.1).unwrap_or_else(|| (v - p).abs());
                w * d.ln()
            })
            .sum()
    }

    fn deriv(&self, v: f64) -> f64 {
        self.points.iter().map(|&(p, w)| w / (v - p)).sum()
    }

    pub fn numerators(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.1 > 0.0).map(|p| p.0).collect()
    }
    pub fn denominators(&self) -> Vec<f64> {
        self.points.iter().filter(|p| p.1 < 0.0).map(|p| p.0).collect()
    }
}

/// One layout with fixed edge kinds; the unknowns are the band edges.
#[derive(Debug, Clone)]
struct Layout {
    top: f64,
    target: f64,
    /// Packed intervals and fully frozen segments.
    fixed: Vec<(f64, f64)>,
    segs: Vec<Segment>,
    kinds: Vec<(EdgeKind, EdgeKind)>,
}

impl Layout {
    fn saturated(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let mut s = self.fixed.clone();
        for (j, seg) in self.segs.iter().enumerate() {
            if self.kinds[j].0 == EdgeKind::Saturated {
                s.push((seg.lo, x[2 * j]));
            }
            if self.kinds[j].1 == EdgeKind::Saturated {
                s.push((x[2 * j + 1], seg.hi));
            }
        }
        s
    }

    fn state(&self, x: &[f64]) -> State {
        let sat = self.saturated(x);
        let sat_len: f64 = sat.iter().map(|(p, q)| q - p).sum();
        State {
            bands: x.chunks(2).map(|c| (c[0], c[1])).collect(),
            kernel: Kernel::new(self.top, &sat),
            band_mass: self.target - sat_len,
            saturated: sat,
        }
    }

    fn valid(&self, x: &[f64]) -> bool {
        let mut last = 0.0;
        for c in x.chunks(2) {
            if !(c[0] > last && c[1] > c[0]) {
                return false;
            }
            last = c[1];
        }
        last < self.top
    }

    /// Every band inside its own segment.
    fn inside(&self, x: &[f64]) -> bool {
        self.segs.iter().enumerate().all(|(j, s)| s.lo <= x[2 * j] && x[2 * j + 1] <= s.hi)
    }

    /// Starting edges at fractions `f_lo`, `f_hi` of each segment width from
    /// its saturated ends (a quarter from void ends).
    fn start(&self, f_lo: f64, f_hi: f64) -> Vec<f64> {
        self.segs
            .iter()
            .zip(&self.kinds)
            .flat_map(|(s, k)| {
                let w = s.hi - s.lo;
                let lo = if k.0 == EdgeKind::Saturated { f_lo } else { 0.25 };
                let hi = if k.1 == EdgeKind::Saturated { f_hi } else { 0.25 };
                [s.lo + lo * w, s.hi - hi * w]
            })
            .collect()
    }

    /// `x` pulled into the segments, at least `f` of the width from the ends.
    fn clamp(&self, x: &[f64], f: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .segs
            .iter()
            .zip(x.chunks(2))
            .flat_map(|(s, c)| {
                let d = f * (s.hi - s.lo);
                [c[0].clamp(s.lo + d, s.hi - 2.0 * d), c[1].clamp(s.lo + 2.0 * d, s.hi - d)]
            })
            .collect();
        for c in out.chunks_mut(2) {
            if c[1] <= c[0] {
                let m = 0.5 * (c[0] + c[1]);
                c[0] = m - 1e-3 * m.abs().max(1.0);
                c[1] = m + 1e-3 * m.abs().max(1.0);
            }
        }
        out
    }
}

/// Bands, kernel and band mass for one set of edges.
#[derive(Debug, Clone)]
struct State {
    bands: Vec<(f64, f64)>,
    kernel: Kernel,
    band_mass: f64,
    saturated: Vec<(f64, f64)>,
}

impl State {
    fn sign(&self, j: usize) -> f64 {
        if (self.bands.len() - 1 - j) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// ∏_{i≠j} sqrt|(v-a_i)(v-b_i)|.
    fn others(&self, v: f64, j: usize) -> f64 {
        self.bands.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &(a, b))| ((v - a) * (v - b)).abs().sqrt()).product()
    }

    /// |R(u)| off the interior of the bands, with exact distances from `near`.
    fn r_abs(&self, u: f64, near: &[(f64, f64)]) -> f64 {
        let d = |p: f64| near.iter().find(|n| n.0 == p).map(|n| n.1).unwrap_or_else(|| (u - p).abs());
        self.bands.iter().map(|&(a, b)| (d(a) * d(b)).sqrt()).product()
    }

    /// Σ_j s_j ∫_band_j g(v, da, db, j) dv/|R(v)|, each band in φ with
    /// v = a + (b-a) sin²(φ/2).
    fn band_sum<G: FnMut(f64, f64, f64, usize) -> f64>(&self, rule: &TanhSinh, mut g: G) -> f64 {
        let mut total = 0.0;
        for (j, &(a, b)) in self.bands.iter().enumerate() {
            let w = b - a;
            let part = rule.integrate(0.0, PI, |phi, d0, dpi| {
                let da = w * (0.5 * d0).sin().powi(2);
                let db = w * (0.5 * dpi).sin().powi(2);
                let v = if phi < 0.5 * PI { a + da } else { b - db };
                g(v, da, db, j) / self.others(v, j)
            });
            total += self.sign(j) * part;
        }
        total
    }

    fn h_band(&self, v: f64, da: f64, db: f64, j: usize) -> f64 {
        let (a, b) = self.bands[j];
        self.kernel.eval(v, &[(a, da), (b, db)])
    }

    fn moments(&self, rule: &TanhSinh) -> Vec<f64> {
        (0..=self.bands.len()).map(|k| self.band_sum(rule, |v, da, db, j| self.h_band(v, da, db, j) * v.powi(k as i32))).collect()
    }

    /// Σ_i s_i ∫ (h(v) - h(u)) / (|R(v)| (u - v)) dv with h(u) given.
    fn difference_integral(&self, rule: &TanhSinh, u: f64, near: &[(f64, f64)], hu: f64, dhu: f64) -> f64 {
        // the difference quotient is replaced by -h'(u) only well inside the
        // scale on which h varies
        let dist = |p: f64| near.iter().find(|n| n.0 == p).map(|n| n.1).unwrap_or_else(|| (u - p).abs());
        let local = self.kernel.points.iter().map(|p| dist(p.0)).fold(f64::INFINITY, f64::min);
        let inside = |a: f64, b: f64| near.iter().any(|n| n.0 == a) && near.iter().any(|n| n.0 == b) && u > a - 1e-300 && u < b + 1e-300;
        self.band_sum(rule, |v, da, db, j| {
            let (a, b) = self.bands[j];
            // u - v from exact offsets
            let d = if inside(a, b) {
                if da < db {
                    dist(a) - da
                } else {
                    db - dist(b)
                }
            } else if u >= b {
                dist(b) + db
            } else if u <= a {
                -(dist(a) + da)
            } else {
                u - v
            };
            if d.abs() < 1e-6 * local {
                -dhu
            } else {
                (self.h_band(v, da, db, j) - hu) / d
            }
        })
    }

    /// W(u) = F_T(u) - h(u) on a gap point.
    fn gap_field(&self, rule: &TanhSinh, u: f64, near: &[(f64, f64)]) -> f64 {
        let hu = self.kernel.eval(u, near);
        let right = self.bands.iter().filter(|b| b.0 > u).count();
        let sign = if right % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.r_abs(u, near) / PI * self.difference_integral(rule, u, near, hu, self.kernel.deriv(u))
    }

    fn residuals(&self, rule: &TanhSinh) -> Vec<f64> {
        let g = self.bands.len();
        let m = self.moments(rule);
        let mut r: Vec<f64> = m[..g].to_vec();
        r.push(m[g] - PI * self.band_mass);
        for j in 0..g.saturating_sub(1) {
            r.push(self.gap_integral(rule, j));
        }
        r
    }

    fn gap_integral(&self, rule: &TanhSinh, j: usize) -> f64 {
        let lo = self.bands[j].1;
        let hi = self.bands[j + 1].0;
        let mut pts: Vec<f64> = self.kernel.points.iter().map(|p| p.0).filter(|&p| p > lo && p < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2).map(|w| rule.integrate(w[0], w[1], |u, d0, d1| self.gap_field(rule, u, &[(w[0], d0), (w[1], d1)]))).sum()
    }

    /// Density inside band j.
    fn band_density(&self, rule: &TanhSinh, u: f64, j: usize) -> f64 {
        let (a, b) = self.bands[j];
        self.band_density_at(rule, u, u - a, b - u, j)
    }

    /// Same with exact distances to the band edges.
    fn band_density_at(&self, rule: &TanhSinh, u: f64, da: f64, db: f64, j: usize) -> f64 {
        let (a, b) = self.bands[j];
        let near = [(a, da), (b, db)];
        let hu = self.kernel.eval(u, &near);
        let ru = (da * db).sqrt() * self.others(u, j);
        -self.sign(j) * ru / (PI * PI) * self.difference_integral(rule, u, &near, hu, self.kernel.deriv(u))
    }

    fn band_own_mass(&self, rule: &TanhSinh, j: usize) -> f64 {
        let (a, b) = self.bands[j];
        TanhSinh::new(rule.level.saturating_sub(1).max(3)).integrate(a, b, |u, da, db| {
            if da <= 0.0 || db <= 0.0 {
                0.0
            } else {
                self.band_density_at(rule, u, da, db, j)
            }
        })
    }

    fn resolvent(&self, rule: &TanhSinh, z: Complex64) -> Complex64 {
        let re = self.band_sum(rule, |v, da, db, j| (self.h_band(v, da, db, j) / (z - v)).re);
        let im = self.band_sum(rule, |v, da, db, j| (self.h_band(v, da, db, j) / (z - v)).im);
        let r: Complex64 = self.bands.iter().map(|&(a, b)| (z - a).sqrt() * (z - b).sqrt()).product();
        r / PI * Complex64::new(re, im)
    }
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gaussian elimination with partial pivoting.
fn linear_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < 1e-300 {
            return None;
        }
        m.swap(k, p);
        rhs.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k][k];
    }
    Some(x)
}

struct NewtonOutcome {
    x: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
    /// Index of a band that shrank below the merge threshold.
    collapsed: Option<usize>,
}

const MERGE_WIDTH: f64 = 1e-9;
const STALL_WINDOW: usize = 8;

/// Damped Newton with a finite-difference Jacobian. With `strict` the line
/// search keeps every band inside its segment.
fn newton(layout: &Layout, rule: &TanhSinh, mut x: Vec<f64>, tol: f64, max_iter: usize, strict: bool) -> NewtonOutcome {
    let f = |x: &[f64]| layout.state(x).residuals(rule);
    let ok = |x: &[f64]| layout.valid(x) && (!strict || layout.inside(x));
    let mut r = f(&x);
    let mut it = 0;
    let collapsed = |x: &[f64]| x.chunks(2).position(|c| c[1] - c[0] < MERGE_WIDTH);
    let mut history = Vec::new();
    while it < max_iter {
        let n0 = norm(&r);
        if n0 < tol {
            return NewtonOutcome { residual: n0, x, iterations: it, converged: true, collapsed: None };
        }
        // stalled far from a root: give up rather than crawl
        history.push(n0);
        if it >= STALL_WINDOW && n0 > 0.5 * history[it - STALL_WINDOW] {
            return NewtonOutcome { residual: n0, x, iterations: it, converged: false, collapsed: None };
        }
        it += 1;
        let n = x.len();
        let mut jac = vec![vec![0.0; n]; n];
        for k in 0..n {
            let h = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let (rp, rm) = if layout.valid(&xp) && layout.valid(&xm) {
                (f(&xp), f(&xm))
            } else {
                (f(&xp), r.clone())
            };
            let denom = if layout.valid(&xm) && layout.valid(&xp) { 2.0 * h } else { h };
            for i in 0..n {
                jac[i][k] = (rp[i] - rm[i]) / denom;
            }
        }
        let Some(dx) = linear_solve(jac, r.iter().map(|v| -v).collect()) else {
            return NewtonOutcome { residual: n0, x, iterations: it, converged: false, collapsed: None };
        };
        let mut t = 1.0;
        loop {
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + t * d).collect();
            if ok(&xn) {
                let rn = f(&xn);
                if norm(&rn) < n0 * (1.0 - 1e-4 * t) || t < 1e-3 {
                    x = xn;
                    r = rn;
                    break;
                }
            } else if let Some(j) = collapsed(&xn) {
                // an already narrow band that the step wants to close is
                // reported as merged
                let seg = layout.segs[j];
                if x[2 * j + 1] - x[2 * j] < 1e-6 * (seg.hi - seg.lo) {
                    let mut xc = x.clone();
                    let c = 0.5 * (xn[2 * j] + xn[2 * j + 1]);
                    xc[2 * j] = c;
                    xc[2 * j + 1] = c;
                    return NewtonOutcome { residual: n0, x: xc, iterations: it, converged: false, collapsed: Some(j) };
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                let c = collapsed(&x);
                return NewtonOutcome { residual: n0, x, iterations: it, converged: false, collapsed: c };
            }
        }
        if let Some(j) = collapsed(&x) {
            return NewtonOutcome { residual: norm(&r), x, iterations: it, converged: false, collapsed: Some(j) };
        }
    }
    let res = norm(&r);
    NewtonOutcome { residual: res, converged: res < tol, x, iterations: it, collapsed: None }
}

// ---------------------------------------------------------------- solution

#[derive(Debug, Clone)]
pub struct BandSolution {
    pub bands: Vec<Band>,
    pub edge_kinds: Vec<(EdgeKind, EdgeKind)>,
    /// Frozen-1 stretches, packed intervals included.
    pub saturated: Vec<(f64, f64)>,
    /// Segments whose band shrank to a point.
    pub merged: Vec<Segment>,
    pub kernel: Kernel,
    /// Per band, (node, ρ) at Chebyshev nodes.
    pub density_grid: Vec<Vec<(f64, f64)>>,
    /// Residuals of the endpoint equations at the final edges.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub level: u32,
    pub converged: bool,
    pub notes: Vec<String>,
    band_mass: f64,
    state: State,
}

impl BandSolution {
    fn rule(&self) -> TanhSinh {
        TanhSinh::new(self.level + 1)
    }

    /// Total density: band formula inside bands, 1 on saturated stretches,
    /// 0 elsewhere.
    pub fn rho(&self, u: f64) -> f64 {
        self.rho_with(&self.rule(), u)
    }

    fn rho_with(&self, rule: &TanhSinh, u: f64) -> f64 {
        for (j, b) in self.bands.iter().enumerate() {
            if u > b.lo && u < b.hi {
                return self.state.band_density(rule, u, j);
            }
        }
        if self.saturated.iter().any(|&(p, q)| p <= u && u <= q) {
            1.0
        } else {
            0.0
        }
    }

    /// Mass the bands must carry.
    pub fn band_mass(&self) -> f64 {
        self.band_mass
    }

    /// ∫_T ρ by quadrature of the extracted density.
    pub fn quadrature_band_mass(&self) -> f64 {
        let rule = self.rule();
        (0..self.bands.len()).map(|j| self.state.band_own_mass(&rule, j)).sum()
    }

    /// ∫ρ over [0, λ+1]: bands by quadrature plus the frozen-1 stretches.
    pub fn total_mass(&self) -> f64 {
        self.quadrature_band_mass() + self.saturated.iter().map(|(p, q)| q - p).sum::<f64>()
    }

    /// Laurent coefficients of F_T on |z| = radius: [c_{g-1}, ..., c_0,
    /// c_{-1} - band mass]. All vanish for a solution.
    pub fn laurent_residuals(&self, radius: f64) -> Vec<f64> {
        let rule = self.rule();
        let n = 64;
        let g = self.bands.len() as i32;
        let zs: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / n as f64)).collect();
        let fs: Vec<Complex64> = zs.iter().map(|&z| self.state.resolvent(&rule, z)).collect();
        let coeff = |p: i32| -> Complex64 { zs.iter().zip(&fs).map(|(z, f)| f * z.powi(-p)).sum::<Complex64>() / n as f64 };
        let mut out: Vec<f64> = (0..g).rev().map(|p| coeff(p).norm()).collect();
        out.push((coeff(-1) - self.band_mass).norm());
        out
    }

    /// ρ evaluated at distance δ·width inside each band edge.
    pub fn edge_values(&self, delta: f64) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| (self.rho(b.lo + delta * b.width()), self.rho(b.hi - delta * b.width()))).collect()
    }
}

const START_FRACTIONS: [f64; 6] = [0.25, 0.02, 2e-3, 2e-4, 2e-6, 2e-8];

/// ρ within [0, 1] (up to 1e-6) at a few nodes of every band.
fn density_in_range(st: &State, rule: &TanhSinh) -> bool {
    (0..st.bands.len()).all(|j| {
        let (a, b) = st.bands[j];
        crate::quad::chebyshev_nodes(a, b, 8).into_iter().all(|u| {
            let r = st.band_density(rule, u, j);
            (-1e-6..=1.0 + 1e-6).contains(&r)
        })
    })
}

/// First edge-kind assignment not tried yet; outer ends stay void.
fn unvisited_kinds(segs: &[Segment], visited: &[Vec<(EdgeKind, EdgeKind)>]) -> Option<Vec<(EdgeKind, EdgeKind)>> {
    let free: Vec<(usize, bool)> = segs
        .iter()
        .enumerate()
        .flat_map(|(j, s)| {
            let mut v = Vec::new();
            if s.below != Neighbor::Outer {
                v.push((j, false));
            }
            if s.above != Neighbor::Outer {
                v.push((j, true));
            }
            v
        })
        .collect();
    if free.len() > 12 {
        return None;
    }
    (0u32..1 << free.len()).find_map(|mask| {
        let mut k: Vec<(EdgeKind, EdgeKind)> =
            segs.iter().map(|s| (EdgeKind::default_for(s.below), EdgeKind::default_for(s.above))).collect();
        for (bit, &(j, upper)) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                if upper {
                    k[j].1 = k[j].1.flip();
                } else {
                    k[j].0 = k[j].0.flip();
                }
            }
        }
        (!visited.contains(&k)).then_some(k)
    })
}

/// Freezes segment j whose band shrank to a point.
fn merge(
    j: usize,
    x: &mut Vec<f64>,
    segs: &mut Vec<Segment>,
    kinds: &mut Vec<(EdgeKind, EdgeKind)>,
    fixed: &mut Vec<(f64, f64)>,
    merged: &mut Vec<Segment>,
) {
    let seg = segs[j];
    let c = 0.5 * (x[2 * j] + x[2 * j + 1]);
    if kinds[j].0 == EdgeKind::Saturated {
        fixed.push((seg.lo, c));
    }
    if kinds[j].1 == EdgeKind::Saturated {
        fixed.push((c, seg.hi));
    }
    merged.push(seg);
    segs.remove(j);
    kinds.remove(j);
    x.drain(2 * j..2 * j + 2);
}

/// Solves for band edges and extracts the density at `grid` Chebyshev nodes
/// per band. Edge kinds start from the neighbours (forbidden → saturated,
/// outer end or packed → void) and flip when a frozen stretch comes out with
/// negative length; bands narrower than 1e-9 are merged into their segment.
pub fn solve(problem: &ResolventProblem, grid: usize) -> Result<BandSolution> {
    let top = problem.top();
    let mut segs = problem.free_segments();
    let mut kinds: Vec<(EdgeKind, EdgeKind)> = segs.iter().map(|s| (EdgeKind::default_for(s.below), EdgeKind::default_for(s.above))).collect();
    let mut fixed: Vec<(f64, f64)> = problem.intervals.iter().filter(|i| i.is_packed()).map(|i| (i.lo(), i.hi())).collect();
    let mut merged = Vec::new();
    let mut x: Vec<f64> = segs.iter().flat_map(|s| [s.lo + 0.25 * (s.hi - s.lo), s.hi - 0.25 * (s.hi - s.lo)]).collect();
    let mut notes = Vec::new();
    // the root search runs on a coarse rule; refinement below raises it
    let mut level = 4u32;
    let tol = 1e-11;
    let mut total_iter = 0;

    let mut visited: Vec<Vec<(EdgeKind, EdgeKind)>> = Vec::new();
    let mut collapse: Option<(usize, Vec<f64>, Vec<(EdgeKind, EdgeKind)>)> = None;
    for _round in 0..64 {
        if segs.is_empty() {
            break;
        }
        if !visited.contains(&kinds) {
            visited.push(kinds.clone());
        }
        let layout = Layout { top, target: problem.target_mass, fixed: fixed.clone(), segs: segs.clone(), kinds: kinds.clone() };
        let rule = TanhSinh::new(level);
        let out = newton(&layout, &rule, x.clone(), tol, 60, false);
        total_iter += out.iterations;
        let acceptable = |y: &[f64]| layout.inside(y) && density_in_range(&layout.state(y), &rule);
        let mut found = (out.converged && acceptable(&out.x)).then(|| out.x.clone());
        if found.is_none() {
            // the root for these kinds may sit next to a short frozen
            // stretch; search from starts close to the saturated ends
            let projected = START_FRACTIONS.iter().map(|&f| layout.clamp(&out.x, f));
            let grid = START_FRACTIONS.iter().flat_map(|&a| START_FRACTIONS.iter().map(move |&b| (a, b)));
            let mut starts: Vec<Vec<f64>> = vec![layout.start(0.25, 0.25)];
            if out.collapsed.is_none() {
                starts.extend(projected);
            }
            starts.extend(grid.skip(1).map(|(a, b)| layout.start(a, b)));
            for st in starts {
                if !layout.valid(&st) {
                    continue;
                }
                let o = newton(&layout, &rule, st, tol, 60, true);
                total_iter += o.iterations;
                if o.converged && acceptable(&o.x) {
                    found = Some(o.x);
                    break;
                }
            }
        }
        let Some(xs) = found else {
            // a collapse is only trusted once no edge-kind assignment gives
            // an honest band
            if let Some(j) = out.collapsed {
                collapse.get_or_insert((j, out.x.clone(), kinds.clone()));
            }
            // frozen stretches of negative length mean the edge kind is wrong
            let mut next = kinds.clone();
            if out.converged {
                for (j, seg) in segs.iter().enumerate() {
                    let (a, b) = (out.x[2 * j], out.x[2 * j + 1]);
                    if a < seg.lo - 1e-12 && seg.below != Neighbor::Outer {
                        next[j].0 = next[j].0.flip();
                    }
                    if b > seg.hi + 1e-12 && seg.above != Neighbor::Outer {
                        next[j].1 = next[j].1.flip();
                    }
                }
            }
            if visited.contains(&next) {
                match unvisited_kinds(&segs, &visited) {
                    Some(k) => next = k,
                    None => match collapse.take() {
                        Some((j, xc, kc)) => {
                            x = xc;
                            kinds = kc;
                            merge(j, &mut x, &mut segs, &mut kinds, &mut fixed, &mut merged);
                            visited.clear();
                            continue;
                        }
                        None => return Err(Error::NoConvergence { residual: out.residual, iterations: total_iter }),
                    },
                }
            }
            kinds = next;
            x = Layout { kinds: kinds.clone(), ..layout.clone() }.start(0.25, 0.25);
            continue;
        };
        x = xs;
        // refine the quadrature until two levels agree
        let mut prev = x.clone();
        loop {
            if level >= 10 {
                break;
            }
            level += 1;
            let out = newton(&layout, &TanhSinh::new(level), prev.clone(), tol, 20, true);
            total_iter += out.iterations;
            let diff = out.x.iter().zip(&prev).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prev = out.x;
            if diff < 1e-10 {
                level -= 1;
                break;
            }
        }
        x = prev;
        // a band carrying its full width of mass is saturated throughout: it
        // has shrunk to a point between two frozen-1 stretches
        let st = layout.state(&x);
        let rule = TanhSinh::new(level + 1);
        let full = (0..segs.len()).find(|&j| {
            let (a, b) = st.bands[j];
            b - a < MERGE_WIDTH || st.band_own_mass(&rule, j) > (b - a) - MERGE_WIDTH
        });
        match full {
            Some(j) => {
                merge(j, &mut x, &mut segs, &mut kinds, &mut fixed, &mut merged);
                visited.clear();
                collapse = None;
                continue;
            }
            None => break,
        }
    }

    let layout = Layout { top, target: problem.target_mass, fixed: fixed.clone(), segs: segs.clone(), kinds: kinds.clone() };
    let state = layout.state(&x);
    let rule = TanhSinh::new(level);
    let residuals = if segs.is_empty() { vec![] } else { state.residuals(&rule) };
    let res = norm(&residuals);
    if segs.len() > 1 {
        notes.push(format!("{} bands: {} gap conditions (equal effective potential) supplement the moment conditions", segs.len(), segs.len() - 1));
    }
    if !merged.is_empty() {
        notes.push(format!("{} band(s) shrank below {MERGE_WIDTH:e} and were merged", merged.len()));
    }
    let bands: Vec<Band> = state.bands.iter().map(|&(lo, hi)| Band { lo, hi }).collect();
    let fine = TanhSinh::new(level + 1);
    let density_grid = bands
        .iter()
        .enumerate()
        .map(|(j, b)| {
            crate::quad::chebyshev_nodes(b.lo, b.hi, grid.max(1)).into_iter().map(|u| (u, state.band_density(&fine, u, j))).collect()
        })
        .collect();
    let mut saturated = state.saturated.clone();
    saturated.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(BandSolution {
        bands,
        edge_kinds: kinds,
        saturated,
        merged,
        kernel: state.kernel.clone(),
        density_grid,
        converged: res < 1e-9,
        residuals,
        iterations: total_iter,
        level,
        notes,
        band_mass: state.band_mass,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pv_examples() {
        let v = pv_integral(|_| 1.0, Band { lo: -1.0, hi: 1.0 }, 0.0).unwrap();
        assert!(v.abs() < 1e-14);
        let (w, beta) = (0.3, 1.0);
        let v = pv_integral(|u| 1.0 / (beta + u), Band { lo: 0.0, hi: 1.0 }, w).unwrap();
        assert!((v - PI / ((beta + w) * (beta * (beta + 1.0)).sqrt())).abs() < 1e-10);
    }

    #[test]
    fn firstint_limits() {
        let (q, c) = firstint(0.0).unwrap();
        assert!((q + 2.0 * PI * 2f64.ln()).abs() < 1e-10 && (c - q).abs() < 1e-10);
        let (q, c) = firstint(1.0).unwrap();
        assert!((q - c).abs() < 1e-9);
        let (q, c) = secondint(1.0).unwrap();
        assert!((q - c).abs() < 1e-9);
    }

    #[test]
    fn abint_on_cut_example() {
        let (l, r) = abint_on_cut(1.0, 2.0, 0.3).unwrap();
        assert!((l - r).norm() < 1e-9);
    }

    #[test]
    fn abint_upper_half_plane_is_conjugate_branch() {
        let w = Complex64::new(0.4, 0.7);
        let (l, r) = abint(1.0, 2.0, w).unwrap();
        assert!((l - r).norm() > 1e-3);
        let (l2, r2) = abint(1.0, 2.0, w.conj()).unwrap();
        assert!((l2 - r2).norm() < 1e-9);
        assert!((l - l2.conj()).norm() < 1e-12);
    }

    #[test]
    fn uniform_band_recovered() {
        let s = solve(&ResolventProblem::uniform(1.0).unwrap(), 8).unwrap();
        assert_eq!(s.bands.len(), 1);
        let b = s.bands[0];
        assert!((b.lo - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-9);
        assert!((b.hi - (1.0 + 3f64.sqrt() / 2.0)).abs() < 1e-9);
        for &(u, r) in &s.density_grid[0] {
            assert!((r - crate::density::uniform_rho(u, 1.0)).abs() < 1e-8, "{u} {r}");
        }
    }

    #[test]
    fn problem_validation() {
        assert!(ResolventProblem::new(1.0, vec![Interval::Forbidden { lo: 0.5, hi: 0.4 }], 1.0).is_err());
        assert!(ResolventProblem::new(1.0, vec![Interval::Packed { lo: 0.0, hi: 1.5 }], 1.0).is_err());
        assert!(ResolventProblem::new(
            1.0,
            vec![Interval::Forbidden { lo: 0.2, hi: 0.6 }, Interval::Packed { lo: 0.5, hi: 0.7 }],
            1.0
        )
        .is_err());
        let p = ResolventProblem::two_corner(1.0, 0.3, 1.7).unwrap();
        let s = p.free_segments();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].below, s[0].above), (Neighbor::Forbidden, Neighbor::Forbidden));
    }
}
