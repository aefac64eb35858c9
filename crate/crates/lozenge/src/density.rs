//! Closed-form limit densities of path endpoints, and the uniform rate
//! functional for minimality checks.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::quad::{integrate, integrate_sqrt_edges, tanh_sinh};
use crate::{Error, Result};

/// Continuum geometry. All lengths are in units of the path count k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaledGeometry {
    QCut { alpha: f64, beta: f64 },
    Uniform { lambda: f64 },
    TwoCorner { lambda: f64, nu: f64, theta: f64 },
    Hexagon { lambda: f64, theta: f64, x: f64 },
    HalfCut { alpha: f64 },
    Triangle { x: f64 },
    Tsscpp { x: f64 },
}

fn param(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

impl ScaledGeometry {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScaledGeometry::QCut { alpha, beta } => {
                param(beta > 0.0 && beta.is_finite(), "q-cut requires beta > 0")?;
                param(alpha.is_finite() && alpha + beta > 0.0, "q-cut requires alpha + beta > 0")
            }
            ScaledGeometry::Uniform { lambda } => param(lambda > 0.0 && lambda.is_finite(), "uniform requires lambda > 0"),
            ScaledGeometry::TwoCorner { lambda, nu, theta } => {
                param(lambda > 0.0, "two-corner requires lambda > 0")?;
                param(0.0 <= nu && nu < theta && theta <= lambda + 1.0, "two-corner requires 0 <= nu < theta <= lambda + 1")?;
                param(theta - nu >= 1.0 - 1e-12, "two-corner requires theta - nu >= 1 (room for every path)")
            }
            ScaledGeometry::Hexagon { lambda, theta, x } => {
                param(theta > 0.0 && lambda >= theta, "hexagon requires lambda >= theta > 0")?;
                param((0.0..=lambda + theta).contains(&x), "hexagon requires 0 <= x <= lambda + theta")
            }
            ScaledGeometry::HalfCut { alpha } => param(alpha >= 0.0 && alpha.is_finite(), "half-cut requires alpha >= 0"),
            ScaledGeometry::Triangle { x } | ScaledGeometry::Tsscpp { x } => param((0.0..=1.0).contains(&x), "requires 0 <= x <= 1"),
        }
    }

    pub fn profile(&self) -> Result<DensityProfile> {
        match *self {
            ScaledGeometry::QCut { alpha, beta } => qcut_profile(alpha, beta),
            ScaledGeometry::Uniform { lambda } => uniform_profile(lambda),
            ScaledGeometry::TwoCorner { lambda, nu, theta } => two_corner_solution(lambda, nu, theta).map(|s| s.profile),
            ScaledGeometry::Hexagon { lambda, theta, x } => hexagon_solution(lambda, theta, x).map(|s| s.profile),
            ScaledGeometry::HalfCut { alpha } => halfcut_profile(alpha),
            ScaledGeometry::Triangle { x } => triangle_profile(x),
            ScaledGeometry::Tsscpp { x } => tsscpp_profile(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenRegion {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A limit density on `support`: frozen pieces with value 0 or 1 and bands
/// where the evaluator applies.
#[derive(Clone)]
pub struct DensityProfile {
    pub tag: String,
    pub support: (f64, f64),
    pub frozen: Vec<FrozenRegion>,
    pub bands: Vec<Band>,
    /// Declared total mass ∫ρ over the support.
    pub mass: f64,
    eval: Evaluator,
}

impl fmt::Debug for DensityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityProfile")
            .field("tag", &self.tag)
            .field("support", &self.support)
            .field("frozen", &self.frozen)
            .field("bands", &self.bands)
            .field("mass", &self.mass)
            .finish()
    }
}

impl DensityProfile {
    pub fn new(tag: impl Into<String>, support: (f64, f64), frozen: Vec<FrozenRegion>, bands: Vec<Band>, mass: f64, eval: Evaluator) -> Self {
        DensityProfile { tag: tag.into(), support, frozen, bands, mass, eval }
    }

    /// Density at z; bands take precedence (their closed ends evaluate the
    /// band formula's limit), then frozen pieces, else 0.
    pub fn rho(&self, z: f64) -> f64 {
        if self.bands.iter().any(|b| b.contains(z)) {
            return (self.eval)(z);
        }
        self.frozen_value(z).unwrap_or(0.0)
    }

    pub fn frozen_value(&self, z: f64) -> Option<f64> {
        self.frozen.iter().find(|f| f.lo <= z && z <= f.hi).map(|f| f.value)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.bands.iter().flat_map(|b| [b.lo, b.hi]).chain(self.frozen.iter().flat_map(|f| [f.lo, f.hi])).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// ∫ρ over the support by adaptive quadrature (bands with the sin²
    /// change of variable).
    pub fn quadrature_mass(&self) -> Result<f64> {
        let mut total = 0.0;
        for b in &self.bands {
            if b.width() > 0.0 {
                total += integrate_sqrt_edges(|z| self.rho(z), b.lo, b.hi, 1e-13)?;
            }
        }
        let mut pts = self.breakpoints();
        pts.push(self.support.0);
        pts.push(self.support.1);
        pts.retain(|&p| p >= self.support.0 && p <= self.support.1);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if self.bands.iter().any(|b| b.lo < mid && mid < b.hi) {
                continue;
            }
            total += integrate(|z| self.rho(z), w[0], w[1], 1e-14)?;
        }
        Ok(total)
    }

    pub fn grid(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.support;
        if n <= 1 {
            return vec![(lo, self.rho(lo))];
        }
        (0..n)
            .map(|i| {
                let z = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (z, self.rho(z))
            })
            .collect()
    }

    /// Average of ρ over [lo, hi].
    pub fn cell_average(&self, lo: f64, hi: f64) -> Result<f64> {
        let breaks: Vec<f64> = self.breakpoints();
        let mut pts: Vec<f64> = breaks.into_iter().filter(|&p| p > lo && p < hi).collect();
        pts.insert(0, lo);
        pts.push(hi);
        let mut s = 0.0;
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            s += match self.bands.iter().find(|b| b.lo <= w[0] && w[1] <= b.hi && b.lo < mid && mid < b.hi) {
                Some(b) if w[0] == b.lo || w[1] == b.hi => tanh_sinh(|z, _, _| self.rho(z), w[0], w[1], 1e-12)?,
                _ => integrate(|z| self.rho(z), w[0], w[1], 1e-12)?,
            };
        }
        Ok(s / (hi - lo))
    }

    /// ρ + ε ρ (g - ∫ρg/∫ρ): keeps mass and support.
    pub fn perturbed(&self, g: Arc<dyn Fn(f64) -> f64 + Send + Sync>, eps: f64) -> Result<DensityProfile> {
        let mut num = 0.0;
        let mut den = 0.0;
        for b in &self.bands {
            num += integrate_sqrt_edges(|z| self.rho(z) * g(z), b.lo, b.hi, 1e-14)?;
            den += integrate_sqrt_edges(|z| self.rho(z), b.lo, b.hi, 1e-14)?;
        }
        let mean = num / den;
        let base = self.eval.clone();
        let eval: Evaluator = Arc::new(move |z| {
            let r = base(z);
            r + eps * r * (g(z) - mean)
        });
        Ok(DensityProfile { tag: format!("{}+perturbation", self.tag), eval, ..self.clone() })
    }
}

/// atan(s·c) with the convention that a vanishing coefficient kills the term
/// even when s is infinite.
fn atan_sc(s: f64, c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        (s * c).atan()
    }
}

fn sqrt_clip(x: f64) -> f64 {
    if x < 0.0 {
        if x > -1e-14 {
            0.0
        } else {
            f64::NAN
        }
    } else {
        x.sqrt()
    }
}

/// s = sqrt((b - z)/(z - a)) and its inverse, with exact limits at the edges.
/// Distances below a few ulps of the edge are snapped to zero.
fn edge_ratio(z: f64, a: f64, b: f64) -> (f64, f64) {
    let snap = |d: f64, at: f64| if d <= 8.0 * f64::EPSILON * at.abs().max(1.0) { 0.0 } else { d };
    let (da, db) = (snap(z - a, a), snap(b - z, b));
    ((db / da).sqrt(), (da / db).sqrt())
}

// ---------------------------------------------------------------- uniform

pub fn uniform_band(lambda: f64) -> Result<Band> {
    ScaledGeometry::Uniform { lambda }.validate()?;
    let r = (1.0 + 2.0 * lambda).sqrt();
    Ok(Band { lo: 0.5 * (1.0 + lambda - r), hi: 0.5 * (1.0 + lambda + r) })
}

pub fn uniform_rho(t: f64, lambda: f64) -> f64 {
    // 2λ+1 - 4(t-(λ+1)/2)² written as 4(t-a)(b-t) so the edges are exact zeros
    let h = 0.5 * (1.0 + 2.0 * lambda).sqrt();
    let c = 0.5 * (lambda + 1.0);
    let r = 4.0 * (t - (c - h)) * ((c + h) - t);
    if r <= 0.0 {
        return 0.0;
    }
    2.0 / PI * (r.sqrt() / lambda).atan()
}

pub fn uniform_profile(lambda: f64) -> Result<DensityProfile> {
    let band = uniform_band(lambda)?;
    Ok(DensityProfile::new(
        "uniform",
        (0.0, lambda + 1.0),
        vec![FrozenRegion { lo: 0.0, hi: band.lo, value: 0.0 }, FrozenRegion { lo: band.hi, hi: lambda + 1.0, value: 0.0 }],
        vec![band],
        1.0,
        Arc::new(move |t| uniform_rho(t, lambda)),
    ))
}

// ---------------------------------------------------------------- q-cut

/// Band [B, A] in μ-coordinates.
pub fn qcut_band(alpha: f64, beta: f64) -> Result<Band> {
    ScaledGeometry::QCut { alpha, beta }.validate()?;
    let s = 0.5 * (alpha + beta);
    let r = ((0.5 * beta).sinh() * (alpha + 0.5 * beta).sinh()).max(0.0).sqrt();
    // e^{-A} = e^{-s}(cosh s - r), e^{-B} = e^{-s}(cosh s + r)
    let big_a = s - (s.cosh() - r).ln();
    let big_b = s - (s.cosh() + r).ln();
    Ok(Band { lo: big_b, hi: big_a })
}

pub fn qcut_rho(mu: f64, alpha: f64, beta: f64) -> f64 {
    let Ok(band) = qcut_band(alpha, beta) else { return f64::NAN };
    let (b, a) = (band.lo, band.hi);
    if mu < b || mu > a {
        return 0.0;
    }
    let den = (0.5 * a).sinh() * (0.5 * b).sinh();
    if den.abs() < 1e-300 {
        // alpha = 0: the band fills [0, beta]
        return 1.0;
    }
    let num = (0.5 * (mu - b)).sinh() * (0.5 * (a - mu)).sinh();
    2.0 / PI * ((-0.5 * mu).exp() * (num / den).max(0.0).sqrt()).atan()
}

pub fn qcut_profile(alpha: f64, beta: f64) -> Result<DensityProfile> {
    let band = qcut_band(alpha, beta)?;
    let top = alpha + beta;
    Ok(DensityProfile::new(
        "qcut",
        (0.0, top),
        vec![FrozenRegion { lo: 0.0, hi: band.lo, value: 0.0 }, FrozenRegion { lo: band.hi, hi: top, value: 0.0 }],
        vec![band],
        beta,
        Arc::new(move |mu| qcut_rho(mu, alpha, beta)),
    ))
}

// ---------------------------------------------------------------- two corners

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoCornerRegime {
    Generic,
    LowerMerged,
    UpperMerged,
    BothMerged,
    Collapsed,
}

impl TwoCornerRegime {
    pub fn tag(&self) -> &'static str {
        match self {
            TwoCornerRegime::Generic => "generic",
            TwoCornerRegime::LowerMerged => "lower-merged",
            TwoCornerRegime::UpperMerged => "upper-merged",
            TwoCornerRegime::BothMerged => "both-merged",
            TwoCornerRegime::Collapsed => "collapsed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoCornerSolution {
    pub regime: TwoCornerRegime,
    pub band: Band,
    pub profile: DensityProfile,
}

/// Polynomials U, V whose combination (U ∓ sqrt V)/(4λ²) gives the generic
/// band edges.
pub fn two_corner_uv(lambda: f64, nu: f64, theta: f64) -> (f64, f64) {
    let (l, n, t) = (lambda, nu, theta);
    let u = (n + t) * (1.0 - (n - t) * (n - t)) - (l + 1.0) * ((1.0 - n - t) * (1.0 + 2.0 * l + n + t) + 4.0 * n * t);
    let v = (1.0 - n - t) * (1.0 - n + t) * (1.0 + n - t) * (1.0 + n - t + 2.0 * l) * (1.0 - n + t + 2.0 * l) * (1.0 - n - t + 2.0 * l);
    (u, v)
}

/// Generic band edges (a, b) from (U ∓ sqrt V)/(4λ²).
pub fn two_corner_generic_band(lambda: f64, nu: f64, theta: f64) -> Band {
    let (u, v) = two_corner_uv(lambda, nu, theta);
    let r = v.max(0.0).sqrt();
    Band { lo: (u - r) / (4.0 * lambda * lambda), hi: (u + r) / (4.0 * lambda * lambda) }
}

/// Upper threshold θ_c(ν): beyond it the upper band edge detaches from the
/// upper forbidden interval.
pub fn theta_c(lambda: f64, nu: f64) -> f64 {
    (1.0 + lambda + nu + (3.0 * (1.0 + 2.0 * lambda) + (1.0 + lambda - 2.0 * nu).powi(2)).sqrt()) / 3.0
}

/// Lower threshold ν_c(θ), the mirror image of θ_c.
pub fn nu_c(lambda: f64, theta: f64) -> f64 {
    (1.0 + lambda + theta - (3.0 * (1.0 + 2.0 * lambda) + (1.0 + lambda - 2.0 * theta).powi(2)).sqrt()) / 3.0
}

pub fn two_corner_generic_rho(z: f64, lambda: f64, nu: f64, theta: f64, band: Band) -> f64 {
    let (a, b) = (band.lo, band.hi);
    let (s, inv) = edge_ratio(z, a, b);
    1.0 + 2.0 / PI
        * (atan_sc(s, sqrt_clip((a - nu) / (b - nu))) - atan_sc(s, sqrt_clip(a / b)) + atan_sc(inv, sqrt_clip((theta - b) / (theta - a)))
            - atan_sc(inv, sqrt_clip((lambda + 1.0 - b) / (lambda + 1.0 - a))))
}

/// Band for the lower-merged regime: upper edge at θ_c, lower edge
/// θ_c(1+λ+ν-θ_c)²/λ².
pub fn lower_merged_band(lambda: f64, nu: f64) -> Band {
    let tc = theta_c(lambda, nu);
    Band { lo: tc * (1.0 + lambda + nu - tc).powi(2) / (lambda * lambda), hi: tc }
}

pub fn lower_merged_rho(z: f64, lambda: f64, nu: f64) -> f64 {
    let band = lower_merged_band(lambda, nu);
    let (a, tc) = (band.lo, band.hi);
    let (s, inv) = edge_ratio(z, a, tc);
    1.0 + 2.0 / PI
        * (atan_sc(s, sqrt_clip((a - nu) / (tc - nu))) - atan_sc(s, sqrt_clip(a / tc)) - atan_sc(inv, sqrt_clip((lambda + 1.0 - tc) / (lambda + 1.0 - a))))
}

pub fn two_corner_solution(lambda: f64, nu: f64, theta: f64) -> Result<TwoCornerSolution> {
    ScaledGeometry::TwoCorner { lambda, nu, theta }.validate()?;
    let top = lambda + 1.0;
    let ub = uniform_band(lambda)?;
    let forbidden = |lo_gap: f64, hi_gap: f64| {
        let mut v = Vec::new();
        if nu > 0.0 {
            v.push(FrozenRegion { lo: 0.0, hi: nu, value: 0.0 });
        }
        v.push(FrozenRegion { lo: nu, hi: lo_gap, value: 0.0 });
        v.push(FrozenRegion { lo: hi_gap, hi: theta, value: 0.0 });
        if theta < top {
            v.push(FrozenRegion { lo: theta, hi: top, value: 0.0 });
        }
        v
    };
    let support = (0.0, top);
    if (theta - nu - 1.0).abs() <= 1e-12 {
        let (u, _) = two_corner_uv(lambda, nu, theta);
        let p = u / (4.0 * lambda * lambda);
        let mut frozen = forbidden(nu, theta);
        frozen.retain(|f| f.lo >= theta || f.hi <= nu);
        frozen.push(FrozenRegion { lo: nu, hi: theta, value: 1.0 });
        frozen.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        let band = Band { lo: p, hi: p };
        let profile = DensityProfile::new("collapsed", support, frozen, vec![], 1.0, Arc::new(|_| 1.0));
        return Ok(TwoCornerSolution { regime: TwoCornerRegime::Collapsed, band, profile });
    }
    if nu <= ub.lo && theta >= ub.hi {
        let frozen = forbidden(ub.lo, ub.hi);
        let profile = DensityProfile::new("both-merged", support, frozen, vec![ub], 1.0, Arc::new(move |t| uniform_rho(t, lambda)));
        return Ok(TwoCornerSolution { regime: TwoCornerRegime::BothMerged, band: ub, profile });
    }
    if theta >= theta_c(lambda, nu) {
        let band = lower_merged_band(lambda, nu);
        let mut frozen = forbidden(band.lo, band.hi);
        for f in frozen.iter_mut() {
            if f.lo == nu && f.hi == band.lo {
                f.value = 1.0;
            }
        }
        let profile = DensityProfile::new("lower-merged", support, frozen, vec![band], 1.0, Arc::new(move |z| lower_merged_rho(z, lambda, nu)));
        return Ok(TwoCornerSolution { regime: TwoCornerRegime::LowerMerged, band, profile });
    }
    if nu <= nu_c(lambda, theta) {
        let (nu_m, _theta_m) = (top - theta, top - nu);
        let mb = lower_merged_band(lambda, nu_m);
        let band = Band { lo: top - mb.hi, hi: top - mb.lo };
        let mut frozen = forbidden(band.lo, band.hi);
        for f in frozen.iter_mut() {
            if f.lo == band.hi && f.hi == theta {
                f.value = 1.0;
            }
        }
        let profile =
            DensityProfile::new("upper-merged", support, frozen, vec![band], 1.0, Arc::new(move |z| lower_merged_rho(top - z, lambda, nu_m)));
        return Ok(TwoCornerSolution { regime: TwoCornerRegime::UpperMerged, band, profile });
    }
    let band = two_corner_generic_band(lambda, nu, theta);
    let mut frozen = forbidden(band.lo, band.hi);
    for f in frozen.iter_mut() {
        if (f.lo == nu && f.hi == band.lo) || (f.lo == band.hi && f.hi == theta) {
            f.value = 1.0;
        }
    }
    let profile =
        DensityProfile::new("generic", support, frozen, vec![band], 1.0, Arc::new(move |z| two_corner_generic_rho(z, lambda, nu, theta, band)));
    Ok(TwoCornerSolution { regime: TwoCornerRegime::Generic, band, profile })
}

// ---------------------------------------------------------------- hexagon

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HexagonCase {
    I,
    II,
    III,
    IV,
    V,
    /// x4 < x < x3 (only when θ is small): both sides frozen at 1 although x
    /// lies strictly between the two middle touch points.
    Bridge,
}

impl HexagonCase {
    pub fn tag(&self) -> &'static str {
        match self {
            HexagonCase::I => "i",
            HexagonCase::II => "ii",
            HexagonCase::III => "iii",
            HexagonCase::IV => "iv",
            HexagonCase::V => "v",
            HexagonCase::Bridge => "bridge",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HexagonSolution {
    pub case: HexagonCase,
    pub band: Band,
    /// Frozen values below and above the band.
    pub bottom: f64,
    pub top: f64,
    pub profile: DensityProfile,
}

/// x-coordinates of the points where the inscribed ellipse touches the six
/// sides: [0, θ/(1+λ), λ/(1+θ), θ(1+λ+θ)/(1+θ), λ(1+λ+θ)/(1+λ), λ+θ].
pub fn hexagon_touch_points(lambda: f64, theta: f64) -> [f64; 6] {
    let l = lambda + theta;
    [0.0, theta / (1.0 + lambda), lambda / (1.0 + theta), theta * (1.0 + l) / (1.0 + theta), lambda * (1.0 + l) / (1.0 + lambda), l]
}

pub fn hexagon_band(lambda: f64, theta: f64, x: f64) -> Band {
    let l = lambda + theta;
    let p = (lambda * (l - x)).max(0.0).sqrt();
    let q = (x * theta * (1.0 + l)).max(0.0).sqrt();
    Band { lo: ((p - q) / l).powi(2), hi: ((p + q) / l).powi(2) }
}

/// Signed square roots whose squares are 1+θ-b, 1+x-b, a and λ-x+a.
fn hexagon_signed_roots(lambda: f64, theta: f64, x: f64) -> [f64; 4] {
    let l = lambda + theta;
    [
        ((x * lambda).sqrt() - (theta * (1.0 + l) * (l - x)).sqrt()) / l,
        ((x * lambda * (1.0 + l)).sqrt() - (theta * (l - x)).sqrt()) / l,
        ((lambda * (l - x)).sqrt() - (x * theta * (1.0 + l)).sqrt()) / l,
        ((x * theta).sqrt() - (lambda * (l - x) * (1.0 + l)).sqrt()) / l,
    ]
}

fn hexagon_frozen(lambda: f64, theta: f64, x: f64) -> (f64, f64) {
    let [_, x2, x3, x4, x5, _] = hexagon_touch_points(lambda, theta);
    let top = if x2 < x && x < x4 { 0.0 } else { 1.0 };
    let bottom = if x3 < x && x < x5 { 0.0 } else { 1.0 };
    (bottom, top)
}

/// Density inside the band, in the single signed form that covers every
/// case.
pub fn hexagon_band_rho(z: f64, lambda: f64, theta: f64, x: f64) -> f64 {
    let band = hexagon_band(lambda, theta, x);
    let (a, b) = (band.lo, band.hi);
    let (_, top) = hexagon_frozen(lambda, theta, x);
    let sg = hexagon_signed_roots(lambda, theta, x).map(|v| if v > 1e-15 { 1.0 } else if v < -1e-15 { -1.0 } else { 0.0 });
    // on x2 or x4 the upper frozen value flips and the matching arctan term
    // jumps by π/2, so the two meet halfway
    let top = if sg[0] == 0.0 || sg[1] == 0.0 { 0.5 } else { top };
    let (s, _) = edge_ratio(z, a, b);
    let t1 = atan_sc(s, sqrt_clip((1.0 + theta - a) / (1.0 + theta - b)));
    let t2 = atan_sc(s, sqrt_clip((1.0 + x - a) / (1.0 + x - b)));
    let t3 = atan_sc(s, sqrt_clip(a / b));
    let t4 = atan_sc(s, sqrt_clip((lambda - x + a) / (lambda - x + b)));
    top + (-sg[0] * t1 + sg[1] * t2 + sg[2] * t3 + sg[3] * t4) / PI
}

pub fn hexagon_solution(lambda: f64, theta: f64, x: f64) -> Result<HexagonSolution> {
    ScaledGeometry::Hexagon { lambda, theta, x }.validate()?;
    let band = hexagon_band(lambda, theta, x);
    let (bottom, top) = hexagon_frozen(lambda, theta, x);
    let [_, x2, x3, x4, x5, _] = hexagon_touch_points(lambda, theta);
    let case = match (bottom == 1.0, top == 1.0) {
        (true, true) if x <= x2.min(x3) => HexagonCase::I,
        (true, true) if x >= x4.max(x5) => HexagonCase::V,
        (true, true) => HexagonCase::Bridge,
        (true, false) => HexagonCase::II,
        (false, false) => HexagonCase::III,
        (false, true) => HexagonCase::IV,
    };
    let support = ((x - lambda).max(0.0), 1.0 + x.min(theta));
    let frozen = vec![
        FrozenRegion { lo: support.0, hi: band.lo.max(support.0), value: bottom },
        FrozenRegion { lo: band.hi.min(support.1), hi: support.1, value: top },
    ];
    let bands = if band.width() > 0.0 { vec![band] } else { vec![] };
    let profile = DensityProfile::new(case.tag(), support, frozen, bands, 1.0, Arc::new(move |z| hexagon_band_rho(z, lambda, theta, x)));
    Ok(HexagonSolution { case, band, bottom, top, profile })
}

/// Residuals of the eight Max/Min identities for sqrt(γ) ± sqrt(γ-1) and
/// the analogous combinations of β, η, δ. The identities hold in ratio form:
/// sqrt(γ) + sqrt(γ-1) = (Max/Min)^{1/4} and the difference is its inverse.
pub fn hexagon_minmax_residuals(lambda: f64, theta: f64, x: f64) -> [f64; 8] {
    let band = hexagon_band(lambda, theta, x);
    let (a, b) = (band.lo, band.hi);
    let w = b - a;
    let l = lambda + theta;
    let beta = a / w;
    let gamma = (1.0 + x - a) / w;
    let delta = (lambda - x + a) / w;
    let eta = (1.0 + theta - a) / w;
    let ratio = |p: f64, q: f64| (p.max(q) / p.min(q)).powf(0.25);
    let rg = ratio(x * lambda * (1.0 + l), theta * (l - x));
    let rb = ratio(lambda * (l - x), x * theta * (1.0 + l));
    let re = ratio(x * lambda, theta * (1.0 + l) * (l - x));
    let rd = ratio(x * theta, lambda * (l - x) * (1.0 + l));
    let g1 = sqrt_clip(gamma - 1.0);
    let e1 = sqrt_clip(eta - 1.0);
    [
        gamma.sqrt() + g1 - rg,
        gamma.sqrt() - g1 - 1.0 / rg,
        (beta + 1.0).sqrt() + beta.sqrt() - rb,
        (beta + 1.0).sqrt() - beta.sqrt() - 1.0 / rb,
        eta.sqrt() + e1 - re,
        eta.sqrt() - e1 - 1.0 / re,
        (delta + 1.0).sqrt() + delta.sqrt() - rd,
        (delta + 1.0).sqrt() - delta.sqrt() - 1.0 / rd,
    ]
}

/// Residuals of the six squared-root expressions for 1+θ-a, 1+θ-b, 1+x-a,
/// 1+x-b, λ-x+a, λ-x+b.
pub fn hexagon_xes_residuals(lambda: f64, theta: f64, x: f64) -> [f64; 6] {
    let band = hexagon_band(lambda, theta, x);
    let (a, b) = (band.lo, band.hi);
    let l = lambda + theta;
    let p1 = (x * lambda).sqrt();
    let q1 = (theta * (1.0 + l) * (l - x)).sqrt();
    let p2 = (x * lambda * (1.0 + l)).sqrt();
    let q2 = (theta * (l - x)).sqrt();
    let p3 = (x * theta).sqrt();
    let q3 = (lambda * (l - x) * (1.0 + l)).sqrt();
    let sq = |u: f64| (u / l).powi(2);
    [
        1.0 + theta - a - sq(p1 + q1),
        1.0 + theta - b - sq(p1 - q1),
        1.0 + x - a - sq(p2 + q2),
        1.0 + x - b - sq(p2 - q2),
        lambda - x + a - sq(p3 - q3),
        lambda - x + b - sq(p3 + q3),
    ]
}

// ---------------------------------------------------------------- half-cut

pub fn halfcut_support(alpha: f64) -> f64 {
    (0.75 + alpha).sqrt()
}

pub fn halfcut_rho(z: f64, alpha: f64) -> f64 {
    let e = halfcut_support(alpha);
    let r = 4.0 * (e - z) * (e + z);
    if z < 0.0 || r <= 0.0 {
        return 0.0;
    }
    2.0 / PI * (r.sqrt() / (1.0 + 2.0 * alpha)).atan()
}

pub fn halfcut_profile(alpha: f64) -> Result<DensityProfile> {
    ScaledGeometry::HalfCut { alpha }.validate()?;
    let edge = halfcut_support(alpha);
    let band = Band { lo: 0.0, hi: edge };
    Ok(DensityProfile::new(
        "halfcut",
        (0.0, alpha + 1.0),
        vec![FrozenRegion { lo: edge, hi: alpha + 1.0, value: 0.0 }],
        vec![band],
        0.5,
        Arc::new(move |z| halfcut_rho(z, alpha)),
    ))
}

// ---------------------------------------------------------------- triangle

const TRI_EDGE: f64 = 1.0 - 0.866_025_403_784_438_6;

/// Density of exit tiles along the upper side of the triangle.
pub fn exitile(z: f64) -> f64 {
    if z < TRI_EDGE {
        return 0.0;
    }
    2.0 / PI * sqrt_clip(3.0 - 4.0 * (z - 1.0) * (z - 1.0)).atan()
}

/// Density of entering tiles along the lower side.
pub fn entertile(z: f64) -> f64 {
    if z < TRI_EDGE {
        return 1.0;
    }
    let r = sqrt_clip(3.0 - 4.0 * (z - 1.0) * (z - 1.0));
    if r == 0.0 {
        return 1.0;
    }
    2.0 / PI * (1.0 / r).atan()
}

/// Band (a, b) = (1+x)/2 ∓ sqrt(3x(2-x))/2 of the triangle sections.
pub fn triangle_band(x: f64) -> Band {
    let h = 0.5 * (3.0 * x * (2.0 - x)).max(0.0).sqrt();
    Band { lo: 0.5 * (1.0 + x) - h, hi: 0.5 * (1.0 + x) + h }
}

fn equilateral_terms(z: f64, x: f64) -> [f64; 4] {
    let band = triangle_band(x);
    let (a, b) = (band.lo, band.hi);
    let (s, _) = edge_ratio(z, a, b);
    [
        atan_sc(s, sqrt_clip((2.0 - a) / (2.0 - b))),
        atan_sc(s, sqrt_clip((1.0 + x - a) / (1.0 + x - b))),
        atan_sc(s, sqrt_clip(a / b)),
        atan_sc(s, sqrt_clip((1.0 - x + a) / (1.0 - x + b))),
    ]
}

/// Density of paths crossing the section L_x of the triangle, 0 <= z <= x.
pub fn triangle_rho(z: f64, x: f64) -> f64 {
    let band = triangle_band(x);
    if x <= TRI_EDGE {
        return 1.0;
    }
    let t = equilateral_terms(z, x);
    if x <= 0.5 {
        if z <= band.lo {
            return 1.0;
        }
        1.0 + (t[0] - t[1] + t[2] - t[3]) / PI
    } else {
        if z <= band.lo {
            return 0.0;
        }
        (t[0] + t[1] - t[2] - t[3]) / PI
    }
}

pub fn triangle_profile(x: f64) -> Result<DensityProfile> {
    ScaledGeometry::Triangle { x }.validate()?;
    let band = triangle_band(x);
    let lo = band.lo.clamp(0.0, x);
    let below = if x <= 0.5 { 1.0 } else { 0.0 };
    let bands = if lo < x { vec![Band { lo, hi: x }] } else { vec![] };
    let mass = integrate(|z| triangle_rho(z, x), 0.0, x, 1e-13)?;
    Ok(DensityProfile::new(
        "triangle",
        (0.0, x),
        vec![FrozenRegion { lo: 0.0, hi: lo, value: below }],
        bands,
        mass,
        Arc::new(move |z| triangle_rho(z, x)),
    ))
}

/// TSSCPP section density on x <= z <= (1+x)/2: the equilateral hexagon
/// density restricted to the fundamental domain.
pub fn tsscpp_rho(z: f64, x: f64) -> f64 {
    let band = hexagon_band(1.0, 1.0, x);
    if z <= band.lo {
        let (bottom, _) = hexagon_frozen(1.0, 1.0, x);
        return bottom;
    }
    if z >= band.hi {
        let (_, top) = hexagon_frozen(1.0, 1.0, x);
        return top;
    }
    hexagon_band_rho(z, 1.0, 1.0, x)
}

pub fn tsscpp_profile(x: f64) -> Result<DensityProfile> {
    ScaledGeometry::Tsscpp { x }.validate()?;
    let hi = 0.5 * (1.0 + x);
    let band = hexagon_band(1.0, 1.0, x);
    let lo_b = band.lo.clamp(x, hi);
    let mass = if hi > x { integrate(|z| tsscpp_rho(z, x), x, hi, 1e-13)? } else { 0.0 };
    let bands = if lo_b < hi { vec![Band { lo: lo_b, hi }] } else { vec![] };
    Ok(DensityProfile::new(
        "tsscpp",
        (x, hi),
        vec![FrozenRegion { lo: x, hi: lo_b, value: 1.0 }],
        bands,
        mass,
        Arc::new(move |z| tsscpp_rho(z, x)),
    ))
}

// ---------------------------------------------------------------- rate functional

fn l0(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln() - x
    }
}

/// S[ρ] = -½∫∫ln|x-y|ρ(x)ρ(y) + ∫(L0(x) + L0(λ+1-x))ρ(x), L0(x) = x ln x - x,
/// for the uniform geometry. Its Euler-Lagrange equation is
/// ⨍ρ(v)/(u-v)dv = ln(u/(λ+1-u)) on the band.
pub fn rate_functional(profile: &DensityProfile, geom: &ScaledGeometry) -> Result<f64> {
    let ScaledGeometry::Uniform { lambda } = *geom else {
        return Err(Error::Unsupported("rate functional is implemented for the uniform geometry only".into()));
    };
    geom.validate()?;
    let bands = profile.bands.clone();
    let tol = 1e-13;
    // ρ vanishes at band edges where the log kernel is infinite; 0·ln 0 := 0
    let weighted = |l: f64, y: f64| {
        let r = profile.rho(y);
        if r == 0.0 {
            0.0
        } else {
            l * r
        }
    };
    let potential = |x: f64| -> Result<f64> {
        let mut u = 0.0;
        for b in &bands {
            if x > b.lo && x < b.hi {
                u += tanh_sinh(|y, _, db| weighted(db.ln(), y), b.lo, x, tol)?;
                u += tanh_sinh(|y, da, _| weighted(da.ln(), y), x, b.hi, tol)?;
            } else {
                u += tanh_sinh(|y, _, _| weighted((x - y).abs().ln(), y), b.lo, b.hi, tol)?;
            }
        }
        Ok(u)
    };
    let mut interaction = 0.0;
    let mut external = 0.0;
    for b in &bands {
        let err = std::cell::RefCell::new(None);
        interaction += tanh_sinh(
            |x, _, _| match potential(x) {
                _ if profile.rho(x) == 0.0 => 0.0,
                Ok(u) => u * profile.rho(x),
                Err(e) => {
                    *err.borrow_mut() = Some(e);
                    0.0
                }
            },
            b.lo,
            b.hi,
            1e-11,
        )?;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        external += tanh_sinh(|x, _, _| (l0(x) + l0(lambda + 1.0 - x)) * profile.rho(x), b.lo, b.hi, tol)?;
    }
    Ok(-0.5 * interaction + external)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_examples() {
        let b = uniform_band(1.0).unwrap();
        assert!((b.lo - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((b.hi - (1.0 + 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!((uniform_rho(1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        let m = uniform_profile(5.0).unwrap().quadrature_mass().unwrap();
        assert!((m - 1.0).abs() < 1e-8);
        assert!(uniform_band(0.0).is_err());
    }

    #[test]
    fn qcut_examples() {
        let b = qcut_band(1.0, 1.0).unwrap();
        let lhs = (-b.hi).exp() + (-b.lo).exp();
        assert!((lhs - 1.0 - (-2f64).exp()).abs() < 1e-14);
        let b = qcut_band(60.0, 1.0).unwrap();
        let lim = 0.5 * (1.0 - (1.0 - (-1f64).exp()).sqrt());
        assert!(((-b.hi).exp() - lim).abs() < 1e-12);
        assert!(qcut_rho(b.lo, 60.0, 1.0).abs() < 1e-15 && qcut_rho(b.hi, 60.0, 1.0).abs() < 1e-15);
        let m = qcut_profile(2.0, 1.0).unwrap().quadrature_mass().unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{m}");
        assert!(qcut_band(1.0, 0.0).is_err());
    }

    #[test]
    fn two_corner_generic_example() {
        let s = two_corner_solution(1.0, 0.3, 1.7).unwrap();
        assert_eq!(s.regime, TwoCornerRegime::Generic);
        assert!((s.band.lo - 0.350077).abs() < 1e-6 && (s.band.hi - 1.649923).abs() < 1e-6);
        assert!((s.profile.rho(s.band.lo) - 1.0).abs() < 1e-12);
        assert!((s.profile.rho(s.band.hi) - 1.0).abs() < 1e-12);
        assert!((s.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_corner_regimes() {
        let s = two_corner_solution(2.0, 0.0, 3.0).unwrap();
        assert_eq!(s.regime, TwoCornerRegime::BothMerged);
        let s = two_corner_solution(1.0, 0.5, 1.5).unwrap();
        assert_eq!(s.regime, TwoCornerRegime::Collapsed);
        let tc = theta_c(2.0, 0.8);
        let s = two_corner_solution(2.0, 0.8, tc + 0.05).unwrap();
        assert_eq!(s.regime, TwoCornerRegime::LowerMerged);
        assert!((s.profile.rho(s.band.lo) - 1.0).abs() < 1e-12 && s.profile.rho(s.band.hi).abs() < 1e-12);
        assert!((s.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-8);
        let m = two_corner_solution(2.0, 3.0 - tc - 0.05, 2.2).unwrap();
        assert_eq!(m.regime, TwoCornerRegime::UpperMerged);
        assert!((m.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-8);
        assert!(two_corner_solution(1.0, 0.5, 1.2).is_err());
    }

    #[test]
    fn formula_collapses_on_antidiagonal() {
        let b = two_corner_generic_band(1.5, 0.3, 0.7);
        assert!((b.hi - b.lo).abs() < 1e-12);
    }

    #[test]
    fn hexagon_examples() {
        let s = hexagon_solution(1.0, 1.0, 1.0).unwrap();
        let u = uniform_band(1.0).unwrap();
        assert!((s.band.lo - u.lo).abs() < 1e-12 && (s.band.hi - u.hi).abs() < 1e-12);
        let x = hexagon_touch_points(2.0, 1.0);
        let b = hexagon_band(2.0, 1.0, x[1]);
        assert!((b.hi - (1.0 + x[1])).abs() < 1e-12);
        assert!(hexagon_band(2.0, 1.0, x[2]).lo.abs() < 1e-12);
        assert!((hexagon_band(2.0, 1.0, x[3]).hi - 2.0).abs() < 1e-12);
        assert!((hexagon_band(2.0, 1.0, x[4]).lo - (x[4] - 2.0)).abs() < 1e-12);
        let z = hexagon_solution(2.0, 1.0, 0.0).unwrap();
        assert!(z.band.width().abs() < 1e-15);
        assert!((z.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hexagon_mass_each_case() {
        for &(l, t) in &[(2.0, 1.0), (1.5, 0.2), (1.0, 1.0)] {
            let xs = hexagon_touch_points(l, t);
            for w in xs.windows(2) {
                let x = 0.5 * (w[0] + w[1]);
                let s = hexagon_solution(l, t, x).unwrap();
                let m = s.profile.quadrature_mass().unwrap();
                assert!((m - 1.0).abs() < 1e-8, "{l} {t} {x} {:?} {m}", s.case);
            }
        }
    }

    #[test]
    fn halfcut_examples() {
        assert!((halfcut_rho(0.0, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((halfcut_support(1.0) - 7f64.sqrt() / 2.0).abs() < 1e-15);
        let m = halfcut_profile(0.7).unwrap().quadrature_mass().unwrap();
        assert!((m - 0.5).abs() < 1e-8);
    }

    #[test]
    fn triangle_examples() {
        assert_eq!(triangle_rho(0.05, 0.1), 1.0);
        assert!((triangle_rho(1.0, 1.0) - 2.0 / 3.0).abs() < 1e-12);
        for i in 0..100 {
            let z = i as f64 / 99.0;
            assert!((exitile(z) - (1.0 - entertile(z))).abs() < 1e-12);
            assert!((triangle_rho(z, 1.0) - exitile(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_functional_rejects_other_geometries() {
        let p = halfcut_profile(0.0).unwrap();
        assert!(rate_functional(&p, &ScaledGeometry::HalfCut { alpha: 0.0 }).is_err());
    }
}
