//! Arctic curves and slope fields of the hexagon and the cut hexagon from the
//! complex Burgers characterization with P(z, w) = 1 + z + w.
//!
//! Coordinates: the hexagon with sides 1, λ, θ sits in the (x, y) plane with
//! edges x = 0, y = 0, y = x + λ, y = x - θ, x = 1 + θ, y = 1 + λ. The line
//! y = x + t is the slice at position λ - t of the endpoint densities, with z
//! along the slice equal to x.

use std::f64::consts::PI;

use num::complex::Complex64;

use crate::density::{hexagon_band, hexagon_solution, uniform_rho};
use crate::{Error, Result};

/// a·x + b·y = c
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Line {
    pub fn vertical(x: f64) -> Self {
        Line { a: 1.0, b: 0.0, c: x }
    }
    pub fn horizontal(y: f64) -> Self {
        Line { a: 0.0, b: 1.0, c: y }
    }
    /// y = x + t
    pub fn diagonal(t: f64) -> Self {
        Line { a: -1.0, b: 1.0, c: t }
    }
}

/// A x² + B xy + C y² + D x + E y + F = 0
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicCurve {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangency {
    pub line: Line,
    /// |β² - 4αγ| / (β² + |4αγ|) of the restriction α s² + β s + γ
    pub residual: f64,
    pub point: (f64, f64),
}

impl ConicCurve {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }

    pub fn center(&self) -> (f64, f64) {
        // gradient = 0: 2A x + B y = -D, B x + 2C y = -E
        let det = 4.0 * self.a * self.c - self.b * self.b;
        ((self.b * self.e - 2.0 * self.c * self.d) / det, (self.b * self.d - 2.0 * self.a * self.e) / det)
    }

    pub fn is_ellipse(&self) -> bool {
        let (cx, cy) = self.center();
        self.b * self.b - 4.0 * self.a * self.c < 0.0 && self.eval(cx, cy) * self.a < 0.0
    }

    /// Restriction to the line as α s² + β s + γ, with the base point and
    /// direction used.
    fn restrict(&self, l: &Line) -> ([f64; 3], (f64, f64), (f64, f64)) {
        let n2 = l.a * l.a + l.b * l.b;
        let p = (l.c * l.a / n2, l.c * l.b / n2);
        let v = (-l.b, l.a);
        let alpha = self.a * v.0 * v.0 + self.b * v.0 * v.1 + self.c * v.1 * v.1;
        let beta = 2.0 * self.a * p.0 * v.0
            + self.b * (p.0 * v.1 + p.1 * v.0)
            + 2.0 * self.c * p.1 * v.1
            + self.d * v.0
            + self.e * v.1;
        ([alpha, beta, self.eval(p.0, p.1)], p, v)
    }

    pub fn tangency(&self, l: &Line) -> Tangency {
        let ([al, be, ga], p, v) = self.restrict(l);
        let disc = be * be - 4.0 * al * ga;
        let scale = be * be + (4.0 * al * ga).abs();
        let s = -be / (2.0 * al);
        Tangency { line: *l, residual: if scale == 0.0 { 0.0 } else { disc.abs() / scale }, point: (p.0 + s * v.0, p.1 + s * v.1) }
    }

    /// Real intersections with a line, sorted by x then y.
    pub fn intersect(&self, l: &Line) -> Vec<(f64, f64)> {
        let ([al, be, ga], p, v) = self.restrict(l);
        let disc = be * be - 4.0 * al * ga;
        if disc < 0.0 {
            return vec![];
        }
        let r = disc.sqrt();
        let mut pts: Vec<(f64, f64)> =
            [(-be - r) / (2.0 * al), (-be + r) / (2.0 * al)].iter().map(|&s| (p.0 + s * v.0, p.1 + s * v.1)).collect();
        pts.sort_by(|u, w| u.0.total_cmp(&w.0).then(u.1.total_cmp(&w.1)));
        pts
    }

    /// Points on an ellipse at `n` equally spaced polar angles about its
    /// center, starting on the positive x direction.
    pub fn sample(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        if !self.is_ellipse() {
            return Err(Error::InvalidParameter("conic is not a real ellipse".into()));
        }
        let (cx, cy) = self.center();
        let f0 = self.eval(cx, cy);
        Ok((0..n)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / n as f64;
                let (u, v) = (phi.cos(), phi.sin());
                let q = self.a * u * u + self.b * u * v + self.c * v * v;
                let r = (-f0 / q).sqrt();
                (cx + r * u, cy + r * v)
            })
            .collect())
    }

    /// Largest coefficient difference after scaling both to unit Euclidean
    /// norm with the first nonzero coefficient positive.
    pub fn distance(&self, other: &ConicCurve) -> f64 {
        let norm = |c: &ConicCurve| {
            let v = [c.a, c.b, c.c, c.d, c.e, c.f];
            let lead = v.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
            let m = v.iter().map(|x| x * x).sum::<f64>().sqrt().copysign(lead);
            v.map(|x| x / m)
        };
        let (p, q) = (norm(self), norm(other));
        p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

fn check_sides(lambda: f64, theta: f64) -> Result<()> {
    if !(lambda > 0.0 && theta > 0.0 && lambda.is_finite() && theta.is_finite()) {
        return Err(Error::InvalidParameter("lambda and theta must be positive".into()));
    }
    Ok(())
}

/// The inscribed ellipse of the hexagon with sides 1, λ, θ.
pub fn hexagon_arctic(lambda: f64, theta: f64) -> Result<ConicCurve> {
    check_sides(lambda, theta)?;
    let (p, r) = (1.0 + lambda, 1.0 + theta);
    let m = 1.0 + lambda + theta;
    let n = lambda * theta;
    Ok(ConicCurve {
        a: p * p / m + p * p / n,
        b: 2.0 * p * r / m - 2.0 * p * r / n,
        c: r * r / m + r * r / n,
        d: -2.0 * p * p * r / m,
        e: -2.0 * p * r * r / m,
        f: p * p * r * r / m - p * r,
    })
}

/// The six edges of the hexagon, in the order bottom, right, upper slant,
/// top, left, lower slant.
pub fn hexagon_edges(lambda: f64, theta: f64) -> [Line; 6] {
    [
        Line::horizontal(0.0),
        Line::vertical(1.0 + theta),
        Line::diagonal(-theta),
        Line::horizontal(1.0 + lambda),
        Line::vertical(0.0),
        Line::diagonal(lambda),
    ]
}

/// The arctic curve of the hexagon obtained by doubling the cut hexagon
/// across its cut.
pub fn cuthex_arctic(lambda: f64) -> Result<ConicCurve> {
    check_sides(lambda, lambda)?;
    let l2 = lambda * lambda;
    let s = 1.0 + 2.0 * lambda;
    Ok(ConicCurve {
        a: s + l2,
        b: 2.0 * l2 - 2.0 * s,
        c: s + l2,
        d: -2.0 * l2 * (lambda + 1.0),
        e: -2.0 * l2 * (lambda + 1.0),
        f: l2 * l2,
    })
}

/// Tangency of the arctic ellipse with each hexagon edge, and the slice
/// coordinate λ - (y - x) of each touch point.
pub fn hexagon_tangencies(lambda: f64, theta: f64) -> Result<Vec<(Tangency, f64)>> {
    let c = hexagon_arctic(lambda, theta)?;
    Ok(hexagon_edges(lambda, theta)
        .iter()
        .map(|l| {
            let t = c.tangency(l);
            (t, lambda - (t.point.1 - t.point.0))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopePoint {
    pub x: f64,
    pub y: f64,
    pub z: Complex64,
    pub w: Complex64,
    pub hx: f64,
    pub hy: f64,
}

impl SlopePoint {
    /// Local density of the two tile types crossed by the paths.
    pub fn vertical_slope(&self) -> f64 {
        self.hx + self.hy
    }
}

/// Coefficients of A z² + B z + C = 0 after eliminating w = -1 - z.
pub fn slope_quadratic(x: f64, y: f64, lambda: f64, theta: f64) -> [f64; 3] {
    let d = x - y;
    [
        lambda * theta - d * d - (lambda - theta) * d,
        lambda * theta + 2.0 * d * y + (lambda - theta) * y - (1.0 + lambda) * d,
        y * (1.0 + lambda - y),
    ]
}

pub fn discriminant(x: f64, y: f64, lambda: f64, theta: f64) -> f64 {
    let [a, b, c] = slope_quadratic(x, y, lambda, theta);
    b * b - 4.0 * a * c
}

/// Slopes at an interior point of the liquid region, from the root z with
/// Im z > 0.
pub fn slope_field(x: f64, y: f64, lambda: f64, theta: f64) -> Result<SlopePoint> {
    check_sides(lambda, theta)?;
    let [a, b, c] = slope_quadratic(x, y, lambda, theta);
    let disc = b * b - 4.0 * a * c;
    if !(disc < 0.0) || a == 0.0 {
        return Err(Error::OutsideLiquid { x, y });
    }
    let im = (-disc).sqrt() / (2.0 * a.abs());
    let z = Complex64::new(-b / (2.0 * a), im);
    let w = -1.0 - z;
    let hx = (-w).arg() / PI;
    let hy = (-z.inv()).arg() / PI;
    Ok(SlopePoint { x, y, z, w, hx, hy })
}

/// Closed form of hx + hy on the line y = x + t.
pub fn slopsum(x: f64, lambda: f64, theta: f64, t: f64) -> f64 {
    let band = hexagon_band(lambda, theta, lambda - t);
    let (a, b) = (band.lo, band.hi);
    let num = (lambda + theta) * ((b - x) * (x - a)).max(0.0).sqrt();
    let den = lambda * theta - t * (1.0 + theta) + 2.0 * x * (x + t - 1.0 - 0.5 * (lambda + theta));
    num.atan2(den) / PI
}

/// Max over `grid` interior band points of |ρ - (hx + hy)| on y = x + t.
pub fn slope_density_consistency(lambda: f64, theta: f64, t: f64, grid: usize) -> Result<f64> {
    check_sides(lambda, theta)?;
    if !(-theta < t && t < lambda) {
        return Err(Error::InvalidParameter(format!("line y = x + {t} misses the liquid region")));
    }
    let s = hexagon_solution(lambda, theta, lambda - t)?;
    let (a, b) = (s.band.lo, s.band.hi);
    let mut worst = 0.0f64;
    for i in 0..grid {
        let x = a + (b - a) * (i as f64 + 0.5) / grid as f64;
        let p = slope_field(x, x + t, lambda, theta)?;
        worst = worst.max((s.profile.rho(x) - p.vertical_slope()).abs());
    }
    Ok(worst)
}

/// Max over `grid` interior points of |uniform_rho - (hx + hy)| on the cut
/// y = x of the doubled cut hexagon.
pub fn cut_diagonal_consistency(lambda: f64, grid: usize) -> Result<f64> {
    check_sides(lambda, lambda)?;
    let band = crate::density::uniform_band(lambda)?;
    let mut worst = 0.0f64;
    for i in 0..grid {
        let x = band.lo + band.width() * (i as f64 + 0.5) / grid as f64;
        let p = slope_field(x, x, lambda, lambda)?;
        worst = worst.max((uniform_rho(x, lambda) - p.vertical_slope()).abs());
    }
    Ok(worst)
}
