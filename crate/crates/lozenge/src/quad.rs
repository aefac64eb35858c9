//! Quadrature rules: adaptive Gauss-Kronrod for smooth integrands,
//! tanh-sinh for endpoint singularities, Gauss-Chebyshev for the
//! arcsine-weighted and principal-value integrals.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) with global bisection of the worst interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_error(&f, a, b, tol).map(|(v, _)| v)
}

pub fn integrate_with_error<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut parts = vec![(a, b, gk15(f, a, b))];
    let max_parts = 4000;
    loop {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= tol.max(4.0 * f64::EPSILON * total.abs()) {
            return Ok((total, err));
        }
        if parts.len() >= max_parts || !err.is_finite() {
            return Err(Error::Quadrature { error: err, evaluations: parts.len() * 15 });
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature { error: err, evaluations: parts.len() * 15 });
        }
        parts.push((lo, mid, gk15(f, lo, mid)));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
}

/// Integral over [a, b] split at the given interior breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let n = (pts.len() - 1) as f64;
    pts.windows(2).map(|w| integrate(&f, w[0], w[1], tol / n)).sum()
}

/// Integral over a band [a, b] whose integrand behaves like a square root at
/// both ends: the change u = a + (b - a) sin²φ makes it smooth.
pub fn integrate_sqrt_edges<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let w = b - a;
    integrate(
        |phi: f64| {
            let s = phi.sin();
            let u = a + w * s * s;
            f(u) * w * (2.0 * phi).sin()
        },
        0.0,
        FRAC_PI_2,
        tol,
    )
}

/// A tanh-sinh node on [-1, 1]: abscissa, distances to -1 and +1, weight.
#[derive(Debug, Clone, Copy)]
pub struct TsNode {
    pub x: f64,
    pub to_lo: f64,
    pub to_hi: f64,
    pub w: f64,
}

/// Fixed tanh-sinh rule with step 2^-level.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    pub level: u32,
    pub nodes: Vec<TsNode>,
}

const TS_TMAX: f64 = 4.5;

impl TanhSinh {
    pub fn new(level: u32) -> Self {
        let h = 0.5f64.powi(level as i32);
        let kmax = (TS_TMAX / h).ceil() as i64;
        let mut nodes = Vec::with_capacity(2 * kmax as usize + 1);
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let ch = u.cosh();
            let w = h * FRAC_PI_2 * t.cosh() / (ch * ch);
            // 1 - tanh|u| = 2 / (1 + e^{2|u|})
            let e = (-2.0 * u.abs()).exp();
            let small = 2.0 * e / (1.0 + e);
            let big = 2.0 - small;
            let (to_lo, to_hi) = if u >= 0.0 { (big, small) } else { (small, big) };
            if w == 0.0 || small == 0.0 {
                continue;
            }
            nodes.push(TsNode { x: u.tanh(), to_lo, to_hi, w });
        }
        TanhSinh { level, nodes }
    }

    /// ∫_a^b f, with f receiving (x, x - a, b - x).
    pub fn integrate<F: FnMut(f64, f64, f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mut s = 0.0;
        for nd in &self.nodes {
            let da = half * nd.to_lo;
            let db = half * nd.to_hi;
            let x = if nd.x < 0.0 { a + da } else { b - db };
            let v = f(x.clamp(a.min(b), a.max(b)), da, db);
            s += nd.w * v;
        }
        s * half
    }
}

/// Tanh-sinh with level doubling until two estimates agree within `tol`.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut prev = TanhSinh::new(2).integrate(a, b, &f);
    for level in 3..=9 {
        let cur = TanhSinh::new(level).integrate(a, b, &f);
        let diff = (cur - prev).abs();
        if diff <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    let cur = TanhSinh::new(10).integrate(a, b, &f);
    let diff = (cur - prev).abs();
    if diff <= tol * cur.abs().max(1.0) {
        Ok(cur)
    } else {
        Err(Error::Quadrature { error: diff, evaluations: TanhSinh::new(10).nodes.len() })
    }
}

/// Gauss-Chebyshev (first kind) nodes in [a, b] for the weight
/// 1/sqrt((v-a)(b-v)); every weight equals π/n.
pub fn chebyshev_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (1..=n).map(|j| c - h * ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

/// ∫_a^b f(v) / sqrt((v-a)(b-v)) dv by Gauss-Chebyshev, doubling to
/// convergence.
pub fn chebyshev_weighted<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut n = 16;
    let eval = |n: usize| chebyshev_nodes(a, b, n).into_iter().map(&f).sum::<f64>() * PI / n as f64;
    let mut prev = eval(n);
    while n < 1 << 16 {
        n *= 2;
        let cur = eval(n);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature { error: f64::NAN, evaluations: n })
}

/// Principal value ⨍_a^b f(v) / (p - v) dv for smooth f. Inside the interval
/// the pole is removed by subtracting f(p), whose principal value is
/// ln((p - a)/(b - p)); the remainder is a smooth difference quotient.
pub fn pv_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pole: f64, tol: f64) -> Result<f64> {
    if pole <= a || pole >= b {
        if pole == a || pole == b {
            return Err(Error::InvalidParameter("pole on an endpoint".into()));
        }
        return integrate(|v| f(v) / (pole - v), a, b, tol);
    }
    let fp = f(pole);
    let step = 1e-5 * (b - a);
    let dfp = (f(pole + step) - f(pole - step)) / (2.0 * step);
    let q = |v: f64| {
        let d = pole - v;
        if d.abs() < 1e-9 * (b - a) {
            -dfp
        } else {
            (f(v) - fp) / d
        }
    };
    let smooth = integrate(&q, a, pole, tol / 2.0)? + integrate(&q, pole, b, tol / 2.0)?;
    Ok(smooth + fp * ((pole - a) / (b - pole)).ln())
}

/// Principal value ⨍_a^b f(v) / (sqrt((v-a)(b-v)) (p - v)) dv by
/// Gauss-Chebyshev with singularity subtraction. The weighted Hilbert
/// transform of a constant vanishes inside the band and equals
/// π/sqrt((p-a)(p-b)) (signed) outside.
pub fn pv_chebyshev<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pole: f64, tol: f64) -> Result<f64> {
    let fp = f(pole);
    let inside = pole > a && pole < b;
    let base = if inside {
        0.0
    } else {
        let r = ((pole - a) * (pole - b)).sqrt();
        if pole >= b {
            PI / r
        } else {
            -PI / r
        }
    };
    let step = 1e-5 * (b - a);
    let dfp = (f(pole + step) - f(pole - step)) / (2.0 * step);
    let q = |v: f64| {
        let d = pole - v;
        if d.abs() < 1e-10 * (b - a) {
            -dfp
        } else {
            (f(v) - fp) / d
        }
    };
    Ok(chebyshev_weighted(q, a, b, tol)? + fp * base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_and_exp() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-13).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate(f64::exp, 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn sqrt_edges_semicircle() {
        let v = integrate_sqrt_edges(|x| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-14).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_log_and_inverse_sqrt() {
        let v = tanh_sinh(|_, da, _| da.ln(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        let v = tanh_sinh(|_, da, db| 1.0 / (da * db).sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - PI).abs() < 1e-12);
    }

    #[test]
    fn pv_odd_kernel_vanishes() {
        let v = pv_integral(|_| 1.0, -1.0, 1.0, 0.0, 1e-13).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn pv_chebyshev_closed_form() {
        // ⨍_0^1 du / ((w-u)(β+u) sqrt(u(1-u))) = π / ((β+w) sqrt(β(β+1)))
        for &(w, beta) in &[(0.3, 1.0), (0.7, 0.25), (0.05, 3.0)] {
            let v = pv_chebyshev(|u| 1.0 / (beta + u), 0.0, 1.0, w, 1e-15).unwrap();
            let exact = PI / ((beta + w) * (beta * (beta + 1.0)).sqrt());
            assert!(((v - exact) / exact).abs() < 1e-10, "{v} {exact}");
        }
    }

    #[test]
    fn pv_smooth_matches_log_formula() {
        // ⨍_0^1 v/(p-v) dv = -1 + p ln(p/(1-p))
        let p = 0.37;
        let v = pv_integral(|v| v, 0.0, 1.0, p, 1e-13).unwrap();
        assert!((v - (-1.0 + p * (p / (1.0 - p)).ln())).abs() < 1e-12);
    }
}
