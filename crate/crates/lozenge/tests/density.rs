use std::f64::consts::PI;
use std::sync::Arc;

use lozenge::density::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_range(p: &DensityProfile) {
    for (z, r) in p.grid(1000) {
        assert!((-1e-12..=1.0 + 1e-12).contains(&r), "{} rho({z}) = {r}", p.tag);
    }
}

fn check_edges(p: &DensityProfile) {
    for b in &p.bands {
        for edge in [b.lo, b.hi] {
            if let Some(f) = p.frozen.iter().find(|f| (f.hi == edge || f.lo == edge) && f.hi > f.lo) {
                let r = p.rho(edge);
                assert!((r - f.value).abs() < 1e-10, "{} edge {edge}: {r} vs {}", p.tag, f.value);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn uniform_range_mass_edges(lambda in 0.05f64..8.0) {
        let p = uniform_profile(lambda).unwrap();
        check_range(&p);
        check_edges(&p);
        prop_assert!((p.quadrature_mass().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn qcut_range_mass_edges(alpha in 0.0f64..5.0, beta in 0.05f64..3.0) {
        let p = qcut_profile(alpha, beta).unwrap();
        check_range(&p);
        check_edges(&p);
        prop_assert!((p.quadrature_mass().unwrap() - beta).abs() < 1e-8);
    }

    #[test]
    fn two_corner_range_mass_edges(lambda in 0.2f64..4.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let top = lambda + 1.0;
        let nu = u * lambda;
        let theta = nu + 1.0 + v * (top - nu - 1.0);
        let s = two_corner_solution(lambda, nu, theta).unwrap();
        check_range(&s.profile);
        check_edges(&s.profile);
        prop_assert!((s.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-8, "{:?}", s.regime);
        if s.regime == TwoCornerRegime::Generic {
            prop_assert!((s.profile.rho(s.band.lo) - 1.0).abs() < 1e-10);
            prop_assert!((s.profile.rho(s.band.hi) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn hexagon_range_mass_edges(theta in 0.1f64..2.0, extra in 0.0f64..2.0, u in 0.0f64..1.0) {
        let lambda = theta + extra;
        let x = u * (lambda + theta);
        let s = hexagon_solution(lambda, theta, x).unwrap();
        check_range(&s.profile);
        check_edges(&s.profile);
        prop_assert!((s.profile.quadrature_mass().unwrap() - 1.0).abs() < 1e-8, "{:?}", s.case);
    }

    #[test]
    fn halfcut_range_mass(alpha in 0.0f64..5.0) {
        let p = halfcut_profile(alpha).unwrap();
        check_range(&p);
        check_edges(&p);
        prop_assert!((p.quadrature_mass().unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn triangle_and_tsscpp_range(x in 0.0f64..1.0) {
        check_range(&triangle_profile(x).unwrap());
        check_range(&tsscpp_profile(x).unwrap());
    }

    #[test]
    fn minmax_and_xes(theta in 0.1f64..3.0, extra in 0.0f64..3.0, u in 0.01f64..0.99) {
        let lambda = theta + extra;
        let x = u * (lambda + theta);
        for r in hexagon_minmax_residuals(lambda, theta, x) {
            prop_assert!(r.abs() < 1e-10, "{r}");
        }
        for r in hexagon_xes_residuals(lambda, theta, x) {
            prop_assert!(r.abs() < 1e-10, "{r}");
        }
    }
}

#[test]
fn two_corner_tends_to_uniform() {
    for &lambda in &[0.5, 1.0, 3.0] {
        let s = two_corner_solution(lambda, 1e-9, lambda + 1.0).unwrap();
        assert_eq!(s.regime, TwoCornerRegime::BothMerged);
        for (z, r) in s.profile.grid(500) {
            assert!((r - uniform_rho(z, lambda)).abs() < 1e-8);
        }
    }
}

#[test]
fn generic_regime_approaches_merged_continuously() {
    let (lambda, nu) = (2.0, 0.8);
    let tc = theta_c(lambda, nu);
    let g = two_corner_solution(lambda, nu, tc - 1e-9).unwrap();
    let m = two_corner_solution(lambda, nu, tc).unwrap();
    assert_eq!(g.regime, TwoCornerRegime::Generic);
    assert_eq!(m.regime, TwoCornerRegime::LowerMerged);
    assert!((g.band.lo - m.band.lo).abs() < 1e-6 && (g.band.hi - m.band.hi).abs() < 1e-6);
}

#[test]
fn hexagon_symmetric_band_is_uniform() {
    for &lambda in &[0.3, 1.0, 2.5, 7.0] {
        let h = hexagon_band(lambda, lambda, lambda);
        let u = uniform_band(lambda).unwrap();
        assert!((h.lo - u.lo).abs() < 1e-12 && (h.hi - u.hi).abs() < 1e-12);
        let s = hexagon_solution(lambda, lambda, lambda).unwrap();
        for i in 1..100 {
            let z = u.lo + u.width() * i as f64 / 100.0;
            assert!((s.profile.rho(z) - uniform_rho(z, lambda)).abs() < 1e-12);
        }
    }
}

#[test]
fn qcut_small_beta_is_uniform() {
    let beta = 1e-4;
    for &lambda in &[1.0, 2.0] {
        let b = qcut_band(lambda * beta, beta).unwrap();
        let u = uniform_band(lambda).unwrap();
        assert!((b.lo / beta - u.lo).abs() < 1e-3 && (b.hi / beta - u.hi).abs() < 1e-3);
        for i in 0..=100 {
            let t = (lambda + 1.0) * i as f64 / 100.0;
            let r = qcut_rho(t * beta, lambda * beta, beta);
            assert!((r - uniform_rho(t, lambda)).abs() < 1e-3, "{t} {r}");
        }
    }
}

#[test]
fn qcut_at_zero_alpha_is_packed() {
    let b = qcut_band(0.0, 1.5).unwrap();
    assert!(b.lo.abs() < 1e-15 && (b.hi - 1.5).abs() < 1e-12);
    assert_eq!(qcut_rho(0.7, 0.0, 1.5), 1.0);
}

#[test]
fn halfcut_reflection() {
    let alpha = 0.5;
    let lambda = 2.0 * alpha + 1.0;
    for i in 0..100 {
        let z = 1.2 * i as f64 / 99.0;
        assert!((uniform_rho(z + alpha + 1.0, lambda) - halfcut_rho(z, alpha)).abs() < 1e-12);
    }
}

#[test]
fn hexagon_reflection_symmetry() {
    for &(lambda, x) in &[(1.0, 0.3), (2.0, 0.7), (1.5, 2.2)] {
        let theta = lambda;
        let l = lambda + theta;
        let p = hexagon_solution(lambda, theta, x).unwrap().profile;
        let q = hexagon_solution(lambda, theta, l - x).unwrap().profile;
        for i in 0..200 {
            let z = p.support.0 + (p.support.1 - p.support.0) * i as f64 / 199.0;
            let zr = 1.0 + theta - z;
            if z < p.support.0 || z > p.support.1 || zr < q.support.0 || zr > q.support.1 {
                continue;
            }
            assert!((p.rho(z) - q.rho(zr)).abs() < 1e-10, "{lambda} {x} {z}");
        }
    }
}

#[test]
fn hexagon_case_tags() {
    let (l, t) = (2.0, 1.0);
    let xs = hexagon_touch_points(l, t);
    let tags: Vec<_> = xs.windows(2).map(|w| hexagon_solution(l, t, 0.5 * (w[0] + w[1])).unwrap().case).collect();
    assert_eq!(
        tags,
        vec![HexagonCase::I, HexagonCase::II, HexagonCase::III, HexagonCase::IV, HexagonCase::V]
    );
}

#[test]
fn triangle_branches_match_hexagon() {
    for i in 0..50 {
        let x = 0.14 + 0.86 * i as f64 / 49.0;
        let h = hexagon_solution(1.0, 1.0, x).unwrap().profile;
        for j in 0..50 {
            let z = x * j as f64 / 49.0;
            assert!((triangle_rho(z, x) - h.rho(z)).abs() < 1e-12, "{x} {z}");
        }
    }
}

#[test]
fn tsscpp_diagonal_is_mean_of_entertile() {
    for i in 0..50 {
        let x = i as f64 / 49.0;
        assert!((tsscpp_rho(x, x) - 0.5 * (1.0 + entertile(x))).abs() < 1e-12, "{x}");
    }
}

#[test]
fn rate_functional_is_minimal_at_uniform() {
    let geom = ScaledGeometry::Uniform { lambda: 1.0 };
    let star = uniform_profile(1.0).unwrap();
    let s0 = rate_functional(&star, &geom).unwrap();
    let s0b = rate_functional(&star, &geom).unwrap();
    assert!((s0 - s0b).abs() < 1e-9);
    let band = star.bands[0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let freq = rng.random_range(1.0..4.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let (lo, w) = (band.lo, band.width());
        let g: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |z| (freq * PI * (z - lo) / w + phase).sin());
        let plus = star.perturbed(g.clone(), 0.01).unwrap();
        let minus = star.perturbed(g, -0.01).unwrap();
        assert!((plus.quadrature_mass().unwrap() - 1.0).abs() < 1e-8);
        let sp = rate_functional(&plus, &geom).unwrap();
        let sm = rate_functional(&minus, &geom).unwrap();
        assert!(sp > s0 && sm > s0, "{s0} {sp} {sm}");
        assert!(sp + sm - 2.0 * s0 > 0.0);
    }
}
