use lozenge::arctic::*;
use lozenge::density::{hexagon_solution, hexagon_touch_points, uniform_band};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn regular_hexagon_tangent_to_left_edge() {
    let c = hexagon_arctic(1.0, 1.0).unwrap();
    assert!(c.tangency(&Line::vertical(0.0)).residual < 1e-10);
    assert!(c.is_ellipse());
}

#[test]
fn touch_points_are_the_case_boundaries() {
    let (l, t) = (2.0, 1.0);
    let mut slices: Vec<f64> = hexagon_tangencies(l, t).unwrap().iter().map(|(_, s)| *s).collect();
    slices.sort_by(f64::total_cmp);
    for (s, x) in slices.iter().zip(hexagon_touch_points(l, t)) {
        assert!((s - x).abs() < 1e-10, "{s} {x}");
    }
}

#[test]
fn symmetric_hexagon_is_symmetric_and_matches_cut_conic() {
    for &l in &[0.4, 1.0, 3.0] {
        let c = hexagon_arctic(l, l).unwrap();
        assert!((c.a - c.c).abs() < 1e-12 && (c.d - c.e).abs() < 1e-12);
        assert!(c.distance(&cuthex_arctic(l).unwrap()) < 1e-12);
    }
}

#[test]
fn cut_conic_examples() {
    let c = cuthex_arctic(1.0).unwrap();
    let p = c.intersect(&Line::diagonal(0.0));
    let h = 3f64.sqrt() / 2.0;
    assert!((p[0].0 - (1.0 - h)).abs() < 1e-12 && (p[1].0 - (1.0 + h)).abs() < 1e-12);
    for &l in &[0.5, 1.0, 3.0] {
        let c = cuthex_arctic(l).unwrap();
        assert!(c.tangency(&Line::horizontal(0.0)).residual < 1e-10);
        assert!(c.tangency(&Line::horizontal(l + 1.0)).residual < 1e-10);
    }
    let b = uniform_band(3.0).unwrap();
    let p = cuthex_arctic(3.0).unwrap().intersect(&Line::diagonal(0.0));
    assert!((p[0].0 - b.lo).abs() < 1e-12 && (p[1].0 - b.hi).abs() < 1e-12);
}

#[test]
fn regular_center_has_equal_slopes() {
    let p = slope_field(1.0, 1.0, 1.0, 1.0).unwrap();
    assert!((p.hx - 1.0 / 3.0).abs() < 1e-14 && (p.hy - 1.0 / 3.0).abs() < 1e-14);
    assert!((p.hx - 3f64.sqrt().atan() / std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn slope_sum_matches_closed_form() {
    let (l, th, t) = (2.0, 1.0, 0.3);
    let s = hexagon_solution(l, th, l - t).unwrap();
    for i in 0..50 {
        let x = s.band.lo + s.band.width() * (i as f64 + 0.5) / 50.0;
        let p = slope_field(x, x + t, l, th).unwrap();
        assert!((p.vertical_slope() - slopsum(x, l, th, t)).abs() < 1e-10);
    }
}

#[test]
fn slopes_approach_adjacent_frozen_phase() {
    let (l, th) = (2.0, 1.0);
    let xs = hexagon_touch_points(l, th);
    for w in xs.windows(2) {
        let slice = 0.5 * (w[0] + w[1]);
        let t = l - slice;
        let s = hexagon_solution(l, th, slice).unwrap();
        let d = 1e-9 * s.band.width();
        let near_lo = slope_field(s.band.lo + d, s.band.lo + d + t, l, th).unwrap().vertical_slope();
        let near_hi = slope_field(s.band.hi - d, s.band.hi - d + t, l, th).unwrap().vertical_slope();
        assert!((near_lo - s.bottom).abs() < 1e-3, "{:?} {near_lo} {}", s.case, s.bottom);
        assert!((near_hi - s.top).abs() < 1e-3, "{:?} {near_hi} {}", s.case, s.top);
    }
}

#[test]
fn density_consistency_examples() {
    assert!(slope_density_consistency(1.0, 1.0, 0.0, 50).unwrap() < 1e-8);
    let (l, th) = (2.0, 1.0);
    let (lo, hi) = (l / (1.0 + th) - th, l * th / (1.0 + th));
    for i in 1..10 {
        let t = lo + (hi - lo) * i as f64 / 10.0;
        let s = hexagon_solution(l, th, l - t).unwrap();
        assert_eq!(s.case, lozenge::density::HexagonCase::III);
        assert!(slope_density_consistency(l, th, t, 50).unwrap() < 1e-8);
    }
    assert!(cut_diagonal_consistency(1.0, 50).unwrap() < 1e-8);
    assert!(slope_density_consistency(1.0, 1.0, 1.5, 50).is_err());
}

#[test]
fn density_consistency_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        // the slice densities are parametrized with λ ≥ θ
        let th: f64 = rng.random_range(0.2..3.0);
        let l: f64 = th + rng.random_range(0.0..2.0);
        let t = rng.random_range(-th * 0.98..l * 0.98);
        let dev = slope_density_consistency(l, th, t, 50).unwrap();
        assert!(dev < 1e-8, "{l} {th} {t}: {dev}");
    }
}

#[test]
fn discriminant_sign_matches_ellipse() {
    let (l, th) = (2.0, 1.0);
    let c = hexagon_arctic(l, th).unwrap();
    let n = 200;
    for i in 0..n {
        for j in 0..n {
            let x = -0.5 + (2.0 + th) * i as f64 / (n - 1) as f64;
            let y = -0.5 + (2.0 + l) * j as f64 / (n - 1) as f64;
            let e = c.eval(x, y);
            let d = discriminant(x, y, l, th);
            if e.abs() > 1e-12 {
                assert_eq!(e < 0.0, d < 0.0, "({x}, {y}) {e} {d}");
            }
        }
    }
    for (x, y) in c.sample(64).unwrap() {
        assert!(discriminant(x, y, l, th).abs() < 1e-10);
    }
}

#[test]
fn root_branch_is_continuous_along_walks() {
    let (l, th) = (1.5, 0.8);
    let c = hexagon_arctic(l, th).unwrap();
    let (cx, cy) = c.center();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let (mut x, mut y) = (cx, cy);
        let mut prev = slope_field(x, y, l, th).unwrap().z;
        let h = 2e-3;
        for _ in 0..1000 {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (nx, ny) = (x + h * phi.cos(), y + h * phi.sin());
            // stay well inside so the root stays separated from the real axis
            if c.eval(nx, ny) > 0.5 * c.eval(cx, cy) {
                continue;
            }
            let z = slope_field(nx, ny, l, th).unwrap().z;
            assert!((z - prev).norm() < 0.05, "{z} {prev}");
            assert!(z.im > 0.0);
            prev = z;
            x = nx;
            y = ny;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tangent_to_all_edges(l in 0.05f64..6.0, th in 0.05f64..6.0) {
        let c = hexagon_arctic(l, th).unwrap();
        prop_assert!(c.is_ellipse());
        for e in hexagon_edges(l, th) {
            prop_assert!(c.tangency(&e).residual < 1e-10, "{:?}", e);
        }
    }

    #[test]
    fn slopes_are_tile_fractions(l in 0.1f64..4.0, th in 0.1f64..4.0, u in 0.0f64..1.0, v in 0.01f64..0.99) {
        let t = -th + (l + th) * (0.01 + 0.98 * u);
        let b = lozenge::density::hexagon_band(l, th, l - t);
        let x = b.lo + b.width() * v;
        let p = slope_field(x, x + t, l, th).unwrap();
        prop_assert!(p.hx >= 0.0 && p.hy >= 0.0 && p.hx + p.hy <= 1.0);
        prop_assert!((1.0 + p.z + p.w).norm() == 0.0);
    }
}
