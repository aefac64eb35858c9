//! Cross-validation suite. Every check compares two independent routes to the
//! same quantity (determinant vs product vs brute force, chain vs exact law,
//! closed form vs numerical solver, density vs Burgers slopes) and records
//! the measured deviation next to its tolerance.

use std::time::Instant;

use num::traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arctic::{cut_diagonal_consistency, cuthex_arctic, hexagon_arctic, hexagon_edges, slope_density_consistency, Line};
use crate::density::*;
use crate::enumeration::*;
use crate::exact::{int, rat, ExactRational};
use crate::resolvent::{kernel_identities_check, solve, ResolventProblem};
use crate::sampler::*;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when measured <= tolerance.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), passed: measured <= tolerance, measured, tolerance, detail: String::new() }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn failed(name: &str, err: crate::Error) -> Self {
        Check { name: name.into(), passed: false, measured: f64::NAN, tolerance: 0.0, detail: err.to_string() }
    }
}

/// A named group of checks with its wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl Section {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.sections.iter().flat_map(|s| &s.checks)
    }

    pub fn passed(&self) -> bool {
        self.sections.iter().all(Section::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Effort {
    /// Reduced sizes, a few seconds in total.
    Quick,
    /// The full-size acceptance parameters.
    Full,
}

fn timed(name: &str, f: impl FnOnce() -> Vec<Check>) -> Section {
    let t = Instant::now();
    let checks = f();
    Section { name: name.into(), checks, seconds: t.elapsed().as_secs_f64() }
}

fn q_set() -> Vec<ExactRational> {
    vec![int(1), int(2), rat(1, 2), rat(5, 3)]
}

fn or_fail(name: &str, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| Check::failed(name, e))
}

/// Determinant, product formula and path enumeration agree exactly.
pub fn exact_identities(max_k: usize, max_n: usize) -> Vec<Check> {
    let run = || -> Result<(usize, usize, usize)> {
        let (mut total, mut product_mismatch, mut brute_mismatch) = (0, 0, 0);
        for q in q_set() {
            for k in 1..=max_k {
                for n in 1..=max_n {
                    let r = RegionSpec::cut_hexagon(k, n, q.clone())?;
                    for m in all_configs(&r)? {
                        let d = z_det(&r, &m)?;
                        total += 1;
                        product_mismatch += (d != z_product(&r, &m)?) as usize;
                        brute_mismatch += (d != brute_force_z(&r, &m)?) as usize;
                    }
                }
            }
        }
        for k in 1..=max_k {
            for n in 1..=max_n {
                let r = RegionSpec::half_cut_hexagon(k, n)?;
                for m in all_configs(&r)? {
                    let d = z_det(&r, &m)?;
                    total += 1;
                    product_mismatch += (d != z_product(&r, &m)?) as usize;
                    brute_mismatch += (d != brute_force_z(&r, &m)?) as usize;
                }
            }
        }
        Ok((total, product_mismatch, brute_mismatch))
    };
    match run() {
        Ok((total, p, b)) => vec![
            Check::at_most("determinant = product formula", p as f64, 0.0)
                .with_detail(format!("{p} mismatches over {total} configurations")),
            Check::at_most("determinant = path enumeration", b as f64, 0.0)
                .with_detail(format!("{b} mismatches over {total} configurations")),
        ],
        Err(e) => vec![Check::failed("exact identities", e)],
    }
}

/// Z(m | 1/q) = q^s Z(m̄ | q) with the calibrated exponent.
pub fn q_symmetry(max_k: usize, max_n: usize) -> Vec<Check> {
    let run = || -> Result<Vec<Check>> {
        let mut nonzero = 0usize;
        let mut total = 0usize;
        for q in q_set() {
            for k in 1..=max_k {
                for n in 1..=max_n {
                    let r = RegionSpec::cut_hexagon(k, n, q.clone())?;
                    for m in all_configs(&r)? {
                        total += 1;
                        nonzero += !q_symmetry_residual(&r, &m)?.is_zero() as usize;
                    }
                }
            }
        }
        let cal = calibrate_symmetry_exponent(max_k, max_n, &int(2))?;
        Ok(vec![
            Check::at_most("q-symmetry residual", nonzero as f64, 0.0)
                .with_detail(format!("{nonzero} nonzero residuals over {total} configurations")),
            Check {
                name: "symmetry exponent calibration".into(),
                passed: cal.calibrated_matches && cal.fit_exact,
                measured: cal.printed_matches as u8 as f64,
                tolerance: 0.0,
                detail: cal.summary(),
            },
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("q-symmetry", e)])
}

/// Long chains reproduce the enumerated law in total variation.
pub fn sampler_vs_exact(steps: u64, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for (k, n) in [(2usize, 3usize), (3, 3)] {
        for q in [int(1), int(2)] {
            let name = format!("chain TV k={k} n={n} q={q}");
            out.push(or_fail(&name, (|| {
                let r = RegionSpec::cut_hexagon(k, n, q.clone())?;
                let dist = exact_distribution(&r)?;
                let f = config_frequencies(mcmc_run(&r, steps, default_burnin(steps), seed)?);
                Ok(Check::at_most(&name, tv_distance(&dist, &f), 0.01).with_detail(format!("{steps} steps")))
            })()));
        }
    }
    out
}

/// Endpoint histogram of a large uniform cut hexagon against the limit.
pub fn finite_size_limit(k: usize, steps: u64, seed: u64, tolerance: f64) -> Vec<Check> {
    let name = format!("histogram L1 k=n={k}");
    vec![or_fail(&name, (|| {
        let r = RegionSpec::cut_hexagon(k, k, int(1))?;
        let (counts, chain) = mcmc_site_counts(&r, steps, default_burnin(steps), seed)?;
        let bins = default_bins(2 * k, counts.samples);
        let h = histogram_from_counts(&counts, bins, 1.0 / k as f64)?;
        let p = uniform_profile(1.0)?;
        let mut err = None;
        let l1 = h.l1_distance(|a, b| {
            p.cell_average(a, b).unwrap_or_else(|e| {
                err = Some(e);
                f64::NAN
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(Check::at_most(&name, l1, tolerance).with_detail(format!(
            "{steps} steps, {bins} bins, acceptance {:.3}, max log-weight drift {:.1e}",
            chain.acceptance_rate(),
            chain.max_drift()
        )))
    })())]
}

#[derive(Default)]
struct FamilyStats {
    mass: f64,
    range: f64,
    edge: f64,
}

impl FamilyStats {
    fn add(&mut self, p: &DensityProfile, mass: f64, edges: &[(f64, f64)]) -> Result<()> {
        self.mass = self.mass.max((p.quadrature_mass()? - mass).abs());
        for (_, r) in p.grid(400) {
            self.range = self.range.max(-r).max(r - 1.0);
        }
        for &(z, v) in edges {
            self.edge = self.edge.max((p.rho(z) - v).abs());
        }
        Ok(())
    }

    fn checks(&self, family: &str) -> Vec<Check> {
        vec![
            Check::at_most(&format!("{family}: mass"), self.mass, 1e-8),
            Check::at_most(&format!("{family}: range [0, 1]"), self.range.max(0.0), 1e-12),
            Check::at_most(&format!("{family}: band-edge values"), self.edge, 1e-10),
        ]
    }
}

/// Mass, range and band-edge values of every closed-form family on random
/// parameter draws.
pub fn density_suite(draws: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut family = |name: &str, f: &mut dyn FnMut(&mut ChaCha8Rng, &mut FamilyStats) -> Result<()>| {
        let mut st = FamilyStats::default();
        match (0..draws).try_for_each(|_| f(&mut rng, &mut st)) {
            Ok(()) => out.extend(st.checks(name)),
            Err(e) => out.push(Check::failed(name, e)),
        }
    };
    family("uniform", &mut |rng, st| {
        let p = uniform_profile(rng.random_range(0.05..8.0))?;
        let b = p.bands[0];
        st.add(&p, 1.0, &[(b.lo, 0.0), (b.hi, 0.0)])
    });
    family("q-cut", &mut |rng, st| {
        let beta = rng.random_range(0.05..3.0);
        let p = qcut_profile(rng.random_range(0.0..5.0), beta)?;
        st.add(&p, beta, &[])
    });
    family("two-corner", &mut |rng, st| {
        let lambda = rng.random_range(0.2..4.0);
        let nu = rng.random_range(0.0..1.0) * lambda;
        let theta = nu + 1.0 + rng.random_range(0.0..1.0) * (lambda - nu);
        let s = two_corner_solution(lambda, nu, theta)?;
        let edges = if s.regime == TwoCornerRegime::Generic { vec![(s.band.lo, 1.0), (s.band.hi, 1.0)] } else { vec![] };
        st.add(&s.profile, 1.0, &edges)
    });
    family("hexagon", &mut |rng, st| {
        let theta = rng.random_range(0.1..2.0);
        let lambda = theta + rng.random_range(0.0..2.0);
        let s = hexagon_solution(lambda, theta, rng.random_range(0.0..1.0) * (lambda + theta))?;
        st.add(&s.profile, 1.0, &[(s.band.lo, s.bottom), (s.band.hi, s.top)])
    });
    family("half-cut", &mut |rng, st| {
        let p = halfcut_profile(rng.random_range(0.0..5.0))?;
        let b = p.bands[0];
        st.add(&p, 0.5, &[(b.hi, 0.0)])
    });
    out
}

/// Limits connecting the families.
pub fn degenerations() -> Vec<Check> {
    let run = || -> Result<Vec<Check>> {
        let mut two_corner = 0.0f64;
        for &lambda in &[0.5, 1.0, 3.0] {
            let s = two_corner_solution(lambda, 1e-9, lambda + 1.0)?;
            for (z, r) in s.profile.grid(500) {
                two_corner = two_corner.max((r - uniform_rho(z, lambda)).abs());
            }
        }
        let mut hex = 0.0f64;
        for &lambda in &[0.3, 1.0, 2.5, 7.0] {
            let h = hexagon_band(lambda, lambda, lambda);
            let u = uniform_band(lambda)?;
            hex = hex.max((h.lo - u.lo).abs()).max((h.hi - u.hi).abs());
        }
        let beta = 1e-4;
        let mut qcut = 0.0f64;
        for &lambda in &[1.0, 2.0] {
            for i in 0..=200 {
                let t = (lambda + 1.0) * i as f64 / 200.0;
                qcut = qcut.max((qcut_rho(t * beta, lambda * beta, beta) - uniform_rho(t, lambda)).abs());
            }
        }
        let mut half = 0.0f64;
        for &alpha in &[0.0, 0.5, 2.0] {
            let lambda = 2.0 * alpha + 1.0;
            for i in 0..200 {
                let z = 1.1 * halfcut_support(alpha) * i as f64 / 199.0;
                half = half.max((uniform_rho(z + alpha + 1.0, lambda) - halfcut_rho(z, alpha)).abs());
            }
        }
        Ok(vec![
            Check::at_most("two-corner -> uniform", two_corner, 1e-8),
            Check::at_most("hexagon(λ,λ,λ) band = uniform band", hex, 1e-12),
            Check::at_most("q-cut β -> 0 -> uniform", qcut, 1e-3),
            Check::at_most("half-cut reflection", half, 1e-12),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("degenerations", e)])
}

/// Numerical solver against the two-corner closed forms, and the kernel
/// identities behind them.
pub fn resolvent_vs_closed_forms(configs: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut edge, mut dens, mut failures) = (0.0f64, 0.0f64, Vec::new());
    for _ in 0..configs {
        let lambda: f64 = rng.random_range(0.5..3.0);
        let nu = rng.random_range(0.0..0.9) * lambda;
        // keep away from the zero-width collapse θ - ν = 1
        let theta = nu + 1.05 + rng.random_range(0.0..1.0) * (lambda - nu - 0.05);
        let r = (|| -> Result<(f64, f64)> {
            let closed = two_corner_solution(lambda, nu, theta)?;
            let s = solve(&ResolventProblem::two_corner(lambda, nu, theta)?, 24)?;
            if !s.converged || s.bands.len() != 1 {
                return Err(crate::Error::NoConvergence { residual: s.residuals.iter().fold(0.0, |m, r| m.max(r.abs())), iterations: s.iterations });
            }
            let b = s.bands[0];
            let e = (b.lo - closed.band.lo).abs().max((b.hi - closed.band.hi).abs());
            let d = s.density_grid[0].iter().map(|&(u, r)| (r - closed.profile.rho(u)).abs()).fold(0.0, f64::max);
            Ok((e, d))
        })();
        match r {
            Ok((e, d)) => {
                edge = edge.max(e);
                dens = dens.max(d);
            }
            Err(e) => failures.push(format!("({lambda:.4}, {nu:.4}, {theta:.4}): {e}")),
        }
    }
    let mut out = vec![
        Check::at_most("resolvent band endpoints", if failures.is_empty() { edge } else { f64::INFINITY }, 1e-6)
            .with_detail(format!("{configs} random two-corner layouts; {}", if failures.is_empty() { "all converged".to_string() } else { failures.join("; ") })),
        Check::at_most("resolvent density", if failures.is_empty() { dens } else { f64::INFINITY }, 1e-4),
    ];
    match kernel_identities_check(seed) {
        Ok(k) => out.extend(k.checks.iter().map(|c| {
            Check::at_most(&format!("kernel identity {}", c.name), c.max_residual, 1e-9).with_detail(format!("{} samples", c.samples))
        })),
        Err(e) => out.push(Check::failed("kernel identities", e)),
    }
    out
}

/// Slice densities against the Burgers slopes, and tangency of the arctic
/// curves.
pub fn burgers_consistency(lines: usize, seed: u64) -> Vec<Check> {
    let run = || -> Result<Vec<Check>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dev = 0.0f64;
        for _ in 0..lines {
            let theta: f64 = rng.random_range(0.2..3.0);
            let lambda = theta + rng.random_range(0.0..2.0);
            let t = rng.random_range(-0.98 * theta..0.98 * lambda);
            dev = dev.max(slope_density_consistency(lambda, theta, t, 50)?);
        }
        let diag = cut_diagonal_consistency(1.0, 50)?;
        let mut tangency = 0.0f64;
        for _ in 0..lines {
            let (lambda, theta) = (rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
            let c = hexagon_arctic(lambda, theta)?;
            for e in hexagon_edges(lambda, theta) {
                tangency = tangency.max(c.tangency(&e).residual);
            }
            let c = cuthex_arctic(lambda)?;
            for e in hexagon_edges(lambda, lambda) {
                tangency = tangency.max(c.tangency(&e).residual);
            }
        }
        let c = cuthex_arctic(1.0)?;
        let p = c.intersect(&Line::diagonal(0.0));
        let b = uniform_band(1.0)?;
        let cut = (p[0].0 - b.lo).abs().max((p[1].0 - b.hi).abs());
        Ok(vec![
            Check::at_most("hexagon density = hx + hy", dev, 1e-8).with_detail(format!("{lines} random lines, 50 points each")),
            Check::at_most("cut diagonal slope = uniform density", diag, 1e-8),
            Check::at_most("arctic tangency residual", tangency, 1e-10),
            Check::at_most("cut conic meets the cut at the band edges", cut, 1e-12),
        ])
    };
    run().unwrap_or_else(|e| vec![Check::failed("Burgers consistency", e)])
}

/// Triangle and TSSCPP boundary densities. `literal` adds the check that
/// the TSSCPP diagonal equals the entering-tile density itself, which does
/// not hold for these densities (see the README); the relation that does
/// hold is always checked.
pub fn tsscpp_triangle(literal: bool) -> Vec<Check> {
    let n = 201;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let max = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| f(x).abs()).fold(0.0, f64::max);
    let mut out = vec![
        Check::at_most("exitile = 1 - entertile", max(&|x| exitile(x) - (1.0 - entertile(x))), 1e-12),
        Check::at_most("triangle_rho(., 1) = exitile", max(&|z| triangle_rho(z, 1.0) - exitile(z)), 1e-12),
        Check::at_most("tsscpp(x, x) = (1 + entertile(x)) / 2", max(&|x| tsscpp_rho(x, x) - 0.5 * (1.0 + entertile(x))), 1e-12),
    ];
    if literal {
        out.push(
            Check::at_most("tsscpp(x, x) = entertile(x)", max(&|x| tsscpp_rho(x, x) - entertile(x)), 1e-12)
                .with_detail("the diagonal of the symmetric hexagon density is (1 + entertile)/2"),
        );
    }
    out
}

/// The whole suite. `Quick` shrinks the sampler runs and random draws.
pub fn run_suite(effort: Effort, seed: u64) -> Report {
    let full = effort == Effort::Full;
    let sections = vec![
        timed("exact identities", || exact_identities(3, 4)),
        timed("q-symmetry", || q_symmetry(4, 4)),
        timed("sampler vs exact law", || sampler_vs_exact(1_000_000, seed)),
        timed("finite size vs limit shape", || {
            if full {
                finite_size_limit(60, 10_000_000, seed, 0.05)
            } else {
                finite_size_limit(30, 2_000_000, seed, 0.06)
            }
        }),
        timed("closed-form densities", || density_suite(if full { 50 } else { 10 }, seed)),
        timed("degenerations", degenerations),
        timed("resolvent vs closed forms", || resolvent_vs_closed_forms(if full { 10 } else { 3 }, seed)),
        timed("Burgers consistency", || burgers_consistency(5, seed)),
        timed("TSSCPP and triangle", || tsscpp_triangle(false)),
    ];
    Report { sections }
}
