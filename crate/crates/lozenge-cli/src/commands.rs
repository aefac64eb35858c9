use std::fs;

use lozenge::arctic::{cuthex_arctic, hexagon_arctic};
use lozenge::density::{DensityProfile, ScaledGeometry};
use lozenge::enumeration::{brute_force_z, exact_distribution, z_det, z_product, EndpointConfig, RegionSpec};
use lozenge::exact::{int, parse_rational, to_f64};
use lozenge::quad::integrate;
use lozenge::resolvent::{solve, BandSolution, Interval, ResolventProblem};
use lozenge::sampler::{default_bins, default_burnin, histogram_from_counts, mcmc_site_counts};
use lozenge::verify::{run_suite, Effort, Report};
use serde_json::json;

use crate::output::{num, rational_json, rational_text, write_csv, write_json};
use crate::svg::{plot, Series};
use crate::*;

pub fn dispatch(cmd: Command) -> CliResult<u8> {
    match cmd {
        Command::Count(a) => count(a).map(|()| 0),
        Command::Distribution(a) => distribution(a).map(|()| 0),
        Command::Sample(a) => sample(a).map(|()| 0),
        Command::Density(a) => density(a).map(|()| 0),
        Command::Arctic(a) => arctic(a).map(|()| 0),
        Command::SolveGap(a) => solve_gap(a).map(|()| 0),
        Command::Verify(a) => verify(a),
    }
}

/// Parses `lo:hi` with lo < hi.
pub fn parse_span(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("interval must be lo:hi with lo < hi, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Sites m whose cell [m/k, (m+1)/k] lies inside [lo, hi].
fn span_to_sites(lo: f64, hi: f64, k: usize) -> CliResult<(i64, i64)> {
    let kf = k as f64;
    let a = (lo * kf - 1e-9).ceil() as i64;
    let b = (hi * kf + 1e-9).floor() as i64 - 1;
    if b < a {
        return Err(CliError::Usage(format!("interval {lo}:{hi} covers no whole lattice cell at k = {k}")));
    }
    Ok((a, b))
}

fn build_region(r: &RegionArgs) -> CliResult<RegionSpec> {
    let mut region = match r.region {
        RegionArg::Cut => RegionSpec::cut_hexagon(r.k, r.n, parse_rational(&r.q)?)?,
        RegionArg::HalfCut => {
            if parse_rational(&r.q)? != int(1) {
                return Err(CliError::Usage("the half-cut hexagon is only defined at q = 1".into()));
            }
            RegionSpec::half_cut_hexagon(r.k, r.n)?
        }
    };
    if r.k == 0 && !(r.forbidden.is_empty() && r.packed.is_empty()) {
        return Err(CliError::Usage("intervals need k >= 1".into()));
    }
    for s in &r.forbidden {
        let (lo, hi) = parse_span(s)?;
        let (a, b) = span_to_sites(lo, hi, r.k)?;
        region = region.with_forbidden(a, b)?;
    }
    for s in &r.packed {
        let (lo, hi) = parse_span(s)?;
        let (a, b) = span_to_sites(lo, hi, r.k)?;
        region = region.with_packed(a, b)?;
    }
    Ok(region)
}

fn count(a: CountArgs) -> CliResult<()> {
    let region = build_region(&a.region)?;
    let m = EndpointConfig::new(a.m);
    region.validate(&m)?;
    let z = match a.method {
        Method::Det => z_det(&region, &m)?,
        Method::Product => z_product(&region, &m)?,
        Method::Brute => brute_force_z(&region, &m)?,
    };
    write_json(None, &rational_json(&z))
}

fn distribution(a: DistributionArgs) -> CliResult<()> {
    let region = build_region(&a.region)?;
    let dist = exact_distribution(&region)?;
    let out = a.out.as_deref();
    match a.format {
        Format::Json => {
            let configs: Vec<_> = (0..dist.configs.len())
                .map(|i| {
                    json!({
                        "m": dist.configs[i].m,
                        "weight": rational_json(&dist.weights[i]),
                        "probability": rational_json(&dist.probability(i)),
                    })
                })
                .collect();
            let v = json!({
                "k": region.k,
                "n": region.n,
                "q": rational_json(&region.q),
                "total": rational_json(&dist.total),
                "configs": configs,
            });
            write_json(out, &v)
        }
        Format::Csv => {
            let rows = (0..dist.configs.len()).map(|i| {
                let m: Vec<String> = dist.configs[i].m.iter().map(|x| x.to_string()).collect();
                vec![m.join(" "), rational_text(&dist.weights[i]), rational_text(&dist.probability(i))]
            });
            write_csv(out, &["m", "weight", "probability"], rows)
        }
    }
}

/// Limit density the histogram is compared against, as bin averages.
enum Theory {
    Profile(DensityProfile),
    /// ρ(μ) = profile(top - μ): the q > 1 chain mirrors the q < 1 one.
    Mirrored(DensityProfile, f64),
    Gap(Box<BandSolution>),
    Unknown,
}

impl Theory {
    fn average(&self, a: f64, b: f64) -> f64 {
        match self {
            Theory::Profile(p) => p.cell_average(a, b).unwrap_or(f64::NAN),
            Theory::Mirrored(p, top) => p.cell_average(top - b, top - a).unwrap_or(f64::NAN),
            Theory::Gap(s) => integrate(|u| s.rho(u), a, b, 1e-10).map(|v| v / (b - a)).unwrap_or(f64::NAN),
            Theory::Unknown => f64::NAN,
        }
    }
}

/// Histogram scale per site and the matching limit density.
fn sample_theory(region: &RegionSpec) -> CliResult<(f64, Theory)> {
    let (k, n) = (region.k as f64, region.n as f64);
    if region.kind == lozenge::enumeration::RegionKind::HalfCutHexagon {
        eprintln!("note: no limit density is wired up for the half-cut hexagon; theory column is NaN");
        return Ok((1.0 / k, Theory::Unknown));
    }
    let plain = region.forbidden.is_empty() && region.packed.is_empty();
    if region.q == int(1) {
        if plain {
            return Ok((1.0 / k, Theory::Profile(ScaledGeometry::Uniform { lambda: n / k }.profile()?)));
        }
        let mut iv = Vec::new();
        for f in &region.forbidden {
            iv.push(Interval::Forbidden { lo: f.lo as f64 / k, hi: (f.hi + 1) as f64 / k });
        }
        for p in &region.packed {
            iv.push(Interval::Packed { lo: p.lo as f64 / k, hi: (p.hi + 1) as f64 / k });
        }
        let sol = solve(&ResolventProblem::new(n / k, iv, 1.0)?, 24)?;
        return Ok((1.0 / k, Theory::Gap(Box::new(sol))));
    }
    // q = e^{∓ε}: sites scale by ε, α = nε, β = kε
    let eps = to_f64(&region.q).ln().abs();
    if !plain {
        eprintln!("note: no limit density for q != 1 with boundary intervals; theory column is NaN");
        return Ok((eps, Theory::Unknown));
    }
    let (alpha, beta) = (n * eps, k * eps);
    let p = ScaledGeometry::QCut { alpha, beta }.profile()?;
    if region.q < int(1) {
        Ok((eps, Theory::Profile(p)))
    } else {
        Ok((eps, Theory::Mirrored(p, alpha + beta)))
    }
}

fn sample(a: SampleArgs) -> CliResult<()> {
    let region = build_region(&a.region)?;
    if region.k == 0 {
        return Err(CliError::Usage("sampling needs k >= 1".into()));
    }
    let burnin = a.burnin.unwrap_or_else(|| default_burnin(a.steps));
    let (eps, theory) = sample_theory(&region)?;
    let (counts, chain) = mcmc_site_counts(&region, a.steps, burnin, a.seed)?;
    let sites = counts.counts.len();
    let bins = a.bins.unwrap_or_else(|| default_bins(sites, counts.samples));
    let h = histogram_from_counts(&counts, bins, eps)?;
    let theory_avg: Vec<f64> = (0..h.bins()).map(|i| theory.average(h.bin_edges[i], h.bin_edges[i + 1])).collect();
    let l1: f64 = (0..h.bins()).map(|i| (h.height(i) - theory_avg[i]).abs() * h.width(i)).sum();
    eprintln!(
        "samples {} bins {bins} acceptance {:.4} max drift {:.1e} L1 {l1:.6}",
        counts.samples,
        chain.acceptance_rate(),
        chain.max_drift()
    );
    let rows = (0..h.bins()).map(|i| {
        let (e, t) = (h.height(i), theory_avg[i]);
        vec![num(h.center(i)), num(e), num(t), num((e - t).abs())]
    });
    write_csv(a.out.out.as_deref(), &["bin_center", "empirical", "theory", "abs_err"], rows)?;
    if let Some(path) = &a.out.svg {
        let emp: Vec<(f64, f64)> = (0..h.bins()).flat_map(|i| [(h.bin_edges[i], h.height(i)), (h.bin_edges[i + 1], h.height(i))]).collect();
        let th: Vec<(f64, f64)> = (0..h.bins()).map(|i| (h.center(i), theory_avg[i])).collect();
        let series = [Series { label: "empirical", points: &emp }, Series { label: "theory", points: &th }];
        fs::write(path, plot("endpoint density", "position", "density", &series, false))?;
    }
    Ok(())
}

fn need(v: Option<f64>, name: &str, model: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Usage(format!("--model {model} requires --{name}")))
}

fn geometry(a: &DensityArgs) -> CliResult<ScaledGeometry> {
    Ok(match a.model {
        Model::Uniform => ScaledGeometry::Uniform { lambda: need(a.lambda, "lambda", "uniform")? },
        Model::Qcut => ScaledGeometry::QCut { alpha: need(a.alpha, "alpha", "qcut")?, beta: need(a.beta, "beta", "qcut")? },
        Model::TwoCorner => ScaledGeometry::TwoCorner {
            lambda: need(a.lambda, "lambda", "two-corner")?,
            nu: need(a.nu, "nu", "two-corner")?,
            theta: need(a.theta, "theta", "two-corner")?,
        },
        Model::Hexagon => ScaledGeometry::Hexagon {
            lambda: need(a.lambda, "lambda", "hexagon")?,
            theta: need(a.theta, "theta", "hexagon")?,
            x: need(a.x, "x", "hexagon")?,
        },
        Model::HalfCut => ScaledGeometry::HalfCut { alpha: need(a.alpha, "alpha", "half-cut")? },
        Model::Triangle => ScaledGeometry::Triangle { x: need(a.x, "x", "triangle")? },
        Model::Tsscpp => ScaledGeometry::Tsscpp { x: need(a.x, "x", "tsscpp")? },
    })
}

fn density(a: DensityArgs) -> CliResult<()> {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let g = geometry(&a)?;
    g.validate()?;
    let p = g.profile()?;
    let pts = p.grid(a.grid);
    let rows = pts.iter().map(|&(z, r)| vec![num(z), num(r), p.tag.clone()]);
    write_csv(a.out.out.as_deref(), &["z", "rho", "regime_tag"], rows)?;
    if let Some(path) = &a.out.svg {
        let fine = p.grid(a.grid.max(401));
        fs::write(path, plot(&format!("limit density ({})", p.tag), "z", "rho", &[Series { label: "rho", points: &fine }], false))?;
    }
    Ok(())
}

fn hexagon_outline(l: f64, t: f64) -> Vec<(f64, f64)> {
    vec![(0.0, 0.0), (t, 0.0), (1.0 + t, 1.0), (1.0 + t, 1.0 + l), (1.0, 1.0 + l), (0.0, l), (0.0, 0.0)]
}

fn arctic(a: ArcticArgs) -> CliResult<()> {
    if a.points < 3 {
        return Err(CliError::Usage("--points must be at least 3".into()));
    }
    let (curve, outline) = if a.cut {
        (cuthex_arctic(a.lambda)?, None)
    } else {
        let t = a.theta.ok_or_else(|| CliError::Usage("the full hexagon requires --theta (or pass --cut)".into()))?;
        (hexagon_arctic(a.lambda, t)?, Some(hexagon_outline(a.lambda, t)))
    };
    let pts = curve.sample(a.points)?;
    write_csv(a.out.out.as_deref(), &["x", "y"], pts.iter().map(|&(x, y)| vec![num(x), num(y)]))?;
    if let Some(path) = &a.out.svg {
        let mut closed = pts.clone();
        closed.push(pts[0]);
        let mut series = vec![Series { label: "arctic curve", points: &closed }];
        if let Some(o) = &outline {
            series.push(Series { label: "hexagon", points: o });
        }
        fs::write(path, plot("arctic curve", "x", "y", &series, true))?;
    }
    Ok(())
}

fn solve_gap(a: SolveGapArgs) -> CliResult<()> {
    let mut iv = Vec::new();
    for s in &a.forbidden {
        let (lo, hi) = parse_span(s)?;
        iv.push(Interval::Forbidden { lo, hi });
    }
    for s in &a.packed {
        let (lo, hi) = parse_span(s)?;
        iv.push(Interval::Packed { lo, hi });
    }
    let problem = ResolventProblem::new(a.lambda, iv, a.mass)?;
    let sol = solve(&problem, a.nodes)?;
    let pair = |p: (f64, f64)| json!([p.0, p.1]);
    let summary = json!({
        "converged": sol.converged,
        "bands": sol.bands.iter().map(|b| pair((b.lo, b.hi))).collect::<Vec<_>>(),
        "edge_kinds": sol.edge_kinds.iter().map(|k| json!([format!("{:?}", k.0), format!("{:?}", k.1)])).collect::<Vec<_>>(),
        "saturated": sol.saturated.iter().map(|&p| pair(p)).collect::<Vec<_>>(),
        "residuals": sol.residuals,
        "iterations": sol.iterations,
        "quadrature_level": sol.level,
        "total_mass": sol.total_mass(),
        "notes": sol.notes,
    });
    if a.json {
        write_json(a.out.out.as_deref(), &summary)?;
    } else {
        if a.grid < 2 {
            return Err(CliError::Usage("--grid must be at least 2".into()));
        }
        let top = problem.top();
        let inside = |packed: bool, u: f64| problem.intervals.iter().any(|i| i.is_packed() == packed && i.lo() <= u && u <= i.hi());
        let tag = |u: f64| -> &'static str {
            if sol.bands.iter().any(|b| b.lo < u && u < b.hi) {
                "band"
            } else if inside(true, u) {
                "packed"
            } else if sol.saturated.iter().any(|&(p, q)| p <= u && u <= q) {
                "saturated"
            } else if inside(false, u) {
                "forbidden"
            } else {
                "void"
            }
        };
        let rows = (0..a.grid).map(|i| {
            let u = top * i as f64 / (a.grid - 1) as f64;
            vec![num(u), num(sol.rho(u)), tag(u).to_string()]
        });
        write_csv(a.out.out.as_deref(), &["z", "rho", "regime_tag"], rows)?;
    }
    if !sol.converged {
        eprintln!("warning: solver reported no convergence");
    }
    if let Some(path) = &a.out.svg {
        let top = problem.top();
        let pts: Vec<(f64, f64)> = (0..=800).map(|i| top * i as f64 / 800.0).map(|u| (u, sol.rho(u))).collect();
        fs::write(path, plot("band solution", "z", "rho", &[Series { label: "rho", points: &pts }], false))?;
    }
    Ok(())
}

pub fn report_json(r: &Report) -> serde_json::Value {
    json!({
        "passed": r.passed(),
        "sections": r.sections.iter().map(|s| json!({
            "name": s.name,
            "passed": s.passed(),
            "checks": s.checks.iter().map(|c| json!({
                "name": c.name,
                "status": if c.passed { "pass" } else { "fail" },
                "measured": c.measured,
                "tolerance": c.tolerance,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn verify(a: VerifyArgs) -> CliResult<u8> {
    let report = run_suite(if a.full { Effort::Full } else { Effort::Quick }, a.seed);
    if a.json {
        write_json(None, &report_json(&report))?;
    } else {
        for s in &report.sections {
            println!("== {} ({:.2}s)", s.name, s.seconds);
            for c in &s.checks {
                let status = if c.passed { "ok  " } else { "FAIL" };
                println!("  {status} {}: {:e} <= {:e} {}", c.name, c.measured, c.tolerance, c.detail);
            }
        }
        let total = report.checks().count();
        let failed = report.checks().filter(|c| !c.passed).count();
        if failed == 0 {
            println!("all {total} checks passed");
        } else {
            println!("{failed} of {total} checks failed");
        }
    }
    Ok(report.exit_code() as u8)
}
