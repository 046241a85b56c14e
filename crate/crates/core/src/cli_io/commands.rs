//! Command implementations. Each returns its report text and exit status.

use super::config::{RunConfig, Style};
use super::output::{self, Palette, Rgb};
use crate::error::{Error, Result};
use crate::escape::{classify_grid, itinerary_histogram, EscapeParams, Raster, Status, Viewport};
use crate::logspace::{LogTransform, TractId};
use crate::map_core::{OrbitClass, PeriodicOrbit, PuncturedPolyMap};
use crate::rays::{
    check_bouquet_disjoint, check_bouquet_order, enumerate_addresses, geometric_grid, head_start_search,
    land_periodic_ray, min_parameter, sample_bouquet, trace_ray_tail, LandingConfig, RayConfig, RayTail, MAX_PLANE_T,
};
use crate::symbolic::{parse_address, parse_itinerary, parse_tract_list, TractGeometry};
use num_complex::Complex64;
use serde_json::json;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Info,
    Render,
    TraceRay,
    Periodic,
    Tracts,
    Check,
    Bouquet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: i32,
    pub report: String,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let map = cfg.map.build()?;
    match cmd {
        Command::Info => info(&map),
        Command::Render => render(&map, cfg),
        Command::TraceRay => trace_ray(&map, cfg),
        Command::Periodic => periodic(&map, cfg),
        Command::Tracts => tracts(&map, cfg),
        Command::Check => check(&map, cfg),
        Command::Bouquet => bouquet(&map, cfg),
    }
}

macro_rules! out {
    ($s:expr, $($arg:tt)*) => { writeln!($s, $($arg)*).expect("write to string") };
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12} {:+.12}i", z.re, z.im)
}

fn info(map: &PuncturedPolyMap) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let o = map.order();
    let sing = map.critical_points()?;
    let mut s = String::new();
    out!(s, "index            {}", map.index());
    out!(s, "order at inf     {}", o.rho_inf);
    out!(s, "order at 0       {}", o.rho_zero);
    out!(s, "critical points  {}", sing.critical_points.len());
    for (c, v) in sing.critical_points.iter().zip(&sing.critical_values) {
        out!(s, "  z = {}   f(z) = {}", fmt_c(*c), fmt_c(*v));
    }
    out!(s, "value annulus    {:.6e} < |w| < {:.6e}", sing.annulus.0, sing.annulus.1);
    out!(s, "r_norm           {:.6}", lt.r_norm());
    let d = lt.delta_lines();
    out!(s, "cut heights      right {:.6}  left {:.6}", d.right, d.left);
    out!(s, "tracts per strip {}", lt.tract_catalog(0..=0).len());
    for t in lt.tract_catalog(0..=0) {
        out!(s, "  {}  target {}  center {:.6}  width {:.6}", t.id, t.target, t.center_im, t.band_width);
    }
    Ok(Outcome { exit: 0, report: s })
}

fn viewport_of(cfg: &RunConfig) -> Result<Viewport> {
    match &cfg.viewport {
        Some(v) => Ok(v.build()?),
        None => Ok(Viewport::square(Complex64::new(0.0, 0.0), 4.0, 512)?),
    }
}

fn escape_params(cfg: &RunConfig, r_norm: f64) -> EscapeParams {
    let mut p = EscapeParams::with_radius(r_norm);
    if let Some(m) = cfg.max_iter {
        p.max_iter = m;
    }
    if let Some(r) = cfg.escape_log_radius {
        p.escape_log_radius = r;
    }
    if let Some(l) = cfg.prefix_len {
        p.prefix_len = l;
    }
    p
}

fn palette(cfg: &RunConfig) -> Palette {
    let mut p = Palette::default();
    if let Some(c) = cfg.bounded_color {
        p.bounded = c;
    }
    if let Some(s) = cfg.style {
        p.style = s;
    }
    p
}

fn classify(map: &PuncturedPolyMap, lt: &LogTransform, cfg: &RunConfig) -> Result<Raster> {
    let vp = viewport_of(cfg)?;
    Ok(classify_grid(map, &vp, &escape_params(cfg, lt.r_norm()), cfg.threads)?)
}

fn colors(map: &PuncturedPolyMap, raster: &Raster, pal: &Palette) -> Vec<Rgb> {
    match pal.style {
        Style::Itinerary => output::raster_colors(raster, pal),
        Style::Phase => {
            let vp = &raster.viewport;
            (0..vp.height())
                .flat_map(|row| (0..vp.width()).map(move |col| (col, row)))
                .map(|(col, row)| {
                    let e = map.exponent(vp.pixel_center(col, row)).unwrap_or(Complex64::new(f64::NAN, 0.0));
                    Palette::phase_color(e)
                })
                .collect()
        }
    }
}

fn dump_path(cfg: &RunConfig, out: &str) -> String {
    cfg.dump.clone().unwrap_or_else(|| format!("{out}.raster.tsv"))
}

fn render(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let raster = classify(map, &lt, cfg)?;
    let pal = palette(cfg);
    let out = cfg.out.clone().unwrap_or_else(|| "render.ppm".into());
    output::write_pixels(raster.width(), raster.height(), &colors(map, &raster, &pal), Path::new(&out))?;
    let dump = dump_path(cfg, &out);
    output::write_raster(&raster, Path::new(&dump))?;
    let mut s = String::new();
    let count = |st: Status| raster.pixels.iter().filter(|p| p.status == st).count();
    out!(s, "image   {out} ({}x{})", raster.width(), raster.height());
    out!(s, "raster  {dump}");
    out!(s, "escaped {}  bounded {}  undecided {}", count(Status::Escaped), count(Status::Bounded), count(Status::Undecided));
    for (k, v) in itinerary_histogram(&raster) {
        out!(s, "  prefix {k}: {v}");
    }
    Ok(Outcome { exit: 0, report: s })
}

fn ray_config(cfg: &RunConfig) -> RayConfig {
    let mut r = RayConfig::default();
    if let Some(t) = cfg.tol {
        r.tol = t;
    }
    r
}

fn t_grid(cfg: &RunConfig, t_min: f64) -> Result<Vec<f64>> {
    let t_max = cfg.t_max.unwrap_or((4.0 * t_min).max(20.0)).min(MAX_PLANE_T);
    if !(t_max > t_min) {
        return Err(Error::Usage(format!("t_max = {t_max} must exceed the smallest valid parameter {t_min:.6}")));
    }
    Ok(geometric_grid(t_min, t_max, cfg.t_count.unwrap_or(64)))
}

fn overlay(map: &PuncturedPolyMap, lt: &LogTransform, cfg: &RunConfig, rays: &[RayTail]) -> Result<Option<String>> {
    let Some(path) = &cfg.overlay else { return Ok(None) };
    let raster = classify(map, lt, cfg)?;
    let pal = palette(cfg);
    let mut px = colors(map, &raster, &pal);
    let vp = raster.viewport;
    for s in rays.iter().flat_map(|r| &r.samples) {
        if let Some((c, r)) = vp.pixel_of(s.z) {
            px[r * vp.width() + c] = [255, 255, 255];
        }
    }
    output::write_pixels(vp.width(), vp.height(), &px, Path::new(path))?;
    Ok(Some(path.clone()))
}

fn required<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Usage(format!("--{name} is required")))
}

fn trace_ray(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let addr = parse_address(required(&cfg.address, "address")?)?;
    let rc = ray_config(cfg);
    let t0 = min_parameter(&lt, &addr, &rc)?;
    let ray = trace_ray_tail(&lt, &addr, &t_grid(cfg, t0)?, &rc)?;
    let out = cfg.out.clone().unwrap_or_else(|| "ray.tsv".into());
    output::write_rays(std::slice::from_ref(&ray), Path::new(&out))?;
    let mut s = String::new();
    out!(s, "address   {addr}");
    out!(s, "samples   {}  t in [{:.6}, {:.6}]", ray.samples.len(), ray.samples[0].t, ray.samples.last().map_or(0.0, |x| x.t));
    out!(s, "depth     {}", ray.depth_used);
    out!(s, "converged {}", ray.converged);
    let worst = ray.displacement_ratios().into_iter().fold(0.0f64, f64::max);
    out!(s, "max depth displacement ratio {worst:.3e}");
    out!(s, "rays      {out}");
    if let Some(p) = overlay(map, &lt, cfg, std::slice::from_ref(&ray))? {
        out!(s, "overlay   {p}");
    }
    Ok(Outcome { exit: if ray.converged { 0 } else { 1 }, report: s })
}

fn describe_orbit(s: &mut String, o: &PeriodicOrbit) {
    let dev = o.points.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    out!(s, "orbit period {}  multiplier {} (|m| = {:.12})  {}", o.period, fmt_c(o.multiplier), o.multiplier.norm(), o.classification.name());
    for z in &o.points {
        out!(s, "  {}", fmt_c(*z));
    }
    out!(s, "  max ||z|-1| = {dev:.3e}");
}

/// Distinct orbits of exact period p reached from the given seeds.
pub fn orbits_from_seeds(map: &PuncturedPolyMap, period: usize, seeds: &[Complex64]) -> Vec<PeriodicOrbit> {
    let mut found: Vec<PeriodicOrbit> = Vec::new();
    for &z in seeds {
        let Ok(o) = map.find_periodic_orbit(period, z) else { continue };
        if o.period != period {
            continue;
        }
        let dup = found.iter().any(|f| f.points.iter().any(|q| (q - o.points[0]).norm() < 1e-8 * q.norm().max(1.0)));
        if !dup {
            found.push(o);
        }
    }
    found
}

pub fn unit_circle_seeds(count: usize) -> Vec<Complex64> {
    (0..count).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / count as f64)).collect()
}

fn periodic(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let period = cfg.period.unwrap_or(1);
    let mut s = String::new();
    if let Some(text) = &cfg.address {
        let lt = LogTransform::new(map.clone())?;
        let addr = parse_address(text)?;
        let mut lc = LandingConfig::default();
        if let Some(t) = cfg.tol {
            lc.orbit_tol = t;
        }
        let rep = land_periodic_ray(&lt, &addr, &lc)?;
        let out = cfg.out.clone().unwrap_or_else(|| "cycle.tsv".into());
        output::write_rays(&rep.cycle_tails, Path::new(&out))?;
        out!(s, "address   {addr}");
        out!(s, "verdict   {}", rep.verdict.name());
        out!(s, "steps     {}", rep.steps);
        if let Some(z) = rep.landing_point {
            out!(s, "landing   {}", fmt_c(z));
        }
        if let Some(o) = &rep.orbit {
            describe_orbit(&mut s, o);
        }
        out!(s, "endpoint status unknown");
        for d in &rep.diagnostics {
            out!(s, "note      {d}");
        }
        out!(s, "rays      {out}");
        if let Some(p) = overlay(map, &lt, cfg, &rep.cycle_tails)? {
            out!(s, "overlay   {p}");
        }
        let ok = matches!(rep.verdict, crate::rays::Verdict::LandsRepelling | crate::rays::Verdict::LandsParabolic);
        return Ok(Outcome { exit: if ok { 0 } else { 1 }, report: s });
    }
    let on_circle = cfg.on_circle.unwrap_or(false);
    let seeds: Vec<Complex64> = match cfg.seed {
        Some([a, b]) => vec![Complex64::new(a, b)],
        None if on_circle => unit_circle_seeds(720),
        None => [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&r| unit_circle_seeds(90).into_iter().map(move |z| z * r))
            .collect(),
    };
    let mut orbits = orbits_from_seeds(map, period, &seeds);
    if on_circle {
        orbits.retain(|o| o.points.iter().all(|z| (z.norm() - 1.0).abs() < 1e-8));
    }
    if orbits.is_empty() {
        out!(s, "no orbit of exact period {period} found{}", if on_circle { " on the unit circle" } else { "" });
        return Ok(Outcome { exit: 1, report: s });
    }
    for o in &orbits {
        describe_orbit(&mut s, o);
    }
    let repelling = orbits.iter().filter(|o| o.classification == OrbitClass::Repelling).count();
    out!(s, "{} orbit(s), {repelling} repelling", orbits.len());
    Ok(Outcome { exit: 0, report: s })
}

fn tracts(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let [a, b] = cfg.strips.unwrap_or([-1, 1]);
    let r = lt.r_norm() * (1.0 + 1e-6);
    let n = map.index() as f64;
    let ys: Vec<f64> = (-100..=100).map(|k: i32| (k as f64).signum() * ((k.abs() as f64 / 10.0).exp() - 1.0)).collect();
    let mut lines = Vec::new();
    for info in lt.tract_catalog(a..=b) {
        let s = if info.target == crate::symbolic::Side::Infinity { 1.0 } else { -1.0 };
        let pts: Vec<Complex64> = ys
            .iter()
            .filter_map(|&y| lt.inverse_branch(Complex64::new(s * r, n * info.center_im + y), info.id).ok())
            .collect();
        lines.push((info.id.to_string(), "boundary".to_string(), pts));
    }
    let out = cfg.out.clone().unwrap_or_else(|| "tracts.tsv".into());
    output::write_text(&output::format_polylines(&lines), Path::new(&out))?;
    let mut s = String::new();
    out!(s, "strips {a}..={b}: {} tracts, boundary level |Re F| = {r:.6}", lines.len());
    for (t, _, pts) in &lines {
        out!(s, "  {t}: {} points", pts.len());
    }
    out!(s, "polylines {out}");
    Ok(Outcome { exit: 0, report: s })
}

/// Strip-0 tract pairs (T, T') with target(T) = side(T').
pub fn consecutive_pairs(lt: &LogTransform) -> Vec<(TractId, TractId)> {
    let cat = lt.tract_catalog(0..=0);
    let mut v = Vec::new();
    for t in &cat {
        for u in &cat {
            if lt.layout().target(t.id) == u.id.side {
                v.push((t.id, u.id));
            }
        }
    }
    v
}

fn check(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let seed = cfg.rng_seed.unwrap_or(1);
    let exp = lt.expansivity_report(cfg.samples.unwrap_or(10_000), cfg.pairs.unwrap_or(1_000), seed);
    let mut s = String::new();
    out!(s, "r_norm {:.6}", lt.r_norm());
    out!(
        s,
        "expansivity: {}  samples {}  |F'| < 2: {}  min |F'| {:.4}  pairs {}  pair violations {}",
        if exp.passes() { "PASS" } else { "FAIL" },
        exp.samples,
        exp.derivative_violations,
        exp.min_derivative,
        exp.pairs,
        exp.pair_violations
    );
    let mut hs = Vec::new();
    let mut all_ok = exp.passes();
    for (i, (t, u)) in consecutive_pairs(&lt).into_iter().enumerate() {
        let res = head_start_search(&lt, t, u, cfg.pairs.unwrap_or(10_000), seed.wrapping_add(31 * i as u64))?;
        match res.workable {
            Some((c, k)) => {
                let g = res.grid.iter().find(|g| g.offset == c && g.slope == k).expect("grid entry");
                out!(s, "head-start {t} -> {u}: PASS  K = {k}  offset = {c}  pairs {}  non-vacuous {}", g.pairs, g.non_vacuous);
                hs.push(json!({"from": t.to_string(), "to": u.to_string(), "pass": true, "K": k, "offset": c, "non_vacuous": g.non_vacuous}));
            }
            None => {
                all_ok = false;
                out!(s, "head-start {t} -> {u}: FAIL  no workable (K, offset) on the grid");
                hs.push(json!({"from": t.to_string(), "to": u.to_string(), "pass": false}));
            }
        }
    }
    let trailer = json!({
        "version": output::VERSION,
        "pass": all_ok,
        "r_norm": lt.r_norm(),
        "expansivity": {
            "pass": exp.passes(),
            "samples": exp.samples,
            "derivative_violations": exp.derivative_violations,
            "pairs": exp.pairs,
            "pair_violations": exp.pair_violations,
        },
        "head_start": hs,
    });
    out!(s, "{}", trailer);
    if let Some(path) = &cfg.out {
        output::write_text(&s, Path::new(path))?;
    }
    Ok(Outcome { exit: if all_ok { 0 } else { 1 }, report: s })
}

fn bouquet(map: &PuncturedPolyMap, cfg: &RunConfig) -> Result<Outcome> {
    let lt = LogTransform::new(map.clone())?;
    let e = parse_itinerary(required(&cfg.itinerary, "itinerary")?)?;
    let symbols = parse_tract_list(required(&cfg.symbols, "symbols")?)?;
    let max_period = cfg.max_period.unwrap_or(3);
    let rc = ray_config(cfg);
    let addrs = enumerate_addresses(&e, &symbols, max_period, lt.layout());
    let mut t0 = lt.r_norm() * 1.05;
    for a in &addrs {
        if let Ok(t) = min_parameter(&lt, a, &rc) {
            t0 = t0.max(t);
        }
    }
    let grid = t_grid(cfg, t0)?;
    let b = sample_bouquet(&lt, &e, &symbols, max_period, &grid, &rc);
    let disj = check_bouquet_disjoint(&lt, &b.rays, &grid, 10.0 * rc.tol, &rc);
    let order = check_bouquet_order(&lt, &b.rays, &grid, &rc);
    let out = cfg.out.clone().unwrap_or_else(|| "bouquet.tsv".into());
    output::write_rays(&b.rays, Path::new(&out))?;
    let mut s = String::new();
    out!(s, "itinerary {e}  addresses {}  traced {}  failed {}", addrs.len(), b.rays.len(), b.failures.len());
    for r in &b.rays {
        out!(s, "  {}", r.address);
    }
    for (a, why) in &b.failures {
        out!(s, "  failed {a}: {why}");
    }
    out!(
        s,
        "disjoint: {} pairs, {} overlapping, min gap at first differing level {:.3e}, min base gap {:.3e}",
        disj.pairs,
        disj.overlapping.len(),
        disj.min_gap,
        disj.min_base_gap
    );
    out!(s, "order: {} level violations, {} base violations", order.level_violations.len(), order.base_violations.len());
    out!(s, "rays {out}");
    if let Some(p) = overlay(map, &lt, cfg, &b.rays)? {
        out!(s, "overlay {p}");
    }
    let ok = disj.overlapping.is_empty() && order.level_violations.is_empty() && order.base_violations.is_empty();
    Ok(Outcome { exit: if ok { 0 } else { 1 }, report: s })
}
