//! Landing of periodic rays and brokenness.
//!
//! For a period-p cycle of rays γ_0, …, γ_{p−1} with F(γ_j(t)) = γ_{j+1}(g_j(t)), fix a
//! parameter a valid for every ray and let B_j = γ_j([a, g_{j−1}(a)]). Pulling B_{j+1} back
//! through T_j gives a piece of γ_j whose far end is the near end of B_j. Iterating,
//! piece_j^{(m+1)} = F_{T_j}^{-1}(piece_{j+1}^{(m)}) chains onto piece_j^{(m)}, and the near
//! ends converge to the landing point. Each pullback is Newton continuation along the
//! image polyline, refined by bisection where the predictor is poor.

use super::trace::{next_height, trace_point, RayConfig, RayTail};
use super::RayError;
use crate::logspace::{LogTransform, TractId};
use crate::map_core::{OrbitClass, PeriodicOrbit};
use crate::symbolic::{admissible, ExternalAddress};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    LandsRepelling,
    LandsParabolic,
    Broken,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::LandsRepelling => "lands_repelling",
            Verdict::LandsParabolic => "lands_parabolic",
            Verdict::Broken => "broken",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandingConfig {
    pub tol: f64,
    pub max_steps: usize,
    pub base_vertices: usize,
    pub max_vertices: usize,
    /// Distance to a critical point that counts as incidence.
    pub broken_tol: f64,
    /// Distance from the landing estimate to the polished orbit.
    pub orbit_tol: f64,
}

impl Default for LandingConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 200, base_vertices: 24, max_vertices: 4096, broken_tol: 1e-6, orbit_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandingReport {
    pub ray: RayTail,
    pub landing_point: Option<Complex64>,
    pub orbit: Option<PeriodicOrbit>,
    pub verdict: Verdict,
    /// Pullback steps performed.
    pub steps: usize,
    /// Set when the verdict is `Broken`.
    pub critical_hit: Option<CriticalHit>,
    pub diagnostics: Vec<String>,
    /// Base traces of every ray in the cycle.
    pub cycle_tails: Vec<RayTail>,
}

/// Where a critical point was met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalHit {
    pub level: usize,
    pub critical_point: Complex64,
    pub distance: f64,
}

struct ExtensionOutcome {
    near: Option<Complex64>,
    converged: bool,
    hit: Option<CriticalHit>,
    steps: usize,
    diagnostics: Vec<String>,
    /// Concatenated level-0 curve, far to near, when requested.
    level0: Vec<Complex64>,
    tails: Vec<RayTail>,
}

fn newton_free(lt: &LogTransform, zeta: Complex64, mut w: Complex64) -> Option<Complex64> {
    let scale = zeta.norm().max(1.0);
    for _ in 0..40 {
        let (f, d) = lt.eval_with_deriv(w).ok()?;
        let r = f - zeta;
        if r.norm() <= 1e-15 * scale {
            return Some(w);
        }
        if d.norm() == 0.0 {
            return None;
        }
        let step = r / d;
        w -= step;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-15 * w.norm().max(1.0) {
            break;
        }
    }
    let res = (lt.eval(w).ok()? - zeta).norm();
    (res < 1e-10 * scale).then_some(w)
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> (f64, Complex64) {
    let d = b - a;
    let len2 = d.norm_sqr();
    let s = if len2 == 0.0 { 0.0 } else { ((p - a) * d.conj()).re / len2 };
    let q = a + d * s.clamp(0.0, 1.0);
    ((p - q).norm(), q)
}

/// A continued piece and the critical point met on it, with its distance.
type Piece = (Vec<Complex64>, Option<(Complex64, f64)>);

struct Pullback<'a> {
    lt: &'a LogTransform,
    cfg: &'a LandingConfig,
    check_critical: bool,
}

impl Pullback<'_> {
    /// Critical points of F near the preimage segment whose values lie on the image segment.
    fn critical_on_segment(&self, u0: Complex64, u1: Complex64, v0: Complex64, v1: Complex64) -> Option<(Complex64, f64)> {
        let n = self.lt.map().index() as f64;
        for &(wc, cv) in self.lt.critical() {
            let k0 = ((u0.im - wc.im) / (2.0 * PI)).round() as i64;
            for k in k0 - 1..=k0 + 1 {
                let shift = Complex64::new(0.0, 2.0 * PI * k as f64);
                let (wck, cvk) = (wc + shift, cv + shift * n);
                let (dimg, closest) = segment_distance(cvk, v0, v1);
                if dimg > 1e-12 * cvk.norm().max(1.0) {
                    continue;
                }
                let (dpre, _) = segment_distance(wck, u0, u1);
                if dpre > 1e-2 {
                    continue;
                }
                let start = if (u0 - wck).norm() < (u1 - wck).norm() { u0 } else { u1 };
                let u = newton_free(self.lt, closest, start).unwrap_or(start);
                let dist = (u - wck).norm();
                if dist < self.cfg.broken_tol {
                    return Some((wck, dist));
                }
            }
        }
        None
    }

    /// Preimages under the branch through `start` of the polyline `image`, far to near.
    fn run(&self, image: &[Complex64], start: Complex64) -> Result<Piece, String> {
        let mut out = vec![start];
        let (mut pu, mut pv) = (start, image[0]);
        for &v in &image[1..] {
            let mut pending = vec![v];
            while let Some(&tv) = pending.last() {
                let d = self.lt.deriv(pu).map_err(|e| e.to_string())?;
                let pred = if d.norm() > 0.0 { pu + (tv - pv) / d } else { pu };
                let step = (pred - pu).norm();
                let accepted = newton_free(self.lt, tv, pred)
                    .filter(|u| (u - pred).norm() <= 0.25 * step + 1e-13 * u.norm().max(1.0));
                match accepted {
                    Some(u) => {
                        if self.check_critical {
                            if let Some(hit) = self.critical_on_segment(pu, u, pv, tv) {
                                out.push(u);
                                return Ok((out, Some(hit)));
                            }
                        }
                        out.push(u);
                        pu = u;
                        pv = tv;
                        pending.pop();
                        if out.len() > self.cfg.max_vertices {
                            return Err(format!("more than {} vertices in one piece", self.cfg.max_vertices));
                        }
                    }
                    None => {
                        if pending.len() > 60 || (tv - pv).norm() < 1e-14 * tv.norm().max(1.0) {
                            if self.check_critical {
                                for &(wc, _) in self.lt.critical() {
                                    let k = ((pu.im - wc.im) / (2.0 * PI)).round();
                                    let wck = wc + Complex64::new(0.0, 2.0 * PI * k);
                                    let dist = (pu - wck).norm();
                                    if dist < self.cfg.broken_tol {
                                        return Ok((out, Some((wck, dist))));
                                    }
                                }
                            }
                            return Err(format!("continuation stalled at w = {pu}"));
                        }
                        pending.push((pv + tv) * 0.5);
                    }
                }
            }
        }
        Ok((out, None))
    }
}

/// Base parameter and base traces of the cycle σ^j(s), j < p.
fn base_curves(
    lt: &LogTransform,
    cycle: &ExternalAddress,
    rcfg: &RayConfig,
    vertices: usize,
) -> Result<(Vec<RayTail>, f64), RayError> {
    let p = cycle.period().len();
    let shifts: Vec<ExternalAddress> = (0..p).map(|j| cycle.shift(j)).collect();
    let mut a = 0.0f64;
    for s in &shifts {
        a = a.max(super::trace::min_parameter(lt, s, rcfg)?);
    }
    // a must also give valid heights through one full period.
    let tails: Vec<RayTail> = (0..p)
        .into_par_iter()
        .map(|j| {
            let prev = cycle.period()[(j + p - 1) % p];
            let b = next_height(lt, prev, a, rcfg.height_cap)
                .map_err(|msg| RayError::Seed { t: a, depth: 1, msg })?
                .ok_or_else(|| RayError::Grid("base segment too far out".into()))?;
            if b > super::trace::MAX_PLANE_T {
                return Err(RayError::Grid(format!("base segment end {b:.3e} is beyond the plane range")));
            }
            let grid = super::trace::geometric_grid(a, b, vertices);
            let samples = grid
                .iter()
                .map(|&t| trace_point(lt, &shifts[j], t, rcfg))
                .collect::<Result<Vec<_>, _>>()?;
            let depth_used = samples.iter().map(|s| s.depth).max().unwrap_or(0);
            let converged = samples.iter().all(|s| s.converged);
            Ok(RayTail { address: shifts[j].clone(), samples, depth_used, endpoint_estimate: None, converged })
        })
        .collect::<Result<_, _>>()?;
    Ok((tails, a))
}

fn extend(
    lt: &LogTransform,
    cycle: &ExternalAddress,
    cfg: &LandingConfig,
    check_critical: bool,
    keep_level0: bool,
    horizon_levels: usize,
) -> Result<ExtensionOutcome, RayError> {
    let p = cycle.period().len();
    let rcfg = RayConfig::default();
    let (tails, _) = base_curves(lt, cycle, &rcfg, cfg.base_vertices)?;
    let mut pieces: Vec<Vec<Complex64>> =
        tails.iter().map(|t| t.samples.iter().rev().map(|s| s.w).collect()).collect();
    let mut out = ExtensionOutcome {
        near: None,
        converged: false,
        hit: None,
        steps: 0,
        diagnostics: Vec::new(),
        level0: if keep_level0 { pieces[0].clone() } else { Vec::new() },
        tails,
    };
    let mut last_near = *pieces[0].last().expect("nonempty base");
    for step in 1..=cfg.max_steps {
        out.steps = step;
        let starts: Vec<Option<Complex64>> = if step == 1 {
            vec![None; p]
        } else {
            pieces.iter().map(|pc| pc.last().copied()).collect()
        };
        let results: Vec<Result<Piece, String>> = (0..p)
            .into_par_iter()
            .map(|j| {
                let tract: TractId = cycle.period()[j];
                let image = &pieces[(j + 1) % p];
                let start = match starts[j] {
                    Some(s) => s,
                    None => lt.invert(image[0], tract).map_err(|e| e.to_string())?,
                };
                let pb = Pullback { lt, cfg, check_critical: check_critical && j < horizon_levels.max(1) };
                pb.run(image, start)
            })
            .collect();
        let mut next = Vec::with_capacity(p);
        for (j, r) in results.into_iter().enumerate() {
            match r {
                Ok((piece, hit)) => {
                    if let Some((wc, distance)) = hit {
                        out.hit = Some(CriticalHit { level: j, critical_point: wc, distance });
                        out.near = piece.last().copied();
                        return Ok(out);
                    }
                    next.push(piece);
                }
                Err(msg) => {
                    out.diagnostics.push(format!("step {step}, level {j}: {msg}"));
                    out.near = Some(last_near);
                    return Ok(out);
                }
            }
        }
        pieces = next;
        if keep_level0 {
            out.level0.extend_from_slice(&pieces[0][1..]);
        }
        let near = *pieces[0].last().expect("nonempty piece");
        let moved = (near - last_near).norm();
        last_near = near;
        out.near = Some(near);
        if moved < cfg.tol {
            out.converged = true;
            return Ok(out);
        }
    }
    out.diagnostics.push(format!("near end still moving after {} steps", cfg.max_steps));
    Ok(out)
}

/// Extends a periodic ray toward its landing point and classifies the endpoint.
pub fn land_periodic_ray(lt: &LogTransform, addr: &ExternalAddress, cfg: &LandingConfig) -> Result<LandingReport, RayError> {
    if !addr.is_periodic() {
        return Err(RayError::NotPeriodic(addr.to_string()));
    }
    if !admissible(addr, lt.layout()) {
        return Err(RayError::Inadmissible(addr.to_string()));
    }
    let p = addr.period().len();
    let ext = extend(lt, addr, cfg, true, false, p)?;
    let mut ray = ext.tails[0].clone();
    ray.endpoint_estimate = ext.near;
    let mut report = LandingReport {
        ray,
        landing_point: ext.near.map(|w| w.exp()),
        orbit: None,
        verdict: Verdict::Inconclusive,
        steps: ext.steps,
        critical_hit: ext.hit,
        diagnostics: ext.diagnostics,
        cycle_tails: ext.tails,
    };
    if let Some(hit) = ext.hit {
        report.verdict = Verdict::Broken;
        report.diagnostics.push(format!(
            "critical point e^{} met at level {} (distance {:.2e})",
            hit.critical_point, hit.level, hit.distance
        ));
        return Ok(report);
    }
    if !ext.converged {
        return Ok(report);
    }
    let z = report.landing_point.expect("converged extension has a near end");
    match lt.map().find_periodic_orbit(p, z) {
        Ok(orbit) => {
            let gap = orbit.points.iter().map(|q| (q - z).norm()).fold(f64::INFINITY, f64::min);
            if gap < cfg.orbit_tol {
                report.verdict = match orbit.classification {
                    OrbitClass::Repelling => Verdict::LandsRepelling,
                    OrbitClass::Parabolic => Verdict::LandsParabolic,
                    _ => Verdict::Inconclusive,
                };
            } else {
                report.diagnostics.push(format!("polished orbit is {gap:.3e} away from the estimate"));
            }
            report.orbit = Some(orbit);
        }
        Err(e) => report.diagnostics.push(format!("orbit polish failed: {e}")),
    }
    Ok(report)
}

/// Whether the extension of the ray, or one of its first `horizon` forward images, meets a critical point.
pub fn is_broken(lt: &LogTransform, ray: &RayTail, horizon: usize) -> Result<bool, RayError> {
    let cfg = LandingConfig::default();
    let addr = &ray.address;
    let pre = addr.preperiod().len();
    let cycle = addr.shift(pre);
    let pb = Pullback { lt, cfg: &cfg, check_critical: true };
    // The stored tail itself.
    for s in ray.samples.windows(2) {
        let (u0, u1) = (s[0].w, s[1].w);
        if let (Ok(v0), Ok(v1)) = (lt.eval(u0), lt.eval(u1)) {
            if pb.critical_on_segment(u0, u1, v0, v1).is_some() {
                return Ok(true);
            }
        }
    }
    let levels = horizon.saturating_sub(pre) + 1;
    let ext = extend(lt, &cycle, &cfg, true, pre > 0, levels)?;
    if ext.hit.is_some() {
        return Ok(true);
    }
    // Pull the level-0 curve of the cycle back through the preperiod.
    let mut curve = ext.level0;
    for k in (0..pre).rev() {
        if curve.is_empty() {
            break;
        }
        let start = lt.invert(curve[0], *addr.get(k)).map_err(|source| RayError::Branch { t: 0.0, depth: k, source })?;
        let check = Pullback { lt, cfg: &cfg, check_critical: k <= horizon };
        match check.run(&curve, start) {
            Ok((c, hit)) => {
                if hit.is_some() {
                    return Ok(true);
                }
                curve = c;
            }
            Err(_) => break,
        }
    }
    Ok(false)
}

/// Landing reports of the admissible period-p cycles over `symbols` whose rays land on `orbit` within `tol`.
pub fn find_cycle_landing_on(
    lt: &LogTransform,
    orbit: &PeriodicOrbit,
    period: usize,
    symbols: &[TractId],
    cfg: &LandingConfig,
    tol: f64,
) -> Vec<LandingReport> {
    let cycles = super::bouquet::periodic_cycles(symbols, period, lt.layout());
    let reports: Vec<Option<LandingReport>> = cycles
        .par_iter()
        .map(|a| {
            let rep = land_periodic_ray(lt, a, cfg).ok()?;
            let z = rep.landing_point?;
            let gap = orbit.points.iter().map(|q| (q - z).norm()).fold(f64::INFINITY, f64::min);
            (gap < tol && matches!(rep.verdict, Verdict::LandsRepelling | Verdict::LandsParabolic)).then_some(rep)
        })
        .collect();
    reports.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_core::PuncturedPolyMap;
    use crate::symbolic::{Sequence, Side};

    fn example(sign: f64) -> LogTransform {
        let c = |x: f64| Complex64::new(x, 0.0);
        LogTransform::new(PuncturedPolyMap::new(0, &[c(0.0), c(sign)], &[c(1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn sinh_cycle_lands_at_one() {
        let lt = example(-1.0);
        let a = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Zero, 0, 0)]).unwrap();
        let rep = land_periodic_ray(&lt, &a, &LandingConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::LandsRepelling, "{:?}", rep.diagnostics);
        let z = rep.landing_point.unwrap();
        assert!((z - 1.0).norm() < 1e-6);
        let o = rep.orbit.unwrap();
        assert_eq!(o.period, 1);
        assert!((o.multiplier + 2.0).norm() < 1e-9);
        let b = land_periodic_ray(&lt, &a.shift(1), &LandingConfig::default()).unwrap();
        assert!((b.landing_point.unwrap() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn cosh_ray_is_broken() {
        let lt = example(1.0);
        let a = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0)]).unwrap();
        let rep = land_periodic_ray(&lt, &a, &LandingConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Broken, "{:?}", rep.diagnostics);
        assert!(is_broken(&lt, &rep.ray, 3).unwrap());
    }

    #[test]
    fn sinh_rays_are_not_broken() {
        let lt = example(-1.0);
        let a = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Zero, 0, 0)]).unwrap();
        let rep = land_periodic_ray(&lt, &a, &LandingConfig::default()).unwrap();
        assert!(!is_broken(&lt, &rep.ray, 3).unwrap());
    }

    #[test]
    fn preperiodic_address_is_checked_through_preperiod() {
        let lt = example(-1.0);
        let a = Sequence::new(
            vec![TractId::new(Side::Zero, 0, 1)],
            vec![TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Zero, 0, 0)],
        )
        .unwrap();
        let rcfg = RayConfig::default();
        let t0 = super::super::trace::min_parameter(&lt, &a, &rcfg).unwrap();
        let ray = super::super::trace::trace_ray_tail(&lt, &a, &[t0, t0 * 1.5], &rcfg).unwrap();
        assert!(!is_broken(&lt, &ray, 4).unwrap());
    }

    #[test]
    fn segment_distance_basics() {
        let (d, q) = segment_distance(Complex64::new(0.5, 1.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15 && (q - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }
}
