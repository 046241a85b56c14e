//! Ray tails by pullback of center-line seeds.
//!
//! Model heights: h₀ = t and h_{k+1} = |Re F(c_k(h_k))| where c_k(h) = ±h + i·center(T_k).
//! The seed at depth N is c_N(h_N); it is pulled back through T_{N−1}, …, T₀. Depth grows
//! until the base point moves less than `tol`, or until the next model height exceeds
//! `height_cap`. In that case the estimate counts as converged when the seed offset, scaled by
//! the pullback derivative, is under `tol`; the model residual there is of order 1/h_{N+1}.

use super::RayError;
use crate::logspace::{side_of_re, LogTransform, TractId};
use crate::symbolic::{admissible, ExternalAddress, Side};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest parameter whose plane point e^w is representable.
pub const MAX_PLANE_T: f64 = 700.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RayConfig {
    pub tol: f64,
    pub max_depth: usize,
    pub height_cap: f64,
    /// Added to the deepest seed; used to check seed independence.
    pub seed_offset: Complex64,
}

impl Default for RayConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_depth: 40, height_cap: 1e300, seed_offset: Complex64::new(0.0, 0.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub w: Complex64,
    pub z: Complex64,
    pub depth: usize,
    pub converged: bool,
    /// |w_{N+1} − w_N| for each depth increment.
    pub displacements: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayTail {
    pub address: ExternalAddress,
    pub samples: Vec<RaySample>,
    pub depth_used: usize,
    pub endpoint_estimate: Option<Complex64>,
    pub converged: bool,
}

impl RayTail {
    /// Ratios of consecutive depth displacements above the rounding floor.
    pub fn displacement_ratios(&self) -> Vec<f64> {
        self.samples.iter().flat_map(sample_ratios).collect()
    }
}

/// Consecutive displacement ratios of one sample, skipping values at rounding level.
pub fn sample_ratios(s: &RaySample) -> Vec<f64> {
    let floor = 1e-13 * s.w.norm().max(1.0);
    s.displacements
        .windows(2)
        .filter(|d| d[0] > floor && d[1] > floor)
        .map(|d| d[1] / d[0])
        .collect()
}

fn center_point(lt: &LogTransform, t: TractId, h: f64) -> Complex64 {
    let s = match t.side {
        Side::Infinity => 1.0,
        Side::Zero => -1.0,
    };
    Complex64::new(s * h, lt.info(t).center_im)
}

/// g_T(h). `Ok(None)` when the height exceeds the cap.
pub fn next_height(lt: &LogTransform, t: TractId, h: f64, cap: f64) -> Result<Option<f64>, String> {
    let c = center_point(lt, t, h);
    let info = lt.info(t);
    let v = match lt.eval(c) {
        Ok(v) => v,
        Err(_) => {
            return if lt.layout().asymptotic_target(c) == info.target {
                Ok(None)
            } else {
                Err(format!("center line of {t} at height {h:.6} maps to the wrong half-plane"))
            };
        }
    };
    if side_of_re(v.re) != info.target {
        return Err(format!("center line of {t} at height {h:.6} maps to the wrong half-plane"));
    }
    let next = v.re.abs();
    if next > cap {
        return Ok(None);
    }
    if next <= lt.r_norm() {
        return Err(format!("model height {next:.6} after {t} is below the normalization radius"));
    }
    Ok(Some(next))
}

/// One converged base point at parameter t.
pub fn trace_point(lt: &LogTransform, addr: &ExternalAddress, t: f64, cfg: &RayConfig) -> Result<RaySample, RayError> {
    let r = lt.r_norm();
    if !(t > r) {
        return Err(RayError::Grid(format!("t = {t} does not exceed r_norm = {r}")));
    }
    let mut heights = vec![t];
    let mut prev: Option<(Complex64, f64)> = None;
    let mut displacements = Vec::new();
    for depth in 0..=cfg.max_depth {
        if depth > 0 {
            match next_height(lt, *addr.get(depth - 1), heights[depth - 1], cfg.height_cap)
                .map_err(|msg| RayError::Seed { t, depth, msg })?
            {
                Some(h) => heights.push(h),
                None => {
                    // The seed error at a saturated level is |seed_offset|; the model residual is ~1/h.
                    let (w, gain) = prev.expect("depth 0 always computed");
                    let converged = cfg.seed_offset.norm() * gain < cfg.tol;
                    return Ok(RaySample { t, w, z: w.exp(), depth: depth - 1, converged, displacements });
                }
            }
        }
        let mut zeta = center_point(lt, *addr.get(depth), heights[depth]) + cfg.seed_offset;
        let mut gain = 1.0;
        for k in (0..depth).rev() {
            if !(zeta.re.abs() > r) {
                return Err(RayError::Seed { t, depth, msg: format!("pullback left the normalized region at level {k}") });
            }
            zeta = lt.invert(zeta, *addr.get(k)).map_err(|source| RayError::Branch { t, depth, source })?;
            gain /= lt.deriv(zeta).map_err(|source| RayError::Branch { t, depth, source })?.norm();
        }
        if let Some((p, _)) = prev {
            let d = (zeta - p).norm();
            displacements.push(d);
            if d < cfg.tol {
                return Ok(RaySample { t, w: zeta, z: zeta.exp(), depth, converged: true, displacements });
            }
        }
        prev = Some((zeta, gain));
    }
    let (w, _) = prev.expect("at least one depth");
    Ok(RaySample { t, w, z: w.exp(), depth: cfg.max_depth, converged: false, displacements })
}

pub fn trace_ray_tail(
    lt: &LogTransform,
    addr: &ExternalAddress,
    t_grid: &[f64],
    cfg: &RayConfig,
) -> Result<RayTail, RayError> {
    if !admissible(addr, lt.layout()) {
        return Err(RayError::Inadmissible(addr.to_string()));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(RayError::Grid("t grid must be nonempty and strictly increasing".into()));
    }
    if !(t_grid[0] > lt.r_norm()) || t_grid[t_grid.len() - 1] > MAX_PLANE_T {
        return Err(RayError::Grid(format!(
            "t grid must lie in ({}, {}]",
            lt.r_norm(),
            MAX_PLANE_T
        )));
    }
    let samples: Vec<RaySample> = t_grid
        .par_iter()
        .map(|&t| trace_point(lt, addr, t, cfg))
        .collect::<Result<_, _>>()?;
    let depth_used = samples.iter().map(|s| s.depth).max().unwrap_or(0);
    let converged = samples.iter().all(|s| s.converged);
    Ok(RayTail { address: addr.clone(), samples, depth_used, endpoint_estimate: None, converged })
}

/// Smallest parameter on the grid r_norm·1.05^j at which the trace succeeds.
pub fn min_parameter(lt: &LogTransform, addr: &ExternalAddress, cfg: &RayConfig) -> Result<f64, RayError> {
    let base = lt.r_norm() * (1.0 + 1e-6);
    for j in 0..200 {
        let t = base * 1.05f64.powi(j);
        if t > MAX_PLANE_T {
            break;
        }
        if let Ok(s) = trace_point(lt, addr, t, cfg) {
            if s.converged {
                return Ok(t);
            }
        }
    }
    Err(RayError::Grid(format!("no valid parameter found for {addr}")))
}

/// `count` geometrically spaced parameters from `min_parameter`·(1 + margin) to `t_max`.
pub fn geometric_grid(t_min: f64, t_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t_min];
    }
    let ratio = (t_max / t_min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| t_min * ratio.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_core::PuncturedPolyMap;
    use crate::symbolic::Sequence;

    fn example(sign: f64) -> LogTransform {
        let c = |x: f64| Complex64::new(x, 0.0);
        LogTransform::new(PuncturedPolyMap::new(0, &[c(0.0), c(sign)], &[c(1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn real_ray_of_cosh_map() {
        let lt = example(1.0);
        let addr = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0)]).unwrap();
        let t0 = min_parameter(&lt, &addr, &RayConfig::default()).unwrap();
        let grid = geometric_grid(t0, 40.0, 12);
        let ray = trace_ray_tail(&lt, &addr, &grid, &RayConfig::default()).unwrap();
        assert!(ray.converged);
        for s in &ray.samples {
            assert_eq!(s.w.im, 0.0);
            assert!((s.w.re - s.t).abs() < 1e-12);
            assert!((s.z - s.w.exp()).norm() == 0.0);
        }
    }

    #[test]
    fn period_two_rays_are_real() {
        let lt = example(-1.0);
        let a = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Zero, 0, 0)]).unwrap();
        let t0 = min_parameter(&lt, &a, &RayConfig::default()).unwrap();
        let ray = trace_ray_tail(&lt, &a, &geometric_grid(t0, 20.0, 8), &RayConfig::default()).unwrap();
        for s in &ray.samples {
            assert_eq!(s.w.im, 0.0);
            assert!(s.z.re > 1.0);
        }
        let b = a.shift(1);
        let t0 = min_parameter(&lt, &b, &RayConfig::default()).unwrap();
        let ray = trace_ray_tail(&lt, &b, &geometric_grid(t0, 20.0, 8), &RayConfig::default()).unwrap();
        for s in &ray.samples {
            assert!(s.z.re > 0.0 && s.z.re < 1.0 && s.w.im == 0.0);
        }
    }

    #[test]
    fn grid_contract() {
        let lt = example(1.0);
        let addr = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0)]).unwrap();
        let cfg = RayConfig::default();
        assert!(trace_ray_tail(&lt, &addr, &[], &cfg).is_err());
        assert!(trace_ray_tail(&lt, &addr, &[5.0, 4.0], &cfg).is_err());
        assert!(trace_ray_tail(&lt, &addr, &[lt.r_norm() * 0.5], &cfg).is_err());
        let bad = Sequence::periodic(vec![TractId::new(Side::Infinity, 1, 0)]).unwrap();
        assert!(matches!(trace_ray_tail(&lt, &bad, &[5.0], &cfg), Err(RayError::Inadmissible(_))));
    }
}
