//! Logarithmic coordinates: F(w) = n·w + P(e^w) + Q(e^{−w}), its tracts and inverse branches.
//!
//! Band convention. On side ∞ the asymptotic band centers are (jπ − arg a_p)/p and the
//! band targets ∞ iff j is even; on side 0 the centers are (jπ + arg b_q)/q, again with
//! target ∞ iff j is even. Bands are re-indexed so that band m of strip k has center
//! `base + m·π/deg + 2πk` with `base ∈ [0, π/deg)`.

use crate::map_core::{MapError, PuncturedPolyMap};
use crate::symbolic::{Side, TractGeometry};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

const NEWTON_CAP: usize = 200;
const DAMPING_HALVINGS: usize = 30;
/// Residual accepted from `inverse_branch`, relative to max(1, |ζ|).
pub const BRANCH_RESIDUAL: f64 = 1e-10;
/// Slack of the membership continuation check.
pub const CONTINUATION_SLACK: f64 = 0.2;
/// Distance to a δ-line below which a point counts as lying on a cut.
pub const CUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogError {
    #[error("{term} term overflows at Re w = {re:.3e}")]
    Range { term: &'static str, re: f64 },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("inverse branch failure in tract {tract}: {reason}")]
    BranchFailure { tract: TractId, reason: String },
    #[error("point lies on a δ-cut (distance {0:.2e})")]
    OnCut(f64),
    #[error("point is not in a tract: {0}")]
    NotInTract(String),
    #[error("normalization radius not certified up to R = {0:.3e}; raise the search budget")]
    Budget(f64),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A tract: which singularity it clings to, its band within a 2π strip, and the strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TractId {
    pub side: Side,
    pub band: usize,
    pub strip: i64,
}

impl TractId {
    pub fn new(side: Side, band: usize, strip: i64) -> Self {
        Self { side, band, strip }
    }
}

impl fmt::Display for TractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.side, self.band, self.strip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractInfo {
    pub id: TractId,
    pub target: Side,
    pub center_im: f64,
    pub band_width: f64,
}

/// Asymptotic band geometry of one side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLayout {
    pub degree: usize,
    pub lead: Complex64,
    pub base_center: f64,
    band0_to_infinity: bool,
}

impl SideLayout {
    fn new(side: Side, degree: usize, lead: Complex64) -> Self {
        let d = degree as f64;
        let spacing = PI / d;
        let phase = lead.arg();
        // Any center of the family; then reduce to [0, π/deg).
        let raw = match side {
            Side::Infinity => -phase / d,
            Side::Zero => phase / d,
        };
        let mut base = raw.rem_euclid(spacing);
        if spacing - base < 1e-12 {
            base = 0.0;
        }
        let j0 = match side {
            Side::Infinity => ((d * base + phase) / PI).round() as i64,
            Side::Zero => ((d * base - phase) / PI).round() as i64,
        };
        Self { degree, lead, base_center: base, band0_to_infinity: j0.rem_euclid(2) == 0 }
    }

    pub fn bands(&self) -> usize {
        2 * self.degree
    }
    pub fn band_width(&self) -> f64 {
        PI / self.degree as f64
    }
    pub fn center(&self, band: usize, strip: i64) -> f64 {
        self.base_center + band as f64 * self.band_width() + 2.0 * PI * strip as f64
    }
    pub fn target(&self, band: usize) -> Side {
        if band.is_multiple_of(2) == self.band0_to_infinity {
            Side::Infinity
        } else {
            Side::Zero
        }
    }
    /// Lower edge of band 0: the fundamental strips on this side start here.
    pub fn delta(&self) -> f64 {
        self.base_center - self.band_width() / 2.0
    }
}

/// Band layouts for both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandLayout {
    pub infinity: SideLayout,
    pub zero: SideLayout,
}

impl BandLayout {
    pub fn of(map: &PuncturedPolyMap) -> Self {
        Self {
            infinity: SideLayout::new(Side::Infinity, map.deg_p(), map.lead_p()),
            zero: SideLayout::new(Side::Zero, map.deg_q(), map.lead_q()),
        }
    }
    pub fn side(&self, s: Side) -> &SideLayout {
        match s {
            Side::Infinity => &self.infinity,
            Side::Zero => &self.zero,
        }
    }
    pub fn info(&self, id: TractId) -> TractInfo {
        let l = self.side(id.side);
        TractInfo { id, target: l.target(id.band), center_im: l.center(id.band, id.strip), band_width: l.band_width() }
    }
    /// All tracts of the given strips, side 0 first, bands ascending.
    pub fn catalog(&self, strips: std::ops::RangeInclusive<i64>) -> Vec<TractInfo> {
        let mut out = Vec::new();
        for k in strips {
            for side in [Side::Zero, Side::Infinity] {
                for m in 0..self.side(side).bands() {
                    out.push(self.info(TractId::new(side, m, k)));
                }
            }
        }
        out
    }
    /// Sign of Re F far out along Re w → ±∞ at height Im w, from the dominant term.
    pub fn asymptotic_target(&self, w: Complex64) -> Side {
        let (l, s) = if w.re >= 0.0 { (&self.infinity, 1.0) } else { (&self.zero, -1.0) };
        let angle = l.lead.arg() + s * l.degree as f64 * w.im;
        if angle.cos() >= 0.0 {
            Side::Infinity
        } else {
            Side::Zero
        }
    }
}

impl TractGeometry for BandLayout {
    fn target(&self, t: TractId) -> Side {
        self.side(t.side).target(t.band)
    }
    fn center_im(&self, t: TractId) -> f64 {
        self.side(t.side).center(t.band, t.strip)
    }
    fn band_count(&self, side: Side) -> usize {
        self.side(side).bands()
    }
}

/// Heights of the horizontal δ-lines bounding the fundamental strips, per half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLines {
    /// Used for points with Re ζ > 0.
    pub right: f64,
    /// Used for points with Re ζ < 0.
    pub left: f64,
}

/// floor((im − delta)/2π).
pub fn fundamental_strip(im: f64, delta: f64) -> i64 {
    ((im - delta) / (2.0 * PI)).floor() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationConfig {
    /// Samples per strip-0 tract at the accepted radius.
    pub samples_per_tract: usize,
    pub seed: u64,
    /// Samples of the imaginary axis.
    pub axis_samples: usize,
    /// Exponent range of the radius grid R_j = 2^{j/8}.
    pub grid: std::ops::RangeInclusive<i32>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self { samples_per_tract: 10_000, seed: 0x5eed, axis_samples: 4096, grid: -24..=200 }
    }
}

/// The logarithmic transform of a map together with its normalization.
#[derive(Debug, Clone)]
pub struct LogTransform {
    map: PuncturedPolyMap,
    layout: BandLayout,
    r_norm: f64,
    critical: Vec<(Complex64, Complex64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Inside(TractId),
    Outside,
}

impl LogTransform {
    pub fn new(map: PuncturedPolyMap) -> Result<Self, LogError> {
        Self::with_config(map, &NormalizationConfig::default())
    }

    pub fn with_config(map: PuncturedPolyMap, cfg: &NormalizationConfig) -> Result<Self, LogError> {
        let layout = BandLayout::of(&map);
        let sd = map.critical_points()?;
        let mut critical = Vec::new();
        for c in &sd.critical_points {
            let w = c.ln();
            critical.push((w, map.lift(w)?));
        }
        let mut lt = Self { map, layout, r_norm: f64::NAN, critical };
        lt.r_norm = lt.normalization_radius(cfg, sd.annulus)?;
        Ok(lt)
    }

    pub fn map(&self) -> &PuncturedPolyMap {
        &self.map
    }
    pub fn layout(&self) -> &BandLayout {
        &self.layout
    }
    pub fn r_norm(&self) -> f64 {
        self.r_norm
    }
    /// Critical points of F in the strip |Im| ≤ π, paired with their critical values.
    pub fn critical(&self) -> &[(Complex64, Complex64)] {
        &self.critical
    }
    pub fn delta_lines(&self) -> DeltaLines {
        DeltaLines { right: self.layout.infinity.delta(), left: self.layout.zero.delta() }
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64, LogError> {
        self.map.lift(w).map_err(|e| range_error(&self.map, w, e))
    }
    pub fn deriv(&self, w: Complex64) -> Result<Complex64, LogError> {
        self.map.lift_derivative(w).map_err(|e| range_error(&self.map, w, e))
    }
    pub fn eval_with_deriv(&self, w: Complex64) -> Result<(Complex64, Complex64), LogError> {
        self.map.lift_with_derivative(w).map_err(|e| range_error(&self.map, w, e))
    }

    pub fn info(&self, t: TractId) -> TractInfo {
        self.layout.info(t)
    }
    pub fn tract_catalog(&self, strips: std::ops::RangeInclusive<i64>) -> Vec<TractInfo> {
        self.layout.catalog(strips)
    }

    fn normalization_radius(&self, cfg: &NormalizationConfig, annulus: (f64, f64)) -> Result<f64, LogError> {
        let n = cfg.axis_samples.max(16);
        let mut axis = 0.0f64;
        for i in 0..n {
            let y = 2.0 * PI * i as f64 / n as f64;
            axis = axis.max(self.eval(Complex64::new(0.0, y))?.re.abs());
        }
        let lower = axis.max(annulus.0.ln().abs()).max(annulus.1.ln().abs());
        let mut last = 0.0;
        for j in cfg.grid.clone() {
            let r = 2f64.powf(j as f64 / 8.0);
            last = r;
            if r <= lower {
                continue;
            }
            if self.certify(r, cfg) {
                return Ok(r);
            }
        }
        Err(LogError::Budget(last))
    }

    fn certify(&self, r: f64, cfg: &NormalizationConfig) -> bool {
        for (ti, info) in self.layout.catalog(0..=0).iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (ti as u64).wrapping_mul(0x9e37_79b9));
            for i in 0..cfg.samples_per_tract {
                let zeta = if i < 64 {
                    tip_sample(r, info, i)
                } else {
                    random_sample(r, info, self.map.index(), &mut rng)
                };
                let ok = match self.invert(zeta, info.id) {
                    Ok(w) => {
                        let side_ok = match info.id.side {
                            Side::Infinity => w.re > 0.0,
                            Side::Zero => w.re < 0.0,
                        };
                        side_ok && self.deriv(w).map(|d| d.norm() >= 2.0).unwrap_or(false)
                    }
                    Err(_) => false,
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    /// Tract containing `w`, certified by a continuation check toward the band center.
    pub fn locate_tract(&self, w: Complex64) -> Result<TractId, LogError> {
        let zeta_sign = match self.eval(w) {
            Ok(z) => {
                if z.re.abs() <= self.r_norm {
                    return Err(LogError::NotInTract("below the normalization radius".into()));
                }
                side_of_re(z.re)
            }
            Err(_) => self.layout.asymptotic_target(w),
        };
        if w.re == 0.0 {
            return Err(LogError::NotInTract("on the imaginary axis".into()));
        }
        let side = side_of_re(w.re);
        let l = self.layout.side(side);
        let x = ((w.im - l.base_center) / l.band_width()).floor() as i64;
        let (j, center) = (x - 1..=x + 2)
            .filter(|&j| l.target(j.rem_euclid(2 * l.degree as i64) as usize) == zeta_sign)
            .map(|j| (j, l.base_center + j as f64 * l.band_width()))
            .min_by(|a, b| (a.1 - w.im).abs().total_cmp(&(b.1 - w.im).abs()))
            .expect("two consecutive bands always include both targets");
        let dist = (w.im - center).abs();
        if dist >= l.band_width() * (1.0 - 1e-9) {
            return Err(LogError::NotInTract(format!("ambiguous band assignment at distance {dist:.3e}")));
        }
        for s in 1..=16 {
            let v = Complex64::new(w.re, w.im + (center - w.im) * s as f64 / 16.0);
            let ok = match self.eval(v) {
                Ok(z) => side_of_re(z.re) == zeta_sign && z.re.abs() > self.r_norm * (1.0 - CONTINUATION_SLACK),
                Err(_) => self.layout.asymptotic_target(v) == zeta_sign,
            };
            if !ok {
                return Err(LogError::NotInTract(format!("continuation check failed at Im {:.6}", v.im)));
            }
        }
        let bands = 2 * l.degree as i64;
        Ok(TractId::new(side, j.rem_euclid(bands) as usize, j.div_euclid(bands)))
    }

    /// `locate_tract` without the error detail.
    pub fn locate(&self, w: Complex64) -> Location {
        match self.locate_tract(w) {
            Ok(t) => Location::Inside(t),
            Err(_) => Location::Outside,
        }
    }

    /// The point of tract `t` mapped to ζ by F, with |Re ζ| > r_norm.
    pub fn inverse_branch(&self, zeta: Complex64, t: TractId) -> Result<Complex64, LogError> {
        if !(zeta.re.abs() > self.r_norm) {
            return Err(LogError::Precondition(format!(
                "|Re ζ| = {:.6} does not exceed r_norm = {:.6}",
                zeta.re.abs(),
                self.r_norm
            )));
        }
        let target = self.layout.target(t);
        if side_of_re(zeta.re) != target {
            return Err(LogError::Precondition(format!("ζ is not in the half-plane of target {target} of {t}")));
        }
        self.invert(zeta, t)
    }

    /// Inverse branch without the radius precondition.
    pub(crate) fn invert(&self, zeta: Complex64, t: TractId) -> Result<Complex64, LogError> {
        let info = self.layout.info(t);
        let seed = self.asymptotic_seed(zeta, &info);
        match self.newton_in_band(zeta, seed, &info, 1.0) {
            Ok(w) => Ok(w),
            Err(first) => self.invert_by_continuation(zeta, &info).map_err(|e| LogError::BranchFailure {
                tract: t,
                reason: format!("direct Newton: {first}; continuation: {e}"),
            }),
        }
    }

    fn lead_solve(&self, zeta: Complex64, info: &TractInfo) -> Complex64 {
        let l = self.layout.side(info.id.side);
        let d = l.degree as f64;
        let lg = (zeta / l.lead).ln();
        match info.id.side {
            Side::Infinity => {
                let k = ((d * info.center_im - lg.im) / (2.0 * PI)).round();
                (lg + Complex64::new(0.0, 2.0 * PI * k)) / d
            }
            Side::Zero => {
                let k = ((-d * info.center_im - lg.im) / (2.0 * PI)).round();
                -(lg + Complex64::new(0.0, 2.0 * PI * k)) / d
            }
        }
    }

    fn lead_term(&self, w: Complex64, side: Side) -> Complex64 {
        let l = self.layout.side(side);
        match side {
            Side::Infinity => l.lead * (w * l.degree as f64).exp(),
            Side::Zero => l.lead * (-w * l.degree as f64).exp(),
        }
    }

    fn asymptotic_seed(&self, zeta: Complex64, info: &TractInfo) -> Complex64 {
        let w0 = self.lead_solve(zeta, info);
        if let Ok(fw) = self.map.lift(w0) {
            let rest = fw - self.lead_term(w0, info.id.side);
            let z1 = zeta - rest;
            if z1.norm() > 0.0 && z1.re.is_finite() && z1.im.is_finite() {
                let w1 = self.lead_solve(z1, info);
                if (w1.im - info.center_im).abs() < info.band_width {
                    return w1;
                }
            }
        }
        w0
    }

    fn in_rect(&self, w: Complex64, info: &TractInfo, slack: f64) -> bool {
        let side_ok = match info.id.side {
            Side::Infinity => w.re > 0.0,
            Side::Zero => w.re < 0.0,
        };
        side_ok && (w.im - info.center_im).abs() < info.band_width * slack
    }

    pub(crate) fn newton_in_band(
        &self,
        zeta: Complex64,
        mut w: Complex64,
        info: &TractInfo,
        slack: f64,
    ) -> Result<Complex64, String> {
        let scale = zeta.norm().max(1.0);
        if !self.in_rect(w, info, slack) {
            w = Complex64::new(w.re, info.center_im);
            if !self.in_rect(w, info, slack) {
                return Err("seed outside the band".into());
            }
        }
        for _ in 0..NEWTON_CAP {
            let (f, d) = self.eval_with_deriv(w).map_err(|e| e.to_string())?;
            let r = f - zeta;
            if r.norm() <= 1e-15 * scale {
                return Ok(w);
            }
            if d.norm() == 0.0 {
                return Err("vanishing derivative".into());
            }
            let step = r / d;
            let mut lambda = 1.0;
            let mut next = w - step;
            let mut halvings = 0;
            while !(self.in_rect(next, info, slack) && self.map.lift(next).is_ok()) {
                halvings += 1;
                if halvings > DAMPING_HALVINGS {
                    return Err(format!("iterate left the band at w = {w}"));
                }
                lambda *= 0.5;
                next = w - step * lambda;
            }
            w = next;
            if step.norm() * lambda <= 1e-15 * w.norm().max(1.0) {
                break;
            }
        }
        let res = (self.eval(w).map_err(|e| e.to_string())? - zeta).norm();
        if res < BRANCH_RESIDUAL * scale {
            Ok(w)
        } else {
            Err(format!("iteration cap reached with residual {res:.3e}"))
        }
    }

    fn invert_by_continuation(&self, zeta: Complex64, info: &TractInfo) -> Result<Complex64, String> {
        let sgn = if zeta.re > 0.0 { 1.0 } else { -1.0 };
        let scale = zeta.norm().max(1.0);
        let mut d = 4.0 * scale + 100.0;
        let start = zeta + sgn * d;
        let mut w = self.newton_in_band(start, self.asymptotic_seed(start, info), info, 1.5)?;
        loop {
            d *= 0.5;
            let last = d < 1e-3 * scale;
            let z = if last { zeta } else { zeta + sgn * d };
            w = self.newton_in_band(z, w, info, 1.5)?;
            if last {
                return Ok(w);
            }
        }
    }

    /// Fundamental strip of F(w) relative to the δ-line of its half-plane.
    pub fn fundamental_domain_index(&self, w: Complex64) -> Result<i64, LogError> {
        self.locate_tract(w)?;
        let z = self.eval(w)?;
        let dl = self.delta_lines();
        let delta = if z.re > 0.0 { dl.right } else { dl.left };
        let x = (z.im - delta) / (2.0 * PI);
        let gap = (x - x.round()).abs() * 2.0 * PI;
        if gap < CUT_TOL {
            return Err(LogError::OnCut(gap));
        }
        Ok(fundamental_strip(z.im, delta))
    }

    /// Random tract points with |Re F| ≥ r_norm, drawn through the inverse branch.
    pub fn sample_tract(&self, t: TractId, count: usize, rng: &mut ChaCha8Rng, far: bool) -> Vec<(Complex64, Complex64)> {
        let info = self.layout.info(t);
        let r = self.r_norm * (1.0 + 1e-9);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count && attempts < 4 * count + 64 {
            attempts += 1;
            let zeta = if far && rng.gen_bool(0.5) {
                far_sample(r, &info, self.map.index(), rng)
            } else {
                random_sample(r, &info, self.map.index(), rng)
            };
            if let Ok(w) = self.invert(zeta, t) {
                out.push((zeta, w));
            }
        }
        out
    }

    /// Sampled check of the expansion estimates on the strip-0 tracts.
    pub fn expansivity_report(&self, samples_per_tract: usize, pairs_per_tract: usize, seed: u64) -> ExpansivityReport {
        let r = self.r_norm;
        let mut rep = ExpansivityReport {
            samples: 0,
            excluded: 0,
            derivative_violations: 0,
            min_derivative: f64::INFINITY,
            min_bound_margin: f64::INFINITY,
            pairs: 0,
            pair_violations: 0,
            min_pair_ratio: f64::INFINITY,
        };
        for (ti, info) in self.layout.catalog(0..=0).iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(977 * ti as u64));
            let pts = self.sample_tract(info.id, samples_per_tract, &mut rng, true);
            let mut kept = Vec::with_capacity(pts.len());
            for (_, w) in pts {
                let Ok((f, d)) = self.eval_with_deriv(w) else {
                    rep.excluded += 1;
                    continue;
                };
                if f.re.abs() < r {
                    rep.excluded += 1;
                    continue;
                }
                rep.samples += 1;
                let fd = d.norm();
                rep.min_derivative = rep.min_derivative.min(fd);
                if fd < 2.0 {
                    rep.derivative_violations += 1;
                }
                rep.min_bound_margin = rep.min_bound_margin.min(fd - (f.re.abs() / (4.0 * PI) - r));
                kept.push((w, f));
            }
            if kept.len() < 2 {
                continue;
            }
            let mut found = 0;
            let mut tries = 0;
            while found < pairs_per_tract && tries < 200 * pairs_per_tract {
                tries += 1;
                let a = kept[rng.gen_range(0..kept.len())];
                let b = kept[rng.gen_range(0..kept.len())];
                let dist = (a.0 - b.0).norm();
                if dist < 8.0 * PI {
                    continue;
                }
                found += 1;
                rep.pairs += 1;
                let lhs = (a.1 - b.1).norm();
                let rhs = (dist / (8.0 * PI)).exp() * (a.1.re.abs().min(b.1.re.abs()) - r);
                if rhs > 0.0 {
                    rep.min_pair_ratio = rep.min_pair_ratio.min(lhs / rhs);
                }
                if lhs < rhs {
                    rep.pair_violations += 1;
                }
            }
        }
        rep
    }
}

/// Outcome of `expansivity_report`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansivityReport {
    pub samples: usize,
    pub excluded: usize,
    pub derivative_violations: usize,
    pub min_derivative: f64,
    /// min over samples of |F'| − (|Re F|/4π − R).
    pub min_bound_margin: f64,
    pub pairs: usize,
    pub pair_violations: usize,
    pub min_pair_ratio: f64,
}

impl ExpansivityReport {
    pub fn passes(&self) -> bool {
        self.derivative_violations == 0 && self.pair_violations == 0 && self.min_bound_margin >= 0.0
    }
}

pub(crate) fn side_of_re(x: f64) -> Side {
    if x > 0.0 {
        Side::Infinity
    } else {
        Side::Zero
    }
}

fn range_error(map: &PuncturedPolyMap, w: Complex64, e: MapError) -> LogError {
    match e {
        MapError::Range(_) => {
            let _ = map;
            let term = if w.re >= 0.0 { "P(e^w)" } else { "Q(e^-w)" };
            LogError::Range { term, re: w.re }
        }
        other => LogError::Map(other),
    }
}

fn half_plane_sign(info: &TractInfo) -> f64 {
    match info.target {
        Side::Infinity => 1.0,
        Side::Zero => -1.0,
    }
}

/// Points just beyond the radius, near the tract tip.
fn tip_sample(r: f64, info: &TractInfo, i: usize) -> Complex64 {
    let s = half_plane_sign(info);
    let y = ((i as f64 - 31.5) / 8.0).sinh() * r.max(1.0);
    Complex64::new(s * r * (1.0 + 1e-9), y)
}

fn random_sample(r: f64, info: &TractInfo, n: i64, rng: &mut ChaCha8Rng) -> Complex64 {
    let s = half_plane_sign(info);
    let re = r * (rng.gen::<f64>() * 1e3f64.ln()).exp() * (1.0 + 1e-9);
    let mag = (rng.gen::<f64>() * 1e4f64.ln()).exp() - 1.0;
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(s * re, n as f64 * info.center_im + sign * mag * r.max(1.0))
}

fn far_sample(r: f64, info: &TractInfo, n: i64, rng: &mut ChaCha8Rng) -> Complex64 {
    let s = half_plane_sign(info);
    let re = r * (rng.gen::<f64>() * 1e120f64.ln()).exp() * (1.0 + 1e-9);
    let y = (rng.gen::<f64>() - 0.5) * 2.0 * re.min(1e6);
    Complex64::new(s * re, n as f64 * info.center_im + y)
}
