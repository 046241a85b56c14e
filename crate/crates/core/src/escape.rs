//! Escape-time classification of the punctured plane with essential-itinerary prefixes.
//!
//! Orbits are carried as w = log z. While |Re w| stays below the switch threshold the next
//! value is the principal log of f(e^w); beyond it the lift F(w) is used, which never forms
//! e^w. Symbols e_n = [Re w_n > 0] are recorded from n = 0.

use crate::logspace::BandLayout;
use crate::map_core::PuncturedPolyMap;
use crate::symbolic::Side;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

pub const MAX_PREFIX: usize = 64;
pub const SWITCH_LOG_RADIUS: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EscapeError {
    #[error("viewport: {0}")]
    Viewport(String),
    #[error("parameters: {0}")]
    Params(String),
    #[error("thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    center: Complex64,
    half_width: f64,
    half_height: f64,
    px_w: usize,
    px_h: usize,
}

impl Viewport {
    pub fn new(center: Complex64, half_width: f64, half_height: f64, px_w: usize, px_h: usize) -> Result<Self, EscapeError> {
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(EscapeError::Viewport("center must be finite".into()));
        }
        if !(half_width > 0.0 && half_height > 0.0 && half_width.is_finite() && half_height.is_finite()) {
            return Err(EscapeError::Viewport("half extents must be positive".into()));
        }
        if px_w == 0 || px_h == 0 {
            return Err(EscapeError::Viewport("pixel dimensions must be positive".into()));
        }
        let aspect = (half_width / half_height) / (px_w as f64 / px_h as f64);
        if (aspect - 1.0).abs() > 1e-3 {
            return Err(EscapeError::Viewport(format!(
                "region aspect {:.6} does not match pixel aspect {:.6}",
                half_width / half_height,
                px_w as f64 / px_h as f64
            )));
        }
        Ok(Self { center, half_width, half_height, px_w, px_h })
    }

    /// Square region [c−h, c+h] × [c−h, c+h] at `px`×`px`.
    pub fn square(center: Complex64, half: f64, px: usize) -> Result<Self, EscapeError> {
        Self::new(center, half, half, px, px)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn half_height(&self) -> f64 {
        self.half_height
    }
    pub fn width(&self) -> usize {
        self.px_w
    }
    pub fn height(&self) -> usize {
        self.px_h
    }

    /// Center of pixel (col, row); row 0 is the top.
    pub fn pixel_center(&self, col: usize, row: usize) -> Complex64 {
        let re = self.center.re - self.half_width + (col as f64 + 0.5) * 2.0 * self.half_width / self.px_w as f64;
        let im = self.center.im + self.half_height - (row as f64 + 0.5) * 2.0 * self.half_height / self.px_h as f64;
        Complex64::new(re, im)
    }

    /// Pixel containing z, if inside.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let x = (z.re - (self.center.re - self.half_width)) / (2.0 * self.half_width) * self.px_w as f64;
        let y = ((self.center.im + self.half_height) - z.im) / (2.0 * self.half_height) * self.px_h as f64;
        (x >= 0.0 && y >= 0.0 && x < self.px_w as f64 && y < self.px_h as f64).then_some((x as usize, y as usize))
    }

    pub fn pixel_diagonal(&self) -> f64 {
        (2.0 * self.half_width / self.px_w as f64).hypot(2.0 * self.half_height / self.px_h as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Escaped,
    Bounded,
    Undecided,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Escaped => "escaped",
            Status::Bounded => "bounded",
            Status::Undecided => "undecided",
        }
    }
}

/// Itinerary prefix: bit i set iff e_i = ∞.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Prefix {
    pub len: u8,
    pub bits: u64,
}

impl Prefix {
    pub fn push(&mut self, s: Side) {
        debug_assert!((self.len as usize) < MAX_PREFIX);
        if s == Side::Infinity {
            self.bits |= 1 << self.len;
        }
        self.len += 1;
    }
    pub fn len(&self) -> usize {
        self.len as usize
    }
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    pub fn get(&self, i: usize) -> Option<Side> {
        (i < self.len()).then(|| if self.bits >> i & 1 == 1 { Side::Infinity } else { Side::Zero })
    }
    pub fn symbols(&self) -> Vec<Side> {
        (0..self.len()).filter_map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            f.write_str(if s == Side::Infinity { "∞" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelClass {
    pub status: Status,
    pub first_escape_iter: Option<u32>,
    pub itinerary_prefix: Prefix,
    /// log|f^m(z)| at the last computed iterate.
    pub last_log_modulus: f64,
    /// arg f^m(z) in (−π, π] at the last computed iterate.
    pub last_arg: f64,
}

impl PixelClass {
    /// The last computed iterate, when representable.
    pub fn last_point(&self) -> Complex64 {
        Complex64::from_polar(self.last_log_modulus.exp(), self.last_arg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeParams {
    pub max_iter: u32,
    pub escape_log_radius: f64,
    pub prefix_len: usize,
}

impl EscapeParams {
    /// max_iter 256, prefix length 4, escape radius max(r_norm, 50).
    pub fn with_radius(r_norm: f64) -> Self {
        Self { max_iter: 256, escape_log_radius: r_norm.max(50.0), prefix_len: 4 }
    }

    pub fn validate(&self) -> Result<(), EscapeError> {
        if !(self.escape_log_radius > 0.0 && self.escape_log_radius.is_finite()) {
            return Err(EscapeError::Params("escape_log_radius must be positive".into()));
        }
        if self.prefix_len == 0 || self.prefix_len > MAX_PREFIX {
            return Err(EscapeError::Params(format!("prefix_len must be in 1..={MAX_PREFIX}")));
        }
        Ok(())
    }
}

fn wrap_arg(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn side_of(w: Complex64) -> Side {
    if w.re > 0.0 {
        Side::Infinity
    } else {
        Side::Zero
    }
}

/// One step in log coordinates: plane evaluation below the switch radius, the lift above it.
pub fn log_step(map: &PuncturedPolyMap, w: Complex64, switch: f64) -> Option<Complex64> {
    let next = if w.re.abs() <= switch {
        map.exponent(w.exp()).ok()?
    } else {
        map.lift(w).ok()?
    };
    (next.re.is_finite() && next.im.is_finite()).then(|| Complex64::new(next.re, wrap_arg(next.im)))
}

fn classify_with(map: &PuncturedPolyMap, layout: &BandLayout, z: Complex64, p: &EscapeParams) -> PixelClass {
    let mut out = PixelClass {
        status: Status::Undecided,
        first_escape_iter: None,
        itinerary_prefix: Prefix::default(),
        last_log_modulus: f64::NAN,
        last_arg: f64::NAN,
    };
    if !(z.norm() > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        out.last_log_modulus = 0.0;
        out.last_arg = 0.0;
        return out;
    }
    let switch = SWITCH_LOG_RADIUS.min(p.escape_log_radius);
    let mut w = z.ln();
    let mut n: u32 = 0;
    loop {
        out.last_log_modulus = w.re;
        out.last_arg = w.im;
        if out.itinerary_prefix.len() < p.prefix_len {
            out.itinerary_prefix.push(side_of(w));
        }
        if out.first_escape_iter.is_none() && w.re.abs() > p.escape_log_radius {
            out.first_escape_iter = Some(n);
            out.status = Status::Escaped;
        }
        let escaped = out.first_escape_iter.is_some();
        if escaped && out.itinerary_prefix.len() >= p.prefix_len {
            return out;
        }
        if !escaped && n >= p.max_iter {
            out.status = Status::Bounded;
            return out;
        }
        match log_step(map, w, switch) {
            Some(next) => w = next,
            None => {
                if escaped {
                    // Saturated: the next symbol is the target of the current tract.
                    if out.itinerary_prefix.len() < p.prefix_len {
                        out.itinerary_prefix.push(layout.asymptotic_target(w));
                    }
                } else {
                    out.status = Status::Undecided;
                }
                return out;
            }
        }
        n += 1;
    }
}

pub fn classify_point(map: &PuncturedPolyMap, z: Complex64, params: &EscapeParams) -> PixelClass {
    classify_with(map, &BandLayout::of(map), z, params)
}

/// Row-major raster, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub viewport: Viewport,
    pub pixels: Vec<PixelClass>,
}

impl Raster {
    pub fn width(&self) -> usize {
        self.viewport.width()
    }
    pub fn height(&self) -> usize {
        self.viewport.height()
    }
    pub fn at(&self, col: usize, row: usize) -> &PixelClass {
        &self.pixels[row * self.width() + col]
    }
}

/// Classifies every pixel center. `threads = None` uses the global pool.
pub fn classify_grid(
    map: &PuncturedPolyMap,
    vp: &Viewport,
    params: &EscapeParams,
    threads: Option<usize>,
) -> Result<Raster, EscapeError> {
    params.validate()?;
    let layout = BandLayout::of(map);
    let blank = PixelClass {
        status: Status::Undecided,
        first_escape_iter: None,
        itinerary_prefix: Prefix::default(),
        last_log_modulus: 0.0,
        last_arg: 0.0,
    };
    let mut pixels = vec![blank; vp.width() * vp.height()];
    let work = |pixels: &mut Vec<PixelClass>| {
        pixels.par_chunks_mut(vp.width()).enumerate().for_each(|(row, line)| {
            for (col, px) in line.iter_mut().enumerate() {
                *px = classify_with(map, &layout, vp.pixel_center(col, row), params);
            }
        });
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| EscapeError::Threads(e.to_string()))?
            .install(|| work(&mut pixels)),
        None => work(&mut pixels),
    }
    Ok(Raster { viewport: *vp, pixels })
}

/// Escaped-pixel counts per itinerary prefix.
pub fn itinerary_histogram(raster: &Raster) -> BTreeMap<Prefix, usize> {
    raster
        .pixels
        .par_chunks(raster.width().max(1))
        .map(|row| {
            let mut m = BTreeMap::new();
            for p in row.iter().filter(|p| p.status == Status::Escaped) {
                *m.entry(p.itinerary_prefix).or_insert(0) += 1;
            }
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn sym(a: f64, n: i64) -> PuncturedPolyMap {
        PuncturedPolyMap::new(n, &[c(0.0, 0.0), c(a, 0.0)], &[c(a.abs(), 0.0)]).unwrap()
    }
    fn params() -> EscapeParams {
        EscapeParams::with_radius(1.0)
    }

    #[test]
    fn point_examples() {
        let p = classify_point(&sym(1.0, 0), c(3.0, 0.0), &params());
        assert_eq!(p.status, Status::Escaped);
        assert_eq!(p.itinerary_prefix.symbols(), vec![Side::Infinity; 4]);

        let p = classify_point(&sym(0.3, 0), c(2.0, 0.0), &params());
        assert_eq!(p.status, Status::Bounded);
        assert!((p.last_point() - c(2.2373, 0.0)).norm() < 1e-3);

        let p = classify_point(&sym(-1.0, 0), c(0.5, 0.0), &params());
        assert_eq!(p.status, Status::Escaped);
        assert_eq!(p.itinerary_prefix.to_string(), "0∞0∞");
    }

    #[test]
    fn switch_is_seamless() {
        let m = PuncturedPolyMap::new(1, &[c(0.1, 0.2), c(0.3, -0.1)], &[c(0.0, 0.0), c(0.2, 0.1)]).unwrap();
        for k in 0..200 {
            let re = 25.0 + 10.0 * k as f64 / 200.0;
            let w = c(if k % 2 == 0 { re } else { -re }, 0.37 * k as f64 - 30.0);
            let a = m.exponent(w.exp()).unwrap();
            let b = m.lift(w).unwrap();
            assert!((a.re - b.re).abs() <= 1e-12 * a.re.abs().max(1.0), "{a} {b}");
            let d = (a.im - b.im) / (2.0 * PI);
            assert!((d - d.round()).abs() * 2.0 * PI <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn saturation_records_target() {
        let mut p = params();
        p.prefix_len = 8;
        let r = classify_point(&sym(1.0, 0), c(3.0, 0.0), &p);
        assert_eq!(r.status, Status::Escaped);
        assert!(!r.itinerary_prefix.is_empty() && r.itinerary_prefix.len() < 8);
        assert!(r.last_log_modulus.is_finite());
    }

    #[test]
    fn viewport_contract() {
        assert!(Viewport::new(c(0.0, 0.0), 1.0, 1.0, 10, 20).is_err());
        assert!(Viewport::new(c(0.0, 0.0), 0.0, 1.0, 10, 10).is_err());
        let v = Viewport::square(c(1.0, -1.0), 2.0, 4).unwrap();
        assert_eq!(v.pixel_center(0, 0), c(-0.5, 0.5));
        assert_eq!(v.pixel_of(c(-0.5, 0.5)), Some((0, 0)));
        assert_eq!(v.pixel_of(c(10.0, 0.0)), None);
    }

    #[test]
    fn single_pixel_grid_matches_point() {
        let m = sym(0.3, 0);
        let v = Viewport::square(c(2.0, 0.5), 0.1, 1).unwrap();
        let g = classify_grid(&m, &v, &params(), Some(2)).unwrap();
        let p = classify_point(&m, c(2.0, 0.5), &params());
        assert_eq!(g.pixels[0].status, p.status);
        assert_eq!(g.pixels[0].itinerary_prefix, p.itinerary_prefix);
        assert_eq!(g.pixels[0].last_log_modulus.to_bits(), p.last_log_modulus.to_bits());
    }

    #[test]
    fn histogram_examples() {
        let m = sym(1.0, 0);
        let v = Viewport::square(c(20.0, 0.0), 1.0, 4).unwrap();
        let mut p = params();
        p.prefix_len = 2;
        let g = classify_grid(&m, &v, &p, None).unwrap();
        let h = itinerary_histogram(&g);
        assert_eq!(h.len(), 1);
        let empty = Raster { viewport: v, pixels: vec![] };
        assert!(itinerary_histogram(&empty).is_empty());
    }
}
