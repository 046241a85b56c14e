//! Palettes and file formats: binary P6 pixmaps, ray records, raster dumps, tract polylines.

use super::config::Style;
use crate::error::{Error, Result};
use crate::escape::{PixelClass, Raster, Status};
use crate::rays::RayTail;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Rgb = [u8; 3];

pub const ORANGE: Rgb = [255, 165, 0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Palette {
    pub style: Style,
    pub bounded: Rgb,
    pub undecided: Rgb,
}

impl Default for Palette {
    fn default() -> Self {
        Self { style: Style::Itinerary, bounded: ORANGE, undecided: [0, 0, 0] }
    }
}

/// HSL with h in turns, s and l in [0, 1].
pub fn hsl(h: f64, s: f64, l: f64) -> Rgb {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h.rem_euclid(1.0) * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let q = |v: f64| ((v + m).clamp(0.0, 1.0) * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

impl Palette {
    /// Escaped pixels: hue from the prefix, luminance from the escape iteration.
    pub fn itinerary_color(&self, p: &PixelClass) -> Rgb {
        match p.status {
            Status::Bounded => self.bounded,
            Status::Undecided => self.undecided,
            Status::Escaped => {
                let key = p.itinerary_prefix.bits.wrapping_add((p.itinerary_prefix.len as u64) << 40);
                let hue = (key as f64 * GOLDEN).fract();
                let it = p.first_escape_iter.unwrap_or(0) as f64;
                hsl(hue, 0.75, 0.25 + 0.5 / (1.0 + it / 4.0))
            }
        }
    }

    /// Phase portrait of a value given in log form: hue from the argument, luminance from log-modulus.
    pub fn phase_color(log_value: Complex64) -> Rgb {
        if !(log_value.re.is_finite() && log_value.im.is_finite()) {
            return [0, 0, 0];
        }
        let hue = log_value.im.rem_euclid(2.0 * PI) / (2.0 * PI);
        let l = 0.3 + 0.4 * (log_value.re / 2.0).rem_euclid(1.0);
        hsl(hue, 0.9, l)
    }
}

pub fn encode_p6(width: usize, height: usize, pixels: &[Rgb]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel count does not match dimensions");
    let header = format!("P6\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + 3 * pixels.len());
    out.extend_from_slice(header.as_bytes());
    for p in pixels {
        out.extend_from_slice(p);
    }
    out
}

pub fn raster_colors(raster: &Raster, palette: &Palette) -> Vec<Rgb> {
    raster.pixels.iter().map(|p| palette.itinerary_color(p)).collect()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_image(raster: &Raster, palette: &Palette, path: &Path) -> Result<()> {
    write_bytes(path, &encode_p6(raster.width(), raster.height(), &raster_colors(raster, palette)))
}

pub fn write_pixels(width: usize, height: usize, pixels: &[Rgb], path: &Path) -> Result<()> {
    write_bytes(path, &encode_p6(width, height, pixels))
}

fn header(kind: &str, columns: &str) -> String {
    format!("# starhairs {VERSION} {kind}\t{columns}\n")
}

/// One line per sample: address, t, Re w, Im w, Re z, Im z.
pub fn format_rays(rays: &[RayTail]) -> String {
    let mut s = header("rays", "address\tt\tre_w\tim_w\tre_z\tim_z");
    for r in rays {
        let addr = r.address.to_string();
        for p in &r.samples {
            writeln!(s, "{addr}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}", p.t, p.w.re, p.w.im, p.z.re, p.z.im)
                .expect("write to string");
        }
    }
    s
}

pub fn write_rays(rays: &[RayTail], path: &Path) -> Result<()> {
    write_bytes(path, format_rays(rays).as_bytes())
}

/// One line per pixel in raster order.
pub fn format_raster(raster: &Raster) -> String {
    let mut s = header(
        &format!("raster {}x{}", raster.width(), raster.height()),
        "row\tcol\tstatus\tfirst_escape_iter\tprefix\tlast_log_modulus\tlast_arg",
    );
    for (i, p) in raster.pixels.iter().enumerate() {
        let (row, col) = (i / raster.width(), i % raster.width());
        let it = p.first_escape_iter.map_or("-".to_string(), |n| n.to_string());
        writeln!(
            s,
            "{row}\t{col}\t{}\t{it}\t{}\t{:.16e}\t{:.16e}",
            p.status.name(),
            if p.itinerary_prefix.is_empty() { "-".to_string() } else { p.itinerary_prefix.to_string() },
            p.last_log_modulus,
            p.last_arg
        )
        .expect("write to string");
    }
    s
}

pub fn write_raster(raster: &Raster, path: &Path) -> Result<()> {
    write_bytes(path, format_raster(raster).as_bytes())
}

/// Boundary polylines: (tract label, curve label, points in log coordinates).
pub fn format_polylines(lines: &[(String, String, Vec<Complex64>)]) -> String {
    let mut s = header("tracts", "tract\tcurve\tre_w\tim_w");
    for (tract, curve, pts) in lines {
        for w in pts {
            writeln!(s, "{tract}\t{curve}\t{:.16e}\t{:.16e}", w.re, w.im).expect("write to string");
        }
    }
    s
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escape::{Prefix, Viewport};

    fn px(status: Status) -> PixelClass {
        PixelClass { status, first_escape_iter: None, itinerary_prefix: Prefix::default(), last_log_modulus: 0.0, last_arg: 0.0 }
    }

    #[test]
    fn two_by_one_pixmap() {
        let r = Raster {
            viewport: Viewport::new(Complex64::new(0.0, 0.0), 2.0, 1.0, 2, 1).unwrap(),
            pixels: vec![px(Status::Bounded), px(Status::Bounded)],
        };
        let bytes = encode_p6(2, 1, &raster_colors(&r, &Palette::default()));
        let mut expected = b"P6\n2 1\n255\n".to_vec();
        expected.extend_from_slice(&[255, 165, 0, 255, 165, 0]);
        assert_eq!(bytes, expected);
        assert_eq!(bytes.len(), 17);
    }

    #[test]
    fn empty_ray_file_is_header_only() {
        let s = format_rays(&[]);
        assert_eq!(s.lines().count(), 1);
        assert!(s.starts_with("# starhairs "));
    }

    #[test]
    fn hsl_primaries() {
        assert_eq!(hsl(0.0, 1.0, 0.5), [255, 0, 0]);
        assert_eq!(hsl(1.0 / 3.0, 1.0, 0.5), [0, 255, 0]);
        assert_eq!(hsl(0.5, 0.0, 1.0), [255, 255, 255]);
    }
}
