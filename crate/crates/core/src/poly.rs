//! Dense complex polynomials and simultaneous root finding.
//!
//! Coefficients are stored in ascending order: `c[j]` multiplies `z^j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative residual accepted for a computed root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-12;

const ABERTH_MAX_ITER: usize = 500;

/// Evaluates the polynomial at `z` by Horner's rule.
pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Evaluates the polynomial and its first derivative at `z`.
pub fn eval_with_deriv(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Coefficients of the derivative.
pub fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &a)| a * j as f64)
        .collect()
}

/// Sum of |c_j| |z|^j, the natural scale for a relative residual.
pub fn magnitude_scale(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

/// Relative residual |p(z)| / Σ|c_j||z|^j.
pub fn relative_residual(c: &[Complex64], z: Complex64) -> f64 {
    let s = magnitude_scale(c, z);
    if s == 0.0 {
        0.0
    } else {
        eval(c, z).norm() / s
    }
}

/// Drops trailing exact zeros so the last coefficient is the leading one.
pub fn trim(c: &[Complex64]) -> Vec<Complex64> {
    let mut v = c.to_vec();
    while matches!(v.last(), Some(a) if *a == Complex64::new(0.0, 0.0)) {
        v.pop();
    }
    v
}

/// Failure of both root-finding strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct RootFailure {
    pub residuals: Vec<f64>,
}

/// Roots of a polynomial of degree ≥ 1, counted with multiplicity.
///
/// Aberth–Ehrlich iteration first; eigenvalues of the companion matrix if
/// any root misses the residual tolerance. Every root is Newton-polished.
pub fn roots(c: &[Complex64]) -> Result<Vec<Complex64>, RootFailure> {
    let c = trim(c);
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    if let Some(r) = aberth(&c) {
        let r: Vec<_> = r.into_iter().map(|z| polish(&c, z)).collect();
        if r.iter().all(|&z| relative_residual(&c, z) <= ROOT_RESIDUAL_TOL) {
            return Ok(r);
        }
    }
    let r: Vec<_> = companion_roots(&c).into_iter().map(|z| polish(&c, z)).collect();
    let residuals: Vec<f64> = r.iter().map(|&z| relative_residual(&c, z)).collect();
    if r.len() == deg && residuals.iter().all(|&e| e <= ROOT_RESIDUAL_TOL) {
        Ok(r)
    } else {
        Err(RootFailure { residuals })
    }
}

fn aberth(c: &[Complex64]) -> Option<Vec<Complex64>> {
    let deg = c.len() - 1;
    let lead = c[deg];
    // Initial guesses on a circle whose radius is the geometric mean of the root moduli.
    let c0 = c.iter().position(|a| a.norm() > 0.0).unwrap_or(0);
    let radius = if c0 == 0 {
        (c[0].norm() / lead.norm()).powf(1.0 / deg as f64)
    } else {
        1.0
    }
    .max(1e-3);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect();
    let dc = derivative(c);
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_rel = 0.0f64;
        for k in 0..deg {
            let p = eval(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = eval(&dc, z[k]);
            let ratio = p / dp;
            let sum: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !step.re.is_finite() || !step.im.is_finite() {
                return None;
            }
            z[k] -= step;
            max_rel = max_rel.max(step.norm() / z[k].norm().max(1e-300));
        }
        if max_rel < 1e-15 {
            return Some(z);
        }
    }
    Some(z)
}

fn companion_roots(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    let schur = nalgebra::linalg::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..deg).map(|i| t[(i, i)]).collect()
}

fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = eval_with_deriv(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if relative_residual(c, next) < relative_residual(c, z) {
            z = next;
        } else {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_matches_power_sum() {
        let p = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)];
        let z = c(0.7, -1.1);
        let direct = p[0] + p[1] * z + p[2] * z * z;
        assert!((eval(&p, z) - direct).norm() < 1e-14);
        let (_, d) = eval_with_deriv(&p, z);
        assert!((d - (p[1] + p[2] * z * 2.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_unity() {
        let mut p = vec![c(0.0, 0.0); 6];
        p[0] = c(-1.0, 0.0);
        p[5] = c(1.0, 0.0);
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 5);
        for z in r {
            assert!((z.powu(5) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn double_root_is_found_twice() {
        // (z - 2)^2 (z + 1)
        let p = [c(4.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)];
        let mut r = roots(&p).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((r[1] - c(2.0, 0.0)).norm() < 1e-6);
        assert!((r[2] - c(2.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn companion_agrees_with_aberth() {
        let p = [c(0.3, -0.2), c(1.0, 1.0), c(-2.0, 0.5), c(0.0, 1.0), c(1.5, 0.0)];
        let mut a = aberth(&p).unwrap();
        let mut b = companion_roots(&p);
        let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000_000 + (z.im * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn trim_removes_trailing_zeros() {
        assert_eq!(trim(&[c(1.0, 0.0), c(0.0, 0.0)]).len(), 1);
    }
}
