//! Finite-order self-maps of the punctured plane, f(z) = z^n · exp(P(z) + Q(1/z)).

use crate::poly;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative margin added around the extreme critical-value moduli.
pub const ANNULUS_MARGIN: f64 = 0.1;
/// Distance to a root of unity below which a multiplier counts as parabolic.
pub const PARABOLIC_TOL: f64 = 1e-8;
/// Largest root-of-unity order considered by the parabolic test.
pub const PARABOLIC_MAX_ORDER: u32 = 64;
/// Exponent magnitude beyond which `exp` leaves the normal double range.
pub const EXP_LIMIT: f64 = 700.0;

const ORBIT_NEWTON_CAP: usize = 200;
const ORBIT_RESIDUAL_TOL: f64 = 1e-10;
const EXACT_PERIOD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("P must have degree at least 1")]
    DegenerateP,
    #[error("Q must have degree at least 1")]
    DegenerateQ,
    #[error("coefficient {0} is not finite")]
    NonFinite(String),
    #[error("z = 0 is outside the punctured plane")]
    Domain,
    #[error("exponent real part {0:.3e} is out of range; evaluate in logarithmic coordinates")]
    Range(f64),
    #[error("critical-point root finder did not converge; residuals {0:?}")]
    RootFinder(Vec<f64>),
    #[error("periodic orbit search failed: {0}")]
    OrbitSearch(String),
}

/// f(z) = z^n · exp(P(z) + Q(1/z)) with deg P, deg Q ≥ 1 and Q(0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PuncturedPolyMap {
    index: i64,
    p: Vec<Complex64>,
    q: Vec<Complex64>,
    p_deriv: Vec<Complex64>,
    q_deriv: Vec<Complex64>,
}

/// Growth orders at ∞ and at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderData {
    pub rho_inf: usize,
    pub rho_zero: usize,
    pub lambda_inf: usize,
    pub lambda_zero: usize,
}

/// Critical points, critical values and an annulus containing the values.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularData {
    pub critical_points: Vec<Complex64>,
    pub critical_values: Vec<Complex64>,
    pub annulus: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Attracting,
    Repelling,
    Parabolic,
    Indifferent,
}

impl OrbitClass {
    pub fn name(self) -> &'static str {
        match self {
            OrbitClass::Attracting => "attracting",
            OrbitClass::Repelling => "repelling",
            OrbitClass::Parabolic => "parabolic",
            OrbitClass::Indifferent => "indifferent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub period: usize,
    pub points: Vec<Complex64>,
    pub multiplier: Complex64,
    pub classification: OrbitClass,
}

/// Truncated forward orbits of the critical values.
#[derive(Debug, Clone, PartialEq)]
pub struct PostsingularSample {
    pub orbits: Vec<Vec<Complex64>>,
    pub bounded: bool,
    pub depth: usize,
}

fn check_finite(name: &str, c: &[Complex64]) -> Result<(), MapError> {
    for (j, a) in c.iter().enumerate() {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(MapError::NonFinite(format!("{name}[{j}]")));
        }
    }
    Ok(())
}

impl PuncturedPolyMap {
    /// `p` holds a₀..a_p, `q` holds b₁..b_q. Trailing zeros are dropped.
    pub fn new(index: i64, p: &[Complex64], q: &[Complex64]) -> Result<Self, MapError> {
        check_finite("P", p)?;
        check_finite("Q", q)?;
        let p = poly::trim(p);
        if p.len() < 2 {
            return Err(MapError::DegenerateP);
        }
        let q = poly::trim(q);
        if q.is_empty() {
            return Err(MapError::DegenerateQ);
        }
        // Q as a full polynomial with zero constant term, for uniform evaluation.
        let mut q_full = Vec::with_capacity(q.len() + 1);
        q_full.push(Complex64::new(0.0, 0.0));
        q_full.extend_from_slice(&q);
        let p_deriv = poly::derivative(&p);
        let q_deriv = poly::derivative(&q_full);
        Ok(Self { index, p, q: q_full, p_deriv, q_deriv })
    }

    /// z · e^{iα} · e^{β(z − 1/z)/2}.
    pub fn arnold(alpha: f64, beta: f64) -> Result<Self, MapError> {
        Self::new(
            1,
            &[Complex64::new(0.0, alpha), Complex64::new(beta / 2.0, 0.0)],
            &[Complex64::new(-beta / 2.0, 0.0)],
        )
    }

    pub fn index(&self) -> i64 {
        self.index
    }
    /// a₀..a_p.
    pub fn p_coeffs(&self) -> &[Complex64] {
        &self.p
    }
    /// b₁..b_q.
    pub fn q_coeffs(&self) -> &[Complex64] {
        &self.q[1..]
    }
    pub fn deg_p(&self) -> usize {
        self.p.len() - 1
    }
    pub fn deg_q(&self) -> usize {
        self.q.len() - 1
    }
    pub fn lead_p(&self) -> Complex64 {
        self.p[self.deg_p()]
    }
    pub fn lead_q(&self) -> Complex64 {
        self.q[self.deg_q()]
    }

    /// The principal value n·Log z + P(z) + Q(1/z) of log f(z).
    pub fn exponent(&self, z: Complex64) -> Result<Complex64, MapError> {
        if z.norm() == 0.0 {
            return Err(MapError::Domain);
        }
        Ok(z.ln() * self.index as f64 + poly::eval(&self.p, z) + poly::eval(&self.q, z.inv()))
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64, MapError> {
        let e = self.exponent(z)?;
        if !(e.re.abs() <= EXP_LIMIT) {
            return Err(MapError::Range(e.re));
        }
        Ok(e.exp())
    }

    /// f'(z)/f(z) = n/z + P'(z) − Q'(1/z)/z².
    pub fn log_derivative(&self, z: Complex64) -> Result<Complex64, MapError> {
        if z.norm() == 0.0 {
            return Err(MapError::Domain);
        }
        let u = z.inv();
        Ok(u * self.index as f64 + poly::eval(&self.p_deriv, z) - poly::eval(&self.q_deriv, u) * u * u)
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64, MapError> {
        Ok(self.eval(z)? * self.log_derivative(z)?)
    }

    /// The canonical lift F(w) = n·w + P(e^w) + Q(e^{−w}).
    pub fn lift(&self, w: Complex64) -> Result<Complex64, MapError> {
        self.check_lift_range(w)?;
        let u = w.exp();
        let v = (-w).exp();
        let val = w * self.index as f64 + poly::eval(&self.p, u) + poly::eval(&self.q, v);
        finite_or_range(val, w)
    }

    /// F'(w) = n + P'(e^w)·e^w − Q'(e^{−w})·e^{−w}.
    pub fn lift_derivative(&self, w: Complex64) -> Result<Complex64, MapError> {
        self.check_lift_range(w)?;
        let u = w.exp();
        let v = (-w).exp();
        let val = Complex64::new(self.index as f64, 0.0) + poly::eval(&self.p_deriv, u) * u
            - poly::eval(&self.q_deriv, v) * v;
        finite_or_range(val, w)
    }

    /// F(w) and F'(w) in one pass.
    pub fn lift_with_derivative(&self, w: Complex64) -> Result<(Complex64, Complex64), MapError> {
        self.check_lift_range(w)?;
        let u = w.exp();
        let v = (-w).exp();
        let (pu, dpu) = poly::eval_with_deriv(&self.p, u);
        let (qv, dqv) = poly::eval_with_deriv(&self.q, v);
        let f = w * self.index as f64 + pu + qv;
        let d = Complex64::new(self.index as f64, 0.0) + dpu * u - dqv * v;
        Ok((finite_or_range(f, w)?, finite_or_range(d, w)?))
    }

    fn check_lift_range(&self, w: Complex64) -> Result<(), MapError> {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(MapError::Range(w.re));
        }
        let dominant = if w.re >= 0.0 {
            self.deg_p() as f64 * w.re
        } else {
            self.deg_q() as f64 * -w.re
        };
        if dominant > EXP_LIMIT {
            return Err(MapError::Range(dominant));
        }
        Ok(())
    }

    pub fn order(&self) -> OrderData {
        OrderData {
            rho_inf: self.deg_p(),
            rho_zero: self.deg_q(),
            lambda_inf: self.deg_p(),
            lambda_zero: self.deg_q(),
        }
    }

    /// Coefficients of n·z^q + z^{q+1}·P'(z) − Σ j·b_j·z^{q−j}, whose roots are the critical points.
    pub fn critical_polynomial(&self) -> Vec<Complex64> {
        let p = self.deg_p();
        let q = self.deg_q();
        let mut c = vec![Complex64::new(0.0, 0.0); p + q + 1];
        c[q] += self.index as f64;
        for (j, &d) in self.p_deriv.iter().enumerate() {
            c[q + 1 + j] += d;
        }
        for j in 1..=q {
            c[q - j] -= self.q[j] * j as f64;
        }
        c
    }

    pub fn critical_points(&self) -> Result<SingularData, MapError> {
        let cp = poly::roots(&self.critical_polynomial()).map_err(|e| MapError::RootFinder(e.residuals))?;
        let cv: Vec<Complex64> = cp.iter().map(|&c| self.eval(c)).collect::<Result<_, _>>()?;
        let (lo, hi) = cv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(v.norm()), hi.max(v.norm()))
        });
        Ok(SingularData {
            critical_points: cp,
            critical_values: cv,
            annulus: (lo * (1.0 - ANNULUS_MARGIN), hi * (1.0 + ANNULUS_MARGIN)),
        })
    }

    /// f^k(z) together with (f^k)'(z).
    fn iterate_with_derivative(&self, z: Complex64, k: usize) -> Result<(Vec<Complex64>, Complex64), MapError> {
        let mut pts = Vec::with_capacity(k + 1);
        pts.push(z);
        let mut d = Complex64::new(1.0, 0.0);
        let mut cur = z;
        for _ in 0..k {
            let next = self.eval(cur)?;
            d *= next * self.log_derivative(cur)?;
            pts.push(next);
            cur = next;
        }
        Ok((pts, d))
    }

    /// Newton iteration on f^p(z) − z from `seed`.
    pub fn find_periodic_orbit(&self, period: usize, seed: Complex64) -> Result<PeriodicOrbit, MapError> {
        if period == 0 {
            return Err(MapError::OrbitSearch("period must be at least 1".into()));
        }
        if seed.norm() == 0.0 {
            return Err(MapError::Domain);
        }
        let fail = |m: String| MapError::OrbitSearch(m);
        let mut z = seed;
        let mut converged = false;
        let mut polish = 0;
        for _ in 0..ORBIT_NEWTON_CAP {
            let (pts, d) = self
                .iterate_with_derivative(z, period)
                .map_err(|e| fail(format!("iterate left the representable range: {e}")))?;
            let g = pts[period] - z;
            let dg = d - 1.0;
            if dg.norm() == 0.0 {
                return Err(fail("multiplier equals 1; Newton step undefined".into()));
            }
            let mut step = g / dg;
            // Keep iterates inside C*.
            let cap = 0.5 * z.norm();
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0 {
                return Err(fail("Newton iterate left C*".into()));
            }
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                converged = true;
                polish += 1;
                if polish >= 2 {
                    break;
                }
            }
        }
        let (pts, _) = self
            .iterate_with_derivative(z, period)
            .map_err(|e| fail(e.to_string()))?;
        let residual = (pts[period] - z).norm() / z.norm().max(1.0);
        if !(converged || residual < ORBIT_RESIDUAL_TOL) || !(residual < ORBIT_RESIDUAL_TOL) {
            return Err(fail(format!("no convergence; residual {residual:.3e}")));
        }
        let exact = (1..=period)
            .filter(|d| period.is_multiple_of(*d))
            .find(|&d| (pts[d] - z).norm() <= EXACT_PERIOD_TOL * z.norm().max(1.0))
            .unwrap_or(period);
        let (cycle, mult) = self.iterate_with_derivative(z, exact).map_err(|e| fail(e.to_string()))?;
        let points = cycle[..exact].to_vec();
        Ok(PeriodicOrbit {
            period: exact,
            points,
            multiplier: mult,
            classification: classify_multiplier(mult),
        })
    }

    /// Forward orbits of the critical values, flagging exit from the annulus e^{-log_radius} < |z| < e^{log_radius}.
    pub fn postsingular_sample(&self, depth: usize, log_radius: f64) -> Result<PostsingularSample, MapError> {
        if depth == 0 {
            return Err(MapError::OrbitSearch("depth must be at least 1".into()));
        }
        let sd = self.critical_points()?;
        let mut bounded = true;
        let mut orbits = Vec::new();
        for &v in &sd.critical_values {
            let mut orbit = vec![v];
            let mut cur = v;
            for _ in 0..depth {
                match self.eval(cur) {
                    Ok(next) => {
                        if next.norm().ln().abs() > log_radius {
                            bounded = false;
                        }
                        orbit.push(next);
                        cur = next;
                    }
                    Err(_) => {
                        bounded = false;
                        break;
                    }
                }
            }
            orbits.push(orbit);
        }
        Ok(PostsingularSample { orbits, bounded, depth })
    }
}

fn finite_or_range(v: Complex64, w: Complex64) -> Result<Complex64, MapError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(MapError::Range(w.re))
    }
}

/// Parabolic if within tolerance of a root of unity of bounded order, else by modulus.
pub fn classify_multiplier(m: Complex64) -> OrbitClass {
    let turns = m.arg() / (2.0 * PI);
    for order in 1..=PARABOLIC_MAX_ORDER {
        let k = (turns * order as f64).round();
        let root = Complex64::from_polar(1.0, 2.0 * PI * k / order as f64);
        if (m - root).norm() < PARABOLIC_TOL {
            return OrbitClass::Parabolic;
        }
    }
    let r = m.norm();
    if (r - 1.0).abs() < PARABOLIC_TOL {
        OrbitClass::Indifferent
    } else if r < 1.0 {
        OrbitClass::Attracting
    } else {
        OrbitClass::Repelling
    }
}
