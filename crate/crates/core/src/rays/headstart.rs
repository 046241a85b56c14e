//! Head-start inequalities and the speed ordering.

use super::RayError;
use crate::logspace::{LogTransform, TractId};
use crate::symbolic::{HeadStartProfile, TractGeometry};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const HEAD_START_SLOPES: [f64; 4] = [1.25, 1.5, 2.0, 4.0];
pub const HEAD_START_OFFSETS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

#[derive(Debug, Clone, PartialEq)]
pub struct HeadStartReport {
    pub from: TractId,
    pub to: TractId,
    pub slope: f64,
    pub offset: f64,
    pub pairs: usize,
    /// Pairs whose antecedent |Re w| > φ(|Re z|) holds.
    pub non_vacuous: usize,
    pub violations: usize,
}

impl HeadStartReport {
    pub fn passes(&self) -> bool {
        self.violations == 0
    }
}

/// Grid search outcome for one tract pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadStartSearch {
    pub from: TractId,
    pub to: TractId,
    pub pairs: usize,
    /// Every grid point, offsets outer, slopes inner.
    pub grid: Vec<HeadStartReport>,
    /// Smallest (offset, slope) with no violations and at least one non-vacuous pair.
    pub workable: Option<(f64, f64)>,
}

/// Points z ∈ T with F(z) ∈ T', as (z, F(z)).
fn pair_points(lt: &LogTransform, t: TractId, t2: TractId, m: usize, seed: u64) -> Result<Vec<(Complex64, Complex64)>, RayError> {
    if lt.layout().target(t) != t2.side {
        return Err(RayError::TractPair(t.to_string(), t2.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = lt.r_norm();
    let mut pts = Vec::with_capacity(m);
    for (_, u) in lt.sample_tract(t2, 2 * m + 16, &mut rng, true) {
        if pts.len() == m {
            break;
        }
        if !(u.re.abs() > r) {
            continue;
        }
        if let Ok(z) = lt.invert(u, t) {
            pts.push((z, u));
        }
    }
    Ok(pts)
}

fn points_for_pairs(pairs: usize) -> usize {
    let mut m = 2;
    while m * (m - 1) < pairs {
        m += 1;
    }
    m
}

fn evaluate(pts: &[(Complex64, Complex64)], from: TractId, to: TractId, profile: &HeadStartProfile, pairs: usize) -> HeadStartReport {
    let mut rep = HeadStartReport {
        from,
        to,
        slope: profile.slope(),
        offset: profile.offset(),
        pairs: 0,
        non_vacuous: 0,
        violations: 0,
    };
    'outer: for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            if rep.pairs == pairs {
                break 'outer;
            }
            rep.pairs += 1;
            let (z, fz, w, fw) = (a.0, a.1, b.0, b.1);
            if w.re.abs() > profile.phi(z.re.abs()) {
                rep.non_vacuous += 1;
                if !(fw.re.abs() > profile.phi(fz.re.abs())) {
                    rep.violations += 1;
                }
            }
        }
    }
    rep
}

/// Counts violations of |Re w| > φ(|Re z|) ⇒ |Re F(w)| > φ(|Re F(z)|) over sampled pairs in T mapping into T'.
pub fn head_start_check(
    lt: &LogTransform,
    from: TractId,
    to: TractId,
    profile: &HeadStartProfile,
    sample_pairs: usize,
    seed: u64,
) -> Result<HeadStartReport, RayError> {
    let pts = pair_points(lt, from, to, points_for_pairs(sample_pairs), seed)?;
    let available = pts.len() * pts.len().saturating_sub(1);
    if available < sample_pairs {
        return Err(RayError::InsufficientPairs { found: available, needed: sample_pairs });
    }
    Ok(evaluate(&pts, from, to, profile, sample_pairs))
}

/// Runs `head_start_check` over the slope/offset grid on a shared sample.
pub fn head_start_search(
    lt: &LogTransform,
    from: TractId,
    to: TractId,
    sample_pairs: usize,
    seed: u64,
) -> Result<HeadStartSearch, RayError> {
    let pts = pair_points(lt, from, to, points_for_pairs(sample_pairs), seed)?;
    let available = pts.len() * pts.len().saturating_sub(1);
    if available < sample_pairs {
        return Err(RayError::InsufficientPairs { found: available, needed: sample_pairs });
    }
    let mut grid = Vec::new();
    let mut workable = None;
    for &c in &HEAD_START_OFFSETS {
        for &k in &HEAD_START_SLOPES {
            let profile = HeadStartProfile::new(k, c).expect("grid profiles are valid");
            let rep = evaluate(&pts, from, to, &profile, sample_pairs);
            if workable.is_none() && rep.passes() && rep.non_vacuous > 0 {
                workable = Some((c, k));
            }
            grid.push(rep);
        }
    }
    Ok(HeadStartSearch { from, to, pairs: sample_pairs, grid, workable })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speed {
    /// z ≻ w
    Faster,
    /// w ≻ z
    Slower,
    Undecided,
}

/// Compares |Re F^k(z)| with φ(|Re F^k(w)|) for k ≤ horizon; a decision must persist once made.
pub fn speed_compare(
    lt: &LogTransform,
    z: Complex64,
    w: Complex64,
    profile: &HeadStartProfile,
    horizon: usize,
) -> Result<Speed, RayError> {
    let (mut a, mut b) = (z, w);
    let mut decided: Option<(Speed, usize)> = None;
    for k in 0..=horizon {
        let (x, y) = (a.re.abs(), b.re.abs());
        let now = if x > profile.phi(y) {
            Speed::Faster
        } else if y > profile.phi(x) {
            Speed::Slower
        } else {
            Speed::Undecided
        };
        match decided {
            None if now != Speed::Undecided => decided = Some((now, k)),
            Some((d, _)) if now != d => return Err(RayError::Inconsistent(k)),
            _ => {}
        }
        if k == horizon {
            break;
        }
        match (lt.eval(a), lt.eval(b)) {
            (Ok(fa), Ok(fb)) if fa.re.is_finite() && fb.re.is_finite() => {
                a = fa;
                b = fb;
            }
            _ => break,
        }
    }
    Ok(decided.map_or(Speed::Undecided, |(d, _)| d))
}
