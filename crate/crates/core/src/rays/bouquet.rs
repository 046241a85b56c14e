//! Finite families of ray tails sharing an essential itinerary.

use super::trace::{trace_ray_tail, RayConfig, RayTail};
use crate::logspace::{LogTransform, TractId};
use crate::symbolic::{
    admissible, itinerary_of_address, lex_compare_addresses, EssentialItinerary, ExternalAddress, Sequence, Side,
    TractGeometry,
};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub struct BouquetResult {
    /// Converged rays in lexicographic address order.
    pub rays: Vec<RayTail>,
    /// Addresses that failed to trace or did not converge, with the reason.
    pub failures: Vec<(ExternalAddress, String)>,
}

fn words(choices: &[Vec<TractId>]) -> Vec<Vec<TractId>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|w| {
                c.iter().map(move |&s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

fn choices_for(sides: impl Iterator<Item = Side>, symbols: &[TractId]) -> Vec<Vec<TractId>> {
    sides.map(|s| symbols.iter().copied().filter(|t| t.side == s).collect()).collect()
}

/// Distinct admissible addresses over `symbols` with itinerary `e`, preperiod length |pre(e)|
/// and period length a multiple of |period(e)| up to `max_period`.
pub fn enumerate_addresses(
    e: &EssentialItinerary,
    symbols: &[TractId],
    max_period: usize,
    geom: &impl TractGeometry,
) -> Vec<ExternalAddress> {
    let pre_len = e.preperiod().len();
    let step = e.period().len();
    let pre_words = words(&choices_for(e.preperiod().iter().copied(), symbols));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for len in (step..=max_period).step_by(step) {
        let per_words = words(&choices_for((0..len).map(|i| *e.get(pre_len + i)), symbols));
        for pre in &pre_words {
            for per in &per_words {
                let Ok(addr) = Sequence::new(pre.clone(), per.clone()) else { continue };
                if !admissible(&addr, geom) || &itinerary_of_address(&addr) != e {
                    continue;
                }
                let key = (addr.preperiod().to_vec(), addr.period().to_vec());
                if seen.insert(key) {
                    out.push(addr);
                }
            }
        }
    }
    out
}

/// Admissible cycles of exact period p over `symbols`, one address per rotation class.
pub fn periodic_cycles(symbols: &[TractId], period: usize, geom: &impl TractGeometry) -> Vec<ExternalAddress> {
    let all = words(&vec![symbols.to_vec(); period]);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in all {
        let Ok(addr) = Sequence::periodic(w) else { continue };
        if addr.period().len() != period || !admissible(&addr, geom) {
            continue;
        }
        let rep = (0..period).map(|r| addr.shift(r).period().to_vec()).min().expect("nonempty");
        if seen.insert(rep.clone()) {
            out.push(Sequence::periodic(rep).expect("nonempty"));
        }
    }
    out
}

/// Traces every enumerated address on `t_grid`.
pub fn sample_bouquet(
    lt: &LogTransform,
    e: &EssentialItinerary,
    symbols: &[TractId],
    max_period: usize,
    t_grid: &[f64],
    cfg: &RayConfig,
) -> BouquetResult {
    let addrs = enumerate_addresses(e, symbols, max_period, lt.layout());
    let traced: Vec<Result<RayTail, String>> = addrs
        .par_iter()
        .map(|a| match trace_ray_tail(lt, a, t_grid, cfg) {
            Ok(r) if r.converged => Ok(r),
            Ok(_) => Err("not converged".to_string()),
            Err(err) => Err(err.to_string()),
        })
        .collect();
    let mut rays = Vec::new();
    let mut failures = Vec::new();
    for (a, r) in addrs.into_iter().zip(traced) {
        match r {
            Ok(r) => rays.push(r),
            Err(msg) => failures.push((a, msg)),
        }
    }
    rays.sort_by(|a, b| lex_compare_addresses(&a.address, &b.address).unwrap_or(Ordering::Equal));
    BouquetResult { rays, failures }
}

fn first_difference(a: &ExternalAddress, b: &ExternalAddress) -> Option<usize> {
    let limit = a.preperiod().len().max(b.preperiod().len()) + a.period().len() * b.period().len();
    (0..limit).find(|&n| a.get(n) != b.get(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisjointnessReport {
    pub pairs: usize,
    /// Pairs whose shifted tails come within the tolerance, or could not be traced.
    pub overlapping: Vec<(usize, usize)>,
    /// Smallest distance between shifted tails at the first differing level.
    pub min_gap: f64,
    /// Smallest distance between base samples at equal t. Can round to zero for deep differences.
    pub min_base_gap: f64,
}

/// Pairwise disjointness. Rays first differing at level k are compared through their k-th
/// shifts traced on `t_grid`, where the tails lie in different tracts.
pub fn check_bouquet_disjoint(lt: &LogTransform, rays: &[RayTail], t_grid: &[f64], tol: f64, cfg: &RayConfig) -> DisjointnessReport {
    let pairs: Vec<(usize, usize)> = (0..rays.len()).flat_map(|i| (i + 1..rays.len()).map(move |j| (i, j))).collect();
    let base_gap = |i: usize, j: usize| {
        rays[i]
            .samples
            .iter()
            .zip(&rays[j].samples)
            .map(|(x, y)| (x.w - y.w).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let gaps: Vec<Option<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&rays[i], &rays[j]);
            let k = first_difference(&a.address, &b.address)?;
            let sa = trace_ray_tail(lt, &a.address.shift(k), t_grid, cfg).ok()?;
            let sb = trace_ray_tail(lt, &b.address.shift(k), t_grid, cfg).ok()?;
            let gap = sa
                .samples
                .iter()
                .flat_map(|x| sb.samples.iter().map(move |y| (x.w - y.w).norm()))
                .fold(f64::INFINITY, f64::min);
            Some(gap)
        })
        .collect();
    let min_base_gap = pairs.iter().map(|&(i, j)| base_gap(i, j)).fold(f64::INFINITY, f64::min);
    let mut rep = DisjointnessReport { pairs: pairs.len(), overlapping: Vec::new(), min_gap: f64::INFINITY, min_base_gap };
    for (&p, g) in pairs.iter().zip(gaps) {
        match g {
            Some(g) if g > tol => rep.min_gap = rep.min_gap.min(g),
            Some(g) => {
                rep.min_gap = rep.min_gap.min(g);
                rep.overlapping.push(p);
            }
            None => rep.overlapping.push(p),
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub pairs: usize,
    /// Pairs whose vertical order at the first differing level disagrees with the address order.
    pub level_violations: Vec<(usize, usize)>,
    /// Consecutive rays whose base Im at the largest t decreases.
    pub base_violations: Vec<usize>,
}

/// Vertical order at the largest sample of `t_grid` against lexicographic order. Assumes `rays` sorted.
pub fn check_bouquet_order(lt: &LogTransform, rays: &[RayTail], t_grid: &[f64], cfg: &RayConfig) -> OrderReport {
    let t_top = *t_grid.last().expect("nonempty grid");
    let pairs: Vec<(usize, usize)> = (0..rays.len()).flat_map(|i| (i + 1..rays.len()).map(move |j| (i, j))).collect();
    let ok: Vec<bool> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&rays[i].address, &rays[j].address);
            let Some(k) = first_difference(a, b) else { return false };
            let Ok(ord) = lex_compare_addresses(a, b) else { return false };
            let side = a.get(k).side;
            let pa = super::trace::trace_point(lt, &a.shift(k), t_top, cfg);
            let pb = super::trace::trace_point(lt, &b.shift(k), t_top, cfg);
            let (Ok(pa), Ok(pb)) = (pa, pb) else { return false };
            let vertical = pa.w.im.partial_cmp(&pb.w.im).unwrap_or(Ordering::Equal);
            let vertical = if side == Side::Zero { vertical.reverse() } else { vertical };
            vertical == ord
        })
        .collect();
    let level_violations = pairs.iter().zip(ok).filter(|(_, ok)| !ok).map(|(&p, _)| p).collect();
    let top = |r: &RayTail| r.samples.last().map(|s| s.w.im).unwrap_or(f64::NAN);
    let base_violations = (1..rays.len())
        .filter(|&i| {
            let side = rays[i].address.get(0).side;
            let (x, y) = (top(&rays[i - 1]), top(&rays[i]));
            match side {
                Side::Infinity => !(x <= y),
                Side::Zero => !(x >= y),
            }
        })
        .collect();
    OrderReport { pairs: pairs.len(), level_violations, base_violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_core::PuncturedPolyMap;
    use crate::rays::{geometric_grid, min_parameter};
    use num_complex::Complex64;

    fn lt(sign: f64) -> LogTransform {
        let c = |x: f64| Complex64::new(x, 0.0);
        LogTransform::new(PuncturedPolyMap::new(0, &[c(0.0), c(sign)], &[c(1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let l = lt(1.0);
        let syms = [TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Infinity, 0, 1)];
        let e = Sequence::periodic(vec![Side::Infinity]).unwrap();
        assert_eq!(enumerate_addresses(&e, &syms, 3, l.layout()).len(), 10);
        assert_eq!(periodic_cycles(&syms, 3, l.layout()).len(), 2);
    }

    #[test]
    fn alternating_itinerary_has_one_word() {
        let l = lt(-1.0);
        let syms = [TractId::new(Side::Zero, 0, 0), TractId::new(Side::Infinity, 0, 0)];
        let e = Sequence::periodic(vec![Side::Zero, Side::Infinity]).unwrap();
        let addrs = enumerate_addresses(&e, &syms, 4, l.layout());
        assert_eq!(addrs.len(), 1);
        assert_eq!(addrs[0].period(), &[TractId::new(Side::Zero, 0, 0), TractId::new(Side::Infinity, 0, 0)]);
    }

    #[test]
    fn small_bouquet_is_disjoint_and_ordered() {
        let l = lt(1.0);
        let syms = [TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Infinity, 0, 1)];
        let e = Sequence::periodic(vec![Side::Infinity]).unwrap();
        let cfg = RayConfig::default();
        let addrs = enumerate_addresses(&e, &syms, 2, l.layout());
        let t0 = addrs.iter().map(|a| min_parameter(&l, a, &cfg).unwrap()).fold(0.0, f64::max);
        let grid = geometric_grid(t0, 30.0, 6);
        let b = sample_bouquet(&l, &e, &syms, 2, &grid, &cfg);
        assert_eq!(b.rays.len(), 4, "{:?}", b.failures);
        let d = check_bouquet_disjoint(&l, &b.rays, &grid, 1e-9, &cfg);
        assert!(d.overlapping.is_empty());
        let o = check_bouquet_order(&l, &b.rays, &grid, &cfg);
        assert!(o.level_violations.is_empty() && o.base_violations.is_empty(), "{o:?}");
    }
}
