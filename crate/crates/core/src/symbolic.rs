//! Eventually periodic symbol sequences: essential itineraries and external addresses.
//!
//! Text syntax: `[a,b,...] ([c,d,...])`, a preperiod list followed by the period list in
//! parentheses. Address symbols are `(side,band,strip)` triples, itinerary symbols are `0`
//! or `inf`. The preperiod part may be omitted.

use crate::logspace::TractId;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("addresses are incomparable at index {0}: tracts on different sides")]
    Incomparable(usize),
    #[error("address is not admissible: target of {from} differs from side of {to}")]
    Inadmissible { from: TractId, to: TractId },
    #[error("head-start profile needs K > 1 and offset ≥ 0, got K = {0}, offset = {1}")]
    Profile(f64, f64),
}

/// The two essential singularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Zero,
    Infinity,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Zero => "0",
            Side::Infinity => "inf",
        })
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "0" => Ok(Side::Zero),
            "inf" | "∞" => Ok(Side::Infinity),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

/// Band targets and center heights, as needed by the symbolic layer.
pub trait TractGeometry {
    fn target(&self, t: TractId) -> Side;
    fn center_im(&self, t: TractId) -> f64;
    fn band_count(&self, side: Side) -> usize;
}

/// An eventually periodic sequence in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequence<S> {
    preperiod: Vec<S>,
    period: Vec<S>,
}

pub type EssentialItinerary = Sequence<Side>;
pub type ExternalAddress = Sequence<TractId>;

impl<S: Clone + PartialEq> Sequence<S> {
    pub fn new(preperiod: Vec<S>, period: Vec<S>) -> Result<Self, SymbolicError> {
        if period.is_empty() {
            return Err(SymbolicError::EmptyPeriod);
        }
        let mut s = Self { preperiod, period };
        s.canonicalize();
        Ok(s)
    }

    pub fn periodic(period: Vec<S>) -> Result<Self, SymbolicError> {
        Self::new(Vec::new(), period)
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(d) = (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.period[i] == self.period[i - d])) {
            self.period.truncate(d);
        }
        while let (Some(a), Some(b)) = (self.preperiod.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[S] {
        &self.preperiod
    }
    pub fn period(&self) -> &[S] {
        &self.period
    }
    pub fn is_periodic(&self) -> bool {
        self.preperiod.is_empty()
    }

    /// The n-th symbol.
    pub fn get(&self, n: usize) -> &S {
        if n < self.preperiod.len() {
            &self.preperiod[n]
        } else {
            &self.period[(n - self.preperiod.len()) % self.period.len()]
        }
    }

    /// Drops the first k symbols.
    pub fn shift(&self, k: usize) -> Self {
        if k <= self.preperiod.len() {
            return Self { preperiod: self.preperiod[k..].to_vec(), period: self.period.clone() };
        }
        let mut period = self.period.clone();
        period.rotate_left((k - self.preperiod.len()) % self.period.len());
        Self { preperiod: Vec::new(), period }
    }

    /// Applies `f` symbol by symbol and re-canonicalizes.
    pub fn map<T: Clone + PartialEq>(&self, f: impl Fn(&S) -> T) -> Sequence<T> {
        Sequence::new(self.preperiod.iter().map(&f).collect(), self.period.iter().map(&f).collect())
            .expect("period stays nonempty")
    }

    /// Preperiod length plus period length: every distinct position is below this.
    pub fn horizon(&self) -> usize {
        self.preperiod.len() + self.period.len()
    }
}

impl<S: fmt::Display> fmt::Display for Sequence<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[S]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "[{}] ([{}])", join(&self.preperiod), join(&self.period))
    }
}

/// e_n = side(T_n).
pub fn itinerary_of_address(addr: &ExternalAddress) -> EssentialItinerary {
    addr.map(|t| t.side)
}

/// target(T_n) = side(T_{n+1}) through one period past the preperiod.
pub fn admissible(addr: &ExternalAddress, geom: &impl TractGeometry) -> bool {
    first_bad_transition(addr, geom).is_none()
}

fn first_bad_transition(addr: &ExternalAddress, geom: &impl TractGeometry) -> Option<(TractId, TractId)> {
    (0..addr.horizon()).find_map(|n| {
        let (a, b) = (*addr.get(n), *addr.get(n + 1));
        (geom.target(a) != b.side).then_some((a, b))
    })
}

/// True iff the minimal periods are cyclic rotations of each other.
pub fn equivalent(e1: &EssentialItinerary, e2: &EssentialItinerary) -> bool {
    let (a, b) = (e1.period(), e2.period());
    a.len() == b.len() && (0..a.len()).any(|r| (0..a.len()).all(|i| a[(i + r) % a.len()] == b[i]))
}

/// Ascending by center height on side ∞, descending on side 0.
pub fn lex_compare_tracts(a: TractId, b: TractId) -> Result<Ordering, SymbolicError> {
    if a.side != b.side {
        return Err(SymbolicError::Incomparable(0));
    }
    let ord = (a.strip, a.band).cmp(&(b.strip, b.band));
    Ok(match a.side {
        Side::Infinity => ord,
        Side::Zero => ord.reverse(),
    })
}

pub fn lex_compare_addresses(a: &ExternalAddress, b: &ExternalAddress) -> Result<Ordering, SymbolicError> {
    let limit = a.preperiod().len().max(b.preperiod().len()) + a.period().len() * b.period().len();
    for n in 0..limit {
        let (x, y) = (*a.get(n), *b.get(n));
        if x != y {
            return lex_compare_tracts(x, y).map_err(|_| SymbolicError::Incomparable(n));
        }
    }
    Ok(Ordering::Equal)
}

/// Linear head-start function φ(x) = K·x + offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadStartProfile {
    slope: f64,
    offset: f64,
}

impl HeadStartProfile {
    pub fn new(slope: f64, offset: f64) -> Result<Self, SymbolicError> {
        if !(slope > 1.0 && slope.is_finite() && offset >= 0.0 && offset.is_finite()) {
            return Err(SymbolicError::Profile(slope, offset));
        }
        Ok(Self { slope, offset })
    }
    pub fn slope(&self) -> f64 {
        self.slope
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn phi(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }
}

/// Fundamental domain label: the tract's side and band, and the strip containing the next tract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FundamentalLabel {
    pub side: Side,
    pub band: usize,
    pub image_strip: i64,
}

impl fmt::Display for FundamentalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.side, self.band, self.image_strip)
    }
}

pub fn tracts_to_fundamental(
    addr: &ExternalAddress,
    geom: &impl TractGeometry,
) -> Result<Sequence<FundamentalLabel>, SymbolicError> {
    if let Some((from, to)) = first_bad_transition(addr, geom) {
        return Err(SymbolicError::Inadmissible { from, to });
    }
    let label = |n: usize| {
        let t = addr.get(n);
        FundamentalLabel { side: t.side, band: t.band, image_strip: addr.get(n + 1).strip }
    };
    let pre = addr.preperiod().len();
    let per = addr.period().len();
    Sequence::new((0..pre).map(label).collect(), (pre..pre + per).map(label).collect())
}

/// Inverse of `tracts_to_fundamental` once the strip of T₀ is fixed.
pub fn fundamental_to_tracts(labels: &Sequence<FundamentalLabel>, t0_strip: i64) -> ExternalAddress {
    let pre = labels.preperiod().len();
    let per = labels.period().len();
    let tracts: Vec<TractId> = (0..=pre + per)
        .map(|n| {
            let l = labels.get(n);
            let strip = if n == 0 { t0_strip } else { labels.get(n - 1).image_strip };
            TractId::new(l.side, l.band, strip)
        })
        .collect();
    Sequence::new(tracts[..=pre].to_vec(), tracts[pre + 1..].to_vec()).expect("period nonempty")
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> SymbolicError {
        SymbolicError::Parse { pos: self.pos, msg: msg.into() }
    }
    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s[self.pos..].chars().next()
    }
    fn expect(&mut self, c: char) -> Result<(), SymbolicError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }
    fn token(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.s[self.pos..].chars().next() {
            if c == ',' || c == ')' || c == ']' || c == '(' || c == '[' || c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.s[start..self.pos]
    }
    fn list<T>(&mut self, item: &mut impl FnMut(&mut Self) -> Result<T, SymbolicError>) -> Result<Vec<T>, SymbolicError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `]`")),
            }
        }
    }
}

fn parse_sequence<T: Clone + PartialEq>(
    text: &str,
    mut item: impl FnMut(&mut Cursor) -> Result<T, SymbolicError>,
) -> Result<Sequence<T>, SymbolicError> {
    let mut c = Cursor { s: text, pos: 0 };
    let pre = if c.peek() == Some('[') { c.list(&mut item)? } else { Vec::new() };
    c.expect('(')?;
    let per = c.list(&mut item)?;
    c.expect(')')?;
    if c.peek().is_some() {
        return Err(c.err("trailing input"));
    }
    if per.is_empty() {
        return Err(SymbolicError::EmptyPeriod);
    }
    Sequence::new(pre, per)
}

fn parse_side(c: &mut Cursor) -> Result<Side, SymbolicError> {
    let pos = c.pos;
    c.token().parse().map_err(|m| SymbolicError::Parse { pos, msg: m })
}

fn parse_tract(c: &mut Cursor) -> Result<TractId, SymbolicError> {
    c.expect('(')?;
    let side = parse_side(c)?;
    c.expect(',')?;
    let pos = c.pos;
    let band = c.token().parse().map_err(|_| SymbolicError::Parse { pos, msg: "bad band".into() })?;
    c.expect(',')?;
    let pos = c.pos;
    let strip = c.token().parse().map_err(|_| SymbolicError::Parse { pos, msg: "bad strip".into() })?;
    c.expect(')')?;
    Ok(TractId::new(side, band, strip))
}

pub fn parse_address(text: &str) -> Result<ExternalAddress, SymbolicError> {
    parse_sequence(text, parse_tract)
}

pub fn parse_itinerary(text: &str) -> Result<EssentialItinerary, SymbolicError> {
    parse_sequence(text, parse_side)
}

/// Parses a bracketed tract list `[(inf,0,0),(inf,0,1)]`.
pub fn parse_tract_list(text: &str) -> Result<Vec<TractId>, SymbolicError> {
    let mut c = Cursor { s: text, pos: 0 };
    let v = c.list(&mut parse_tract)?;
    if c.peek().is_some() {
        return Err(c.err("trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Side::{Infinity as I, Zero as Z};

    /// Two bands per side: band 0 targets ∞, band 1 targets 0, centers mπ.
    pub(crate) struct Simple;
    impl TractGeometry for Simple {
        fn target(&self, t: TractId) -> Side {
            if t.band.is_multiple_of(2) {
                I
            } else {
                Z
            }
        }
        fn center_im(&self, t: TractId) -> f64 {
            t.band as f64 * std::f64::consts::PI + 2.0 * std::f64::consts::PI * t.strip as f64
        }
        fn band_count(&self, _: Side) -> usize {
            2
        }
    }

    fn t(side: Side, band: usize, strip: i64) -> TractId {
        TractId::new(side, band, strip)
    }

    #[test]
    fn canonical_forms() {
        let s = Sequence::new(vec![Z, I], vec![I, I]).unwrap();
        assert_eq!(s.preperiod(), &[Z]);
        assert_eq!(s.period(), &[I]);
        let s = Sequence::new(vec![I, Z], vec![I, Z, I, Z]).unwrap();
        assert!(s.is_periodic());
        assert_eq!(s.period(), &[I, Z]);
        assert_eq!(Sequence::<Side>::new(vec![], vec![]), Err(SymbolicError::EmptyPeriod));
    }

    #[test]
    fn itinerary_examples() {
        let a = Sequence::periodic(vec![t(I, 0, 0), t(I, 0, 1)]).unwrap();
        assert_eq!(itinerary_of_address(&a), Sequence::periodic(vec![I]).unwrap());
        let b = Sequence::periodic(vec![t(Z, 0, 0), t(I, 1, 0)]).unwrap();
        assert_eq!(itinerary_of_address(&b).period(), &[Z, I]);
        let c = Sequence::new(vec![t(Z, 0, 0)], vec![t(I, 0, 0)]).unwrap();
        let e = itinerary_of_address(&c);
        assert_eq!((e.preperiod(), e.period()), (&[Z][..], &[I][..]));
    }

    #[test]
    fn admissibility_examples() {
        assert!(admissible(&Sequence::periodic(vec![t(I, 0, 0)]).unwrap(), &Simple));
        // Target ∞ followed by a side-0 tract.
        assert!(!admissible(&Sequence::new(vec![t(Z, 0, 0)], vec![t(Z, 1, 0)]).unwrap(), &Simple));
        // (∞, band 1) targets 0, (0, band 0) targets ∞.
        assert!(admissible(&Sequence::periodic(vec![t(I, 1, 0), t(Z, 0, 0)]).unwrap(), &Simple));
    }

    #[test]
    fn shift_examples() {
        let e = Sequence::new(vec![Z], vec![I]).unwrap();
        assert_eq!(e.shift(1), Sequence::periodic(vec![I]).unwrap());
        let p = Sequence::periodic(vec![Z, I]).unwrap();
        assert_eq!(p.shift(2), p);
        let q = Sequence::new(vec![t(I, 0, 0), t(I, 1, 0)], vec![t(Z, 0, 3)]).unwrap();
        assert_eq!(q.shift(5), Sequence::periodic(vec![t(Z, 0, 3)]).unwrap());
    }

    #[test]
    fn equivalence_examples() {
        let a = Sequence::new(vec![Z], vec![I]).unwrap();
        let b = Sequence::periodic(vec![I]).unwrap();
        assert!(equivalent(&a, &b));
        assert!(equivalent(&Sequence::periodic(vec![Z, I]).unwrap(), &Sequence::periodic(vec![I, Z]).unwrap()));
        assert!(!equivalent(&Sequence::periodic(vec![Z]).unwrap(), &b));
    }

    #[test]
    fn tract_order_examples() {
        assert_eq!(lex_compare_tracts(t(I, 0, 0), t(I, 1, 0)).unwrap(), Ordering::Less);
        assert_eq!(lex_compare_tracts(t(Z, 0, 0), t(Z, 1, 0)).unwrap(), Ordering::Greater);
        assert_eq!(lex_compare_tracts(t(I, 1, 2), t(I, 1, 2)).unwrap(), Ordering::Equal);
        assert!(lex_compare_tracts(t(I, 0, 0), t(Z, 0, 0)).is_err());
    }

    #[test]
    fn address_order_examples() {
        let a = Sequence::new(vec![t(I, 0, 0), t(I, 0, 0), t(I, 0, 0), t(I, 0, 0)], vec![t(I, 0, 0)]).unwrap();
        assert_eq!(lex_compare_addresses(&a, &a).unwrap(), Ordering::Equal);
        let b = Sequence::new(vec![t(I, 0, 0), t(I, 0, 0), t(I, 0, 0), t(I, 0, 1)], vec![t(I, 0, 0)]).unwrap();
        assert_eq!(lex_compare_addresses(&a, &b).unwrap(), Ordering::Less);
        let c = Sequence::periodic(vec![t(I, 0, 1)]).unwrap();
        assert_eq!(lex_compare_addresses(&a, &c).unwrap(), Ordering::Less);
        let d = Sequence::periodic(vec![t(Z, 0, 0)]).unwrap();
        assert_eq!(lex_compare_addresses(&a, &d), Err(SymbolicError::Incomparable(0)));
    }

    #[test]
    fn profile_contract() {
        assert!(HeadStartProfile::new(1.0, 0.0).is_err());
        assert!(HeadStartProfile::new(2.0, -1.0).is_err());
        assert_eq!(HeadStartProfile::new(2.0, 1.0).unwrap().phi(3.0), 7.0);
    }

    #[test]
    fn fundamental_examples() {
        let a = Sequence::periodic(vec![t(I, 0, 0)]).unwrap();
        let f = tracts_to_fundamental(&a, &Simple).unwrap();
        assert_eq!(f.period(), &[FundamentalLabel { side: I, band: 0, image_strip: 0 }]);
        let b = Sequence::new(vec![t(I, 0, 0)], vec![t(I, 0, 2)]).unwrap();
        let f = tracts_to_fundamental(&b, &Simple).unwrap();
        assert_eq!(f.get(0).image_strip, 2);
        assert_eq!(fundamental_to_tracts(&f, 0), b);
        let bad = Sequence::periodic(vec![t(I, 0, 0), t(Z, 0, 0)]).unwrap();
        assert!(tracts_to_fundamental(&bad, &Simple).is_err());
    }

    #[test]
    fn text_round_trip() {
        let a = parse_address("[(inf,0,0)] ([(inf,1,0),(0,0,0)])").unwrap();
        assert_eq!(a.preperiod(), &[t(I, 0, 0)]);
        assert_eq!(a.period(), &[t(I, 1, 0), t(Z, 0, 0)]);
        assert_eq!(parse_address(&a.to_string()).unwrap(), a);
        let e = parse_itinerary("([inf])").unwrap();
        assert_eq!(e.to_string(), "[] ([inf])");
        assert!(parse_address("[(inf,0,0)] ([])").is_err());
        assert!(parse_address("([(sideways,0,0)])").is_err());
        assert_eq!(parse_tract_list("[(inf,0,0),(inf,0,-1)]").unwrap(), vec![t(I, 0, 0), t(I, 0, -1)]);
    }
}
