//! Finite disjoint unions of half-open rational subintervals of `[0,1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A half-open interval `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// A measurable set: sorted, pairwise disjoint, non-adjacent pieces inside `[0,1)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    pieces: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Diff,
    SymDiff,
    Complement,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { pieces: Vec::new() }
    }

    pub fn full() -> Self {
        Self::interval(Rational::zero(), Rational::one())
    }

    /// `[lo, hi)`; empty when `hi <= lo`. Panics if the bounds leave `[0,1]`.
    pub fn interval(lo: Rational, hi: Rational) -> Self {
        assert!(!lo.is_negative() && hi <= Rational::one(), "interval outside [0,1)");
        if hi <= lo {
            Self::empty()
        } else {
            IntervalSet { pieces: vec![Interval { lo, hi }] }
        }
    }

    /// The dyadic interval `[k/2^level, (k+1)/2^level)`.
    pub fn dyadic(level: u32, k: u64) -> Self {
        Self::interval(Rational::dyadic(k as i64, level), Rational::dyadic(k as i64 + 1, level))
    }

    /// Canonicalizes arbitrary pieces: drops empties, sorts, merges overlaps
    /// and adjacency. Fails if a piece leaves `[0,1)`.
    pub fn from_intervals<I>(pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let mut v = Vec::new();
        for (lo, hi) in pieces {
            if lo.is_negative() || hi > Rational::one() {
                return Err(Error::OutOfUnitInterval(format!("[{lo}, {hi})")));
            }
            if lo < hi {
                v.push(Interval { lo, hi });
            }
        }
        Ok(Self::normalize_vec(v))
    }

    /// Canonical form of pieces already known to lie in `[0,1)`.
    pub(crate) fn normalize_vec(mut v: Vec<Interval>) -> Self {
        v.retain(|p| p.lo < p.hi);
        if v.windows(2).any(|w| w[0].lo > w[1].lo) {
            v.sort_by(|a, b| a.lo.cmp(&b.lo));
        }
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for p in v {
            match out.last_mut() {
                Some(last) if p.lo <= last.hi => {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                    }
                }
                _ => out.push(p),
            }
        }
        IntervalSet { pieces: out }
    }

    pub fn normalize(&self) -> Self {
        Self::normalize_vec(self.pieces.clone())
    }

    pub fn is_canonical(&self) -> bool {
        self.pieces.iter().all(|p| p.lo < p.hi && !p.lo.is_negative() && p.hi <= Rational::one())
            && self.pieces.windows(2).all(|w| w[0].hi < w[1].lo)
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Interval> {
        self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.pieces.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let idx = self.pieces.partition_point(|p| &p.hi <= x);
        self.pieces.get(idx).is_some_and(|p| p.contains(x))
    }

    /// Smallest point of the set.
    pub fn leftmost(&self) -> Option<&Rational> {
        self.pieces.first().map(|p| &p.lo)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a != b)
    }

    pub fn complement(&self) -> Self {
        Self::full().difference(self)
    }

    pub fn apply(&self, other: &Self, op: SetOp) -> Self {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Diff => self.difference(other),
            SetOp::SymDiff => self.symmetric_difference(other),
            SetOp::Complement => self.complement(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a, b) = (&self.pieces[i], &other.pieces[j]);
            if a.hi <= b.lo {
                i += 1;
            } else if b.hi <= a.lo {
                j += 1;
            } else {
                return false;
            }
        }
        true
    }

    /// μ(self ∩ other) without materializing the intersection.
    pub fn intersection_measure(&self, other: &Self) -> Rational {
        let (mut i, mut j) = (0, 0);
        let mut total = Rational::zero();
        while i < self.pieces.len() && j < other.pieces.len() {
            let (a, b) = (&self.pieces[i], &other.pieces[j]);
            let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
            let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
            if lo < hi {
                total += hi - lo;
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        total
    }

    /// Translation by `shift`; the result must stay inside `[0,1)`.
    pub fn translate(&self, shift: &Rational) -> Self {
        IntervalSet {
            pieces: self
                .pieces
                .iter()
                .map(|p| Interval { lo: &p.lo + shift, hi: &p.hi + shift })
                .collect(),
        }
    }

    /// Boundary sweep shared by every binary operation; `keep(false, false)`
    /// must be false.
    fn combine(&self, other: &Self, keep: impl Fn(bool, bool) -> bool) -> Self {
        let a = &self.pieces;
        let b = &other.pieces;
        let (mut i, mut j) = (0usize, 0usize);
        let (mut in_a, mut in_b) = (false, false);
        let mut out: Vec<Interval> = Vec::new();
        let mut open: Option<Rational> = None;
        loop {
            let next_a = a.get(i / 2).map(|p| if i % 2 == 0 { &p.lo } else { &p.hi });
            let next_b = b.get(j / 2).map(|p| if j % 2 == 0 { &p.lo } else { &p.hi });
            let x = match (next_a, next_b) {
                (None, None) => break,
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (Some(x), Some(y)) => {
                    if x <= y {
                        x.clone()
                    } else {
                        y.clone()
                    }
                }
            };
            if next_a == Some(&x) {
                in_a = !in_a;
                i += 1;
            }
            if next_b == Some(&x) {
                in_b = !in_b;
                j += 1;
            }
            match (open.is_some(), keep(in_a, in_b)) {
                (false, true) => open = Some(x),
                (true, false) => {
                    let lo = open.take().expect("open");
                    out.push(Interval { lo, hi: x });
                }
                _ => {}
            }
        }
        debug_assert!(open.is_none());
        IntervalSet { pieces: out }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Parses `[lo..hi, lo..hi, ...]`; `[]` is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("interval set must be bracketed: {t:?}")))?;
        let mut pieces = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (lo, hi) = part
                .split_once("..")
                .ok_or_else(|| Error::Parse(format!("expected lo..hi, got {part:?}")))?;
            let lo: Rational = lo.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            let hi: Rational = hi.parse().map_err(|e| Error::Parse(format!("{e}")))?;
            if lo >= hi {
                return Err(Error::Parse(format!("empty or reversed piece {part:?}")));
            }
            pieces.push((lo, hi));
        }
        Self::from_intervals(pieces)
    }
}

/// A rational endpoint as `(num, den)`.
pub type Fraction = (i64, i64);

/// Builds a set from `(num, den)` pairs; for tests and examples.
pub fn set_of(pieces: &[(Fraction, Fraction)]) -> IntervalSet {
    IntervalSet::from_intervals(
        pieces
            .iter()
            .map(|&((a, b), (c, d))| (Rational::new(a, b), Rational::new(c, d))),
    )
    .expect("pieces inside [0,1)")
}
