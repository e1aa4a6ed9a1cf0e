//! Measure-preserving piecewise-affine maps of `[0,1)`.
//!
//! A map is a list of pieces `x ↦ slope·x + offset` on half-open rational
//! domains that tile `[0,1)`. Invertible maps are exactly the piecewise
//! translations whose images tile `[0,1)`; the doubling map is the
//! non-invertible example and is only ever pulled back.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interval_set::{Interval, IntervalSet};
use crate::partition::Partition;
use crate::rational::Rational;

/// `x ↦ slope·x + offset` on `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
    pub offset: Rational,
}

impl Piece {
    pub fn translation(lo: Rational, hi: Rational, offset: Rational) -> Self {
        Piece { lo, hi, slope: Rational::one(), offset }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }

    /// Inverse of the affine law.
    pub fn pull(&self, y: &Rational) -> Rational {
        (y - &self.offset) / &self.slope
    }

    pub fn image(&self) -> Interval {
        Interval::new(self.apply(&self.lo), self.apply(&self.hi))
    }

    fn same_law(&self, other: &Piece) -> bool {
        self.slope == other.slope && self.offset == other.offset
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}:{}:{}", self.lo, self.hi, self.slope, self.offset)
    }
}

/// Pieces with sorted, disjoint domains that need not cover `[0,1)`.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PartialMap {
    pieces: Vec<Piece>,
}

impl PartialMap {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.retain(|p| p.lo < p.hi);
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        if let Some(w) = pieces.windows(2).find(|w| w[0].hi > w[1].lo) {
            return Err(Error::InvalidMap(format!("overlapping domains {} and {}", w[0], w[1])));
        }
        Ok(PartialMap { pieces: merge_pieces(pieces) })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> IntervalSet {
        IntervalSet::normalize_vec(
            self.pieces.iter().map(|p| Interval::new(p.lo.clone(), p.hi.clone())).collect(),
        )
    }

    pub fn image(&self) -> IntervalSet {
        IntervalSet::normalize_vec(self.pieces.iter().map(Piece::image).collect())
    }

    pub fn restrict(&self, domain: &IntervalSet) -> PartialMap {
        PartialMap { pieces: restrict_pieces(&self.pieces, domain) }
    }

    /// `self ∘ inner`; `self` must be defined on the whole image of `inner`.
    pub fn after(&self, inner: &PartialMap) -> Result<PartialMap> {
        Ok(PartialMap { pieces: compose_pieces(&self.pieces, &inner.pieces)? })
    }

    /// Translates every image by `shift`.
    pub fn shifted(&self, shift: &Rational) -> PartialMap {
        PartialMap {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { offset: &p.offset + shift, ..p.clone() })
                .collect(),
        }
    }

    pub fn image_of(&self, s: &IntervalSet) -> IntervalSet {
        IntervalSet::normalize_vec(restrict_pieces(&self.pieces, s).iter().map(Piece::image).collect())
    }
}

/// A total measure-preserving map of `[0,1)` in canonical form.
#[derive(Clone, PartialEq, Eq)]
pub struct PiecewiseMap {
    pieces: Vec<Piece>,
    invertible: bool,
}

impl PiecewiseMap {
    /// Validates coverage, image range and exact measure preservation.
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        let one = Rational::one();
        let mut cursor = Rational::zero();
        for p in &pieces {
            if p.lo >= p.hi {
                return Err(Error::InvalidMap(format!("empty piece {p}")));
            }
            if !p.slope.is_positive() {
                return Err(Error::InvalidMap(format!("non-positive slope in {p}")));
            }
            if p.lo != cursor {
                return Err(Error::InvalidMap(format!("domains do not tile [0,1) at {cursor}")));
            }
            let img = p.image();
            if img.lo.is_negative() || img.hi > one {
                return Err(Error::InvalidMap(format!("image of {p} leaves [0,1)")));
            }
            cursor = p.hi.clone();
        }
        if cursor != one {
            return Err(Error::InvalidMap(format!("domains stop at {cursor}")));
        }
        check_density(&pieces)?;
        Ok(Self::from_pieces_trusted(pieces))
    }

    /// Pieces known to form a measure-preserving map.
    pub(crate) fn from_pieces_trusted(pieces: Vec<Piece>) -> Self {
        let pieces = merge_pieces(pieces);
        let invertible = pieces.iter().all(|p| p.slope == Rational::one());
        let map = PiecewiseMap { pieces, invertible };
        debug_assert!(map.pieces.first().is_some_and(|p| p.lo.is_zero()));
        map
    }

    /// Glues partial maps whose domains tile `[0,1)`.
    pub fn assemble(parts: impl IntoIterator<Item = PartialMap>) -> Result<Self> {
        Self::new(parts.into_iter().flat_map(|p| p.pieces).collect())
    }

    pub fn identity() -> Self {
        Self::from_pieces_trusted(vec![Piece::translation(Rational::zero(), Rational::one(), Rational::zero())])
    }

    /// Truncated von Neumann–Kakutani adding machine at resolution `r`:
    /// `[1-2^-k, 1-2^-(k+1))` is translated onto `[2^-(k+1), 2^-k)` for
    /// `k < r`, and the tail `[1-2^-r, 1)` onto `[0, 2^-r)`.
    pub fn odometer(r: u32) -> Self {
        assert!(r >= 1, "odometer resolution must be positive");
        let one = Rational::one();
        let mut pieces = Vec::with_capacity(r as usize + 1);
        for k in 0..r {
            let lo = &one - Rational::pow2_neg(k);
            let hi = &one - Rational::pow2_neg(k + 1);
            let offset = Rational::pow2_neg(k + 1) - &lo;
            pieces.push(Piece::translation(lo, hi, offset));
        }
        let lo = &one - Rational::pow2_neg(r);
        pieces.push(Piece::translation(lo.clone(), one, -lo));
        Self::from_pieces_trusted(pieces)
    }

    /// `x ↦ 2x mod 1`.
    pub fn doubling() -> Self {
        let half = Rational::new(1, 2);
        let two = Rational::from_integer(2);
        Self::from_pieces_trusted(vec![
            Piece { lo: Rational::zero(), hi: half.clone(), slope: two.clone(), offset: Rational::zero() },
            Piece { lo: half, hi: Rational::one(), slope: two, offset: -Rational::one() },
        ])
    }

    pub fn swap_halves() -> Self {
        let half = Rational::new(1, 2);
        Self::from_pieces_trusted(vec![
            Piece::translation(Rational::zero(), half.clone(), half.clone()),
            Piece::translation(half.clone(), Rational::one(), -half),
        ])
    }

    /// `x ↦ x + alpha mod 1` for `0 <= alpha < 1`.
    pub fn rotation(alpha: &Rational) -> Result<Self> {
        if alpha.is_negative() || alpha >= &Rational::one() {
            return Err(Error::OutOfRange(format!("rotation amount {alpha}")));
        }
        if alpha.is_zero() {
            return Ok(Self::identity());
        }
        let cut = Rational::one() - alpha;
        Ok(Self::from_pieces_trusted(vec![
            Piece::translation(Rational::zero(), cut.clone(), alpha.clone()),
            Piece::translation(cut.clone(), Rational::one(), -cut),
        ]))
    }

    /// Interval exchange: consecutive pieces of the given lengths are laid
    /// out again in the order `order` (a permutation of piece indices).
    pub fn interval_exchange(lengths: &[Rational], order: &[usize]) -> Result<Self> {
        let n = lengths.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidMap("order is not a permutation".into()));
        }
        let mut starts = vec![Rational::zero(); n];
        let mut acc = Rational::zero();
        for &i in order {
            starts[i] = acc.clone();
            acc += &lengths[i];
        }
        let mut pieces = Vec::with_capacity(n);
        let mut lo = Rational::zero();
        for i in 0..n {
            let hi = &lo + &lengths[i];
            let offset = &starts[i] - &lo;
            pieces.push(Piece::translation(lo, hi.clone(), offset));
            lo = hi;
        }
        Self::new(pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn as_partial(&self) -> PartialMap {
        PartialMap { pieces: self.pieces.clone() }
    }

    pub fn restrict(&self, domain: &IntervalSet) -> PartialMap {
        PartialMap { pieces: restrict_pieces(&self.pieces, domain) }
    }

    fn piece_at(&self, x: &Rational) -> &Piece {
        let idx = self.pieces.partition_point(|p| &p.hi <= x);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    /// Requires `0 <= x < 1`.
    pub fn apply_point(&self, x: &Rational) -> Rational {
        assert!(!x.is_negative() && x < &Rational::one(), "point outside [0,1)");
        self.piece_at(x).apply(x)
    }

    /// Exact forward image; only defined for invertible maps.
    pub fn image_set(&self, s: &IntervalSet) -> Result<IntervalSet> {
        if !self.invertible {
            return Err(Error::NotInvertible);
        }
        Ok(IntervalSet::normalize_vec(
            restrict_pieces(&self.pieces, s).iter().map(Piece::image).collect(),
        ))
    }

    /// Exact preimage `T^{-1}(s)`.
    pub fn preimage_set(&self, s: &IntervalSet) -> IntervalSet {
        let sp = s.pieces();
        let mut out = Vec::new();
        for p in &self.pieces {
            let img = p.image();
            let mut j = sp.partition_point(|iv| iv.hi <= img.lo);
            while j < sp.len() && sp[j].lo < img.hi {
                let lo = if sp[j].lo > img.lo { &sp[j].lo } else { &img.lo };
                let hi = if sp[j].hi < img.hi { &sp[j].hi } else { &img.hi };
                out.push(Interval::new(p.pull(lo), p.pull(hi)));
                j += 1;
            }
        }
        IntervalSet::normalize_vec(out)
    }

    /// `T^{-n}(s)`.
    pub fn preimage_iter(&self, s: &IntervalSet, n: usize) -> IntervalSet {
        (0..n).fold(s.clone(), |acc, _| self.preimage_set(&acc))
    }

    pub fn preimage_partition(&self, p: &Partition) -> Partition {
        p.map_cells(|c| self.preimage_set(c))
    }

    /// Image of every cell; only for invertible maps.
    pub fn image_partition(&self, p: &Partition) -> Result<Partition> {
        if !self.invertible {
            return Err(Error::NotInvertible);
        }
        Ok(p.map_cells(|c| self.image_set(c).expect("invertible")))
    }

    pub fn invert(&self) -> Result<Self> {
        if !self.invertible {
            return Err(Error::NotInvertible);
        }
        let mut pieces: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| Piece::translation(&p.lo + &p.offset, &p.hi + &p.offset, -&p.offset))
            .collect();
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        Ok(Self::from_pieces_trusted(pieces))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PiecewiseMap) -> PiecewiseMap {
        let pieces = compose_pieces(&self.pieces, &inner.pieces).expect("total maps compose");
        Self::from_pieces_trusted(pieces)
    }

    /// `phi⁻¹ ∘ self ∘ phi`.
    pub fn conjugate(&self, phi: &PiecewiseMap) -> Result<PiecewiseMap> {
        Ok(phi.invert()?.compose(&self.compose(phi)))
    }

    /// `self^n` by repeated squaring.
    pub fn iterate(&self, mut n: usize) -> PiecewiseMap {
        let mut result = Self::identity();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = base.compose(&result);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    /// Union of the intervals on which the two maps disagree.
    pub fn difference_set(&self, other: &PiecewiseMap) -> IntervalSet {
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.clone().max(b[j].lo.clone());
            let hi = a[i].hi.clone().min(b[j].hi.clone());
            if lo < hi && !a[i].same_law(&b[j]) {
                out.push(Interval::new(lo, hi));
            }
            if a[i].hi <= b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::normalize_vec(out)
    }

    /// First interval on which the two maps disagree.
    pub fn first_difference(&self, other: &PiecewiseMap) -> Option<Interval> {
        let (a, b) = (&self.pieces, &other.pieces);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.clone().max(b[j].lo.clone());
            let hi = a[i].hi.clone().min(b[j].hi.clone());
            if lo < hi && !a[i].same_law(&b[j]) {
                return Some(Interval::new(lo, hi));
            }
            if a[i].hi <= b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        None
    }

    /// Exact measure preservation on every dyadic interval of levels `1..=depth`.
    pub fn preserves_dyadic_measures(&self, depth: u32) -> bool {
        (1..=depth).all(|level| {
            (0..1u64 << level).all(|k| {
                let j = IntervalSet::dyadic(level, k);
                self.preimage_set(&j).measure() == j.measure()
            })
        })
    }
}

impl serde::Serialize for PiecewiseMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Debug for PiecewiseMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PiecewiseMap {
    /// `pieces:[lo..hi:slope:offset, ...]`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pieces:[")?;
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for PiecewiseMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("pieces:")
            .ok_or_else(|| Error::Parse(format!("expected pieces:[...], got {s:?}")))?;
        let inner = body
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("piece list must be bracketed: {body:?}")))?;
        let parse = |t: &str| t.trim().parse::<Rational>().map_err(|e| Error::Parse(e.to_string()));
        let mut pieces = Vec::new();
        for item in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let fields: Vec<&str> = item.split(':').collect();
            let [dom, slope, offset] = fields[..] else {
                return Err(Error::Parse(format!("expected lo..hi:slope:offset, got {item:?}")));
            };
            let (lo, hi) = dom
                .split_once("..")
                .ok_or_else(|| Error::Parse(format!("expected lo..hi, got {dom:?}")))?;
            pieces.push(Piece { lo: parse(lo)?, hi: parse(hi)?, slope: parse(slope)?, offset: parse(offset)? });
        }
        PiecewiseMap::new(pieces)
    }
}

fn merge_pieces(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(last) if last.hi == p.lo && last.same_law(&p) => last.hi = p.hi,
            _ => out.push(p),
        }
    }
    out
}

fn restrict_pieces(pieces: &[Piece], domain: &IntervalSet) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut i = 0;
    for iv in domain.pieces() {
        i += pieces[i..].partition_point(|p| p.hi <= iv.lo);
        let mut k = i;
        while k < pieces.len() && pieces[k].lo < iv.hi {
            let p = &pieces[k];
            let lo = if p.lo > iv.lo { &p.lo } else { &iv.lo };
            let hi = if p.hi < iv.hi { &p.hi } else { &iv.hi };
            if lo < hi {
                out.push(Piece { lo: lo.clone(), hi: hi.clone(), slope: p.slope.clone(), offset: p.offset.clone() });
            }
            k += 1;
        }
    }
    out
}

/// `outer ∘ inner` over the domain of `inner`.
fn compose_pieces(outer: &[Piece], inner: &[Piece]) -> Result<Vec<Piece>> {
    let mut out = Vec::with_capacity(inner.len() + outer.len());
    for p in inner {
        let img = p.image();
        let mut cursor = img.lo.clone();
        let mut k = outer.partition_point(|q| q.hi <= img.lo);
        while cursor < img.hi {
            let q = outer
                .get(k)
                .filter(|q| q.lo <= cursor)
                .ok_or_else(|| Error::InvalidMap(format!("outer map undefined at {cursor}")))?;
            let y1 = if q.hi < img.hi { q.hi.clone() } else { img.hi.clone() };
            out.push(Piece {
                lo: p.pull(&cursor),
                hi: p.pull(&y1),
                slope: &q.slope * &p.slope,
                offset: &q.slope * &p.offset + &q.offset,
            });
            cursor = y1;
            k += 1;
        }
    }
    Ok(merge_pieces(out))
}

/// Image density `Σ 1/slope` must be exactly 1 on all of `[0,1)`.
fn check_density(pieces: &[Piece]) -> Result<()> {
    let mut events: Vec<(Rational, Rational)> = Vec::with_capacity(2 * pieces.len());
    for p in pieces {
        let w = p.slope.recip();
        let img = p.image();
        events.push((img.lo, w.clone()));
        events.push((img.hi, -w));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0));
    let one = Rational::one();
    let mut density = Rational::zero();
    let mut pos = Rational::zero();
    let mut idx = 0;
    while idx < events.len() {
        let x = events[idx].0.clone();
        if x > pos && density != one {
            return Err(Error::InvalidMap(format!("image density {density} on [{pos}, {x})")));
        }
        while idx < events.len() && events[idx].0 == x {
            density += &events[idx].1;
            idx += 1;
        }
        pos = x;
    }
    if pos != one {
        return Err(Error::InvalidMap(format!("images miss [{pos}, 1)")));
    }
    Ok(())
}

/// Dyadic intervals enumerated level by level, left to right, starting at
/// level 1: `E_1 = [0,1/2)`, `E_2 = [1/2,1)`, `E_3 = [0,1/4)`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratingSequence {
    pub truncation: usize,
}

impl GeneratingSequence {
    pub fn new(truncation: usize) -> Self {
        assert!(truncation >= 1, "truncation must be positive");
        GeneratingSequence { truncation }
    }

    /// `(level, k)` of the 1-based member `index`.
    pub fn coordinates(index: usize) -> (u32, u64) {
        assert!(index >= 1);
        let level = usize::BITS - 1 - (index + 1).leading_zeros();
        (level, (index + 1 - (1usize << level)) as u64)
    }

    pub fn index_of(level: u32, k: u64) -> usize {
        (1usize << level) - 1 + k as usize
    }

    pub fn member(index: usize) -> IntervalSet {
        let (level, k) = Self::coordinates(index);
        IntervalSet::dyadic(level, k)
    }

    pub fn members(&self) -> impl Iterator<Item = IntervalSet> {
        (1..=self.truncation).map(Self::member)
    }

    /// `Σ_{i>m} 2^{-i}·2 = 2^{1-m}`.
    pub fn tail_bound(&self) -> Rational {
        Rational::dyadic(2, self.truncation as u32)
    }
}

/// Truncated weak distance; the true distance lies in `[value, value + tail_bound]`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct WeakDistance {
    pub value: Rational,
    pub tail_bound: Rational,
}

impl WeakDistance {
    pub fn upper(&self) -> Rational {
        &self.value + &self.tail_bound
    }
}

/// `Σ_{i≤m} 2^{-i} [μ(φE_i △ ψE_i) + μ(φ⁻¹E_i △ ψ⁻¹E_i)]` plus its tail bound.
pub fn weak_metric(phi: &PiecewiseMap, psi: &PiecewiseMap, gen: &GeneratingSequence) -> Result<WeakDistance> {
    if !phi.is_invertible() || !psi.is_invertible() {
        return Err(Error::NotInvertible);
    }
    // members avoiding the disagreement sets contribute nothing
    let fwd_diff = phi.difference_set(psi);
    let back_diff = phi.invert()?.difference_set(&psi.invert()?);
    let mut value = Rational::zero();
    for (i, e) in gen.members().enumerate() {
        let mut term = Rational::zero();
        if !e.intersection_measure(&fwd_diff).is_zero() {
            term += phi.image_set(&e)?.symmetric_difference(&psi.image_set(&e)?).measure();
        }
        if !e.intersection_measure(&back_diff).is_zero() {
            term += phi.preimage_set(&e).symmetric_difference(&psi.preimage_set(&e)).measure();
        }
        if !term.is_zero() {
            value += term * Rational::pow2_neg(i as u32 + 1);
        }
    }
    Ok(WeakDistance { value, tail_bound: gen.tail_bound() })
}

/// A map referenced by name, as in `odometer:R=10`, or given as pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapSpec {
    Identity,
    Odometer { resolution: u32 },
    Doubling,
    SwapHalves,
    Rotation { alpha: Rational },
    Pieces(PiecewiseMap),
}

impl MapSpec {
    pub fn build(&self) -> Result<PiecewiseMap> {
        Ok(match self {
            MapSpec::Identity => PiecewiseMap::identity(),
            MapSpec::Odometer { resolution } => PiecewiseMap::odometer(*resolution),
            MapSpec::Doubling => PiecewiseMap::doubling(),
            MapSpec::SwapHalves => PiecewiseMap::swap_halves(),
            MapSpec::Rotation { alpha } => PiecewiseMap::rotation(alpha)?,
            MapSpec::Pieces(m) => m.clone(),
        })
    }
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSpec::Identity => write!(f, "identity"),
            MapSpec::Odometer { resolution } => write!(f, "odometer:R={resolution}"),
            MapSpec::Doubling => write!(f, "doubling"),
            MapSpec::SwapHalves => write!(f, "swap-halves"),
            MapSpec::Rotation { alpha } => write!(f, "rotation:alpha={alpha}"),
            MapSpec::Pieces(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for MapSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.starts_with("pieces:") {
            return Ok(MapSpec::Pieces(t.parse()?));
        }
        let (name, params) = match t.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (t, ""),
        };
        let param = |key: &str| -> Result<&str> {
            params
                .split(',')
                .filter_map(|kv| kv.split_once('='))
                .find(|(k, _)| k.trim() == key)
                .map(|(_, v)| v.trim())
                .ok_or_else(|| Error::Parse(format!("map {name:?} needs parameter {key}")))
        };
        match name {
            "identity" => Ok(MapSpec::Identity),
            "doubling" => Ok(MapSpec::Doubling),
            "swap-halves" => Ok(MapSpec::SwapHalves),
            "odometer" => {
                let r: u32 = param("R")?.parse().map_err(|_| Error::Parse(format!("bad R in {t:?}")))?;
                if r == 0 {
                    return Err(Error::Parse("odometer needs R >= 1".into()));
                }
                Ok(MapSpec::Odometer { resolution: r })
            }
            "rotation" => {
                let alpha: Rational = param("alpha")?.parse().map_err(|e| Error::Parse(format!("{e}")))?;
                Ok(MapSpec::Rotation { alpha })
            }
            other => Err(Error::Parse(format!("unknown map {other:?}"))),
        }
    }
}
