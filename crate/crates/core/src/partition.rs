//! Finite partitions of `[0,1)` (or of a base set) into positive-measure cells.
//!
//! Cells are [`IntervalSet`]s, not single intervals: joins and induced
//! partitions produce unions. Cells are kept ordered by their leftmost point
//! unless the partition carries tags, in which case tag order is preserved.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval_set::{Interval, IntervalSet};
use crate::rational::Rational;

/// Tower coordinates `(level, column)` of a cell `T^level(A_column)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellTag {
    pub level: usize,
    pub column: usize,
}

#[derive(Clone, Debug)]
pub struct Partition {
    cells: Vec<IntervalSet>,
    tags: Option<Vec<CellTag>>,
}

impl Partition {
    /// Validates a partition of `[0,1)`.
    pub fn new(cells: Vec<IntervalSet>) -> Result<Self> {
        let p = Self::sorted(cells);
        p.validate_cover(&IntervalSet::full())?;
        Ok(p)
    }

    /// Validates a partition of `support`.
    pub fn of_support(cells: Vec<IntervalSet>, support: &IntervalSet) -> Result<Self> {
        let p = Self::sorted(cells);
        p.validate_cover(support)?;
        Ok(p)
    }

    fn sorted(mut cells: Vec<IntervalSet>) -> Self {
        cells.sort_by(|a, b| a.leftmost().cmp(&b.leftmost()));
        Partition { cells, tags: None }
    }

    pub(crate) fn from_cells_unchecked(cells: Vec<IntervalSet>) -> Self {
        Partition { cells, tags: None }
    }

    pub fn trivial() -> Self {
        Partition { cells: vec![IntervalSet::full()], tags: None }
    }

    /// The `2^level` dyadic intervals of one level.
    pub fn dyadic(level: u32) -> Self {
        let cells = (0..1u64 << level).map(|k| IntervalSet::dyadic(level, k)).collect();
        Partition { cells, tags: None }
    }

    /// Attaches tags; order of cells is kept as given.
    pub fn with_tags(mut self, tags: Vec<CellTag>) -> Result<Self> {
        if tags.len() != self.cells.len() {
            return Err(Error::InvalidPartition(format!(
                "{} tags for {} cells",
                tags.len(),
                self.cells.len()
            )));
        }
        self.tags = Some(tags);
        Ok(self)
    }

    /// Builds a tagged partition of `support` without reordering cells.
    pub fn tagged(cells: Vec<IntervalSet>, tags: Vec<CellTag>, support: &IntervalSet) -> Result<Self> {
        let p = Partition { cells, tags: None }.with_tags(tags)?;
        p.validate_cover(support)?;
        Ok(p)
    }

    pub fn cells(&self) -> &[IntervalSet] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<IntervalSet> {
        self.cells
    }

    pub fn tags(&self) -> Option<&[CellTag]> {
        self.tags.as_deref()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn support(&self) -> IntervalSet {
        IntervalSet::normalize_vec(self.cells.iter().flat_map(|c| c.pieces().iter().cloned()).collect())
    }

    /// Checks positivity, pairwise disjointness and exact coverage of `support`.
    pub fn validate_cover(&self, support: &IntervalSet) -> Result<()> {
        for (i, c) in self.cells.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidPartition(format!("cell {i} has measure zero")));
            }
        }
        let pieces = self.labeled_pieces();
        for w in pieces.windows(2) {
            if w[0].0.hi > w[1].0.lo {
                return Err(Error::InvalidPartition(format!(
                    "cells {} and {} overlap near {}",
                    w[0].1, w[1].1, w[1].0.lo
                )));
            }
        }
        let union = self.support();
        if &union != support {
            return Err(Error::InvalidPartition(format!(
                "cells cover {union}, expected {support}"
            )));
        }
        Ok(())
    }

    /// Every piece of every cell, tagged with its cell index, sorted by position.
    pub fn labeled_pieces(&self) -> Vec<(&Interval, usize)> {
        let mut v: Vec<(&Interval, usize)> = self
            .cells
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.pieces().iter().map(move |p| (p, i)))
            .collect();
        v.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        v
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: &Rational) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }

    /// `μ(A ∩ s)` for every cell `A`, in cell order.
    pub fn cell_measures(&self, s: &IntervalSet) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.cells.len()];
        let pieces = self.labeled_pieces();
        let sp = s.pieces();
        let (mut i, mut j) = (0, 0);
        while i < pieces.len() && j < sp.len() {
            let (a, cell) = pieces[i];
            let b = &sp[j];
            let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
            let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
            if lo < hi {
                out[cell] += hi - lo;
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        out
    }

    pub fn measures(&self) -> Vec<Rational> {
        self.cells.iter().map(IntervalSet::measure).collect()
    }

    /// Every cell of `self` lies inside a single cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut owner: Vec<Option<usize>> = vec![None; self.cells.len()];
        for (fine, coarse, _) in pair_pieces(self, coarser) {
            match owner[fine] {
                None => owner[fine] = Some(coarse),
                Some(c) if c == coarse => {}
                Some(_) => return false,
            }
        }
        true
    }

    /// Applies `f` to every cell, dropping cells that become empty.
    pub fn map_cells(&self, f: impl Fn(&IntervalSet) -> IntervalSet) -> Partition {
        let mut cells = Vec::with_capacity(self.cells.len());
        let mut tags = self.tags.as_ref().map(|_| Vec::new());
        for (i, c) in self.cells.iter().enumerate() {
            let img = f(c);
            if !img.is_empty() {
                cells.push(img);
                if let (Some(t), Some(src)) = (tags.as_mut(), self.tags.as_ref()) {
                    t.push(src[i]);
                }
            }
        }
        match tags {
            Some(tags) => Partition { cells, tags: Some(tags) },
            None => Self::sorted(cells),
        }
    }

    /// Order-insensitive canonical list of cells.
    fn canonical_cells(&self) -> Vec<&IntervalSet> {
        let mut v: Vec<&IntervalSet> = self.cells.iter().collect();
        v.sort_by(|a, b| a.leftmost().cmp(&b.leftmost()));
        v
    }
}

impl PartialEq for Partition {
    /// Equality of cell collections, ignoring order and tags.
    fn eq(&self, other: &Self) -> bool {
        self.canonical_cells() == other.canonical_cells()
    }
}

impl Eq for Partition {}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `[[..], [..], ...]`, a list of interval sets covering `[0,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let sets = split_bracketed_list(s)?
            .into_iter()
            .map(|t| t.parse::<IntervalSet>())
            .collect::<Result<Vec<_>>>()?;
        Partition::new(sets)
    }
}

/// Splits `[a, b, ...]` at top-level commas where each item is itself bracketed.
pub fn split_bracketed_list(s: &str) -> Result<Vec<&str>> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("list must be bracketed: {t:?}")))?;
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (i, ch) in inner.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced brackets in {t:?}")));
                }
            }
            ',' if depth == 0 => {
                items.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced brackets in {t:?}")));
    }
    let last = inner[start..].trim();
    if !last.is_empty() || !items.is_empty() {
        items.push(last);
    }
    Ok(items)
}

/// Overlapping pieces of two partitions: `(cell of p, cell of q, overlap)`,
/// in left-to-right order.
pub(crate) fn pair_pieces(p: &Partition, q: &Partition) -> Vec<(usize, usize, Interval)> {
    let a = p.labeled_pieces();
    let b = q.labeled_pieces();
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let (x, ca) = a[i];
        let (y, cb) = b[j];
        let lo = if x.lo > y.lo { &x.lo } else { &y.lo };
        let hi = if x.hi < y.hi { &x.hi } else { &y.hi };
        if lo < hi {
            out.push((ca, cb, Interval::new(lo.clone(), hi.clone())));
        }
        if x.hi <= y.hi {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// `μ(A ∩ B)` for every pair of cells that meet.
pub fn pair_measures(p: &Partition, q: &Partition) -> Vec<(usize, usize, Rational)> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out: Vec<(usize, usize, Rational)> = Vec::new();
    for (a, b, iv) in pair_pieces(p, q) {
        let len = iv.len();
        match index.get(&(a, b)) {
            Some(&k) => out[k].2 += len,
            None => {
                index.insert((a, b), out.len());
                out.push((a, b, len));
            }
        }
    }
    out
}

/// The common refinement: every nonempty `A ∩ B`.
pub fn join_partitions(p: &Partition, q: &Partition) -> Partition {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells: Vec<Vec<Interval>> = Vec::new();
    for (a, b, iv) in pair_pieces(p, q) {
        let k = *index.entry((a, b)).or_insert_with(|| {
            cells.push(Vec::new());
            cells.len() - 1
        });
        cells[k].push(iv);
    }
    // pieces arrive left to right, so first appearance is leftmost order
    Partition::from_cells_unchecked(cells.into_iter().map(IntervalSet::normalize_vec).collect())
}

/// The join `∨ {S_i, S_i^c}`; zero-measure sign patterns are dropped.
pub fn join_sets(sets: &[IntervalSet]) -> Partition {
    sets.iter().fold(Partition::trivial(), |acc, s| {
        join_partitions(&acc, &two_set_partition(s))
    })
}

/// `{s, s^c}` without its empty member.
pub fn two_set_partition(s: &IntervalSet) -> Partition {
    let cells: Vec<IntervalSet> = [s.clone(), s.complement()]
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect();
    Partition::sorted(cells)
}

/// `{A ∩ base : A ∈ p, μ(A ∩ base) > 0}`, tagged `(0, k)` in leftmost order.
pub fn induced_partition(p: &Partition, base: &IntervalSet) -> Result<Partition> {
    if base.measure().is_zero() {
        return Err(Error::ZeroMeasureBase);
    }
    let joined = join_partitions(p, &Partition::from_cells_unchecked(vec![base.clone()]));
    let tags = (0..joined.len()).map(|k| CellTag { level: 0, column: k }).collect();
    joined.with_tags(tags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_set::set_of;
    use crate::rational::q;
    use proptest::prelude::*;

    fn half() -> IntervalSet {
        IntervalSet::interval(q(0, 1), q(1, 2))
    }

    fn quarter() -> IntervalSet {
        IntervalSet::interval(q(0, 1), q(1, 4))
    }

    fn digit2() -> IntervalSet {
        set_of(&[((1, 4), (1, 2)), ((3, 4), (1, 1))])
    }

    fn even_quarters() -> IntervalSet {
        set_of(&[((0, 1), (1, 4)), ((1, 2), (3, 4))])
    }

    /// Brute force over every sign pattern.
    fn join_by_patterns(sets: &[IntervalSet]) -> Vec<IntervalSet> {
        let n = sets.len();
        (0..1u32 << n)
            .map(|mask| {
                (0..n).fold(IntervalSet::full(), |acc, i| {
                    let s = if mask >> i & 1 == 1 { sets[i].clone() } else { sets[i].complement() };
                    acc.intersect(&s)
                })
            })
            .filter(|c| !c.is_empty())
            .collect()
    }

    #[test]
    fn join_one_set() {
        let p = join_sets(&[half()]);
        assert_eq!(p, Partition::dyadic(1));
    }

    #[test]
    fn join_two_sets_gives_level_two() {
        let sets = [half(), even_quarters()];
        let p = join_sets(&sets);
        assert_eq!(p, Partition::dyadic(2));
        assert_eq!(p, Partition::new(join_by_patterns(&sets)).unwrap());
    }

    #[test]
    fn join_nested_sets_drops_empty_pattern() {
        let sets = [half(), quarter()];
        let p = join_sets(&sets);
        assert_eq!(p.len(), 3);
        assert_eq!(p, Partition::new(join_by_patterns(&sets)).unwrap());
        let expected = Partition::new(vec![
            quarter(),
            IntervalSet::interval(q(1, 4), q(1, 2)),
            IntervalSet::interval(q(1, 2), q(1, 1)),
        ])
        .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn join_partitions_examples() {
        let p = Partition::dyadic(2);
        assert_eq!(join_partitions(&p, &p), p);
        assert_eq!(join_partitions(&Partition::dyadic(1), &Partition::dyadic(2)), Partition::dyadic(2));
        let other = Partition::new(vec![even_quarters(), even_quarters().complement()]).unwrap();
        assert_eq!(join_partitions(&Partition::dyadic(1), &other), Partition::dyadic(2));
    }

    #[test]
    fn induced_examples() {
        let ind = induced_partition(&Partition::dyadic(2), &half()).unwrap();
        assert_eq!(ind.cells(), &[quarter(), IntervalSet::interval(q(1, 4), q(1, 2))]);
        assert_eq!(ind.tags().unwrap()[1], CellTag { level: 0, column: 1 });
        let triv = induced_partition(&Partition::trivial(), &quarter()).unwrap();
        assert_eq!(triv.cells(), &[quarter()]);
        // digit sets 1..3 joined, restricted to [0,1/4)
        let digit1 = IntervalSet::interval(q(1, 2), q(1, 1));
        let digit3 = set_of(&[((1, 8), (1, 4)), ((3, 8), (1, 2)), ((5, 8), (3, 4)), ((7, 8), (1, 1))]);
        let j = join_sets(&[digit1, digit2(), digit3]);
        let ind = induced_partition(&j, &quarter()).unwrap();
        assert_eq!(
            ind.cells(),
            &[IntervalSet::interval(q(0, 1), q(1, 8)), IntervalSet::interval(q(1, 8), q(1, 4))]
        );
        assert!(matches!(
            induced_partition(&Partition::trivial(), &IntervalSet::empty()),
            Err(Error::ZeroMeasureBase)
        ));
    }

    #[test]
    fn validation_catches_overlap_and_gaps() {
        assert!(Partition::new(vec![half(), quarter().complement()]).is_err());
        assert!(Partition::new(vec![quarter()]).is_err());
        assert!(Partition::new(vec![half(), half().complement(), IntervalSet::empty()]).is_err());
        assert!(Partition::new(vec![half(), half().complement()]).is_ok());
    }

    #[test]
    fn cell_measures_and_refinement() {
        let p = Partition::dyadic(2);
        assert_eq!(p.cell_measures(&digit2()), vec![q(0, 1), q(1, 4), q(0, 1), q(1, 4)]);
        assert!(Partition::dyadic(3).refines(&Partition::dyadic(1)));
        assert!(!Partition::dyadic(1).refines(&Partition::dyadic(2)));
    }

    #[test]
    fn parse_partition() {
        let p: Partition = "[[0/1..1/2], [1/2..1/1]]".parse().unwrap();
        assert_eq!(p, Partition::dyadic(1));
        assert!("[[0/1..1/2]]".parse::<Partition>().is_err());
        assert_eq!(p.to_string().parse::<Partition>().unwrap(), p);
    }

    fn arb_sets() -> impl Strategy<Value = Vec<IntervalSet>> {
        proptest::collection::vec(crate::interval_set::tests::arb_set(5), 1..5)
    }

    proptest! {
        #[test]
        fn join_sets_is_a_partition(sets in arb_sets()) {
            let p = join_sets(&sets);
            prop_assert!(p.validate_cover(&IntervalSet::full()).is_ok());
            prop_assert!(p.len() <= 1 << sets.len());
            prop_assert_eq!(&p, &Partition::new(join_by_patterns(&sets)).unwrap());
            // every input is a union of cells
            for s in &sets {
                for (c, m) in p.cells().iter().zip(p.cell_measures(s)) {
                    prop_assert!(m.is_zero() || m == c.measure());
                }
            }
        }

        #[test]
        fn join_is_commutative_and_associative(a in arb_sets(), b in arb_sets(), c in arb_sets()) {
            let (pa, pb, pc) = (join_sets(&a), join_sets(&b), join_sets(&c));
            prop_assert_eq!(join_partitions(&pa, &pb), join_partitions(&pb, &pa));
            prop_assert_eq!(
                join_partitions(&join_partitions(&pa, &pb), &pc),
                join_partitions(&pa, &join_partitions(&pb, &pc))
            );
            let j = join_partitions(&pa, &pb);
            prop_assert!(j.refines(&pa) && j.refines(&pb));
        }
    }
}
