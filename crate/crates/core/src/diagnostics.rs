//! Exact ergodic and mixing deviations.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::PiecewiseMap;
use crate::entropy::best_union_approx;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval_set::IntervalSet;
use crate::partition::Partition;
use crate::rational::Rational;

pub const DEFAULT_CELL_BUDGET: usize = 1 << 16;

/// How many of a list of sets contain each point, as a step function on `[0,1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepCount {
    breaks: Vec<Rational>,
    counts: Vec<u32>,
}

impl StepCount {
    pub fn new<'a>(sets: impl IntoIterator<Item = &'a IntervalSet>, budget: usize) -> Result<Self> {
        let mut events: Vec<(Rational, i32)> = Vec::new();
        for s in sets {
            for p in s.pieces() {
                events.push((p.lo.clone(), 1));
                events.push((p.hi.clone(), -1));
            }
        }
        events.sort_by(|a, b| a.0.cmp(&b.0));
        let mut breaks = vec![Rational::zero()];
        let mut counts = Vec::new();
        let mut level = 0i32;
        let mut idx = 0;
        while idx < events.len() {
            let x = events[idx].0.clone();
            let before = level;
            while idx < events.len() && events[idx].0 == x {
                level += events[idx].1;
                idx += 1;
            }
            if x.is_zero() {
                continue;
            }
            if counts.len() + 1 > budget {
                return Err(Error::BudgetExceeded { cells: counts.len() + 1, budget });
            }
            counts.push(before as u32);
            breaks.push(x);
        }
        if breaks.last() != Some(&Rational::one()) {
            counts.push(0);
            breaks.push(Rational::one());
        }
        Ok(merge_runs(breaks, counts))
    }

    /// Segments `(lo, hi, count)`.
    pub fn segments(&self) -> impl Iterator<Item = (&Rational, &Rational, u32)> {
        self.counts.iter().enumerate().map(|(t, &c)| (&self.breaks[t], &self.breaks[t + 1], c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `∫_over |count/n − mean| dμ`, or over all of `[0,1)`.
    pub fn abs_deviation(&self, n: usize, mean: &Rational, over: Option<&IntervalSet>) -> Rational {
        let target = mean * Rational::from_integer(n as i64);
        let weight = |c: u32| (Rational::from_integer(c as i64) - &target).abs();
        let total: Rational = match over {
            None => self.segments().map(|(lo, hi, c)| weight(c) * (hi - lo)).sum(),
            Some(set) => {
                let mut acc = Rational::zero();
                let mut t = 0;
                for iv in set.pieces() {
                    t += self.breaks[t + 1..].partition_point(|b| b <= &iv.lo);
                    let mut k = t;
                    while k < self.counts.len() && self.breaks[k] < iv.hi {
                        let lo = if self.breaks[k] > iv.lo { &self.breaks[k] } else { &iv.lo };
                        let hi = if self.breaks[k + 1] < iv.hi { &self.breaks[k + 1] } else { &iv.hi };
                        if lo < hi {
                            acc += weight(self.counts[k]) * (hi - lo);
                        }
                        k += 1;
                    }
                }
                acc
            }
        };
        total / Rational::from_integer(n as i64)
    }
}

fn merge_runs(breaks: Vec<Rational>, counts: Vec<u32>) -> StepCount {
    let mut b = vec![breaks[0].clone()];
    let mut c: Vec<u32> = Vec::with_capacity(counts.len());
    for (t, &v) in counts.iter().enumerate() {
        if c.last() == Some(&v) {
            *b.last_mut().expect("nonempty") = breaks[t + 1].clone();
        } else {
            c.push(v);
            b.push(breaks[t + 1].clone());
        }
    }
    StepCount { breaks: b, counts: c }
}

/// `T^{-i}(c)` for `i = 0..n`.
pub fn preimage_orbit(t: &PiecewiseMap, c: &IntervalSet, n: usize) -> Vec<IntervalSet> {
    let mut out = Vec::with_capacity(n);
    let mut cur = c.clone();
    for i in 0..n {
        let next = if i + 1 < n { Some(t.preimage_set(&cur)) } else { None };
        out.push(cur);
        match next {
            Some(s) => cur = s,
            None => break,
        }
    }
    out
}

/// `∫ |(1/n) Σ_{i<n} I_c(T^i x) − μ(c)| dμ`, exactly.
pub fn l1_ergodic_deviation(t: &PiecewiseMap, c: &IntervalSet, n: usize) -> Result<Rational> {
    l1_ergodic_deviation_with_budget(t, c, n, DEFAULT_CELL_BUDGET)
}

pub fn l1_ergodic_deviation_with_budget(t: &PiecewiseMap, c: &IntervalSet, n: usize, budget: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let orbit = preimage_orbit(t, c, n);
    let steps = StepCount::new(&orbit, budget)?;
    Ok(steps.abs_deviation(n, &c.measure(), None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MemberId {
    Single(usize),
    Pair(usize, usize),
}

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemberId::Single(i) => write!(f, "{i}"),
            MemberId::Pair(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeviationReport {
    pub n: usize,
    pub per_member: Vec<(MemberId, Rational)>,
    pub sup: Rational,
    pub argmax: MemberId,
    pub truncation_error: Rational,
}

impl DeviationReport {
    /// `values` must be in member order; ties go to the earliest entry.
    fn from_values(n: usize, values: Vec<(MemberId, Rational)>) -> Self {
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if v.1 > values[best].1 {
                best = i;
            }
        }
        let (argmax, sup) = values
            .get(best)
            .cloned()
            .unwrap_or((MemberId::Single(0), Rational::zero()));
        DeviationReport { n, per_member: values, sup, argmax, truncation_error: Rational::zero() }
    }

    pub fn with_truncation_error(mut self, err: Rational) -> Self {
        self.truncation_error = err;
        self
    }
}

/// Per-member L¹ deviations over the family horizon.
pub fn uniform_l1_deviation(t: &PiecewiseMap, f: &SetFamily, n: usize) -> Result<DeviationReport> {
    let values = f
        .members()
        .par_iter()
        .enumerate()
        .map(|(i, c)| l1_ergodic_deviation(t, c, n).map(|d| (MemberId::Single(i), d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeviationReport::from_values(n, values))
}

fn top_pairs(n: usize, mut values: Vec<(MemberId, Rational)>) -> DeviationReport {
    let full = DeviationReport::from_values(n, values.clone());
    values.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    values.truncate(10);
    DeviationReport { per_member: values, ..full }
}

/// A step density on `[0,1)`; zero outside the listed segments.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Density {
    segments: Vec<(Rational, Rational, Rational)>,
}

impl Density {
    fn indicator(s: &IntervalSet) -> Self {
        Density { segments: s.pieces().iter().map(|p| (p.lo.clone(), p.hi.clone(), Rational::one())).collect() }
    }

    fn from_events(mut events: Vec<(Rational, Rational)>) -> Self {
        events.sort_by(|a, b| a.0.cmp(&b.0));
        let mut segments: Vec<(Rational, Rational, Rational)> = Vec::new();
        let mut value = Rational::zero();
        let mut idx = 0;
        while idx < events.len() {
            let x = events[idx].0.clone();
            while idx < events.len() && events[idx].0 == x {
                value += &events[idx].1;
                idx += 1;
            }
            let Some(next) = events.get(idx).map(|e| e.0.clone()) else { break };
            if value.is_zero() {
                continue;
            }
            match segments.last_mut() {
                Some(last) if last.1 == x && last.2 == value => last.1 = next,
                _ => segments.push((x, next, value.clone())),
            }
        }
        Density { segments }
    }

    /// Transfer under `t`: the density of the image measure.
    fn push(&self, t: &PiecewiseMap) -> Self {
        let pieces = t.pieces();
        let mut events = Vec::new();
        let mut i = 0;
        for (lo, hi, v) in &self.segments {
            i += pieces[i..].partition_point(|p| &p.hi <= lo);
            let mut k = i;
            while k < pieces.len() && &pieces[k].lo < hi {
                let p = &pieces[k];
                let a = if &p.lo > lo { &p.lo } else { lo };
                let b = if &p.hi < hi { &p.hi } else { hi };
                if a < b {
                    let w = v / &p.slope;
                    events.push((p.apply(a), w.clone()));
                    events.push((p.apply(b), -w));
                }
                k += 1;
            }
        }
        Density::from_events(events)
    }

    fn integral_over(&self, s: &IntervalSet) -> Rational {
        let mut acc = Rational::zero();
        let mut t = 0;
        for iv in s.pieces() {
            t += self.segments[t..].partition_point(|seg| seg.1 <= iv.lo);
            let mut k = t;
            while k < self.segments.len() && self.segments[k].0 < iv.hi {
                let (lo, hi, v) = &self.segments[k];
                let a = if lo > &iv.lo { lo } else { &iv.lo };
                let b = if hi < &iv.hi { hi } else { &iv.hi };
                if a < b {
                    acc += v * &(b - a);
                }
                k += 1;
            }
        }
        acc
    }
}

/// `μ(A ∩ T^{-i}B)` for every member `B`, `i = 0..n`, as `out[i][b]`.
fn correlations(t: &PiecewiseMap, f: &SetFamily, a: &IntervalSet, n: usize) -> Vec<Vec<Rational>> {
    let mut density = Density::indicator(a);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(f.members().iter().map(|b| density.integral_over(b)).collect());
        if i + 1 < n {
            density = density.push(t);
        }
    }
    out
}

fn pair_scan(f: &SetFamily, row: impl Fn(usize) -> Vec<Rational> + Sync + Send) -> Vec<(MemberId, Rational)> {
    let rows: Vec<Vec<Rational>> = (0..f.horizon()).into_par_iter().map(row).collect();
    rows.into_iter()
        .enumerate()
        .flat_map(|(a, r)| r.into_iter().enumerate().map(move |(b, v)| (MemberId::Pair(a, b), v)))
        .collect()
}

/// `sup_{A,B} |μ(A ∩ T^{-n}B) − μ(A)μ(B)|`; keeps the ten largest pairs.
pub fn strong_mixing_deviation(t: &PiecewiseMap, f: &SetFamily, n: usize) -> DeviationReport {
    let measures: Vec<Rational> = f.members().iter().map(IntervalSet::measure).collect();
    let values = pair_scan(f, |a| {
        let mut density = Density::indicator(f.member(a));
        for _ in 0..n {
            density = density.push(t);
        }
        f.members()
            .iter()
            .enumerate()
            .map(|(b, set)| (density.integral_over(set) - &measures[a] * &measures[b]).abs())
            .collect()
    });
    top_pairs(n, values)
}

/// `sup_{A,B} (1/n) Σ_{i<n} |μ(A ∩ T^{-i}B) − μ(A)μ(B)|`.
pub fn weak_mixing_deviation(t: &PiecewiseMap, f: &SetFamily, n: usize) -> Result<DeviationReport> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let measures: Vec<Rational> = f.members().iter().map(IntervalSet::measure).collect();
    let count = Rational::from_integer(n as i64);
    let values = pair_scan(f, |a| {
        let rows = correlations(t, f, f.member(a), n);
        (0..f.horizon())
            .map(|b| {
                let product = &measures[a] * &measures[b];
                let total: Rational = rows.iter().map(|r| (&r[b] - &product).abs()).sum();
                total / &count
            })
            .collect()
    });
    Ok(top_pairs(n, values))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LipschitzBound {
    pub bound: Rational,
    pub max_over_unions: Rational,
    /// Largest majority-rule approximation error over the horizon.
    pub approx_err: Rational,
    /// Bit `i` set means cell `i` is in the maximizing union.
    pub argmax_union: u64,
}

/// Upper bound on `sup_C evaluator(C)` over the horizon, from the maximum
/// over all unions of certificate cells plus `L·err`, where `err` is the
/// worst majority-rule approximation error of a member. `approx_err` is the
/// caller's claimed bound on that error and must not be exceeded.
pub fn lipschitz_uniform_bound(
    f: &SetFamily,
    cert: &Partition,
    evaluator: impl Fn(&IntervalSet) -> Result<Rational> + Sync,
    lipschitz: &Rational,
    approx_err: &Rational,
    union_cap: usize,
) -> Result<LipschitzBound> {
    let cells = cert.len();
    if cells >= 64 || (1usize << cells) > union_cap {
        return Err(Error::BudgetExceeded { cells: 1usize.checked_shl(cells as u32).unwrap_or(usize::MAX), budget: union_cap });
    }
    let half = Rational::new(1, 2);
    let err = f
        .members()
        .iter()
        .map(|c| best_union_approx(cert, c, &half).err)
        .max()
        .unwrap_or_else(Rational::zero);
    if &err > approx_err {
        return Err(Error::Audit(format!("certificate approximation error {err} exceeds the claimed {approx_err}")));
    }
    let values = (0..1u64 << cells)
        .into_par_iter()
        .map(|mask| {
            let u = (0..cells)
                .filter(|i| mask >> i & 1 == 1)
                .fold(IntervalSet::empty(), |acc, i| acc.union(&cert.cells()[i]));
            evaluator(&u).map(|v| (mask, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax_union, max_over_unions) = values
        .into_iter()
        .fold((0u64, Rational::zero()), |best, (m, v)| if v > best.1 { (m, v) } else { best });
    Ok(LipschitzBound { bound: &max_over_unions + lipschitz * &err, max_over_unions, approx_err: err, argmax_union })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_set::set_of;
    use crate::rational::q;
    use proptest::prelude::*;

    /// Direct evaluation on a fine grid: every orbit preimage of `c` is a
    /// union of level-`grid` cells, so the average is constant on them.
    fn grid_oracle(t: &PiecewiseMap, c: &IntervalSet, n: usize, grid: u32) -> Rational {
        let cells = 1i64 << grid;
        let mu = c.measure();
        let mut total = Rational::zero();
        for k in 0..cells {
            let mut x = Rational::new(2 * k + 1, 2 * cells);
            let mut hits = 0;
            for _ in 0..n {
                if c.contains(&x) {
                    hits += 1;
                }
                x = t.apply_point(&x);
            }
            total += (Rational::new(hits, n as i64) - &mu).abs();
        }
        total / Rational::from_integer(cells)
    }

    #[test]
    fn l1_examples() {
        let half = IntervalSet::dyadic(1, 0);
        for t in [PiecewiseMap::identity(), PiecewiseMap::doubling(), PiecewiseMap::odometer(3)] {
            assert_eq!(l1_ergodic_deviation(&t, &half, 1).unwrap(), q(1, 2));
        }
        assert_eq!(l1_ergodic_deviation(&PiecewiseMap::odometer(2), &half, 2).unwrap(), q(0, 1));
        for r in 1..=5u32 {
            let t = PiecewiseMap::odometer(r);
            for j in 1..=r {
                for k in 0..(1u64 << j) {
                    let c = IntervalSet::dyadic(j, k);
                    assert_eq!(l1_ergodic_deviation(&t, &c, 1 << j).unwrap(), q(0, 1));
                }
            }
        }
    }

    #[test]
    fn l1_matches_grid_oracle() {
        let c = set_of(&[((1, 8), (3, 8)), ((5, 8), (11, 16))]);
        for n in 1..=12 {
            for t in [PiecewiseMap::odometer(4), PiecewiseMap::doubling(), PiecewiseMap::swap_halves()] {
                let grid = if t == PiecewiseMap::doubling() { 4 + n as u32 } else { 5 };
                if grid > 12 {
                    continue;
                }
                assert_eq!(l1_ergodic_deviation(&t, &c, n).unwrap(), grid_oracle(&t, &c, n, grid), "n={n}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let c = IntervalSet::dyadic(3, 1);
        let t = PiecewiseMap::doubling();
        assert!(matches!(
            l1_ergodic_deviation_with_budget(&t, &c, 8, 16),
            Err(Error::BudgetExceeded { budget: 16, .. })
        ));
    }

    #[test]
    fn uniform_examples() {
        let f = SetFamily::dyadic_intervals(3);
        let r = uniform_l1_deviation(&PiecewiseMap::odometer(5), &f, 8).unwrap();
        assert_eq!(r.sup, q(0, 1));
        let r = uniform_l1_deviation(&PiecewiseMap::odometer(5), &f, 1).unwrap();
        let expect = f
            .members()
            .iter()
            .map(|c| {
                let m = c.measure();
                Rational::from_integer(2) * &m * (Rational::one() - &m)
            })
            .max()
            .unwrap();
        assert_eq!(r.sup, expect);
        assert_eq!(r.argmax, MemberId::Single(0));
        assert!(r.per_member.iter().all(|(_, v)| v <= &r.sup));
    }

    #[test]
    fn strong_mixing_examples() {
        let d = PiecewiseMap::doubling();
        let r = strong_mixing_deviation(&d, &SetFamily::dyadic_intervals(3), 3);
        assert_eq!(r.sup, q(0, 1));
        let half = SetFamily::explicit(vec![IntervalSet::dyadic(1, 0)]).unwrap();
        assert_eq!(strong_mixing_deviation(&d, &half, 0).sup, q(1, 4));
        for n in 0..5 {
            assert_eq!(strong_mixing_deviation(&PiecewiseMap::identity(), &half, n).sup, q(1, 4));
        }
        let third = SetFamily::explicit(vec![set_of(&[((0, 1), (1, 3))])]).unwrap();
        assert_eq!(strong_mixing_deviation(&PiecewiseMap::identity(), &third, 7).sup, q(2, 9));
    }

    #[test]
    fn digit_sets_never_mix_uniformly() {
        let d = PiecewiseMap::doubling();
        for n in [4usize, 8] {
            let r = strong_mixing_deviation(&d, &SetFamily::digit_sets(16), n);
            assert_eq!(r.sup, q(1, 4));
            assert_eq!(r.argmax, MemberId::Pair(n, 0));
            assert_eq!(r.per_member.len(), 10);
        }
    }

    #[test]
    fn transfer_matches_preimages() {
        let maps = [
            PiecewiseMap::doubling(),
            PiecewiseMap::odometer(4),
            PiecewiseMap::interval_exchange(&[q(1, 3), q(1, 6), q(1, 2)], &[2, 0, 1]).unwrap(),
        ];
        let f = SetFamily::explicit(vec![
            set_of(&[((1, 8), (3, 8)), ((5, 8), (11, 16))]),
            set_of(&[((0, 1), (1, 3))]),
            IntervalSet::dyadic(3, 5),
        ])
        .unwrap();
        for t in &maps {
            for a in f.members() {
                let rows = correlations(t, &f, a, 6);
                for (i, row) in rows.iter().enumerate() {
                    for (b, v) in f.members().iter().zip(row) {
                        assert_eq!(v, &a.intersection_measure(&t.preimage_iter(b, i)));
                    }
                }
            }
        }
    }

    #[test]
    fn weak_mixing_examples() {
        let d = PiecewiseMap::doubling();
        let r = weak_mixing_deviation(&d, &SetFamily::dyadic_intervals(2), 16).unwrap();
        assert!(r.sup <= q(1, 16));
        let whole = SetFamily::explicit(vec![IntervalSet::full()]).unwrap();
        assert_eq!(weak_mixing_deviation(&d, &whole, 5).unwrap().sup, q(0, 1));
        let f = SetFamily::dyadic_intervals(2);
        let n = 6;
        let strong_max = (0..n).map(|i| strong_mixing_deviation(&d, &f, i).sup).max().unwrap();
        assert!(weak_mixing_deviation(&d, &f, n).unwrap().sup <= strong_max);
    }

    #[test]
    fn lipschitz_examples() {
        let t = PiecewiseMap::odometer(6);
        let f = SetFamily::dyadic_intervals(4);
        let cert = Partition::dyadic(4);
        let eval = |c: &IntervalSet| l1_ergodic_deviation(&t, c, 16);
        let direct = uniform_l1_deviation(&t, &f, 16).unwrap().sup;
        let claimed = q(1, 64);
        let b = lipschitz_uniform_bound(&f, &cert, eval, &q(2, 1), &claimed, 1 << 16).unwrap();
        assert!(b.bound >= direct);
        assert!(&b.bound - &direct < q(2, 1) * &claimed);
        assert_eq!(b.approx_err, q(0, 1));
        assert_eq!(b.bound, b.max_over_unions);

        let coarse = Partition::dyadic(2);
        let f3 = SetFamily::dyadic_intervals(3);
        let eval = |c: &IntervalSet| l1_ergodic_deviation(&t, c, 3);
        let b = lipschitz_uniform_bound(&f3, &coarse, eval, &q(2, 1), &q(1, 8), 1 << 16).unwrap();
        assert!(b.bound >= uniform_l1_deviation(&t, &f3, 3).unwrap().sup);
        assert!(lipschitz_uniform_bound(&f3, &coarse, eval, &q(2, 1), &q(1, 16), 1 << 16).is_err());
        assert!(matches!(
            lipschitz_uniform_bound(&f3, &Partition::dyadic(5), eval, &q(2, 1), &q(1, 8), 1 << 16),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn lipschitz_in_the_set(a in crate::interval_set::tests::arb_set(5), b in crate::interval_set::tests::arb_set(5), n in 1usize..10) {
            let t = PiecewiseMap::odometer(4);
            let da = l1_ergodic_deviation(&t, &a, n).unwrap();
            let db = l1_ergodic_deviation(&t, &b, n).unwrap();
            prop_assert!(da <= Rational::from_integer(2) * a.symmetric_difference(&b).measure() + db);
        }

        #[test]
        fn shift_by_one(c in crate::interval_set::tests::arb_set(5), n in 1usize..12) {
            for t in [PiecewiseMap::odometer(5), PiecewiseMap::doubling()] {
                let d0 = l1_ergodic_deviation(&t, &c, n).unwrap();
                let d1 = l1_ergodic_deviation(&t, &c, n + 1).unwrap();
                prop_assert!((d0 - d1).abs() <= Rational::new(2, n as i64 + 1));
            }
        }

        #[test]
        fn identity_conjugation_changes_nothing(c in crate::interval_set::tests::arb_set(5), n in 1usize..8) {
            let t = PiecewiseMap::odometer(4);
            let tc = t.conjugate(&PiecewiseMap::identity()).unwrap();
            prop_assert_eq!(l1_ergodic_deviation(&t, &c, n).unwrap(), l1_ergodic_deviation(&tc, &c, n).unwrap());
        }

        #[test]
        fn identity_strong_mixing_is_self_correlation(c in crate::interval_set::tests::arb_set(5), n in 0usize..6) {
            let f = SetFamily::explicit(vec![c.clone()]).unwrap();
            let m = c.measure();
            let r = strong_mixing_deviation(&PiecewiseMap::identity(), &f, n);
            prop_assert_eq!(r.sup, &m * &(Rational::one() - &m));
        }

        #[test]
        fn step_count_matches_pointwise(sets in prop::collection::vec(crate::interval_set::tests::arb_set(5), 1..6)) {
            let steps = StepCount::new(&sets, DEFAULT_CELL_BUDGET).unwrap();
            for k in 0..64 {
                let x = Rational::new(2 * k + 1, 128);
                let direct = sets.iter().filter(|s| s.contains(&x)).count() as u32;
                let (_, _, c) = steps.segments().find(|(lo, hi, _)| **lo <= x && x < **hi).unwrap();
                prop_assert_eq!(c, direct);
            }
        }
    }
}
