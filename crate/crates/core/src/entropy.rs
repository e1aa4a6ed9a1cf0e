//! Partition entropy, conditional entropy and family-entropy estimates.
//!
//! Probabilities are exact rationals; only the logarithms are floats. Each
//! [`EntropyValue`] carries an absolute bound on its evaluation error, and
//! threshold comparisons go through [`EntropyValue::certainly_above`] and
//! friends.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::PiecewiseMap;
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval_set::IntervalSet;
use crate::partition::{join_partitions, pair_measures, two_set_partition, Partition};
use crate::rational::Rational;

const EPS: f64 = f64::EPSILON;

/// Entropy in bits with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub error_bound: f64,
}

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue { value: 0.0, error_bound: 0.0 };

    pub fn lower(&self) -> f64 {
        self.value - self.error_bound
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }

    /// True value is `> x` for certain.
    pub fn certainly_above(&self, x: f64) -> bool {
        self.lower() > x
    }

    /// True value is `< x` for certain.
    pub fn certainly_below(&self, x: f64) -> bool {
        self.upper() < x
    }

    /// The true values could coincide.
    pub fn overlaps(&self, other: &EntropyValue) -> bool {
        (self.value - other.value).abs() <= self.error_bound + other.error_bound
    }

    pub fn div(&self, n: usize) -> EntropyValue {
        let value = self.value / n as f64;
        EntropyValue { value, error_bound: self.error_bound / n as f64 + EPS * value.abs() }
    }

    pub fn sum<'a>(values: impl IntoIterator<Item = &'a EntropyValue>) -> EntropyValue {
        let mut acc = Accumulator::default();
        for v in values {
            acc.push(v.value, v.error_bound);
        }
        acc.finish()
    }
}

/// Neumaier summation of `-w·log2(r)` terms with running error bound.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    comp: f64,
    abs: f64,
    err: f64,
    count: usize,
}

impl Accumulator {
    fn push(&mut self, t: f64, err: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
        self.abs += t.abs();
        self.err += err;
        self.count += 1;
    }

    /// Adds `-weight·log2(ratio)`.
    fn term(&mut self, weight: &Rational, ratio: &Rational) {
        if weight.is_zero() || ratio == &Rational::one() {
            return;
        }
        let (l, el) = ratio.log2_with_error();
        let w = weight.to_f64();
        let t = -w * l;
        self.push(t, w.abs() * el + 4.0 * EPS * t.abs());
    }

    fn finish(self) -> EntropyValue {
        let n = self.count as f64;
        let err = self.err + (3.0 * EPS + 2.0 * n * EPS * EPS) * self.abs;
        EntropyValue { value: (self.sum + self.comp).max(0.0), error_bound: err }
    }
}

/// `-Σ μ(A) log2 μ(A)`.
pub fn partition_entropy(p: &Partition) -> EntropyValue {
    let mut acc = Accumulator::default();
    for m in p.measures() {
        acc.term(&m, &m);
    }
    acc.finish()
}

/// `H(p1 | p0) = -Σ μ(A∩B) log2(μ(A∩B)/μ(B))`, evaluated directly from the
/// pair measures so no cancellation occurs.
pub fn conditional_entropy(p1: &Partition, p0: &Partition) -> EntropyValue {
    let base = p0.measures();
    let mut acc = Accumulator::default();
    for (_, j, m) in pair_measures(p1, p0) {
        let ratio = &m / &base[j];
        acc.term(&m, &ratio);
    }
    acc.finish()
}

/// `H({c, c^c} | p)`.
pub fn set_conditional_entropy(c: &IntervalSet, p: &Partition) -> EntropyValue {
    let inside = p.cell_measures(c);
    let mut acc = Accumulator::default();
    for (a, cell) in inside.iter().zip(p.cells()) {
        let total = cell.measure();
        let outside = &total - a;
        if !a.is_zero() && !outside.is_zero() {
            acc.term(a, &(a / &total));
            acc.term(&outside, &(&outside / &total));
        }
    }
    acc.finish()
}

fn neg_xlogx(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// A `δ` with `δ < eps/2` and `-x log2 x < eps/4` on `(0,δ) ∪ (1-δ,1)`:
/// bisection on the smaller root of `-x log2 x = eps/4`, shrunk slightly so
/// the strict inequalities survive rounding.
pub fn lemma1_delta(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {eps} must lie in (0, 1]")));
    }
    let target = eps / 4.0;
    // -x log2 x increases on (0, 1/e)
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::E.recip());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if neg_xlogx(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut delta = (lo * (1.0 - 1e-9)).min(eps / 2.0 * (1.0 - 1e-9));
    // -x log2 x decreases on (1/e, 1), so its sup over (1-δ, 1) sits at 1-δ
    while neg_xlogx(1.0 - delta) >= target {
        delta *= 0.5;
    }
    Ok(delta)
}

/// [`lemma1_delta`] rounded down to a multiple of `2^-32`.
pub fn lemma1_delta_dyadic(eps: f64) -> Result<Rational> {
    let d = lemma1_delta(eps)?;
    let k = (d * 4294967296.0).floor() as i64;
    if k <= 0 {
        return Err(Error::OutOfRange(format!("epsilon {eps} too small for a 2^-32 grid")));
    }
    Ok(Rational::dyadic(k, 32))
}

/// Any `δ < ε·α/4` with `α` the binary entropy of `ε/4`: then `H(C|Π) < δ`
/// forces a union of cells within `ε` of `C`.
pub fn lemma2_delta(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange(format!("epsilon {eps} must lie in (0, 1]")));
    }
    let x = eps / 4.0;
    let alpha = neg_xlogx(x) + neg_xlogx(1.0 - x);
    Ok(eps * alpha / 4.0 * (1.0 - 1e-9))
}

/// Indices of the cells whose `c`-fraction lies in `[delta1, 1-delta1]`.
pub fn mixed_cells(p: &Partition, c: &IntervalSet, delta1: &Rational) -> Vec<usize> {
    let one_minus = Rational::one() - delta1;
    p.cell_measures(c)
        .iter()
        .zip(p.cells())
        .enumerate()
        .filter(|(_, (a, cell))| {
            let m = cell.measure();
            *a >= &(delta1 * &m) && *a <= &(&one_minus * &m)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Measure of the union of cells whose `c`-fraction lies in `[delta1, 1-delta1]`.
pub fn mixed_cell_mass(p: &Partition, c: &IntervalSet, delta1: &Rational) -> Rational {
    mixed_cells(p, c, delta1).into_iter().map(|i| p.cells()[i].measure()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionApprox {
    pub cells: Vec<usize>,
    pub approx: IntervalSet,
    pub err: Rational,
}

/// Union of the cells with `μ(A∩c) > threshold·μ(A)`, and its exact error.
pub fn best_union_approx(p: &Partition, c: &IntervalSet, threshold: &Rational) -> UnionApprox {
    let inside = p.cell_measures(c);
    let mut cells = Vec::new();
    let mut approx = IntervalSet::empty();
    for (i, (a, cell)) in inside.iter().zip(p.cells()).enumerate() {
        if a > &(threshold * &cell.measure()) {
            cells.push(i);
            approx = approx.union(cell);
        }
    }
    let err = approx.symmetric_difference(c).measure();
    UnionApprox { cells, approx, err }
}

#[derive(Clone, Debug)]
pub struct GreedySequence {
    pub indices: Vec<usize>,
    /// `H(C_i | Π_{i-1})` for each chosen member.
    pub steps: Vec<EntropyValue>,
    /// `H(Π_i)` for each prefix.
    pub joint: Vec<EntropyValue>,
    pub partition: Partition,
}

/// Index of the maximum, preferring the smallest index among values that
/// cannot be told apart within their error bounds.
fn argmax_with_ties(values: &[EntropyValue]) -> usize {
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if v.value > values[b].value { i } else { b });
    values
        .iter()
        .position(|v| v.upper() >= values[best].lower())
        .unwrap_or(best)
}

/// At each step picks the member with the largest `H(C | Π_{i-1})`.
pub fn greedy_family_sequence(f: &SetFamily, n: usize) -> Result<GreedySequence> {
    if n > f.horizon() {
        return Err(Error::HorizonExceeded { requested: n, horizon: f.horizon() });
    }
    let mut partition = Partition::trivial();
    let mut indices = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    let mut joint = Vec::with_capacity(n);
    for _ in 0..n {
        let scores: Vec<EntropyValue> = f
            .members()
            .par_iter()
            .map(|c| set_conditional_entropy(c, &partition))
            .collect();
        let pick = argmax_with_ties(&scores);
        indices.push(pick);
        steps.push(scores[pick]);
        partition = join_partitions(&partition, &two_set_partition(f.member(pick)));
        joint.push(partition_entropy(&partition));
    }
    let chained = EntropyValue::sum(&steps);
    if let Some(last) = joint.last() {
        if !chained.overlaps(last) {
            return Err(Error::Audit(format!(
                "chain rule violated: steps sum to {} but the join has entropy {}",
                chained.value, last.value
            )));
        }
    }
    Ok(GreedySequence { indices, steps, joint, partition })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub lower_bound: EntropyValue,
}

/// `(1/n)·H(Π_n)` along the greedy sequence for `n = 1..=n_max`.
pub fn family_entropy_profile(f: &SetFamily, n_max: usize) -> Result<Vec<ProfilePoint>> {
    let g = greedy_family_sequence(f, n_max)?;
    Ok(g.joint
        .iter()
        .enumerate()
        .map(|(i, h)| ProfilePoint { n: i + 1, lower_bound: h.div(i + 1) })
        .collect())
}

/// Coarsest dyadic partition of level `1..=ladder_max_level` under which
/// no horizon member has conditional entropy exceeding `delta` for certain.
pub fn zero_entropy_certificate(f: &SetFamily, delta: f64, ladder_max_level: u32) -> Option<Partition> {
    (1..=ladder_max_level).find_map(|level| {
        let p = Partition::dyadic(level);
        let ok = f
            .members()
            .par_iter()
            .all(|c| !set_conditional_entropy(c, &p).certainly_above(delta));
        ok.then_some(p)
    })
}

/// Largest `k ≤ k_max` such that some `k` members have a join of `2^k` cells.
pub fn vc_dual_dimension(f: &SetFamily, k_max: usize) -> usize {
    let members = f.members();
    let cap = k_max.min(members.len());
    let best = AtomicUsize::new(0);

    fn splits_all(cells: &[IntervalSet], c: &IntervalSet) -> bool {
        cells.iter().all(|a| {
            let m = a.intersection_measure(c);
            m.is_positive() && m < a.measure()
        })
    }

    fn search(members: &[IntervalSet], start: usize, cells: &[IntervalSet], depth: usize, cap: usize, best: &AtomicUsize) {
        best.fetch_max(depth, Ordering::Relaxed);
        for i in start..members.len() {
            let b = best.load(Ordering::Relaxed);
            if b >= cap || depth + (members.len() - i) <= b {
                return;
            }
            if splits_all(cells, &members[i]) {
                let next: Vec<IntervalSet> = cells
                    .iter()
                    .flat_map(|a| [a.intersect(&members[i]), a.difference(&members[i])])
                    .collect();
                search(members, i + 1, &next, depth + 1, cap, best);
            }
        }
    }

    let full = [IntervalSet::full()];
    (0..members.len()).into_par_iter().for_each(|i| {
        if best.load(Ordering::Relaxed) < cap && splits_all(&full, &members[i]) {
            let cells = [members[i].clone(), members[i].complement()];
            search(members, i + 1, &cells, 1, cap, &best);
        }
    });
    best.load(Ordering::Relaxed).min(cap)
}

/// `(1/n)·H(∨_{i<n} T^{-i} p)`.
pub fn transformation_entropy_estimate(t: &PiecewiseMap, p: &Partition, n: usize) -> Result<EntropyValue> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let mut join = p.clone();
    let mut cur = p.clone();
    for _ in 1..n {
        cur = t.preimage_partition(&cur);
        join = join_partitions(&join, &cur);
    }
    Ok(partition_entropy(&join).div(n))
}
