//! Seeded random instances for the entropy lemmas and for exact dynamics
//! identities.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::PiecewiseMap;
use crate::entropy::{
    best_union_approx, conditional_entropy, lemma1_delta, lemma2_delta, mixed_cell_mass, partition_entropy,
    set_conditional_entropy, EntropyValue,
};
use crate::error::Result;
use crate::interval_set::IntervalSet;
use crate::partition::{join_sets, two_set_partition, Partition};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub chain_sequences: usize,
    pub max_denominator: i64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, instances: 200, chain_sequences: 100, max_denominator: 1 << 10 }
    }
}

/// `k/q` for a random `q ≤ max_denominator` and `0 ≤ k ≤ q`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, max_denominator: i64) -> Rational {
    let q = rng.gen_range(1..=max_denominator);
    Rational::new(rng.gen_range(0..=q), q)
}

/// Union of up to `max_pieces` random intervals.
pub fn random_set<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, max_denominator: i64) -> IntervalSet {
    let count = rng.gen_range(1..=max_pieces);
    (0..count).fold(IntervalSet::empty(), |acc, _| {
        let (a, b) = (random_point(rng, max_denominator), random_point(rng, max_denominator));
        acc.union(&IntervalSet::interval(a.clone().min(b.clone()), a.max(b)))
    })
}

/// Random cut points, with the resulting intervals dealt into at most
/// `max_cells` cells.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, max_cells: usize, max_denominator: i64) -> Partition {
    let mut cuts: Vec<Rational> = (0..rng.gen_range(1..=2 * max_cells)).map(|_| random_point(rng, max_denominator)).collect();
    cuts.push(Rational::zero());
    cuts.push(Rational::one());
    cuts.sort();
    cuts.dedup();
    let labels = rng.gen_range(1..=max_cells);
    let mut cells = vec![IntervalSet::empty(); labels];
    for w in cuts.windows(2) {
        let i = rng.gen_range(0..labels);
        cells[i] = cells[i].union(&IntervalSet::interval(w[0].clone(), w[1].clone()));
    }
    Partition::new(cells.into_iter().filter(|c| !c.is_empty()).collect()).expect("cells tile [0,1)")
}

/// Random interval exchange with up to `max_pieces` pieces.
pub fn random_interval_exchange<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize, max_denominator: i64) -> PiecewiseMap {
    let mut cuts: Vec<Rational> = (0..rng.gen_range(1..max_pieces.max(2))).map(|_| random_point(rng, max_denominator)).collect();
    cuts.push(Rational::zero());
    cuts.push(Rational::one());
    cuts.sort();
    cuts.dedup();
    let lengths: Vec<Rational> = cuts.windows(2).map(|w| &w[1] - &w[0]).collect();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.shuffle(rng);
    PiecewiseMap::interval_exchange(&lengths, &order).expect("lengths sum to 1")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub property: &'static str,
    pub instance: usize,
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub error_bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<LemmaCheck>,
    /// Draws discarded because they missed a lemma's hypothesis.
    pub rejected: usize,
}

impl SuiteReport {
    pub fn count(&self, property: &str) -> usize {
        self.checks.iter().filter(|c| c.property == property).count()
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

const MAX_DRAWS_PER_INSTANCE: usize = 200;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Large conditional entropy forces mass in the mixed cells.
fn mixing_lemma(cfg: &SuiteConfig, checks: &mut Vec<LemmaCheck>) -> Result<usize> {
    let mut rng = rng_for(cfg.seed, 1);
    let mut rejected = 0;
    for instance in 0..cfg.instances {
        for _ in 0..MAX_DRAWS_PER_INSTANCE {
            let eps = rng.gen_range(1..=16) as f64 / 32.0;
            let p = random_partition(&mut rng, 6, cfg.max_denominator);
            let c = random_set(&mut rng, 8, cfg.max_denominator);
            if !set_conditional_entropy(&c, &p).certainly_above(eps) {
                rejected += 1;
                continue;
            }
            let delta = Rational::from_f64(lemma1_delta(eps)?).expect("finite");
            let mass = mixed_cell_mass(&p, &c, &delta);
            checks.push(LemmaCheck {
                property: "mixed_mass_exceeds_delta",
                instance,
                parameter: eps,
                lhs: mass.to_f64(),
                rhs: delta.to_f64(),
                error_bound: 0.0,
                holds: mass > delta,
            });
            break;
        }
    }
    Ok(rejected)
}

/// Small conditional entropy forces a close union of cells.
fn approximation_lemma(cfg: &SuiteConfig, checks: &mut Vec<LemmaCheck>) -> Result<usize> {
    let mut rng = rng_for(cfg.seed, 2);
    let half = Rational::new(1, 2);
    let mut rejected = 0;
    for instance in 0..cfg.instances {
        for _ in 0..MAX_DRAWS_PER_INSTANCE {
            let eps = rng.gen_range(1..=16) as f64 / 16.0;
            let p = random_partition(&mut rng, 6, cfg.max_denominator);
            // a union of cells, nudged by a short interval
            let union = p
                .cells()
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .fold(IntervalSet::empty(), |acc, cell| acc.union(cell));
            let start = random_point(&mut rng, cfg.max_denominator);
            let width = Rational::new(1, rng.gen_range(64..=cfg.max_denominator.max(64)));
            let end = (&start + &width).min(Rational::one());
            let c = union.symmetric_difference(&IntervalSet::interval(start, end));
            let delta = lemma2_delta(eps)?;
            if !set_conditional_entropy(&c, &p).certainly_below(delta) {
                rejected += 1;
                continue;
            }
            let err = best_union_approx(&p, &c, &half).err;
            let bound = Rational::from_f64(eps).expect("finite");
            checks.push(LemmaCheck {
                property: "union_approximation_within_epsilon",
                instance,
                parameter: eps,
                lhs: err.to_f64(),
                rhs: eps,
                error_bound: 0.0,
                holds: err < bound,
            });
            break;
        }
    }
    Ok(rejected)
}

/// `H(∨C_i | Π) ≤ Σ H(C_i | Π)`.
fn subadditivity(cfg: &SuiteConfig, checks: &mut Vec<LemmaCheck>) {
    let mut rng = rng_for(cfg.seed, 3);
    for instance in 0..cfg.instances {
        let p = random_partition(&mut rng, 6, cfg.max_denominator);
        let sets: Vec<IntervalSet> = (0..rng.gen_range(1..=6)).map(|_| random_set(&mut rng, 4, cfg.max_denominator)).collect();
        let joint = conditional_entropy(&join_sets(&sets), &p);
        let parts: Vec<EntropyValue> = sets.iter().map(|c| set_conditional_entropy(c, &p)).collect();
        let total = EntropyValue::sum(&parts);
        checks.push(LemmaCheck {
            property: "conditional_subadditivity",
            instance,
            parameter: sets.len() as f64,
            lhs: joint.value,
            rhs: total.value,
            error_bound: joint.error_bound + total.error_bound,
            holds: joint.lower() <= total.upper(),
        });
    }
}

/// `H(Π_n) = H(Π_1) + Σ_{i≥2} H(C_i | Π_{i-1})`.
fn chain_rule(cfg: &SuiteConfig, checks: &mut Vec<LemmaCheck>) {
    let mut rng = rng_for(cfg.seed, 4);
    for instance in 0..cfg.chain_sequences {
        let len = rng.gen_range(1..=8);
        let sets: Vec<IntervalSet> = (0..len).map(|_| random_set(&mut rng, 4, cfg.max_denominator)).collect();
        let mut terms = vec![partition_entropy(&two_set_partition(&sets[0]))];
        for i in 1..len {
            terms.push(set_conditional_entropy(&sets[i], &join_sets(&sets[..i])));
        }
        let total = EntropyValue::sum(&terms);
        let joint = partition_entropy(&join_sets(&sets));
        let error_bound = total.error_bound + joint.error_bound;
        checks.push(LemmaCheck {
            property: "chain_rule",
            instance,
            parameter: len as f64,
            lhs: joint.value,
            rhs: total.value,
            error_bound,
            holds: (joint.value - total.value).abs() <= error_bound,
        });
    }
}

/// Runs every property on its own seeded stream, so the report depends on the seed only.
pub fn lemma_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut rejected = mixing_lemma(cfg, &mut checks)?;
    rejected += approximation_lemma(cfg, &mut checks)?;
    subadditivity(cfg, &mut checks);
    chain_rule(cfg, &mut checks);
    Ok(SuiteReport { checks, rejected })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessCheck {
    pub property: &'static str,
    pub instance: usize,
    pub holds: bool,
    pub witness: Option<String>,
}

fn map_check(property: &'static str, instance: usize, a: &PiecewiseMap, b: &PiecewiseMap) -> ExactnessCheck {
    let witness = a.first_difference(b).map(|iv| iv.to_string());
    ExactnessCheck { property, instance, holds: witness.is_none(), witness }
}

fn set_check(property: &'static str, instance: usize, a: &IntervalSet, b: &IntervalSet) -> ExactnessCheck {
    let witness = a.symmetric_difference(b).pieces().first().map(|iv| iv.to_string());
    ExactnessCheck { property, instance, holds: witness.is_none(), witness }
}

/// Exact identities on random interval exchanges: image and preimage undo
/// each other, composition is associative, and conjugation commutes with
/// iteration up to `max_iterate`.
pub fn dynamics_suite(seed: u64, instances: usize, max_iterate: usize) -> Result<Vec<ExactnessCheck>> {
    let mut rng = rng_for(seed, 5);
    let mut out = Vec::new();
    for i in 0..instances {
        let t = random_interval_exchange(&mut rng, 6, 1 << 10);
        let u = random_interval_exchange(&mut rng, 6, 1 << 10);
        let v = random_interval_exchange(&mut rng, 6, 1 << 10);
        let s = random_set(&mut rng, 4, 1 << 10);
        out.push(set_check("image_of_preimage", i, &t.image_set(&t.preimage_set(&s))?, &s));
        out.push(set_check("preimage_of_image", i, &t.preimage_set(&t.image_set(&s)?), &s));
        out.push(map_check("compose_associative", i, &t.compose(&u).compose(&v), &t.compose(&u.compose(&v))));
        out.push(map_check(
            "inverse_of_composition",
            i,
            &t.compose(&u).invert()?,
            &u.invert()?.compose(&t.invert()?),
        ));
        let n = rng.gen_range(1..=max_iterate);
        let conj = t.conjugate(&u)?;
        out.push(map_check("conjugate_iterate", i, &conj.iterate(n), &t.iterate(n).conjugate(&u)?));
        out.push(set_check(
            "conjugate_iterate_on_sets",
            i,
            &conj.iterate(n).preimage_set(&s),
            &u.preimage_set(&t.iterate(n).preimage_set(&u.image_set(&s)?)),
        ));
    }
    Ok(out)
}
