//! Exact desk-scale ergodic theory on `[0,1)` with Lebesgue measure.
//!
//! Measurable sets are finite unions of rational intervals, transformations
//! are piecewise-affine measure-preserving maps, and every measure, average
//! and deviation is an exact [`Rational`]. Only entropies are floats, and
//! those carry certified error bounds.

pub mod adversary;
pub mod diagnostics;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod family;
pub mod interval_set;
pub mod lemmas;
pub mod partition;
pub mod rational;
pub mod tower;

pub use adversary::{
    bad_average_certificate, build_psi, build_s, build_tau, make_plan, openness_margin, plan_with_n, run_adversary,
    select_bad_set, verify_claim1, verify_claim2, AdversaryRun, CertificateTrace, ConstructionPlan, InequalityCheck, Relation,
};
pub use diagnostics::{
    l1_ergodic_deviation, lipschitz_uniform_bound, strong_mixing_deviation, uniform_l1_deviation,
    weak_mixing_deviation, DeviationReport, MemberId,
};
pub use dynamics::{weak_metric, GeneratingSequence, MapSpec, PartialMap, Piece, PiecewiseMap, WeakDistance};
pub use entropy::{
    best_union_approx, conditional_entropy, family_entropy_profile, greedy_family_sequence, lemma1_delta,
    lemma2_delta, mixed_cell_mass, partition_entropy, set_conditional_entropy, transformation_entropy_estimate,
    vc_dual_dimension, zero_entropy_certificate, EntropyValue,
};
pub use error::{Error, Result};
pub use family::{EntropyTag, FamilyKind, SetFamily};
pub use interval_set::{Interval, IntervalSet, SetOp};
pub use partition::{induced_partition, join_partitions, join_sets, CellTag, Partition};
pub use rational::Rational;
pub use tower::{rokhlin_tower, rokhlin_tower_of_map, validate_tower, ConjugatedOdometer, Tower, TowerReport};
