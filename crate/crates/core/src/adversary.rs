//! Perturbing a conjugated odometer so that one member of a positive-entropy
//! family has a bad ergodic average, with an exact certificate.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::diagnostics::{l1_ergodic_deviation, preimage_orbit, StepCount, DEFAULT_CELL_BUDGET};
use crate::dynamics::{weak_metric, GeneratingSequence, PartialMap, Piece, PiecewiseMap, WeakDistance};
use crate::entropy::{
    lemma1_delta_dyadic, mixed_cell_mass, mixed_cells, set_conditional_entropy, zero_entropy_certificate,
    EntropyValue,
};
use crate::error::{Error, Result};
use crate::family::SetFamily;
use crate::interval_set::IntervalSet;
use crate::partition::{induced_partition, join_partitions, join_sets, CellTag, Partition};
use crate::rational::Rational;
use crate::tower::{rokhlin_tower, ConjugatedOdometer, Tower};

/// Finest grid value tried when searching for the entropy threshold.
pub const DELTA0_GRID_DEPTH: u32 = 20;

#[derive(Clone, Debug)]
pub struct ConstructionPlan {
    pub phi: PiecewiseMap,
    pub t_phi: PiecewiseMap,
    pub resolution: u32,
    pub m: usize,
    pub n: usize,
    pub epsilon: Rational,
    pub tower: Tower,
    pub gamma0: Partition,
    pub gamma1: Partition,
    /// Cells `A_k` of the base, tagged `(0, k)`.
    pub pi0: Partition,
    /// `β_0 = 0, …, β_K = μ(D₀)`.
    pub betas: Vec<Rational>,
    /// Cells `T_φ^i A_k` in `(i, k)` order.
    pub pi1: Partition,
    /// `pi1` plus the residual, tagged `(2n, 0)`, when it is nonempty.
    pub pi1_ext: Partition,
    /// `α_i = i·μ(D₀)` for `i = 0..=2n`.
    pub alphas: Vec<Rational>,
    pub delta0: Rational,
    pub delta1: Rational,
    pub delta: Rational,
}

impl ConstructionPlan {
    pub fn height(&self) -> usize {
        2 * self.n
    }

    pub fn columns(&self) -> usize {
        self.pi0.len()
    }

    pub fn base_measure(&self) -> Rational {
        &self.alphas[1] - &self.alphas[0]
    }

    /// `T_φ^level A_column`.
    pub fn cell(&self, level: usize, column: usize) -> &IntervalSet {
        &self.pi1.cells()[level * self.columns() + column]
    }

    pub fn residual(&self) -> &IntervalSet {
        &self.tower.residual
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            resolution: self.resolution,
            m: self.m,
            n: self.n,
            height: self.height(),
            columns: self.columns(),
            epsilon: self.epsilon.clone(),
            base_measure: self.base_measure(),
            residual_measure: self.residual().measure(),
            gamma0_cells: self.gamma0.len(),
            gamma1_cells: self.gamma1.len(),
            betas: self.betas.clone(),
            delta0: self.delta0.clone(),
            delta1: self.delta1.clone(),
            delta: self.delta.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanSummary {
    pub resolution: u32,
    pub m: usize,
    pub n: usize,
    pub height: usize,
    pub columns: usize,
    pub epsilon: Rational,
    pub base_measure: Rational,
    pub residual_measure: Rational,
    pub gamma0_cells: usize,
    pub gamma1_cells: usize,
    pub betas: Vec<Rational>,
    pub delta0: Rational,
    pub delta1: Rational,
    pub delta: Rational,
}

fn check_epsilon(epsilon: &Rational) -> Result<()> {
    if !epsilon.is_positive() || epsilon > &Rational::one() {
        return Err(Error::OutOfRange(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    Ok(())
}

/// Smallest `m ≥ 1` with `2^{1-m} < ε/2`.
pub fn truncation_for(epsilon: &Rational) -> usize {
    let half = epsilon / Rational::from_integer(2);
    (1..).find(|&m| Rational::dyadic(2, m as u32) < half).expect("some truncation works")
}

/// Smallest `n ≥ max(min_n, ⌊16/ε⌋ + 1)` with `2n` a power of two.
pub fn height_for(epsilon: &Rational, min_n: usize) -> Result<usize> {
    check_epsilon(epsilon)?;
    let floor = (Rational::from_integer(16) / epsilon)
        .floor()
        .to_usize()
        .ok_or_else(|| Error::OutOfRange(format!("epsilon {epsilon} is too small")))?;
    let n0 = min_n.max(floor + 1).max(1);
    Ok((2 * n0).next_power_of_two() / 2)
}

/// Largest `δ` on the grid `1, 1/2, …, 2^-20` at which no zero-entropy
/// certificate of ladder depth `ladder` exists.
pub fn entropy_threshold(family: &SetFamily, ladder: u32) -> Result<Rational> {
    (0..=DELTA0_GRID_DEPTH)
        .map(Rational::pow2_neg)
        .find(|d| zero_entropy_certificate(family, d.to_f64(), ladder).is_none())
        .ok_or_else(|| {
            Error::ZeroEntropyFamily(format!(
                "a certificate of depth {ladder} exists at every threshold down to 2^-{DELTA0_GRID_DEPTH}"
            ))
        })
}

/// Plan with the smallest admissible `n`; the tower of height `2n` must fit in `2^R` cells.
pub fn make_plan(
    phi: &PiecewiseMap,
    family: &SetFamily,
    epsilon: &Rational,
    min_n: usize,
    resolution: u32,
) -> Result<ConstructionPlan> {
    let n = height_for(epsilon, min_n)?;
    if resolution >= 63 || (2 * n) as u64 > 1u64 << resolution {
        return Err(Error::ResolutionTooCoarse { height: 2 * n, resolution });
    }
    plan_with_n(phi, family, epsilon, n, resolution)
}

/// Plan for a given `n`; any tower height the odometer admits is accepted,
/// including lossy ones with a nonempty residual.
pub fn plan_with_n(
    phi: &PiecewiseMap,
    family: &SetFamily,
    epsilon: &Rational,
    n: usize,
    resolution: u32,
) -> Result<ConstructionPlan> {
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    let height = 2 * n;
    let odo = ConjugatedOdometer::new(resolution, phi.clone())?;
    let tower = rokhlin_tower(&odo, height)?;
    let t_phi = odo.map().clone();
    let m = truncation_for(epsilon);

    let gen = GeneratingSequence::new(m);
    let mut generators: Vec<IntervalSet> = gen.members().collect();
    generators.extend(gen.members().map(|e| phi.preimage_set(&e)));
    let gamma0 = join_sets(&generators);
    let mut gamma1 = gamma0.clone();
    let mut pulled = gamma0.clone();
    for _ in 1..height {
        pulled = t_phi.preimage_partition(&pulled);
        gamma1 = join_partitions(&gamma1, &pulled);
    }

    let pi0 = induced_partition(&gamma1, &tower.base)?;
    let columns = pi0.len();
    let mut betas = vec![Rational::zero()];
    for a in pi0.cells() {
        let next = betas.last().expect("nonempty") + a.measure();
        betas.push(next);
    }

    let mut cells = vec![IntervalSet::empty(); height * columns];
    for (k, a) in pi0.cells().iter().enumerate() {
        let mut cur = a.clone();
        for i in 0..height {
            let next = if i + 1 < height { Some(t_phi.image_set(&cur)?) } else { None };
            cells[i * columns + k] = std::mem::take(&mut cur);
            if let Some(s) = next {
                cur = s;
            }
        }
    }
    let tags: Vec<CellTag> = (0..height)
        .flat_map(|i| (0..columns).map(move |k| CellTag { level: i, column: k }))
        .collect();
    let covered = tower.residual.complement();
    let pi1 = Partition::tagged(cells.clone(), tags.clone(), &covered)?;
    let (mut ext_cells, mut ext_tags) = (cells, tags);
    if !tower.residual.is_empty() {
        ext_cells.push(tower.residual.clone());
        ext_tags.push(CellTag { level: height, column: 0 });
    }
    let pi1_ext = Partition::tagged(ext_cells, ext_tags, &IntervalSet::full())?;

    let d = tower.base.measure();
    let alphas = (0..=height).map(|i| Rational::from_integer(i as i64) * &d).collect();
    let delta0 = entropy_threshold(family, resolution)?;
    let delta1 = lemma1_delta_dyadic(delta0.to_f64())?;
    let delta = &delta1 * &delta1 * &delta1 / Rational::from_integer(64);

    Ok(ConstructionPlan {
        phi: phi.clone(),
        t_phi,
        resolution,
        m,
        n,
        epsilon: epsilon.clone(),
        tower,
        gamma0,
        gamma1,
        pi0,
        betas,
        pi1,
        pi1_ext,
        alphas,
        delta0,
        delta1,
        delta,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BadSet {
    pub index: usize,
    pub set: IntervalSet,
    pub conditional_entropy: EntropyValue,
    pub mixed_mass: Rational,
}

/// First horizon member whose conditional entropy given the extended tower
/// partition is certainly above `δ₀`.
pub fn select_bad_set(plan: &ConstructionPlan, family: &SetFamily) -> Result<BadSet> {
    let threshold = plan.delta0.to_f64();
    for (index, c) in family.members().iter().enumerate() {
        let h = set_conditional_entropy(c, &plan.pi1_ext);
        if !h.certainly_above(threshold) {
            continue;
        }
        let mixed_mass = mixed_cell_mass(&plan.pi1_ext, c, &plan.delta1);
        if mixed_mass <= plan.delta1 {
            return Err(Error::Audit(format!(
                "member {index} has conditional entropy {} but mixed mass {mixed_mass} <= {}",
                h.value, plan.delta1
            )));
        }
        return Ok(BadSet { index, set: c.clone(), conditional_entropy: h, mixed_mass });
    }
    Err(Error::NoBadSet(format!(
        "no member of {} has conditional entropy above {}",
        family,
        plan.delta0
    )))
}

/// Sends each tower cell `T_φ^i A_k` onto `[α_i+β_k, α_i+β_{k+1})` with its
/// part in `c` packed to the left, and the residual onto `[α_{2n}, 1)`.
pub fn build_psi(plan: &ConstructionPlan, c: &IntervalSet) -> Result<PiecewiseMap> {
    let mut pieces = Vec::new();
    let mut pack = |set: &IntervalSet, pos: &mut Rational| {
        for p in set.pieces() {
            pieces.push(Piece::translation(p.lo.clone(), p.hi.clone(), &*pos - &p.lo));
            *pos += p.len();
        }
    };
    for i in 0..plan.height() {
        for k in 0..plan.columns() {
            let cell = plan.cell(i, k);
            let mut pos = &plan.alphas[i] + &plan.betas[k];
            pack(&cell.intersect(c), &mut pos);
            pack(&cell.difference(c), &mut pos);
            if pos != &plan.alphas[i] + &plan.betas[k + 1] {
                return Err(Error::Audit(format!("cell ({i},{k}) does not fill its target interval")));
            }
        }
    }
    let mut pos = plan.alphas[plan.height()].clone();
    pack(plan.residual(), &mut pos);
    PiecewiseMap::new(pieces)
}

/// The tower shift conjugated into `ψ` coordinates: translation by `μ(D₀)`
/// below `α_{2n-1}`, `ψ∘T_φ∘ψ⁻¹` where `T_φ` leaves the tower, and the wrap
/// `ψ∘T_φ^{2n}∘ψ⁻¹` pushed down `2n−1` levels where `T_φ` enters the base.
pub fn build_s(plan: &ConstructionPlan, psi: &PiecewiseMap) -> Result<PiecewiseMap> {
    let h = plan.height();
    let d = plan.base_measure();
    let psi_inv = psi.invert()?;
    let shift = PartialMap::new(vec![Piece::translation(Rational::zero(), plan.alphas[h - 1].clone(), d.clone())])?;
    let exits = psi.image_set(&plan.t_phi.preimage_set(plan.residual()))?;
    let exit_part = psi.compose(&plan.t_phi.compose(&psi_inv)).restrict(&exits);
    let wraps = psi.image_set(&plan.t_phi.preimage_set(&plan.tower.base))?;
    let down = -(Rational::from_integer(h as i64 - 1) * &d);
    let wrap_part = psi
        .compose(&plan.t_phi.iterate(h).compose(&psi_inv))
        .restrict(&wraps)
        .shifted(&down);
    let s = PiecewiseMap::assemble([shift, exit_part, wrap_part])
        .map_err(|e| Error::Audit(format!("S is not a measure-preserving bijection: {e}")))?;
    if !s.is_invertible() {
        return Err(Error::Audit("S has a non-unit slope".into()));
    }
    Ok(s)
}

/// `τ = ψ` off the lower levels and `τ = S⁻¹∘τ∘T_φ` on `D_j`, built from the top down.
pub fn build_tau(plan: &ConstructionPlan, psi: &PiecewiseMap, s_map: &PiecewiseMap) -> Result<PiecewiseMap> {
    let h = plan.height();
    let s_inv = s_map.invert()?.as_partial();
    let levels = &plan.tower.levels;
    let mut cur = psi.restrict(&levels[h - 1]);
    let mut parts = vec![psi.restrict(plan.residual()), cur.clone()];
    for j in (0..h - 1).rev() {
        cur = s_inv.after(&cur.after(&plan.t_phi.restrict(&levels[j]))?)?;
        parts.push(cur.clone());
    }
    PiecewiseMap::assemble(parts).map_err(|e| Error::Audit(format!("τ levels do not tile: {e}")))
}

/// Outcome of an exact map identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapCheck {
    pub name: &'static str,
    pub holds: bool,
    pub witness: Option<String>,
}

impl MapCheck {
    fn compare(name: &'static str, lhs: &PiecewiseMap, rhs: &PiecewiseMap) -> Self {
        let witness = lhs.first_difference(rhs).map(|iv| format!("maps differ on {iv}"));
        MapCheck { name, holds: witness.is_none(), witness }
    }
}

/// `τ⁻¹∘S∘τ = T_φ`.
pub fn verify_claim1(plan: &ConstructionPlan, s_map: &PiecewiseMap, tau: &PiecewiseMap) -> Result<MapCheck> {
    Ok(MapCheck::compare("s_conjugated_by_tau_is_t_phi", &s_map.conjugate(tau)?, &plan.t_phi))
}

/// `φ∘τ⁻¹∘ψ`.
pub fn perturbed_phi(plan: &ConstructionPlan, psi: &PiecewiseMap, tau: &PiecewiseMap) -> Result<PiecewiseMap> {
    Ok(plan.phi.compose(&tau.invert()?.compose(psi)))
}

/// `ψ⁻¹∘S∘ψ` equals the odometer conjugated by `φ∘τ⁻¹∘ψ`.
pub fn verify_conjugacy_identity(
    plan: &ConstructionPlan,
    psi: &PiecewiseMap,
    s_map: &PiecewiseMap,
    tau: &PiecewiseMap,
) -> Result<MapCheck> {
    let new_phi = perturbed_phi(plan, psi, tau)?;
    let lhs = s_map.conjugate(psi)?;
    let rhs = PiecewiseMap::odometer(plan.resolution).conjugate(&new_phi)?;
    Ok(MapCheck::compare("s_psi_is_perturbed_conjugate", &lhs, &rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Lt => "<",
            Relation::Le => "<=",
        })
    }
}

/// One exact comparison `lhs relation rhs`. Aggregated checks carry the
/// index of their worst instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub index: Vec<usize>,
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
    pub holds: bool,
    /// Informational checks may fail without invalidating the certificate.
    pub required: bool,
}

impl InequalityCheck {
    pub fn new(name: &str, index: Vec<usize>, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        let holds = relation.holds(&lhs, &rhs);
        InequalityCheck { name: name.to_string(), index, lhs, relation, rhs, holds, required: true }
    }

    fn optional(mut self) -> Self {
        self.required = false;
        self
    }
}

impl fmt::Display for InequalityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}: {} {} {} [{}]", self.name, self.index, self.lhs, self.relation, self.rhs, if self.holds { "ok" } else { "FAILED" })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim2Report {
    pub distance: WeakDistance,
    pub epsilon: Rational,
    pub ok: bool,
    pub checks: Vec<InequalityCheck>,
}

impl Claim2Report {
    pub fn all_hold(&self) -> bool {
        self.ok && self.checks.iter().all(|c| c.holds || !c.required)
    }
}

fn cell_union_inside(p: &Partition, e: &IntervalSet) -> IntervalSet {
    p.cells().iter().filter(|c| c.is_subset(e)).fold(IntervalSet::empty(), |acc, c| acc.union(c))
}

/// Weak distance from `φ` to `φ∘τ⁻¹∘ψ`, plus the facts it rests on: each
/// generator is within `1/2n` of a union of tower cells, and `τ⁻¹∘ψ`, `ψ⁻¹∘τ`
/// fix every tower cell.
pub fn verify_claim2(plan: &ConstructionPlan, psi: &PiecewiseMap, tau: &PiecewiseMap) -> Result<Claim2Report> {
    let forward = tau.invert()?.compose(psi);
    let backward = psi.invert()?.compose(tau);
    let new_phi = plan.phi.compose(&forward);
    let gen = GeneratingSequence::new(plan.m);
    let distance = weak_metric(&plan.phi, &new_phi, &gen)?;
    let ok = distance.upper() < plan.epsilon;
    let gap = Rational::new(1, plan.height() as i64);
    let zero = Rational::zero();
    let mut checks = Vec::new();
    for (j, e) in gen.members().enumerate() {
        for (name, target) in [("generator", e.clone()), ("pulled_generator", plan.phi.preimage_set(&e))] {
            let f = cell_union_inside(&plan.pi1, &target);
            checks.push(InequalityCheck::new(
                &format!("{name}_cell_approximation"),
                vec![j + 1],
                f.symmetric_difference(&target).measure(),
                Relation::Lt,
                gap.clone(),
            ));
            let moved = forward.image_set(&f)?.symmetric_difference(&f).measure();
            checks.push(InequalityCheck::new(&format!("{name}_union_fixed"), vec![j + 1], moved, Relation::Eq, zero.clone()));
        }
    }
    for (map, name) in [(&forward, "tower_cells_fixed"), (&backward, "tower_cells_fixed_inverse")] {
        let mut worst = (Vec::new(), zero.clone());
        for (cell, tag) in plan.pi1.cells().iter().zip(plan.pi1.tags().expect("tagged")) {
            let moved = map.image_set(cell)?.symmetric_difference(cell).measure();
            if moved > worst.1 {
                worst = (vec![tag.level, tag.column], moved);
            }
        }
        checks.push(InequalityCheck::new(name, worst.0, worst.1, Relation::Eq, zero.clone()));
    }
    Ok(Claim2Report { distance, epsilon: plan.epsilon.clone(), ok, checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Left `δ₁`-fractions of the base cells.
    Left,
    /// Right `δ₁`-fractions of the base cells.
    Right,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateTrace {
    pub c: IntervalSet,
    pub psi: PiecewiseMap,
    pub s_map: PiecewiseMap,
    pub tau: PiecewiseMap,
    pub delta_set: IntervalSet,
    pub delta1_set: IntervalSet,
    pub delta2_set: IntervalSet,
    pub b_set: IntervalSet,
    pub r: usize,
    pub branch: Branch,
    /// Exact L¹ deviation of the `2n`-step average of `c` under `ψ⁻¹∘S∘ψ`.
    pub bad_average: Rational,
    pub metric_distance: Option<WeakDistance>,
    pub delta0: Rational,
    pub delta1: Rational,
    pub delta: Rational,
    pub accepted: bool,
    pub checks: Vec<InequalityCheck>,
}

impl CertificateTrace {
    pub fn all_required_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds || !c.required)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| c.required && !c.holds)
    }
}

/// Keeps the smallest `lhs − rhs` seen, with its index.
struct Worst {
    gap: Option<(Rational, Vec<usize>, Rational, Rational)>,
}

impl Worst {
    fn new() -> Self {
        Worst { gap: None }
    }

    fn see(&mut self, index: Vec<usize>, lhs: Rational, rhs: Rational) {
        let g = &lhs - &rhs;
        if self.gap.as_ref().is_none_or(|w| g < w.0) {
            self.gap = Some((g, index, lhs, rhs));
        }
    }

    fn check(self, name: &str, relation: Relation) -> InequalityCheck {
        let (_, index, lhs, rhs) = self.gap.unwrap_or((Rational::zero(), Vec::new(), Rational::zero(), Rational::zero()));
        InequalityCheck::new(name, index, lhs, relation, rhs)
    }
}

/// Computes the bad set's `2n`-step L¹ deviation under `S_ψ = ψ⁻¹∘S∘ψ`
/// exactly and records every intermediate inequality of the lower bound
/// `> δ₁³/64`.
pub fn bad_average_certificate(
    plan: &ConstructionPlan,
    c: &IntervalSet,
    psi: &PiecewiseMap,
    s_map: &PiecewiseMap,
    tau: &PiecewiseMap,
) -> Result<CertificateTrace> {
    let h = plan.height();
    let n = plan.n as i64;
    let hr = Rational::from_integer(h as i64);
    let d = plan.base_measure();
    let delta1 = plan.delta1.clone();
    let zero = Rational::zero();
    let psi_inv = psi.invert()?;
    let s_psi = s_map.conjugate(psi)?;

    let delta_set = mixed_cells(&plan.pi1_ext, c, &delta1)
        .into_iter()
        .fold(IntervalSet::empty(), |acc, i| acc.union(&plan.pi1_ext.cells()[i]));
    let b_set = preimage_orbit(&s_psi, &plan.tower.levels[h - 1], h)
        .iter()
        .fold(IntervalSet::empty(), |acc, s| acc.union(s));

    let mut left = Vec::new();
    let mut right = Vec::new();
    for (k, a) in plan.pi0.cells().iter().enumerate() {
        let w = &delta1 * &a.measure();
        let (lo, hi) = (&plan.betas[k], &plan.betas[k + 1]);
        left.push(psi_inv.image_set(&IntervalSet::interval(lo.clone(), lo + &w))?);
        right.push(psi_inv.image_set(&IntervalSet::interval(hi - &w, hi.clone()))?);
    }
    let union = |v: &[IntervalSet]| v.iter().fold(IntervalSet::empty(), |acc, s| acc.union(s));
    let delta1_set = union(&left);
    let delta2_set = union(&right);

    let mut checks = Vec::new();
    let mu_delta = delta_set.measure();
    let within = delta_set.intersection_measure(&b_set);
    checks.push(InequalityCheck::new("mixed_mass_exceeds_delta1", vec![], mu_delta.clone(), Relation::Gt, delta1.clone()));
    checks.push(InequalityCheck::new(
        "mixed_mass_outside_tower",
        vec![],
        &mu_delta - &within,
        Relation::Lt,
        Rational::new(1, h as i64),
    ));
    checks.push(InequalityCheck::new("left_fraction_measure", vec![], delta1_set.measure(), Relation::Eq, &delta1 * &d));
    checks.push(InequalityCheck::new("right_fraction_measure", vec![], delta2_set.measure(), Relation::Eq, &delta1 * &d));

    let c_out = c.difference(&delta_set);
    let mixed_c = c.intersect(&delta_set);
    let mixed_not_c = delta_set.difference(c);
    let mut packing = Worst::new();
    let mut packing_outside = Worst::new();
    let mut right_vanish = Worst::new();
    let mut left_vanish = Worst::new();
    let mut dominance = Worst::new();
    let mut base_fraction = Worst::new();
    let mut per_level = Worst::new();
    let mut visits_sum = Rational::zero();
    let mut base_visits_sum = Rational::zero();
    let mut signed_left = Rational::zero();
    let mut signed_right = Rational::zero();
    let per_level_bound = &delta1 * &(&delta1 - Rational::new(1, h as i64)) / &hr;

    let mut orbit_left = left.clone();
    let mut orbit_right = right.clone();
    let mut orbit_base = plan.tower.base.clone();
    for i in 0..h {
        let mut in_c = (Rational::zero(), Rational::zero());
        let mut outside = (Rational::zero(), Rational::zero());
        let mut visits = Rational::zero();
        let mut left_miss = Rational::zero();
        let mut right_hit = Rational::zero();
        for k in 0..plan.columns() {
            let (l, r) = (&orbit_left[k], &orbit_right[k]);
            let (lc, rc) = (l.intersection_measure(c), r.intersection_measure(c));
            packing.see(vec![i, k], lc.clone(), rc.clone());
            in_c.0 += lc;
            in_c.1 += rc;
            outside.0 += l.intersection_measure(&c_out);
            outside.1 += r.intersection_measure(&c_out);
            visits += l.intersection_measure(&delta_set);
            left_miss += l.intersection_measure(&mixed_not_c);
            right_hit += r.intersection_measure(&mixed_c);
        }
        packing_outside.see(vec![i], outside.0, outside.1);
        right_vanish.see(vec![i], right_hit.clone(), zero.clone());
        left_vanish.see(vec![i], left_miss.clone(), zero.clone());
        dominance.see(vec![i], &in_c.0 - &in_c.1, visits.clone());
        let base_visits = orbit_base.intersection_measure(&delta_set);
        base_fraction.see(vec![i], visits.clone(), &delta1 * &base_visits);
        per_level.see(vec![i], visits.clone(), per_level_bound.clone());
        visits_sum += &visits;
        base_visits_sum += base_visits;
        signed_left += in_c.0;
        signed_right += in_c.1;
        if i + 1 < h {
            for s in orbit_left.iter_mut().chain(orbit_right.iter_mut()) {
                *s = s_psi.image_set(s)?;
            }
            orbit_base = s_psi.image_set(&orbit_base)?;
        }
    }
    checks.push(InequalityCheck::new("base_visits_cover_tower_mixed_mass", vec![], base_visits_sum, Relation::Eq, within));
    checks.push(packing.check("left_packing", Relation::Ge));
    checks.push(packing_outside.check("left_packing_outside_mixed", Relation::Ge));
    checks.push(right_vanish.check("right_fraction_mixed_c_vanishes", Relation::Eq));
    checks.push(left_vanish.check("left_fraction_mixed_complement_vanishes", Relation::Eq));
    checks.push(dominance.check("difference_dominates_mixed_visits", Relation::Ge));
    checks.push(base_fraction.check("base_fraction_identity", Relation::Eq));
    checks.push(per_level.check("mixed_visits_per_level", Relation::Gt).optional());
    checks.push(InequalityCheck::new(
        "averaged_mixed_visits",
        vec![],
        &visits_sum / &hr,
        Relation::Gt,
        per_level_bound.clone(),
    ));
    let mu_c = c.measure();
    let signed_gap = (&signed_left - &signed_right) / &hr;
    checks.push(InequalityCheck::new("averaged_difference", vec![], signed_gap, Relation::Gt, per_level_bound.clone()));

    let steps = StepCount::new(&preimage_orbit(&s_psi, c, h), DEFAULT_CELL_BUDGET)?;
    let dev_left = steps.abs_deviation(h, &mu_c, Some(&delta1_set));
    let dev_right = steps.abs_deviation(h, &mu_c, Some(&delta2_set));
    let (branch, branch_set, branch_dev) = if dev_left >= dev_right {
        (Branch::Left, &delta1_set, dev_left)
    } else {
        (Branch::Right, &delta2_set, dev_right)
    };
    let half_bound = &per_level_bound / Rational::from_integer(2);
    checks.push(InequalityCheck::new("branch_deviation", vec![], branch_dev, Relation::Gt, half_bound));

    let lower = &delta1 * &Rational::from_integer(n) / Rational::from_integer(8);
    let upper = &delta1 * &Rational::from_integer(n) / Rational::from_integer(4);
    let r = (lower.floor() + BigInt::one())
        .to_usize()
        .filter(|&r| Rational::from_integer(r as i64) < upper && r >= 1)
        .ok_or_else(|| Error::EmptyRWindow { lower: Box::new(lower.clone()), upper: Box::new(upper.clone()) })?;
    let nr = Rational::from_integer(n);
    let mut shifted = branch_set.clone();
    let mut shifted_total = Rational::zero();
    for j in 0..r {
        let dev = steps.abs_deviation(h, &mu_c, Some(&shifted));
        let bound = &delta1 / (Rational::from_integer(4) * &nr)
            * (&delta1 - Rational::from_integer(2 * j as i64 + 1) / &nr);
        checks.push(InequalityCheck::new("shifted_branch_deviation", vec![j], dev.clone(), Relation::Gt, bound));
        shifted_total += dev;
        shifted = s_psi.image_set(&shifted)?;
    }
    let rate = Rational::from_integer(r as i64) * &delta1 * &delta1 / (Rational::from_integer(8) * &nr);
    checks.push(InequalityCheck::new("shifted_total", vec![], shifted_total, Relation::Gt, rate.clone()));
    checks.push(InequalityCheck::new("rate_exceeds_delta", vec![], rate, Relation::Gt, plan.delta.clone()));
    let bad_average = steps.abs_deviation(h, &mu_c, None);
    checks.push(InequalityCheck::new("deviation_exceeds_delta", vec![], bad_average.clone(), Relation::Gt, plan.delta.clone()));

    Ok(CertificateTrace {
        c: c.clone(),
        psi: psi.clone(),
        s_map: s_map.clone(),
        tau: tau.clone(),
        delta_set,
        delta1_set,
        delta2_set,
        b_set,
        r,
        branch,
        accepted: bad_average > plan.delta,
        bad_average,
        metric_distance: None,
        delta0: plan.delta0.clone(),
        delta1,
        delta: plan.delta.clone(),
        checks,
    })
}

/// Greedy decomposition of `[lo, hi)` into maximal aligned dyadic blocks of
/// level at least 1, as `(level, k)`.
fn dyadic_blocks(lo: &Rational, hi: &Rational) -> Result<Vec<(u32, BigInt)>> {
    let mut out = Vec::new();
    let mut a = lo.clone();
    while &a < hi {
        let non_dyadic = || Error::NonDyadic(format!("{lo}..{hi}"));
        let ea = a.dyadic_exponent().ok_or_else(non_dyadic)? as i64;
        let len = hi - &a;
        let el = len.dyadic_exponent().ok_or_else(non_dyadic)? as i64;
        let fits = el - (len.numer().bits() as i64 - 1);
        let level = ea.max(fits).max(1) as u32;
        let k = (&a / Rational::pow2_neg(level)).numer();
        out.push((level, k));
        a += Rational::pow2_neg(level);
    }
    Ok(out)
}

/// Largest generating-sequence index a margin computation accepts.
const MAX_BLOCK_INDEX: u64 = 1 << 16;

/// `Σ 2^{index}` over the maximal dyadic blocks of `x`: if two invertible
/// maps are within weak distance `d`, their images of `x` differ by at most
/// this times `d`, and so do their preimages.
pub fn dyadic_weight(x: &IntervalSet) -> Result<Rational> {
    let mut total = Rational::zero();
    for p in x.pieces() {
        for (level, k) in dyadic_blocks(&p.lo, &p.hi)? {
            let index = (BigInt::one() << level) - BigInt::one() + k;
            let index = index
                .to_u64()
                .filter(|&i| i <= MAX_BLOCK_INDEX)
                .ok_or_else(|| Error::OutOfRange(format!("dyadic block at level {level} is too fine")))?;
            total += Rational::pow2_neg(index as u32).recip();
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpennessMargin {
    /// Any invertible `φ'` within weak distance `epsilon` of `φ` keeps the deviation above `delta`.
    pub epsilon: Rational,
    pub deviation: Rational,
    pub delta: Rational,
    pub weight: Rational,
}

/// Radius of a weak-topology ball around `φ` on which the `n`-step L¹
/// deviation of `c` under the conjugated odometer stays above `delta`.
pub fn openness_margin(t: &ConjugatedOdometer, c: &IntervalSet, n: usize, delta: &Rational) -> Result<OpennessMargin> {
    let deviation = l1_ergodic_deviation(t.map(), c, n)?;
    if &deviation <= delta {
        return Err(Error::NoMargin { deviation: Box::new(deviation), delta: Box::new(delta.clone()) });
    }
    let moved = t.phi().image_set(c)?;
    let base = t.base_odometer();
    let mut worst = Rational::zero();
    for x in preimage_orbit(&base, &moved, n) {
        worst = worst.max(dyadic_weight(&x)?);
    }
    let weight = dyadic_weight(c)? + worst;
    let epsilon = (&deviation - delta) / &weight;
    Ok(OpennessMargin { epsilon, deviation, delta: delta.clone(), weight })
}

/// Swaps `[x, x+η)` and `[x+η, x+2η)`.
pub fn swap_perturbation(x: &Rational, eta: &Rational) -> Result<PiecewiseMap> {
    let (a, b, c) = (x.clone(), x + eta, x + &(eta + eta));
    let pieces = vec![
        Piece::translation(Rational::zero(), a.clone(), Rational::zero()),
        Piece::translation(a, b.clone(), eta.clone()),
        Piece::translation(b, c.clone(), -eta.clone()),
        Piece::translation(c, Rational::one(), Rational::zero()),
    ];
    PiecewiseMap::new(pieces.into_iter().filter(|p| p.lo < p.hi).collect())
}

/// Largest power of two not exceeding `x`, for `0 < x`.
pub fn dyadic_floor(x: &Rational) -> Rational {
    let mut level: i64 = 0;
    let mut p = Rational::one();
    while &p > x {
        level += 1;
        p = Rational::pow2_neg(level as u32);
    }
    while &(&p + &p) <= x {
        p = &p + &p;
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PerturbationTrial {
    pub swap_at: Rational,
    pub swap_length: Rational,
    pub distance: WeakDistance,
    pub within_margin: bool,
    pub deviation: Rational,
    pub keeps_deviation: bool,
}

impl PerturbationTrial {
    pub fn holds(&self) -> bool {
        self.within_margin && self.keeps_deviation
    }
}

/// Perturbs `phi` by a swap of two adjacent intervals of length the largest
/// power of two at most `margin/16`, placed at a random multiple of `2^-60`,
/// then measures the weak distance (with tail at most `margin/4`) and the
/// `n`-step deviation of `c` under the odometer conjugated by the result.
pub fn perturbation_trial<R: Rng + ?Sized>(
    rng: &mut R,
    phi: &PiecewiseMap,
    resolution: u32,
    c: &IntervalSet,
    n: usize,
    delta: &Rational,
    margin: &Rational,
) -> Result<PerturbationTrial> {
    let eta = dyadic_floor(&(margin / Rational::from_integer(16)));
    let k: i64 = rng.gen_range(0..(1i64 << 60) - 2);
    let x = Rational::dyadic(k, 60);
    let perturbed = swap_perturbation(&x, &eta)?.compose(phi);
    let tail = dyadic_floor(&(margin / Rational::from_integer(4)));
    let m = tail.dyadic_exponent().expect("power of two") as usize + 1;
    let distance = weak_metric(phi, &perturbed, &GeneratingSequence::new(m))?;
    let within_margin = &distance.upper() < margin;
    let t = PiecewiseMap::odometer(resolution).conjugate(&perturbed)?;
    let deviation = l1_ergodic_deviation(&t, c, n)?;
    Ok(PerturbationTrial {
        swap_at: x,
        swap_length: eta,
        distance,
        within_margin,
        keeps_deviation: &deviation > delta,
        deviation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryRun {
    #[serde(skip)]
    pub plan: ConstructionPlan,
    pub summary: PlanSummary,
    pub bad_set: BadSet,
    pub claim1: MapCheck,
    pub conjugacy: MapCheck,
    pub claim2: Claim2Report,
    pub trace: CertificateTrace,
    pub new_phi: PiecewiseMap,
    /// Values of `n` abandoned because no integer `r` fit the window.
    pub retried: Vec<usize>,
}

impl AdversaryRun {
    pub fn all_ok(&self) -> bool {
        self.claim1.holds
            && self.conjugacy.holds
            && self.claim2.all_hold()
            && self.trace.accepted
            && self.trace.all_required_hold()
    }
}

/// Builds and certifies the construction for an explicit plan.
pub fn run_plan(plan: ConstructionPlan, family: &SetFamily) -> Result<AdversaryRun> {
    let bad_set = select_bad_set(&plan, family)?;
    let psi = build_psi(&plan, &bad_set.set)?;
    let s_map = build_s(&plan, &psi)?;
    let tau = build_tau(&plan, &psi, &s_map)?;
    let claim1 = verify_claim1(&plan, &s_map, &tau)?;
    let conjugacy = verify_conjugacy_identity(&plan, &psi, &s_map, &tau)?;
    let claim2 = verify_claim2(&plan, &psi, &tau)?;
    let mut trace = bad_average_certificate(&plan, &bad_set.set, &psi, &s_map, &tau)?;
    trace.metric_distance = Some(claim2.distance.clone());
    let new_phi = perturbed_phi(&plan, &psi, &tau)?;
    Ok(AdversaryRun { summary: plan.summary(), plan, bad_set, claim1, conjugacy, claim2, trace, new_phi, retried: Vec::new() })
}

/// Runs the construction, doubling `n` while the `r` window is empty. With
/// no resolution given, each attempt uses the smallest one that fits the tower.
pub fn run_adversary(
    phi: &PiecewiseMap,
    family: &SetFamily,
    epsilon: &Rational,
    min_n: usize,
    resolution: Option<u32>,
) -> Result<AdversaryRun> {
    let mut min_n = min_n;
    let mut retried = Vec::new();
    loop {
        let n = height_for(epsilon, min_n)?;
        let r = resolution.unwrap_or((2 * n).trailing_zeros());
        let plan = make_plan(phi, family, epsilon, n, r)?;
        match run_plan(plan, family) {
            Err(Error::EmptyRWindow { .. }) if n < 1 << 19 => {
                retried.push(n);
                min_n = 2 * n;
            }
            Err(e) => return Err(e),
            Ok(mut run) => {
                run.retried = retried;
                return Ok(run);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plan_arithmetic() {
        assert_eq!(height_for(&q(1, 4), 1).unwrap(), 128);
        assert_eq!(height_for(&q(1, 4), 129).unwrap(), 256);
        assert_eq!(height_for(&q(1, 1), 1).unwrap(), 32);
        assert_eq!(truncation_for(&q(1, 1)), 3);
        assert_eq!(truncation_for(&q(1, 4)), 5);
        for eps in [q(1, 1), q(1, 3), q(1, 4), q(1, 10)] {
            let m = truncation_for(&eps);
            let half = &eps / q(2, 1);
            assert!(Rational::dyadic(2, m as u32) < half);
            assert!(m == 1 || Rational::dyadic(2, m as u32 - 1) >= half);
            let n = height_for(&eps, 1).unwrap();
            assert!(q(16, n as i64) < eps);
            assert!((2 * n).is_power_of_two());
        }
        let f = SetFamily::digit_sets(16);
        assert!(matches!(
            make_plan(&PiecewiseMap::identity(), &f, &q(1, 4), 1, 7),
            Err(Error::ResolutionTooCoarse { height: 256, resolution: 7 })
        ));
    }

    #[test]
    fn plan_for_digit_sets() {
        let f = SetFamily::digit_sets(16);
        let plan = make_plan(&PiecewiseMap::identity(), &f, &q(1, 4), 1, 8).unwrap();
        assert_eq!((plan.n, plan.m, plan.height()), (128, 5, 256));
        assert_eq!(plan.betas.last().unwrap(), &plan.tower.base.measure());
        assert!(plan.betas.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(plan.delta0, q(1, 2));
        assert_eq!(plan.delta, &plan.delta1 * &plan.delta1 * &plan.delta1 / q(64, 1));
        assert!(plan.alphas.windows(2).all(|w| &w[1] - &w[0] == plan.base_measure()));
        // the odometer only moves digits below the top one, so Γ₁ stays at level 2
        assert_eq!(plan.gamma1.len(), 4);
        let bad = select_bad_set(&plan, &f).unwrap();
        assert_eq!(bad.index, 8);
        assert!(bad.conditional_entropy.certainly_above(0.5));
        assert!(matches!(
            select_bad_set(&plan, &SetFamily::dyadic_intervals(3)),
            Err(Error::NoBadSet(_))
        ));
    }

    #[test]
    fn zero_entropy_family_has_no_threshold() {
        assert!(matches!(entropy_threshold(&SetFamily::dyadic_intervals(3), 4), Err(Error::ZeroEntropyFamily(_))));
    }

    fn check_construction(plan: &ConstructionPlan, c: &IntervalSet) -> (PiecewiseMap, PiecewiseMap, PiecewiseMap) {
        let psi = build_psi(plan, c).unwrap();
        for i in 0..plan.height() {
            for k in 0..plan.columns() {
                let cell = plan.cell(i, k);
                let start = &plan.alphas[i] + &plan.betas[k];
                let target = IntervalSet::interval(start.clone(), &plan.alphas[i] + &plan.betas[k + 1]);
                assert_eq!(psi.image_set(cell).unwrap(), target);
                let inside = cell.intersection_measure(c);
                let packed = psi.image_set(&cell.intersect(c)).unwrap();
                assert_eq!(packed, IntervalSet::interval(start.clone(), &start + &inside));
            }
        }
        let s = build_s(plan, &psi).unwrap();
        let h = plan.height();
        let below = IntervalSet::interval(Rational::zero(), plan.alphas[h - 1].clone());
        for p in s.restrict(&below).pieces() {
            assert_eq!(p.offset, plan.base_measure());
        }
        let tau = build_tau(plan, &psi, &s).unwrap();
        assert_eq!(tau.restrict(plan.residual()), psi.restrict(plan.residual()));
        if h >= 2 {
            let level = &plan.tower.levels[h - 2];
            let expect = s.invert().unwrap().compose(&psi.compose(&plan.t_phi)).restrict(level);
            assert_eq!(tau.restrict(level), expect);
        }
        assert!(verify_claim1(plan, &s, &tau).unwrap().holds);
        assert!(verify_conjugacy_identity(plan, &psi, &s, &tau).unwrap().holds);
        (psi, s, tau)
    }

    #[test]
    fn small_construction_checks() {
        let f = SetFamily::digit_sets(8);
        let plan = plan_with_n(&PiecewiseMap::identity(), &f, &q(1, 1), 4, 3).unwrap();
        let bad = select_bad_set(&plan, &f).unwrap();
        assert_eq!(bad.index, 3);
        let (psi, _, tau) = check_construction(&plan, &bad.set);
        let claim2 = verify_claim2(&plan, &psi, &tau).unwrap();
        assert!(claim2.checks.iter().all(|c| c.holds), "{:?}", claim2.checks);
    }

    #[test]
    fn claim1_detects_tampering() {
        let f = SetFamily::digit_sets(8);
        let plan = plan_with_n(&PiecewiseMap::identity(), &f, &q(1, 1), 4, 3).unwrap();
        let bad = select_bad_set(&plan, &f).unwrap();
        let psi = build_psi(&plan, &bad.set).unwrap();
        let s = build_s(&plan, &psi).unwrap();
        let tau = build_tau(&plan, &psi, &s).unwrap();
        let tampered = swap_perturbation(&q(0, 1), &q(1, 32)).unwrap().compose(&tau);
        let check = verify_claim1(&plan, &s, &tampered).unwrap();
        assert!(!check.holds);
        assert!(check.witness.unwrap().starts_with("maps differ on"));
    }

    #[test]
    fn conjugated_phi_construction() {
        let phi = PiecewiseMap::interval_exchange(&[q(1, 4), q(1, 4), q(1, 2)], &[1, 2, 0]).unwrap();
        let f = SetFamily::digit_sets(8);
        let plan = plan_with_n(&phi, &f, &q(1, 1), 4, 4).unwrap();
        let bad = select_bad_set(&plan, &f).unwrap();
        let (psi, _, tau) = check_construction(&plan, &bad.set);
        let claim2 = verify_claim2(&plan, &psi, &tau).unwrap();
        assert!(claim2.checks.iter().all(|c| c.holds), "{:?}", claim2.checks);
    }

    #[test]
    fn lossy_tower_construction() {
        let f = SetFamily::digit_sets(12);
        let plan = plan_with_n(&PiecewiseMap::identity(), &f, &q(1, 1), 24, 10).unwrap();
        assert_eq!(plan.residual().measure(), q(16, 1024));
        assert_eq!(plan.pi1_ext.len(), plan.pi1.len() + 1);
        let bad = select_bad_set(&plan, &f).unwrap();
        let (psi, s, tau) = check_construction(&plan, &bad.set);
        let claim2 = verify_claim2(&plan, &psi, &tau).unwrap();
        assert!(claim2.checks.iter().all(|c| c.holds), "{:?}", claim2.checks);
        assert!(matches!(
            bad_average_certificate(&plan, &bad.set, &psi, &s, &tau),
            Err(Error::EmptyRWindow { .. })
        ));
    }

    #[test]
    fn dyadic_weights() {
        assert_eq!(dyadic_weight(&IntervalSet::dyadic(1, 0)).unwrap(), q(2, 1));
        assert_eq!(dyadic_weight(&IntervalSet::full()).unwrap(), q(2 + 4, 1));
        assert_eq!(dyadic_weight(&IntervalSet::dyadic(2, 1)).unwrap(), q(16, 1));
        // [1/4, 1) = [1/4,1/2) ∪ [1/2,1), indices 4 and 2
        let x = IntervalSet::interval(q(1, 4), q(1, 1));
        assert_eq!(dyadic_weight(&x).unwrap(), q(16 + 4, 1));
        assert!(matches!(dyadic_weight(&IntervalSet::interval(q(0, 1), q(1, 3))), Err(Error::NonDyadic(_))));
        assert_eq!(dyadic_floor(&q(1, 3)), q(1, 4));
        assert_eq!(dyadic_floor(&q(1, 4)), q(1, 4));
        assert_eq!(dyadic_floor(&q(5, 1)), q(4, 1));
    }

    #[test]
    fn weight_bounds_image_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let phi = PiecewiseMap::interval_exchange(&[q(1, 8), q(3, 8), q(1, 2)], &[2, 0, 1]).unwrap();
        for _ in 0..20 {
            let x = Rational::dyadic(rng.gen_range(0..1 << 20), 20);
            let swap = swap_perturbation(&x, &q(1, 1 << 22)).unwrap();
            let other = swap.compose(&phi);
            let d = weak_metric(&phi, &other, &GeneratingSequence::new(20)).unwrap();
            let x = IntervalSet::interval(q(1, 8), q(5, 8));
            let fwd = phi.image_set(&x).unwrap().symmetric_difference(&other.image_set(&x).unwrap()).measure();
            assert!(fwd <= dyadic_weight(&x).unwrap() * d.upper());
        }
    }

    #[test]
    fn margin_requires_a_gap() {
        let t = ConjugatedOdometer::plain(3).unwrap();
        let c = IntervalSet::dyadic(1, 0);
        assert!(matches!(openness_margin(&t, &c, 2, &q(0, 1)), Err(Error::NoMargin { .. })));
        let m = openness_margin(&t, &c, 1, &q(1, 4)).unwrap();
        assert_eq!(m.deviation, q(1, 2));
        assert_eq!(m.epsilon, q(1, 4) / m.weight.clone());
        assert!(m.epsilon.is_positive());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let trial = perturbation_trial(&mut rng, &PiecewiseMap::identity(), 3, &c, 1, &q(1, 4), &m.epsilon).unwrap();
            assert!(trial.holds(), "{trial:?}");
        }
    }
}
