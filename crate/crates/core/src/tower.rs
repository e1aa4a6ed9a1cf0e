//! Rokhlin towers for odometers and their conjugates.

use serde::Serialize;

use crate::dynamics::PiecewiseMap;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::rational::Rational;

/// `T_φ = φ⁻¹ ∘ T ∘ φ` for the truncated odometer `T` at resolution `R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugatedOdometer {
    resolution: u32,
    phi: PiecewiseMap,
    phi_inv: PiecewiseMap,
    map: PiecewiseMap,
}

impl ConjugatedOdometer {
    pub fn new(resolution: u32, phi: PiecewiseMap) -> Result<Self> {
        if resolution == 0 || resolution > 40 {
            return Err(Error::OutOfRange(format!("resolution {resolution}")));
        }
        let phi_inv = phi.invert()?;
        let map = PiecewiseMap::odometer(resolution).conjugate(&phi)?;
        Ok(ConjugatedOdometer { resolution, phi, phi_inv, map })
    }

    pub fn plain(resolution: u32) -> Result<Self> {
        Self::new(resolution, PiecewiseMap::identity())
    }

    /// Recognizes a bare odometer.
    pub fn detect(t: &PiecewiseMap) -> Option<Self> {
        let r = u32::try_from(t.pieces().len().checked_sub(1)?).ok()?;
        if (1..=40).contains(&r) && *t == PiecewiseMap::odometer(r) {
            Self::plain(r).ok()
        } else {
            None
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn phi(&self) -> &PiecewiseMap {
        &self.phi
    }

    pub fn phi_inv(&self) -> &PiecewiseMap {
        &self.phi_inv
    }

    pub fn map(&self) -> &PiecewiseMap {
        &self.map
    }

    pub fn base_odometer(&self) -> PiecewiseMap {
        PiecewiseMap::odometer(self.resolution)
    }

    /// Deviation of `n` iterates of the truncated map from the full odometer.
    pub fn truncation_error(&self, n: usize) -> Rational {
        Rational::from_integer(n as i64) * Rational::pow2_neg(self.resolution)
    }
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub base: IntervalSet,
    pub height: usize,
    pub levels: Vec<IntervalSet>,
    pub residual: IntervalSet,
    pub map: PiecewiseMap,
}

/// Base of height `h` for the bare odometer: the first `q` bottom cells of
/// each run of `h` consecutive level-`k` column cells.
fn odometer_base(resolution: u32, height: usize) -> Result<IntervalSet> {
    if height == 0 {
        return Err(Error::Tower("height must be positive".into()));
    }
    if height as u128 > 1u128 << resolution {
        return Err(Error::ResolutionTooCoarse { height, resolution });
    }
    if height.is_power_of_two() {
        return Ok(IntervalSet::interval(Rational::zero(), Rational::pow2_neg(height.trailing_zeros())));
    }
    let t = PiecewiseMap::odometer(resolution);
    let cells = 1u64 << resolution;
    let q = cells / height as u64;
    let mut cell = IntervalSet::interval(Rational::zero(), Rational::pow2_neg(resolution));
    let mut base = IntervalSet::empty();
    for step in 0..q * height as u64 {
        if step % height as u64 == 0 {
            base = base.union(&cell);
        }
        cell = t.image_set(&cell)?;
    }
    Ok(base)
}

/// Tower of the given height for `T_φ`; the base is `φ⁻¹` of the odometer base.
pub fn rokhlin_tower(t: &ConjugatedOdometer, height: usize) -> Result<Tower> {
    let base = t.phi().preimage_set(&odometer_base(t.resolution(), height)?);
    let mut levels = Vec::with_capacity(height);
    let mut cur = base.clone();
    for _ in 0..height {
        let next = t.map().image_set(&cur)?;
        levels.push(std::mem::replace(&mut cur, next));
    }
    let covered = levels.iter().fold(IntervalSet::empty(), |acc, l| acc.union(l));
    let tower = Tower { base, height, residual: covered.complement(), levels, map: t.map().clone() };
    let report = validate_tower(&tower);
    if let Some(failed) = report.checks.iter().find(|c| !c.passed) {
        return Err(Error::Tower(format!(
            "{} failed: {}",
            failed.name,
            failed.witness.as_deref().unwrap_or("no witness")
        )));
    }
    Ok(tower)
}

/// Tower for a map that must be a bare odometer.
pub fn rokhlin_tower_of_map(t: &PiecewiseMap, height: usize) -> Result<Tower> {
    let odo = ConjugatedOdometer::detect(t)
        .ok_or_else(|| Error::Tower("map is not an odometer; pass its conjugator explicitly".into()))?;
    rokhlin_tower(&odo, height)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerCheck {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    pub checks: Vec<TowerCheck>,
    pub residual_measure: Rational,
    pub residual_bound: Rational,
}

impl TowerReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&TowerCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn first_piece(s: &IntervalSet) -> Option<String> {
    s.pieces().first().map(|p| p.to_string())
}

pub fn validate_tower(tw: &Tower) -> TowerReport {
    let mut checks = Vec::new();

    let mut consistency = None;
    if tw.levels.len() != tw.height {
        consistency = Some(format!("{} levels for height {}", tw.levels.len(), tw.height));
    } else if let Some(first) = tw.levels.first() {
        if first != &tw.base {
            consistency = Some(format!("level 0: {}", first_piece(&first.symmetric_difference(&tw.base)).unwrap_or_default()));
        }
        for i in 1..tw.levels.len() {
            if consistency.is_some() {
                break;
            }
            let expected = match tw.map.image_set(&tw.levels[i - 1]) {
                Ok(s) => s,
                Err(e) => {
                    consistency = Some(e.to_string());
                    break;
                }
            };
            if expected != tw.levels[i] {
                let diff = expected.symmetric_difference(&tw.levels[i]);
                consistency = Some(format!("level {i}: {}", first_piece(&diff).unwrap_or_default()));
            }
        }
    }
    checks.push(TowerCheck { name: "level_consistency", passed: consistency.is_none(), witness: consistency });

    let base_measure = tw.base.measure();
    let uneven = tw.levels.iter().position(|l| l.measure() != base_measure);
    checks.push(TowerCheck {
        name: "equal_measures",
        passed: uneven.is_none(),
        witness: uneven.map(|i| format!("level {i} has measure {}", tw.levels[i].measure())),
    });

    let mut labeled: Vec<(&crate::interval_set::Interval, usize)> = tw
        .levels
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.pieces().iter().map(move |p| (p, i)))
        .collect();
    labeled.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
    let overlap = labeled.windows(2).find(|w| w[0].0.hi > w[1].0.lo).map(|w| {
        let lo = w[1].0.lo.clone();
        let hi = w[0].0.hi.clone().min(w[1].0.hi.clone());
        format!("levels {} and {} share {lo}..{hi}", w[0].1, w[1].1)
    });
    checks.push(TowerCheck { name: "disjoint_levels", passed: overlap.is_none(), witness: overlap });

    let covered = tw.levels.iter().fold(IntervalSet::empty(), |acc, l| acc.union(l));
    let expected_residual = covered.complement();
    let residual_ok = expected_residual == tw.residual;
    checks.push(TowerCheck {
        name: "residual_is_complement",
        passed: residual_ok,
        witness: (!residual_ok).then(|| first_piece(&expected_residual.symmetric_difference(&tw.residual)).unwrap_or_default()),
    });

    let residual_measure = tw.residual.measure();
    let residual_bound = Rational::new(1, tw.height.max(1) as i64);
    let small = residual_measure < residual_bound;
    checks.push(TowerCheck {
        name: "residual_bound",
        passed: small,
        witness: (!small).then(|| format!("residual {residual_measure} >= {residual_bound}")),
    });

    TowerReport { checks, residual_measure, residual_bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(a: i64, b: i64, c: i64, d: i64) -> IntervalSet {
        IntervalSet::interval(q(a, b), q(c, d))
    }

    /// Orbit of the base under repeated point evaluation of the left endpoint.
    fn brute_orbit(t: &PiecewiseMap, width: Rational, h: usize) -> Vec<IntervalSet> {
        let mut x = Rational::zero();
        (0..h)
            .map(|_| {
                let s = IntervalSet::interval(x.clone(), &x + &width);
                x = t.apply_point(&x);
                s
            })
            .collect()
    }

    #[test]
    fn odometer_towers() {
        let tw = rokhlin_tower_of_map(&PiecewiseMap::odometer(2), 4).unwrap();
        assert_eq!(tw.base, iv(0, 1, 1, 4));
        assert_eq!(tw.levels, vec![iv(0, 1, 1, 4), iv(1, 2, 3, 4), iv(1, 4, 1, 2), iv(3, 4, 1, 1)]);
        assert!(tw.residual.is_empty());
        let t3 = PiecewiseMap::odometer(3);
        let tw = rokhlin_tower_of_map(&t3, 8).unwrap();
        assert_eq!(tw.levels, brute_orbit(&t3, q(1, 8), 8));
        assert!(tw.residual.is_empty());
        let tw = rokhlin_tower_of_map(&PiecewiseMap::odometer(1), 2).unwrap();
        assert_eq!(tw.levels, vec![iv(0, 1, 1, 2), iv(1, 2, 1, 1)]);
    }

    #[test]
    fn zero_residual_for_powers_of_two() {
        for r in 1..=6u32 {
            let t = PiecewiseMap::odometer(r);
            for k in 0..=r {
                let tw = rokhlin_tower_of_map(&t, 1 << k).unwrap();
                assert!(tw.residual.is_empty());
                assert!(validate_tower(&tw).all_passed());
            }
        }
    }

    #[test]
    fn validation_reports() {
        let tw = rokhlin_tower_of_map(&PiecewiseMap::odometer(2), 4).unwrap();
        let report = validate_tower(&tw);
        assert!(report.all_passed());
        assert_eq!(report.residual_measure, q(0, 1));

        let mut bad = tw.clone();
        bad.levels[1] = iv(1, 4, 1, 2);
        let report = validate_tower(&bad);
        let c = report.check("level_consistency").unwrap();
        assert!(!c.passed);
        assert!(c.witness.as_deref().unwrap().starts_with("level 1"));

        let t3 = rokhlin_tower_of_map(&PiecewiseMap::odometer(2), 3).unwrap();
        let report = validate_tower(&t3);
        assert_eq!(report.residual_measure, q(1, 4));
        assert_eq!(report.residual_bound, q(1, 3));
        assert!(report.check("residual_bound").unwrap().passed);
        assert_eq!(t3.base, iv(0, 1, 1, 4));
    }

    #[test]
    fn lossy_heights() {
        let t = PiecewiseMap::odometer(5);
        let tw = rokhlin_tower_of_map(&t, 6).unwrap();
        // 32 = 5·6 + 2 column cells, so two cells are left over
        assert_eq!(tw.residual.measure(), q(2, 32));
        assert_eq!(tw.base.measure(), q(5, 32));
        assert!(matches!(rokhlin_tower_of_map(&t, 64), Err(Error::ResolutionTooCoarse { .. })));
        assert!(rokhlin_tower_of_map(&PiecewiseMap::doubling(), 2).is_err());
        // 16 = 1·9 + 7 leaves 7/16 of the space outside the tower
        assert!(rokhlin_tower_of_map(&PiecewiseMap::odometer(4), 9).is_err());
    }

    #[test]
    fn conjugated_tower_is_conjugated() {
        let phi = PiecewiseMap::interval_exchange(&[q(1, 3), q(1, 6), q(1, 2)], &[2, 0, 1]).unwrap();
        let co = ConjugatedOdometer::new(3, phi.clone()).unwrap();
        let plain = rokhlin_tower_of_map(&PiecewiseMap::odometer(3), 8).unwrap();
        let tw = rokhlin_tower(&co, 8).unwrap();
        for (a, b) in tw.levels.iter().zip(&plain.levels) {
            assert_eq!(a, &phi.preimage_set(b));
        }
        assert!(validate_tower(&tw).all_passed());
        assert_eq!(co.truncation_error(16), q(2, 1));
    }
}
