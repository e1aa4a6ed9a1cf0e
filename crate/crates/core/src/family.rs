//! Enumerable families of measurable sets.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{GeneratingSequence, MapSpec};
use crate::error::{Error, Result};
use crate::interval_set::{Interval, IntervalSet};
use crate::partition::split_bracketed_list;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Explicit(Vec<IntervalSet>),
    /// Dyadic intervals of levels `1..=max_level`, level by level.
    DyadicIntervals { max_level: u32 },
    /// Member `i` is `{x : binary digit i+1 of x is 1}`.
    DigitSets { max_index: u32 },
    /// Member `i` is `T^{-i}(seed)`.
    Orbit { map: MapSpec, seed: IntervalSet, horizon: usize },
    /// Distinct unions of at most `max_terms` base sets.
    UnionsClosure { base: Vec<IntervalSet>, max_terms: usize },
}

/// What is known analytically about the entropy of the infinite family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyTag {
    Zero,
    PositiveBits(f64),
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SetFamily {
    kind: FamilyKind,
    members: Vec<IntervalSet>,
}

impl PartialEq for SetFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// `{x : binary digit `digit` of x is 1}`, digits counted from 1.
pub fn digit_set(digit: u32) -> IntervalSet {
    assert!((1..=40).contains(&digit), "digit index out of range");
    let width = Rational::pow2_neg(digit);
    let pieces = (0..1u64 << (digit - 1)).map(|j| {
        let lo = Rational::dyadic(2 * j as i64 + 1, digit);
        let hi = &lo + &width;
        Interval::new(lo, hi)
    });
    IntervalSet::normalize_vec(pieces.collect())
}

impl SetFamily {
    pub fn from_kind(kind: FamilyKind) -> Result<Self> {
        let members = match &kind {
            FamilyKind::Explicit(sets) => {
                if sets.is_empty() {
                    return Err(Error::Parse("explicit family needs at least one set".into()));
                }
                sets.clone()
            }
            FamilyKind::DyadicIntervals { max_level } => {
                if *max_level == 0 || *max_level > 24 {
                    return Err(Error::OutOfRange(format!("max_level {max_level}")));
                }
                let count = (1usize << (max_level + 1)) - 2;
                (1..=count).map(GeneratingSequence::member).collect()
            }
            FamilyKind::DigitSets { max_index } => {
                if *max_index == 0 || *max_index > 24 {
                    return Err(Error::OutOfRange(format!("max_index {max_index}")));
                }
                (1..=*max_index).map(digit_set).collect()
            }
            FamilyKind::Orbit { map, seed, horizon } => {
                if *horizon == 0 {
                    return Err(Error::OutOfRange("orbit horizon must be positive".into()));
                }
                let t = map.build()?;
                let mut out = Vec::with_capacity(*horizon);
                let mut cur = seed.clone();
                for _ in 0..*horizon {
                    let next = t.preimage_set(&cur);
                    out.push(std::mem::replace(&mut cur, next));
                }
                out
            }
            FamilyKind::UnionsClosure { base, max_terms } => {
                if base.is_empty() || *max_terms == 0 {
                    return Err(Error::OutOfRange("unions closure needs a base and max_terms >= 1".into()));
                }
                unions_closure(base, *max_terms)
            }
        };
        Ok(SetFamily { kind, members })
    }

    pub fn explicit(sets: Vec<IntervalSet>) -> Result<Self> {
        Self::from_kind(FamilyKind::Explicit(sets))
    }

    pub fn dyadic_intervals(max_level: u32) -> Self {
        Self::from_kind(FamilyKind::DyadicIntervals { max_level }).expect("valid level")
    }

    pub fn digit_sets(max_index: u32) -> Self {
        Self::from_kind(FamilyKind::DigitSets { max_index }).expect("valid index")
    }

    pub fn orbit(map: MapSpec, seed: IntervalSet, horizon: usize) -> Result<Self> {
        Self::from_kind(FamilyKind::Orbit { map, seed, horizon })
    }

    pub fn unions_closure(base: Vec<IntervalSet>, max_terms: usize) -> Result<Self> {
        Self::from_kind(FamilyKind::UnionsClosure { base, max_terms })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn horizon(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, i: usize) -> &IntervalSet {
        &self.members[i]
    }

    pub fn members(&self) -> &[IntervalSet] {
        &self.members
    }

    pub fn entropy_tag(&self) -> EntropyTag {
        match self.kind {
            FamilyKind::DyadicIntervals { .. } => EntropyTag::Zero,
            FamilyKind::DigitSets { .. } => EntropyTag::PositiveBits(1.0),
            _ => EntropyTag::Unknown,
        }
    }
}

fn unions_closure(base: &[IntervalSet], max_terms: usize) -> Vec<IntervalSet> {
    let mut out: Vec<IntervalSet> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push = |s: IntervalSet, out: &mut Vec<IntervalSet>| {
        if seen.insert(s.clone()) {
            out.push(s);
        }
    };
    // combinations of each size in lexicographic order
    for size in 1..=max_terms.min(base.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let u = idx.iter().fold(IntervalSet::empty(), |acc, &i| acc.union(&base[i]));
            push(u, &mut out);
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < base.len() - size + p) else {
                break;
            };
            idx[pos] += 1;
            for p in pos + 1..size {
                idx[p] = idx[p - 1] + 1;
            }
        }
    }
    out
}

fn write_sets(f: &mut fmt::Formatter<'_>, sets: &[IntervalSet]) -> fmt::Result {
    write!(f, "[")?;
    for (i, s) in sets.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{s}")?;
    }
    write!(f, "]")
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FamilyKind::Explicit(sets) => {
                write!(f, "explicit:")?;
                write_sets(f, sets)
            }
            FamilyKind::DyadicIntervals { max_level } => write!(f, "dyadic_intervals:max_level={max_level}"),
            FamilyKind::DigitSets { max_index } => write!(f, "digit_sets:max_index={max_index}"),
            FamilyKind::Orbit { map, seed, horizon } => {
                write!(f, "orbit:horizon={horizon},seed={seed},map={map}")
            }
            FamilyKind::UnionsClosure { base, max_terms } => {
                write!(f, "unions_closure:max_terms={max_terms},base=")?;
                write_sets(f, base)
            }
        }
    }
}

/// Top-level `key=value` pairs separated by commas outside brackets.
fn split_params(s: &str) -> Result<Vec<(&str, &str)>> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                items.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push(&s[start..]);
    items
        .into_iter()
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))
        })
        .collect()
}

fn parse_sets(s: &str) -> Result<Vec<IntervalSet>> {
    split_bracketed_list(s)?.into_iter().map(str::parse).collect()
}

impl FromStr for SetFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (name, rest) = t.split_once(':').unwrap_or((t, ""));
        if name == "explicit" {
            return Self::explicit(parse_sets(rest)?);
        }
        let params = split_params(rest)?;
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::Parse(format!("family {name:?} needs parameter {key}")))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?.parse().map_err(|_| Error::Parse(format!("{key} must be a non-negative integer")))
        };
        match name {
            "dyadic_intervals" => Self::from_kind(FamilyKind::DyadicIntervals { max_level: int("max_level")? as u32 }),
            "digit_sets" => Self::from_kind(FamilyKind::DigitSets { max_index: int("max_index")? as u32 }),
            "orbit" => Self::orbit(get("map")?.parse()?, get("seed")?.parse()?, int("horizon")?),
            "unions_closure" => Self::unions_closure(parse_sets(get("base")?)?, int("max_terms")?),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}
