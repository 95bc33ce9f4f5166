//! Local rigidity of end spaces and the order of their isometry groups.
//!
//! After collapsing, a class duplicates a branch when two of its children
//! have the same class: swapping those two subtrees is a nontrivial isometry
//! of a small ball. The end space is locally rigid exactly when such classes
//! occur at finitely many levels, i.e. nowhere in the periodic part.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::collapse::collapse;
use crate::error::Result;
use crate::tree::{LevelDescriptor, TreeSystem, PROCEDURAL_CHECK_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RigidityStatus {
    LocallyRigid,
    NotLocallyRigid,
    /// Only a truncation of this depth was available.
    UnknownBeyondDepth(usize),
}

/// A class in the periodic part with a repeated child class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicationWitness {
    pub level: usize,
    pub class: usize,
    /// Child positions from the root down to a vertex of this class.
    pub path: Vec<usize>,
    pub child_class: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityVerdict {
    pub status: RigidityStatus,
    /// `L` with `ε_X = e^{-L}`: balls around vertices at level `L` or deeper are rigid.
    pub epsilon_level: Option<usize>,
    pub witness: Option<DuplicationWitness>,
}

impl RigidityVerdict {
    pub fn is_locally_rigid(&self) -> bool {
        self.status == RigidityStatus::LocallyRigid
    }
}

impl fmt::Display for RigidityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            RigidityStatus::LocallyRigid => {
                write!(f, "LocallyRigid, epsilon = e^-{}", self.epsilon_level.unwrap_or(0))
            }
            RigidityStatus::NotLocallyRigid => {
                let w = self.witness.as_ref().expect("non-rigid verdicts carry a witness");
                write!(
                    f,
                    "NotLocallyRigid, witness class {} at level {} (path {:?}) repeats child class {} {} times",
                    w.class, w.level, w.path, w.child_class, w.multiplicity
                )
            }
            RigidityStatus::UnknownBeyondDepth(n) => write!(f, "UnknownBeyondDepth({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupOrder {
    Finite(BigUint),
    Infinite,
    UnknownBeyondDepth(usize),
}

impl fmt::Display for GroupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupOrder::Finite(n) => write!(f, "{n}"),
            GroupOrder::Infinite => write!(f, "infinite"),
            GroupOrder::UnknownBeyondDepth(n) => write!(f, "unknown beyond depth {n}"),
        }
    }
}

/// Most repeated child class of a class, if any child class repeats.
fn duplicated_child(level: &LevelDescriptor, class: usize) -> Option<(usize, usize)> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in level.children(class) {
        *counts.entry(c).or_default() += 1;
    }
    counts.into_iter().filter(|&(_, m)| m >= 2).max_by_key(|&(c, m)| (m, std::cmp::Reverse(c)))
}

/// Child positions leading to some vertex of `class` at `level`.
fn path_to(ts: &TreeSystem, level: usize, class: usize) -> Vec<usize> {
    let mut path = Vec::with_capacity(level);
    let mut target = class;
    for l in (0..level).rev() {
        let desc = ts.level(l).expect("eventually periodic systems describe every level");
        let (parent, pos) = (0..desc.len())
            .find_map(|k| desc.children(k).iter().position(|&c| c == target).map(|p| (k, p)))
            .expect("collapsed classes are reachable");
        path.push(pos);
        target = parent;
    }
    path.reverse();
    path
}

/// Depth available for non-periodic input.
fn known_depth(ts: &TreeSystem) -> usize {
    match ts {
        TreeSystem::Explicit(levels) => levels.len(),
        _ => PROCEDURAL_CHECK_DEPTH,
    }
}

pub fn is_locally_rigid(ts: &TreeSystem) -> Result<RigidityVerdict> {
    ts.check()?;
    if !matches!(ts, TreeSystem::EventuallyPeriodic { .. }) {
        return Ok(RigidityVerdict {
            status: RigidityStatus::UnknownBeyondDepth(known_depth(ts)),
            epsilon_level: None,
            witness: None,
        });
    }
    let c = collapse(ts)?.into_system();
    let TreeSystem::EventuallyPeriodic { prefix, cycle } = &c else { unreachable!() };
    let p = prefix.len();
    for (i, level) in cycle.iter().enumerate() {
        for class in 0..level.len() {
            if let Some((child_class, multiplicity)) = duplicated_child(level, class) {
                return Ok(RigidityVerdict {
                    status: RigidityStatus::NotLocallyRigid,
                    epsilon_level: None,
                    witness: Some(DuplicationWitness {
                        level: p + i,
                        class,
                        path: path_to(&c, p + i, class),
                        child_class,
                        multiplicity,
                    }),
                });
            }
        }
    }
    let last = (0..p).rev().find(|&i| (0..prefix[i].len()).any(|k| duplicated_child(&prefix[i], k).is_some()));
    Ok(RigidityVerdict {
        status: RigidityStatus::LocallyRigid,
        epsilon_level: Some(last.map_or(0, |l| l + 1)),
        witness: None,
    })
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Order of the isometry group of the end space, by the wreath-product
/// recursion `|G(class)| = Π_k |G(k)|^{mult_k} · mult_k!` over child classes.
pub fn isometry_group_order(ts: &TreeSystem) -> Result<GroupOrder> {
    let verdict = is_locally_rigid(ts)?;
    let eps = match verdict.status {
        RigidityStatus::NotLocallyRigid => return Ok(GroupOrder::Infinite),
        RigidityStatus::UnknownBeyondDepth(n) => return Ok(GroupOrder::UnknownBeyondDepth(n)),
        RigidityStatus::LocallyRigid => verdict.epsilon_level.unwrap(),
    };
    let c = collapse(ts)?.into_system();
    // below ε every class has a trivial group
    let width = |l: usize| c.level(l).map_or(1, |d| d.len());
    let mut orders = vec![BigUint::one(); width(eps)];
    for l in (0..eps).rev() {
        let desc = c.level(l).unwrap();
        orders = (0..desc.len())
            .map(|k| {
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for &ch in desc.children(k) {
                    *counts.entry(ch).or_default() += 1;
                }
                counts.into_iter().fold(BigUint::one(), |acc, (ch, m)| acc * orders[ch].pow(m as u32) * factorial(m))
            })
            .collect();
    }
    Ok(GroupOrder::Finite(orders[0].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(ts: TreeSystem) -> RigidityStatus {
        is_locally_rigid(&ts).unwrap().status
    }

    #[test]
    fn verdicts() {
        assert_eq!(status(TreeSystem::cantor()), RigidityStatus::NotLocallyRigid);
        assert_eq!(status(TreeSystem::regular(2)), RigidityStatus::NotLocallyRigid);
        assert_eq!(status(TreeSystem::ary(3)), RigidityStatus::NotLocallyRigid);
        assert_eq!(status(TreeSystem::fibonacci()), RigidityStatus::LocallyRigid);
        assert_eq!(status(TreeSystem::sturmian()), RigidityStatus::LocallyRigid);
        assert_eq!(status(TreeSystem::ended(3)), RigidityStatus::LocallyRigid);
    }

    #[test]
    fn continued_fractions_are_rigid_iff_eventually_golden() {
        let cf = |p: &[u64], c: &[u64]| status(TreeSystem::from_continued_fraction(p, c).unwrap());
        assert_eq!(cf(&[], &[1]), RigidityStatus::LocallyRigid);
        assert_eq!(cf(&[1], &[2]), RigidityStatus::NotLocallyRigid);
        assert_eq!(cf(&[3], &[1]), RigidityStatus::LocallyRigid);
        assert_eq!(cf(&[3, 4], &[1]), RigidityStatus::LocallyRigid);
    }

    #[test]
    fn epsilon_and_witness() {
        let v = is_locally_rigid(&TreeSystem::ended(4)).unwrap();
        assert_eq!(v.epsilon_level, Some(1));
        assert_eq!(v.to_string(), "LocallyRigid, epsilon = e^-1");
        let v = is_locally_rigid(&TreeSystem::fibonacci()).unwrap();
        assert_eq!(v.epsilon_level, Some(0));
        let v = is_locally_rigid(&TreeSystem::regular(2)).unwrap();
        let w = v.witness.unwrap();
        assert_eq!((w.level, w.class, w.multiplicity), (1, 0, 2));
        assert_eq!(w.path, vec![0]);
    }

    #[test]
    fn group_orders() {
        assert_eq!(isometry_group_order(&TreeSystem::ended(4)).unwrap(), GroupOrder::Finite(BigUint::from(24u32)));
        assert_eq!(isometry_group_order(&TreeSystem::fibonacci()).unwrap(), GroupOrder::Finite(BigUint::one()));
        assert_eq!(isometry_group_order(&TreeSystem::cantor()).unwrap(), GroupOrder::Infinite);
        // [3;1,1,…]: the root has three isometric free children and one forced child
        let t = TreeSystem::from_continued_fraction(&[3], &[1]).unwrap();
        assert_eq!(isometry_group_order(&t).unwrap(), GroupOrder::Finite(BigUint::from(6u32)));
    }

    #[test]
    fn truncations_are_undecided() {
        let t = TreeSystem::fibonacci().unfold(4).unwrap();
        assert_eq!(status(t), RigidityStatus::UnknownBeyondDepth(4));
    }
}
