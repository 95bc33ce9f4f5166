//! Merging vertex classes whose subtrees are rooted-isometric.
//!
//! Two classes have isometric subtrees exactly when they are bisimilar in the
//! finite graph of (stored level, class) nodes, so the coarsest stable
//! partition is found by iterated signature refinement. The refinement is
//! ordered: each round sorts nodes by (previous rank, more children first,
//! sorted child ranks), which makes the resulting class order a structural
//! invariant and the collapsed system canonical.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::periodic::{self, LevelTable};
use crate::tree::{LevelDescriptor, TreeSystem};

/// Result of collapsing a tree system.
#[derive(Debug, Clone)]
pub struct Collapse {
    system: TreeSystem,
    class_map: LevelTable<Vec<Option<usize>>>,
    global: LevelTable<Vec<usize>>,
}

impl Collapse {
    /// The collapsed system: reachable classes only, one per isometry type at
    /// each level, children sorted, presentation minimized.
    pub fn system(&self) -> &TreeSystem {
        &self.system
    }

    pub fn into_system(self) -> TreeSystem {
        self.system
    }

    /// Collapsed class of an original class, or `None` if no vertex has it.
    pub fn class_map(&self, level: usize, class: usize) -> Option<usize> {
        self.class_map.at(level).and_then(|m| m.get(class).copied().flatten())
    }

    /// An identifier for the isometry type of a collapsed class. For eventually
    /// periodic systems two classes have rooted-isometric subtrees, at any
    /// levels, iff their identifiers agree. For truncations the comparison is
    /// only meaningful within one level.
    pub fn isometry_type(&self, level: usize, collapsed_class: usize) -> Option<usize> {
        self.global.at(level).and_then(|g| g.get(collapsed_class).copied())
    }

    /// Isometry type of the vertex at `path` in the original system.
    pub fn isometry_type_of(&self, original: &TreeSystem, path: &[usize]) -> Result<usize> {
        let class = original.class_of(path)?;
        let c = self
            .class_map(path.len(), class)
            .ok_or_else(|| Error::InvalidPath("vertex outside the collapsed system".into()))?;
        self.isometry_type(path.len(), c)
            .ok_or_else(|| Error::InvalidPath("vertex outside the collapsed system".into()))
    }
}

/// Ordered coarsest-partition refinement. Returns a dense rank per node.
fn refine(children: &[Vec<usize>]) -> Vec<usize> {
    let n = children.len();
    let mut rank = vec![0usize; n];
    let mut count = usize::from(n > 0);
    loop {
        let keys: Vec<(usize, Reverse<usize>, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut ch: Vec<usize> = children[v].iter().map(|&c| rank[c]).collect();
                ch.sort_unstable();
                (rank[v], Reverse(children[v].len()), ch)
            })
            .collect();
        let mut order: BTreeMap<&(usize, Reverse<usize>, Vec<usize>), usize> = BTreeMap::new();
        for k in &keys {
            order.insert(k, 0);
        }
        for (i, v) in order.values_mut().enumerate() {
            *v = i;
        }
        let new_rank: Vec<usize> = keys.iter().map(|k| order[k]).collect();
        let new_count = order.len();
        rank = new_rank;
        if new_count == count {
            return rank;
        }
        count = new_count;
    }
}

/// Stored levels with the position that follows each one (`None` at a horizon).
struct Layout {
    levels: Vec<LevelDescriptor>,
    next: Vec<Option<usize>>,
}

pub fn collapse(ts: &TreeSystem) -> Result<Collapse> {
    ts.check()?;
    let layout = match ts {
        TreeSystem::Procedural(rule) => return Err(Error::NeedsTruncation(rule.tag().to_string())),
        TreeSystem::EventuallyPeriodic { prefix, cycle } => {
            let (p, c) = (prefix.len(), cycle.len());
            let levels: Vec<LevelDescriptor> = prefix.iter().chain(cycle).cloned().collect();
            let next = (0..p + c).map(|i| Some(periodic::next_position(p, c, i))).collect();
            Layout { levels, next }
        }
        TreeSystem::Explicit(levels) => {
            let n = levels.len();
            let horizon = levels[n - 1].child_class_bound();
            let mut all = levels.clone();
            all.push(LevelDescriptor::new(vec![vec![]; horizon]));
            let next = (0..=n).map(|i| (i < n).then_some(i + 1)).collect();
            Layout { levels: all, next }
        }
    };

    // node ids for every stored (position, class)
    let mut node = Vec::with_capacity(layout.levels.len());
    let mut count = 0;
    for level in &layout.levels {
        node.push((count..count + level.len()).collect::<Vec<usize>>());
        count += level.len();
    }
    let mut children = vec![Vec::new(); count];
    for (pos, level) in layout.levels.iter().enumerate() {
        if let Some(nx) = layout.next[pos] {
            for (k, class) in level.classes.iter().enumerate() {
                children[node[pos][k]] = class.children.iter().map(|&c| node[nx][c]).collect();
            }
        }
    }
    let rank = refine(&children);

    // unroll until the reachable class sets repeat
    let periodic = matches!(ts, TreeSystem::EventuallyPeriodic { .. });
    let first_cycle_pos = match ts {
        TreeSystem::EventuallyPeriodic { prefix, .. } => prefix.len(),
        _ => usize::MAX,
    };
    let mut seq: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut pos = 0;
    let mut reach = vec![0usize];
    let unrolled_prefix = loop {
        if periodic && pos >= first_cycle_pos {
            if let Some(&j) = seen.get(&(pos, reach.clone())) {
                break j;
            }
            seen.insert((pos, reach.clone()), seq.len());
        }
        seq.push((pos, reach.clone()));
        let Some(nx) = layout.next[pos] else { break seq.len() };
        let mut r: Vec<usize> =
            reach.iter().flat_map(|&k| layout.levels[pos].children(k).iter().copied()).collect();
        r.sort_unstable();
        r.dedup();
        reach = r;
        pos = nx;
    };

    let mut class_map = Vec::with_capacity(seq.len());
    let mut global = Vec::with_capacity(seq.len());
    for (pos, reach) in &seq {
        let mut ranks: Vec<usize> = reach.iter().map(|&k| rank[node[*pos][k]]).collect();
        ranks.sort_unstable();
        ranks.dedup();
        let mut map = vec![None; layout.levels[*pos].len()];
        for &k in reach {
            map[k] = Some(ranks.binary_search(&rank[node[*pos][k]]).unwrap());
        }
        class_map.push(map);
        global.push(ranks);
    }

    let total = seq.len();
    let mut descriptors = Vec::with_capacity(total);
    for u in 0..total {
        let (pos, reach) = &seq[u];
        let next_u = if u + 1 < total { Some(u + 1) } else if periodic { Some(unrolled_prefix) } else { None };
        let mut classes = Vec::with_capacity(global[u].len());
        for idx in 0..global[u].len() {
            let rep = *reach.iter().find(|&&k| class_map[u][k] == Some(idx)).unwrap();
            let mut ch: Vec<usize> = match next_u {
                Some(nu) => layout.levels[*pos]
                    .children(rep)
                    .iter()
                    .map(|&c| class_map[nu][c].expect("children of reachable classes are reachable"))
                    .collect(),
                None => Vec::new(),
            };
            ch.sort_unstable();
            classes.push(ch);
        }
        descriptors.push(LevelDescriptor::new(classes));
    }

    if periodic {
        let cycle_desc = descriptors.split_off(unrolled_prefix);
        let (prefix, cycle) = periodic::minimize(descriptors, cycle_desc);
        let cycle_map = class_map.split_off(unrolled_prefix);
        let cycle_global = global.split_off(unrolled_prefix);
        Ok(Collapse {
            system: TreeSystem::EventuallyPeriodic { prefix, cycle },
            class_map: LevelTable { prefix: class_map, cycle: cycle_map },
            global: LevelTable { prefix: global, cycle: cycle_global },
        })
    } else {
        // drop the horizon level, whose classes all merge into one
        descriptors.pop();
        Ok(Collapse {
            system: TreeSystem::Explicit(descriptors),
            class_map: LevelTable { prefix: class_map, cycle: vec![] },
            global: LevelTable { prefix: global, cycle: vec![] },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ld(classes: Vec<Vec<usize>>) -> LevelDescriptor {
        LevelDescriptor::new(classes)
    }

    #[test]
    fn fibonacci_is_already_collapsed() {
        let c = collapse(&TreeSystem::fibonacci()).unwrap();
        assert_eq!(c.system(), &TreeSystem::fibonacci());
    }

    #[test]
    fn duplicate_classes_merge() {
        // two classes with identical behaviour
        let ts = TreeSystem::EventuallyPeriodic {
            prefix: vec![ld(vec![vec![0, 1]])],
            cycle: vec![ld(vec![vec![0, 1], vec![1, 0]])],
        };
        let c = collapse(&ts).unwrap();
        assert_eq!(c.system(), &TreeSystem::cantor());
        assert_eq!(c.class_map(1, 0), c.class_map(1, 1));
    }

    #[test]
    fn unreachable_classes_are_dropped() {
        let ts = TreeSystem::from_continued_fraction(&[0], &[1]).unwrap();
        // root -> forced -> free -> ...: level 1 only has the forced class
        let c = collapse(&ts).unwrap();
        assert_eq!(c.class_map(1, 0), None);
        assert!(c.class_map(1, 1).is_some());
        let TreeSystem::EventuallyPeriodic { prefix, .. } = c.system() else { panic!() };
        assert_eq!(prefix[0].classes.len(), 1);
        assert_eq!(prefix[0].children(0).len(), 1);
    }

    #[test]
    fn free_class_comes_first() {
        let ts = TreeSystem::from_continued_fraction(&[2], &[3]).unwrap();
        let c = collapse(&ts).unwrap();
        let TreeSystem::EventuallyPeriodic { prefix, cycle } = c.system() else { panic!() };
        assert_eq!(prefix, &vec![ld(vec![vec![0, 0, 1]])]);
        assert_eq!(cycle, &vec![ld(vec![vec![0, 0, 0, 1], vec![0]])]);
    }

    #[test]
    fn periodic_presentation_is_minimized() {
        let ts = TreeSystem::EventuallyPeriodic {
            prefix: vec![ld(vec![vec![0, 0]]), ld(vec![vec![0, 0]])],
            cycle: vec![ld(vec![vec![0, 0]]), ld(vec![vec![0, 0]])],
        };
        assert_eq!(collapse(&ts).unwrap().system(), &TreeSystem::cantor());
    }

    #[test]
    fn isometry_types_across_levels() {
        let c = collapse(&TreeSystem::fibonacci()).unwrap();
        // the root and every vertex of class 0 span isometric subtrees
        assert_eq!(c.isometry_type(0, 0), c.isometry_type(5, 0));
        assert_ne!(c.isometry_type(3, 0), c.isometry_type(3, 1));
    }

    #[test]
    fn truncations_collapse_within_the_horizon() {
        let t = TreeSystem::Explicit(vec![ld(vec![vec![0, 1]]), ld(vec![vec![0, 0], vec![0, 1]])]);
        let c = collapse(&t).unwrap();
        // at the horizon nothing distinguishes the two level-1 classes
        assert_eq!(c.class_map(1, 0), c.class_map(1, 1));
        assert_eq!(c.system(), &TreeSystem::Explicit(vec![ld(vec![vec![0, 0]]), ld(vec![vec![0, 0]])]));
    }

    #[test]
    fn procedural_needs_truncation() {
        let t = TreeSystem::procedural_continued_fraction("e", |_| 1);
        assert!(matches!(collapse(&t), Err(Error::NeedsTruncation(_))));
        assert!(collapse(&t.unfold(5).unwrap()).is_ok());
    }
}
