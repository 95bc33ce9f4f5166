//! Locally finite rooted trees described level by level through vertex classes.
//!
//! Level `i` lists the classes of vertices at distance `i` from the root. Each
//! class records, in order, the classes (at level `i + 1`) of its children. A
//! vertex is addressed by the sequence of child positions leading to it.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periodic;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelDescriptor {
    pub classes: Vec<ClassDescriptor>,
}

impl LevelDescriptor {
    pub fn new(classes: Vec<Vec<usize>>) -> Self {
        LevelDescriptor { classes: classes.into_iter().map(|children| ClassDescriptor { children }).collect() }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn children(&self, class: usize) -> &[usize] {
        &self.classes[class].children
    }

    /// Number of classes this level's children refer to (one past the largest index).
    pub fn child_class_bound(&self) -> usize {
        self.classes.iter().flat_map(|c| c.children.iter()).map(|&k| k + 1).max().unwrap_or(0)
    }
}

type LevelRule = dyn Fn(usize) -> LevelDescriptor + Send + Sync;

/// A level sequence computed on demand.
#[derive(Clone)]
pub struct ProceduralRule {
    tag: String,
    rule: Arc<LevelRule>,
}

impl ProceduralRule {
    pub fn new(tag: impl Into<String>, rule: impl Fn(usize) -> LevelDescriptor + Send + Sync + 'static) -> Self {
        ProceduralRule { tag: tag.into(), rule: Arc::new(rule) }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn level(&self, i: usize) -> LevelDescriptor {
        (self.rule)(i)
    }
}

impl fmt::Debug for ProceduralRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProceduralRule({})", self.tag)
    }
}

#[derive(Debug, Clone)]
pub enum TreeSystem {
    /// A depth-limited truncation: `levels[i]` for `i < levels.len()`. The last
    /// level's child indices point into an undescribed horizon level.
    Explicit(Vec<LevelDescriptor>),
    EventuallyPeriodic { prefix: Vec<LevelDescriptor>, cycle: Vec<LevelDescriptor> },
    Procedural(ProceduralRule),
}

impl PartialEq for TreeSystem {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (TreeSystem::Explicit(a), TreeSystem::Explicit(b)) => a == b,
            (
                TreeSystem::EventuallyPeriodic { prefix: p1, cycle: c1 },
                TreeSystem::EventuallyPeriodic { prefix: p2, cycle: c2 },
            ) => p1 == p2 && c1 == c2,
            (TreeSystem::Procedural(a), TreeSystem::Procedural(b)) => {
                a.tag == b.tag && Arc::ptr_eq(&a.rule, &b.rule)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum TreeIssue {
    NoLevels,
    EmptyCycle,
    RootNotSingleClass { classes: usize },
    EmptyLevel { level: usize },
    ChildlessClass { level: usize, class: usize },
    ChildOutOfRange { level: usize, class: usize, child: usize, bound: usize },
}

impl fmt::Display for TreeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeIssue::NoLevels => write!(f, "no levels given"),
            TreeIssue::EmptyCycle => write!(f, "the periodic part is empty"),
            TreeIssue::RootNotSingleClass { classes } => {
                write!(f, "level 0 must have exactly one class, found {classes}")
            }
            TreeIssue::EmptyLevel { level } => write!(f, "level {level} has no classes"),
            TreeIssue::ChildlessClass { level, class } => {
                write!(f, "class {class} at level {level} has no children")
            }
            TreeIssue::ChildOutOfRange { level, class, child, bound } => write!(
                f,
                "class {class} at level {level} names child class {child}, but the next level has {bound}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checked_levels: usize,
    pub issues: Vec<TreeIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Levels examined when validating a procedural system.
pub const PROCEDURAL_CHECK_DEPTH: usize = 32;

fn uniform(children: usize) -> LevelDescriptor {
    LevelDescriptor::new(vec![vec![0; children]])
}

impl TreeSystem {
    pub fn eventually_periodic(prefix: Vec<LevelDescriptor>, cycle: Vec<LevelDescriptor>) -> Result<Self> {
        TreeSystem::EventuallyPeriodic { prefix, cycle }.checked()
    }

    pub fn explicit(levels: Vec<LevelDescriptor>) -> Result<Self> {
        TreeSystem::Explicit(levels).checked()
    }

    fn checked(self) -> Result<Self> {
        self.check()?;
        Ok(self)
    }

    /// Error out unless [`TreeSystem::validate`] reports no issues.
    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        match report.issues.first() {
            None => Ok(()),
            Some(issue) => Err(Error::InvalidTree(issue.to_string())),
        }
    }

    /// The full binary tree.
    pub fn cantor() -> Self {
        Self::ary(2)
    }

    /// Every vertex has `n` children.
    pub fn ary(n: usize) -> Self {
        assert!(n >= 1);
        TreeSystem::EventuallyPeriodic { prefix: vec![], cycle: vec![uniform(n)] }
    }

    /// The root has `n + 1` children and every other vertex has `n`.
    pub fn regular(n: usize) -> Self {
        assert!(n >= 1);
        TreeSystem::EventuallyPeriodic { prefix: vec![uniform(n + 1)], cycle: vec![uniform(n)] }
    }

    /// The root has `n` children, each starting an infinite ray.
    pub fn ended(n: usize) -> Self {
        assert!(n >= 1);
        TreeSystem::EventuallyPeriodic { prefix: vec![uniform(n)], cycle: vec![uniform(1)] }
    }

    /// Binary sequences in which a 1 is always followed by a 0.
    pub fn fibonacci() -> Self {
        TreeSystem::EventuallyPeriodic {
            prefix: vec![LevelDescriptor::new(vec![vec![0, 1]])],
            cycle: vec![LevelDescriptor::new(vec![vec![0, 1], vec![0]])],
        }
    }

    /// Binary sequences in which a 1 is always followed by a 1.
    pub fn sturmian() -> Self {
        TreeSystem::EventuallyPeriodic {
            prefix: vec![LevelDescriptor::new(vec![vec![0, 1]])],
            cycle: vec![LevelDescriptor::new(vec![vec![0, 1], vec![1]])],
        }
    }

    /// Spherically homogeneous tree whose vertices at level `i` have
    /// `branching[i % len]` children.
    pub fn periodic_branching(branching: &[usize]) -> Result<Self> {
        if branching.is_empty() || branching.contains(&0) {
            return Err(Error::InvalidTree("branching numbers must be positive".into()));
        }
        Ok(TreeSystem::EventuallyPeriodic {
            prefix: vec![],
            cycle: branching.iter().map(|&b| uniform(b)).collect(),
        })
    }

    /// Looks up a built-in family: `cantor`, `fibonacci`, `sturmian`, and
    /// `regular(n)`, `ary(n)`, `ended(n)` (also written `regular:n`).
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim();
        let (base, arg) = match name.find(['(', ':']) {
            Some(i) => {
                let arg = name[i + 1..].trim_end_matches(')').trim();
                let n: usize = arg
                    .parse()
                    .map_err(|_| Error::Malformed(format!("bad parameter in builtin `{name}`")))?;
                (&name[..i], Some(n))
            }
            None => (name, None),
        };
        let need = |arg: Option<usize>| -> Result<usize> {
            match arg {
                Some(n) if n >= 1 => Ok(n),
                Some(_) => Err(Error::Malformed(format!("`{name}` needs a parameter of at least 1"))),
                None => Err(Error::Malformed(format!("`{base}` needs a parameter, e.g. `{base}(2)`"))),
            }
        };
        match (base, arg) {
            ("cantor", None) => Ok(Self::cantor()),
            ("fibonacci", None) => Ok(Self::fibonacci()),
            ("sturmian", None) => Ok(Self::sturmian()),
            ("regular", a) => Ok(Self::regular(need(a)?)),
            ("ary", a) => Ok(Self::ary(need(a)?)),
            ("ended", a) => Ok(Self::ended(need(a)?)),
            _ => Err(Error::Malformed(format!("unknown builtin `{name}`"))),
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 6] = ["cantor", "fibonacci", "sturmian", "regular(n)", "ary(n)", "ended(n)"];

    /// Tree of one-sided sequences of the shift of finite type with 0/1
    /// transition matrix `matrix`: the root has one child per symbol and a
    /// vertex whose last symbol is `i` has the children `j` with `A[i][j] = 1`.
    pub fn from_sft(matrix: &[Vec<u32>]) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Malformed("empty transition matrix".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Malformed("transition matrix must be square".into()));
            }
            if row.iter().any(|&a| a > 1) {
                return Err(Error::Malformed("transition matrix entries must be 0 or 1".into()));
            }
            if row.iter().all(|&a| a == 0) {
                return Err(Error::InvalidTree(format!("symbol {i} has no successor")));
            }
        }
        let root = LevelDescriptor::new(vec![(0..n).collect()]);
        let body = LevelDescriptor::new(
            matrix.iter().map(|row| (0..n).filter(|&j| row[j] == 1).collect()).collect(),
        );
        Ok(TreeSystem::EventuallyPeriodic { prefix: vec![root], cycle: vec![body] })
    }

    /// Tree of digit sequences `x` with `0 ≤ x_i ≤ a_i`, where `x_i = a_i`
    /// forces `x_{i+1} = 0`, for the continued fraction with eventually periodic
    /// coefficients `prefix ++ cycle^∞`.
    ///
    /// Level 0 holds a single free class. Each later level holds the free class
    /// (index 0) and the forced class (index 1). A free vertex at level `i` has
    /// `a_i` free children followed by one forced child; a forced vertex has a
    /// single free child.
    pub fn from_continued_fraction(prefix: &[u64], cycle: &[u64]) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidTree("continued fraction needs a nonempty periodic part".into()));
        }
        let coeff = |i: usize| -> u64 {
            if i < prefix.len() {
                prefix[i]
            } else {
                cycle[(i - prefix.len()) % cycle.len()]
            }
        };
        if (1..prefix.len() + cycle.len() + 1).any(|i| coeff(i) == 0) {
            return Err(Error::InvalidTree("partial quotients after the first must be at least 1".into()));
        }
        let level = |i: usize| cfrac_level(i, coeff(i));
        // make sure the root level sits in the prefix
        let p = prefix.len().max(1);
        let tree_prefix = (0..p).map(level).collect();
        let tree_cycle = (p..p + cycle.len()).map(level).collect();
        Ok(TreeSystem::EventuallyPeriodic { prefix: tree_prefix, cycle: tree_cycle })
    }

    /// Continued-fraction tree for coefficients given by a function, for
    /// sequences that are not eventually periodic.
    pub fn procedural_continued_fraction(
        tag: impl Into<String>,
        coeff: impl Fn(usize) -> u64 + Send + Sync + 'static,
    ) -> Self {
        TreeSystem::Procedural(ProceduralRule::new(tag, move |i| cfrac_level(i, coeff(i))))
    }

    pub fn is_eventually_periodic(&self) -> bool {
        matches!(self, TreeSystem::EventuallyPeriodic { .. })
    }

    /// Number of levels with descriptors, if finite.
    pub fn described_levels(&self) -> Option<usize> {
        match self {
            TreeSystem::Explicit(levels) => Some(levels.len()),
            _ => None,
        }
    }

    pub fn level(&self, i: usize) -> Option<Cow<'_, LevelDescriptor>> {
        match self {
            TreeSystem::Explicit(levels) => levels.get(i).map(Cow::Borrowed),
            TreeSystem::EventuallyPeriodic { prefix, cycle } => {
                periodic::position(prefix.len(), cycle.len(), i).map(|p| {
                    Cow::Borrowed(if p < prefix.len() { &prefix[p] } else { &cycle[p - prefix.len()] })
                })
            }
            TreeSystem::Procedural(rule) => Some(Cow::Owned(rule.level(i))),
        }
    }

    fn level_or_err(&self, i: usize) -> Result<Cow<'_, LevelDescriptor>> {
        self.level(i).ok_or(Error::BeyondDepth { requested: i, available: self.described_levels().unwrap_or(0) })
    }

    /// Levels `0..depth` as an explicit truncation.
    pub fn unfold(&self, depth: usize) -> Result<TreeSystem> {
        if depth == 0 {
            return Err(Error::InvalidTree("a truncation needs at least one level".into()));
        }
        let levels = (0..depth).map(|i| self.level_or_err(i).map(Cow::into_owned)).collect::<Result<_>>()?;
        Ok(TreeSystem::Explicit(levels))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let (levels, next_bound): (Vec<Cow<'_, LevelDescriptor>>, Box<dyn Fn(usize) -> Option<usize> + '_>) = match self {
            TreeSystem::Explicit(levels) => {
                if levels.is_empty() {
                    issues.push(TreeIssue::NoLevels);
                }
                let n = levels.len();
                (
                    levels.iter().map(Cow::Borrowed).collect(),
                    Box::new(move |i| if i + 1 < n { Some(levels[i + 1].len()) } else { None }),
                )
            }
            TreeSystem::EventuallyPeriodic { prefix, cycle } => {
                if cycle.is_empty() {
                    issues.push(TreeIssue::EmptyCycle);
                    return ValidationReport { checked_levels: prefix.len(), issues };
                }
                let (p, c) = (prefix.len(), cycle.len());
                let all: Vec<&LevelDescriptor> = prefix.iter().chain(cycle.iter()).collect();
                let all2 = all.clone();
                (
                    all.into_iter().map(Cow::Borrowed).collect(),
                    Box::new(move |i| Some(all2[periodic::next_position(p, c, i)].len())),
                )
            }
            TreeSystem::Procedural(rule) => {
                let lv: Vec<LevelDescriptor> = (0..=PROCEDURAL_CHECK_DEPTH).map(|i| rule.level(i)).collect();
                let bounds: Vec<usize> = lv.iter().map(LevelDescriptor::len).collect();
                (
                    lv.into_iter().take(PROCEDURAL_CHECK_DEPTH).map(Cow::Owned).collect(),
                    Box::new(move |i| Some(bounds[i + 1])),
                )
            }
        };
        if let Some(root) = levels.first() {
            if root.len() != 1 {
                issues.push(TreeIssue::RootNotSingleClass { classes: root.len() });
            }
        }
        for (i, level) in levels.iter().enumerate() {
            if level.is_empty() {
                issues.push(TreeIssue::EmptyLevel { level: i });
            }
            let bound = next_bound(i);
            for (k, class) in level.classes.iter().enumerate() {
                if class.children.is_empty() {
                    issues.push(TreeIssue::ChildlessClass { level: i, class: k });
                }
                if let Some(b) = bound {
                    for &child in &class.children {
                        if child >= b {
                            issues.push(TreeIssue::ChildOutOfRange { level: i, class: k, child, bound: b });
                        }
                    }
                }
            }
        }
        ValidationReport { checked_levels: levels.len(), issues }
    }

    /// Class of the vertex reached from the root by the given child positions.
    pub fn class_of(&self, path: &[usize]) -> Result<usize> {
        let mut class = 0;
        for (i, &pos) in path.iter().enumerate() {
            let level = self.level_or_err(i)?;
            let children = level
                .classes
                .get(class)
                .ok_or_else(|| Error::InvalidPath(format!("class {class} missing at level {i}")))?;
            class = *children.children.get(pos).ok_or_else(|| {
                Error::InvalidPath(format!(
                    "position {pos} at level {i}, but the vertex has {} children",
                    children.children.len()
                ))
            })?;
        }
        Ok(class)
    }

    /// Number of children of the vertex at `path`.
    pub fn child_count(&self, path: &[usize]) -> Result<usize> {
        let class = self.class_of(path)?;
        Ok(self.level_or_err(path.len())?.children(class).len())
    }

    /// Every vertex at `level` in lexicographic path order, with its class.
    pub fn vertices_at(&self, level: usize) -> Result<Vec<(Vec<usize>, usize)>> {
        let mut current = vec![(Vec::new(), 0usize)];
        for i in 0..level {
            let desc = self.level_or_err(i)?;
            let mut next = Vec::new();
            for (path, class) in current {
                for (pos, &child) in desc.children(class).iter().enumerate() {
                    let mut p = path.clone();
                    p.push(pos);
                    next.push((p, child));
                }
            }
            current = next;
        }
        Ok(current)
    }

    fn count_step(&self, i: usize, counts: &[BigUint]) -> Result<Vec<BigUint>> {
        let desc = self.level_or_err(i)?;
        let bound = match self.level(i + 1) {
            Some(next) => next.len(),
            None => desc.child_class_bound(),
        };
        let mut next = vec![BigUint::zero(); bound];
        for (k, n) in counts.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            for &child in desc.children(k) {
                next[child] += n;
            }
        }
        Ok(next)
    }

    /// Number of vertices of each class at `level`.
    pub fn class_counts(&self, level: usize) -> Result<Vec<BigUint>> {
        let mut counts = vec![BigUint::one()];
        for i in 0..level {
            counts = self.count_step(i, &counts)?;
        }
        Ok(counts)
    }

    /// `|V_i|` for `i = 0..=max_level`.
    pub fn level_profile(&self, max_level: usize) -> Result<Vec<BigUint>> {
        let mut out = vec![BigUint::one()];
        let mut counts = vec![BigUint::one()];
        for i in 0..max_level {
            counts = self.count_step(i, &counts)?;
            out.push(counts.iter().sum());
        }
        Ok(out)
    }
}

fn cfrac_level(i: usize, a: u64) -> LevelDescriptor {
    let mut free: Vec<usize> = vec![0; a as usize];
    free.push(1);
    if i == 0 {
        LevelDescriptor::new(vec![free])
    } else {
        LevelDescriptor::new(vec![free, vec![0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(ts: &TreeSystem, n: usize) -> Vec<u64> {
        ts.level_profile(n).unwrap().iter().map(|x| x.to_u64_digits().first().copied().unwrap_or(0)).collect()
    }

    #[test]
    fn builtin_profiles() {
        assert_eq!(profile(&TreeSystem::cantor(), 4), vec![1, 2, 4, 8, 16]);
        assert_eq!(profile(&TreeSystem::fibonacci(), 6), vec![1, 2, 3, 5, 8, 13, 21]);
        assert_eq!(profile(&TreeSystem::sturmian(), 4), vec![1, 2, 3, 4, 5]);
        assert_eq!(profile(&TreeSystem::regular(2), 3), vec![1, 3, 6, 12]);
        assert_eq!(profile(&TreeSystem::ended(3), 3), vec![1, 3, 3, 3]);
        assert_eq!(profile(&TreeSystem::ary(3), 2), vec![1, 3, 9]);
    }

    #[test]
    fn builtin_names_parse() {
        assert_eq!(TreeSystem::builtin("regular(3)").unwrap(), TreeSystem::regular(3));
        assert_eq!(TreeSystem::builtin("ended:2").unwrap(), TreeSystem::ended(2));
        assert!(TreeSystem::builtin("regular").is_err());
        assert!(TreeSystem::builtin("ary(0)").is_err());
        assert!(TreeSystem::builtin("nonsense").is_err());
    }

    #[test]
    fn sft_tree_matches_fibonacci() {
        let ts = TreeSystem::from_sft(&[vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(profile(&ts, 6), profile(&TreeSystem::fibonacci(), 6));
        assert!(TreeSystem::from_sft(&[vec![1, 1], vec![0, 0]]).is_err());
        assert!(TreeSystem::from_sft(&[vec![1, 2], vec![1, 0]]).is_err());
    }

    #[test]
    fn continued_fraction_tree() {
        // golden mean: every free vertex has 2 children, forced ones 1
        let ts = TreeSystem::from_continued_fraction(&[], &[1]).unwrap();
        assert_eq!(profile(&ts, 5), vec![1, 2, 3, 5, 8, 13]);
        // a_0 = 0: the root only has the forced child
        let ts = TreeSystem::from_continued_fraction(&[0], &[2]).unwrap();
        assert_eq!(profile(&ts, 3), vec![1, 1, 1, 3]);
        assert!(TreeSystem::from_continued_fraction(&[1, 0], &[1]).is_err());
        assert!(TreeSystem::from_continued_fraction(&[1], &[]).is_err());
    }

    #[test]
    fn validation_reports_every_issue() {
        let bad = TreeSystem::EventuallyPeriodic {
            prefix: vec![LevelDescriptor::new(vec![vec![0], vec![0]])],
            cycle: vec![LevelDescriptor::new(vec![vec![], vec![3]])],
        };
        let report = bad.validate();
        assert!(report.issues.contains(&TreeIssue::RootNotSingleClass { classes: 2 }));
        assert!(report.issues.contains(&TreeIssue::ChildlessClass { level: 1, class: 0 }));
        assert!(report.issues.contains(&TreeIssue::ChildOutOfRange { level: 1, class: 1, child: 3, bound: 2 }));
        assert!(TreeSystem::cantor().validate().is_valid());
        let empty = TreeSystem::EventuallyPeriodic { prefix: vec![], cycle: vec![] };
        assert_eq!(empty.validate().issues, vec![TreeIssue::EmptyCycle]);
    }

    #[test]
    fn paths_and_classes() {
        let fib = TreeSystem::fibonacci();
        assert_eq!(fib.class_of(&[1]).unwrap(), 1);
        assert_eq!(fib.class_of(&[1, 0]).unwrap(), 0);
        assert!(fib.class_of(&[1, 1]).is_err());
        let level2: Vec<Vec<usize>> = fib.vertices_at(2).unwrap().into_iter().map(|(p, _)| p).collect();
        assert_eq!(level2, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn explicit_truncation_stops() {
        let t = TreeSystem::fibonacci().unfold(3).unwrap();
        assert_eq!(profile(&t, 3), vec![1, 2, 3, 5]);
        assert!(t.level_profile(4).is_err());
        assert!(t.validate().is_valid());
    }

    #[test]
    fn procedural_levels() {
        let t = TreeSystem::procedural_continued_fraction("e", |i| if i % 3 == 2 { 2 * (i as u64 / 3 + 1) } else { 1 });
        assert!(t.validate().is_valid());
        assert_eq!(t.level(2).unwrap().children(0).len(), 3);
        let unfolded = t.unfold(4).unwrap();
        assert_eq!(unfolded.level(2).unwrap().into_owned(), t.level(2).unwrap().into_owned());
    }
}
