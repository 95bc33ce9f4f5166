//! End points, germs of local isometries and similarities, the path groupoid
//! of the Bratteli diagram, and the map `κ_*` between them.
//!
//! On a locally rigid tree, a ball around a vertex at level `≥ ε` has at most
//! one isometry onto any other such ball, so a germ is just a pair of
//! vertices of the same isometry type.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bratteli::BratteliDiagram;
use crate::collapse::{collapse, Collapse};
use crate::error::{Error, Result};
use crate::periodic::{self, lcm};
use crate::rigidity::{is_locally_rigid, RigidityStatus};
use crate::tree::{TreeSystem, PROCEDURAL_CHECK_DEPTH};

/// An end of the tree: an eventually periodic sequence of child positions.
#[derive(Debug, Clone)]
pub struct EndPoint {
    tree: Arc<TreeSystem>,
    prefix: Vec<usize>,
    cycle: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Zero,
    /// `e^{-t}` where `t` is the first index at which the paths disagree.
    Level(usize),
}

impl Distance {
    fn key(self) -> (u8, std::cmp::Reverse<usize>) {
        match self {
            Distance::Zero => (0, std::cmp::Reverse(0)),
            Distance::Level(t) => (1, std::cmp::Reverse(t)),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by actual distance: `Zero < Level(5) < Level(0)`.
impl Ord for Distance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Zero => write!(f, "0"),
            Distance::Level(t) => write!(f, "e^-{t}"),
        }
    }
}

fn same_tree(a: &Arc<TreeSystem>, b: &Arc<TreeSystem>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Level at which an eventually periodic tree starts repeating, plus its period,
/// or `None` for truncations and procedural systems.
fn tree_period(ts: &TreeSystem) -> Option<(usize, usize)> {
    match ts {
        TreeSystem::EventuallyPeriodic { prefix, cycle } => Some((prefix.len(), cycle.len())),
        _ => None,
    }
}

fn tree_phase(ts: &TreeSystem, level: usize) -> usize {
    match tree_period(ts) {
        Some((p, c)) => periodic::position(p, c, level).unwrap(),
        None => level,
    }
}

fn sequence_phase(prefix_len: usize, cycle_len: usize, i: usize) -> Option<usize> {
    (i >= prefix_len).then(|| (i - prefix_len) % cycle_len)
}

impl EndPoint {
    /// Checks every position against the child counts along the path.
    pub fn new(tree: Arc<TreeSystem>, prefix: Vec<usize>, cycle: Vec<usize>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidPath("an end point needs a nonempty periodic part".into()));
        }
        tree.check()?;
        let x = EndPoint { tree, prefix, cycle };
        let limit = match &*x.tree {
            TreeSystem::Explicit(levels) => Some(levels.len()),
            TreeSystem::Procedural(_) => Some(PROCEDURAL_CHECK_DEPTH),
            TreeSystem::EventuallyPeriodic { .. } => None,
        };
        let mut seen = std::collections::HashSet::new();
        let mut class = 0;
        let mut i = 0;
        loop {
            if limit == Some(i) {
                break;
            }
            if let Some(ph) = sequence_phase(x.prefix.len(), x.cycle.len(), i) {
                if !seen.insert((tree_phase(&x.tree, i), class, ph)) {
                    break;
                }
            }
            let desc = x.tree.level(i).unwrap();
            let pos = x.position(i);
            class = *desc.children(class).get(pos).ok_or_else(|| {
                Error::InvalidPath(format!("position {pos} at level {i}, but the vertex has {} children", desc.children(class).len()))
            })?;
            i += 1;
        }
        Ok(x)
    }

    /// The end whose vertices at levels `1, 2, …` have the given classes.
    /// For a tree built from a subshift these are the symbols.
    pub fn from_labels(tree: Arc<TreeSystem>, prefix: &[usize], cycle: &[usize]) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidPath("an end point needs a nonempty periodic part".into()));
        }
        if tree_period(&tree).is_none() {
            return Err(Error::NotEventuallyPeriodic);
        }
        let label = |i: usize| if i < prefix.len() { prefix[i] } else { cycle[(i - prefix.len()) % cycle.len()] };
        let mut positions = Vec::new();
        let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut class = 0;
        let mut i = 0;
        loop {
            if let Some(ph) = sequence_phase(prefix.len(), cycle.len(), i) {
                if let Some(&start) = seen.get(&(tree_phase(&tree, i), class, ph)) {
                    let cyc = positions.split_off(start);
                    let (prefix, cycle) = periodic::minimize(positions, cyc);
                    return Ok(EndPoint { tree, prefix, cycle });
                }
                seen.insert((tree_phase(&tree, i), class, ph), i);
            }
            let desc = tree.level(i).unwrap();
            let want = label(i);
            let pos = desc.children(class).iter().position(|&c| c == want).ok_or_else(|| {
                Error::InvalidPath(format!("no child of class {want} below level {i}"))
            })?;
            positions.push(pos);
            class = want;
            i += 1;
        }
    }

    pub fn tree(&self) -> &Arc<TreeSystem> {
        &self.tree
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    pub fn position(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The vertex at level `n` on this path.
    pub fn truncate(&self, n: usize) -> Vec<usize> {
        (0..n).map(|i| self.position(i)).collect()
    }

    /// Classes of the vertices at levels `0..=n`.
    pub fn classes(&self, n: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut class = 0;
        out.push(class);
        for i in 0..n {
            let desc = self.tree.level(i).ok_or(Error::BeyondDepth {
                requested: i,
                available: self.tree.described_levels().unwrap_or(0),
            })?;
            class = *desc
                .children(class)
                .get(self.position(i))
                .ok_or_else(|| Error::InvalidPath(format!("position out of range at level {i}")))?;
            out.push(class);
        }
        Ok(out)
    }

    pub fn distance(&self, other: &EndPoint) -> Result<Distance> {
        if !same_tree(&self.tree, &other.tree) {
            return Err(Error::DifferentTrees);
        }
        let span = self.prefix.len().max(other.prefix.len()) + lcm(self.cycle.len(), other.cycle.len());
        Ok((0..span).find(|&i| self.position(i) != other.position(i)).map_or(Distance::Zero, Distance::Level))
    }
}

impl fmt::Display for EndPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.prefix.iter().map(ToString::to_string).collect();
        let c: Vec<String> = self.cycle.iter().map(ToString::to_string).collect();
        write!(f, "{}({})^∞", p.join(""), c.join(""))
    }
}

/// The isometry `z ↦ to ++ z[from.len()..]` from the ball below `from` onto the ball below `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixSwap {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
}

impl PrefixSwap {
    pub fn apply(&self, path: &[usize]) -> Option<Vec<usize>> {
        path.starts_with(&self.from).then(|| {
            let mut out = self.to.clone();
            out.extend_from_slice(&path[self.from.len()..]);
            out
        })
    }

    /// Checks on the depth-`depth` truncation that the swap maps the ball below
    /// `from` bijectively onto the ball below `to`, stays inside the tree, and
    /// preserves the first-disagreement index of every pair.
    pub fn verify(&self, ts: &TreeSystem, depth: usize) -> bool {
        if self.from.len() != self.to.len() || depth < self.from.len() {
            return false;
        }
        let (Ok(dom), Ok(rng)) = (subtree_paths(ts, &self.from, depth), subtree_paths(ts, &self.to, depth)) else {
            return false;
        };
        let images: Vec<Vec<usize>> = dom.iter().map(|z| self.apply(z).unwrap()).collect();
        let mut sorted = images.clone();
        sorted.sort();
        sorted.dedup();
        let mut target = rng.clone();
        target.sort();
        if sorted != target || images.iter().any(|z| ts.class_of(z).is_err()) {
            return false;
        }
        let first_diff = |a: &[usize], b: &[usize]| a.iter().zip(b).position(|(x, y)| x != y);
        for i in 0..dom.len() {
            for j in i + 1..dom.len() {
                if first_diff(&dom[i], &dom[j]) != first_diff(&images[i], &images[j]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Every path of length `depth` extending `prefix`.
pub fn subtree_paths(ts: &TreeSystem, prefix: &[usize], depth: usize) -> Result<Vec<Vec<usize>>> {
    let mut current = vec![(prefix.to_vec(), ts.class_of(prefix)?)];
    for i in prefix.len()..depth {
        let desc = ts.level(i).ok_or(Error::BeyondDepth { requested: i, available: ts.described_levels().unwrap_or(0) })?;
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
    Ok(current.into_iter().map(|(p, _)| p).collect())
}

/// Minimal `N` with `x_i = y_i` for all `i ≥ N`, where `x_i` is the class of
/// the level-`(i+1)` vertex on `x` (the `i`-th symbol for a subshift).
pub fn tail_equivalent(x: &EndPoint, y: &EndPoint) -> Result<Option<usize>> {
    if !same_tree(&x.tree, &y.tree) {
        return Err(Error::DifferentTrees);
    }
    if tree_period(&x.tree).is_none() {
        return Err(Error::NotEventuallyPeriodic);
    }
    let ts = &x.tree;
    let mut seen: HashMap<(usize, usize, usize, usize, usize), usize> = HashMap::new();
    let mut differs: Vec<bool> = Vec::new();
    let (mut cx, mut cy) = (0usize, 0usize);
    let mut i = 0;
    let start = loop {
        if let (Some(px), Some(py)) =
            (sequence_phase(x.prefix.len(), x.cycle.len(), i), sequence_phase(y.prefix.len(), y.cycle.len(), i))
        {
            let key = (tree_phase(ts, i), cx, cy, px, py);
            if let Some(&j) = seen.get(&key) {
                break j;
            }
            seen.insert(key, i);
        }
        let desc = ts.level(i).unwrap();
        cx = desc.children(cx)[x.position(i)];
        cy = desc.children(cy)[y.position(i)];
        differs.push(cx != cy);
        i += 1;
    };
    if differs[start..].iter().any(|&d| d) {
        return Ok(None);
    }
    Ok(Some(differs[..start].iter().rposition(|&d| d).map_or(0, |k| k + 1)))
}

/// The prefix swap carrying `x` to `y` when they are tail equivalent from `N` on:
/// it exchanges the vertices at level `N + 1`, which have the same class.
pub fn isometry_witness(x: &EndPoint, y: &EndPoint) -> Result<Option<PrefixSwap>> {
    Ok(tail_equivalent(x, y)?.map(|n| PrefixSwap { from: x.truncate(n + 1), to: y.truncate(n + 1) }))
}

/// The germ of the unique ball map sending the ball below `source` onto the ball below `target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Germ {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
}

impl Germ {
    /// `n - m` for vertices at levels `n` and `m`; the similarity modulus is `e^{n-m}`.
    pub fn shift(&self) -> isize {
        self.source.len() as isize - self.target.len() as isize
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
    }
}

impl fmt::Display for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}", self.source, self.target)
    }
}

/// An edge of the Bratteli diagram: the `index`-th of the parallel edges from
/// `source` at `level` to `target` at `level + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DiagramEdge {
    pub level: usize,
    pub source: usize,
    pub target: usize,
    pub index: usize,
}

/// Two finite diagram paths ending at vertices of the same isometry type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PathPair {
    pub source: Vec<DiagramEdge>,
    pub target: Vec<DiagramEdge>,
}

impl PathPair {
    pub fn inverse(&self) -> PathPair {
        PathPair { source: self.target.clone(), target: self.source.clone() }
    }

    pub fn is_diagonal(&self) -> bool {
        self.source == self.target
    }

    /// `self ∘ other`: `other` first. Nested ranges and domains are matched by
    /// extending a level-preserving pair along common edges.
    pub fn compose(&self, other: &PathPair) -> Result<PathPair> {
        let (mid_a, mid_b) = (&other.target, &self.source);
        if mid_a == mid_b {
            return Ok(PathPair { source: other.source.clone(), target: self.target.clone() });
        }
        if mid_b.starts_with(mid_a) && other.source.len() == other.target.len() {
            let mut source = other.source.clone();
            source.extend_from_slice(&mid_b[mid_a.len()..]);
            return Ok(PathPair { source, target: self.target.clone() });
        }
        if mid_a.starts_with(mid_b) && self.source.len() == self.target.len() {
            let mut target = self.target.clone();
            target.extend_from_slice(&mid_a[mid_b.len()..]);
            return Ok(PathPair { source: other.source.clone(), target });
        }
        Err(Error::NotComposable)
    }
}

/// Whether the balls below `w1` and `w2` are isometric, up to a rescaling when
/// the levels differ.
pub fn germ_exists(ts: &TreeSystem, w1: &[usize], w2: &[usize]) -> Result<bool> {
    if !ts.is_eventually_periodic() && w1.len() != w2.len() {
        return Err(Error::Incompatible("a truncation only compares vertices at one level".into()));
    }
    let c = collapse(ts)?;
    Ok(c.isometry_type_of(ts, w1)? == c.isometry_type_of(ts, w2)?)
}

/// Brute-force count of rooted isomorphisms between the subtrees below `w1`
/// and `w2`, cut off `below` levels further down, whose leaves must match in
/// isometry type (so that each one extends to an isometry of the full balls).
pub fn count_ball_isometries(ts: &TreeSystem, w1: &[usize], w2: &[usize], below: usize) -> Result<BigUint> {
    let c = collapse(ts)?;
    let mut memo: HashMap<(Vec<usize>, Vec<usize>), BigUint> = HashMap::new();
    count_iso(ts, &c, w1.to_vec(), w2.to_vec(), below, &mut memo)
}

fn count_iso(
    ts: &TreeSystem,
    c: &Collapse,
    a: Vec<usize>,
    b: Vec<usize>,
    below: usize,
    memo: &mut HashMap<(Vec<usize>, Vec<usize>), BigUint>,
) -> Result<BigUint> {
    if below == 0 {
        let same = c.isometry_type_of(ts, &a)? == c.isometry_type_of(ts, &b)?;
        return Ok(if same { BigUint::one() } else { BigUint::zero() });
    }
    if let Some(v) = memo.get(&(a.clone(), b.clone())) {
        return Ok(v.clone());
    }
    let (na, nb) = (ts.child_count(&a)?, ts.child_count(&b)?);
    if na != nb {
        return Ok(BigUint::zero());
    }
    let mut table = vec![vec![BigUint::zero(); na]; na];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut ca = a.clone();
            ca.push(i);
            let mut cb = b.clone();
            cb.push(j);
            *cell = count_iso(ts, c, ca, cb, below - 1, memo)?;
        }
    }
    // permanent of the table: every bijection between the children
    fn permanent(t: &[Vec<BigUint>], row: usize, used: &mut [bool]) -> BigUint {
        if row == t.len() {
            return BigUint::one();
        }
        let mut total = BigUint::zero();
        for j in 0..t.len() {
            if !used[j] && !t[row][j].is_zero() {
                used[j] = true;
                total += &t[row][j] * permanent(t, row + 1, used);
                used[j] = false;
            }
        }
        total
    }
    let total = permanent(&table, 0, &mut vec![false; na]);
    memo.insert((a, b), total.clone());
    Ok(total)
}

/// Germs of a locally rigid eventually periodic tree beyond its rigidity level.
#[derive(Debug, Clone)]
pub struct GermGroupoid {
    tree: Arc<TreeSystem>,
    collapse: Collapse,
    epsilon: usize,
    diagram: BratteliDiagram,
}

impl GermGroupoid {
    pub fn new(tree: Arc<TreeSystem>) -> Result<Self> {
        let verdict = is_locally_rigid(&tree)?;
        let epsilon = match verdict.status {
            RigidityStatus::LocallyRigid => verdict.epsilon_level.unwrap(),
            RigidityStatus::NotLocallyRigid => return Err(Error::NotLocallyRigid),
            RigidityStatus::UnknownBeyondDepth(_) => return Err(Error::NotEventuallyPeriodic),
        };
        let collapse = collapse(&tree)?;
        let diagram = BratteliDiagram::from_tree(&tree)?;
        Ok(GermGroupoid { tree, collapse, epsilon, diagram })
    }

    pub fn tree(&self) -> &Arc<TreeSystem> {
        &self.tree
    }

    pub fn epsilon_level(&self) -> usize {
        self.epsilon
    }

    pub fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    pub fn isometry_type(&self, w: &[usize]) -> Result<usize> {
        self.collapse.isometry_type_of(&self.tree, w)
    }

    fn collapsed_class(&self, w: &[usize]) -> Result<usize> {
        let class = self.tree.class_of(w)?;
        Ok(self.collapse.class_map(w.len(), class).expect("vertices have reachable classes"))
    }

    fn check_level(&self, w: &[usize]) -> Result<()> {
        if w.len() < self.epsilon {
            return Err(Error::AboveRigidityLevel { level: w.len(), epsilon: self.epsilon });
        }
        Ok(())
    }

    pub fn germ(&self, source: &[usize], target: &[usize]) -> Result<Germ> {
        self.check_level(source)?;
        self.check_level(target)?;
        if self.isometry_type(source)? != self.isometry_type(target)? {
            return Err(Error::Incompatible(format!("{source:?} and {target:?} span non-isometric balls")));
        }
        Ok(Germ { source: source.to_vec(), target: target.to_vec() })
    }

    pub fn identity(&self, w: &[usize]) -> Result<Germ> {
        self.germ(w, w)
    }

    pub fn inverse(&self, g: &Germ) -> Germ {
        Germ { source: g.target.clone(), target: g.source.clone() }
    }

    /// Image of the descendant `from ++ suffix` under the unique ball map `from → to`.
    pub fn transport(&self, from: &[usize], to: &[usize], suffix: &[usize]) -> Result<Vec<usize>> {
        let mut a = from.to_vec();
        let mut b = to.to_vec();
        for &p in suffix {
            a.push(p);
            let want = self.isometry_type(&a)?;
            let n = self.tree.child_count(&b)?;
            let q = (0..n)
                .find(|&q| {
                    let mut cand = b.clone();
                    cand.push(q);
                    self.isometry_type(&cand).ok() == Some(want)
                })
                .ok_or_else(|| Error::Incompatible("balls are not isometric".into()))?;
            b.push(q);
        }
        Ok(b)
    }

    /// Image of a vertex or finite path inside the domain ball of `g`.
    pub fn apply(&self, g: &Germ, path: &[usize]) -> Result<Vec<usize>> {
        if !path.starts_with(&g.source) {
            return Err(Error::InvalidPath(format!("{path:?} is outside the ball below {:?}", g.source)));
        }
        self.transport(&g.source, &g.target, &path[g.source.len()..])
    }

    /// `g2 ∘ g1`, restricting one of them when the range of `g1` and the
    /// domain of `g2` are nested balls.
    pub fn compose(&self, g2: &Germ, g1: &Germ) -> Result<Germ> {
        let (b, c) = (&g1.target, &g2.source);
        if b == c {
            return Ok(Germ { source: g1.source.clone(), target: g2.target.clone() });
        }
        if c.starts_with(b) {
            let source = self.transport(b, &g1.source, &c[b.len()..])?;
            return Ok(Germ { source, target: g2.target.clone() });
        }
        if b.starts_with(c) {
            let target = self.transport(c, &g2.target, &b[c.len()..])?;
            return Ok(Germ { source: g1.source.clone(), target });
        }
        Err(Error::NotComposable)
    }

    /// All germs between vertices at `level`: `n_c²` for each class with `n_c` vertices.
    pub fn enumerate_germs(&self, level: usize) -> Result<Vec<Germ>> {
        if level < self.epsilon {
            return Err(Error::AboveRigidityLevel { level, epsilon: self.epsilon });
        }
        let mut by_type: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for (path, _) in self.tree.vertices_at(level)? {
            by_type.entry(self.isometry_type(&path)?).or_default().push(path);
        }
        let mut out = Vec::new();
        for group in by_type.values() {
            for a in group {
                for b in group {
                    out.push(Germ { source: a.clone(), target: b.clone() });
                }
            }
        }
        Ok(out)
    }

    /// The diagram path of a tree vertex: each tree edge becomes the
    /// occurrence of its class among the same-class siblings.
    pub fn kappa(&self, w: &[usize]) -> Result<Vec<DiagramEdge>> {
        let mut out = Vec::with_capacity(w.len());
        let mut path = Vec::with_capacity(w.len());
        for (level, &p) in w.iter().enumerate() {
            let source = self.collapsed_class(&path)?;
            let n = self.tree.child_count(&path)?;
            if p >= n {
                return Err(Error::InvalidPath(format!("position {p} at level {level}")));
            }
            let classes: Vec<usize> = (0..=p)
                .map(|q| {
                    let mut c = path.clone();
                    c.push(q);
                    self.collapsed_class(&c)
                })
                .collect::<Result<_>>()?;
            let target = classes[p];
            let index = classes[..p].iter().filter(|&&k| k == target).count();
            out.push(DiagramEdge { level, source, target, index });
            path.push(p);
        }
        Ok(out)
    }

    pub fn kappa_inv(&self, edges: &[DiagramEdge]) -> Result<Vec<usize>> {
        let mut path = Vec::with_capacity(edges.len());
        for (level, e) in edges.iter().enumerate() {
            if e.level != level || self.collapsed_class(&path)? != e.source {
                return Err(Error::InvalidPath(format!("edge {e:?} does not continue the path")));
            }
            let n = self.tree.child_count(&path)?;
            let mut seen = 0;
            let mut found = None;
            for q in 0..n {
                let mut c = path.clone();
                c.push(q);
                if self.collapsed_class(&c)? == e.target {
                    if seen == e.index {
                        found = Some(q);
                        break;
                    }
                    seen += 1;
                }
            }
            path.push(found.ok_or_else(|| Error::InvalidPath(format!("edge {e:?} is not in the diagram")))?);
        }
        Ok(path)
    }

    pub fn kappa_star(&self, g: &Germ) -> Result<PathPair> {
        self.germ(&g.source, &g.target)?;
        Ok(PathPair { source: self.kappa(&g.source)?, target: self.kappa(&g.target)? })
    }

    pub fn kappa_star_inv(&self, pp: &PathPair) -> Result<Germ> {
        self.germ(&self.kappa_inv(&pp.source)?, &self.kappa_inv(&pp.target)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> Arc<TreeSystem> {
        Arc::new(TreeSystem::fibonacci())
    }

    #[test]
    fn distances() {
        let t = fib();
        let x = EndPoint::new(t.clone(), vec![], vec![0]).unwrap();
        let y = EndPoint::new(t.clone(), vec![0, 1], vec![0]).unwrap();
        assert_eq!(x.distance(&y).unwrap(), Distance::Level(1));
        assert_eq!(x.distance(&x).unwrap(), Distance::Zero);
        let x2 = EndPoint::new(t, vec![0, 0], vec![0, 0]).unwrap();
        assert_eq!(x.distance(&x2).unwrap(), Distance::Zero);
        let shift = Arc::new(TreeSystem::from_sft(&[vec![1, 1], vec![1, 1]]).unwrap());
        let a = EndPoint::from_labels(shift.clone(), &[], &[0]).unwrap();
        let b = EndPoint::from_labels(shift, &[1], &[0]).unwrap();
        assert_eq!(a.distance(&b).unwrap(), Distance::Level(0));
        assert!(Distance::Zero < Distance::Level(3) && Distance::Level(3) < Distance::Level(1));
    }

    #[test]
    fn illegal_paths_are_rejected() {
        // after a class-1 vertex only position 0 exists
        assert!(EndPoint::new(fib(), vec![1, 1], vec![0]).is_err());
        assert!(EndPoint::new(fib(), vec![], vec![1]).is_err());
        assert!(EndPoint::new(fib(), vec![1], vec![0]).is_ok());
    }

    #[test]
    fn tail_equivalence_on_the_full_shift() {
        let shift = Arc::new(TreeSystem::from_sft(&[vec![1, 1], vec![1, 1]]).unwrap());
        let p = |pre: &[usize], cyc: &[usize]| EndPoint::from_labels(shift.clone(), pre, cyc).unwrap();
        assert_eq!(tail_equivalent(&p(&[], &[0]), &p(&[], &[0])).unwrap(), Some(0));
        assert_eq!(tail_equivalent(&p(&[], &[0]), &p(&[1], &[0])).unwrap(), Some(1));
        assert_eq!(tail_equivalent(&p(&[], &[0, 1]), &p(&[], &[1, 0])).unwrap(), None);
        let w = isometry_witness(&p(&[], &[0]), &p(&[1], &[0])).unwrap().unwrap();
        assert_eq!((w.from.clone(), w.to.clone()), (vec![0, 0], vec![1, 0]));
        assert!(w.verify(&shift, 8));
    }

    #[test]
    fn matching_classes_without_tail_equivalence() {
        let t = Arc::new(TreeSystem::from_sft(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 0, 0]]).unwrap());
        let x = EndPoint::from_labels(t.clone(), &[], &[0]).unwrap();
        let y = EndPoint::from_labels(t.clone(), &[], &[1]).unwrap();
        assert_eq!(tail_equivalent(&x, &y).unwrap(), None);
        assert!(germ_exists(&t, &x.truncate(1), &y.truncate(1)).unwrap());
        assert!(!germ_exists(&t, &[0], &[2]).unwrap());
    }

    #[test]
    fn fibonacci_germs() {
        let g = GermGroupoid::new(fib()).unwrap();
        let germs = g.enumerate_germs(2).unwrap();
        assert_eq!(germs.len(), 5);
        let a = g.germ(&[0, 0], &[1, 0]).unwrap();
        let id = g.identity(&[1, 0]).unwrap();
        assert_eq!(g.compose(&id, &a).unwrap(), a);
        assert_eq!(g.inverse(&g.inverse(&a)), a);
        assert!(g.germ(&[0, 0], &[0, 1]).is_err());
        // composing with a deeper germ restricts the first one
        let deep = g.germ(&[1, 0, 1], &[0, 0, 1]).unwrap();
        let c = g.compose(&deep, &a).unwrap();
        assert_eq!(c.source, vec![0, 0, 1]);
        assert_eq!(c.target, vec![0, 0, 1]);
    }

    #[test]
    fn similarity_germs_cross_levels() {
        let g = GermGroupoid::new(fib()).unwrap();
        // the root and the vertex 00 span similar balls
        let s = g.germ(&[0, 0], &[]).unwrap();
        assert_eq!(s.shift(), 2);
        assert_eq!(g.apply(&s, &[0, 0, 1, 0]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn kappa_round_trip() {
        let g = GermGroupoid::new(fib()).unwrap();
        for level in 0..=4 {
            for germ in g.enumerate_germs(level).unwrap() {
                let pp = g.kappa_star(&germ).unwrap();
                assert_eq!(g.kappa_star_inv(&pp).unwrap(), germ);
                assert_eq!(germ.is_identity(), pp.is_diagonal());
            }
        }
    }

    #[test]
    fn non_rigid_trees_have_no_germ_groupoid() {
        assert!(matches!(GermGroupoid::new(Arc::new(TreeSystem::cantor())), Err(Error::NotLocallyRigid)));
    }

    #[test]
    fn brute_force_ball_isometries() {
        let t = TreeSystem::fibonacci();
        assert_eq!(count_ball_isometries(&t, &[0, 0], &[1, 0], 5).unwrap(), BigUint::one());
        assert!(count_ball_isometries(&t, &[0, 0], &[0, 1], 5).unwrap().is_zero());
        let c = TreeSystem::cantor();
        assert_eq!(count_ball_isometries(&c, &[0], &[1], 2).unwrap(), BigUint::from(8u32));
    }
}
