//! Finite ultrametric spaces with exact rational distances.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::tree::{LevelDescriptor, TreeSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteUltrametricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<BigRational>>,
}

/// A triple with `d(x, y) > max(d(x, z), d(z, y))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

/// A self-map of the open ball `{p : d(center, p) < radius}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallIsometry {
    pub center: usize,
    pub radius: BigRational,
    pub mapping: Vec<(usize, usize)>,
}

/// Parses `"p/q"`, `"p"` or a decimal integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("`{s}` is not a rational number"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FiniteUltrametricSpace {
    /// Checks the shape and the metric axioms other than the strong triangle
    /// inequality, which [`FiniteUltrametricSpace::violations`] reports.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!("distance matrix must be {n}×{n}")));
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != n {
            return Err(Error::Malformed("point labels must be distinct".into()));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::Malformed(format!("d({0}, {0}) must be 0", labels[i])));
            }
            for j in 0..i {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::Malformed(format!(
                        "distance matrix is not symmetric at ({}, {})",
                        labels[i], labels[j]
                    )));
                }
                if !dist[i][j].is_positive() {
                    return Err(Error::Malformed(format!(
                        "d({}, {}) must be positive",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(FiniteUltrametricSpace { labels, dist })
    }

    /// Builds a space with points `0..n` and distance `f(i, j)` for `i < j`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> BigRational) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let mut dist = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                dist[i][j] = d.clone();
                dist[j][i] = d;
            }
        }
        Self::new(labels, dist)
    }

    /// Parses `{"points": [...], "dist": [["p/q", ...], ...]}`; entries may
    /// also be JSON integers.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let points = v
            .get("points")
            .and_then(|p| p.as_array())
            .ok_or_else(|| Error::Malformed("missing `points` array".into()))?;
        let labels = points
            .iter()
            .map(|p| match p {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::Malformed("point labels must be strings".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = v
            .get("dist")
            .and_then(|d| d.as_array())
            .ok_or_else(|| Error::Malformed("missing `dist` matrix".into()))?;
        let dist = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Malformed("`dist` rows must be arrays".into()))?
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::String(s) => parse_rational(s),
                        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
                        _ => Err(Error::Malformed(format!("distance `{x}` is not an exact rational"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, dist)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.labels,
            "dist": self.dist.iter().map(|r| r.iter().map(|d| d.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, i: usize, j: usize) -> &BigRational {
        &self.dist[i][j]
    }

    /// Every triple `(x, y, z)` with `x < y`, `z ∉ {x, y}` and
    /// `d(x, y) > max(d(x, z), d(z, y))`.
    pub fn violations(&self) -> Vec<Violation> {
        let n = self.len();
        let mut out = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                for z in 0..n {
                    if z != x && z != y && self.dist[x][y] > self.dist[x][z].clone().max(self.dist[z][y].clone()) {
                        out.push(Violation { x, y, z });
                    }
                }
            }
        }
        out
    }

    pub fn is_ultrametric(&self) -> bool {
        self.violations().is_empty()
    }

    fn ensure_ultrametric(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::NotUltrametric(v.len()))
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::Malformed(format!("point index {i} out of range")))
        }
    }

    /// The apex of an isosceles triple: the point `i` among `x, y, z` whose
    /// distances to the other two agree and dominate the remaining distance.
    /// For equilateral triples the smallest index is returned.
    pub fn isb_apex(&self, x: usize, y: usize, z: usize) -> Result<usize> {
        for &i in &[x, y, z] {
            self.check_index(i)?;
        }
        if x == y || y == z || x == z {
            return Err(Error::Malformed("the three points must be distinct".into()));
        }
        let d = &self.dist;
        let mut candidates: Vec<usize> = [(x, y, z), (y, x, z), (z, x, y)]
            .iter()
            .filter(|(i, j, k)| d[*i][*j] == d[*i][*k] && d[*j][*k] <= d[*i][*j])
            .map(|t| t.0)
            .collect();
        candidates.sort_unstable();
        candidates
            .first()
            .copied()
            .ok_or(Error::NotUltrametric(1))
    }

    pub fn open_ball(&self, center: usize, radius: &BigRational) -> Vec<usize> {
        (0..self.len()).filter(|&p| &self.dist[center][p] < radius).collect()
    }

    pub fn closed_ball(&self, center: usize, radius: &BigRational) -> Vec<usize> {
        (0..self.len()).filter(|&p| &self.dist[center][p] <= radius).collect()
    }

    pub fn is_isometry(&self, perm: &Permutation) -> bool {
        let n = self.len();
        perm.len() == n
            && (0..n).all(|i| (i + 1..n).all(|j| self.dist[i][j] == self.dist[perm.apply(i)][perm.apply(j)]))
    }

    /// Extends an isometry of an open ball onto itself by the identity outside
    /// the ball, and checks that the result is an isometry of the whole space.
    pub fn extend_ball_isometry(&self, iso: &BallIsometry) -> Result<Permutation> {
        self.ensure_ultrametric()?;
        self.check_index(iso.center)?;
        let ball = self.open_ball(iso.center, &iso.radius);
        let bad = |msg: String| Err(Error::InvalidBallIsometry(msg));
        let domain: BTreeSet<usize> = iso.mapping.iter().map(|m| m.0).collect();
        let range: BTreeSet<usize> = iso.mapping.iter().map(|m| m.1).collect();
        let ball_set: BTreeSet<usize> = ball.iter().copied().collect();
        if domain.len() != iso.mapping.len() {
            return bad("a point is mapped twice".into());
        }
        if domain != ball_set {
            return bad("the mapping's domain is not the ball".into());
        }
        if range != ball_set {
            return bad("the mapping does not send the ball onto itself".into());
        }
        for &(a, b) in &iso.mapping {
            for &(c, e) in &iso.mapping {
                if self.dist[a][c] != self.dist[b][e] {
                    return bad(format!(
                        "d({}, {}) ≠ d({}, {})",
                        self.labels[a], self.labels[c], self.labels[b], self.labels[e]
                    ));
                }
            }
        }
        let mut images: Vec<usize> = (0..self.len()).collect();
        for &(a, b) in &iso.mapping {
            images[a] = b;
        }
        let perm = Permutation::from_images(images)?;
        if !self.is_isometry(&perm) {
            return bad("the extension by the identity is not an isometry".into());
        }
        Ok(perm)
    }

    /// All isometries, in lexicographic order of image vectors (identity first).
    pub fn isometry_group(&self) -> Vec<Permutation> {
        let n = self.len();
        let profile: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut r = self.dist[i].clone();
                r.sort();
                r
            })
            .collect();
        let mut out = Vec::new();
        let mut images = Vec::with_capacity(n);
        let mut used = vec![false; n];
        self.extend_partial(&profile, &mut images, &mut used, &mut out);
        out
    }

    fn extend_partial(
        &self,
        profile: &[Vec<BigRational>],
        images: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Permutation>,
    ) {
        let i = images.len();
        if i == self.len() {
            out.push(Permutation::from_images(images.clone()).unwrap());
            return;
        }
        for y in 0..self.len() {
            if used[y] || profile[i] != profile[y] {
                continue;
            }
            if (0..i).all(|j| self.dist[i][j] == self.dist[y][images[j]]) {
                used[y] = true;
                images.push(y);
                self.extend_partial(profile, images, used, out);
                images.pop();
                used[y] = false;
            }
        }
    }

    /// Distinct positive distances, largest first.
    pub fn distinct_distances(&self) -> Vec<BigRational> {
        let set: BTreeSet<&BigRational> =
            self.dist.iter().flatten().filter(|d| d.is_positive()).collect();
        set.into_iter().rev().cloned().collect()
    }

    /// Dendrogram tree: with distinct distances `t_0 > t_1 > … > t_{k-1}`,
    /// the vertices at level `i < k` are the closed balls of radius `t_i`,
    /// level `k` holds the single points, and below that every vertex has one
    /// child. The end of point `p` is at distance `e^{-i}` from the end of `q`
    /// exactly when `d(p, q) = t_i`.
    pub fn dendrogram(&self) -> Result<Dendrogram> {
        if self.is_empty() {
            return Err(Error::EmptySpace);
        }
        self.ensure_ultrametric()?;
        let distances = self.distinct_distances();
        let n = self.len();
        let mut partitions: Vec<Vec<Vec<usize>>> = distances.iter().map(|t| self.partition_at(t)).collect();
        partitions.push((0..n).map(|p| vec![p]).collect());
        let k = distances.len();
        let mut prefix = Vec::with_capacity(k);
        for i in 0..k {
            let classes = partitions[i]
                .iter()
                .map(|block| {
                    partitions[i + 1]
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| block.contains(&b[0]))
                        .map(|(j, _)| j)
                        .collect()
                })
                .collect();
            prefix.push(LevelDescriptor::new(classes));
        }
        let cycle = vec![LevelDescriptor::new((0..n).map(|p| vec![p]).collect())];
        let tree = TreeSystem::eventually_periodic(prefix, cycle)?;
        let paths = (0..n)
            .map(|p| {
                (0..k)
                    .map(|i| {
                        let parent = partitions[i].iter().find(|b| b.contains(&p)).unwrap();
                        partitions[i + 1]
                            .iter()
                            .filter(|b| parent.contains(&b[0]))
                            .position(|b| b.contains(&p))
                            .unwrap()
                    })
                    .collect()
            })
            .collect();
        Ok(Dendrogram { tree, distances, blocks: partitions, paths })
    }

    /// Classes of `d ≤ t`, ordered by smallest member.
    fn partition_at(&self, t: &BigRational) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for p in 0..self.len() {
            match blocks.iter_mut().find(|b| &self.dist[b[0]][p] <= t) {
                Some(b) => b.push(p),
                None => blocks.push(vec![p]),
            }
        }
        blocks
    }
}

impl fmt::Display for FiniteUltrametricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} point(s): {}", self.len(), self.labels.join(", "))?;
        for (i, row) in self.dist.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            writeln!(f, "  {}: {}", self.labels[i], cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Dendrogram {
    pub tree: TreeSystem,
    /// `distances[i]` is the distance realized by a first disagreement at level `i`.
    pub distances: Vec<BigRational>,
    /// `blocks[i]` lists the points under each class at level `i`, for `i ≤ k`.
    pub blocks: Vec<Vec<Vec<usize>>>,
    /// Child positions from the root to each point's level-`k` vertex.
    pub paths: Vec<Vec<usize>>,
}

impl Dendrogram {
    /// Level at which the given distance is realized.
    pub fn level_of_distance(&self, d: &BigRational) -> Option<usize> {
        self.distances.iter().position(|t| t == d)
    }

    /// Depth at which all points have been separated.
    pub fn separation_level(&self) -> usize {
        self.distances.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collapse::collapse;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn space(json: &str) -> FiniteUltrametricSpace {
        FiniteUltrametricSpace::from_json(json).unwrap()
    }

    const THREE: &str = r#"{"points":["a","b","c"],"dist":[["0","1/9","1"],["1/9","0","1"],["1","1","0"]]}"#;

    #[test]
    fn validates_strong_triangle_inequality() {
        assert!(space(THREE).is_ultrametric());
        let bad = space(r#"{"points":["a","b","c"],"dist":[["0","1","1/3"],["1","0","1/2"],["1/3","1/2","0"]]}"#);
        assert_eq!(bad.violations(), vec![Violation { x: 0, y: 1, z: 2 }]);
    }

    #[test]
    fn structural_errors_are_not_violations() {
        let asym = FiniteUltrametricSpace::from_json(r#"{"points":["a","b"],"dist":[["0","1"],["2","0"]]}"#);
        assert!(matches!(asym, Err(Error::Malformed(_))));
        let ragged = FiniteUltrametricSpace::from_json(r#"{"points":["a","b"],"dist":[["0","1"]]}"#);
        assert!(matches!(ragged, Err(Error::Malformed(_))));
        let zero = FiniteUltrametricSpace::from_json(r#"{"points":["a","b"],"dist":[["0","0"],["0","0"]]}"#);
        assert!(matches!(zero, Err(Error::Malformed(_))));
    }

    #[test]
    fn apex() {
        let s = space(r#"{"points":["x","y","z"],"dist":[["0","1","1/3"],["1","0","1"],["1/3","1","0"]]}"#);
        assert_eq!(s.isb_apex(0, 1, 2).unwrap(), 1);
        let eq = FiniteUltrametricSpace::from_fn(3, |_, _| r(1, 1)).unwrap();
        assert_eq!(eq.isb_apex(2, 1, 0).unwrap(), 0);
    }

    #[test]
    fn ball_isometry_extension() {
        let s = space(THREE);
        let iso = BallIsometry { center: 0, radius: r(1, 2), mapping: vec![(0, 1), (1, 0)] };
        assert_eq!(s.extend_ball_isometry(&iso).unwrap().images(), &[1, 0, 2]);
        let wrong = BallIsometry { center: 0, radius: r(1, 2), mapping: vec![(0, 2), (1, 1)] };
        assert!(matches!(s.extend_ball_isometry(&wrong), Err(Error::InvalidBallIsometry(_))));
    }

    #[test]
    fn isometry_groups() {
        let s = space(THREE);
        let g = s.isometry_group();
        assert_eq!(g.len(), 2);
        assert!(g[0].is_identity());
        let eq = FiniteUltrametricSpace::from_fn(4, |_, _| r(1, 1)).unwrap();
        assert_eq!(eq.isometry_group().len(), 24);
    }

    #[test]
    fn dendrogram_of_three_points() {
        let s = space(THREE);
        let d = s.dendrogram().unwrap();
        assert_eq!(d.distances, vec![r(1, 1), r(1, 9)]);
        assert_eq!(d.blocks[1], vec![vec![0, 1], vec![2]]);
        assert_eq!(d.tree.level_profile(4).unwrap().iter().map(|x| x.to_string()).collect::<Vec<_>>(), vec!["1", "2", "3", "3", "3"]);
        assert_eq!(d.paths, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn dendrogram_of_single_point_is_a_ray() {
        let s = FiniteUltrametricSpace::from_fn(1, |_, _| r(1, 1)).unwrap();
        let d = s.dendrogram().unwrap();
        assert_eq!(collapse(&d.tree).unwrap().system(), &TreeSystem::ary(1));
        let empty = FiniteUltrametricSpace::from_fn(0, |_, _| r(1, 1)).unwrap();
        assert!(matches!(empty.dendrogram(), Err(Error::EmptySpace)));
    }

    #[test]
    fn equidistant_points_give_ended_tree() {
        let s = FiniteUltrametricSpace::from_fn(4, |_, _| r(1, 1)).unwrap();
        let d = s.dendrogram().unwrap();
        assert_eq!(collapse(&d.tree).unwrap().system(), &TreeSystem::ended(4));
    }
}
