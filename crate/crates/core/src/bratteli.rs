//! Bratteli diagrams presented by their incidence matrices.
//!
//! `A_i` is an `m_{i+1} × m_i` matrix whose entry `(k, l)` counts the edges
//! from vertex `l` at level `i` to vertex `k` at level `i + 1`; `m_0 = 1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::collapse::collapse;
use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::periodic::{self, LevelTable};
use crate::perm::Permutation;
use crate::tree::{LevelDescriptor, TreeSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BratteliDiagram {
    /// Finitely many levels: `matrices.len() + 1` vertex levels.
    Explicit(Vec<IntMatrix>),
    EventuallyPeriodic { prefix: Vec<IntMatrix>, cycle: Vec<IntMatrix> },
}

/// Levels kept after telescoping, starting with 0 and strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cuts {
    Explicit(Vec<usize>),
    /// The listed levels, then repeatedly adding `gaps` in turn to the last one.
    Periodic { prefix: Vec<usize>, gaps: Vec<usize> },
}

impl Cuts {
    /// `0, k, 2k, …`
    pub fn every(k: usize) -> Self {
        Cuts::Periodic { prefix: vec![0], gaps: vec![k] }
    }

    /// `0, s, s + k, s + 2k, …`
    pub fn offset_every(s: usize, k: usize) -> Self {
        if s == 0 || s == k {
            Self::every(k)
        } else {
            Cuts::Periodic { prefix: vec![0, s], gaps: vec![k] }
        }
    }

    pub fn identity() -> Self {
        Self::every(1)
    }

    pub fn validate(&self) -> Result<()> {
        let list = match self {
            Cuts::Explicit(l) => l,
            Cuts::Periodic { prefix, gaps } => {
                if gaps.is_empty() || gaps.contains(&0) {
                    return Err(Error::InvalidCuts("gaps must be positive and nonempty".into()));
                }
                prefix
            }
        };
        if list.first() != Some(&0) {
            return Err(Error::InvalidCuts("cuts must start at level 0".into()));
        }
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCuts("cuts must be strictly increasing".into()));
        }
        Ok(())
    }

    /// The `n`-th kept level, if there is one.
    pub fn at(&self, n: usize) -> Option<usize> {
        match self {
            Cuts::Explicit(l) => l.get(n).copied(),
            Cuts::Periodic { prefix, gaps } => {
                if n < prefix.len() {
                    return Some(prefix[n]);
                }
                let extra = n + 1 - prefix.len();
                let full: usize = gaps.iter().sum();
                let rounds = extra / gaps.len();
                let rest: usize = gaps[..extra % gaps.len()].iter().sum();
                Some(prefix[prefix.len() - 1] + rounds * full + rest)
            }
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            Cuts::Explicit(l) => Some(l.len()),
            Cuts::Periodic { .. } => None,
        }
    }

    /// Phase of the `n`-th cut inside the periodic gap pattern, once past the prefix.
    fn phase(&self, n: usize) -> Option<usize> {
        match self {
            Cuts::Explicit(_) => None,
            Cuts::Periodic { prefix, gaps } => (n + 1 >= prefix.len()).then(|| (n + 1 - prefix.len()) % gaps.len()),
        }
    }

    /// Cuts `n ↦ self(inner(n))`: telescoping by `self` and then by `inner`
    /// is telescoping by the composite.
    pub fn compose(&self, inner: &Cuts) -> Result<Cuts> {
        self.validate()?;
        inner.validate()?;
        match (self, inner) {
            (Cuts::Periodic { prefix: p1, gaps: g1 }, Cuts::Periodic { .. }) => {
                let mut levels = Vec::new();
                let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
                let mut n = 0;
                loop {
                    let m = inner.at(n).unwrap();
                    let outer_phase = (m + 1 >= p1.len()).then(|| (m + 1 - p1.len()) % g1.len());
                    if let (Some(a), Some(b)) = (inner.phase(n), outer_phase) {
                        if let Some(&start) = seen.get(&(a, b)) {
                            levels.push(self.at(m).unwrap());
                            let gaps = levels.windows(2).skip(start).map(|w: &[usize]| w[1] - w[0]).collect();
                            levels.truncate(start + 1);
                            return Ok(Cuts::Periodic { prefix: levels, gaps });
                        }
                        seen.insert((a, b), n);
                    }
                    levels.push(self.at(m).unwrap());
                    n += 1;
                }
            }
            _ => {
                let count = inner.len().unwrap_or(0);
                let mut out = Vec::new();
                for n in 0..count {
                    let m = inner.at(n).unwrap();
                    out.push(self.at(m).ok_or_else(|| {
                        Error::InvalidCuts(format!("outer cuts have no entry {m}"))
                    })?);
                }
                if count == 0 {
                    return Err(Error::InvalidCuts("an explicit list is needed with explicit cuts".into()));
                }
                Ok(Cuts::Explicit(out))
            }
        }
    }
}

impl std::fmt::Display for Cuts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cuts::Explicit(l) => write!(f, "{l:?}"),
            Cuts::Periodic { prefix, gaps } => write!(f, "{prefix:?} then gaps {gaps:?} repeated"),
        }
    }
}

/// Per-level vertex permutations `π_i` with `B_i[π_{i+1}(k)][π_i(l)] = A_i[k][l]`.
pub type LevelPermutations = LevelTable<Permutation>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    /// `exact` is false when only the first `depth` levels were compared.
    Isomorphic { exact: bool, witness: LevelPermutations },
    NotIsomorphic { level: usize },
    /// The search exceeded its node budget.
    Undecided,
}

impl IsoVerdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsoVerdict::Isomorphic { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub cuts_left: Cuts,
    pub cuts_right: Cuts,
    pub isomorphism: LevelPermutations,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent(EquivalenceWitness),
    /// Nothing found within the bound; this is not a proof of inequivalence.
    Unknown { pairs_tried: usize },
}

const ISO_NODE_BUDGET: usize = 200_000;

impl BratteliDiagram {
    pub fn eventually_periodic(prefix: Vec<IntMatrix>, cycle: Vec<IntMatrix>) -> Result<Self> {
        let d = BratteliDiagram::EventuallyPeriodic { prefix, cycle };
        d.validate()?;
        Ok(d)
    }

    pub fn explicit(matrices: Vec<IntMatrix>) -> Result<Self> {
        let d = BratteliDiagram::Explicit(matrices);
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let (all, wrap): (Vec<&IntMatrix>, Option<(usize, usize)>) = match self {
            BratteliDiagram::Explicit(m) => (m.iter().collect(), None),
            BratteliDiagram::EventuallyPeriodic { prefix, cycle } => {
                if cycle.is_empty() {
                    return Err(Error::InvalidDiagram("the periodic part is empty".into()));
                }
                (prefix.iter().chain(cycle).collect(), Some((prefix.len(), prefix.len() + cycle.len() - 1)))
            }
        };
        if let Some(first) = all.first() {
            if first.cols() != 1 {
                return Err(Error::InvalidDiagram("level 0 must have exactly one vertex".into()));
            }
        }
        for (i, m) in all.iter().enumerate() {
            if !m.is_nonnegative() {
                return Err(Error::InvalidDiagram(format!("negative entry in matrix {i}")));
            }
            if m.rows() == 0 || m.cols() == 0 || m.has_zero_row() || m.has_zero_column() {
                return Err(Error::InvalidDiagram(format!("matrix {i} has a zero row or column")));
            }
            if i + 1 < all.len() && all[i + 1].cols() != m.rows() {
                return Err(Error::InvalidDiagram(format!("matrices {i} and {} do not chain", i + 1)));
            }
        }
        if let Some((start, last)) = wrap {
            if all[last].rows() != all[start].cols() {
                return Err(Error::InvalidDiagram("the periodic part does not close up".into()));
            }
        }
        Ok(())
    }

    /// Incidence matrices of the collapsed tree: `a_{kl}` counts class `k`
    /// among the children of class `l`.
    pub fn from_tree(ts: &TreeSystem) -> Result<Self> {
        let collapsed = collapse(ts)?.into_system();
        let to_matrix = |level: &LevelDescriptor, rows: usize| {
            let mut m = IntMatrix::zeros(rows, level.len());
            for (l, class) in level.classes.iter().enumerate() {
                for &k in &class.children {
                    let v = m.get(k, l) + BigInt::one();
                    m.set(k, l, v);
                }
            }
            m
        };
        match collapsed {
            TreeSystem::EventuallyPeriodic { prefix, cycle } => {
                let levels: Vec<&LevelDescriptor> = prefix.iter().chain(&cycle).collect();
                let (p, c) = (prefix.len(), cycle.len());
                let mats: Vec<IntMatrix> = (0..p + c)
                    .map(|i| to_matrix(levels[i], levels[periodic::next_position(p, c, i)].len()))
                    .collect();
                let mut mats = mats;
                let cyc = mats.split_off(p);
                Ok(BratteliDiagram::EventuallyPeriodic { prefix: mats, cycle: cyc })
            }
            TreeSystem::Explicit(levels) => {
                let mats = levels.windows(2).map(|w| to_matrix(&w[0], w[1].len())).collect();
                Ok(BratteliDiagram::Explicit(mats))
            }
            TreeSystem::Procedural(_) => unreachable!("collapse rejects procedural systems"),
        }
    }

    pub fn matrix(&self, i: usize) -> Option<&IntMatrix> {
        match self {
            BratteliDiagram::Explicit(m) => m.get(i),
            BratteliDiagram::EventuallyPeriodic { prefix, cycle } => {
                periodic::position(prefix.len(), cycle.len(), i)
                    .map(|p| if p < prefix.len() { &prefix[p] } else { &cycle[p - prefix.len()] })
            }
        }
    }

    fn matrix_or_err(&self, i: usize) -> Result<&IntMatrix> {
        self.matrix(i).ok_or(Error::BeyondDepth { requested: i + 1, available: self.edge_levels().unwrap_or(0) })
    }

    /// Number of matrices for an explicit diagram.
    pub fn edge_levels(&self) -> Option<usize> {
        match self {
            BratteliDiagram::Explicit(m) => Some(m.len()),
            BratteliDiagram::EventuallyPeriodic { .. } => None,
        }
    }

    /// `m_i`, the number of vertices at level `i`.
    pub fn vertex_count(&self, i: usize) -> Option<usize> {
        if i == 0 {
            return Some(1);
        }
        self.matrix(i - 1).map(IntMatrix::rows)
    }

    pub fn prefix_len(&self) -> usize {
        match self {
            BratteliDiagram::Explicit(m) => m.len(),
            BratteliDiagram::EventuallyPeriodic { prefix, .. } => prefix.len(),
        }
    }

    pub fn cycle_len(&self) -> usize {
        match self {
            BratteliDiagram::Explicit(_) => 0,
            BratteliDiagram::EventuallyPeriodic { cycle, .. } => cycle.len(),
        }
    }

    /// Product `A_{to-1} ⋯ A_from`, the identity when `from == to`.
    pub fn product(&self, from: usize, to: usize) -> Result<IntMatrix> {
        let m = self.vertex_count(from).ok_or(Error::BeyondDepth { requested: from, available: self.edge_levels().unwrap_or(0) })?;
        let mut acc = IntMatrix::identity(m);
        for i in from..to {
            acc = self.matrix_or_err(i)?.mul(&acc);
        }
        Ok(acc)
    }

    /// Same diagram with the shortest prefix and cycle.
    pub fn normalized(&self) -> Self {
        match self {
            BratteliDiagram::Explicit(_) => self.clone(),
            BratteliDiagram::EventuallyPeriodic { prefix, cycle } => {
                let (prefix, cycle) = periodic::minimize(prefix.clone(), cycle.clone());
                BratteliDiagram::EventuallyPeriodic { prefix, cycle }
            }
        }
    }

    /// Number of paths from the root to each vertex at `level`.
    pub fn path_counts(&self, level: usize) -> Result<Vec<BigInt>> {
        let mut k = vec![BigInt::one()];
        for i in 0..level {
            k = self.matrix_or_err(i)?.mul_vec(&k);
        }
        Ok(k)
    }

    /// Keeps only the levels listed in `cuts`, composing the matrices in between.
    pub fn telescope(&self, cuts: &Cuts) -> Result<Self> {
        cuts.validate()?;
        let block = |n: usize| -> Result<IntMatrix> { self.product(cuts.at(n).unwrap(), cuts.at(n + 1).unwrap()) };
        match (self, cuts) {
            (BratteliDiagram::EventuallyPeriodic { prefix, cycle }, Cuts::Periodic { .. }) => {
                let (p, c) = (prefix.len(), cycle.len());
                let mut mats = Vec::new();
                let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
                let mut n = 0;
                loop {
                    let level = cuts.at(n).unwrap();
                    if let (true, Some(ph)) = (level >= p, cuts.phase(n)) {
                        let key = ((level - p) % c, ph);
                        if let Some(&start) = seen.get(&key) {
                            let cyc = mats.split_off(start);
                            return Ok(BratteliDiagram::EventuallyPeriodic { prefix: mats, cycle: cyc }.normalized());
                        }
                        seen.insert(key, n);
                    }
                    mats.push(block(n)?);
                    n += 1;
                }
            }
            (_, Cuts::Explicit(list)) => {
                let mats = (0..list.len().saturating_sub(1)).map(block).collect::<Result<_>>()?;
                Ok(BratteliDiagram::Explicit(mats))
            }
            (BratteliDiagram::Explicit(m), Cuts::Periodic { .. }) => {
                let mut mats = Vec::new();
                let mut n = 0;
                while cuts.at(n + 1).unwrap() <= m.len() {
                    mats.push(block(n)?);
                    n += 1;
                }
                Ok(BratteliDiagram::Explicit(mats))
            }
        }
    }

    /// Searches for per-level vertex bijections carrying this diagram to
    /// `other`. Exact for two eventually periodic diagrams; otherwise only the
    /// first `depth` edge levels are compared.
    pub fn is_isomorphic(&self, other: &BratteliDiagram, depth: usize) -> IsoVerdict {
        match (self, other) {
            (
                BratteliDiagram::EventuallyPeriodic { prefix: p1, cycle: c1 },
                BratteliDiagram::EventuallyPeriodic { prefix: p2, cycle: c2 },
            ) => {
                let p = p1.len().max(p2.len());
                let c = periodic::lcm(c1.len(), c2.len());
                let (a_pre, a_cyc) = periodic::align(p1, c1, p, c);
                let (b_pre, b_cyc) = periodic::align(p2, c2, p, c);
                let a: Vec<IntMatrix> = a_pre.into_iter().chain(a_cyc).collect();
                let b: Vec<IntMatrix> = b_pre.into_iter().chain(b_cyc).collect();
                periodic_iso(&a, &b, p)
            }
            _ => {
                let limit = match (self.edge_levels(), other.edge_levels()) {
                    (Some(x), Some(y)) => depth.min(x).min(y),
                    (Some(x), None) | (None, Some(x)) => depth.min(x),
                    (None, None) => depth,
                };
                let a: Vec<IntMatrix> = (0..limit).map(|i| self.matrix(i).unwrap().clone()).collect();
                let b: Vec<IntMatrix> = (0..limit).map(|i| other.matrix(i).unwrap().clone()).collect();
                let lengths_differ = self.edge_levels().is_some()
                    && other.edge_levels().is_some()
                    && self.edge_levels() != other.edge_levels()
                    && limit == self.edge_levels().unwrap().min(other.edge_levels().unwrap());
                match finite_iso(&a, &b) {
                    Ok(perms) if lengths_differ => {
                        let _ = perms;
                        IsoVerdict::NotIsomorphic { level: limit + 1 }
                    }
                    Ok(perms) => {
                        let exact = self.edge_levels().is_some() && other.edge_levels() == self.edge_levels() && limit == self.edge_levels().unwrap();
                        IsoVerdict::Isomorphic { exact, witness: LevelTable { prefix: perms, cycle: vec![] } }
                    }
                    Err(Some(level)) => IsoVerdict::NotIsomorphic { level },
                    Err(None) => IsoVerdict::Undecided,
                }
            }
        }
    }

    /// Checks a claimed isomorphism level by level over `levels` edge levels
    /// (the whole stored range for periodic witnesses when `levels` is large).
    pub fn check_isomorphism(&self, other: &BratteliDiagram, witness: &LevelPermutations, levels: usize) -> bool {
        (0..levels).all(|i| {
            let (Some(a), Some(b), Some(pi), Some(pj)) =
                (self.matrix(i), other.matrix(i), witness.at(i), witness.at(i + 1))
            else {
                return false;
            };
            a.rows() == b.rows()
                && a.cols() == b.cols()
                && (0..a.rows()).all(|k| (0..a.cols()).all(|l| b.get(pj.apply(k), pi.apply(l)) == a.get(k, l)))
        })
    }

    /// Semi-decision for equivalence: tries telescopings `0, s, s+g, …` of
    /// both diagrams with `s, g ≤ bound` and looks for an isomorphism.
    pub fn equivalence_search(&self, other: &BratteliDiagram, bound: usize) -> Equivalence {
        let mut patterns: Vec<(usize, usize)> = Vec::new();
        for s in 1..=bound {
            for g in 1..=bound {
                patterns.push((s, g));
            }
        }
        patterns.sort_by_key(|&(s, g)| (s + g, s, g));
        let mut pairs: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for &a in &patterns {
            for &b in &patterns {
                pairs.push((a, b));
            }
        }
        pairs.sort_by_key(|&((s1, g1), (s2, g2))| (s1 + g1 + s2 + g2, s1, g1, s2, g2));
        let mut cache: HashMap<(bool, usize, usize), Option<BratteliDiagram>> = HashMap::new();
        let mut tried = 0;
        for ((s1, g1), (s2, g2)) in pairs {
            let mut get = |left: bool, s: usize, g: usize| -> Option<BratteliDiagram> {
                cache
                    .entry((left, s, g))
                    .or_insert_with(|| {
                        let d = if left { self } else { other };
                        d.telescope(&Cuts::offset_every(s, g)).ok()
                    })
                    .clone()
            };
            let (Some(a), Some(b)) = (get(true, s1, g1), get(false, s2, g2)) else { continue };
            tried += 1;
            if let IsoVerdict::Isomorphic { witness, .. } = a.is_isomorphic(&b, 64) {
                return Equivalence::Equivalent(EquivalenceWitness {
                    cuts_left: Cuts::offset_every(s1, g1),
                    cuts_right: Cuts::offset_every(s2, g2),
                    isomorphism: witness,
                });
            }
        }
        Equivalence::Unknown { pairs_tried: tried }
    }

    /// Graphviz rendering of levels `0..=max_level`: one node per vertex, one
    /// edge per unit of multiplicity, one rank per level.
    pub fn to_dot(&self, max_level: usize) -> Result<String> {
        let mut out = String::new();
        out.push_str("digraph bratteli {\n");
        out.push_str("  rankdir=TB;\n");
        out.push_str("  node [shape=circle, width=0.25, fixedsize=true, fontsize=9];\n");
        let mut counts = Vec::with_capacity(max_level + 1);
        for level in 0..=max_level {
            counts.push(
                self.vertex_count(level)
                    .ok_or(Error::BeyondDepth { requested: level, available: self.edge_levels().unwrap_or(0) })?,
            );
        }
        for (level, &m) in counts.iter().enumerate() {
            let names: Vec<String> = (0..m).map(|k| format!("v{level}_{k}")).collect();
            let _ = writeln!(out, "  {{ rank=same; {}; }}", names.join("; "));
            for k in 0..m {
                let _ = writeln!(out, "  v{level}_{k} [label=\"{k}\"];");
            }
        }
        for level in 0..max_level {
            let a = self.matrix(level).unwrap();
            for l in 0..a.cols() {
                for k in 0..a.rows() {
                    let mult = a.get(k, l).to_usize().unwrap_or(0);
                    for _ in 0..mult {
                        let _ = writeln!(out, "  v{level}_{l} -> v{}_{k};", level + 1);
                    }
                }
            }
        }
        out.push_str("}\n");
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let mats = |ms: &[IntMatrix]| -> Value { Value::Array(ms.iter().map(matrix_to_json).collect()) };
        match self {
            BratteliDiagram::Explicit(m) => json!({"kind": "explicit", "matrices": mats(m)}),
            BratteliDiagram::EventuallyPeriodic { prefix, cycle } => {
                json!({"kind": "eventually_periodic", "prefix": mats(prefix), "cycle": mats(cycle)})
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let list = |key: &str| -> Result<Vec<IntMatrix>> {
            match v.get(key) {
                None => Ok(Vec::new()),
                Some(Value::Array(ms)) => ms.iter().map(matrix_from_json).collect(),
                Some(_) => Err(Error::Malformed(format!("`{key}` must be a list of matrices"))),
            }
        };
        let d = match v.get("kind").and_then(Value::as_str) {
            Some("explicit") => BratteliDiagram::Explicit(list("matrices")?),
            Some("eventually_periodic") | None => {
                BratteliDiagram::EventuallyPeriodic { prefix: list("prefix")?, cycle: list("cycle")? }
            }
            Some(k) => return Err(Error::Malformed(format!("unknown diagram kind `{k}`"))),
        };
        d.validate()?;
        Ok(d)
    }
}

pub fn matrix_to_json(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(bigint_to_json).collect()))
            .collect(),
    )
}

pub fn bigint_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn matrix_from_json(v: &Value) -> Result<IntMatrix> {
    let rows = v.as_array().ok_or_else(|| Error::Malformed("a matrix must be a list of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Malformed("a matrix row must be a list".into()))?
                .iter()
                .map(bigint_from_json)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_rows(rows)
}

pub fn bigint_from_json(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string().parse().unwrap()),
        Value::String(s) => s.trim().parse().map_err(|_| Error::Malformed(format!("`{s}` is not an integer"))),
        _ => Err(Error::Malformed(format!("`{v}` is not an integer"))),
    }
}

/// All `π'` with `b[π'(k)][π(l)] = a[k][l]`.
fn successors(a: &IntMatrix, b: &IntMatrix, pi: &Permutation) -> Vec<Permutation> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Vec::new();
    }
    let m = a.rows();
    let targets: Vec<Vec<BigInt>> = (0..m)
        .map(|k| {
            let mut t = vec![BigInt::zero(); a.cols()];
            for l in 0..a.cols() {
                t[pi.apply(l)] = a.get(k, l).clone();
            }
            t
        })
        .collect();
    let options: Vec<Vec<usize>> =
        targets.iter().map(|t| (0..m).filter(|&k2| b.row(k2) == t.as_slice()).collect()).collect();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn go(options: &[Vec<usize>], current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        let k = current.len();
        if k == options.len() {
            out.push(Permutation::from_images(current.clone()).unwrap());
            return;
        }
        for &j in &options[k] {
            if !used[j] {
                used[j] = true;
                current.push(j);
                go(options, current, used, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    go(&options, &mut current, &mut used, &mut out);
    out
}

/// Depth-first search for a compatible sequence of permutations along finite levels.
/// `Err(Some(level))` reports the first level no branch got past.
fn finite_iso(a: &[IntMatrix], b: &[IntMatrix]) -> std::result::Result<Vec<Permutation>, Option<usize>> {
    let mut budget = ISO_NODE_BUDGET;
    let mut deepest = 0;
    fn go(
        a: &[IntMatrix],
        b: &[IntMatrix],
        path: &mut Vec<Permutation>,
        budget: &mut usize,
        deepest: &mut usize,
    ) -> Option<bool> {
        let i = path.len() - 1;
        *deepest = (*deepest).max(i);
        if i == a.len() {
            return Some(true);
        }
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        for next in successors(&a[i], &b[i], &path[i]) {
            path.push(next);
            match go(a, b, path, budget, deepest) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {
                    path.pop();
                }
            }
        }
        Some(false)
    }
    let mut path = vec![Permutation::identity(1)];
    match go(a, b, &mut path, &mut budget, &mut deepest) {
        Some(true) => Ok(path),
        Some(false) => Err(Some(deepest + 1)),
        None => Err(None),
    }
}

/// Looks for an infinite compatible permutation sequence over aligned
/// matrices `a`, `b` (prefix length `p`, the rest one period), i.e. a cycle
/// reachable from the root node in the finite graph of (position, permutation).
fn periodic_iso(a: &[IntMatrix], b: &[IntMatrix], p: usize) -> IsoVerdict {
    let total = a.len();
    let c = total - p;
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        OnStack,
        Done,
    }
    let mut marks: HashMap<(usize, Permutation), Mark> = HashMap::new();
    let mut stack: Vec<(usize, Permutation, Vec<Permutation>, usize)> = Vec::new();
    let mut deepest = 0;
    let mut level = 0usize;
    let start = Permutation::identity(1);
    marks.insert((0, start.clone()), Mark::OnStack);
    stack.push((0, start.clone(), successors(&a[0], &b[0], &start), 0));
    while let Some(top) = stack.last_mut() {
        if marks.len() > ISO_NODE_BUDGET {
            return IsoVerdict::Undecided;
        }
        let (pos, _, succ, next_idx) = top;
        if *next_idx == succ.len() {
            let (pos, pi, _, _) = stack.pop().unwrap();
            marks.insert((pos, pi), Mark::Done);
            level = level.saturating_sub(1);
            continue;
        }
        let cand = succ[*next_idx].clone();
        *next_idx += 1;
        let npos = periodic::next_position(p, c, *pos);
        match marks.get(&(npos, cand.clone())) {
            Some(Mark::Done) => continue,
            Some(Mark::OnStack) => {
                // cycle closes at the stack entry holding (npos, cand)
                let entry = stack.iter().position(|(q, s, _, _)| *q == npos && *s == cand).unwrap();
                let perms: Vec<Permutation> = stack.iter().map(|(_, s, _, _)| s.clone()).collect();
                let prefix = perms[..entry].to_vec();
                let cycle = perms[entry..].to_vec();
                return IsoVerdict::Isomorphic { exact: true, witness: LevelTable { prefix, cycle } };
            }
            None => {
                level += 1;
                deepest = deepest.max(level);
                marks.insert((npos, cand.clone()), Mark::OnStack);
                let succ = successors(&a[npos], &b[npos], &cand);
                stack.push((npos, cand, succ, 0));
            }
        }
    }
    IsoVerdict::NotIsomorphic { level: deepest + 1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    fn diagram(ts: TreeSystem) -> BratteliDiagram {
        BratteliDiagram::from_tree(&ts).unwrap()
    }

    #[test]
    fn golden_diagrams() {
        assert_eq!(diagram(TreeSystem::cantor()), BratteliDiagram::EventuallyPeriodic { prefix: vec![], cycle: vec![m(&[&[2]])] });
        assert_eq!(
            diagram(TreeSystem::fibonacci()),
            BratteliDiagram::EventuallyPeriodic { prefix: vec![m(&[&[1], &[1]])], cycle: vec![m(&[&[1, 1], &[1, 0]])] }
        );
        assert_eq!(
            diagram(TreeSystem::sturmian()),
            BratteliDiagram::EventuallyPeriodic { prefix: vec![m(&[&[1], &[1]])], cycle: vec![m(&[&[1, 0], &[1, 1]])] }
        );
        assert_eq!(
            diagram(TreeSystem::regular(2)),
            BratteliDiagram::EventuallyPeriodic { prefix: vec![m(&[&[3]])], cycle: vec![m(&[&[2]])] }
        );
        assert_eq!(
            diagram(TreeSystem::ended(4)),
            BratteliDiagram::EventuallyPeriodic { prefix: vec![m(&[&[4]])], cycle: vec![m(&[&[1]])] }
        );
    }

    #[test]
    fn path_counts_follow_fibonacci() {
        let d = diagram(TreeSystem::fibonacci());
        let counts: Vec<Vec<i64>> =
            (0..4).map(|i| d.path_counts(i).unwrap().iter().map(|x| x.to_i64().unwrap()).collect()).collect();
        assert_eq!(counts, vec![vec![1], vec![1, 1], vec![2, 1], vec![3, 2]]);
    }

    #[test]
    fn telescoping_fibonacci_by_pairs() {
        let d = diagram(TreeSystem::fibonacci());
        let t = d.telescope(&Cuts::every(2)).unwrap();
        assert_eq!(t, BratteliDiagram::EventuallyPeriodic { prefix: vec![m(&[&[2], &[1]])], cycle: vec![m(&[&[2, 1], &[1, 1]])] });
    }

    #[test]
    fn identity_cuts_change_nothing() {
        let d = diagram(TreeSystem::fibonacci());
        assert_eq!(d.telescope(&Cuts::identity()).unwrap(), d);
        assert!(d.telescope(&Cuts::Explicit(vec![1, 2])).is_err());
        assert!(d.telescope(&Cuts::Explicit(vec![0, 2, 2])).is_err());
    }

    #[test]
    fn cut_composition() {
        let c1 = Cuts::offset_every(1, 2);
        let c2 = Cuts::every(3);
        let c = c1.compose(&c2).unwrap();
        for n in 0..20 {
            assert_eq!(c.at(n), c1.at(c2.at(n).unwrap()));
        }
    }

    #[test]
    fn isomorphism_with_relabelled_vertices() {
        let a = BratteliDiagram::eventually_periodic(vec![m(&[&[1], &[1]])], vec![m(&[&[1, 1], &[1, 0]])]).unwrap();
        let b = BratteliDiagram::eventually_periodic(vec![m(&[&[1], &[1]])], vec![m(&[&[0, 1], &[1, 1]])]).unwrap();
        let v = a.is_isomorphic(&b, 10);
        let IsoVerdict::Isomorphic { exact, witness } = &v else { panic!("{v:?}") };
        assert!(exact);
        assert!(a.check_isomorphism(&b, witness, 12));
        let c = diagram(TreeSystem::sturmian());
        assert!(matches!(a.is_isomorphic(&c, 10), IsoVerdict::NotIsomorphic { .. }));
    }

    #[test]
    fn equivalence_of_alternating_branchings() {
        let t = diagram(TreeSystem::periodic_branching(&[2, 3]).unwrap());
        let s = diagram(TreeSystem::periodic_branching(&[3, 2]).unwrap());
        let Equivalence::Equivalent(w) = t.equivalence_search(&s, 3) else { panic!() };
        let a = t.telescope(&w.cuts_left).unwrap();
        let b = s.telescope(&w.cuts_right).unwrap();
        assert!(a.check_isomorphism(&b, &w.isomorphism, 10));
        assert_eq!(a.matrix(1), Some(&m(&[&[6]])));
    }

    #[test]
    fn dot_output_is_stable() {
        let d = diagram(TreeSystem::cantor());
        let dot = d.to_dot(1).unwrap();
        assert_eq!(dot.matches("->").count(), 2);
        assert_eq!(d.to_dot(0).unwrap().matches("->").count(), 0);
        assert_eq!(dot, d.to_dot(1).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let d = diagram(TreeSystem::fibonacci());
        let back = BratteliDiagram::from_value(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!(BratteliDiagram::from_json(r#"{"kind":"explicit","matrices":[[[1,0]]]}"#).is_err());
    }
}
