//! Elements of the Higman–Thompson group `G_{n,1}` as prefix replacement maps
//! `u_i·z ↦ v_i·z` between complete prefix codes over `{0, …, n-1}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupoid::{EndPoint, Germ};
use crate::tree::TreeSystem;

pub type Word = Vec<u8>;

pub fn word_to_string(w: &[u8]) -> String {
    if w.is_empty() {
        "ε".to_string()
    } else {
        w.iter().map(|d| char::from_digit(u32::from(*d), 36).unwrap()).collect()
    }
}

pub fn parse_word(s: &str, n: u8) -> Result<Word> {
    if s == "ε" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c.to_digit(36) {
            Some(d) if d < u32::from(n) => Ok(d as u8),
            _ => Err(Error::InvalidPrefixMap(format!("`{c}` is not a letter of the {n}-letter alphabet"))),
        })
        .collect()
}

/// Reduced form, pairs sorted by domain word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrefixMap {
    n: u8,
    pairs: Vec<(Word, Word)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThompsonClass {
    /// Order preserving: in `F`.
    F,
    /// Cyclic order preserving but not order preserving: in `T \ F`.
    T,
    /// In `V \ T`.
    V,
}

impl fmt::Display for ThompsonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThompsonClass::F => "F",
            ThompsonClass::T => "T-only",
            ThompsonClass::V => "V-only",
        })
    }
}

/// Checks that `code` is prefix-free with Kraft sum `Σ n^{-|w|} = 1`, so the
/// cylinders partition the end space.
fn check_complete_code(n: u8, code: &[&Word], side: &str) -> Result<()> {
    if code.is_empty() {
        return Err(Error::InvalidPrefixMap(format!("empty {side} code")));
    }
    if let Some(w) = code.iter().find(|w| w.iter().any(|&a| a >= n)) {
        return Err(Error::InvalidPrefixMap(format!("{side} word {} uses a letter outside the alphabet", word_to_string(w))));
    }
    let mut sorted: Vec<&Word> = code.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[1].starts_with(w[0]) {
            return Err(Error::InvalidPrefixMap(format!(
                "{side} words {} and {} overlap",
                word_to_string(w[0]),
                word_to_string(w[1])
            )));
        }
    }
    let depth = code.iter().map(|w| w.len()).max().unwrap();
    let base = BigUint::from(n);
    let total: BigUint = code.iter().map(|w| base.pow((depth - w.len()) as u32)).sum();
    if total != base.pow(depth as u32) {
        return Err(Error::InvalidPrefixMap(format!("the {side} code does not cover the whole space")));
    }
    Ok(())
}

/// One collapsible sibling family: its parent words in domain and range.
fn families(n: u8, map: &BTreeMap<Word, Word>) -> Vec<(Word, Word)> {
    let mut out = Vec::new();
    for (u, v) in map {
        if u.last() != Some(&0) || v.last() != Some(&0) {
            continue;
        }
        let (pu, pv) = (&u[..u.len() - 1], &v[..v.len() - 1]);
        let complete = (1..n).all(|a| {
            let mut ua = pu.to_vec();
            ua.push(a);
            let mut va = pv.to_vec();
            va.push(a);
            map.get(&ua) == Some(&va)
        });
        if complete {
            out.push((pu.to_vec(), pv.to_vec()));
        }
    }
    out
}

fn collapse_family(n: u8, map: &mut BTreeMap<Word, Word>, pu: Word, pv: Word) {
    for a in 0..n {
        let mut ua = pu.clone();
        ua.push(a);
        map.remove(&ua);
    }
    map.insert(pu, pv);
}

impl PrefixMap {
    /// Validates and reduces.
    pub fn new(n: u8, pairs: Vec<(Word, Word)>) -> Result<Self> {
        let map = Self::validated(n, pairs)?;
        Ok(Self::reduce_map(n, map))
    }

    fn validated(n: u8, pairs: Vec<(Word, Word)>) -> Result<BTreeMap<Word, Word>> {
        if n < 2 {
            return Err(Error::InvalidPrefixMap("the alphabet needs at least two letters".into()));
        }
        let dom: Vec<&Word> = pairs.iter().map(|p| &p.0).collect();
        let rng: Vec<&Word> = pairs.iter().map(|p| &p.1).collect();
        check_complete_code(n, &dom, "domain")?;
        check_complete_code(n, &rng, "range")?;
        Ok(pairs.into_iter().collect())
    }

    fn reduce_map(n: u8, mut map: BTreeMap<Word, Word>) -> Self {
        loop {
            let fams = families(n, &map);
            if fams.is_empty() {
                break;
            }
            for (pu, pv) in fams {
                collapse_family(n, &mut map, pu, pv);
            }
        }
        PrefixMap { n, pairs: map.into_iter().collect() }
    }

    /// Reduction that collapses one family at a time in an order chosen by `rng`.
    pub fn reduce_randomly<R: Rng>(n: u8, pairs: Vec<(Word, Word)>, rng: &mut R) -> Result<Self> {
        let mut map = Self::validated(n, pairs)?;
        loop {
            let fams = families(n, &map);
            let Some((pu, pv)) = fams.choose(rng).cloned() else { break };
            collapse_family(n, &mut map, pu, pv);
        }
        Ok(PrefixMap { n, pairs: map.into_iter().collect() })
    }

    pub fn identity(n: u8) -> Self {
        PrefixMap { n, pairs: vec![(Vec::new(), Vec::new())] }
    }

    pub fn alphabet(&self) -> u8 {
        self.n
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.len() == 1 && self.pairs[0].0.is_empty() && self.pairs[0].1.is_empty()
    }

    /// Same map written with the pair `(u, v)` at `index` split into its `n` children.
    pub fn expand_pair(&self, index: usize) -> Vec<(Word, Word)> {
        let mut out = Vec::with_capacity(self.pairs.len() + self.n as usize - 1);
        for (i, (u, v)) in self.pairs.iter().enumerate() {
            if i == index {
                for a in 0..self.n {
                    let (mut ua, mut va) = (u.clone(), v.clone());
                    ua.push(a);
                    va.push(a);
                    out.push((ua, va));
                }
            } else {
                out.push((u.clone(), v.clone()));
            }
        }
        out
    }

    /// `g ∘ h`: `h` is applied first.
    pub fn compose(&self, h: &PrefixMap) -> Result<PrefixMap> {
        if self.n != h.n {
            return Err(Error::Incompatible(format!("alphabets of size {} and {}", self.n, h.n)));
        }
        let mut pairs = Vec::new();
        for (u, v) in &h.pairs {
            for (p, q) in &self.pairs {
                if p.starts_with(v) {
                    let mut us = u.clone();
                    us.extend_from_slice(&p[v.len()..]);
                    pairs.push((us, q.clone()));
                } else if v.starts_with(p) {
                    let mut qs = q.clone();
                    qs.extend_from_slice(&v[p.len()..]);
                    pairs.push((u.clone(), qs));
                }
            }
        }
        PrefixMap::new(self.n, pairs)
    }

    pub fn inverse(&self) -> PrefixMap {
        let map: BTreeMap<Word, Word> = self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect();
        PrefixMap { n: self.n, pairs: map.into_iter().collect() }
    }

    pub fn pow(&self, k: i64) -> PrefixMap {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = PrefixMap::identity(self.n);
        for _ in 0..k.unsigned_abs() {
            acc = acc.compose(&base).expect("same alphabet");
        }
        acc
    }

    /// Image of a finite word long enough to be determined, i.e. extending a domain word.
    pub fn apply_word(&self, w: &[u8]) -> Option<Word> {
        self.pairs.iter().find(|(u, _)| w.starts_with(u)).map(|(u, v)| {
            let mut out = v.clone();
            out.extend_from_slice(&w[u.len()..]);
            out
        })
    }

    pub fn classify(&self) -> ThompsonClass {
        // pairs are sorted by domain, which is the left-to-right order of the cylinders
        let ranges: Vec<&Word> = self.pairs.iter().map(|p| &p.1).collect();
        let mut sorted = ranges.clone();
        sorted.sort();
        if ranges == sorted {
            return ThompsonClass::F;
        }
        let k = ranges.len();
        let start = sorted.iter().position(|w| *w == ranges[0]).unwrap();
        if (0..k).all(|i| ranges[i] == sorted[(start + i) % k]) {
            ThompsonClass::T
        } else {
            ThompsonClass::V
        }
    }

    /// The germ of this map at an end of the `n`-ary tree: the domain and range
    /// words around the point, with similarity shift `|u| - |v|`.
    pub fn germ_at(&self, x: &EndPoint) -> Germ {
        let longest = self.pairs.iter().map(|p| p.0.len()).max().unwrap_or(0);
        let prefix = x.truncate(longest);
        let (u, v) = self
            .pairs
            .iter()
            .find(|(u, _)| prefix.iter().zip(u.iter()).all(|(a, b)| *a == *b as usize))
            .expect("domain codes are complete");
        Germ { source: u.iter().map(|&a| a as usize).collect(), target: v.iter().map(|&a| a as usize).collect() }
    }

    /// Image of an end of the `n`-ary tree.
    pub fn apply_end(&self, x: &EndPoint) -> Result<EndPoint> {
        let g = self.germ_at(x);
        let k = g.source.len();
        let tail = |i: usize| x.position(i + k);
        let pre_len = x.prefix().len().saturating_sub(k);
        let mut prefix = g.target.clone();
        prefix.extend((0..pre_len).map(tail));
        let cycle: Vec<usize> = (pre_len..pre_len + x.cycle().len()).map(tail).collect();
        EndPoint::new(x.tree().clone(), prefix, cycle)
    }

    /// The `n`-ary tree the maps act on.
    pub fn tree(&self) -> Arc<TreeSystem> {
        Arc::new(TreeSystem::ary(self.n as usize))
    }

    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|(u, v)| json!([u.iter().map(|d| d.to_string()).collect::<String>(), v.iter().map(|d| d.to_string()).collect::<String>()]))
            .collect();
        json!({"n": self.n, "pairs": pairs})
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .filter(|&n| (2..=36).contains(&n))
            .ok_or_else(|| Error::Malformed("`n` must be an integer between 2 and 36".into()))? as u8;
        let pairs = v
            .get("pairs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("`pairs` must be a list".into()))?
            .iter()
            .map(|p| {
                let a = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Malformed("each pair must be [u, v]".into()))?;
                let word = |x: &Value| -> Result<Word> {
                    let s = x.as_str().ok_or_else(|| Error::Malformed("words must be strings".into()))?;
                    parse_word(s, n)
                };
                Ok((word(&a[0])?, word(&a[1])?))
            })
            .collect::<Result<Vec<_>>>()?;
        PrefixMap::new(n, pairs)
    }

    /// A random reduced map whose codes have depth at most `depth`.
    pub fn random<R: Rng>(n: u8, depth: usize, rng: &mut R) -> PrefixMap {
        let max_splits = (0..depth).map(|d| (n as usize).pow(d as u32)).sum::<usize>();
        let splits = rng.gen_range(0..=max_splits.min(12));
        let dom = random_code(n, depth, splits, rng);
        let mut rng_code = random_code(n, depth, splits, rng);
        rng_code.shuffle(rng);
        PrefixMap::new(n, dom.into_iter().zip(rng_code).collect()).expect("random codes are complete")
    }
}

/// A complete prefix code obtained by splitting `splits` leaves of depth below `depth`.
fn random_code<R: Rng>(n: u8, depth: usize, splits: usize, rng: &mut R) -> Vec<Word> {
    let mut leaves: Vec<Word> = vec![Vec::new()];
    for _ in 0..splits {
        let open: Vec<usize> = (0..leaves.len()).filter(|&i| leaves[i].len() < depth).collect();
        let Some(&i) = open.choose(rng) else { break };
        let w = leaves.swap_remove(i);
        for a in 0..n {
            let mut c = w.clone();
            c.push(a);
            leaves.push(c);
        }
    }
    leaves
}

impl fmt::Display for PrefixMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pairs.iter().map(|(u, v)| format!("{}→{}", word_to_string(u), word_to_string(v))).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

fn w(s: &str) -> Word {
    s.bytes().map(|b| b - b'0').collect()
}

fn named(pairs: &[(&str, &str)]) -> PrefixMap {
    PrefixMap::new(2, pairs.iter().map(|(u, v)| (w(u), w(v))).collect()).expect("generator tables are valid")
}

/// First generator of Thompson's group `F`.
pub fn generator_a() -> PrefixMap {
    named(&[("00", "0"), ("01", "10"), ("1", "11")])
}

/// Second generator of `F`, acting as `A` on the right half.
pub fn generator_b() -> PrefixMap {
    named(&[("0", "0"), ("100", "10"), ("101", "110"), ("11", "111")])
}

/// A rotation generating `T` together with `F`.
pub fn generator_c() -> PrefixMap {
    named(&[("0", "11"), ("10", "0"), ("11", "10")])
}

/// A transposition of two cylinders generating `V` together with `T`.
pub fn generator_pi0() -> PrefixMap {
    named(&[("0", "0"), ("10", "11"), ("11", "10")])
}

/// Commutator `g h g⁻¹ h⁻¹`.
pub fn commutator(g: &PrefixMap, h: &PrefixMap) -> PrefixMap {
    g.compose(h).and_then(|x| x.compose(&g.inverse())).and_then(|x| x.compose(&h.inverse())).expect("same alphabet")
}

/// `|{u_i}|`, the number of cylinder pairs in the reduced form.
pub fn pair_count(g: &PrefixMap) -> usize {
    g.pairs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reduction() {
        assert!(named(&[("0", "0"), ("1", "1")]).is_identity());
        let swap = named(&[("0", "1"), ("1", "0")]);
        assert_eq!(swap.pairs().len(), 2);
        assert_eq!(generator_a().pairs().len(), 3);
        let expanded = PrefixMap::new(2, generator_a().expand_pair(2)).unwrap();
        assert_eq!(expanded, generator_a());
    }

    #[test]
    fn invalid_codes() {
        assert!(PrefixMap::new(2, vec![(w("0"), w("0"))]).is_err());
        assert!(PrefixMap::new(2, vec![(w("0"), w("0")), (w("01"), w("1"))]).is_err());
        assert!(PrefixMap::new(2, vec![(w("0"), w("0")), (w("2"), w("1"))]).is_err());
    }

    #[test]
    fn group_laws() {
        let a = generator_a();
        assert!(a.compose(&a.inverse()).unwrap().is_identity());
        let swap = named(&[("0", "1"), ("1", "0")]);
        assert!(swap.compose(&swap).unwrap().is_identity());
        // A∘B computed by hand on a common refinement
        let ab = a.compose(&generator_b()).unwrap();
        assert_eq!(ab, named(&[("00", "0"), ("01", "10"), ("100", "110"), ("101", "1110"), ("11", "1111")]));
    }

    #[test]
    fn thompson_f_relations() {
        let (a, b) = (generator_a(), generator_b());
        // the usual presentation is written with maps acting on the right
        let x = b.inverse().compose(&a).unwrap();
        let y = a.compose(&b).unwrap().compose(&a.inverse()).unwrap();
        let z = a.pow(2).compose(&b).unwrap().compose(&a.pow(-2)).unwrap();
        assert!(commutator(&x, &y).is_identity());
        assert!(commutator(&x, &z).is_identity());
        assert!(!commutator(&a, &b).is_identity());
    }

    #[test]
    fn classification() {
        assert_eq!(PrefixMap::identity(2).classify(), ThompsonClass::F);
        assert_eq!(named(&[("0", "1"), ("1", "0")]).classify(), ThompsonClass::T);
        assert_eq!(named(&[("00", "0"), ("01", "11"), ("1", "10")]).classify(), ThompsonClass::V);
        assert_eq!(generator_a().classify(), ThompsonClass::F);
        assert_eq!(generator_b().classify(), ThompsonClass::F);
        assert_eq!(generator_c().classify(), ThompsonClass::T);
        assert_eq!(generator_pi0().classify(), ThompsonClass::V);
    }

    #[test]
    fn germs_at_ends() {
        let a = generator_a();
        let t = a.tree();
        let zeros = EndPoint::new(t.clone(), vec![], vec![0]).unwrap();
        let ones = EndPoint::new(t.clone(), vec![], vec![1]).unwrap();
        let g = a.germ_at(&zeros);
        assert_eq!((g.source.clone(), g.target.clone(), g.shift()), (vec![0, 0], vec![0], 1));
        assert_eq!(a.germ_at(&ones).shift(), -1);
        let id = PrefixMap::identity(2).germ_at(&zeros);
        assert_eq!(id.shift(), 0);
        let image = a.apply_end(&EndPoint::new(t, vec![0, 1], vec![1, 0]).unwrap()).unwrap();
        assert_eq!(image.truncate(6), vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn json_round_trip() {
        let a = generator_b();
        assert_eq!(PrefixMap::from_value(&a.to_json()).unwrap(), a);
        assert!(PrefixMap::from_json(r#"{"n":2,"pairs":[["0","0"]]}"#).is_err());
    }

    #[test]
    fn random_maps_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=3 {
            for _ in 0..50 {
                let g = PrefixMap::random(n, 4, &mut rng);
                assert!(g.compose(&g.inverse()).unwrap().is_identity());
                assert!(g.pairs().iter().all(|(u, v)| u.len() <= 4 && v.len() <= 4));
            }
        }
    }
}
