//! Words in the Cuntz algebra `O_n` and the representation `ρ` of the
//! Higman–Thompson group `G_{n,1}` by unitaries `Σ S_{v_i} S_{u_i}*`.
//!
//! Every product of generators and adjoints reduces to `S_u S_v*`, so an
//! element is a finite combination of such monomials with coefficients in
//! `Q(i)`. Monomials of different length are related by
//! `S_u S_v* = Σ_a S_{ua} S_{va}*`; equality is decided by expanding every
//! weight class `|u| - |v|` to a common depth where monomials are independent.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::perm::Permutation;
use crate::thompson::{word_to_string, PrefixMap, Word};

pub type Coeff = Complex<BigRational>;

pub fn coeff(re: i64) -> Coeff {
    Complex::new(BigRational::from_integer(BigInt::from(re)), BigRational::zero())
}

/// `Σ c · S_u S_v*`, keyed by `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuntzElement {
    n: u8,
    terms: BTreeMap<(Word, Word), Coeff>,
}

fn insert(terms: &mut BTreeMap<(Word, Word), Coeff>, key: (Word, Word), c: Coeff) {
    let slot = terms.entry(key.clone()).or_insert_with(Coeff::zero);
    *slot = &*slot + &c;
    if slot.is_zero() {
        terms.remove(&key);
    }
}

fn all_words(n: u8, len: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..n).map(move |a| {
                    let mut x = w.clone();
                    x.push(a);
                    x
                })
            })
            .collect();
    }
    out
}

type Graded = BTreeMap<isize, BTreeMap<(Word, Word), Coeff>>;

impl CuntzElement {
    pub fn zero(n: u8) -> Self {
        CuntzElement { n, terms: BTreeMap::new() }
    }

    pub fn one(n: u8) -> Self {
        Self::monomial(n, Vec::new(), Vec::new(), coeff(1))
    }

    /// `c · S_u S_v*`.
    pub fn monomial(n: u8, u: Word, v: Word, c: Coeff) -> Self {
        let mut e = Self::zero(n);
        insert(&mut e.terms, (u, v), c);
        e
    }

    /// The isometry `S_a`.
    pub fn generator(n: u8, a: u8) -> Self {
        Self::monomial(n, vec![a], Vec::new(), coeff(1))
    }

    pub fn alphabet(&self) -> u8 {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(Word, Word), Coeff> {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            insert(&mut out.terms, k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut out = Self::zero(self.n);
        for (k, x) in &self.terms {
            insert(&mut out.terms, k.clone(), x * c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&coeff(-1)))
    }

    /// Products of monomials follow `S_v* S_p = S_{p'}` if `p = v p'`,
    /// `S_{v'}*` if `v = p v'`, and `0` otherwise.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for ((u, v), c) in &self.terms {
            for ((p, q), d) in &other.terms {
                let key = if p.starts_with(v) {
                    let mut up = u.clone();
                    up.extend_from_slice(&p[v.len()..]);
                    (up, q.clone())
                } else if v.starts_with(p) {
                    let mut qv = q.clone();
                    qv.extend_from_slice(&v[p.len()..]);
                    (u.clone(), qv)
                } else {
                    continue;
                };
                insert(&mut out.terms, key, c * d);
            }
        }
        out
    }

    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.n);
        for ((u, v), c) in &self.terms {
            insert(&mut out.terms, (v.clone(), u.clone()), c.conj());
        }
        out
    }

    /// Each weight class expanded so every monomial has `|v|` equal to the
    /// largest `|v|` of its class.
    fn expanded(&self) -> Graded {
        let mut depth: BTreeMap<isize, usize> = BTreeMap::new();
        for (u, v) in self.terms.keys() {
            let k = u.len() as isize - v.len() as isize;
            let d = depth.entry(k).or_default();
            *d = (*d).max(v.len());
        }
        let mut out: Graded = BTreeMap::new();
        for ((u, v), c) in &self.terms {
            let k = u.len() as isize - v.len() as isize;
            let class = out.entry(k).or_default();
            for s in all_words(self.n, depth[&k] - v.len()) {
                let mut us = u.clone();
                us.extend_from_slice(&s);
                let mut vs = v.clone();
                vs.extend_from_slice(&s);
                insert(class, (us, vs), c.clone());
            }
        }
        out.retain(|_, t| !t.is_empty());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.expanded().is_empty()
    }

    /// Equality in `O_n`, not just of the stored combinations.
    pub fn equals(&self, other: &Self) -> bool {
        self.n == other.n && self.sub(other).is_zero()
    }

    /// Canonical representative: each weight class at the smallest uniform
    /// depth. Equal elements have identical normal forms.
    pub fn normal_form(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (_, mut class) in self.expanded() {
            while let Some(parent) = self.contract(&class) {
                class = parent;
            }
            for (k, c) in class {
                insert(&mut out.terms, k, c);
            }
        }
        out
    }

    /// One uniform contraction step, if every monomial sits in a complete
    /// sibling family with a common coefficient.
    fn contract(&self, class: &BTreeMap<(Word, Word), Coeff>) -> Option<BTreeMap<(Word, Word), Coeff>> {
        let mut parents = BTreeMap::new();
        for ((u, v), c) in class {
            if u.is_empty() || v.is_empty() || u.last() != v.last() {
                return None;
            }
            let key = (u[..u.len() - 1].to_vec(), v[..v.len() - 1].to_vec());
            for a in 0..self.n {
                let mut ua = key.0.clone();
                ua.push(a);
                let mut va = key.1.clone();
                va.push(a);
                if class.get(&(ua, va)) != Some(c) {
                    return None;
                }
            }
            parents.insert(key, c.clone());
        }
        Some(parents)
    }

    /// Largest `|v|` over the stored monomials.
    pub fn depth(&self) -> usize {
        self.terms.keys().map(|(_, v)| v.len()).max().unwrap_or(0)
    }

    /// Action on the span of points `w·τ[o..]` of the end space, `τ` the
    /// Thue–Morse sequence, with `S_a e_x = e_{ax}` and `S_a* e_{ax} = e_x`.
    pub fn act(&self, vector: &PathVector) -> PathVector {
        let mut out = PathVector::new();
        for (point, x) in &vector.entries {
            for ((u, v), c) in &self.terms {
                if let Some(rest) = point.strip(v) {
                    out.add(rest.prepend(u), &(c * x));
                }
            }
        }
        out
    }

    pub fn random<R: Rng>(n: u8, terms: usize, max_len: usize, rng: &mut R) -> Self {
        let mut e = Self::zero(n);
        let word = |rng: &mut R| -> Word {
            let len = rng.gen_range(0..=max_len);
            (0..len).map(|_| rng.gen_range(0..n)).collect()
        };
        for _ in 0..terms {
            let (u, v) = (word(rng), word(rng));
            let c = Complex::new(
                BigRational::from_integer(BigInt::from(rng.gen_range(-3i64..=3))),
                BigRational::from_integer(BigInt::from(rng.gen_range(-2i64..=2))),
            );
            insert(&mut e.terms, (u, v), c);
        }
        e
    }
}

fn thue_morse(i: usize) -> u8 {
    (i.count_ones() % 2) as u8
}

/// The point `w · τ[offset..]`, kept with `w` as short as possible so equal
/// points have equal representations (`τ` is not eventually periodic).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TailPoint {
    word: Word,
    offset: usize,
}

impl TailPoint {
    pub fn new(word: Word, offset: usize) -> Self {
        let mut p = TailPoint { word, offset };
        while p.offset > 0 && p.word.last() == Some(&thue_morse(p.offset - 1)) {
            p.word.pop();
            p.offset -= 1;
        }
        p
    }

    fn letter(&self, i: usize) -> u8 {
        if i < self.word.len() {
            self.word[i]
        } else {
            thue_morse(self.offset + i - self.word.len())
        }
    }

    fn strip(&self, v: &[u8]) -> Option<TailPoint> {
        if !v.iter().enumerate().all(|(i, &a)| self.letter(i) == a) {
            return None;
        }
        Some(if v.len() <= self.word.len() {
            TailPoint::new(self.word[v.len()..].to_vec(), self.offset)
        } else {
            TailPoint::new(Vec::new(), self.offset + v.len() - self.word.len())
        })
    }

    fn prepend(&self, u: &[u8]) -> TailPoint {
        let mut w = u.to_vec();
        w.extend_from_slice(&self.word);
        TailPoint::new(w, self.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathVector {
    entries: BTreeMap<TailPoint, Coeff>,
}

impl PathVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Basis vector at the point `w·τ`.
    pub fn basis(w: &[u8]) -> Self {
        let mut v = Self::new();
        v.add(TailPoint::new(w.to_vec(), 0), &coeff(1));
        v
    }

    fn add(&mut self, p: TailPoint, c: &Coeff) {
        let slot = self.entries.entry(p.clone()).or_insert_with(Coeff::zero);
        *slot = &*slot + c;
        if slot.is_zero() {
            self.entries.remove(&p);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Equality checked through the action on every `e_{wτ}` with `|w| = depth`.
/// Faithful once `depth` is at least the depth of both elements.
pub fn act_equal(a: &CuntzElement, b: &CuntzElement, depth: usize) -> bool {
    all_words(a.n, depth).iter().all(|w| {
        let e = PathVector::basis(w);
        a.act(&e) == b.act(&e)
    })
}

pub fn rho(g: &PrefixMap) -> CuntzElement {
    let mut e = CuntzElement::zero(g.alphabet());
    for (u, v) in g.pairs() {
        insert(&mut e.terms, (v.clone(), u.clone()), coeff(1));
    }
    e
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationReport {
    /// `ρ(gh) = ρ(g)ρ(h)`.
    pub homomorphism: bool,
    /// `ρ(g)* = ρ(g⁻¹)`.
    pub adjoint_is_inverse: bool,
    /// `ρ(g)*ρ(g) = ρ(g)ρ(g)* = 1`.
    pub unitary: bool,
    /// `ρ(g) = 1` exactly when `g` is the identity.
    pub faithful: bool,
    /// `ρ(g)` acts on end points as `g` does.
    pub action: bool,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.homomorphism && self.adjoint_is_inverse && self.unitary && self.faithful && self.action
    }
}

pub fn verify_representation(g: &PrefixMap, h: &PrefixMap) -> Result<RepresentationReport> {
    let n = g.alphabet();
    let gh = g.compose(h)?;
    let (rg, rh) = (rho(g), rho(h));
    let one = CuntzElement::one(n);
    let unitary = |r: &CuntzElement| r.star().mul(r).equals(&one) && r.mul(&r.star()).equals(&one);
    let depth = g.pairs().iter().map(|p| p.0.len()).max().unwrap_or(0);
    let action = all_words(n, depth).iter().all(|w| {
        let image = g.apply_word(w).expect("long enough to be determined");
        rg.act(&PathVector::basis(w)) == PathVector::basis(&image)
    });
    Ok(RepresentationReport {
        homomorphism: rho(&gh).equals(&rg.mul(&rh)),
        adjoint_is_inverse: rg.star().equals(&rho(&g.inverse())),
        unitary: unitary(&rg) && unitary(&rh),
        faithful: rg.equals(&one) == g.is_identity() && rh.equals(&one) == h.is_identity(),
        action,
    })
}

/// Runs `count` seeded checks on random pairs of maps; returns how many passed.
pub fn random_representation_checks<R: Rng>(n: u8, depth: usize, count: usize, rng: &mut R) -> Result<usize> {
    let mut passed = 0;
    for _ in 0..count {
        let g = PrefixMap::random(n, depth, rng);
        let h = PrefixMap::random(n, depth, rng);
        if verify_representation(&g, &h)?.passed() {
            passed += 1;
        }
    }
    Ok(passed)
}

/// [`random_representation_checks`] driven by a ChaCha8 generator seeded with `seed`.
pub fn seeded_representation_checks(n: u8, depth: usize, count: usize, seed: u64) -> Result<usize> {
    random_representation_checks(n, depth, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Permutation matrix with `M[σ(i)][i] = 1`, the finite shadow of `ρ` on
/// the words of one level.
pub fn finite_pair_representation(sigma: &Permutation) -> IntMatrix {
    let n = sigma.len();
    let mut m = IntMatrix::zeros(n, n);
    for i in 0..n {
        m.set(sigma.apply(i), i, BigInt::one());
    }
    m
}

/// The prefix map permuting the words of length `level` by `sigma`, indexed
/// in lexicographic order.
pub fn level_permutation_map(n: u8, level: usize, sigma: &Permutation) -> Result<PrefixMap> {
    let words = all_words(n, level);
    if sigma.len() != words.len() {
        return Err(Error::Incompatible(format!("{} words of length {level}, permutation of {}", words.len(), sigma.len())));
    }
    PrefixMap::new(n, (0..words.len()).map(|i| (words[i].clone(), words[sigma.apply(i)].clone())).collect())
}

fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn fmt_coeff(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => fmt_rational(&c.re),
        (true, false) => format!("{}·i", fmt_rational(&c.im)),
        (false, false) => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({} {} {}·i)", fmt_rational(&c.re), sign, fmt_rational(&c.im.abs()))
        }
    }
}

impl fmt::Display for CuntzElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((u, v), c)| format!("{}·S_{} S*_{}", fmt_coeff(c), word_to_string(u), word_to_string(v)))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thompson::{generator_a, generator_b, generator_c, generator_pi0};

    fn s(n: u8, a: u8) -> CuntzElement {
        CuntzElement::generator(n, a)
    }

    #[test]
    fn cuntz_relations() {
        for n in 2..=4 {
            let one = CuntzElement::one(n);
            let mut sum = CuntzElement::zero(n);
            for a in 0..n {
                for b in 0..n {
                    let p = s(n, a).star().mul(&s(n, b));
                    assert!(p.equals(&if a == b { one.clone() } else { CuntzElement::zero(n) }));
                }
                sum = sum.add(&s(n, a).mul(&s(n, a).star()));
            }
            assert!(sum.equals(&one));
            assert!(!sum.normal_form().terms().is_empty());
            assert_eq!(sum.normal_form(), one);
        }
    }

    #[test]
    fn rho_of_generator_a() {
        let r = rho(&generator_a());
        let keys: Vec<(Word, Word)> = r.terms().keys().cloned().collect();
        assert_eq!(keys, vec![(vec![0], vec![0, 0]), (vec![1, 0], vec![0, 1]), (vec![1, 1], vec![1])]);
        assert_eq!(r.to_string(), "1·S_0 S*_00 + 1·S_10 S*_01 + 1·S_11 S*_1");
    }

    #[test]
    fn generators_are_unitary() {
        for g in [generator_a(), generator_b(), generator_c(), generator_pi0()] {
            let report = verify_representation(&g, &generator_b()).unwrap();
            assert!(report.passed(), "{g}: {report:?}");
        }
    }

    #[test]
    fn seeded_random_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(random_representation_checks(2, 3, 30, &mut rng).unwrap(), 30);
        assert_eq!(random_representation_checks(3, 2, 20, &mut rng).unwrap(), 20);
    }

    #[test]
    fn equality_matches_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a = CuntzElement::random(2, 3, 2, &mut rng);
            let b = a.mul(&CuntzElement::random(2, 2, 2, &mut rng));
            let c = b.normal_form();
            assert!(b.equals(&c));
            let depth = b.depth().max(c.depth()).max(a.depth());
            assert!(act_equal(&b, &c, depth));
            assert_eq!(a.equals(&b), act_equal(&a, &b, depth));
        }
    }

    #[test]
    fn tail_points_are_canonical() {
        // τ = 0110 1001 …
        assert_eq!(TailPoint::new(vec![0], 1), TailPoint::new(vec![], 0));
        assert_ne!(TailPoint::new(vec![1], 1), TailPoint::new(vec![], 0));
        let x = PathVector::basis(&[]);
        let y = s(2, 1).star().act(&x);
        assert!(y.is_zero());
        let z = s(2, 0).star().act(&x);
        assert_eq!(s(2, 0).act(&z), x);
    }

    #[test]
    fn coefficients_render() {
        let c = Complex::new(BigRational::new(1.into(), 2.into()), BigRational::from_integer((-3).into()));
        let e = CuntzElement::monomial(2, vec![1], vec![], c);
        assert_eq!(e.to_string(), "(1/2 - 3·i)·S_1 S*_ε");
        assert_eq!(e.star().mul(&e).normal_form().to_string(), "37/4·S_ε S*_ε");
    }

    #[test]
    fn finite_pairs() {
        for n in 1..=5 {
            let perms = Permutation::all(n);
            for a in perms.iter().take(20) {
                for b in perms.iter().take(20) {
                    let lhs = finite_pair_representation(&a.compose(b));
                    let rhs = finite_pair_representation(a).mul(&finite_pair_representation(b));
                    assert_eq!(lhs, rhs);
                }
            }
        }
        let sigma = Permutation::from_images(vec![2, 0, 3, 1]).unwrap();
        let g = level_permutation_map(2, 2, &sigma).unwrap();
        assert_eq!(g.apply_word(&[0, 0]), Some(vec![1, 0]));
    }
}
