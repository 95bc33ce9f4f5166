//! The dimension group of an eventually periodic Bratteli diagram: the direct
//! limit `Z → Z^{m_1} → Z^{m_2} → …` with the cone of eventually nonnegative
//! vectors and order unit `[1]` at level 0.
//!
//! Everything reduces to the period product `Π = A_{P+C-1} ⋯ A_P` acting on
//! level `P`, the first periodic level.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};

use crate::bratteli::BratteliDiagram;
use crate::error::{Error, Result};
use crate::linalg::{is_nonnegative_vector, is_nonpositive_vector, is_zero_vector, IntMatrix};
use crate::perron::{Perron, RealValue};
use crate::quadratic::QuadraticNumber;
use crate::tree::TreeSystem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub level: usize,
    pub vector: Vec<BigInt>,
}

impl Element {
    pub fn new(level: usize, vector: Vec<BigInt>) -> Self {
        Element { level, vector }
    }

    pub fn from_i64(level: usize, vector: &[i64]) -> Self {
        Element { level, vector: vector.iter().map(|&x| BigInt::from(x)).collect() }
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.vector.iter().map(ToString::to_string).collect();
        write!(f, "({}, [{}])", self.level, parts.join(", "))
    }
}

/// Why an element is outside the positive cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// The Perron functional is negative on the element, and it is positive on the cone.
    PerronNegative,
    /// The Perron functional vanishes but the element is not zero, so no
    /// pushforward can be nonnegative.
    PerronBoundary,
    /// With `Π = dI + N`, coordinate `coordinate` of `Π^k v` is eventually
    /// dominated by `C(k, order)·d^{k-order}·(N^order v)`, which is negative.
    LeadingTerm { coordinate: usize, order: usize },
    /// A pushforward is nonpositive and nonzero in the limit; all later ones are too.
    NonpositivePushforward { level: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Positivity {
    Positive { level: usize, vector: Vec<BigInt> },
    NotPositive(Certificate),
    Unknown { bound: usize },
}

impl Positivity {
    pub fn is_positive(&self) -> bool {
        matches!(self, Positivity::Positive { .. })
    }

    pub fn is_not_positive(&self) -> bool {
        matches!(self, Positivity::NotPositive(_))
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Primitive(Box<Perron>),
    /// `Π = dI + N` with `N` nilpotent.
    ScalarPlusNilpotent { n: IntMatrix },
    General,
}

/// How far to iterate when a certificate promises eventual positivity.
const WITNESS_SEARCH_LIMIT: usize = 100_000;

#[derive(Debug, Clone)]
pub struct DimensionGroup {
    diagram: BratteliDiagram,
    p: usize,
    c: usize,
    period: IntMatrix,
    stable_power: usize,
    stable_product: IntMatrix,
    rank: usize,
    shape: Shape,
}

impl DimensionGroup {
    pub fn new(diagram: &BratteliDiagram) -> Result<Self> {
        diagram.validate()?;
        let diagram = diagram.normalized();
        let BratteliDiagram::EventuallyPeriodic { prefix, cycle } = &diagram else {
            return Err(Error::NotEventuallyPeriodic);
        };
        let (p, c) = (prefix.len(), cycle.len());
        let period = diagram.product(p, p + c)?;
        let mut s = 0;
        let mut power = IntMatrix::identity(period.rows());
        let mut rank = power.rank();
        loop {
            let next = period.mul(&power);
            let r = next.rank();
            if r == rank {
                break;
            }
            power = next;
            rank = r;
            s += 1;
        }
        let shape = if period.is_primitive() {
            Shape::Primitive(Box::new(Perron::of(&period)?))
        } else {
            scalar_plus_nilpotent(&period).map_or(Shape::General, |(_, n)| Shape::ScalarPlusNilpotent { n })
        };
        Ok(DimensionGroup { diagram, p, c, period, stable_power: s, stable_product: power, rank, shape })
    }

    pub fn of_tree(ts: &TreeSystem) -> Result<Self> {
        Self::new(&BratteliDiagram::from_tree(ts)?)
    }

    pub fn diagram(&self) -> &BratteliDiagram {
        &self.diagram
    }

    /// `(P, C)`: first periodic level and period length.
    pub fn period_data(&self) -> (usize, usize) {
        (self.p, self.c)
    }

    pub fn period_matrix(&self) -> &IntMatrix {
        &self.period
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order_unit(&self) -> Element {
        Element::from_i64(0, &[1])
    }

    pub fn perron(&self) -> Option<&Perron> {
        match &self.shape {
            Shape::Primitive(p) => Some(p),
            _ => None,
        }
    }

    /// True when the period matrix is `dI + N` with `N` nilpotent and not primitive.
    pub fn is_scalar_plus_nilpotent(&self) -> bool {
        matches!(self.shape, Shape::ScalarPlusNilpotent { .. })
    }

    pub fn element(&self, level: usize, vector: Vec<BigInt>) -> Result<Element> {
        let m = self.diagram.vertex_count(level).unwrap();
        if vector.len() != m {
            return Err(Error::Malformed(format!("level {level} has {m} vertices, got a vector of length {}", vector.len())));
        }
        Ok(Element { level, vector })
    }

    fn check(&self, el: &Element) -> Result<()> {
        let m = self.diagram.vertex_count(el.level).unwrap();
        if el.vector.len() == m {
            Ok(())
        } else {
            Err(Error::Malformed(format!("level {} has {m} vertices, got a vector of length {}", el.level, el.vector.len())))
        }
    }

    pub fn push(&self, el: &Element, to_level: usize) -> Result<Element> {
        self.check(el)?;
        if to_level < el.level {
            return Err(Error::Incompatible(format!("cannot push from level {} down to {to_level}", el.level)));
        }
        let mut v = el.vector.clone();
        for i in el.level..to_level {
            v = self.diagram.matrix(i).unwrap().mul_vec(&v);
        }
        Ok(Element { level: to_level, vector: v })
    }

    /// Smallest level `L ≥ level` with `L = P + kC`.
    pub fn cycle_start_after(&self, level: usize) -> usize {
        if level <= self.p {
            return self.p;
        }
        let k = (level - self.p).div_ceil(self.c);
        self.p + k * self.c
    }

    fn at_cycle_start(&self, el: &Element) -> Result<Element> {
        self.push(el, self.cycle_start_after(el.level))
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        let level = a.level.max(b.level);
        let (a, b) = (self.push(a, level)?, self.push(b, level)?);
        Ok(Element { level, vector: a.vector.iter().zip(&b.vector).map(|(x, y)| x + y).collect() })
    }

    pub fn scale(&self, a: &Element, k: &BigInt) -> Element {
        Element { level: a.level, vector: a.vector.iter().map(|x| x * k).collect() }
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        self.add(a, &self.scale(b, &-BigInt::one()))
    }

    /// Zero in the limit: `Π^s` kills the pushforward to a period start, where
    /// `s` is where the kernels of the powers of `Π` stop growing.
    pub fn is_zero(&self, el: &Element) -> Result<bool> {
        let v = self.at_cycle_start(el)?;
        Ok(is_zero_vector(&self.stable_product.mul_vec(&v.vector)))
    }

    pub fn equals(&self, a: &Element, b: &Element) -> Result<bool> {
        self.is_zero(&self.sub(a, b)?)
    }

    /// A level past which a limit-zero element has zero vector.
    fn vanishing_level(&self, el: &Element) -> usize {
        self.cycle_start_after(el.level) + self.stable_power * self.c
    }

    pub fn is_positive(&self, el: &Element, bound: usize) -> Result<Positivity> {
        self.check(el)?;
        if self.is_zero(el)? {
            let level = self.vanishing_level(el);
            let v = self.push(el, level)?;
            return Ok(first_nonnegative(self, el, level + 1).unwrap_or(Positivity::Positive { level, vector: v.vector }));
        }
        if let Some(found) = first_nonnegative(self, el, el.level + bound + 1) {
            return Ok(found);
        }
        let start = self.at_cycle_start(el)?;
        match &self.shape {
            Shape::Primitive(perron) => match perron.pairing(&start.vector).signum() {
                Ordering::Less => return Ok(Positivity::NotPositive(Certificate::PerronNegative)),
                Ordering::Equal => return Ok(Positivity::NotPositive(Certificate::PerronBoundary)),
                Ordering::Greater => {
                    if let Some(found) = first_nonnegative(self, el, el.level + WITNESS_SEARCH_LIMIT) {
                        return Ok(found);
                    }
                }
            },
            Shape::ScalarPlusNilpotent { n, .. } => {
                match leading_terms(n, &start.vector) {
                    Err((coordinate, order)) => {
                        return Ok(Positivity::NotPositive(Certificate::LeadingTerm { coordinate, order }))
                    }
                    Ok(()) => {
                        if let Some(found) = first_nonnegative(self, el, el.level + WITNESS_SEARCH_LIMIT) {
                            return Ok(found);
                        }
                    }
                }
            }
            Shape::General => {}
        }
        let mut v = el.vector.clone();
        for level in el.level..=el.level + bound {
            if is_nonpositive_vector(&v) {
                return Ok(Positivity::NotPositive(Certificate::NonpositivePushforward { level }));
            }
            v = self.diagram.matrix(level).unwrap().mul_vec(&v);
        }
        Ok(Positivity::Unknown { bound })
    }

    /// The Perron state: `λ^{-k}·ℓ·v` for the pushforward `v` to level `P + kC`,
    /// with `ℓ₀ = 1`. Additive, positive on the cone, and independent of the level used.
    pub fn evaluate(&self, el: &Element) -> Result<Option<RealValue>> {
        let Some(perron) = self.perron() else { return Ok(None) };
        let v = self.at_cycle_start(el)?;
        let k = ((v.level - self.p) / self.c) as u32;
        Ok(Some(perron.divide_by_power(perron.pairing(&v.vector), k)))
    }

    /// Image of the order unit under `evaluate`.
    pub fn order_unit_image(&self) -> Result<Option<RealValue>> {
        self.evaluate(&self.order_unit())
    }

    /// Coefficients of the Perron functional on level `P`, scaled so the last is 1.
    pub fn cone_coefficients(&self) -> Option<Vec<RealValue>> {
        let perron = self.perron()?;
        let l = perron.left_normalized();
        match &l[..] {
            [] => None,
            [.., last] => match last {
                RealValue::Quadratic(q_last) => Some(
                    l.iter()
                        .map(|x| RealValue::Quadratic(x.as_quadratic().unwrap().div(q_last)))
                        .collect(),
                ),
                RealValue::Algebraic { num: last_num, .. } => Some(
                    l.iter()
                        .map(|x| match x {
                            RealValue::Algebraic { num, lambda, .. } => {
                                RealValue::Algebraic { num: num.clone(), den: last_num.clone(), lambda: lambda.clone() }
                            }
                            RealValue::Quadratic(_) => unreachable!(),
                        })
                        .collect(),
                ),
            },
        }
    }

    /// Human-readable description of the positive cone on level `P`.
    pub fn cone_description(&self) -> String {
        let vars = variable_names(self.diagram.vertex_count(self.p).unwrap());
        match &self.shape {
            Shape::Primitive(perron) => {
                let coeffs = self.cone_coefficients().unwrap();
                let symbol = lambda_symbol(perron);
                let terms: Vec<String> = coeffs
                    .iter()
                    .zip(&vars)
                    .map(|(c, v)| format_term(c, v, perron, symbol))
                    .filter(|t| !t.is_empty())
                    .collect();
                format!("{} ≥ 0 (Perron functional)", join_terms(&terms))
            }
            Shape::ScalarPlusNilpotent { .. } => format!(
                "eventual sign of leading terms in ({}), lexicographic (closed-form iteration)",
                vars.join(", ")
            ),
            Shape::General => "coordinatewise nonnegative after pushing (bounded iteration)".to_string(),
        }
    }

    /// Name for the Perron value in reports: `τ` for the golden mean, `λ` otherwise.
    pub fn perron_symbol(&self) -> Option<&'static str> {
        self.perron().map(lambda_symbol)
    }
}

fn variable_names(m: usize) -> Vec<String> {
    match m {
        1 => vec!["x".into()],
        2 => vec!["x".into(), "y".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (0..m).map(|i| format!("x{i}")).collect(),
    }
}

fn lambda_symbol(perron: &Perron) -> &'static str {
    let golden = QuadraticNumber::roots_of_monic_quadratic(&BigInt::one(), &-BigInt::one()).unwrap().0;
    if perron.quadratic_lambda() == Some(&golden) {
        "τ"
    } else {
        "λ"
    }
}

fn format_term(c: &RealValue, var: &str, perron: &Perron, symbol: &str) -> String {
    match c {
        RealValue::Quadratic(q) => {
            if q.is_zero() {
                String::new()
            } else if q.is_rational() && q.rational_part().is_one() {
                var.to_string()
            } else if q.is_rational() && q.rational_part().is_integer() {
                format!("{}{var}", q.rational_part())
            } else if !q.is_rational() && Some(q) == perron.quadratic_lambda() {
                format!("{symbol}{var}")
            } else if q.rational_part().is_zero() && !q.irrational_part().is_negative() {
                format!("{q}·{var}")
            } else {
                format!("({q})·{var}")
            }
        }
        RealValue::Algebraic { .. } => format!("{}·{var}", c),
    }
}

fn join_terms(terms: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        out.push_str(t);
    }
    out
}

/// First pushforward at a level below `limit` that is coordinatewise nonnegative.
fn first_nonnegative(g: &DimensionGroup, el: &Element, limit: usize) -> Option<Positivity> {
    let mut v = el.vector.clone();
    for level in el.level..limit {
        if is_nonnegative_vector(&v) {
            return Some(Positivity::Positive { level, vector: v });
        }
        v = g.diagram.matrix(level).unwrap().mul_vec(&v);
    }
    None
}

/// `Some((d, Π - dI))` when `Π - dI` is nilpotent.
fn scalar_plus_nilpotent(period: &IntMatrix) -> Option<(BigInt, IntMatrix)> {
    let m = period.rows();
    let d = period.get(0, 0).clone();
    let mut n = period.clone();
    for i in 0..m {
        let v = n.get(i, i) - &d;
        n.set(i, i, v);
    }
    n.pow(m).to_rows().iter().all(|r| is_zero_vector(r)).then_some((d, n))
}

/// Checks that every coordinate of `(dI + N)^k v` is eventually nonnegative.
/// The coordinate is `Σ_j C(k, j) d^{k-j} (N^j v)_i`, dominated for large `k`
/// by its largest `j` with `(N^j v)_i ≠ 0`. Returns the offending
/// `(coordinate, order)` otherwise.
fn leading_terms(n: &IntMatrix, v: &[BigInt]) -> std::result::Result<(), (usize, usize)> {
    let m = v.len();
    let mut powers = vec![v.to_vec()];
    for _ in 1..m {
        let next = n.mul_vec(powers.last().unwrap());
        powers.push(next);
    }
    for i in 0..m {
        if let Some(j) = (0..m).rev().find(|&j| !powers[j][i].is_zero()) {
            if powers[j][i].is_negative() {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

/// Brute-force oracle: coordinates of `(dI + N)^k v` via the binomial expansion.
pub fn binomial_power_coordinate(d: &BigInt, n: &IntMatrix, v: &[BigInt], k: usize, i: usize) -> BigInt {
    let mut acc = BigInt::zero();
    let mut w = v.to_vec();
    for j in 0..=k.min(v.len()) {
        acc += binomial(BigInt::from(k), BigInt::from(j)) * d.pow((k - j) as u32) * &w[i];
        w = n.mul_vec(&w);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(ts: TreeSystem) -> DimensionGroup {
        DimensionGroup::of_tree(&ts).unwrap()
    }

    fn el(level: usize, v: &[i64]) -> Element {
        Element::from_i64(level, v)
    }

    #[test]
    fn pushing() {
        let g = group(TreeSystem::cantor());
        assert_eq!(g.push(&el(0, &[1]), 2).unwrap(), el(2, &[4]));
        let f = group(TreeSystem::fibonacci());
        assert_eq!(f.push(&el(1, &[1, 0]), 3).unwrap(), el(3, &[2, 1]));
        assert_eq!(f.push(&el(1, &[1, 0]), 1).unwrap(), el(1, &[1, 0]));
        assert!(f.push(&el(2, &[1, 0]), 1).is_err());
    }

    #[test]
    fn equality() {
        let g = group(TreeSystem::cantor());
        assert!(g.equals(&el(0, &[1]), &el(1, &[2])).unwrap());
        let f = group(TreeSystem::fibonacci());
        assert!(!f.equals(&el(1, &[1, 0]), &el(1, &[0, 1])).unwrap());
        assert!(f.equals(&el(1, &[1, 1]), &el(2, &[2, 1])).unwrap());
    }

    #[test]
    fn ranks() {
        assert_eq!(group(TreeSystem::cantor()).rank(), 1);
        assert_eq!(group(TreeSystem::fibonacci()).rank(), 2);
        assert_eq!(group(TreeSystem::ended(3)).rank(), 1);
        // a singular period matrix loses rank in the limit
        let d = BratteliDiagram::eventually_periodic(vec![IntMatrix::from_i64(&[&[1], &[1]])], vec![IntMatrix::from_i64(&[&[1, 1], &[1, 1]])]).unwrap();
        let g = DimensionGroup::new(&d).unwrap();
        assert_eq!(g.rank(), 1);
        assert!(g.equals(&el(1, &[1, 0]), &el(1, &[0, 1])).unwrap());
    }

    #[test]
    fn fibonacci_positivity() {
        let f = group(TreeSystem::fibonacci());
        assert!(f.is_positive(&el(1, &[1, -1]), 10).unwrap().is_positive());
        assert_eq!(f.is_positive(&el(1, &[-1, 0]), 10).unwrap(), Positivity::NotPositive(Certificate::PerronNegative));
        // τ·(-2) + 3 < 0 but the first pushforward is still mixed
        assert!(f.is_positive(&el(1, &[-2, 3]), 0).unwrap().is_not_positive());
    }

    #[test]
    fn sturmian_positivity_is_lexicographic() {
        let s = group(TreeSystem::sturmian());
        assert!(s.is_scalar_plus_nilpotent());
        assert!(s.is_positive(&el(1, &[0, -1]), 5).unwrap().is_not_positive());
        assert!(s.is_positive(&el(1, &[0, 1]), 5).unwrap().is_positive());
        assert!(s.is_positive(&el(1, &[1, -7]), 5).unwrap().is_positive());
    }

    #[test]
    fn perron_states() {
        let c = group(TreeSystem::cantor());
        assert_eq!(c.order_unit_image().unwrap().unwrap().to_string(), "1");
        assert_eq!(c.evaluate(&el(1, &[1])).unwrap().unwrap().to_string(), "1/2");
        let f = group(TreeSystem::fibonacci());
        assert_eq!(f.order_unit_image().unwrap().unwrap().to_string(), "(1+√5)/2");
        assert_eq!(f.cone_description(), "τx+y ≥ 0 (Perron functional)");
        assert_eq!(group(TreeSystem::ended(4)).order_unit_image().unwrap().unwrap().to_string(), "4");
        assert_eq!(group(TreeSystem::regular(3)).order_unit_image().unwrap().unwrap().to_string(), "4");
    }

    #[test]
    fn state_is_level_independent() {
        let f = group(TreeSystem::fibonacci());
        let a = f.evaluate(&el(1, &[2, -1])).unwrap().unwrap();
        let b = f.evaluate(&f.push(&el(1, &[2, -1]), 6).unwrap()).unwrap().unwrap();
        assert_eq!(a.as_quadratic(), b.as_quadratic());
    }

    #[test]
    fn binomial_oracle_matches_iteration() {
        let n = IntMatrix::from_i64(&[&[0, 0], &[1, 0]]);
        let p = IntMatrix::from_i64(&[&[1, 0], &[1, 1]]);
        let v = vec![BigInt::from(2), BigInt::from(-9)];
        let mut w = v.clone();
        for k in 0..8 {
            for i in 0..2 {
                assert_eq!(binomial_power_coordinate(&BigInt::one(), &n, &v, k, i), w[i]);
            }
            w = p.mul_vec(&w);
        }
    }
}
