//! Univariate polynomials over Q, Sturm sequences, and real algebraic numbers
//! given by an isolating interval.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::IntMatrix;

/// Coefficients from the constant term upwards, without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<BigRational>,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(a: BigRational) -> Self {
        Poly::from_coeffs(vec![a])
    }

    pub fn x() -> Self {
        Poly::from_coeffs(vec![q(0), q(1)])
    }

    pub fn from_coeffs(c: Vec<BigRational>) -> Self {
        let mut p = Poly { c };
        p.trim();
        p
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::from_coeffs(c.iter().map(|&a| q(a)).collect())
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(Zero::is_zero) {
            self.c.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.c.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.c.iter().rev() {
            acc = acc * x + a.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|a| a * k).collect())
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&(BigRational::one() / self.lead()))
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(self.c.iter().enumerate().skip(1).map(|(i, a)| a * q(i as i64)).collect())
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree().unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); r.len() - dd];
        let lead = d.lead();
        for k in (0..quot.len()).rev() {
            let f = &r[k + dd] / &lead;
            if f.is_zero() {
                continue;
            }
            for (i, b) in d.c.iter().enumerate() {
                r[k + i] -= &f * b;
            }
            quot[k] = f;
        }
        (Poly::from_coeffs(quot), Poly::from_coeffs(r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn squarefree(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = Poly::gcd(self, &self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn pow(&self, k: usize) -> Poly {
        let mut out = Poly::constant(q(1));
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn sturm_chain(&self) -> Vec<Poly> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(-&r);
        }
        chain
    }

    fn variations(chain: &[Poly], x: &BigRational) -> usize {
        let signs: Vec<Ordering> = chain
            .iter()
            .map(|p| p.eval(x).cmp(&BigRational::zero()))
            .filter(|s| *s != Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &BigRational, hi: &BigRational) -> usize {
        if self.is_zero() {
            panic!("root count of the zero polynomial");
        }
        let chain = self.squarefree().sturm_chain();
        Self::variations(&chain, lo).saturating_sub(Self::variations(&chain, hi))
    }

    /// A bound `B` with every real root strictly inside `(-B, B)`.
    pub fn root_bound(&self) -> BigRational {
        let lead = self.lead().abs();
        let m = self.c.iter().rev().skip(1).map(|a| a.abs() / &lead).max().unwrap_or_else(BigRational::zero);
        m + q(1)
    }

    /// All real roots, in increasing order, each with an isolating interval.
    pub fn real_roots(&self) -> Vec<RealAlgebraic> {
        let p = self.squarefree();
        if p.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let b = p.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-b.clone(), b)];
        while let Some((lo, hi)) = stack.pop() {
            match p.count_roots(&lo, &hi) {
                0 => {}
                1 => out.push(RealAlgebraic::from_isolating(p.clone(), lo, hi)),
                _ => {
                    let mid = (&lo + &hi) / q(2);
                    stack.push((lo, mid.clone()));
                    stack.push((mid, hi));
                }
            }
        }
        // isolating intervals are disjoint, so their left ends order the roots
        out.sort_by(|a, b| a.lo.cmp(&b.lo));
        out
    }

    pub fn largest_real_root(&self) -> Option<RealAlgebraic> {
        self.real_roots().pop()
    }

    pub fn is_integral_monic(&self) -> bool {
        self.lead().is_one() && self.c.iter().all(|a| a.is_integer())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::from_coeffs(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|a| -a).collect())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(xI - M)` by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &IntMatrix) -> Poly {
    assert!(m.is_square());
    let n = m.rows();
    let a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(m.get(i, j).clone())).collect())
        .collect();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = q(1);
    let mut mk = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    s += &a[i][l] * &mk[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        mk = next;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &mk[l][i];
            }
        }
        coeffs[n - k] = -tr / q(k as i64);
    }
    Poly::from_coeffs(coeffs)
}

/// Determinant of a square matrix of polynomials by fraction-free elimination.
pub fn poly_determinant(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::constant(q(1));
    }
    let mut sign = false;
    let mut prev = Poly::constant(q(1));
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                let (quot, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero());
                m[i][j] = quot;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -&d
    } else {
        d
    }
}

/// A real root of a squarefree rational polynomial.
///
/// Either `lo == hi` and the root is that rational, or `lo < hi`, the polynomial
/// changes sign strictly between them and has exactly one root in `(lo, hi)`.
#[derive(Clone, Debug)]
pub struct RealAlgebraic {
    poly: Poly,
    lo: BigRational,
    hi: BigRational,
}

impl RealAlgebraic {
    pub fn rational(x: BigRational) -> Self {
        let poly = Poly::from_coeffs(vec![-x.clone(), q(1)]);
        RealAlgebraic { poly, lo: x.clone(), hi: x }
    }

    /// `poly` must be squarefree with exactly one root in `(lo, hi]`.
    fn from_isolating(poly: Poly, lo: BigRational, hi: BigRational) -> Self {
        if poly.eval(&hi).is_zero() {
            return RealAlgebraic { poly, lo: hi.clone(), hi };
        }
        let mut r = RealAlgebraic { poly, lo, hi };
        while r.poly.eval(&r.lo).is_zero() {
            let mid = (&r.lo + &r.hi) / q(2);
            if r.poly.count_roots(&mid, &r.hi) == 1 {
                r.lo = mid;
            } else {
                r.hi = mid;
            }
        }
        r
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn exact(&self) -> Option<&BigRational> {
        (self.lo == self.hi).then_some(&self.lo)
    }

    /// Halves the isolating interval.
    pub fn refine(&mut self) {
        if self.lo == self.hi {
            return;
        }
        let mid = (&self.lo + &self.hi) / q(2);
        let fm = self.poly.eval(&mid);
        if fm.is_zero() {
            self.lo = mid.clone();
            self.hi = mid;
            return;
        }
        let flo = self.poly.eval(&self.lo);
        if flo.is_negative() == fm.is_negative() {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    pub fn refine_to(&mut self, width: &BigRational) {
        while &(&self.hi - &self.lo) > width {
            self.refine();
        }
    }

    /// Sign of `r` evaluated at this number, decided exactly.
    pub fn sign_of(&self, r: &Poly) -> Ordering {
        if let Some(x) = self.exact() {
            return r.eval(x).cmp(&BigRational::zero());
        }
        if r.is_zero() {
            return Ordering::Equal;
        }
        let g = Poly::gcd(r, &self.poly);
        if g.degree().unwrap_or(0) > 0 {
            let a = g.eval(&self.lo);
            let b = g.eval(&self.hi);
            if a.is_negative() != b.is_negative() {
                return Ordering::Equal;
            }
        }
        let mut me = self.clone();
        let rs = r.squarefree();
        loop {
            let at_lo = r.eval(&me.lo);
            if !at_lo.is_zero() && rs.count_roots(&me.lo, &me.hi) == 0 {
                return at_lo.cmp(&BigRational::zero());
            }
            me.refine();
            if let Some(x) = me.exact() {
                return r.eval(x).cmp(&BigRational::zero());
            }
        }
    }

    /// Compares this number with a rational.
    pub fn cmp_rational(&self, x: &BigRational) -> Ordering {
        self.sign_of(&Poly::from_coeffs(vec![-x.clone(), q(1)]))
    }

    pub fn approx(&self, bits: u32) -> BigRational {
        let mut me = self.clone();
        let width = BigRational::new(BigInt::one(), BigInt::one() << bits);
        me.refine_to(&width);
        (&me.lo + &me.hi) / q(2)
    }

    pub fn to_f64(&self) -> f64 {
        self.approx(64).to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for RealAlgebraic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(x) => write!(f, "{x}"),
            None => write!(f, "root of {} near {:.12}", self.poly, self.to_f64()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_gcd() {
        let a = Poly::from_ints(&[-1, 0, 1]); // x^2 - 1
        let b = Poly::from_ints(&[1, 1]); // x + 1
        let (quot, r) = a.div_rem(&b);
        assert_eq!(quot, Poly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(Poly::gcd(&a, &Poly::from_ints(&[-1, 1])), Poly::from_ints(&[-1, 1]));
    }

    #[test]
    fn squarefree_part() {
        let p = &Poly::from_ints(&[-1, 1]).pow(3) * &Poly::from_ints(&[2, 1]);
        assert_eq!(p.squarefree(), &Poly::from_ints(&[-1, 1]) * &Poly::from_ints(&[2, 1]));
    }

    #[test]
    fn char_poly_of_fibonacci_matrix() {
        let m = IntMatrix::from_i64(&[&[1, 1], &[1, 0]]);
        assert_eq!(characteristic_polynomial(&m), Poly::from_ints(&[-1, -1, 1]));
        let m3 = IntMatrix::from_i64(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]);
        // det(xI - M) = (x-1)^3 - 24
        assert_eq!(characteristic_polynomial(&m3), Poly::from_ints(&[-25, 3, -3, 1]));
    }

    #[test]
    fn roots_of_x2_minus_x_minus_1() {
        let p = Poly::from_ints(&[-1, -1, 1]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 2);
        let tau = roots[1].to_f64();
        assert!((tau - 1.618_033_988_749_895).abs() < 1e-12);
        // x - 1 is positive at tau, 2x - 3 positive, x - 2 negative
        assert_eq!(roots[1].sign_of(&Poly::from_ints(&[-1, 1])), Ordering::Greater);
        assert_eq!(roots[1].sign_of(&Poly::from_ints(&[-2, 1])), Ordering::Less);
        assert_eq!(roots[1].sign_of(&Poly::from_ints(&[-1, -1, 1])), Ordering::Equal);
        // x^2 - x - 1 times anything vanishes
        assert_eq!(roots[1].sign_of(&(&p * &Poly::from_ints(&[3, 7]))), Ordering::Equal);
    }

    #[test]
    fn rational_roots_are_exact() {
        let p = &Poly::from_ints(&[-2, 1]) * &Poly::from_ints(&[3, 1]);
        let roots = p.real_roots();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[1].cmp_rational(&q(2)), Ordering::Equal);
        assert_eq!(roots[0].cmp_rational(&q(-3)), Ordering::Equal);
    }

    #[test]
    fn polynomial_determinant_matches_char_poly() {
        let m = IntMatrix::from_i64(&[&[1, 2, 0], &[0, 1, 3], &[4, 0, 1]]);
        let entries: Vec<Vec<Poly>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        let a = Poly::constant(BigRational::from_integer(-m.get(i, j).clone()));
                        if i == j {
                            &a + &Poly::x()
                        } else {
                            a
                        }
                    })
                    .collect()
            })
            .collect();
        assert_eq!(poly_determinant(entries), characteristic_polynomial(&m));
    }

    #[test]
    fn compare_algebraic_numbers() {
        let sqrt2 = Poly::from_ints(&[-2, 0, 1]).largest_real_root().unwrap();
        assert_eq!(sqrt2.cmp_rational(&BigRational::new(3.into(), 2.into())), Ordering::Less);
        assert_eq!(sqrt2.cmp_rational(&BigRational::new(7.into(), 5.into())), Ordering::Greater);
        let two = RealAlgebraic::rational(q(2));
        assert_eq!(two.cmp_rational(&q(2)), Ordering::Equal);
    }
}
