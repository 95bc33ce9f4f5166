//! Exact arithmetic in real quadratic fields Q(√d).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::Field;

/// `a + b·√d` with `d > 1` squarefree. Rationals have `b = 0`, and then `d` is irrelevant.
#[derive(Clone, Debug)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

/// Writes `n = s²·r` with `r` squarefree, returning `(s, r)`.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut r = BigInt::one();
    let mut m = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut e = 0u32;
        while (&m % &p).is_zero() {
            m /= &p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            r *= &p;
        }
        p += 1;
    }
    (s, r * m)
}

impl QuadraticNumber {
    pub fn rational(a: BigRational) -> Self {
        QuadraticNumber { a, b: BigRational::zero(), d: BigInt::zero() }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    /// `a + b√d` for any nonnegative `d`; square factors of `d` are pulled out.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        if b.is_zero() || d.is_zero() {
            return Self::rational(a);
        }
        let (s, r) = split_square(&d);
        let b = b * BigRational::from_integer(s);
        if r.is_one() {
            Self::rational(a + b)
        } else {
            QuadraticNumber { a, b, d: r }
        }
    }

    pub fn sqrt(n: BigInt) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), n)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        (!self.b.is_zero()).then_some(&self.d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn common_d(&self, other: &Self) -> BigInt {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, _) => other.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert_eq!(self.d, other.d, "mixing different quadratic fields");
                self.d.clone()
            }
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadraticNumber { a: self.a.clone(), b: -&self.b, d: self.d.clone() }
    }

    /// `a² - d·b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(self.d.clone()) * &self.b * &self.b
    }

    pub fn signum(&self) -> Ordering {
        let za = self.a.cmp(&BigRational::zero());
        let zb = self.b.cmp(&BigRational::zero());
        match (za, zb) {
            (_, Ordering::Equal) => za,
            (Ordering::Equal, _) => zb,
            _ if za == zb => za,
            _ => {
                // opposite signs: compare a² with d·b²
                let n = self.norm().cmp(&BigRational::zero());
                if za == Ordering::Greater {
                    n
                } else {
                    n.reverse()
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::integer(1);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    /// Largest integer not exceeding this number.
    pub fn floor(&self) -> BigInt {
        let guess = BigInt::from(self.to_f64().floor() as i64);
        let mut k = guess;
        while self.sub(&Self::rational(BigRational::from_integer(k.clone()))).is_negative() {
            k -= 1;
        }
        while !self.sub(&Self::rational(BigRational::from_integer(&k + 1))).is_negative() {
            k += 1;
        }
        k
    }

    /// The real roots of `x² - s·x + t` when they are irrational, larger first.
    pub fn roots_of_monic_quadratic(s: &BigInt, t: &BigInt) -> Option<(Self, Self)> {
        let disc: BigInt = s * s - BigInt::from(4) * t;
        if disc.is_negative() {
            return None;
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let a = BigRational::from_integer(s.clone()) * &half;
        let big = Self::new(a.clone(), half.clone(), disc.clone());
        let small = Self::new(a, -half, disc);
        Some((big, small))
    }

    /// True when `disc` has an integer square root.
    pub fn is_perfect_square(n: &BigInt) -> bool {
        !n.is_negative() && {
            let r = n.sqrt();
            &r * &r == *n
        }
    }
}

impl PartialEq for QuadraticNumber {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadraticNumber {}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum()
    }
}

impl Field for QuadraticNumber {
    fn zero_value() -> Self {
        Self::integer(0)
    }

    fn one_value() -> Self {
        Self::integer(1)
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }

    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }

    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }

    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn over(&self, other: &Self) -> Self {
        self.div(other)
    }
}

impl QuadraticNumber {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.common_d(other);
        let b = &self.b + &other.b;
        if b.is_zero() {
            return Self::rational(&self.a + &other.a);
        }
        QuadraticNumber { a: &self.a + &other.a, b, d }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.common_d(other);
        let dq = BigRational::from_integer(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * dq;
        let b = &self.a * &other.b + &self.b * &other.a;
        if b.is_zero() {
            return Self::rational(a);
        }
        QuadraticNumber { a, b, d }
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        let n = other.norm();
        let num = self.mul(&other.conjugate());
        if num.b.is_zero() {
            return Self::rational(num.a / n);
        }
        QuadraticNumber { a: num.a / &n, b: num.b / &n, d: num.d }
    }

    pub fn neg(&self) -> Self {
        QuadraticNumber { a: -&self.a, b: -&self.b, d: self.d.clone() }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        self.mul(&Self::rational(k.clone()))
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let den = self.a.denom().lcm(self.b.denom());
        let big_a = (&self.a * BigRational::from_integer(den.clone())).to_integer();
        let big_b = (&self.b * BigRational::from_integer(den.clone())).to_integer();
        let mut s = String::new();
        if !big_a.is_zero() {
            s.push_str(&big_a.to_string());
            s.push(if big_b.is_negative() { '-' } else { '+' });
        } else if big_b.is_negative() {
            s.push('-');
        }
        let mag = big_b.abs();
        if !mag.is_one() {
            s.push_str(&mag.to_string());
        }
        s.push('√');
        s.push_str(&self.d.to_string());
        if den.is_one() {
            write!(f, "{s}")
        } else if big_a.is_zero() {
            write!(f, "{s}/{den}")
        } else {
            write!(f, "({s})/{den}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn tau() -> QuadraticNumber {
        QuadraticNumber::new(r(1, 2), r(1, 2), 5.into())
    }

    #[test]
    fn golden_ratio_identities() {
        let t = tau();
        assert_eq!(t.mul(&t), t.add(&QuadraticNumber::integer(1)));
        assert_eq!(QuadraticNumber::integer(1).div(&t), t.sub(&QuadraticNumber::integer(1)));
        assert_eq!(t.to_string(), "(1+√5)/2");
        assert_eq!(t.floor(), BigInt::from(1));
    }

    #[test]
    fn signs_are_exact() {
        // 1393 - 985√2 ≈ -0.000359
        let x = QuadraticNumber::new(r(1393, 1), r(-985, 1), 2.into());
        assert_eq!(x.signum(), Ordering::Less);
        let y = QuadraticNumber::new(r(-1393, 1), r(985, 1), 2.into());
        assert_eq!(y.signum(), Ordering::Greater);
        assert_eq!(QuadraticNumber::integer(0).signum(), Ordering::Equal);
    }

    #[test]
    fn square_factors_are_extracted() {
        let x = QuadraticNumber::sqrt(8.into());
        assert_eq!(x, QuadraticNumber::new(r(0, 1), r(2, 1), 2.into()));
        assert!(QuadraticNumber::sqrt(9.into()).is_rational());
        assert_eq!(x.to_string(), "2√2");
    }

    #[test]
    fn quadratic_roots() {
        let (big, small) =
            QuadraticNumber::roots_of_monic_quadratic(&BigInt::from(1), &BigInt::from(-1)).unwrap();
        assert_eq!(big, tau());
        assert_eq!(big.add(&small), QuadraticNumber::integer(1));
        assert_eq!(big.mul(&small), QuadraticNumber::integer(-1));
    }
}
