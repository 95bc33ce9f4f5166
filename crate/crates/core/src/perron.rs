//! Perron eigenvalue and left eigenvector of a primitive integer matrix.
//!
//! When the eigenvalue has degree at most two everything lives in a
//! quadratic field. Otherwise the eigenvector is the first column of the
//! adjugate of `xI - Mᵀ`, a vector of polynomials evaluated at `λ`, and signs
//! are decided exactly through the isolating interval of `λ`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{nullspace, IntMatrix};
use crate::poly::{characteristic_polynomial, poly_determinant, Poly, RealAlgebraic};
use crate::quadratic::QuadraticNumber;

#[derive(Debug, Clone)]
pub enum LeftVector {
    /// Normalized so the first entry is 1.
    Quadratic(Vec<QuadraticNumber>),
    /// Entries `p_i(λ)`; all positive at `λ`.
    Cofactors(Vec<Poly>),
}

#[derive(Debug, Clone)]
pub struct Perron {
    lambda: RealAlgebraic,
    quadratic_lambda: Option<QuadraticNumber>,
    left: LeftVector,
    degree_at_most_two: bool,
}

/// An exact real number coming out of the Perron embedding.
#[derive(Debug, Clone)]
pub enum RealValue {
    Quadratic(QuadraticNumber),
    /// `num(λ) / den(λ)` with `den(λ) > 0`.
    Algebraic { num: Poly, den: Poly, lambda: RealAlgebraic },
}

impl RealValue {
    pub fn signum(&self) -> Ordering {
        match self {
            RealValue::Quadratic(q) => q.signum(),
            RealValue::Algebraic { num, lambda, .. } => lambda.sign_of(num),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealValue::Quadratic(q) => q.to_f64(),
            RealValue::Algebraic { num, den, lambda } => {
                let x = lambda.approx(80);
                (num.eval(&x) / den.eval(&x)).to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticNumber> {
        match self {
            RealValue::Quadratic(q) => Some(q),
            RealValue::Algebraic { .. } => None,
        }
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealValue::Quadratic(q) => write!(f, "{q}"),
            RealValue::Algebraic { .. } => write!(f, "{:.12}", self.to_f64()),
        }
    }
}

fn q_int(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// Writes `λ` as an element of `Q(√d)` when its minimal polynomial has degree ≤ 2.
fn quadratic_form(chi: &Poly, lambda: &RealAlgebraic) -> Option<QuadraticNumber> {
    if let Some(x) = lambda.exact() {
        return Some(QuadraticNumber::rational(x.clone()));
    }
    let approx = lambda.approx(80);
    let rounded = approx.round();
    if lambda.cmp_rational(&rounded) == Ordering::Equal {
        return Some(QuadraticNumber::rational(rounded));
    }
    // a quadratic λ has its real conjugate among the other roots of χ
    for mu in chi.real_roots() {
        let m = mu.approx(80);
        let s = (&approx + &m).round().to_integer();
        let t = (&approx * &m).round().to_integer();
        let factor = Poly::from_coeffs(vec![q_int(&t), -q_int(&s), BigRational::one()]);
        if !chi.rem(&factor).is_zero() || lambda.sign_of(&factor) != Ordering::Equal {
            continue;
        }
        let (big, small) = QuadraticNumber::roots_of_monic_quadratic(&s, &t)?;
        let lo = QuadraticNumber::rational(lambda.interval().0.clone());
        let hi = QuadraticNumber::rational(lambda.interval().1.clone());
        for root in [big, small] {
            if root > lo && root < hi {
                return Some(root);
            }
        }
    }
    None
}

impl Perron {
    pub fn of(m: &IntMatrix) -> Result<Self> {
        if !m.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        let n = m.rows();
        let chi = characteristic_polynomial(m);
        let lambda = chi.largest_real_root().expect("a primitive matrix has a Perron root");
        let quadratic_lambda = quadratic_form(&chi, &lambda);
        let left = match &quadratic_lambda {
            Some(l) => {
                let rows: Vec<Vec<QuadraticNumber>> = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let e = QuadraticNumber::rational(q_int(m.get(j, i)));
                                if i == j {
                                    e.sub(l)
                                } else {
                                    e
                                }
                            })
                            .collect()
                    })
                    .collect();
                let mut basis = nullspace(&rows);
                assert_eq!(basis.len(), 1, "the Perron eigenvalue is simple");
                let v = basis.pop().unwrap();
                let first = v[0].clone();
                LeftVector::Quadratic(v.iter().map(|x| x.div(&first)).collect())
            }
            None => LeftVector::Cofactors(adjugate_column(m)),
        };
        Ok(Perron { degree_at_most_two: quadratic_lambda.is_some(), lambda, quadratic_lambda, left })
    }

    pub fn lambda(&self) -> &RealAlgebraic {
        &self.lambda
    }

    /// `λ` in closed form when it has degree at most two.
    pub fn quadratic_lambda(&self) -> Option<&QuadraticNumber> {
        self.quadratic_lambda.as_ref()
    }

    pub fn is_quadratic(&self) -> bool {
        self.degree_at_most_two
    }

    pub fn left(&self) -> &LeftVector {
        &self.left
    }

    /// Left eigenvector normalized by its first entry, in closed form when quadratic.
    pub fn left_normalized(&self) -> Vec<RealValue> {
        match &self.left {
            LeftVector::Quadratic(v) => v.iter().cloned().map(RealValue::Quadratic).collect(),
            LeftVector::Cofactors(p) => p
                .iter()
                .map(|e| RealValue::Algebraic { num: e.clone(), den: p[0].clone(), lambda: self.lambda.clone() })
                .collect(),
        }
    }

    /// `ℓ·v` with `ℓ₀ = 1`.
    pub fn pairing(&self, v: &[BigInt]) -> RealValue {
        match &self.left {
            LeftVector::Quadratic(l) => RealValue::Quadratic(
                l.iter().zip(v).fold(QuadraticNumber::integer(0), |acc, (a, x)| acc.add(&a.scale(&q_int(x)))),
            ),
            LeftVector::Cofactors(p) => {
                let num = p.iter().zip(v).fold(Poly::zero(), |acc, (e, x)| &acc + &e.scale(&q_int(x)));
                RealValue::Algebraic { num, den: p[0].clone(), lambda: self.lambda.clone() }
            }
        }
    }

    /// `x / λ^k`.
    pub fn divide_by_power(&self, x: RealValue, k: u32) -> RealValue {
        if k == 0 {
            return x;
        }
        match x {
            RealValue::Quadratic(a) => {
                let l = self.quadratic_lambda.as_ref().expect("quadratic values come with quadratic λ");
                RealValue::Quadratic(a.div(&l.pow(k)))
            }
            RealValue::Algebraic { num, den, lambda } => {
                let den = &den * &Poly::x().pow(k as usize);
                RealValue::Algebraic { num, den, lambda }
            }
        }
    }
}

/// First column of `adj(xI - Mᵀ)`: entry `i` is `(-1)^i det` of the minor
/// without row 0 and column `i`.
fn adjugate_column(m: &IntMatrix) -> Vec<Poly> {
    let n = m.rows();
    if n == 1 {
        return vec![Poly::constant(BigRational::one())];
    }
    let entry = |r: usize, c: usize| -> Poly {
        // (xI - Mᵀ)[r][c]
        let a = Poly::constant(-q_int(m.get(c, r)));
        if r == c {
            &a + &Poly::x()
        } else {
            a
        }
    };
    (0..n)
        .map(|i| {
            let minor: Vec<Vec<Poly>> = (1..n)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| entry(r, c)).collect())
                .collect();
            let d = poly_determinant(minor);
            if i % 2 == 1 {
                -&d
            } else {
                d
            }
        })
        .collect()
}

impl fmt::Display for Perron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.quadratic_lambda {
            Some(l) => write!(f, "{l}"),
            None => write!(f, "{}", self.lambda),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    #[test]
    fn golden_ratio() {
        let p = Perron::of(&m(&[&[1, 1], &[1, 0]])).unwrap();
        assert_eq!(p.to_string(), "(1+√5)/2");
        let LeftVector::Quadratic(l) = p.left() else { panic!() };
        // (1, τ - 1)
        assert_eq!(l[1].to_string(), "(-1+√5)/2");
        assert_eq!(p.pairing(&[BigInt::from(1), BigInt::from(1)]).to_string(), "(1+√5)/2");
    }

    #[test]
    fn integer_eigenvalues() {
        let p = Perron::of(&m(&[&[2]])).unwrap();
        assert_eq!(p.to_string(), "2");
        let p = Perron::of(&m(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(p.to_string(), "2");
        assert!(Perron::of(&m(&[&[1, 0], &[1, 1]])).is_err());
    }

    #[test]
    fn silver_ratio() {
        let p = Perron::of(&m(&[&[2, 1], &[1, 0]])).unwrap();
        assert_eq!(p.to_string(), "1+√2");
    }

    #[test]
    fn cubic_eigenvalue_signs_are_exact() {
        // x^3 - x - 1 companion-like primitive matrix, the plastic number
        let a = m(&[&[0, 1, 0], &[0, 0, 1], &[1, 1, 0]]);
        let p = Perron::of(&a).unwrap();
        assert!(!p.is_quadratic());
        assert!((p.lambda().to_f64() - 1.324_717_957_244_746).abs() < 1e-12);
        let ell: Vec<f64> = p.left_normalized().iter().map(RealValue::to_f64).collect();
        // check ℓ A = λ ℓ numerically
        for j in 0..3 {
            let lhs: f64 = (0..3).map(|i| ell[i] * a.get(i, j).to_f64().unwrap()).sum();
            assert!((lhs - p.lambda().to_f64() * ell[j]).abs() < 1e-9);
        }
        assert!(ell.iter().all(|&x| x > 0.0));
        let zero = p.pairing(&[BigInt::zero(), BigInt::zero(), BigInt::zero()]);
        assert_eq!(zero.signum(), Ordering::Equal);
        let v: Vec<BigInt> = [5, -3, -2].iter().map(|&x| BigInt::from(x)).collect();
        let val = p.pairing(&v);
        assert_eq!(val.signum(), val.to_f64().partial_cmp(&0.0).unwrap());
    }
}
