//! Exact integer matrices, lattice kernels and Gaussian elimination over exact fields.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Malformed("matrix rows have different lengths".into()));
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor for small literal matrices; panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
            .expect("ragged literal matrix")
    }

    pub fn column(entries: &[i64]) -> Self {
        let rows: Vec<&[i64]> = entries.chunks(1).collect();
        Self::from_i64(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not chain");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "vector length does not match matrix");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert!(self.is_square());
        let mut result = IntMatrix::identity(self.rows);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        result
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn has_zero_row(&self) -> bool {
        (0..self.rows).any(|r| self.row(r).iter().all(Zero::is_zero))
    }

    pub fn has_zero_column(&self) -> bool {
        (0..self.cols).any(|c| (0..self.rows).all(|r| self.get(r, c).is_zero()))
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        self.cols - self.kernel_basis().len()
    }

    /// A basis of the integer kernel `{x ∈ Z^cols : Mx = 0}`.
    ///
    /// Row-reduces `[Mᵀ | I]` with unimodular operations; the rows whose left block
    /// vanishes carry a basis of the kernel lattice in their right block.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        let n = self.cols;
        let k = self.rows;
        let mut aug: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigInt> = (0..k).map(|r| self.get(r, i).clone()).collect();
                row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
                row
            })
            .collect();
        let pivots = hermite_reduce(&mut aug, k);
        aug.into_iter().skip(pivots).map(|row| row[k..].to_vec()).collect()
    }

    /// True when some power of this square nonnegative matrix is strictly positive.
    pub fn is_primitive(&self) -> bool {
        if !self.is_square() || !self.is_nonnegative() || self.rows == 0 {
            return false;
        }
        let n = self.rows;
        let pattern: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| !self.get(i, j).is_zero()).collect()).collect();
        let mut power = pattern.clone();
        // Wielandt's bound: a primitive matrix has a positive power of exponent at most (n-1)^2+1.
        let limit = (n - 1) * (n - 1) + 1;
        for _ in 0..limit {
            if power.iter().all(|r| r.iter().all(|&b| b)) {
                return true;
            }
            power = (0..n)
                .map(|i| (0..n).map(|j| (0..n).any(|k| power[i][k] && pattern[k][j])).collect())
                .collect();
        }
        power.iter().all(|r| r.iter().all(|&b| b))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (c, x) in self.row(r).iter().enumerate() {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Brings the first `ncols` columns of `rows` into Hermite normal form using
/// unimodular row operations on whole rows. Returns the number of pivot rows;
/// all later rows are zero in the reduced columns.
pub fn hermite_reduce(rows: &mut [Vec<BigInt>], ncols: usize) -> usize {
    let mut pivot = 0;
    for col in 0..ncols {
        if pivot == rows.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for r in pivot..rows.len() {
                if !rows[r][col].is_zero()
                    && best.is_none_or(|b| rows[r][col].abs() < rows[b][col].abs())
                {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            rows.swap(pivot, b);
            let mut done = true;
            for r in pivot + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = rows[r][col].div_floor(&rows[pivot][col]);
                let (head, tail) = rows.split_at_mut(r);
                for (x, p) in tail[0].iter_mut().zip(&head[pivot]) {
                    *x -= &q * p;
                }
                if !tail[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[pivot][col].is_zero() {
            continue;
        }
        if rows[pivot][col].is_negative() {
            for x in rows[pivot].iter_mut() {
                *x = -&*x;
            }
        }
        for r in 0..pivot {
            let q = rows[r][col].div_floor(&rows[pivot][col]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = rows.split_at_mut(pivot);
            for (x, p) in head[r].iter_mut().zip(&tail[0]) {
                *x -= &q * p;
            }
        }
        pivot += 1;
    }
    pivot
}

/// Exact field arithmetic needed by Gaussian elimination.
pub trait Field: Clone + PartialEq + fmt::Debug {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn is_zero_value(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn over(&self, other: &Self) -> Self;
}

impl Field for BigRational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn is_zero_value(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn over(&self, other: &Self) -> Self {
        self / other
    }
}

/// A basis of the right null space of `rows` (a matrix over an exact field).
pub fn nullspace<F: Field>(rows: &[Vec<F>]) -> Vec<Vec<F>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<F>> = rows.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero_value()) else { continue };
        m.swap(r, p);
        let inv = F::one_value().over(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = x.times(&inv);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero_value() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pivot_row) {
                    *x = x.minus(&f.times(p));
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![F::zero_value(); ncols];
            v[fc] = F::one_value();
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = F::zero_value().minus(&m[row][fc]);
            }
            v
        })
        .collect()
}

pub fn is_zero_vector(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn is_nonnegative_vector(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_negative())
}

pub fn is_nonpositive_vector(v: &[BigInt]) -> bool {
    v.iter().all(|x| !x.is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = IntMatrix::from_i64(&[&[2, 4, 6], &[1, 2, 3]]);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(is_zero_vector(&m.mul_vec(v)));
        }
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_is_saturated() {
        // x + 2y = 0 has lattice kernel generated by (2,-1); a non-saturated
        // answer such as (4,-2) would miss it.
        let m = IntMatrix::from_i64(&[&[3, 6]]);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 1);
        let v = &ker[0];
        assert_eq!(v[0].abs(), BigInt::from(2));
        assert_eq!(v[1].abs(), BigInt::from(1));
    }

    #[test]
    fn ranks_of_small_matrices() {
        assert_eq!(IntMatrix::from_i64(&[&[1, 1], &[1, 0]]).rank(), 2);
        assert_eq!(IntMatrix::from_i64(&[&[1, 1], &[1, 1]]).rank(), 1);
        assert_eq!(IntMatrix::from_i64(&[&[0, 0], &[0, 0]]).rank(), 0);
        assert_eq!(IntMatrix::from_i64(&[&[2]]).rank(), 1);
    }

    #[test]
    fn primitivity() {
        assert!(IntMatrix::from_i64(&[&[1, 1], &[1, 0]]).is_primitive());
        assert!(!IntMatrix::from_i64(&[&[1, 0], &[1, 1]]).is_primitive());
        assert!(!IntMatrix::from_i64(&[&[0, 1], &[1, 0]]).is_primitive());
        assert!(IntMatrix::from_i64(&[&[2]]).is_primitive());
    }

    #[test]
    fn power_and_product_agree() {
        let m = IntMatrix::from_i64(&[&[1, 1], &[1, 0]]);
        assert_eq!(m.pow(5), m.mul(&m).mul(&m).mul(&m).mul(&m));
        assert_eq!(m.pow(0), IntMatrix::identity(2));
        assert_eq!(m.mul_vec(&ints(&[1, 1])), ints(&[2, 1]));
    }

    #[test]
    fn rational_nullspace() {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        let rows = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(7)]];
        let ns = nullspace(&rows);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            let dot: BigRational = r.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }
}
