//! Dense matrices over a pluggable scalar and the linear-algebra kernel.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::algebra::{Field, Rational, Ring};
use crate::error::{Error, Result};

/// Relative symmetry tolerance for floating-point input.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// LU pivots below this fraction of the largest entry count as singular.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-12;
/// Cholesky reconstruction bound relative to the largest entry.
pub const CHOLESKY_RECON_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("matrices need at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        DenseMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        let mut f = f;
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl<T: Serialize> Serialize for DenseMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<T: Ring> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let n = d.len();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(DenseMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&other[(k, j)]));
            }
            acc
        }))
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect())
    }

    /// Schur-Hadamard (entrywise) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "hadamard of {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.mul(b)).collect(),
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows, other.cols);
        DenseMatrix::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)].mul(&other[(i % p, j % q)])
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("subtracting matrices of different shape".into()));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    /// Copy with row `skip_row` and column `skip_col` removed.
    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != skip_col).collect();
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Determinant by Laplace expansion along the sparsest remaining row,
    /// memoizing minors keyed by their row and column subsets. Works over any
    /// commutative ring, including polynomial entries.
    pub fn determinant_cofactor(&self) -> Result<T> {
        let n = self.require_square()?;
        if n > 63 {
            return Err(Error::Unsupported("cofactor expansion limited to 63x63".into()));
        }
        let full = (1u64 << n) - 1;
        let mut memo = HashMap::new();
        Ok(self.det_rec(full, full, &mut memo))
    }

    fn det_rec(&self, rows: u64, cols: u64, memo: &mut HashMap<(u64, u64), T>) -> T {
        let k = rows.count_ones();
        if k == 0 {
            return T::one();
        }
        if k == 1 {
            return self[(rows.trailing_zeros() as usize, cols.trailing_zeros() as usize)].clone();
        }
        if let Some(v) = memo.get(&(rows, cols)) {
            return v.clone();
        }
        let col_idx: Vec<usize> = (0..self.cols).filter(|c| cols >> c & 1 == 1).collect();
        let pivot_row = (0..self.rows)
            .filter(|r| rows >> r & 1 == 1)
            .max_by_key(|&r| col_idx.iter().filter(|&&c| self[(r, c)].is_zero()).count())
            .expect("nonempty");
        let row_pos = (0..pivot_row).filter(|r| rows >> r & 1 == 1).count();
        let mut acc = T::zero();
        for (pos, &c) in col_idx.iter().enumerate() {
            let a = &self[(pivot_row, c)];
            if a.is_zero() {
                continue;
            }
            let sub = self.det_rec(rows & !(1 << pivot_row), cols & !(1 << c), memo);
            let term = a.mul(&sub);
            acc = if (row_pos + pos) % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        memo.insert((rows, cols), acc.clone());
        acc
    }

    /// Entry `(i, j)` of the adjugate, `(-1)^(i+j)` times the minor with row
    /// `j` and column `i` deleted, so that `inverse = adjugate / det`.
    pub fn adjugate_entry(&self, i: usize, j: usize) -> Result<T> {
        let n = self.require_square()?;
        if n < 2 || i >= n || j >= n {
            return Err(Error::IndexOutOfRange { row: i, col: j, n });
        }
        let d = self.minor(j, i).determinant_cofactor()?;
        Ok(if (i + j) % 2 == 0 { d } else { d.neg() })
    }

    pub fn adjugate_cofactor(&self) -> Result<Self> {
        let n = self.require_square()?;
        if n == 1 {
            return Ok(DenseMatrix::identity(1));
        }
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.adjugate_entry(i, j)?;
            }
        }
        Ok(out)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.rows).map(|i| self.row(i).iter().fold(T::zero(), |a, b| a.add(b))).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |a, i| a.add(&self[(i, j)])))
            .collect()
    }
}

/// Block-diagonal assembly of square blocks.
pub fn block_diagonal<T: Ring>(blocks: &[DenseMatrix<T>]) -> Result<DenseMatrix<T>> {
    let mut n = 0;
    for b in blocks {
        n += b.require_square()?;
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("no blocks".into()));
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(off + i, off + j)] = b[(i, j)].clone();
            }
        }
        off += b.rows;
    }
    Ok(out)
}

/// Result of fraction-free Gauss-Jordan elimination over an exact field.
pub struct ExactElimination<T> {
    pub determinant: T,
    pub inverse: DenseMatrix<T>,
}

/// Fraction-free (Bareiss) Gauss-Jordan on `[A | I]`. Every intermediate
/// division is exact; on completion the left block is `det(A) * I` up to the
/// sign of the row permutation and the right block is `adj(A)` with the same sign.
pub fn fraction_free_inverse<T: Field>(a: &DenseMatrix<T>) -> Result<ExactElimination<T>> {
    let n = a.require_square()?;
    let w = 2 * n;
    let mut m: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            row
        })
        .collect();
    let mut prev = T::one();
    let mut swaps = 0usize;
    for k in 0..n {
        let p = (k..n).find(|&r| !m[r][k].is_zero()).ok_or(Error::Singular)?;
        if p != k {
            m.swap(p, k);
            swaps += 1;
        }
        let pivot = m[k][k].clone();
        for i in 0..n {
            if i == k {
                continue;
            }
            let factor = m[i][k].clone();
            for j in 0..w {
                let v = pivot.mul(&m[i][j]).sub(&factor.mul(&m[k][j]));
                m[i][j] = v.div(&prev)?;
            }
        }
        prev = pivot;
    }
    // Row k was last scaled at step k; bring it up to the final pivot.
    for k in 0..n.saturating_sub(1) {
        let scale = prev.div(&m[k][k])?;
        for j in 0..w {
            m[k][j] = m[k][j].mul(&scale);
        }
    }
    let diag = prev;
    let det = if swaps % 2 == 0 { diag.clone() } else { diag.neg() };
    let inv_diag = diag.inv()?;
    let inverse = DenseMatrix::from_fn(n, n, |i, j| m[i][n + j].mul(&inv_diag));
    Ok(ExactElimination { determinant: det, inverse })
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn bareiss_determinant<T: Field>(a: &DenseMatrix<T>) -> Result<T> {
    let n = a.require_square()?;
    let mut m: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut prev = T::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
            return Ok(T::zero());
        };
        if p != k {
            m.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = v.div(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(if negate { prev.neg() } else { prev })
}

/// Leading principal minors via Bareiss elimination without pivoting: the
/// k-th pivot is exactly the k-th leading minor. Stops at the first zero pivot.
pub fn leading_principal_minors<T: Field>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let n = a.require_square()?;
    let mut m: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut prev = T::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = m[k][k].clone();
        out.push(pivot.clone());
        if pivot.is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = pivot.mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = v.div(&prev)?;
            }
        }
        prev = pivot;
    }
    Ok(out)
}

/// Scalars supporting both exact and floating-point linear algebra paths.
pub trait Numeric: Ring + PartialOrd {
    const EXACT: bool;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    fn render(&self) -> String;
    fn abs_val(&self) -> Self;
    fn invert(m: &DenseMatrix<Self>) -> Result<DenseMatrix<Self>>;
    fn positive_definite(m: &DenseMatrix<Self>) -> Result<bool>;
    /// Maximum symmetric deviation, or `None` if within the scalar's tolerance.
    fn asymmetry(m: &DenseMatrix<Self>) -> Option<f64>;
}

impl Numeric for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn invert(m: &DenseMatrix<Self>) -> Result<DenseMatrix<Self>> {
        Ok(fraction_free_inverse(m)?.inverse)
    }

    /// Sylvester's criterion: every leading principal minor strictly positive.
    fn positive_definite(m: &DenseMatrix<Self>) -> Result<bool> {
        if let Some(dev) = Self::asymmetry(m) {
            return Err(Error::NotSymmetric(dev));
        }
        let n = m.rows();
        let minors = leading_principal_minors(m)?;
        Ok(minors.len() == n && minors.iter().all(|d| d.is_positive()))
    }

    fn asymmetry(m: &DenseMatrix<Self>) -> Option<f64> {
        let n = m.rows();
        let mut worst: Option<f64> = None;
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    let d = Numeric::to_f64(&(&m[(i, j)] - &m[(j, i)])).abs();
                    worst = Some(worst.map_or(d, |w: f64| w.max(d)));
                }
            }
        }
        worst
    }
}

impl Numeric for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn invert(m: &DenseMatrix<Self>) -> Result<DenseMatrix<Self>> {
        m.lu_inverse(SINGULAR_PIVOT_TOL)
    }

    fn positive_definite(m: &DenseMatrix<Self>) -> Result<bool> {
        match m.cholesky(SYMMETRY_TOL) {
            Ok(_) => Ok(true),
            Err(Error::NotPositiveDefinite) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn asymmetry(m: &DenseMatrix<Self>) -> Option<f64> {
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        let n = m.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if worst > SYMMETRY_TOL * scale {
            Some(worst)
        } else {
            None
        }
    }
}

impl<T: Numeric> DenseMatrix<T> {
    /// Exact fraction-free inverse for rationals, pivoted LU for floats.
    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        T::invert(self)
    }

    pub fn is_positive_definite(&self) -> Result<bool> {
        self.require_square()?;
        T::positive_definite(self)
    }

    pub fn require_symmetric(&self) -> Result<()> {
        self.require_square()?;
        match T::asymmetry(self) {
            Some(d) => Err(Error::NotSymmetric(d)),
            None => Ok(()),
        }
    }

    pub fn to_f64(&self) -> DenseMatrix<f64> {
        self.map(Numeric::to_f64)
    }

    pub fn from_rationals(m: &DenseMatrix<Rational>) -> Self {
        m.map(T::from_rational)
    }
}

impl DenseMatrix<f64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Partially pivoted LU inverse; fails when a pivot falls below
    /// `pivot_tol * max|entry|`.
    pub fn lu_inverse(&self, pivot_tol: f64) -> Result<Self> {
        let n = self.require_square()?;
        let threshold = pivot_tol * self.max_abs();
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|r| (r, a[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= threshold || pv == 0.0 {
                return Err(Error::NumericallySingular { pivot: pv, threshold });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        let mut inv = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for c in 0..n {
            for i in 0..n {
                col[i] = if perm[i] == c { 1.0 } else { 0.0 };
            }
            for i in 0..n {
                let mut s = col[i];
                for j in 0..i {
                    s -= a[i * n + j] * col[j];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in i + 1..n {
                    s -= a[i * n + j] * col[j];
                }
                col[i] = s / a[i * n + i];
            }
            for i in 0..n {
                inv[i * n + c] = col[i];
            }
        }
        DenseMatrix::new(n, n, inv)
    }

    /// Lower-triangular `L` with positive diagonal and `L * L^T = A`.
    pub fn cholesky(&self, sym_tol: f64) -> Result<Self> {
        let n = self.require_square()?;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > sym_tol * scale {
                    return Err(Error::NotSymmetric(d));
                }
            }
        }
        let mut l = DenseMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut s = self[(j, j)];
            for k in 0..j {
                s -= l[(j, k)] * l[(j, k)];
            }
            if !(s > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let d = s.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }
}

impl DenseMatrix<Rational> {
    pub fn determinant(&self) -> Result<Rational> {
        bareiss_determinant(self)
    }

    pub fn from_f64_exact(m: &DenseMatrix<f64>) -> Result<Self> {
        let data = m
            .as_slice()
            .iter()
            .map(|&x| {
                Rational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite entry {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        DenseMatrix::new(m.rows(), m.cols(), data)
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};
    use crate::poly::{Polynomial, VariableSet};
    use proptest::prelude::*;

    fn ri(rows: &[&[i64]]) -> DenseMatrix<Rational> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .unwrap()
    }

    fn fl(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hadamard_examples() {
        let i = DenseMatrix::<Rational>::identity(3);
        assert_eq!(i.hadamard(&i).unwrap(), i);
        let p = ri(&[&[2, 1], &[1, 1]]);
        let q = ri(&[&[1, -1], &[-1, 2]]);
        assert_eq!(p.hadamard(&q).unwrap(), ri(&[&[2, -1], &[-1, 2]]));
        let a = DenseMatrix::<f64>::zeros(2, 3);
        let b = DenseMatrix::<f64>::zeros(3, 2);
        assert!(matches!(a.hadamard(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn kron_examples() {
        let a = DenseMatrix::from_diagonal(&[int(1), int(2)]);
        let b = DenseMatrix::from_diagonal(&[int(3), int(4)]);
        assert_eq!(a.kron(&b), DenseMatrix::from_diagonal(&[int(3), int(4), int(6), int(8)]));
        let i2 = DenseMatrix::<Rational>::identity(2);
        let i3 = DenseMatrix::<Rational>::identity(3);
        assert_eq!(i2.kron(&i3), DenseMatrix::identity(6));
    }

    #[test]
    fn exact_inverse_examples() {
        let p = ri(&[&[2, 1], &[1, 1]]);
        assert_eq!(p.inverse().unwrap(), ri(&[&[1, -1], &[-1, 2]]));
        let i = DenseMatrix::<Rational>::identity(4);
        assert_eq!(i.inverse().unwrap(), i);
        assert!(matches!(ri(&[&[1, 1], &[1, 1]]).inverse(), Err(Error::Singular)));
        let e = fraction_free_inverse(&ri(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(e.determinant, int(-1));
        assert!(matches!(ri(&[&[1, 2, 3]]).inverse(), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn float_inverse_and_singularity() {
        let p = fl(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let inv = p.inverse().unwrap();
        assert!(inv.max_abs_diff(&fl(&[&[1.0, -1.0], &[-1.0, 2.0]])).unwrap() < 1e-14);
        assert!(matches!(
            fl(&[&[1.0, 1.0], &[1.0, 1.0]]).inverse(),
            Err(Error::NumericallySingular { .. })
        ));
    }

    #[test]
    fn cholesky_examples() {
        let l = fl(&[&[4.0, 2.0], &[2.0, 2.0]]).cholesky(SYMMETRY_TOL).unwrap();
        assert!(l.max_abs_diff(&fl(&[&[2.0, 0.0], &[1.0, 1.0]])).unwrap() < 1e-15);
        let i = DenseMatrix::<f64>::identity(3);
        assert_eq!(i.cholesky(SYMMETRY_TOL).unwrap(), i);
        assert!(matches!(
            fl(&[&[1.0, 2.0], &[2.0, 1.0]]).cholesky(SYMMETRY_TOL),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(matches!(
            fl(&[&[1.0, 2.0], &[0.0, 1.0]]).cholesky(SYMMETRY_TOL),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn positive_definiteness() {
        assert!(DenseMatrix::<Rational>::identity(3).is_positive_definite().unwrap());
        assert!(!ri(&[&[1, 2], &[2, 1]]).is_positive_definite().unwrap());
        assert!(!fl(&[&[1.0, 2.0], &[2.0, 1.0]]).is_positive_definite().unwrap());
        assert!(ri(&[&[1, 2], &[0, 1]]).is_positive_definite().is_err());
    }

    #[test]
    fn polynomial_adjugate_entries() {
        let v = VariableSet::new(['a']).unwrap();
        let a2 = Polynomial::<Rational>::variable(v.clone(), 0).pow(2);
        let one = Polynomial::constant(v.clone(), int(1));
        let t = DenseMatrix::from_rows(vec![
            vec![one.add(&a2), a2.neg()],
            vec![a2.neg(), a2.add(&one)],
        ])
        .unwrap();
        assert_eq!(t.adjugate_entry(0, 1).unwrap(), a2);
        let i3 = DenseMatrix::<Polynomial<Rational>>::identity(3);
        assert!(i3.adjugate_entry(0, 1).unwrap().is_zero());
        assert!(matches!(i3.adjugate_entry(0, 3), Err(Error::IndexOutOfRange { .. })));
    }

    fn arb_rat_matrix(n: usize) -> impl Strategy<Value = DenseMatrix<Rational>> {
        prop::collection::vec((-9i64..10, 1i64..5), n * n).prop_map(move |v| {
            DenseMatrix::new(n, n, v.into_iter().map(|(a, b)| rat(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_inverse_is_exact(n in 1usize..=6, seed in any::<u64>()) {
            let m = random_rational(n, seed);
            if let Ok(inv) = m.inverse() {
                prop_assert_eq!(m.matmul(&inv).unwrap(), DenseMatrix::identity(n));
            } else {
                prop_assert!(Zero::is_zero(&m.determinant().unwrap()));
            }
        }

        #[test]
        fn adjugate_matches_det_times_inverse(m in (2usize..=4).prop_flat_map(arb_rat_matrix)) {
            let det = m.determinant().unwrap();
            prop_assert_eq!(m.determinant_cofactor().unwrap(), det.clone());
            if let Ok(inv) = m.inverse() {
                let adj = m.adjugate_cofactor().unwrap();
                prop_assert_eq!(adj, inv.map(|x| x * &det));
            }
        }

        #[test]
        fn mixed_product_property(a in (1usize..=3).prop_flat_map(arb_rat_matrix),
                                  b in (1usize..=3).prop_flat_map(arb_rat_matrix)) {
            let lhs = a.kron(&b).matmul(&a.kron(&b)).unwrap();
            let rhs = a.matmul(&a).unwrap().kron(&b.matmul(&b).unwrap());
            prop_assert_eq!(lhs, rhs);
            if let (Ok(ai), Ok(bi)) = (a.inverse(), b.inverse()) {
                let n = a.rows() * b.rows();
                prop_assert_eq!(a.kron(&b).matmul(&ai.kron(&bi)).unwrap(), DenseMatrix::identity(n));
            }
        }

        #[test]
        fn cholesky_reconstructs(n in 1usize..=8, entries in prop::collection::vec(-3.0f64..3.0, 64)) {
            let l0 = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 + entries[i * 8 + j].abs() }
                                                      else if j < i { entries[i * 8 + j] } else { 0.0 });
            let a = l0.matmul(&l0.transpose()).unwrap();
            let l = a.cholesky(SYMMETRY_TOL).unwrap();
            let back = l.matmul(&l.transpose()).unwrap();
            prop_assert!(back.max_abs_diff(&a).unwrap() <= CHOLESKY_RECON_TOL * a.max_abs());
        }
    }

    fn random_rational(n: usize, seed: u64) -> DenseMatrix<Rational> {
        let mut s = seed;
        DenseMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let num = ((s >> 33) % 19) as i64 - 9;
            let den = ((s >> 20) % 4) as i64 + 1;
            rat(num, den)
        })
    }
}
