//! Dense linear algebra over exact scalars and complex doubles.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { expected: c, found: bad.len() });
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// The matrix with row `r` and column `c` deleted.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        Matrix::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let i = if i >= r { i + 1 } else { i };
            let j = if j >= c { j + 1 } else { j };
            self[(i, j)].clone()
        })
    }

    /// Leading `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Matrix::from_fn(k, k, |i, j| self[(i, j)].clone())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub type ExactMatrix = Matrix<ExactScalar>;
pub type FloatMatrix = Matrix<Complex64>;

impl ExactMatrix {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { ExactScalar::one() } else { ExactScalar::zero() })
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn mul_vec(&self, v: &[ExactScalar]) -> Result<Vec<ExactScalar>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = ExactScalar::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !x.is_zero() {
                        acc += &(a * x);
                    }
                }
                acc
            })
            .collect())
    }

    pub fn to_float(&self) -> Result<FloatMatrix> {
        let data = self.data.iter().map(ExactScalar::to_complex64).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }
}

/// Solves `M x = b` by Gaussian elimination, taking the first nonzero entry
/// of each column as pivot, and checks `M x = b` before returning.
pub fn solve_exact(m: &ExactMatrix, b: &[ExactScalar]) -> Result<Vec<ExactScalar>> {
    let n = m.rows;
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let mut a = m.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[(i, k)].is_zero()).ok_or(Error::Singular { pivot: k })?;
        a.swap_rows(k, p);
        rhs.swap(k, p);
        let inv = a[(k, k)].checked_inv()?;
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let factor = &a[(i, k)] * &inv;
            for j in k + 1..n {
                if !a[(k, j)].is_zero() {
                    let t = &factor * &a[(k, j)];
                    a[(i, j)] -= &t;
                }
            }
            a[(i, k)] = ExactScalar::zero();
            if !rhs[k].is_zero() {
                let t = &factor * &rhs[k];
                rhs[i] -= &t;
            }
        }
    }
    let mut x = vec![ExactScalar::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            if !a[(k, j)].is_zero() && !x[j].is_zero() {
                acc -= &(&a[(k, j)] * &x[j]);
            }
        }
        x[k] = acc.checked_div(&a[(k, k)])?;
    }
    if m.mul_vec(&x)? != b {
        return Err(Error::Consistency("substituted solution does not reproduce the right-hand side".into()));
    }
    Ok(x)
}

/// Exact determinant by elimination.
pub fn determinant_exact(m: &ExactMatrix) -> Result<ExactScalar> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut det = ExactScalar::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
            return Ok(ExactScalar::zero());
        };
        if p != k {
            a.swap_rows(k, p);
            det = -det;
        }
        let inv = a[(k, k)].checked_inv()?;
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let factor = &a[(i, k)] * &inv;
            for j in k + 1..n {
                if !a[(k, j)].is_zero() {
                    let t = &factor * &a[(k, j)];
                    a[(i, j)] -= &t;
                }
            }
        }
        det *= &a[(k, k)];
    }
    Ok(det)
}

/// Determinants of the leading `1×1, 2×2, …` blocks.
pub fn leading_principal_minors(m: &ExactMatrix) -> Result<Vec<ExactScalar>> {
    (1..=m.rows).map(|k| determinant_exact(&m.leading(k))).collect()
}

/// Solves `M x = b` in floating point with partial pivoting.
pub fn solve_f64(m: &FloatMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = m.rows;
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.rows, found: m.cols });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let scale = m.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut a = m.clone();
    let mut rhs = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm())).unwrap_or(k);
        if a[(p, k)].norm() <= scale * 1e-300 || a[(p, k)].norm() == 0.0 {
            return Err(Error::Singular { pivot: k });
        }
        a.swap_rows(k, p);
        rhs.swap(k, p);
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let t = factor * a[(k, j)];
                a[(i, j)] -= t;
            }
            let t = factor * rhs[k];
            rhs[i] -= t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= a[(k, j)] * x[j];
        }
        x[k] = acc / a[(k, k)];
    }
    Ok(x)
}

/// `‖M‖₁ ‖M⁻¹‖₁`; infinite when `M` is numerically singular.
pub fn condition_1norm(m: &FloatMatrix) -> f64 {
    let n = m.rows;
    let norm1 = |cols: &dyn Fn(usize, usize) -> f64| {
        (0..n).map(|j| (0..n).map(|i| cols(i, j)).sum::<f64>()).fold(0.0, f64::max)
    };
    let a_norm = norm1(&|i, j| m[(i, j)].norm());
    let mut inv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (j, col) in inv.iter_mut().enumerate() {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        match solve_f64(m, &e) {
            Ok(x) => *col = x,
            Err(_) => return f64::INFINITY,
        }
    }
    a_norm * norm1(&|i, j| inv[j][i].norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactScalar {
        ExactScalar::frac(n, d)
    }

    fn mat(rows: &[&[(i64, i64)]]) -> ExactMatrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(n, d)| q(n, d)).collect()).collect()).unwrap()
    }

    #[test]
    fn solves_two_by_two() {
        let m = mat(&[&[(6, 1), (-2, 1)], &[(-2, 1), (6, 1)]]);
        let x = solve_exact(&m, &[q(2, 1), q(0, 1)]).unwrap();
        assert_eq!(x, vec![q(3, 8), q(1, 8)]);
        let m = mat(&[&[(3, 1), (-1, 1)], &[(-1, 1), (7, 6)]]);
        let x = solve_exact(&m, &[q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(x, vec![q(7, 15), q(2, 5)]);
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = vec![q(1, 3), q(-2, 7), ExactScalar::sqrt2()];
        assert_eq!(solve_exact(&ExactMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn singular_reports_pivot() {
        let m = mat(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert_eq!(solve_exact(&m, &[q(1, 1), q(0, 1)]), Err(Error::Singular { pivot: 1 }));
    }

    #[test]
    fn determinants_and_minors() {
        let m = mat(&[&[(2, 1), (1, 1), (0, 1)], &[(1, 1), (2, 1), (1, 1)], &[(0, 1), (1, 1), (2, 1)]]);
        assert_eq!(determinant_exact(&m).unwrap(), q(4, 1));
        assert_eq!(leading_principal_minors(&m).unwrap(), vec![q(2, 1), q(3, 1), q(4, 1)]);
        assert_eq!(determinant_exact(&m.minor(0, 1)).unwrap(), q(2, 1));
        let p = mat(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]);
        assert_eq!(determinant_exact(&p).unwrap(), q(-1, 1));
    }

    #[test]
    fn float_solve_and_condition() {
        let m = mat(&[&[(6, 1), (-2, 1)], &[(-2, 1), (6, 1)]]).to_float().unwrap();
        let x = solve_f64(&m, &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert!((x[0].re - 0.375).abs() < 1e-15 && (x[1].re - 0.125).abs() < 1e-15);
        assert!((condition_1norm(&m) - 2.0).abs() < 1e-12);
    }
}
