//! Plain dense complex matrices with the LU machinery the oracle checks
//! rely on. Deliberately self-contained: no external linear algebra.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
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

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let row = k * rhs.cols;
                let orow = i * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[orow + j] += a * rhs.data[row + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip(&self, rhs: &Matrix, f: impl Fn(C64, C64) -> C64) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&rhs.data) {
            *o = f(*o, b);
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Hadamard row bound: product of row 2-norms. Upper bound on |det|,
    /// used as the scale for "how singular is this matrix" residuals.
    pub fn hadamard_bound(&self) -> f64 {
        let mut prod = 1.0f64;
        for i in 0..self.rows {
            let s: f64 = (0..self.cols).map(|j| self[(i, j)].norm_sqr()).sum();
            prod *= s.sqrt().max(1e-300);
        }
        prod
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct LuFactors {
    lu: Matrix,
    pivots: Vec<usize>,
    swaps: usize,
}

/// Factor a square matrix. Singular matrices factor fine; their determinant
/// comes out (numerically) zero.
pub fn lu_factor(m: &Matrix) -> Result<LuFactors> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut lu = m.clone();
    let mut pivots = vec![0usize; n];
    let mut swaps = 0usize;
    for k in 0..n {
        // pick the pivot by magnitude
        let mut best = k;
        let mut best_mag = lu[(k, k)].norm();
        for i in k + 1..n {
            let mag = lu[(i, k)].norm();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        pivots[k] = best;
        if best != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(best, j)];
                lu[(best, j)] = tmp;
            }
            swaps += 1;
        }
        let piv = lu[(k, k)];
        if piv.norm() == 0.0 {
            continue; // singular column, leave zeros
        }
        for i in k + 1..n {
            let factor = lu[(i, k)] / piv;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    Ok(LuFactors { lu, pivots, swaps })
}

impl LuFactors {
    pub fn determinant(&self) -> C64 {
        let n = self.lu.rows;
        let mut det = C64::new(if self.swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        for k in 0..n {
            det *= self.lu[(k, k)];
        }
        det
    }

    /// Solve A x = b in place for each column of `b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(Error::ShapeMismatch(format!(
                "rhs has {} rows, expected {}",
                b.rows, n
            )));
        }
        let mut x = b.clone();
        // apply row swaps
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                for j in 0..x.cols {
                    let tmp = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = tmp;
                }
            }
        }
        // forward substitution (unit lower triangle)
        for k in 0..n {
            for i in k + 1..n {
                let f = self.lu[(i, k)];
                for j in 0..x.cols {
                    let sub = f * x[(k, j)];
                    x[(i, j)] -= sub;
                }
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let piv = self.lu[(k, k)];
            for j in 0..x.cols {
                x[(k, j)] /= piv;
            }
            for i in 0..k {
                let f = self.lu[(i, k)];
                for j in 0..x.cols {
                    let sub = f * x[(k, j)];
                    x[(i, j)] -= sub;
                }
            }
        }
        Ok(x)
    }
}

/// Determinant via partial-pivot LU.
pub fn lu_determinant(m: &Matrix) -> Result<C64> {
    Ok(lu_factor(m)?.determinant())
}
