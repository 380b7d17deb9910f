use crate::{Error, Result};

/// Dense row-major matrix of `f64` with an explicit symmetry tag.
///
/// The tag is set by constructors, never inferred later: numerically
/// symmetric data may arrive through a path that guarantees symmetry
/// (e.g. a spline influence matrix) or through one that does not, and the
/// evaluation routines dispatch on the tag, not on the entries. Use
/// [`Matrix::tag_symmetric`] to assert symmetry; it audits the defect
/// `max |S_ij - S_ji|` against `1e-10 * max |S_ij|` and refuses if violated.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    symmetric: bool,
}

impl Matrix {
    /// All-zero `rows x cols` matrix, tagged general.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
            symmetric: false,
        }
    }

    /// Identity of order `n` (symmetric by construction).
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m.symmetric = true;
        m
    }

    /// Builds from a fill function; the result is tagged general.
    ///
    /// Errors if any produced entry is non-finite.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::invalid(format!(
                        "matrix entry ({i},{j}) is not finite: {v}"
                    )));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    /// Builds a square matrix from row-major data, tagged general.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("matrix entry is not finite: {v}")));
        }
        Ok(Matrix {
            rows: n,
            cols: n,
            data,
            symmetric: false,
        })
    }

    /// Asserts the symmetry tag after auditing the defect.
    pub fn tag_symmetric(mut self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::invalid(format!(
                "cannot tag a {}x{} matrix symmetric",
                self.rows, self.cols
            )));
        }
        let defect = self.symmetry_defect();
        let scale = self.max_abs();
        if defect > 1e-10 * scale.max(1e-300) {
            return Err(Error::invalid(format!(
                "symmetry defect {defect:.3e} exceeds 1e-10 * max|entry| = {:.3e}",
                1e-10 * scale
            )));
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Order of a square matrix; panics if rectangular (internal misuse).
    pub fn n(&self) -> usize {
        assert_eq!(self.rows, self.cols, "square matrix required");
        self.rows
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `max_ij |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// `max_ij |A_ij - A_ji|` for square matrices.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        d
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, v) in sums.iter_mut().zip(self.row(i)) {
                *s += v.abs();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.get(i, i)).sum()
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch in matvec");
        (0..self.rows).map(|i| super::dot(self.row(i), v)).collect()
    }

    /// `A^T v`.
    pub fn matvec_t(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "dimension mismatch in matvec_t");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `A B`; the result is tagged general.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out.symmetric = self.symmetric;
        out
    }

    /// `self + alpha * other`, entrywise; the result is tagged general.
    pub fn add_scaled(&self, alpha: f64, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
            symmetric: false,
        }
    }

    /// Scales every entry in place.
    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_symmetric_and_neutral() {
        let id = Matrix::identity(3);
        assert!(id.is_symmetric());
        let v = vec![1.0, -2.0, 0.5];
        assert_eq!(id.matvec(&v), v);
        assert_eq!(id.trace(), 3.0);
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(Matrix::from_rows(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
        assert!(Matrix::from_fn(1, 1, |_, _| f64::INFINITY).is_err());
    }

    #[test]
    fn symmetry_tag_audits_defect() {
        let ok = Matrix::from_rows(2, vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        assert!(ok.tag_symmetric().is_ok());
        let bad = Matrix::from_rows(2, vec![2.0, 1.0, 1.0 + 1e-6, 3.0]).unwrap();
        assert!(bad.tag_symmetric().is_err());
    }

    #[test]
    fn norms_and_products() {
        let a = Matrix::from_rows(2, vec![1.0, -2.0, 3.0, 4.0]).unwrap();
        assert_eq!(a.norm_inf(), 7.0);
        assert_eq!(a.norm_one(), 6.0);
        let b = Matrix::identity(2);
        assert_eq!(a.matmul(&b), {
            let mut c = a.clone();
            c.symmetric = false;
            c
        });
        assert_eq!(a.matvec_t(&[1.0, 1.0]), vec![4.0, 2.0]);
        let t = a.transpose();
        assert_eq!(t.get(0, 1), 3.0);
    }
}
