use super::Matrix;
use crate::{Error, Result};

const MAX_QL_ITER: usize = 50;
const MAX_QR_ITER: usize = 60;

/// Spectral decomposition of a symmetric matrix: `S = U diag(values) U^T`.
///
/// Eigenvalues are sorted descending; eigenvector `j` is column `j` of
/// [`Eigensystem::vectors`] and is determined up to sign. Columns are
/// orthonormal to machine precision.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    values: Vec<f64>,
    vectors: Matrix,
}

impl Eigensystem {
    /// Decomposes a matrix carrying the symmetric tag.
    pub fn new(s: &Matrix) -> Result<Self> {
        sym_eigen(s)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues, descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns, aligned with [`Eigensystem::values`].
    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    /// Copy of eigenvector `j`.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.col(j)
    }

    /// Coefficients `U^T v` of `v` in the eigenbasis.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.vectors.matvec_t(v)
    }

    /// Reassembles `U c` from eigenbasis coefficients.
    pub fn combine(&self, c: &[f64]) -> Vec<f64> {
        self.vectors.matvec(c)
    }

    /// Zeroes eigenvalues in `(-floor, 0)`.
    ///
    /// For matrices that are positive semi-definite by construction, tiny
    /// negative eigenvalues are rounding artifacts; callers that rely on
    /// non-negativity flush them instead of propagating noise. Returns how
    /// many were clamped.
    pub fn clamp_small_negatives(&mut self, floor: f64) -> usize {
        let mut count = 0;
        for v in &mut self.values {
            if *v < 0.0 && *v > -floor {
                *v = 0.0;
                count += 1;
            }
        }
        count
    }

}

/// Full eigendecomposition of a symmetric matrix.
///
/// Householder reduction to tridiagonal form followed by the implicit-shift
/// QL iteration, with eigenvectors accumulated along the way. Requires the
/// input to carry the symmetric tag (see [`Matrix::tag_symmetric`]); only
/// the tagged entries' symmetric part is meaningful. Fails with a numeric
/// error naming the iteration budget if any eigenvalue fails to converge.
pub fn sym_eigen(s: &Matrix) -> Result<Eigensystem> {
    if !s.is_symmetric() {
        return Err(Error::invalid(
            "symmetric eigendecomposition requires a matrix tagged symmetric",
        ));
    }
    let n = s.n();
    let mut v = s.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;

    // Sort eigenpairs descending by eigenvalue.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (jn, &jo) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, jn, v.get(i, jo));
        }
    }
    Ok(Eigensystem { values, vectors })
}

/// Householder reduction of `v` to tridiagonal form (diagonal `d`,
/// off-diagonal `e`), accumulating the orthogonal transform into `v`.
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v.set(n - 1, i, v.get(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for (k, item) in d.iter_mut().enumerate().take(i + 1) {
                *item = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for (k, item) in d.iter().enumerate().take(i + 1) {
                    let val = v.get(k, j) - g * item;
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal (d, e), rotations applied to `v`.
fn ql_implicit(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    let eps = 2.0_f64.powi(-52);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(Error::numeric(format!(
                        "QL iteration for eigenvalue {l} did not converge within {MAX_QL_ITER} sweeps"
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    let r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v.get(k, i + 1);
                        v.set(k, i + 1, s * v.get(k, i) + c * h);
                        v.set(k, i, c * v.get(k, i) - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Eigenvalues of a general square matrix as `(re, im)` pairs, sorted by
/// descending real part (ties by descending imaginary part).
///
/// Reduction to Hessenberg form by pivoted elimination similarity, then the
/// Francis double-shift QR iteration. Eigenvectors are not computed; the
/// stability classifier only needs the spectrum's real parts.
pub fn general_eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    let n = a.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    // 1-based padded copy keeps the classic index bookkeeping intact.
    let mut h = vec![vec![0.0_f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            h[i + 1][j + 1] = a.get(i, j);
        }
    }
    hessenberg(&mut h, n);
    let (wr, wi) = hqr(&mut h, n)?;
    let mut pairs: Vec<(f64, f64)> = (1..=n).map(|i| (wr[i], wi[i])).collect();
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("finite eigenvalues")
            .then(y.1.partial_cmp(&x.1).expect("finite eigenvalues"))
    });
    Ok(pairs)
}

/// Pivoted elimination reduction to upper Hessenberg form (1-based storage).
fn hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0_f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let tmp = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = tmp;
            }
            for j in 1..=n {
                let tmp = a[j][i];
                a[j][i] = a[j][m];
                a[j][m] = tmp;
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
    // Elimination leaves multipliers below the subdiagonal; the QR sweep
    // expects exact zeros there.
    for i in 3..=n {
        for j in 1..=(i - 2) {
            a[i][j] = 0.0;
        }
    }
}

fn sign_of(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on a Hessenberg matrix (1-based storage),
/// returning real and imaginary eigenvalue parts.
fn hqr(a: &mut [Vec<f64>], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut wr = vec![0.0_f64; n + 1];
    let mut wi = vec![0.0_f64; n + 1];

    let mut anorm = 0.0_f64;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    if anorm == 0.0 {
        return Ok((wr, wi)); // zero matrix: all eigenvalues zero
    }

    let mut nn = n;
    let mut t = 0.0_f64;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // Look for a small subdiagonal element.
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let y = a[nn - 1][nn - 1];
            let w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + sign_of(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = wr[nn - 1];
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn] = z;
                    wi[nn - 1] = -z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITER {
                return Err(Error::numeric(format!(
                    "QR iteration did not converge within {MAX_QR_ITER} sweeps \
                     while isolating eigenvalue {nn}"
                )));
            }
            let mut x = x;
            let mut y = y;
            let mut w = w;
            if its == 10 || its == 20 || its == 30 || its == 40 || its == 50 {
                // Exceptional shift to break symmetry-induced cycling.
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // Find two consecutive small subdiagonal elements.
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0_f64, 0.0_f64, 0.0_f64);
            while m >= l {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // Double QR step on rows l..nn and columns m..nn.
            for k in m..=(nn - 1) {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    let xs = p.abs() + q.abs() + r.abs();
                    if xs != 0.0 {
                        p /= xs;
                        q /= xs;
                        r /= xs;
                        x = xs;
                    } else {
                        x = xs;
                    }
                }
                let s = sign_of((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let pj = a[k][j] + q * a[k + 1][j] + if k != nn - 1 { r * a[k + 2][j] } else { 0.0 };
                        if k != nn - 1 {
                            a[k + 2][j] -= pj * z;
                        }
                        a[k + 1][j] -= pj * y;
                        a[k][j] -= pj * x;
                    }
                    // The reflector vector scaled by the pivot (1, q, r)
                    // drives the column update; (x, y, z) only build the
                    // projection coefficient.
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let pi = x * a[i][k]
                            + y * a[i][k + 1]
                            + if k != nn - 1 { z * a[i][k + 2] } else { 0.0 };
                        if k != nn - 1 {
                            a[i][k + 2] -= pi * r;
                        }
                        a[i][k + 1] -= pi * q;
                        a[i][k] -= pi;
                    }
                }
            }
        }
    }
    Ok((wr, wi))
}
