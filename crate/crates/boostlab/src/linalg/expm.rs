use super::{exp_neg, sym_eigen, Eigensystem, Matrix};
use crate::{Error, Result};

/// Degree-13 diagonal Padé coefficients for the matrix exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate.
const THETA13: f64 = 5.371920351148152;

/// Dense matrix exponential `e^M` by scaling-and-squaring with a degree-13
/// Padé approximant.
pub fn expm_dense(m: &Matrix) -> Result<Matrix> {
    let n = m.n();
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::invalid("matrix exponential of non-finite matrix"));
    }
    let squarings = if norm > THETA13 {
        let s = (norm / THETA13).log2().ceil() as i64;
        if s > 60 {
            return Err(Error::numeric(format!(
                "matrix norm {norm:.3e} too large for exponential scaling"
            )));
        }
        s as u32
    } else {
        0
    };

    let mut a = m.clone();
    if squarings > 0 {
        a.scale(0.5_f64.powi(squarings as i32));
    }

    let id = Matrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    // U = A [A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let mut inner = scaled_sum(&[(PADE13[13], &a6), (PADE13[11], &a4), (PADE13[9], &a2)], n);
    inner = a6.matmul(&inner);
    inner = inner.add_scaled(PADE13[7], &a6);
    inner = inner.add_scaled(PADE13[5], &a4);
    inner = inner.add_scaled(PADE13[3], &a2);
    inner = inner.add_scaled(PADE13[1], &id);
    let u = a.matmul(&inner);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut v = scaled_sum(&[(PADE13[12], &a6), (PADE13[10], &a4), (PADE13[8], &a2)], n);
    v = a6.matmul(&v);
    v = v.add_scaled(PADE13[6], &a6);
    v = v.add_scaled(PADE13[4], &a4);
    v = v.add_scaled(PADE13[2], &a2);
    v = v.add_scaled(PADE13[0], &id);

    // r = (V - U)^{-1} (V + U)
    let denom = v.add_scaled(-1.0, &u);
    let numer = v.add_scaled(1.0, &u);
    let mut r = lu_solve_matrix(denom, numer)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

fn scaled_sum(terms: &[(f64, &Matrix)], n: usize) -> Matrix {
    let mut out = Matrix::zeros(n, n);
    for &(c, m) in terms {
        out = out.add_scaled(c, m);
    }
    out
}

/// Applies the decaying exponential: `e^{-tS} v` for `t >= 0`.
///
/// Symmetric `S` is evaluated through its spectral decomposition; general
/// `S` goes through [`expm_dense`]. Fails if the result overflows, which can
/// happen when `S` has eigenvalues with negative real part.
pub fn expm_action(s: &Matrix, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "exponential action needs t >= 0, got {t}"
        )));
    }
    if v.len() != s.n() {
        return Err(Error::invalid(format!(
            "vector length {} does not match matrix order {}",
            v.len(),
            s.n()
        )));
    }
    let out = if s.is_symmetric() {
        let eig = sym_eigen(s)?;
        expm_action_spectral(&eig, t, v)
    } else {
        let mut neg = s.clone();
        neg.scale(-t);
        expm_dense(&neg)?.matvec(v)
    };
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::numeric(
            "exponential action overflowed; the spectrum reaches far into the negative half-plane"
                .to_string(),
        ));
    }
    Ok(out)
}

/// `e^{-t S} v` from a precomputed spectral decomposition of `S`.
pub fn expm_action_spectral(eig: &Eigensystem, t: f64, v: &[f64]) -> Vec<f64> {
    let mut c = eig.project(v);
    for (ci, &mu) in c.iter_mut().zip(eig.values()) {
        let arg = t * mu;
        *ci *= if arg >= 0.0 { exp_neg(arg) } else { (-arg).exp() };
    }
    eig.combine(&c)
}

/// Solves `A X = B` by LU factorization with partial pivoting, consuming `A`.
fn lu_solve_matrix(mut a: Matrix, b: Matrix) -> Result<Matrix> {
    let n = a.n();
    assert_eq!(b.rows(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        // Pivot selection.
        let mut p = k;
        let mut best = a.get(k, k).abs();
        for i in (k + 1)..n {
            let cand = a.get(i, k).abs();
            if cand > best {
                best = cand;
                p = i;
            }
        }
        if best < 1e-300 {
            return Err(Error::numeric(format!(
                "singular pivot at column {k} in exponential denominator solve"
            )));
        }
        if p != k {
            for j in 0..n {
                let tmp = a.get(k, j);
                a.set(k, j, a.get(p, j));
                a.set(p, j, tmp);
            }
            perm.swap(k, p);
        }
        let pivot = a.get(k, k);
        for i in (k + 1)..n {
            let m = a.get(i, k) / pivot;
            a.set(i, k, m);
            if m != 0.0 {
                for j in (k + 1)..n {
                    let val = a.get(i, j) - m * a.get(k, j);
                    a.set(i, j, val);
                }
            }
        }
    }

    let mut x = Matrix::zeros(n, b.cols());
    let mut col = vec![0.0; n];
    for j in 0..b.cols() {
        for i in 0..n {
            col[i] = b.get(perm[i], j);
        }
        // Forward substitution (unit lower triangle).
        for i in 1..n {
            let mut s = col[i];
            for k in 0..i {
                s -= a.get(i, k) * col[k];
            }
            col[i] = s;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= a.get(i, k) * col[k];
            }
            col[i] = s / a.get(i, i);
        }
        for i in 0..n {
            x.set(i, j, col[i]);
        }
    }
    Ok(x)
}
