//! Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form followed by implicit-shift QL iteration, with the
//! unitary transform accumulated along the way.
//!
//! The transform is kept transposed internally (rows = eigenvectors) so
//! that both the reflector applications and the QL rotations stream over
//! contiguous memory.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const MAX_QL_ITERATIONS: usize = 60;

/// Full eigendecomposition of a hermitian matrix.
///
/// Returns eigenvalues in ascending order and the unitary matrix whose
/// j-th column is the eigenvector of the j-th eigenvalue, so that
/// `a = q * diag(values) * q.adjoint()`.
pub(crate) fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            context: "hermitian_eigen",
            expected: 1,
            found: 0,
        });
    }
    if n == 1 {
        return Ok((vec![a.get(0, 0).re], ComplexMatrix::identity(1)));
    }

    let mut work = a.clone();
    // qt holds the plain transpose of the accumulated transform:
    // row j of qt is the j-th eigenvector.
    let mut qt = ComplexMatrix::identity(n);
    let zero = Complex64::new(0.0, 0.0);

    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut v: Vec<Complex64> = (0..m).map(|i| work.get(k + 1 + i, k)).collect();
        let xnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let xnorm = xnorm_sq.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let alpha = v[0];
        let beta = if alpha.norm() > 0.0 {
            -(alpha / alpha.norm()) * xnorm
        } else {
            Complex64::new(-xnorm, 0.0)
        };
        v[0] -= beta;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq <= f64::EPSILON * f64::EPSILON * xnorm_sq {
            continue;
        }
        let vnorm = vnorm_sq.sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }

        // The reflected column: one subdiagonal entry survives.
        work.set(k + 1, k, beta);
        work.set(k, k + 1, beta.conj());
        for i in 1..m {
            work.set(k + 1 + i, k, zero);
            work.set(k, k + 1 + i, zero);
        }

        // Rank-2 hermitian update of the trailing block:
        // B <- B - v p* - p v*  with  w = B v, kappa = v* w, p = 2(w - kappa v).
        let mut w = vec![zero; m];
        for (i, wi) in w.iter_mut().enumerate() {
            let row = &work.row(k + 1 + i)[k + 1..];
            let mut acc = zero;
            for (bij, vj) in row.iter().zip(v.iter()) {
                acc += bij * vj;
            }
            *wi = acc;
        }
        let kappa: Complex64 = v.iter().zip(w.iter()).map(|(vi, wi)| vi.conj() * wi).sum();
        let p: Vec<Complex64> = w
            .iter()
            .zip(v.iter())
            .map(|(wi, vi)| 2.0 * (wi - kappa * vi))
            .collect();
        let p_conj: Vec<Complex64> = p.iter().map(|z| z.conj()).collect();
        let v_conj: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
        for i in 0..m {
            let vi = v[i];
            let pi = p[i];
            let row = &mut work.row_mut(k + 1 + i)[k + 1..];
            for ((bij, pcj), vcj) in row.iter_mut().zip(p_conj.iter()).zip(v_conj.iter()) {
                *bij -= vi * pcj + pi * vcj;
            }
        }

        // Accumulate the reflector into qt (acting on rows k+1..n):
        // qt[k+1+j] <- qt[k+1+j] - 2 conj(v[j]) * sum_a v[a] qt[k+1+a].
        let mut temp = vec![zero; n];
        for (a, va) in v.iter().enumerate() {
            let row = qt.row(k + 1 + a);
            for (t, x) in temp.iter_mut().zip(row.iter()) {
                *t += va * x;
            }
        }
        for (j, vcj) in v_conj.iter().enumerate() {
            let factor = 2.0 * vcj;
            let row = qt.row_mut(k + 1 + j);
            for (x, t) in row.iter_mut().zip(temp.iter()) {
                *x -= factor * t;
            }
        }
    }

    // Phase transform making the subdiagonal real and nonnegative; the
    // phase of column j of the transform multiplies row j of qt.
    let mut d: Vec<f64> = (0..n).map(|i| work.get(i, i).re).collect();
    let mut e = vec![0.0f64; n];
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n - 1 {
        let sub = work.get(k + 1, k);
        let mag = sub.norm();
        e[k] = mag;
        phase = if mag > 0.0 { sub * phase / mag } else { phase };
        let factor = phase;
        for x in qt.row_mut(k + 1).iter_mut() {
            *x *= factor;
        }
    }

    ql_implicit(&mut d, &mut e, &mut qt)?;

    // Ascending sort, permuting eigenvector rows of qt alongside, then
    // transpose-conjugate back into column form.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_col, &old_row) in order.iter().enumerate() {
        let row = qt.row(old_row);
        for (r, x) in row.iter().enumerate() {
            vectors.set(r, new_col, *x);
        }
    }
    Ok((values, vectors))
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix.
/// Rotations act on adjacent rows of `qt` (contiguous slices).
fn ql_implicit(d: &mut [f64], e: &mut [f64], qt: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    // Absolute deflation floor: relative tests alone stall when adjacent
    // diagonal entries both sit near zero, as happens for spectra that are
    // symmetric about the origin.
    let anorm = d
        .iter()
        .map(|x| x.abs())
        .chain(e.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max);
    let floor = f64::EPSILON * anorm;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenFailure {
                    detail: format!(
                        "QL did not converge at index {l} after {MAX_QL_ITERATIONS} iterations"
                    ),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                // Plane rotation of eigenvector rows i and i+1.
                let (row_i, row_i1) = qt.row_pair_mut(i, i + 1);
                for (xi, xi1) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                    let f_val = *xi1;
                    let g_val = *xi;
                    *xi1 = s * g_val + c * f_val;
                    *xi = c * g_val - s * f_val;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
