//! Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson shifts.
//!
//! Only the eigenvalues and the first component of each normalized
//! eigenvector are accumulated, which is all Golub–Welsch needs.

use crate::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues (ascending) and first eigenvector components of a symmetric
/// tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub values: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Solves the eigenproblem for the matrix with main diagonal `diag` and
/// sub-diagonal `offdiag` (`offdiag.len() == diag.len() - 1`).
pub fn symmetric_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen {
            values: vec![],
            first_components: vec![],
        });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::domain(
            "symmetric_tridiagonal",
            format!(
                "off-diagonal has length {}, expected {}",
                offdiag.len(),
                n - 1
            ),
        ));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            "symmetric_tridiagonal",
            "non-finite matrix entry",
        ));
    }

    let mut d = diag.to_vec();
    // e[i] couples d[i] and d[i+1]; e[n-1] is scratch.
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // First row of the accumulated orthogonal transform.
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::numeric(
                    "symmetric_tridiagonal",
                    format!("QL iteration did not converge for eigenvalue {l}"),
                ));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
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
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(TridiagonalEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        first_components: order.iter().map(|&i| z[i]).collect(),
    })
}
