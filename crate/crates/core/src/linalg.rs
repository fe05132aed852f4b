//! Dense complex SVD by one-sided Jacobi.
//!
//! The far-field matrices here are severely graded: singular values decay
//! exponentially to (and below) the roundoff floor. One-sided Jacobi keeps
//! the trailing singular values at their rounding-noise level instead of
//! flushing them to zero, which is exactly the behavior the indicator sums
//! probe. It also delivers orthonormality and reconstruction residuals a
//! couple of orders below the 1e-12 contract, and is deterministic.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvdError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("Jacobi sweep limit reached without convergence (off-diagonal {0:.3e})")]
    NoConvergence(f64),
}

/// `F = U diag(s) V^H` with `s` descending and `U`, `V` unitary.
#[derive(Clone, Debug)]
pub struct ComplexSvd {
    pub u: DMatrix<Complex64>,
    pub s: DVector<f64>,
    pub v: DMatrix<Complex64>,
}

const PAIR_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 64;

/// One-sided Jacobi SVD of a square complex matrix.
pub fn jacobi_svd(f: &DMatrix<Complex64>) -> Result<ComplexSvd, SvdError> {
    let n = f.nrows();
    if f.ncols() != n {
        return Err(SvdError::NotSquare(f.nrows(), f.ncols()));
    }
    for j in 0..n {
        for i in 0..n {
            let z = f[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(SvdError::NonFinite(i, j));
            }
        }
    }

    // Columns of W start as the columns of F and are rotated until pairwise
    // orthogonal; V accumulates the same rotations, so F V = W throughout.
    let mut w: Vec<Vec<Complex64>> = (0..n).map(|j| f.column(j).iter().copied().collect()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut col = vec![Complex64::ZERO; n];
            col[j] = Complex64::ONE;
            col
        })
        .collect();

    let mut converged = false;
    let mut worst = 0.0f64;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let (a, b, c) = gram(&w[p], &w[q]);
                let scale = (a * b).sqrt();
                if scale == 0.0 {
                    continue;
                }
                let off = c.norm() / scale;
                worst = worst.max(off);
                if off <= PAIR_TOL {
                    continue;
                }
                rotated = true;
                // Diagonalize the 2x2 Hermitian Gram matrix [[a, c], [c*, b]].
                let abs_c = c.norm();
                let phase = c / abs_c;
                let tau = (b - a) / (2.0 * abs_c);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                rotate(&mut w, p, q, cs, sn, phase);
                rotate(&mut v, p, q, cs, sn, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SvdError::NoConvergence(worst));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = DMatrix::from_element(n, n, Complex64::ZERO);
    let mut vm = DMatrix::from_element(n, n, Complex64::ZERO);
    let mut s = DVector::from_element(n, 0.0f64);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        for i in 0..n {
            vm[(i, dst)] = v[src][i];
        }
        if norms[src] > 0.0 {
            let inv = 1.0 / norms[src];
            for i in 0..n {
                u[(i, dst)] = w[src][i] * inv;
            }
        }
    }
    complete_zero_columns(&mut u, &s);
    Ok(ComplexSvd { u, s, v: vm })
}

fn gram(x: &[Complex64], y: &[Complex64]) -> (f64, f64, Complex64) {
    let mut a = 0.0;
    let mut b = 0.0;
    let mut c = Complex64::ZERO;
    for (xi, yi) in x.iter().zip(y.iter()) {
        a += xi.norm_sqr();
        b += yi.norm_sqr();
        c += xi.conj() * yi;
    }
    (a, b, c)
}

/// Applies the complex rotation that orthogonalizes columns `p` and `q`:
/// `col_p <- cs col_p - sn conj(phase) col_q`,
/// `col_q <- sn phase col_p + cs col_q`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, cs: f64, sn: f64, phase: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    let sp = sn * phase;
    let spc = sn * phase.conj();
    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
        let new_p = cs * *xp - spc * *xq;
        let new_q = sp * *xp + cs * *xq;
        *xp = new_p;
        *xq = new_q;
    }
}

/// Columns with exactly zero norm carry no reconstruction weight; fill them
/// with an orthonormal completion so U stays unitary.
fn complete_zero_columns(u: &mut DMatrix<Complex64>, s: &DVector<f64>) {
    let n = u.nrows();
    for j in 0..n {
        if s[j] > 0.0 {
            continue;
        }
        'candidates: for cand in 0..n {
            let mut col = DVector::from_element(n, Complex64::ZERO);
            col[cand] = Complex64::ONE;
            // Two Gram-Schmidt passes against every other column.
            for _ in 0..2 {
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    let proj: Complex64 = (0..n).map(|i| u[(i, k)].conj() * col[i]).sum();
                    for i in 0..n {
                        col[i] -= proj * u[(i, k)];
                    }
                }
            }
            let norm = col.norm();
            if norm > 1e-3 {
                for i in 0..n {
                    u[(i, j)] = col[i] / Complex64::new(norm, 0.0);
                }
                break 'candidates;
            }
        }
    }
}

/// Max-norm residuals of the factorization invariants; used by tests and the
/// pipeline consistency report.
#[derive(Clone, Copy, Debug)]
pub struct SvdResiduals {
    pub orthonormality_u: f64,
    pub orthonormality_v: f64,
    pub reconstruction: f64,
}

pub fn svd_residuals(f: &DMatrix<Complex64>, svd: &ComplexSvd) -> SvdResiduals {
    let n = f.nrows();
    let utu = svd.u.adjoint() * &svd.u;
    let vtv = svd.v.adjoint() * &svd.v;
    let mut o_u = 0.0f64;
    let mut o_v = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { Complex64::ONE } else { Complex64::ZERO };
            o_u = o_u.max((utu[(i, j)] - id).norm());
            o_v = o_v.max((vtv[(i, j)] - id).norm());
        }
    }
    let mut us = svd.u.clone();
    for j in 0..n {
        for i in 0..n {
            us[(i, j)] *= svd.s[j];
        }
    }
    let rec = us * svd.v.adjoint();
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            r = r.max((rec[(i, j)] - f[(i, j)]).norm());
        }
    }
    SvdResiduals { orthonormality_u: o_u, orthonormality_v: o_v, reconstruction: r }
}
