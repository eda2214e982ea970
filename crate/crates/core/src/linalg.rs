//! Dense linear-algebra helpers on top of nalgebra: complex Schur-based
//! Sylvester solves, restarted GMRES, spectra and trace distance.

use nalgebra::linalg::{Schur, SymmetricEigen};

use crate::model::{CMatrix, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Complex Schur decomposition `m = q t q†` with `t` upper triangular.
pub fn schur(m: &CMatrix) -> Option<(CMatrix, CMatrix)> {
    let s = Schur::try_new(m.clone(), 1e-15, 100_000)?;
    let (q, mut t) = s.unpack();
    // zero the strictly-lower part left over by deflation
    for j in 0..t.ncols() {
        for i in (j + 1)..t.nrows() {
            t[(i, j)] = ZERO;
        }
    }
    Some((q, t))
}

/// Eigenvalues of a general complex matrix (diagonal of its Schur form).
pub fn eigenvalues(m: &CMatrix) -> Option<Vec<C64>> {
    let (_, t) = schur(m)?;
    Some((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is
/// read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values, ascending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// ½‖a − b‖₁ for Hermitian `a`, `b`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let diff = a - b;
    let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    0.5 * hermitian_eigenvalues(&herm).iter().map(|v| v.abs()).sum::<f64>()
}

/// Solves `t y − y t† = c` for upper-triangular `t` (Bartels–Stewart with a
/// triangular pair). Returns `None` when t_ii − conj(t_kk) vanishes for some
/// pair, i.e. the operator is singular.
pub fn sylvester_triangular(t: &CMatrix, c: &CMatrix) -> Option<CMatrix> {
    let n = t.nrows();
    let mut y = CMatrix::zeros(n, n);
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    // B = −t† is lower triangular; sweep columns from last to first.
    for k in (0..n).rev() {
        let mut rhs: Vec<C64> = (0..n).map(|i| c[(i, k)]).collect();
        for j in (k + 1)..n {
            // B_jk = −conj(t_kj)
            let b = -t[(k, j)].conj();
            if b == ZERO {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= y[(i, j)] * b;
            }
        }
        let shift = -t[(k, k)].conj();
        // back substitution with (t + shift·I)
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for l in (i + 1)..n {
                acc -= t[(i, l)] * y[(l, k)];
            }
            let d = t[(i, i)] + shift;
            if d.norm() <= 1e-14 * scale {
                return None;
            }
            y[(i, k)] = acc / d;
        }
    }
    Some(y)
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// Final relative residual ‖b − Ax‖/‖b‖.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted GMRES(`restart`) for `op(x) = b`, starting from zero.
pub fn gmres<F>(mut op: F, b: &[C64], restart: usize, max_iter: usize, tol: f64) -> GmresOutcome
where
    F: FnMut(&[C64]) -> Vec<C64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![ZERO; n];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    let m = restart.max(1);
    let mut iterations = 0;
    loop {
        let ax = op(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol || iterations >= max_iter || !rel.is_finite() {
            return GmresOutcome {
                x,
                iterations,
                residual: rel,
                converged: rel <= tol,
            };
        }

        let mut basis: Vec<Vec<C64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![ZERO; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![ZERO; m];
        let mut g = vec![ZERO; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        while k < m && iterations < max_iter {
            let mut w = op(&basis[k]);
            // modified Gram–Schmidt, applied twice
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(v, &w);
                    h[i][k] += hij;
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = C64::new(wn, 0.0);

            for i in 0..k {
                let tmp = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = tmp;
            }
            let a = h[k][k];
            let bb = h[k + 1][k];
            let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if r == 0.0 {
                cs[k] = 1.0;
                sn[k] = ZERO;
            } else if a == ZERO {
                cs[k] = 0.0;
                sn[k] = bb.conj() / r;
            } else {
                cs[k] = a.norm() / r;
                sn[k] = (a / a.norm()) * bb.conj() / r;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];

            iterations += 1;
            k += 1;
            if g[k].norm() / bnorm <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back-substitute the k×k triangular system
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xj, vj)| *xj += yi * vj);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_matrix(n: usize, seed: u64) -> CMatrix {
        // deterministic pseudo-random entries
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn schur_reconstructs() {
        let m = test_matrix(7, 3);
        let (q, t) = schur(&m).unwrap();
        assert!((&q * &t * q.adjoint() - &m).norm() < 1e-12);
        for j in 0..7 {
            for i in (j + 1)..7 {
                assert_eq!(t[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn sylvester_solves_lyapunov_form() {
        let n = 6;
        let mut a = test_matrix(n, 11);
        for i in 0..n {
            a[(i, i)] -= C64::new(0.0, 2.0);
        }
        let (q, t) = schur(&a).unwrap();
        let c = test_matrix(n, 5);
        let ct = q.adjoint() * &c * &q;
        let y = sylvester_triangular(&t, &ct).unwrap();
        let x = &q * y * q.adjoint();
        let resid = &a * &x - &x * a.adjoint() - &c;
        assert!(resid.norm() < 1e-12, "{}", resid.norm());
    }

    #[test]
    fn sylvester_detects_singular() {
        let t = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        assert!(sylvester_triangular(&t, &CMatrix::identity(2, 2)).is_none());
    }

    #[test]
    fn gmres_matches_lu() {
        let n = 30;
        let mut a = test_matrix(n, 7);
        for i in 0..n {
            a[(i, i)] += C64::new(4.0, 1.0);
        }
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let out = gmres(
            |v| {
                (&a * nalgebra::DVector::from_column_slice(v))
                    .iter()
                    .copied()
                    .collect()
            },
            &b,
            10,
            500,
            1e-13,
        );
        assert!(out.converged);
        let exact = a.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        let err: f64 = out
            .x
            .iter()
            .zip(exact.iter())
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn trace_distance_of_orthogonal_projectors() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = C64::new(1.0, 0.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(1, 1)] = C64::new(1.0, 0.0);
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a) < 1e-15);
    }
}
