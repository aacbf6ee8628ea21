//! Sparse matrix and Krylov machinery used by the elliptic solvers.

use crate::error::{Error, Result};

/// Outcome of a converged PCG solve.
#[allow(dead_code)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Preconditioned conjugate gradient for SPD operators.
///
/// `apply_a` and `apply_m` write into their output slice. The optional
/// `project` is applied to residual-like vectors each iteration (used for
/// singular Neumann systems whose kernel is the constants). Weighted inner
/// products are supported through `weight` (None = Euclidean).
#[allow(clippy::too_many_arguments)]
pub fn pcg<A, M, P>(
    apply_a: A,
    apply_m: M,
    project: Option<P>,
    b: &[f64],
    x: &mut [f64],
    weight: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgStats>
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = b.len();
    let dot = |u: &[f64], v: &[f64]| -> f64 {
        match weight {
            Some(w) => u.iter().zip(v).zip(w).map(|((a, b), w)| a * b * w).sum(),
            None => u.iter().zip(v).map(|(a, b)| a * b).sum(),
        }
    };
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    apply_a(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    if let Some(pr) = &project {
        pr(&mut r);
    }
    let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut res = dot(&r, &r).sqrt();
    if res / b_norm <= tol {
        return Ok(CgStats { iterations: 0, rel_residual: res / b_norm });
    }
    apply_m(&r, &mut z);
    if let Some(pr) = &project {
        pr(&mut z);
    }
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        apply_a(&p, &mut ap);
        if let Some(pr) = &project {
            pr(&mut ap);
        }
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res / b_norm <= tol {
            if let Some(pr) = &project {
                pr(x);
            }
            return Ok(CgStats { iterations: it, rel_residual: res / b_norm });
        }
        apply_m(&r, &mut z);
        if let Some(pr) = &project {
            pr(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged { residual: res / b_norm, target: tol, iterations: max_iter })
}

/// Symmetric positive definite banded matrix (half-bandwidth 2) with an
/// in-place LDLᵀ factorization.
#[derive(Debug, Clone)]
pub struct BandedSym {
    pub n: usize,
    /// bands[b][i] = A[i, i+b] for b = 0..=2
    bands: [Vec<f64>; 3],
    factored: bool,
}

impl BandedSym {
    pub fn zeros(n: usize) -> Self {
        BandedSym {
            n,
            bands: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            factored: false,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let b = hi - lo;
        assert!(b <= 2, "bandwidth exceeded");
        self.bands[b][lo] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let b = hi - lo;
        if b > 2 {
            return 0.0;
        }
        self.bands[b][lo]
    }

    /// LDLᵀ factorization within the band (no pivoting; SPD assumed).
    pub fn factor(&mut self) {
        let n = self.n;
        // l1[i] = L[i+1, i], l2[i] = L[i+2, i], d[i] diagonal of D
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        let mut l2 = vec![0.0; n];
        for i in 0..n {
            let mut di = self.bands[0][i];
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            d[i] = di;
            if i + 1 < n {
                let mut v = self.bands[1][i];
                if i >= 1 {
                    v -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = v / d[i];
            }
            if i + 2 < n {
                l2[i] = self.bands[2][i] / d[i];
            }
        }
        self.bands[0] = d;
        self.bands[1] = l1;
        self.bands[2] = l2;
        self.factored = true;
    }

    /// Solve A x = b in place (requires `factor` first).
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored);
        let n = self.n;
        let d = &self.bands[0];
        let l1 = &self.bands[1];
        let l2 = &self.bands[2];
        // forward: L y = b
        for i in 0..n {
            let mut v = b[i];
            if i >= 1 {
                v -= l1[i - 1] * b[i - 1];
            }
            if i >= 2 {
                v -= l2[i - 2] * b[i - 2];
            }
            b[i] = v;
        }
        // diagonal
        for i in 0..n {
            b[i] /= d[i];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= l1[i] * b[i + 1];
            }
            if i + 2 < n {
                v -= l2[i] * b[i + 2];
            }
            b[i] = v;
        }
    }
}


#[cfg(test)]
mod banded_tests {
    use super::*;

    #[test]
    fn banded_factor_solve() {
        // pentadiagonal SPD: 6 on diag, -2 off1, 0.5 off2
        let n = 12;
        let mut a = BandedSym::zeros(n);
        for i in 0..n {
            a.set(i, i, 6.0);
            if i + 1 < n {
                a.set(i, i + 1, -2.0);
            }
            if i + 2 < n {
                a.set(i, i + 2, 0.5);
            }
        }
        let reference = a.clone();
        a.factor();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += reference.get(i, j) * x_true[j];
            }
        }
        a.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
