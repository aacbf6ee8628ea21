//! Variable-coefficient elliptic solves on the mapped polar grid.
//!
//! The physical Dirichlet form ∫_Ω ∇u·∇v dx pulls back to
//! ∫∫ (∂u)ᵀ G (∂v) dρ dθ with G = det J (JᵀJ)⁻¹; for the radial-stretch
//! chart
//!
//!   G = [[ρ(1+q²), −q], [−q, 1/ρ]],    q(θ) = R'(θ)/R(θ).
//!
//! Discretization: Fourier modes in θ (the grid direction is uniform and
//! periodic, and boundary data is already stored as a series) tensored with
//! quadratic Lagrange elements on a uniform radial mesh 0 = r₀ < … < r_m = 1.
//! The θ-dependent coefficients couple modes through their Fourier
//! coefficients, which decay exponentially for band-limited η, so the
//! operator is block-banded in mode offset with exactly integrated 1-D
//! radial element matrices (the 1/ρ factor integrates to logarithms away
//! from the pole; at the pole the k ≠ 0 radial functions vanish, which is
//! the classical polar regularity condition). Everything is assembled from
//! the bilinear form, so the operator is Hermitian to machine precision and
//! the Dirichlet-to-Neumann map built from the variationally consistent
//! boundary flux is self-adjoint, positive, satisfies the Green identity,
//! and inverts N⁻¹ exactly at the discrete level.
//!
//! Solves are conjugate gradients preconditioned by the exact inverse of
//! the disk (η ≡ 0) operator, which is block-diagonal per mode (banded
//! symmetric factorizations, precomputed).

use crate::complex::Complex64;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::BandedSym;
use crate::series::{dft_forward, BoundarySeries};
use crate::surface::DomainChart;
use std::sync::Arc;

/// Function on the free boundary, pulled back to the reference circle.
pub type BoundaryFn = BoundarySeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exactly integrated radial element matrices for the quadratic basis.
struct RadialMatrices {
    /// S_ij = ∫ ρ N_i' N_j'
    s: Band2,
    /// P_ij = ∫ N_i' N_j
    p: Band2NonSym,
    /// U_ij = ∫ N_i N_j / ρ  (entries touching the pole node are only used
    /// with k k' = 0 factors and are stored as 0)
    u: Band2,
    /// Z_ij = ∫ ρ N_i N_j
    z: Band2,
}

/// Symmetric banded (half-bandwidth 2) real matrix stored by diagonals.
#[derive(Clone)]
struct Band2 {
    n: usize,
    d0: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Band2 {
    fn zeros(n: usize) -> Self {
        Band2 { n, d0: vec![0.0; n], d1: vec![0.0; n.saturating_sub(1)], d2: vec![0.0; n.saturating_sub(2)] }
    }
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.d0[lo] += v,
            1 => self.d1[lo] += v,
            2 => self.d2[lo] += v,
            _ => panic!("bandwidth exceeded"),
        }
    }
    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.d0[lo],
            1 => self.d1[lo],
            2 => self.d2[lo],
            _ => 0.0,
        }
    }
}

/// General banded (half-bandwidth 2) real matrix (P is not symmetric).
#[derive(Clone)]
struct Band2NonSym {
    n: usize,
    /// data[i] holds entries (i, i-2..=i+2)
    rows: Vec<[f64; 5]>,
}

impl Band2NonSym {
    fn zeros(n: usize) -> Self {
        Band2NonSym { n, rows: vec![[0.0; 5]; n] }
    }
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let off = j as i64 - i as i64;
        assert!((-2..=2).contains(&off), "bandwidth exceeded");
        self.rows[i][(off + 2) as usize] += v;
    }
}

/// ∫_a^b x^m dx
fn power_int(a: f64, b: f64, m: i32) -> f64 {
    if m == -1 {
        (b / a).ln()
    } else {
        let e = m + 1;
        (b.powi(e) - a.powi(e)) / e as f64
    }
}

/// Coefficients of the quadratic Lagrange polynomial through
/// (x0,..,x2) equal to 1 at node `which`, as monomials c0 + c1 x + c2 x².
fn lagrange2_coeffs(xs: [f64; 3], which: usize) -> [f64; 3] {
    let (xa, xb) = match which {
        0 => (xs[1], xs[2]),
        1 => (xs[0], xs[2]),
        _ => (xs[0], xs[1]),
    };
    let denom = (xs[which] - xa) * (xs[which] - xb);
    // (x - xa)(x - xb) / denom
    [xa * xb / denom, -(xa + xb) / denom, 1.0 / denom]
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

/// ∫_a^b poly(x)·x^shift dx with exact power/log rules.
fn poly_int(poly: &[f64], a: f64, b: f64, shift: i32) -> f64 {
    poly.iter()
        .enumerate()
        .map(|(m, &c)| {
            if c == 0.0 {
                0.0
            } else {
                c * power_int(a, b, m as i32 + shift)
            }
        })
        .sum()
}

impl RadialMatrices {
    fn build(m: usize) -> Self {
        assert!(m >= 4 && m % 2 == 0, "radial interval count must be even and >= 4");
        let n = m + 1;
        let h = 1.0 / m as f64;
        let mut s = Band2::zeros(n);
        let mut u = Band2::zeros(n);
        let mut z = Band2::zeros(n);
        let mut p = Band2NonSym::zeros(n);
        for e in 0..m / 2 {
            let i0 = 2 * e;
            let xs = [i0 as f64 * h, (i0 + 1) as f64 * h, (i0 + 2) as f64 * h];
            let (a, b) = (xs[0], xs[2]);
            let basis: Vec<[f64; 3]> = (0..3).map(|w| lagrange2_coeffs(xs, w)).collect();
            for li in 0..3 {
                for lj in 0..3 {
                    let (gi, gj) = (i0 + li, i0 + lj);
                    let ni = &basis[li][..];
                    let nj = &basis[lj][..];
                    let dni = poly_deriv(ni);
                    let dnj = poly_deriv(nj);
                    if lj >= li {
                        s.add(gi, gj, poly_int(&poly_mul(&dni, &dnj), a, b, 1));
                        z.add(gi, gj, poly_int(&poly_mul(ni, nj), a, b, 1));
                        // U: on the pole element the product vanishes at 0
                        // quadratically unless a pole-node basis is involved;
                        // those entries only ever multiply k k' = 0.
                        let prod = poly_mul(ni, nj);
                        if a == 0.0 {
                            if prod[0].abs() < 1e-14 && prod[1].abs() < 1e-14 {
                                let reduced = &prod[2..];
                                u.add(gi, gj, poly_int(reduced, a, b, 1));
                            }
                        } else {
                            u.add(gi, gj, poly_int(&prod, a, b, -1));
                        }
                    }
                    p.add(gi, gj, poly_int(&poly_mul(&dni, nj), a, b, 0));
                }
            }
        }
        RadialMatrices { s, p, u, z }
    }
}

/// Mode-coupling Fourier coefficients of a real θ-periodic function, from
/// oversampled series data. coeff(d) ≈ (1/2π)∫ f e^{-idθ} dθ.
struct ThetaCoeffs {
    coeffs: Vec<Complex64>,
    half: usize,
    band: usize,
}

impl ThetaCoeffs {
    fn build(samples: &[f64], keep_tol: f64) -> Self {
        let n = samples.len();
        let spec = dft_forward(samples);
        let half = n / 2;
        let mut coeffs = vec![ZERO; n];
        for (k, c) in spec.iter().enumerate() {
            coeffs[k] = *c / n as f64;
        }
        let scale = coeffs[0].norm().max(1.0);
        let mut band = 0usize;
        for d in 1..=half.saturating_sub(1) {
            if coeffs[d].norm() > keep_tol * scale || coeffs[n - d].norm() > keep_tol * scale {
                band = d;
            }
        }
        ThetaCoeffs { coeffs, half, band }
    }

    /// Fourier coefficient for signed offset d.
    fn get(&self, d: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        if d.unsigned_abs() as usize > self.half {
            return ZERO;
        }
        self.coeffs[d.rem_euclid(n) as usize]
    }
}

/// Workspace: radial element matrices, coefficient spectra, per-mode disk
/// factorizations, and the boundary Gram matrix.
pub struct EllipticWorkspace {
    pub chart: Arc<DomainChart>,
    /// radial intervals (uniform, nodes 0..=m_r); m_r = chart.n_r
    m_r: usize,
    /// retained Fourier modes k = -k_max..=k_max
    k_max: usize,
    rad: RadialMatrices,
    /// spectra of 1+q², q, R², and the curve element √(R²+R'²)
    c_g1: ThetaCoeffs,
    c_q: ThetaCoeffs,
    c_r2: ThetaCoeffs,
    /// disk factorizations per |k| (Dirichlet: interior nodes; Neumann: + boundary)
    disk_dir: Vec<BandedSym>,
    disk_neu: Vec<BandedSym>,
    /// boundary Gram: Hermitian Toeplitz from the curve element spectrum,
    /// factored densely over modes -k_max..=k_max
    gram_chol: Vec<Vec<Complex64>>,
    pub tol: f64,
    pub max_iter: usize,
}

/// Complex mode array: modes k = -k_max..=k_max (index k + k_max), each with
/// radial values at solver nodes 0..=m_r. Row-major: mode-major.
pub struct ModeArray {
    pub k_max: usize,
    pub n_rad: usize,
    pub data: Vec<Complex64>,
}

impl ModeArray {
    fn zeros(k_max: usize, n_rad: usize) -> Self {
        ModeArray { k_max, n_rad, data: vec![ZERO; (2 * k_max + 1) * n_rad] }
    }
    #[inline]
    fn idx(&self, k: i64, i: usize) -> usize {
        ((k + self.k_max as i64) as usize) * self.n_rad + i
    }
}

impl EllipticWorkspace {
    pub fn new(chart: Arc<DomainChart>, tol: f64, max_iter: usize) -> Self {
        let m_r = chart.n_r;
        let k_max = chart.n_theta / 2 - 1;
        let rad = RadialMatrices::build(m_r);

        // coefficient spectra on a 4x oversampled θ grid
        let fine = 4 * chart.n_theta;
        let d_eta = chart.surface.eta.derivative();
        let mut g1 = vec![0.0; fine];
        let mut qv = vec![0.0; fine];
        let mut r2 = vec![0.0; fine];
        for j in 0..fine {
            let th = 2.0 * std::f64::consts::PI * j as f64 / fine as f64;
            let r = chart.surface.radius(th);
            let rp = d_eta.eval(th);
            let q = rp / r;
            g1[j] = 1.0 + q * q;
            qv[j] = q;
            r2[j] = r * r;
        }
        let keep = 1e-14;
        let c_g1 = ThetaCoeffs::build(&g1, keep);
        let c_q = ThetaCoeffs::build(&qv, keep);
        let c_r2 = ThetaCoeffs::build(&r2, keep);

        // disk factorizations: B_k = S + k² U on the admissible radial DOFs
        let n_rad = m_r + 1;
        let mut disk_dir = Vec::with_capacity(k_max + 1);
        let mut disk_neu = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let kk = (k * k) as f64;
            // Dirichlet: drop boundary node; drop pole node for k != 0
            let lo = if k == 0 { 0 } else { 1 };
            let dir_n = n_rad - 1 - lo;
            let mut dir = BandedSym::zeros(dir_n);
            for i in 0..dir_n {
                for j in i..(i + 3).min(dir_n) {
                    let (gi, gj) = (i + lo, j + lo);
                    let v = (rad.s.get(gi, gj) + kk * rad.u.get(gi, gj)) * 2.0 * std::f64::consts::PI;
                    if v != 0.0 {
                        dir.set(i, j, v);
                    }
                }
            }
            dir.factor();
            disk_dir.push(dir);

            let neu_n = n_rad - lo;
            let mut neu = BandedSym::zeros(neu_n);
            for i in 0..neu_n {
                for j in i..(i + 3).min(neu_n) {
                    let (gi, gj) = (i + lo, j + lo);
                    let v = (rad.s.get(gi, gj) + kk * rad.u.get(gi, gj)) * 2.0 * std::f64::consts::PI;
                    if v != 0.0 {
                        neu.set(i, j, v);
                    }
                }
            }
            if k == 0 {
                // kernel = constants; shift to keep the factorization SPD
                // (the CG projects constants out, the preconditioner only
                // needs to be positive definite)
                let scale = neu.get(0, 0).abs().max(1.0);
                for i in 0..neu_n {
                    let d = neu.get(i, i);
                    neu.set(i, i, d + 1e-3 * scale);
                }
            }
            neu.factor();
            disk_neu.push(neu);
        }

        // boundary Gram: M[(k),(k')] = 2π ℓ̂_{k-k'}, Hermitian Toeplitz
        let ell: Vec<f64> = (0..fine)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / fine as f64;
                let r = chart.surface.radius(th);
                let rp = d_eta.eval(th);
                (r * r + rp * rp).sqrt()
            })
            .collect();
        let c_ell = ThetaCoeffs::build(&ell, keep);
        let dim = 2 * k_max + 1;
        let mut gram = vec![vec![ZERO; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let d = b as i64 - a as i64; // (k' - k)
                gram[a][b] = c_ell.get(-d) * (2.0 * std::f64::consts::PI);
            }
        }
        let gram_chol = cholesky_complex(gram);

        EllipticWorkspace {
            chart,
            m_r,
            k_max,
            rad,
            c_g1,
            c_q,
            c_r2,
            disk_dir,
            disk_neu,
            gram_chol,
            tol,
            max_iter,
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn n_rad(&self) -> usize {
        self.m_r + 1
    }

    /// Apply the stiffness operator to a full mode array (all radial nodes
    /// including pole and boundary).
    ///
    /// A[(k,i),(k',j)] = ĝ1(k-k') S_ij + i q̂(k-k') (k P_ji - k' P_ij)
    ///                 + δ_{kk'} k² U_ij
    fn apply_stiffness(&self, x: &ModeArray, y: &mut ModeArray) {
        y.data.iter_mut().for_each(|v| *v = ZERO);
        let n = self.n_rad();
        let km = self.k_max as i64;
        let band = self.c_g1.band.max(self.c_q.band) as i64;
        let two_pi = 2.0 * std::f64::consts::PI;
        for k in -km..=km {
            let yo = y.idx(k, 0);
            // diagonal U-term (θ-integral of e^{i0θ} contributes 2π)
            let xo = x.idx(k, 0);
            let kk = (k * k) as f64 * two_pi;
            if k != 0 {
                band2_axpy(&self.rad.u, kk, &x.data[xo..xo + n], &mut y.data[yo..yo + n]);
            }
            for kp in (k - band).max(-km)..=(k + band).min(km) {
                let d = k - kp;
                let g1 = self.c_g1.get(d) * two_pi;
                let q = self.c_q.get(d) * two_pi;
                let xo = x.idx(kp, 0);
                if g1.norm_sqr() > 0.0 {
                    band2_axpy_c(&self.rad.s, g1, &x.data[xo..xo + n], &mut y.data[yo..yo + n]);
                }
                if q.norm_sqr() > 0.0 {
                    // i q (k P_ji x_j) : transpose apply
                    let w1 = Complex64::new(0.0, k as f64) * q;
                    band2nonsym_axpy_t(&self.rad.p, w1, &x.data[xo..xo + n], &mut y.data[yo..yo + n]);
                    // -i q k' P_ij x_j
                    let w2 = Complex64::new(0.0, -(kp as f64)) * q;
                    band2nonsym_axpy(&self.rad.p, w2, &x.data[xo..xo + n], &mut y.data[yo..yo + n]);
                }
            }
        }
    }

    /// Apply the mass operator (det J weight): M[(k,i),(k',j)] = r̂2(k-k') Z_ij.
    fn apply_mass(&self, x: &ModeArray, y: &mut ModeArray) {
        y.data.iter_mut().for_each(|v| *v = ZERO);
        let n = self.n_rad();
        let km = self.k_max as i64;
        let band = self.c_r2.band as i64;
        for k in -km..=km {
            let yo = y.idx(k, 0);
            for kp in (k - band).max(-km)..=(k + band).min(km) {
                let r2 = self.c_r2.get(k - kp) * (2.0 * std::f64::consts::PI);
                if r2.norm_sqr() == 0.0 {
                    continue;
                }
                let xo = x.idx(kp, 0);
                band2_axpy_c(&self.rad.z, r2, &x.data[xo..xo + n], &mut y.data[yo..yo + n]);
            }
        }
    }

    /// Pole/boundary admissibility projection for the Dirichlet system:
    /// zero the boundary node for all modes and the pole node for k ≠ 0.
    fn project_dirichlet(&self, x: &mut ModeArray) {
        let n = self.n_rad();
        let km = self.k_max as i64;
        for k in -km..=km {
            let o = x.idx(k, 0);
            x.data[o + n - 1] = ZERO;
            if k != 0 {
                x.data[o] = ZERO;
            }
        }
    }

    fn project_neumann(&self, x: &mut ModeArray) {
        let km = self.k_max as i64;
        for k in -km..=km {
            if k != 0 {
                let o = x.idx(k, 0);
                x.data[o] = ZERO;
            }
        }
    }

    /// Disk preconditioner for the Dirichlet system.
    fn precondition_dirichlet(&self, r: &ModeArray, z: &mut ModeArray) {
        let n = self.n_rad();
        let km = self.k_max as i64;
        let mut buf = vec![0.0; n];
        for k in -km..=km {
            let o = r.idx(k, 0);
            let lo = if k == 0 { 0 } else { 1 };
            let fact = &self.disk_dir[k.unsigned_abs() as usize];
            let dn = n - 1 - lo;
            for part in 0..2 {
                for i in 0..dn {
                    buf[i] = if part == 0 { r.data[o + lo + i].re } else { r.data[o + lo + i].im };
                }
                fact.solve(&mut buf[..dn]);
                for i in 0..dn {
                    if part == 0 {
                        z.data[o + lo + i].re = buf[i];
                    } else {
                        z.data[o + lo + i].im = buf[i];
                    }
                }
            }
            z.data[o + n - 1] = ZERO;
            if k != 0 {
                z.data[o] = ZERO;
            }
        }
    }

    fn precondition_neumann(&self, r: &ModeArray, z: &mut ModeArray) {
        let n = self.n_rad();
        let km = self.k_max as i64;
        let mut buf = vec![0.0; n];
        for k in -km..=km {
            let o = r.idx(k, 0);
            let lo = if k == 0 { 0 } else { 1 };
            let fact = &self.disk_neu[k.unsigned_abs() as usize];
            let dn = n - lo;
            for part in 0..2 {
                for i in 0..dn {
                    buf[i] = if part == 0 { r.data[o + lo + i].re } else { r.data[o + lo + i].im };
                }
                fact.solve(&mut buf[..dn]);
                for i in 0..dn {
                    if part == 0 {
                        z.data[o + lo + i].re = buf[i];
                    } else {
                        z.data[o + lo + i].im = buf[i];
                    }
                }
            }
            if k != 0 {
                z.data[o] = ZERO;
            }
        }
    }

    /// Hermitian PCG on mode arrays.
    #[allow(clippy::too_many_arguments)]
    fn pcg_modes<Ap, Mp, Pr>(
        &self,
        apply: Ap,
        precond: Mp,
        project: Pr,
        b: &ModeArray,
        x: &mut ModeArray,
    ) -> Result<()>
    where
        Ap: Fn(&ModeArray, &mut ModeArray),
        Mp: Fn(&ModeArray, &mut ModeArray),
        Pr: Fn(&mut ModeArray),
    {
        let len = b.data.len();
        let dot = |a: &ModeArray, c: &ModeArray| -> f64 {
            a.data
                .iter()
                .zip(&c.data)
                .map(|(p, q)| p.re * q.re + p.im * q.im)
                .sum()
        };
        let mut r = ModeArray::zeros(b.k_max, b.n_rad);
        let mut z = ModeArray::zeros(b.k_max, b.n_rad);
        let mut p = ModeArray::zeros(b.k_max, b.n_rad);
        let mut ap = ModeArray::zeros(b.k_max, b.n_rad);
        apply(x, &mut ap);
        for i in 0..len {
            r.data[i] = b.data[i] - ap.data[i];
        }
        project(&mut r);
        let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
        let mut res = dot(&r, &r).sqrt();
        if res / b_norm <= self.tol {
            return Ok(());
        }
        precond(&r, &mut z);
        project(&mut z);
        p.data.copy_from_slice(&z.data);
        let mut rz = dot(&r, &z);
        for _it in 1..=self.max_iter {
            apply(&p, &mut ap);
            project(&mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..len {
                x.data[i] += alpha * p.data[i];
                r.data[i] = r.data[i] - alpha * ap.data[i];
            }
            res = dot(&r, &r).sqrt();
            if res / b_norm <= self.tol {
                project(x);
                return Ok(());
            }
            precond(&r, &mut z);
            project(&mut z);
            let rz2 = dot(&r, &z);
            let beta = rz2 / rz;
            rz = rz2;
            for i in 0..len {
                p.data[i] = z.data[i] + beta * p.data[i];
            }
        }
        Err(Error::SolverDiverged { residual: res / b_norm, target: self.tol, iterations: self.max_iter })
    }

    // ----- field <-> mode transforms -----

    /// Mode representation of a grid field at the solver's radial nodes.
    /// Radial values come from cubic interpolation of the field rings plus
    /// the boundary trace; mode k at the pole is zero for k ≠ 0.
    pub fn field_to_modes(&self, f: &ScalarField) -> ModeArray {
        let chart = &self.chart;
        let (nr, nt) = (chart.n_r, chart.n_theta);
        let trace = f.trace_samples();
        // per-ring spectra (including the trace ring at ρ=1)
        let mut ring_modes: Vec<Vec<Complex64>> = Vec::with_capacity(nr + 1);
        for i in 0..nr {
            let spec = dft_forward(&f.values[i * nt..(i + 1) * nt]);
            ring_modes.push(spec.iter().map(|c| *c / nt as f64).collect());
        }
        let trace_spec: Vec<Complex64> = dft_forward(&trace).iter().map(|c| *c / nt as f64).collect();
        ring_modes.push(trace_spec);
        let rho_rings: Vec<f64> = chart.rho.iter().copied().chain(std::iter::once(1.0)).collect();

        let mut out = ModeArray::zeros(self.k_max, self.n_rad());
        let km = self.k_max as i64;
        let h = 1.0 / self.m_r as f64;
        for k in -km..=km {
            let spec_idx = k.rem_euclid(nt as i64) as usize;
            for i in 0..=self.m_r {
                let r = i as f64 * h;
                let v = if i == self.m_r {
                    ring_modes[nr][spec_idx]
                } else if i == 0 {
                    if k == 0 {
                        // radial extrapolation of the mean mode to the pole
                        interp_complex(&rho_rings, &ring_modes, spec_idx, 0.0)
                    } else {
                        ZERO
                    }
                } else {
                    interp_complex(&rho_rings, &ring_modes, spec_idx, r)
                };
                let o = out.idx(k, i);
                out.data[o] = v;
            }
        }
        out
    }

    /// Evaluate a mode solution at the chart's field nodes; the boundary
    /// ring is the k-sum of the boundary radial node.
    pub fn modes_to_field(&self, u: &ModeArray) -> ScalarField {
        let chart = &self.chart;
        let (nr, nt) = (chart.n_r, chart.n_theta);
        let mut values = vec![0.0; nr * nt];
        let mut boundary = vec![0.0; nt];
        let km = self.k_max as i64;
        // radial evaluation matrix: for each field ring, P2 evaluation weights
        for (ring, &rho) in chart.rho.iter().enumerate() {
            let (i0, w) = self.radial_eval_weights(rho);
            // spectrum at this ring
            let mut spec = vec![ZERO; nt];
            for k in -km..=km {
                let o = u.idx(k, 0);
                let mut v = ZERO;
                for (m, wm) in w.iter().enumerate() {
                    v += *wm * u.data[o + i0 + m];
                }
                spec[k.rem_euclid(nt as i64) as usize] = v * nt as f64;
            }
            let vals = crate::series::dft_inverse(&spec);
            for j in 0..nt {
                values[ring * nt + j] = vals[j].re / nt as f64;
            }
        }
        let mut spec = vec![ZERO; nt];
        for k in -km..=km {
            spec[k.rem_euclid(nt as i64) as usize] = u.data[u.idx(k, self.m_r)] * nt as f64;
        }
        let vals = crate::series::dft_inverse(&spec);
        for j in 0..nt {
            boundary[j] = vals[j].re / nt as f64;
        }
        ScalarField { chart: self.chart.clone(), values, boundary: Some(boundary) }
    }

    /// Radial evaluation weights at radius ρ: quintic Lagrange through the
    /// six nearest solver nodes (the nodal values are superconvergent, so
    /// interpolating through them beats the element shape functions off the
    /// nodes; the high order keeps correction fields smooth at grid scale).
    fn radial_eval_weights(&self, rho: f64) -> (usize, [f64; 6]) {
        let h = 1.0 / self.m_r as f64;
        let i0 = ((rho / h).floor() as i64 - 2).clamp(0, self.m_r as i64 - 5) as usize;
        let mut xs = [0.0; 6];
        for (m, x) in xs.iter_mut().enumerate() {
            *x = (i0 + m) as f64 * h;
        }
        let mut w = [0.0; 6];
        for (m, wm) in w.iter_mut().enumerate() {
            let mut prod = 1.0;
            for p in 0..6 {
                if p != m {
                    prod *= (rho - xs[p]) / (xs[m] - xs[p]);
                }
            }
            *wm = prod;
        }
        (i0, w)
    }

    /// BoundaryFn -> mode coefficients (k = -k_max..=k_max).
    fn boundary_to_modes(&self, g: &BoundaryFn) -> Vec<Complex64> {
        let km = self.k_max as i64;
        (-km..=km).map(|k| g.coeff(k)).collect()
    }

    fn modes_to_boundary(&self, modes: &[Complex64]) -> BoundaryFn {
        BoundarySeries::from_coeffs(modes.to_vec())
    }

    // ----- solves -----

    /// Solve Δu = f in Ω, u = g on Γ. The returned field carries g as its
    /// boundary ring. Residual contract: relative CG residual ≤ tol.
    pub fn poisson_dirichlet(&self, f: &ScalarField, g: &BoundaryFn) -> Result<ScalarField> {
        self.poisson_dirichlet_flux(f, g).map(|(u, _)| u)
    }

    /// Same as `poisson_dirichlet` but also returns the variationally
    /// consistent normal derivative ∂_n u on Γ.
    pub fn poisson_dirichlet_flux(
        &self,
        f: &ScalarField,
        g: &BoundaryFn,
    ) -> Result<(ScalarField, BoundaryFn)> {
        let (u, flux, _) = self.solve_dirichlet_modes(f, g)?;
        let mut field = self.modes_to_field(&u);
        // the boundary ring is exactly the Dirichlet data
        field.boundary = Some(g.sample(self.chart.n_theta));
        Ok((field, flux))
    }

    /// Dirichlet solve returning the solution and its gradient, with the
    /// gradient evaluated from the mode representation (spectral in θ,
    /// differentiated cubic interpolation of the superconvergent nodal
    /// values in ρ). Corrections built from this gradient stay smooth at
    /// the grid scale, which keeps projection loops geometric.
    pub fn poisson_dirichlet_gradient(
        &self,
        f: &ScalarField,
        g: &BoundaryFn,
    ) -> Result<(ScalarField, crate::field::VectorField)> {
        let (u, _, _) = self.solve_dirichlet_modes(f, g)?;
        let mut field = self.modes_to_field(&u);
        field.boundary = Some(g.sample(self.chart.n_theta));
        let grad = self.modes_to_gradient(&u);
        Ok((field, grad))
    }

    /// Gradient of a grid field through the workspace representation:
    /// transform to modes, differentiate spectrally in θ and through the
    /// quintic nodal interpolant in ρ, chain-rule back to Cartesian
    /// components. Smooth at grid scale by construction.
    pub fn smooth_gradient(&self, u: &ScalarField) -> crate::field::VectorField {
        let modes = self.field_to_modes(u);
        self.modes_to_gradient(&modes)
    }

    /// Divergence of a vector field in the workspace representation; this
    /// is the constraint-residual metric used by the projections (the
    /// pointwise finite-difference divergence retains sub-representation
    /// aliasing noise that no smooth correction can cancel).
    pub fn smooth_divergence(&self, v: &crate::field::VectorField) -> ScalarField {
        let gx = self.smooth_gradient(&v.x_component());
        let gy = self.smooth_gradient(&v.y_component());
        let values: Vec<f64> = gx.vx.iter().zip(&gy.vy).map(|(a, b)| a + b).collect();
        ScalarField { chart: self.chart.clone(), values, boundary: None }
    }

    /// Chain-ruled gradient of a mode solution at the chart's field nodes
    /// and boundary ring.
    fn modes_to_gradient(&self, u: &ModeArray) -> crate::field::VectorField {
        let chart = &self.chart;
        let (nr, nt) = (chart.n_r, chart.n_theta);
        let km = self.k_max as i64;
        let mut du_r = vec![0.0; nr * nt];
        let mut du_t = vec![0.0; nr * nt];
        let mut du_r_b = vec![0.0; nt];
        let mut du_t_b = vec![0.0; nt];
        let fill_ring = |rho: f64, out_r: &mut [f64], out_t: &mut [f64]| {
            let (i0, dw) = self.radial_deriv_weights(rho);
            let mut spec_r = vec![ZERO; nt];
            let mut spec_t = vec![ZERO; nt];
            let (vw_i0, vw) = self.radial_eval_weights(rho);
            for k in -km..=km {
                let o = u.idx(k, 0);
                let mut dv = ZERO;
                for (m, wm) in dw.iter().enumerate() {
                    dv += *wm * u.data[o + i0 + m];
                }
                let mut v = ZERO;
                for (m, wm) in vw.iter().enumerate() {
                    v += *wm * u.data[o + vw_i0 + m];
                }
                let idx = k.rem_euclid(nt as i64) as usize;
                spec_r[idx] = dv * nt as f64;
                spec_t[idx] = Complex64::new(0.0, k as f64) * v * nt as f64;
            }
            let vr = crate::series::dft_inverse(&spec_r);
            let vt = crate::series::dft_inverse(&spec_t);
            for j in 0..nt {
                out_r[j] = vr[j].re / nt as f64;
                out_t[j] = vt[j].re / nt as f64;
            }
        };
        let mut row_r = vec![0.0; nt];
        let mut row_t = vec![0.0; nt];
        for (ring, &rho) in chart.rho.iter().enumerate() {
            fill_ring(rho, &mut row_r, &mut row_t);
            du_r[ring * nt..(ring + 1) * nt].copy_from_slice(&row_r);
            du_t[ring * nt..(ring + 1) * nt].copy_from_slice(&row_t);
        }
        fill_ring(1.0, &mut du_r_b, &mut du_t_b);

        let n = nr * nt;
        let mut vx = vec![0.0; n];
        let mut vy = vec![0.0; n];
        for idx in 0..n {
            let it = &chart.inv_jac_t[idx];
            vx[idx] = it[0][0] * du_r[idx] + it[0][1] * du_t[idx];
            vy[idx] = it[1][0] * du_r[idx] + it[1][1] * du_t[idx];
        }
        let mut bx = vec![0.0; nt];
        let mut by = vec![0.0; nt];
        for j in 0..nt {
            let (r, rp) = (chart.r_b[j], chart.r_b_prime[j]);
            let (sn, cs) = chart.theta[j].sin_cos();
            let j11 = r * cs;
            let j12 = rp * cs - r * sn;
            let j21 = r * sn;
            let j22 = rp * sn + r * cs;
            let det = r * r;
            bx[j] = (j22 * du_r_b[j] - j21 * du_t_b[j]) / det;
            by[j] = (-j12 * du_r_b[j] + j11 * du_t_b[j]) / det;
        }
        crate::field::VectorField {
            chart: self.chart.clone(),
            vx,
            vy,
            boundary: Some((bx, by)),
            div_residual: None,
        }
    }

    /// Derivative weights of the quintic through six solver nodes.
    fn radial_deriv_weights(&self, rho: f64) -> (usize, [f64; 6]) {
        let h = 1.0 / self.m_r as f64;
        let i0 = ((rho / h).floor() as i64 - 2).clamp(0, self.m_r as i64 - 5) as usize;
        let mut xs = [0.0; 6];
        for (m, x) in xs.iter_mut().enumerate() {
            *x = (i0 + m) as f64 * h;
        }
        let mut w = [0.0; 6];
        for (m, wm) in w.iter_mut().enumerate() {
            let mut denom = 1.0;
            for p in 0..6 {
                if p != m {
                    denom *= xs[m] - xs[p];
                }
            }
            let mut dsum = 0.0;
            for q in 0..6 {
                if q == m {
                    continue;
                }
                let mut prod = 1.0;
                for p in 0..6 {
                    if p != m && p != q {
                        prod *= rho - xs[p];
                    }
                }
                dsum += prod;
            }
            *wm = dsum / denom;
        }
        (i0, w)
    }

    fn solve_dirichlet_modes(
        &self,
        f: &ScalarField,
        g: &BoundaryFn,
    ) -> Result<(ModeArray, BoundaryFn, ModeArray)> {
        let n = self.n_rad();
        let km = self.k_max as i64;
        // weak form of Δu = f: a(u,v) = −∫ f v dx, load = −M f
        let f_modes = self.field_to_modes(f);
        let mut load = ModeArray::zeros(self.k_max, n);
        self.apply_mass(&f_modes, &mut load);
        load.data.iter_mut().for_each(|v| *v = -*v);

        // boundary lift
        let g_modes = self.boundary_to_modes(g);
        let mut lift = ModeArray::zeros(self.k_max, n);
        for k in -km..=km {
            let o = lift.idx(k, n - 1);
            lift.data[o] = g_modes[(k + km) as usize];
        }
        let mut a_lift = ModeArray::zeros(self.k_max, n);
        self.apply_stiffness(&lift, &mut a_lift);

        let mut b = ModeArray::zeros(self.k_max, n);
        for i in 0..b.data.len() {
            b.data[i] = load.data[i] - a_lift.data[i];
        }
        self.project_dirichlet(&mut b);

        let mut x = ModeArray::zeros(self.k_max, n);
        self.pcg_modes(
            |v, out| self.apply_stiffness(v, out),
            |v, out| self.precondition_dirichlet(v, out),
            |v| self.project_dirichlet(v),
            &b,
            &mut x,
        )?;

        // full solution = interior + lift
        for i in 0..x.data.len() {
            x.data[i] += lift.data[i];
        }
        // flux: λ_k = (A u)_(k, boundary) + (M f)_(k, boundary), N-values = Gram⁻¹ λ
        let mut au = ModeArray::zeros(self.k_max, n);
        self.apply_stiffness(&x, &mut au);
        let dim = 2 * self.k_max + 1;
        let mut lambda = vec![ZERO; dim];
        for k in -km..=km {
            let row = au.data[au.idx(k, n - 1)] - load.data[load.idx(k, n - 1)];
            lambda[(k + km) as usize] = row;
        }
        let flux_modes = cholesky_solve(&self.gram_chol, &lambda);
        let flux = self.modes_to_boundary(&flux_modes);
        Ok((x, flux, load))
    }

    /// Harmonic extension H g (Δu = 0, u = g on Γ).
    pub fn harmonic_extension(&self, g: &BoundaryFn) -> Result<ScalarField> {
        let zero = ScalarField::zeros(self.chart.clone());
        self.poisson_dirichlet(&zero, g)
    }

    /// Dirichlet-to-Neumann map N g = ∂_n (H g) via the consistent flux.
    pub fn dtn(&self, g: &BoundaryFn) -> Result<BoundaryFn> {
        let zero = ScalarField::zeros(self.chart.clone());
        let (_, flux) = self.poisson_dirichlet_flux(&zero, g)?;
        Ok(flux)
    }

    /// m-fold composition of the DtN map.
    pub fn dtn_power(&self, g: &BoundaryFn, m: usize) -> Result<BoundaryFn> {
        let mut out = g.clone();
        for _ in 0..m {
            out = self.dtn(&out)?;
        }
        Ok(out)
    }

    /// Solve N g = f for surface-mean-zero f; g normalized to mean zero.
    pub fn dtn_inverse(&self, f: &BoundaryFn) -> Result<BoundaryFn> {
        let n = self.n_rad();
        let km = self.k_max as i64;
        let f_modes = self.boundary_to_modes(f);
        // surface integral ∫f dS = (Gram f)_0-row pairing with constants:
        // = Σ_k Gram[0-mode-row? constants pair as conj(1)·…] — use the
        // Gram product against the constant mode vector.
        let gf = gram_mul(&self.gram_chol_input(), &f_modes);
        let total = gf[(0 + km) as usize].re; // ⟨1, f⟩ = row k=0
        let f_norm = {
            let mut acc = 0.0;
            for (a, fa) in f_modes.iter().enumerate() {
                acc += (fa.conj() * gf[a]).re;
            }
            acc.max(0.0).sqrt()
        };
        let tol_mean = 1e-8 * f_norm.max(f64::MIN_POSITIVE);
        if total.abs() > tol_mean {
            return Err(Error::NonZeroMean { mean: total, tol: tol_mean });
        }

        // Neumann problem: stiffness on all nodes, load on boundary rows = Gram f
        let mut b = ModeArray::zeros(self.k_max, n);
        for k in -km..=km {
            let o = b.idx(k, n - 1);
            b.data[o] = gf[(k + km) as usize];
        }
        // kernel: constants (k = 0, all radial ones)
        let project = |v: &mut ModeArray| {
            self.project_neumann(v);
            let o = v.idx(0, 0);
            let mean: Complex64 = v.data[o..o + n].iter().fold(ZERO, |a, &c| a + c) / n as f64;
            for i in 0..n {
                v.data[o + i] = v.data[o + i] - mean;
            }
        };
        project(&mut b);
        let mut x = ModeArray::zeros(self.k_max, n);
        self.pcg_modes(
            |v, out| self.apply_stiffness(v, out),
            |v, out| self.precondition_neumann(v, out),
            project,
            &b,
            &mut x,
        )?;
        // trace, normalized to surface-mean zero
        let mut g_modes = vec![ZERO; 2 * self.k_max + 1];
        for k in -km..=km {
            g_modes[(k + km) as usize] = x.data[x.idx(k, n - 1)];
        }
        let gg = gram_mul(&self.gram_chol_input(), &g_modes);
        let curve_len = gram_mul(&self.gram_chol_input(), &constant_modes(self.k_max))[(0 + km) as usize].re;
        let mean = gg[(0 + km) as usize].re / curve_len;
        g_modes[(0 + km) as usize] = g_modes[(0 + km) as usize] - Complex64::new(mean, 0.0);
        Ok(self.modes_to_boundary(&g_modes))
    }

    /// Strong normal trace of ∇u on Γ: one-sided quadratic fit in ρ (using
    /// the boundary value when the field carries one) chain-ruled through
    /// the chart, with the θ-derivative taken spectrally on the trace.
    pub fn normal_trace_grad(&self, u: &ScalarField) -> BoundaryFn {
        let nt = self.chart.n_theta;
        let nr = self.chart.n_r;
        let trace = match &u.boundary {
            Some(b) => b.clone(),
            None => u.trace_samples(),
        };
        let trace_series = BoundarySeries::from_samples(&trace, nt / 2 - 1);
        let dtrace = trace_series.derivative();
        let mut out = vec![0.0; nt];
        for j in 0..nt {
            // cubic through (1, g) and the last three interior rings
            let mut pts: Vec<(f64, f64)> = vec![(1.0, trace[j])];
            for m in 0..3 {
                let i = nr - 1 - m;
                pts.push((self.chart.rho[i], u.values[self.chart.idx(i, j)]));
            }
            let du_drho = lagrange_derivative_at(&pts, 1.0);
            let du_dth = dtrace.eval(self.chart.theta[j]);
            let (r, rp) = (self.chart.r_b[j], self.chart.r_b_prime[j]);
            let (s, c) = self.chart.theta[j].sin_cos();
            let j11 = r * c;
            let j12 = rp * c - r * s;
            let j21 = r * s;
            let j22 = rp * s + r * c;
            let det = r * r;
            let gx = (j22 * du_drho - j21 * du_dth) / det;
            let gy = (-j12 * du_drho + j11 * du_dth) / det;
            let nvec = self.chart.b_normal[j];
            out[j] = nvec[0] * gx + nvec[1] * gy;
        }
        BoundarySeries::from_samples(&out, nt / 2 - 1)
    }

    /// Consistent L²(Γ) pairing ⟨f, g⟩ via the boundary Gram matrix.
    pub fn boundary_inner(&self, f: &BoundaryFn, g: &BoundaryFn) -> f64 {
        let fm = self.boundary_to_modes(f);
        let gm = self.boundary_to_modes(g);
        let mg = gram_mul(&self.gram_chol_input(), &gm);
        fm.iter().zip(&mg).map(|(a, b)| (a.conj() * *b).re).sum()
    }

    pub fn boundary_norm(&self, f: &BoundaryFn) -> f64 {
        self.boundary_inner(f, f).max(0.0).sqrt()
    }

    /// Dirichlet energy a(u,u) = ∫|∇u|² of a field (boundary ring used).
    pub fn dirichlet_energy(&self, u: &ScalarField) -> f64 {
        let modes = self.field_to_modes(u);
        let mut a = ModeArray::zeros(self.k_max, self.n_rad());
        self.apply_stiffness(&modes, &mut a);
        modes
            .data
            .iter()
            .zip(&a.data)
            .map(|(x, y)| (x.conj() * *y).re)
            .sum()
    }

    /// Hermitian symmetry defect of the operator on random data (diagnostic).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n_rad();
        let mut rng = 0x12345678u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut x = ModeArray::zeros(self.k_max, n);
        let mut y = ModeArray::zeros(self.k_max, n);
        for v in x.data.iter_mut() {
            *v = Complex64::new(next(), next());
        }
        for v in y.data.iter_mut() {
            *v = Complex64::new(next(), next());
        }
        let mut ax = ModeArray::zeros(self.k_max, n);
        let mut ay = ModeArray::zeros(self.k_max, n);
        self.apply_stiffness(&x, &mut ax);
        self.apply_stiffness(&y, &mut ay);
        let yax: Complex64 = y
            .data
            .iter()
            .zip(&ax.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * *b);
        let axy: Complex64 = x
            .data
            .iter()
            .zip(&ay.data)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * *b);
        (yax - axy.conj()).norm()
            / (x.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
                * y.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Positive definiteness probe of the coefficient matrices.
    pub fn coefficients_spd(&self) -> bool {
        let chart = &self.chart;
        chart.pos.iter().enumerate().all(|(idx, _)| {
            let i = idx / chart.n_theta;
            let j = idx % chart.n_theta;
            let q = chart.r_b_prime[j] / chart.r_b[j];
            let rho = chart.rho[i];
            let g11 = rho * (1.0 + q * q);
            let g22 = 1.0 / rho;
            let det = g11 * g22 - q * q;
            det > 0.0 && g11 + g22 > 0.0
        })
    }

    fn gram_chol_input(&self) -> &[Vec<Complex64>] {
        &self.gram_chol
    }
}

/// Constant function 1 in mode coordinates.
fn constant_modes(k_max: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; 2 * k_max + 1];
    v[k_max] = Complex64::new(1.0, 0.0);
    v
}

// banded real-matrix times complex-vector helpers

fn band2_axpy(m: &Band2, w: f64, x: &[Complex64], y: &mut [Complex64]) {
    let n = m.n;
    for i in 0..n {
        let mut acc = m.d0[i] * x[i];
        if i >= 1 {
            acc += m.d1[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += m.d1[i] * x[i + 1];
        }
        if i >= 2 {
            acc += m.d2[i - 2] * x[i - 2];
        }
        if i + 2 < n {
            acc += m.d2[i] * x[i + 2];
        }
        y[i] += acc * w;
    }
}

fn band2_axpy_c(m: &Band2, w: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    let n = m.n;
    for i in 0..n {
        let mut acc = m.d0[i] * x[i];
        if i >= 1 {
            acc += m.d1[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc += m.d1[i] * x[i + 1];
        }
        if i >= 2 {
            acc += m.d2[i - 2] * x[i - 2];
        }
        if i + 2 < n {
            acc += m.d2[i] * x[i + 2];
        }
        y[i] += w * acc;
    }
}

/// y += w · P x (P banded non-symmetric)
fn band2nonsym_axpy(m: &Band2NonSym, w: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    let n = m.n;
    for i in 0..n {
        let mut acc = ZERO;
        for off in -2i64..=2 {
            let j = i as i64 + off;
            if j < 0 || j >= n as i64 {
                continue;
            }
            acc += m.rows[i][(off + 2) as usize] * x[j as usize];
        }
        y[i] += w * acc;
    }
}

/// y += w · Pᵀ x
fn band2nonsym_axpy_t(m: &Band2NonSym, w: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    let n = m.n;
    for j in 0..n {
        let xv = x[j];
        if xv.norm_sqr() == 0.0 {
            continue;
        }
        for off in -2i64..=2 {
            let i = j as i64 + off;
            if i < 0 || i >= n as i64 {
                continue;
            }
            // entry P[j][i-offset...] : P[j, i] lives in rows[j]
            y[i as usize] += w * (m.rows[j][(i - j as i64 + 2) as usize] * xv);
        }
    }
}

/// Dense complex Cholesky (Hermitian positive definite), returning L.
fn cholesky_complex(a: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut l = vec![vec![ZERO; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum = sum - l[i][k] * l[j][k].conj();
            }
            if i == j {
                l[i][j] = Complex64::new(sum.re.max(1e-300).sqrt(), 0.0);
            } else {
                l[i][j] = sum / l[j][j].re;
            }
        }
    }
    l
}

fn cholesky_solve(l: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let n = l.len();
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum = sum - l[i][k] * y[k];
        }
        y[i] = sum / l[i][i].re;
    }
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum = sum - l[k][i].conj() * y[k];
        }
        y[i] = sum / l[i][i].re;
    }
    y
}

/// Multiply by the Gram matrix reconstructed from its Cholesky factor.
fn gram_mul(l: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    // Gram = L Lᴴ
    let n = l.len();
    let mut t = vec![ZERO; n];
    for i in 0..n {
        let mut acc = ZERO;
        for k in i..n {
            acc += l[k][i].conj() * x[k];
        }
        t[i] = acc;
    }
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let mut acc = ZERO;
        for k in 0..=i {
            acc += l[i][k] * t[k];
        }
        y[i] = acc;
    }
    y
}

/// Cubic Lagrange interpolation of per-ring complex spectra along ρ.
fn interp_complex(
    rho_rings: &[f64],
    ring_modes: &[Vec<Complex64>],
    spec_idx: usize,
    r: f64,
) -> Complex64 {
    let n = rho_rings.len();
    // stencil of 4 rings around r
    let mut i0 = 0usize;
    while i0 + 1 < n && rho_rings[i0 + 1] < r {
        i0 += 1;
    }
    let start = i0.saturating_sub(1).min(n - 4);
    let mut acc = ZERO;
    for m in 0..4 {
        let mut w = 1.0;
        for p in 0..4 {
            if p != m {
                w *= (r - rho_rings[start + p]) / (rho_rings[start + m] - rho_rings[start + p]);
            }
        }
        acc += ring_modes[start + m][spec_idx] * w;
    }
    acc
}

fn lagrange_derivative_at(pts: &[(f64, f64)], x: f64) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for m in 0..n {
        let mut denom = 1.0;
        for p in 0..n {
            if p != m {
                denom *= pts[m].0 - pts[p].0;
            }
        }
        let mut dsum = 0.0;
        for q in 0..n {
            if q == m {
                continue;
            }
            let mut prod = 1.0;
            for p in 0..n {
                if p != m && p != q {
                    prod *= x - pts[p].0;
                }
            }
            dsum += prod;
        }
        acc += pts[m].1 * dsum / denom;
    }
    acc
}
