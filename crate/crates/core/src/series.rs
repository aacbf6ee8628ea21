//! Real periodic functions on the reference circle, stored as truncated
//! Fourier series with Hermitian symmetry.

use crate::complex::Complex64;
use std::f64::consts::PI;

/// Truncated Fourier series of a real 2π-periodic function.
///
/// Coefficients are stored for modes k = -M..=M in a single vector with
/// index m <-> k = m - M. Hermitian symmetry c(-k) = conj(c(k)) is enforced
/// on construction, so evaluations are real.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySeries {
    coeffs: Vec<Complex64>,
    cutoff: usize,
}

impl BoundarySeries {
    pub fn zero(cutoff: usize) -> Self {
        BoundarySeries { coeffs: vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1], cutoff }
    }

    pub fn constant(c: f64, cutoff: usize) -> Self {
        let mut s = Self::zero(cutoff);
        s.coeffs[cutoff] = Complex64::new(c, 0.0);
        s
    }

    /// cos(kθ) scaled by `amp`.
    pub fn cosine(amp: f64, k: usize, cutoff: usize) -> Self {
        let mut s = Self::zero(cutoff.max(k));
        if k == 0 {
            s.coeffs[s.cutoff] = Complex64::new(amp, 0.0);
        } else {
            s.coeffs[s.cutoff + k] = Complex64::new(amp / 2.0, 0.0);
            s.coeffs[s.cutoff - k] = Complex64::new(amp / 2.0, 0.0);
        }
        s
    }

    /// sin(kθ) scaled by `amp`.
    pub fn sine(amp: f64, k: usize, cutoff: usize) -> Self {
        let mut s = Self::zero(cutoff.max(k));
        if k > 0 {
            s.coeffs[s.cutoff + k] = Complex64::new(0.0, -amp / 2.0);
            s.coeffs[s.cutoff - k] = Complex64::new(0.0, amp / 2.0);
        }
        s
    }

    /// Build from raw coefficients (k = -M..=M). Hermitian symmetry is
    /// enforced by averaging c(k) with conj(c(-k)).
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficient vector must have odd length");
        let cutoff = coeffs.len() / 2;
        let mut out = coeffs.clone();
        for k in 0..=cutoff {
            let a = coeffs[cutoff + k];
            let b = coeffs[cutoff - k].conj();
            let avg = 0.5 * (a + b);
            out[cutoff + k] = avg;
            out[cutoff - k] = avg.conj();
        }
        out[cutoff] = Complex64::new(out[cutoff].re, 0.0);
        BoundarySeries { coeffs: out, cutoff }
    }

    /// Collocation on a uniform θ-grid of n points: c_k = (1/n) Σ_j f_j e^{-ikθ_j}.
    /// Modes above `cutoff` are discarded; `cutoff` must stay below n/2.
    pub fn from_samples(values: &[f64], cutoff: usize) -> Self {
        let n = values.len();
        assert!(2 * cutoff < n, "cutoff {cutoff} too large for {n} samples");
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1];
        let spec = dft_forward(values);
        for k in 0..=cutoff {
            let c = spec[k] / n as f64;
            coeffs[cutoff + k] = c;
            coeffs[cutoff - k] = c.conj();
        }
        coeffs[cutoff] = Complex64::new(coeffs[cutoff].re, 0.0);
        BoundarySeries { coeffs, cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of mode k (0 for |k| > cutoff).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let m = k + self.cutoff as i64;
        if m < 0 || m >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[m as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.coeffs[self.cutoff].re;
        let (sin1, cos1) = theta.sin_cos();
        // recurrence for cos(kθ), sin(kθ)
        let (mut ck, mut sk) = (cos1, sin1);
        for k in 1..=self.cutoff {
            let c = self.coeffs[self.cutoff + k];
            acc += 2.0 * (c.re * ck - c.im * sk);
            let (cn, sn) = (ck * cos1 - sk * sin1, sk * cos1 + ck * sin1);
            ck = cn;
            sk = sn;
        }
        acc
    }

    /// Evaluate on the uniform n-point grid θ_j = 2πj/n.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.eval(2.0 * PI * j as f64 / n as f64)).collect()
    }

    /// d/dθ (multiplier ik).
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        for (m, c) in out.coeffs.iter_mut().enumerate() {
            let k = m as f64 - self.cutoff as f64;
            *c = Complex64::new(0.0, k) * *c;
        }
        out
    }

    /// Heat semigroup multiplier e^{-δ²k²}.
    pub fn heat_multiplier(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for (m, c) in out.coeffs.iter_mut().enumerate() {
            let k = m as f64 - self.cutoff as f64;
            *c *= (-delta * delta * k * k).exp();
        }
        out
    }

    /// Exact Sobolev norm on the circle: (Σ_k (1+k²)^s |c_k|² 2π)^{1/2}.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            let k = m as f64 - self.cutoff as f64;
            acc += (1.0 + k * k).powf(s) * c.norm_sqr();
        }
        (acc * 2.0 * PI).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[self.cutoff].re
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= a;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let cutoff = self.cutoff.max(other.cutoff);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1];
        for (m, c) in coeffs.iter_mut().enumerate() {
            let k = m as i64 - cutoff as i64;
            *c = self.coeff(k) + other.coeff(k);
        }
        BoundarySeries { coeffs, cutoff }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn shift_mean(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[self.cutoff] += Complex64::new(delta, 0.0);
        out
    }

    /// Max of |f| on a fine grid (4x oversampled, at least 256 points).
    pub fn sup_norm(&self, n_min: usize) -> f64 {
        let n = (4 * (2 * self.cutoff + 1)).max(n_min).max(256);
        (0..n)
            .map(|j| self.eval(2.0 * PI * j as f64 / n as f64).abs())
            .fold(0.0_f64, f64::max)
    }

    /// Hermitian symmetry defect: max |c(-k) - conj(c(k))|.
    pub fn hermitian_defect(&self) -> f64 {
        (0..=self.cutoff)
            .map(|k| (self.coeffs[self.cutoff - k] - self.coeffs[self.cutoff + k].conj()).norm())
            .fold(0.0_f64, f64::max)
    }
}

/// Forward DFT: X_k = Σ_j x_j e^{-2πi jk/n}. Radix-2 FFT when n is a power
/// of two, direct summation otherwise (grids here are small).
pub fn dft_forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if n.is_power_of_two() && n > 1 {
        fft_in_place(&mut buf, false);
        buf
    } else {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in buf.iter().enumerate() {
                let ang = -2.0 * PI * (j * k % n) as f64 / n as f64;
                acc += *x * Complex64::new(ang.cos(), ang.sin());
            }
            *o = acc;
        }
        out
    }
}

/// Inverse DFT (unscaled by 1/n handled by caller conventions): x_j = Σ_k X_k e^{+2πi jk/n}.
pub fn dft_inverse(spec: &[Complex64]) -> Vec<Complex64> {
    let n = spec.len();
    let mut buf = spec.to_vec();
    if n.is_power_of_two() && n > 1 {
        fft_in_place(&mut buf, true);
        buf
    } else {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, x) in buf.iter().enumerate() {
                let ang = 2.0 * PI * (j * k % n) as f64 / n as f64;
                acc += *x * Complex64::new(ang.cos(), ang.sin());
            }
            *o = acc;
        }
        out
    }
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}
