//! The regularization pipeline: moment-preserving mollification in chart
//! coordinates with an inward shift, divergence/tangency-corrected variants,
//! frequency splitting, and the fourth-order field-line regularizer
//! L_X = Id + ε²∇_X⁴ built on an exactly skew-symmetrized transport stencil.

use crate::elliptic::EllipticWorkspace;
use crate::error::{Error, Result};
use crate::field::{
    chart_derivatives, div_free_projection, sample_chart, ScalarField, VectorField,
};
use crate::linalg::pcg;
pub use crate::state::{rotational_project, tangency_correct};
use crate::surface::DomainChart;
use std::f64::consts::PI;
use std::sync::Arc;

/// Compactly supported even bump with vanishing moments 1..=3, built as a
/// two-dilate combination of g(z) = (1−z²)³ on [−1, 1]:
///   φ(z) = α g(z) + (β/2) g(z/2),  α m₀ + β m₀ = 1,  α m₂ + 4 β m₂ = 0.
/// Odd moments vanish by symmetry; support is [−2, 2].
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    pub moment_order: usize,
    alpha: f64,
    beta: f64,
}

impl MollifierKernel {
    pub fn standard() -> Self {
        // m0 = ∫(1−z²)³ = 32/35; the dilate ratios fix α, β independent of m2
        let m0 = 32.0 / 35.0;
        let alpha = 4.0 / (3.0 * m0);
        let beta = -1.0 / (3.0 * m0);
        MollifierKernel { moment_order: 3, alpha, beta }
    }

    /// Kernel value at unit scale (support |z| ≤ 2).
    pub fn eval(&self, z: f64) -> f64 {
        let g = |t: f64| {
            let t2 = t * t;
            if t2 >= 1.0 {
                0.0
            } else {
                (1.0 - t2).powi(3)
            }
        };
        self.alpha * g(z) + 0.5 * self.beta * g(0.5 * z)
    }

    /// Quadrature check of ∫K and the first `moment_order` moments.
    pub fn moment_defects(&self) -> (f64, Vec<f64>) {
        let n = 4000;
        let h = 4.0 / n as f64;
        let mut mass = 0.0;
        let mut moments = vec![0.0; self.moment_order];
        for i in 0..n {
            let z = -2.0 + (i as f64 + 0.5) * h;
            let k = self.eval(z);
            mass += k * h;
            let mut zp = z;
            for m in moments.iter_mut() {
                *m += k * zp * h;
                zp *= z;
            }
        }
        (mass - 1.0, moments)
    }

    /// Discrete convolution weights at grid spacing `dx` and kernel scale
    /// `s`, renormalized to unit mass so constants reproduce exactly.
    fn weights(&self, dx: f64, s: f64) -> Vec<f64> {
        let reach = (2.0 * s / dx).ceil() as i64;
        let mut w: Vec<f64> = (-reach..=reach)
            .map(|m| self.eval(m as f64 * dx / s) * dx / s)
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        w
    }
}

/// Mollify a scalar field at spatial scale `s`: pull the samples inward by
/// the shift factor (1 − C·s) in ρ, then convolve separably with the bump
/// in ρ and in arc-length-scaled θ. The shift constant C = 2.2 covers the
/// kernel support plus margin so every sample stays interior.
pub fn mollify(
    u: &ScalarField,
    s: f64,
    kernel: &MollifierKernel,
    chart: &Arc<DomainChart>,
) -> Result<ScalarField> {
    if s == 0.0 {
        return Ok(u.clone());
    }
    let shift_c = 2.2;
    let margin = 0.5 * (1.0 - chart.surface.sup_eta / chart.surface.collar_delta);
    if shift_c * s > 0.5 * margin.max(0.1) {
        return Err(Error::ScaleTooCoarse { scale: s, margin });
    }
    let (nr, nt) = (chart.n_r, chart.n_theta);
    let shrink = 1.0 - shift_c * s;

    // step 1: radial shift + radial convolution per θ column, sampling the
    // original chart at ρ' = (ρ + offset)·shrink; ρ' < 0 wraps through the
    // origin to the antipodal column at the physically matching radius.
    let kr = kernel.weights(chart.h_r, s);
    let reach_r = (kr.len() - 1) / 2;
    let mut stage1 = vec![0.0; nr * nt];
    for j in 0..nt {
        let th = chart.theta[j];
        let th_opp = (th + PI).rem_euclid(2.0 * PI);
        let r_here = chart.surface.radius(th);
        let r_opp = chart.surface.radius(th_opp);
        for i in 0..nr {
            let mut acc = 0.0;
            for (m, wm) in kr.iter().enumerate() {
                let off = m as i64 - reach_r as i64;
                let rho_sample = (chart.rho[i] + off as f64 * chart.h_r) * shrink;
                let v = if rho_sample >= 0.0 {
                    sample_chart(chart, &u.values, rho_sample, th, true)
                } else {
                    // physical point on the opposite ray
                    let rho_opp = -rho_sample * r_here / r_opp;
                    sample_chart(chart, &u.values, rho_opp, th_opp, true)
                };
                acc += wm * v;
            }
            stage1[i * nt + j] = acc;
        }
    }

    // step 2: θ convolution at arc-length scale s per ring (angular scale
    // s / (ρ R̄)); the innermost rings clamp the angular reach to the grid.
    let r_mean = 1.0 + chart.surface.eta.mean();
    let mut out = vec![0.0; nr * nt];
    for i in 0..nr {
        let arc = (chart.rho[i] * r_mean).max(chart.h_r);
        let s_theta = s / arc;
        let kt = kernel.weights(chart.h_theta, s_theta.min(PI / 2.2));
        let reach_t = (kt.len() - 1) / 2;
        for j in 0..nt {
            let mut acc = 0.0;
            for (m, wm) in kt.iter().enumerate() {
                let off = m as i64 - reach_t as i64;
                let jj = (j as i64 + off).rem_euclid(nt as i64) as usize;
                acc += wm * stage1[i * nt + jj];
            }
            out[i * nt + j] = acc;
        }
    }
    Ok(ScalarField { chart: chart.clone(), values: out, boundary: None })
}

pub fn mollify_vector(
    v: &VectorField,
    s: f64,
    kernel: &MollifierKernel,
    chart: &Arc<DomainChart>,
) -> Result<VectorField> {
    let fx = mollify(&v.x_component(), s, kernel, chart)?;
    let fy = mollify(&v.y_component(), s, kernel, chart)?;
    Ok(VectorField {
        chart: chart.clone(),
        vx: fx.values,
        vy: fy.values,
        boundary: None,
        div_residual: None,
    })
}

/// Mollification followed by the divergence-free projection.
pub fn divfree_mollify(
    v: &VectorField,
    s: f64,
    kernel: &MollifierKernel,
    ws: &EllipticWorkspace,
    tol_div: f64,
) -> Result<VectorField> {
    let smoothed = mollify_vector(v, s, kernel, &ws.chart)?;
    div_free_projection(&smoothed, ws, tol_div, 5)
}

/// Exact additive low/high frequency split at scale `s`.
pub fn frequency_split(
    u: &VectorField,
    s: f64,
    kernel: &MollifierKernel,
    ws: &EllipticWorkspace,
) -> Result<(VectorField, VectorField)> {
    let low = mollify_vector(u, s, kernel, &ws.chart)?;
    let high = u.sub(&low);
    Ok((low, high))
}

/// Discrete skew transport operator S ≈ X·∇ for divergence-free X:
/// S := ½(D − D*) where D is the chain-ruled advection stencil and the
/// adjoint is taken in the area-weighted inner product, so skewness is an
/// algebraic identity independent of discretization error.
pub struct LxSystem {
    pub chart: Arc<DomainChart>,
    pub epsilon: f64,
    x_field: VectorField,
    /// area weights (the inner product metric)
    w: Vec<f64>,
}

impl LxSystem {
    pub fn new(x_field: VectorField, epsilon: f64) -> Self {
        let chart = x_field.chart.clone();
        let w = chart.area_weight.clone();
        LxSystem { chart, epsilon, x_field, w }
    }

    /// Plain advection D u = X·∇u (chain-ruled stencils).
    fn advect(&self, u: &[f64]) -> Vec<f64> {
        let chart = &self.chart;
        let (du_r, du_t) = chart_derivatives(chart, u, None);
        let n = chart.n_nodes();
        let mut out = vec![0.0; n];
        for idx in 0..n {
            let it = &chart.inv_jac_t[idx];
            let gx = it[0][0] * du_r[idx] + it[0][1] * du_t[idx];
            let gy = it[1][0] * du_r[idx] + it[1][1] * du_t[idx];
            out[idx] = self.x_field.vx[idx] * gx + self.x_field.vy[idx] * gy;
        }
        out
    }

    /// Adjoint of `advect` in the weighted inner product: D* = W⁻¹ Dᵀ W.
    fn advect_adjoint(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        // Dᵀ(W u) via reverse accumulation of the forward stencils would
        // need the assembled matrix; instead apply the identity
        // ⟨D v, u⟩_W = ⟨v, D* u⟩_W with D* computed column-wise through the
        // same stencil structure. The advection stencil is a linear
        // combination of shifts, so its transpose is assembled once.
        self.apply_transpose(u, n)
    }

    fn apply_transpose(&self, u: &[f64], n: usize) -> Vec<f64> {
        // y = W⁻¹ Dᵀ (W u): accumulate contributions of each forward-stencil
        // coefficient to its source node.
        let chart = &self.chart;
        let (nr, nt) = (chart.n_r, chart.n_theta);
        let h = chart.h_r;
        let mut y = vec![0.0; n];
        // radial part: coefficients of ∂ρ stencils as used in chart_derivatives
        // (one-sided at the first and last rings, centered elsewhere), and
        // spectral θ-derivative handled via its exact skewness on rings.
        for i in 0..nr {
            for j in 0..nt {
                let idx = i * nt + j;
                let it = &chart.inv_jac_t[idx];
                let cx = self.x_field.vx[idx];
                let cy = self.x_field.vy[idx];
                // weight of ∂ρ u in D at this node
                let a_r = cx * it[0][0] + cy * it[1][0];
                let wu = self.w[idx] * u[idx] * a_r;
                if i == 0 {
                    y[idx] += -3.0 / (2.0 * h) * wu;
                    y[nt + j] += 4.0 / (2.0 * h) * wu;
                    y[2 * nt + j] += -1.0 / (2.0 * h) * wu;
                } else if i == nr - 1 {
                    y[idx] += 3.0 / (2.0 * h) * wu;
                    y[(nr - 2) * nt + j] += -4.0 / (2.0 * h) * wu;
                    y[(nr - 3) * nt + j] += 1.0 / (2.0 * h) * wu;
                } else {
                    y[(i + 1) * nt + j] += wu / (2.0 * h);
                    y[(i - 1) * nt + j] += -wu / (2.0 * h);
                }
            }
        }
        // θ part: per ring, Dθᵀ = −Dθ for the spectral derivative on the
        // uniform periodic grid (exactly antisymmetric), so
        // Dᵀ-contribution = −Dθ applied to the weighted coefficients.
        for i in 0..nr {
            let row: Vec<f64> = (0..nt)
                .map(|j| {
                    let idx = i * nt + j;
                    let it = &chart.inv_jac_t[idx];
                    let a_t = self.x_field.vx[idx] * it[0][1] + self.x_field.vy[idx] * it[1][1];
                    self.w[idx] * u[idx] * a_t
                })
                .collect();
            let drow = crate::field::spectral_theta_derivative(&row);
            for j in 0..nt {
                y[i * nt + j] -= drow[j];
            }
        }
        for idx in 0..n {
            y[idx] /= self.w[idx];
        }
        y
    }

    /// S u = ½(D − D*) u: skew-symmetric in ⟨·,·⟩_W by construction.
    pub fn skew_apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.advect(u);
        let dt = self.advect_adjoint(u);
        d.iter().zip(&dt).map(|(a, b)| 0.5 * (a - b)).collect()
    }

    fn l_apply(&self, u: &[f64]) -> Vec<f64> {
        let e2 = self.epsilon * self.epsilon;
        let s1 = self.skew_apply(u);
        let s2 = self.skew_apply(&s1);
        let s3 = self.skew_apply(&s2);
        let s4 = self.skew_apply(&s3);
        u.iter().zip(&s4).map(|(a, b)| a + e2 * b).collect()
    }

    /// Solve (I + ε²S⁴) uε = u by CG in the weighted inner product.
    pub fn solve(&self, u: &ScalarField, tol: f64, max_iter: usize) -> Result<ScalarField> {
        if self.epsilon == 0.0 {
            return Ok(u.clone());
        }
        let mut x = vec![0.0; u.values.len()];
        pcg(
            |v, out| out.copy_from_slice(&self.l_apply(v)),
            |v, out| out.copy_from_slice(v),
            None::<fn(&mut [f64])>,
            &u.values,
            &mut x,
            Some(&self.w),
            tol,
            max_iter,
        )?;
        Ok(ScalarField { chart: self.chart.clone(), values: x, boundary: None })
    }

    pub fn solve_vector(&self, u: &VectorField, tol: f64, max_iter: usize) -> Result<VectorField> {
        let fx = self.solve(&u.x_component(), tol, max_iter)?;
        let fy = self.solve(&u.y_component(), tol, max_iter)?;
        Ok(VectorField {
            chart: self.chart.clone(),
            vx: fx.values,
            vy: fy.values,
            boundary: None,
            div_residual: None,
        })
    }

    /// Residual of the discrete energy identity
    /// ‖u‖² − ‖uε‖² − 2ε²‖S²uε‖² − ε⁴‖S⁴uε‖², exact for the skew S up to
    /// the solver residual.
    pub fn energy_identity_residual(&self, u: &ScalarField, u_eps: &ScalarField) -> f64 {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).zip(&self.w).map(|((x, y), w)| x * y * w).sum()
        };
        let e2 = self.epsilon * self.epsilon;
        let s1 = self.skew_apply(&u_eps.values);
        let s2 = self.skew_apply(&s1);
        let s3 = self.skew_apply(&s2);
        let s4 = self.skew_apply(&s3);
        dot(&u.values, &u.values)
            - dot(&u_eps.values, &u_eps.values)
            - 2.0 * e2 * dot(&s2, &s2)
            - e2 * e2 * dot(&s4, &s4)
    }

    /// Skewness defect ⟨Su, v⟩_W + ⟨u, Sv⟩_W on given probes.
    pub fn skewness_defect(&self, u: &[f64], v: &[f64]) -> f64 {
        let dot = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).zip(&self.w).map(|((x, y), w)| x * y * w).sum()
        };
        let su = self.skew_apply(u);
        let sv = self.skew_apply(v);
        dot(&su, v) + dot(u, &sv)
    }
}

/// Field-line regularization of (v, B): split at scale `split_scale`,
/// solve the fixed point L_{Yε} X̃ = B_high with Yε = (B_low + X̃)^rot, then
/// regularize v's high band along the converged field and re-project.
#[allow(clippy::too_many_arguments)]
pub fn regularize_along_b(
    v: &VectorField,
    b: &VectorField,
    epsilon: f64,
    split_scale: f64,
    kernel: &MollifierKernel,
    ws: &EllipticWorkspace,
    tol_div: f64,
    tol_tan: f64,
    tol_fp: f64,
    max_fp_iters: usize,
) -> Result<(VectorField, VectorField)> {
    if epsilon == 0.0 {
        return Ok((v.clone(), b.clone()));
    }
    let (b_low, b_high) = frequency_split(b, split_scale, kernel, ws)?;
    let (v_low, v_high) = frequency_split(v, split_scale, kernel, ws)?;

    // fixed point for the regularized magnetic field
    let mut y = rotational_project(&b_low.add(&b_high), ws, tol_div, tol_tan)?;
    let mut last_delta = f64::MAX;
    let mut grew = 0usize;
    for _ in 0..max_fp_iters {
        let sys = LxSystem::new(y.clone(), epsilon);
        let x_tilde = sys.solve_vector(&b_high, ws.tol, ws.max_iter)?;
        let y_next = rotational_project(&b_low.add(&x_tilde), ws, tol_div, tol_tan)?;
        let delta = y_next.sub(&y).l2();
        y = y_next;
        if delta <= tol_fp * (1.0 + b.l2()) {
            break;
        }
        if delta > last_delta {
            grew += 1;
            if grew >= 3 {
                return Err(Error::FixedPointDiverged { iterations: max_fp_iters, last_delta: delta });
            }
        } else {
            grew = 0;
        }
        last_delta = delta;
    }
    let b_reg = y;

    let sys = LxSystem::new(b_reg.clone(), epsilon);
    let v_high_reg = sys.solve_vector(&v_high, ws.tol, ws.max_iter)?;
    let v_reg = div_free_projection(&v_low.add(&v_high_reg), ws, tol_div, 5)?;
    Ok((v_reg, b_reg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::BoundarySeries;
    use crate::surface::build_surface;

    fn disk(n: usize) -> Arc<DomainChart> {
        let s = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
        Arc::new(DomainChart::build(s, n, n))
    }

    fn disk_ws(n: usize) -> EllipticWorkspace {
        EllipticWorkspace::new(disk(n), 1e-10, 2000)
    }

    #[test]
    fn kernel_moments_vanish() {
        let k = MollifierKernel::standard();
        let (mass, moments) = k.moment_defects();
        assert!(mass.abs() < 1e-12, "mass defect {mass:.3e}");
        for (i, m) in moments.iter().enumerate() {
            assert!(m.abs() < 1e-10, "moment {} = {m:.3e}", i + 1);
        }
    }

    #[test]
    fn mollify_reproduces_constants_and_radial_cubics() {
        let chart = disk(48);
        let kernel = MollifierKernel::standard();
        let c = ScalarField::from_fn(chart.clone(), |_, _| 3.5);
        let mc = mollify(&c, 0.02, &kernel, &chart).unwrap();
        assert!(mc.values.iter().all(|v| (v - 3.5).abs() < 1e-12));
        // radial cubic: the shift relocates samples, so compare against the
        // shifted profile; with vanishing moments the convolution of a cubic
        // is exact up to the interpolation error of the resampling.
        let lin = ScalarField::from_fn(chart.clone(), |x, y| (x * x + y * y).sqrt());
        let s = 0.02;
        let ml = mollify(&lin, s, &kernel, &chart).unwrap();
        let shrink = 1.0 - 2.2 * s;
        let mut worst = 0.0_f64;
        for (idx, p) in chart.pos.iter().enumerate() {
            let i = idx / chart.n_theta;
            if i >= chart.n_r - 2 || i < 2 {
                continue;
            }
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            worst = worst.max((ml.values[idx] - r * shrink).abs());
        }
        assert!(worst < 1e-10, "radial linear reproduction {worst:.3e}");
    }

    #[test]
    fn kernel_damps_grid_oscillation() {
        // 1-D symbol of the discrete kernel at 8-cell scale, evaluated on
        // the alternating (grid Nyquist) mode
        let kernel = MollifierKernel::standard();
        let dx = 1.0;
        let w = kernel.weights(dx, 8.0 * dx);
        let reach = (w.len() - 1) / 2;
        let nyquist: f64 = w
            .iter()
            .enumerate()
            .map(|(m, wm)| wm * if (m as i64 - reach as i64) % 2 == 0 { 1.0 } else { -1.0 })
            .sum();
        assert!(nyquist.abs() <= 1e-2, "Nyquist symbol {nyquist:.3e}");
    }

    #[test]
    fn mollify_damps_radial_oscillation() {
        // radial grid-scale oscillation through the 2-D machinery
        let chart = disk(256);
        let kernel = MollifierKernel::standard();
        let nr = chart.n_r;
        let h = chart.h_r;
        let osc = ScalarField::from_fn(chart.clone(), move |x, y| {
            let r = (x * x + y * y).sqrt();
            (std::f64::consts::PI * r / h).sin()
        });
        let s = 8.0 * h;
        let m = mollify(&osc, s, &kernel, &chart).unwrap();
        let nt = chart.n_theta;
        let mut before = 0.0_f64;
        let mut after = 0.0_f64;
        for i in nr / 4..3 * nr / 4 {
            for j in 0..nt {
                before = before.max(osc.values[i * nt + j].abs());
                after = after.max(m.values[i * nt + j].abs());
            }
        }
        assert!(after < before / 100.0, "damping {before} -> {after}");
    }

    #[test]
    fn mollifier_operator_norm_near_one() {
        let chart = disk(64);
        let kernel = MollifierKernel::standard();
        let mut rng = crate::oracle::SplitMix64::new(11);
        for _ in 0..3 {
            let f = rng.vector_field(&chart, 1.0);
            let m = mollify_vector(&f, 4.0 * chart.h_r, &kernel, &chart).unwrap();
            assert!(m.l2() <= 1.01 * f.l2(), "{} vs {}", m.l2(), f.l2());
        }
    }

    #[test]
    fn mollify_error_decay_with_scale() {
        // ‖(I − Φ_s)u‖ ≲ s^α ‖u‖_{H^α} trend for α = 1, 2
        let chart = disk(64);
        let kernel = MollifierKernel::standard();
        let u = ScalarField::from_fn(chart.clone(), |x, y| (3.0 * x).sin() * (2.0 * y).cos());
        let mut errs = Vec::new();
        for s in [0.05, 0.025, 0.0125] {
            let m = mollify(&u, s, &kernel, &chart).unwrap();
            let d = m.sub(&u);
            errs.push(d.l2());
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 0.8 && order2 >= 0.8, "orders {order1:.2} {order2:.2} ({errs:?})");
    }

    #[test]
    fn divfree_mollify_contract() {
        let ws = disk_ws(64);
        let v = VectorField::from_fn(ws.chart.clone(), |x, y| [-y, x]);
        let kernel = MollifierKernel::standard();
        let out = divfree_mollify(&v, 4.0 * ws.chart.h_r, &kernel, &ws, 1e-9).unwrap();
        assert!(out.divergence().l2() <= 1e-8);
        // constants unchanged (periodic + unit mass)
        let c = VectorField::from_fn(ws.chart.clone(), |_, _| [0.7, -0.2]);
        let mc = mollify_vector(&c, 4.0 * ws.chart.h_r, &kernel, &ws.chart).unwrap();
        assert!(mc.sub(&c).max_abs() < 1e-12);
    }

    #[test]
    fn frequency_split_is_exact_partition() {
        let ws = disk_ws(64);
        let kernel = MollifierKernel::standard();
        let mut rng = crate::oracle::SplitMix64::new(5);
        let u = rng.vector_field(&ws.chart, 1.0);
        let (low, high) = frequency_split(&u, 4.0 * ws.chart.h_r, &kernel, &ws).unwrap();
        let recon = low.add(&high);
        assert!(recon.sub(&u).max_abs() < 1e-13);
        // constants split as (c, 0)
        let c = VectorField::from_fn(ws.chart.clone(), |_, _| [1.0, 2.0]);
        let (cl, ch) = frequency_split(&c, 4.0 * ws.chart.h_r, &kernel, &ws).unwrap();
        assert!(ch.max_abs() < 1e-12 && cl.sub(&c).max_abs() < 1e-12);
    }

    #[test]
    fn skew_operator_is_skew() {
        let chart = disk(32);
        let x_field = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let sys = LxSystem::new(x_field, 0.1);
        let mut rng = crate::oracle::SplitMix64::new(3);
        let u = rng.scalar_field(&chart, 1.0);
        let v = rng.scalar_field(&chart, 1.0);
        let defect = sys.skewness_defect(&u.values, &v.values);
        let scale = u.l2() * v.l2();
        assert!(defect.abs() / scale < 1e-13, "skewness {defect:.3e}");
    }

    #[test]
    fn lx_solve_fixes_radial_profiles() {
        // X = rotation, u radial → ∇_X u = 0 → uε = u
        let chart = disk(32);
        let x_field = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let sys = LxSystem::new(x_field, 0.2);
        let u = ScalarField::from_fn(chart.clone(), |x, y| (x * x + y * y) * 0.5 + 1.0);
        let ue = sys.solve(&u, 1e-11, 4000).unwrap();
        assert!(ue.sub(&u).max_abs() < 1e-7, "{}", ue.sub(&u).max_abs());
    }

    #[test]
    fn lx_identity_at_zero_epsilon() {
        let chart = disk(16);
        let x_field = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let sys = LxSystem::new(x_field, 0.0);
        let u = ScalarField::from_fn(chart, |x, _| x);
        let ue = sys.solve(&u, 1e-11, 100).unwrap();
        assert!(ue.sub(&u).max_abs() == 0.0);
    }

    #[test]
    fn lx_energy_identity() {
        let chart = disk(24);
        let x_field = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let sys = LxSystem::new(x_field, 0.05);
        let mut rng = crate::oracle::SplitMix64::new(9);
        for _ in 0..3 {
            let u = rng.scalar_field(&chart, 1.0);
            let ue = sys.solve(&u, 1e-11, 8000).unwrap();
            let res = sys.energy_identity_residual(&u, &ue);
            let scale = u.l2().powi(2);
            assert!(res.abs() <= 100.0 * 1e-10 * scale, "identity residual {res:.3e}");
        }
    }

    #[test]
    fn regularize_along_b_fixes_kernel_states() {
        let ws = disk_ws(64);
        let b = VectorField::from_fn(ws.chart.clone(), |x, y| [-y, x]);
        // v with ∇_B v = 0: rigid rotation profile too
        let v = VectorField::from_fn(ws.chart.clone(), |x, y| [-0.3 * y, 0.3 * x]);
        let kernel = MollifierKernel::standard();
        let (v_reg, b_reg) = regularize_along_b(
            &v,
            &b,
            0.05,
            4.0 * ws.chart.h_r,
            &kernel,
            &ws,
            1e-9,
            1e-9,
            1e-9,
            20,
        )
        .unwrap();
        // the inward-shift split leaks an O(C·s) band into the high part,
        // which the solve damps rather than reproduces; the recombined
        // fields stay close at that scale and keep the constraints exactly
        assert!(b_reg.sub(&b).l2() < 1e-2, "{}", b_reg.sub(&b).l2());
        assert!(v_reg.sub(&v).l2() < 1e-2, "{}", v_reg.sub(&v).l2());
        assert!(ws.boundary_norm(&b_reg.normal_trace()) < 1e-7);
        assert!(b_reg.divergence().l2() < 1e-7);
    }
}
