//! Free boundaries as collar graphs over the unit circle, and the polar
//! tensor chart of the enclosed star-shaped domain.
//!
//! A boundary is the curve r(θ) = 1 + η(θ) with η a band-limited collar
//! displacement. The chart maps (ρ, θ) ∈ [0,1] × [0,2π) to
//! ρ·(1+η(θ))·(cos θ, sin θ); radial nodes sit at half-offsets so the
//! coordinate singularity at ρ = 0 carries no node.

use crate::error::{Error, Result};
use crate::series::BoundarySeries;
use std::f64::consts::PI;

/// Collar graph r(θ) = 1 + η(θ) with validated C¹ smallness.
#[derive(Debug, Clone)]
pub struct SurfaceGraph {
    pub eta: BoundarySeries,
    pub collar_delta: f64,
    /// Realized margins max|η| and max|η'| recorded at validation.
    pub sup_eta: f64,
    pub sup_eta_prime: f64,
}

/// Number of fine-grid samples used for collar/star-shape validation.
const VALIDATION_GRID: usize = 1024;

/// Build a validated collar graph.
pub fn build_surface(eta: BoundarySeries, collar_delta: f64) -> Result<SurfaceGraph> {
    assert!(collar_delta > 0.0, "collar_delta must be positive");
    let sup_eta = eta.sup_norm(VALIDATION_GRID);
    let sup_eta_prime = eta.derivative().sup_norm(VALIDATION_GRID);
    if sup_eta >= collar_delta || sup_eta_prime >= collar_delta {
        return Err(Error::CollarViolation {
            max_eta: sup_eta,
            max_eta_prime: sup_eta_prime,
            collar_delta,
        });
    }
    // star-shapedness: 1 + η > 0; already implied by |η| < δ < 1 for the
    // usual collar sizes, but checked explicitly for large δ.
    let n = VALIDATION_GRID;
    for j in 0..n {
        let r = 1.0 + eta.eval(2.0 * PI * j as f64 / n as f64);
        if r <= 0.0 {
            return Err(Error::NotStarShaped {
                detail: format!("1+eta = {r:.3e} at theta index {j}"),
            });
        }
    }
    Ok(SurfaceGraph { eta, collar_delta, sup_eta, sup_eta_prime })
}

impl SurfaceGraph {
    /// r(θ) = 1 + η(θ).
    pub fn radius(&self, theta: f64) -> f64 {
        1.0 + self.eta.eval(theta)
    }

    /// Outward unit normal of the polar curve at angle θ.
    pub fn unit_normal(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        let rp = self.eta.derivative().eval(theta);
        normal_from_r(r, rp, theta)
    }

    /// Signed curvature of r(θ) = 1+η(θ):
    /// κ = (r² + 2r'² − r r'') / (r² + r'²)^{3/2}, positive for convex curves.
    pub fn curvature(&self, theta: f64) -> f64 {
        let r = self.radius(theta);
        let d1 = self.eta.derivative();
        let rp = d1.eval(theta);
        let rpp = d1.derivative().eval(theta);
        (r * r + 2.0 * rp * rp - r * rpp) / (r * r + rp * rp).powf(1.5)
    }
}

pub(crate) fn normal_from_r(r: f64, rp: f64, theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    // unnormalized outward normal r e_r − r' e_θ
    let nx = r * c + rp * s;
    let ny = r * s - rp * c;
    let len = (nx * nx + ny * ny).sqrt();
    [nx / len, ny / len]
}

/// Outward unit normal and signed curvature sampled on the n-point θ-grid.
pub fn normal_and_curvature(surface: &SurfaceGraph, n: usize) -> (Vec<[f64; 2]>, BoundarySeries) {
    let normals = (0..n)
        .map(|j| surface.unit_normal(2.0 * PI * j as f64 / n as f64))
        .collect();
    let kappa: Vec<f64> = (0..n)
        .map(|j| surface.curvature(2.0 * PI * j as f64 / n as f64))
        .collect();
    (normals, BoundarySeries::from_samples(&kappa, n / 2 - 1))
}

/// Heat-flow regularization e^{-δ²k²} followed by a uniform inward shift
/// C·δ² sized from the realized overshoot (plus 10% margin) so the new
/// domain is contained in the old one.
pub fn heat_regularize(surface: &SurfaceGraph, delta: f64) -> Result<SurfaceGraph> {
    assert!(delta >= 0.0, "delta must be nonnegative");
    if delta == 0.0 {
        return Ok(surface.clone());
    }
    let smoothed = surface.eta.heat_multiplier(delta);
    // realized overshoot of the smoothed graph above the original
    let n = VALIDATION_GRID;
    let mut overshoot = 0.0_f64;
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        overshoot = overshoot.max(smoothed.eval(th) - surface.eta.eval(th));
    }
    let c = (overshoot.max(0.0) / (delta * delta)) * 1.1;
    let shifted = smoothed.shift_mean(-c * delta * delta);
    // containment check on the grid
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        debug_assert!(shifted.eval(th) <= surface.eta.eval(th) + 1e-13);
    }
    build_surface(shifted, surface.collar_delta)
}

/// Pointwise minimum of two collar graphs with the partition masks of the
/// intersected boundary.
#[derive(Debug, Clone)]
pub struct IntersectionMask {
    pub eta_min: BoundarySeries,
    /// θ-grid size the masks refer to.
    pub n_theta: usize,
    /// true where η < η_h (the intersected boundary follows the first graph)
    pub mask_a: Vec<bool>,
    /// true where η_h < η
    pub mask_ah: Vec<bool>,
    /// true where |η − η_h| ≤ tol_eq
    pub mask_common: Vec<bool>,
    pub tol_eq: f64,
}

pub fn intersect(a: &SurfaceGraph, b: &SurfaceGraph, n_theta: usize) -> IntersectionMask {
    let sa = a.eta.sample(n_theta);
    let sb = b.eta.sample(n_theta);
    let tol_eq = 1e-12 * (1.0 + a.sup_eta + b.sup_eta);
    let mut mins = vec![0.0; n_theta];
    let mut mask_a = vec![false; n_theta];
    let mut mask_ah = vec![false; n_theta];
    let mut mask_common = vec![false; n_theta];
    for j in 0..n_theta {
        mins[j] = sa[j].min(sb[j]);
        if (sa[j] - sb[j]).abs() <= tol_eq {
            mask_common[j] = true;
        } else if sa[j] < sb[j] {
            mask_a[j] = true;
        } else {
            mask_ah[j] = true;
        }
    }
    // min of two band-limited functions is only piecewise smooth; keep the
    // full resolvable band of the grid.
    let eta_min = BoundarySeries::from_samples(&mins, n_theta / 2 - 1);
    IntersectionMask { eta_min, n_theta, mask_a, mask_ah, mask_common, tol_eq }
}

/// Exact H^s norm on the reference circle (see `BoundarySeries::sobolev_norm`).
pub fn surface_norm(f: &BoundarySeries, s: f64) -> f64 {
    f.sobolev_norm(s)
}

/// Star-shaped polar tensor chart of the domain bounded by a collar graph.
///
/// Nodes: ρ_i = (i − ½)/n_r for i = 1..n_r and θ_j = 2πj/n_theta. Fields are
/// stored in Cartesian components at these nodes; the boundary ring ρ = 1 is
/// kept separate (Dirichlet data / traces).
#[derive(Debug, Clone)]
pub struct DomainChart {
    pub surface: SurfaceGraph,
    pub n_r: usize,
    pub n_theta: usize,
    pub h_r: f64,
    pub h_theta: f64,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    /// R(θ_j) = 1 + η(θ_j) and its θ-derivatives on the grid.
    pub r_b: Vec<f64>,
    pub r_b_prime: Vec<f64>,
    /// Node positions, Jacobians of (ρ,θ) ↦ x, inverse-transpose Jacobians,
    /// Jacobian determinants and area weights (det J · h_r · h_θ).
    pub pos: Vec<[f64; 2]>,
    pub jacobian: Vec<[[f64; 2]; 2]>,
    pub inv_jac_t: Vec<[[f64; 2]; 2]>,
    pub det_jac: Vec<f64>,
    pub area_weight: Vec<f64>,
    /// Boundary ring ρ = 1: positions, outward unit normals, unit tangents,
    /// curve element ℓ_j = √(R²+R'²) h_θ and curvature.
    pub b_pos: Vec<[f64; 2]>,
    pub b_normal: Vec<[f64; 2]>,
    pub b_tangent: Vec<[f64; 2]>,
    pub b_len: Vec<f64>,
    pub b_kappa: Vec<f64>,
}

impl DomainChart {
    pub fn build(surface: SurfaceGraph, n_r: usize, n_theta: usize) -> Self {
        assert!(n_r >= 4 && n_theta >= 8);
        let h_r = 1.0 / n_r as f64;
        let h_theta = 2.0 * PI / n_theta as f64;
        let rho: Vec<f64> = (1..=n_r).map(|i| (i as f64 - 0.5) * h_r).collect();
        let theta: Vec<f64> = (0..n_theta).map(|j| j as f64 * h_theta).collect();
        let d_eta = surface.eta.derivative();
        let r_b: Vec<f64> = theta.iter().map(|&t| surface.radius(t)).collect();
        let r_b_prime: Vec<f64> = theta.iter().map(|&t| d_eta.eval(t)).collect();

        let n_nodes = n_r * n_theta;
        let mut pos = vec![[0.0; 2]; n_nodes];
        let mut jacobian = vec![[[0.0; 2]; 2]; n_nodes];
        let mut inv_jac_t = vec![[[0.0; 2]; 2]; n_nodes];
        let mut det_jac = vec![0.0; n_nodes];
        let mut area_weight = vec![0.0; n_nodes];
        for i in 0..n_r {
            for j in 0..n_theta {
                let idx = i * n_theta + j;
                let (s, c) = theta[j].sin_cos();
                let (r, rp, p) = (r_b[j], r_b_prime[j], rho[i]);
                pos[idx] = [p * r * c, p * r * s];
                let jac = [[r * c, p * (rp * c - r * s)], [r * s, p * (rp * s + r * c)]];
                let det = p * r * r;
                jacobian[idx] = jac;
                det_jac[idx] = det;
                // J^{-T} = (1/det) [[ j11, -j10 ], [ -j01, j00 ]]^T arrangement:
                // J^{-1} = (1/det)[[j11,-j01],[-j10,j00]] so J^{-T} = (1/det)[[j11,-j10],[-j01,j00]]
                inv_jac_t[idx] = [
                    [jac[1][1] / det, -jac[1][0] / det],
                    [-jac[0][1] / det, jac[0][0] / det],
                ];
                area_weight[idx] = det * h_r * h_theta;
            }
        }

        let mut b_pos = vec![[0.0; 2]; n_theta];
        let mut b_normal = vec![[0.0; 2]; n_theta];
        let mut b_tangent = vec![[0.0; 2]; n_theta];
        let mut b_len = vec![0.0; n_theta];
        let mut b_kappa = vec![0.0; n_theta];
        for j in 0..n_theta {
            let (s, c) = theta[j].sin_cos();
            let (r, rp) = (r_b[j], r_b_prime[j]);
            b_pos[j] = [r * c, r * s];
            b_normal[j] = normal_from_r(r, rp, theta[j]);
            let tx = rp * c - r * s;
            let ty = rp * s + r * c;
            let tl = (tx * tx + ty * ty).sqrt();
            b_tangent[j] = [tx / tl, ty / tl];
            b_len[j] = tl * h_theta;
            b_kappa[j] = surface.curvature(theta[j]);
        }

        DomainChart {
            surface,
            n_r,
            n_theta,
            h_r,
            h_theta,
            rho,
            theta,
            r_b,
            r_b_prime,
            pos,
            jacobian,
            inv_jac_t,
            det_jac,
            area_weight,
            b_pos,
            b_normal,
            b_tangent,
            b_len,
            b_kappa,
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn n_nodes(&self) -> usize {
        self.n_r * self.n_theta
    }

    /// R and R' at an arbitrary angle (series evaluation).
    pub fn radius_at(&self, theta: f64) -> (f64, f64) {
        (self.surface.radius(theta), self.surface.eta.derivative().eval(theta))
    }

    /// Physical point of chart coordinates (ρ, θ).
    pub fn point(&self, rho: f64, theta: f64) -> [f64; 2] {
        let r = self.surface.radius(theta);
        let (s, c) = theta.sin_cos();
        [rho * r * c, rho * r * s]
    }

    /// Chart coordinates (ρ, θ) of a physical point.
    pub fn chart_coords(&self, x: f64, y: f64) -> (f64, f64) {
        let theta = y.atan2(x).rem_euclid(2.0 * PI);
        let r = self.surface.radius(theta);
        ((x * x + y * y).sqrt() / r, theta)
    }

    /// Total enclosed area by the chart quadrature (exact midpoint-in-ρ ×
    /// rectangle-in-θ value ½∫(1+η)² dθ for band-limited η).
    pub fn area(&self) -> f64 {
        self.area_weight.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(delta: f64) -> SurfaceGraph {
        build_surface(BoundarySeries::zero(8), delta).unwrap()
    }

    #[test]
    fn unit_circle_normal_and_curvature() {
        let s = circle(0.3);
        let n0 = s.unit_normal(0.0);
        assert!((n0[0] - 1.0).abs() < 1e-14 && n0[1].abs() < 1e-14);
        for j in 0..16 {
            assert!((s.curvature(j as f64 * 0.3) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn shifted_circle_curvature() {
        // η ≡ α gives a circle of radius 1+α with κ = 1/(1+α)
        let alpha = 0.2;
        let s = build_surface(BoundarySeries::constant(alpha, 4), 0.3).unwrap();
        assert!((s.curvature(1.234) - 1.0 / (1.0 + alpha)).abs() < 1e-13);
    }

    #[test]
    fn mode2_curvature_at_zero() {
        // η = 0.1cos2θ at θ=0: r=1.1, r'=0, r''=-0.4 → κ = 1.65/1.1³
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.5).unwrap();
        let expect = 1.65 / 1.1_f64.powi(3);
        assert!((s.curvature(0.0) - expect).abs() < 1e-12, "{}", s.curvature(0.0));
    }

    #[test]
    fn collar_point_at_theta_zero() {
        let s = build_surface(BoundarySeries::cosine(0.1, 1, 8), 0.3).unwrap();
        let chart = DomainChart::build(s, 8, 16);
        let p = chart.b_pos[0];
        assert!((p[0] - 1.1).abs() < 1e-14 && p[1].abs() < 1e-14);
    }

    #[test]
    fn collar_violation_rejected() {
        let err = build_surface(BoundarySeries::constant(0.5, 4), 0.3).unwrap_err();
        assert!(matches!(err, Error::CollarViolation { .. }));
    }

    #[test]
    fn unit_normals_have_unit_length() {
        let eta = BoundarySeries::cosine(0.08, 3, 8).add(&BoundarySeries::sine(0.05, 2, 8));
        let s = build_surface(eta, 0.5).unwrap();
        let (normals, _) = normal_and_curvature(&s, 64);
        for n in normals {
            assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn heat_regularize_damps_and_contains() {
        let eta = BoundarySeries::cosine(0.1, 4, 8);
        let s = build_surface(eta, 0.5).unwrap();
        let delta = 0.1;
        let reg = heat_regularize(&s, delta).unwrap();
        // multiplier on the k=4 mode before shift: e^{-δ²k²}
        let damp = (-delta * delta * 16.0_f64).exp();
        let c4 = reg.eta.coeff(4).re;
        assert!((c4 - 0.05 * damp).abs() < 1e-12);
        // contraction in H^s before the shift (shift only moves the mean)
        for s_ord in [0.0, 1.0, 2.0] {
            let sm = s.eta.heat_multiplier(delta);
            assert!(sm.sobolev_norm(s_ord) <= s.eta.sobolev_norm(s_ord) + 1e-14);
        }
        // containment on the grid
        for j in 0..256 {
            let th = 2.0 * PI * j as f64 / 256.0;
            assert!(reg.eta.eval(th) <= s.eta.eval(th) + 1e-13);
        }
    }

    #[test]
    fn heat_regularize_identity_at_zero() {
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        let reg = heat_regularize(&s, 0.0).unwrap();
        assert_eq!(reg.eta, s.eta);
    }

    #[test]
    fn heat_regularize_fixes_constants() {
        let s = build_surface(BoundarySeries::constant(-0.05, 4), 0.3).unwrap();
        let reg = heat_regularize(&s, 0.2).unwrap();
        // constants are heat-flow invariant and have zero overshoot, so no shift
        assert!((reg.eta.eval(1.0) + 0.05).abs() < 1e-13);
    }

    #[test]
    fn intersect_uniform_ordering() {
        let a = circle(0.3);
        let b = build_surface(BoundarySeries::constant(-0.1, 4), 0.3).unwrap();
        let m = intersect(&a, &b, 64);
        assert!(m.mask_a.iter().all(|&x| !x));
        assert!(m.mask_ah.iter().all(|&x| x));
        assert!((m.eta_min.eval(0.3) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn intersect_equal_inputs() {
        let a = build_surface(BoundarySeries::cosine(0.05, 2, 8), 0.3).unwrap();
        let m = intersect(&a, &a.clone(), 64);
        assert!(m.mask_common.iter().all(|&x| x));
    }

    #[test]
    fn intersect_sign_pattern_and_commutativity() {
        let a = build_surface(BoundarySeries::cosine(0.05, 1, 8), 0.3).unwrap();
        let b = circle(0.3);
        let n = 64;
        let m = intersect(&a, &b, n);
        let m2 = intersect(&b, &a, n);
        for j in 0..n {
            let th = 2.0 * PI * j as f64 / n as f64;
            if !m.mask_common[j] {
                assert_eq!(m.mask_a[j], th.cos() < 0.0, "theta {th}");
            }
            // commutative min, swapped masks
            assert_eq!(m.mask_a[j], m2.mask_ah[j]);
            assert!((m.eta_min.eval(th) - m2.eta_min.eval(th)).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_area_exact_for_band_limited() {
        let eta = BoundarySeries::cosine(0.1, 2, 8);
        let s = build_surface(eta.clone(), 0.4).unwrap();
        let chart = DomainChart::build(s, 128, 128);
        // ½∫(1 + 0.1cos2θ)² dθ = π + ½·(0.1²/2)·2π/2 = π(1 + 0.005)
        let exact = PI * 1.005;
        assert!((chart.area() - exact).abs() / exact <= 1e-8, "{}", chart.area());
    }

    #[test]
    fn chart_jacobian_positive() {
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        let chart = DomainChart::build(s, 32, 64);
        assert!(chart.det_jac.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn chart_coords_round_trip() {
        let s = build_surface(BoundarySeries::cosine(0.07, 3, 8), 0.4).unwrap();
        let chart = DomainChart::build(s, 16, 32);
        for &(rho, th) in &[(0.3, 1.0), (0.95, 4.5), (0.01, 0.2)] {
            let p = chart.point(rho, th);
            let (r2, t2) = chart.chart_coords(p[0], p[1]);
            assert!((r2 - rho).abs() < 1e-12 && (t2 - th).abs() < 1e-12);
        }
    }
}
