//! Independent closed-form references used by the test suite: exact
//! equilibria, Taylor-sign counterexamples, manufactured Poisson solutions,
//! and fine-grid reference solves. These share only grid construction with
//! the production path so cross-checks stay meaningful.

use crate::elliptic::EllipticWorkspace;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::series::BoundarySeries;
use crate::surface::{build_surface, DomainChart, SurfaceGraph};
use std::sync::Arc;

/// Closed-form solution bundle: u, ∇u, Δu as evaluators.
pub struct ReferenceSolution {
    pub description: String,
    pub u: Box<dyn Fn(f64, f64) -> f64>,
    pub grad_u: Box<dyn Fn(f64, f64) -> [f64; 2]>,
    pub lap_u: Box<dyn Fn(f64, f64) -> f64>,
}

impl ReferenceSolution {
    /// Internal consistency: FD-differentiated u must match the supplied ∇u.
    pub fn consistency_defect(&self) -> f64 {
        let mut rng = SplitMix64::new(0x9e3779b97f4a7c15);
        let eps = 1e-5;
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let x = rng.uniform(-0.6, 0.6);
            let y = rng.uniform(-0.6, 0.6);
            let gx = ((self.u)(x + eps, y) - (self.u)(x - eps, y)) / (2.0 * eps);
            let gy = ((self.u)(x, y + eps) - (self.u)(x, y - eps)) / (2.0 * eps);
            let g = (self.grad_u)(x, y);
            worst = worst.max((gx - g[0]).abs()).max((gy - g[1]).abs());
        }
        worst
    }
}

/// Stationary magnetic rotor: η ≡ 0, v = 0, B = c(−y, x).
/// Closed forms: P = c²(1−r²)/2, a ≡ c², E = πc²/4.
pub fn equilibrium_rotor(
    c: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField, ReferenceSolution) {
    assert!(c != 0.0);
    let surface = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    let v = VectorField::zeros(chart.clone());
    let b = VectorField::from_fn(chart, move |x, y| [-c * y, c * x]);
    let c2 = c * c;
    let reference = ReferenceSolution {
        description: format!("magnetic rotor c={c}"),
        u: Box::new(move |x, y| 0.5 * c2 * (1.0 - x * x - y * y)),
        grad_u: Box::new(move |x, y| [-c2 * x, -c2 * y]),
        lap_u: Box::new(move |_, _| -2.0 * c2),
    };
    (surface, v, b, reference)
}

/// Momentum residual ‖−B·∇B + ∇P‖_∞ of the rotor closed forms on a sample
/// grid; exact cancellation up to roundoff.
pub fn rotor_momentum_residual(c: f64) -> f64 {
    let (_, _, _, reference) = equilibrium_rotor(c, 8, 8);
    let mut rng = SplitMix64::new(42);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = rng.uniform(-0.7, 0.7);
        let y = rng.uniform(-0.7, 0.7);
        // B·∇B = −c²(x, y); ∇P = −c²(x, y)
        let bdb = [-c * c * x, -c * c * y];
        let gp = (reference.grad_u)(x, y);
        worst = worst.max((gp[0] - bdb[0]).abs()).max((gp[1] - bdb[1]).abs());
    }
    worst
}

/// Rigid fluid rotation: η ≡ 0, v = c(−y, x), B = 0; closed form a = −c²,
/// the Taylor-sign failure regime.
pub fn taylor_violating_rotation(
    c: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField) {
    let surface = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    let v = VectorField::from_fn(chart.clone(), move |x, y| [-c * y, c * x]);
    let b = VectorField::zeros(chart);
    (surface, v, b)
}

/// Rotor plus an irrotational, divergence-free mode-k velocity pulse
/// v = amp·∇(r^k cos kθ); fluid vorticity is identically zero at t = 0.
pub fn perturbed_rotor(
    c: f64,
    amp: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField, f64) {
    let surface = build_surface(BoundarySeries::zero(8), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    // mode 2: ∇(r²cos2θ) = ∇(x²−y²) = (2x, −2y)
    let v = VectorField::from_fn(chart.clone(), move |x, y| [2.0 * amp * x, -2.0 * amp * y]);
    let b = VectorField::from_fn(chart, move |x, y| [-c * y, c * x]);
    (surface, v, b, amp)
}

/// Rotor magnetic field on a mode-2 perturbed boundary. The assembly
/// projections restore tangency and the divergence constraint on the
/// perturbed domain, so the recovered pressure is genuinely non-polynomial.
pub fn perturbed_boundary_rotor(
    c: f64,
    eta_amp: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField) {
    let surface = build_surface(BoundarySeries::cosine(eta_amp, 2, 8), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    let v = VectorField::zeros(chart.clone());
    let b = VectorField::from_fn(chart, move |x, y| [-c * y, c * x]);
    (surface, v, b)
}

/// Rotor with an irrotational velocity pulse and a tangential magnetic
/// perturbation carrying non-constant current: B = c(−y,x) + β∇⊥ψ with
/// ψ = (x²−y²)(1−r²), so ω_B picks up −12β(x²−y²) and the Lorentz coupling
/// B·∇ω_B generates fluid vorticity from ω_v(0) = 0.
pub fn magnetically_perturbed_rotor(
    c: f64,
    amp: f64,
    beta: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField) {
    let surface = build_surface(BoundarySeries::zero(8), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    let v = VectorField::from_fn(chart.clone(), move |x, y| [2.0 * amp * x, -2.0 * amp * y]);
    let b = VectorField::from_fn(chart, move |x, y| {
        // ∇⊥ψ = (2y − 4y³, 2x − 4x³)
        [
            -c * y + beta * (2.0 * y - 4.0 * y * y * y),
            c * x + beta * (2.0 * x - 4.0 * x * x * x),
        ]
    });
    (surface, v, b)
}

/// Irrotational pulse alone (B = 0): v = amp·(2x, −2y). The associated
/// pressure is P = 2·amp²(1−r²), so a = 4·amp² > 0.
pub fn irrotational_pulse(
    amp: f64,
    n_r: usize,
    n_theta: usize,
) -> (SurfaceGraph, VectorField, VectorField) {
    let surface = build_surface(BoundarySeries::zero(8), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    let v = VectorField::from_fn(chart.clone(), move |x, y| [2.0 * amp * x, -2.0 * amp * y]);
    let b = VectorField::zeros(chart);
    (surface, v, b)
}

/// Manufactured Poisson catalog on a configurable boundary graph.
/// Returns closed forms (u, f = Δu, g = trace).
pub fn manufactured_poisson(expr_id: &str) -> Result<ReferenceSolution> {
    match expr_id {
        "one_minus_r2" => Ok(ReferenceSolution {
            description: "u = 1 - r², f = -4".into(),
            u: Box::new(|x, y| 1.0 - x * x - y * y),
            grad_u: Box::new(|x, y| [-2.0 * x, -2.0 * y]),
            lap_u: Box::new(|_, _| -4.0),
        }),
        "linear_x" => Ok(ReferenceSolution {
            description: "u = x (harmonic)".into(),
            u: Box::new(|x, _| x),
            grad_u: Box::new(|_, _| [1.0, 0.0]),
            lap_u: Box::new(|_, _| 0.0),
        }),
        "r3_cos3" => Ok(ReferenceSolution {
            // Re(z³) = x³ − 3xy²
            description: "u = r³cos3θ (harmonic)".into(),
            u: Box::new(|x, y| x * x * x - 3.0 * x * y * y),
            grad_u: Box::new(|x, y| [3.0 * (x * x - y * y), -6.0 * x * y]),
            lap_u: Box::new(|_, _| 0.0),
        }),
        "r3_cos3_plus_r2" => Ok(ReferenceSolution {
            description: "u = r³cos3θ + r², f = 4".into(),
            u: Box::new(|x, y| x * x * x - 3.0 * x * y * y + x * x + y * y),
            grad_u: Box::new(|x, y| {
                [3.0 * (x * x - y * y) + 2.0 * x, -6.0 * x * y + 2.0 * y]
            }),
            lap_u: Box::new(|_, _| 4.0),
        }),
        "gauss_bump" => Ok(ReferenceSolution {
            description: "u = exp(-(x²+2y²))".into(),
            u: Box::new(|x, y| (-(x * x + 2.0 * y * y)).exp()),
            grad_u: Box::new(|x, y| {
                let e = (-(x * x + 2.0 * y * y)).exp();
                [-2.0 * x * e, -4.0 * y * e]
            }),
            lap_u: Box::new(|x, y| {
                let e = (-(x * x + 2.0 * y * y)).exp();
                (4.0 * x * x + 16.0 * y * y - 6.0) * e
            }),
        }),
        other => Err(Error::UnknownExpr { id: other.to_string() }),
    }
}

/// Grid fields (f, g) of a manufactured problem on a chart.
pub fn manufactured_data(
    reference: &ReferenceSolution,
    chart: &Arc<DomainChart>,
) -> (ScalarField, BoundarySeries) {
    let f = ScalarField::from_fn_with_boundary(chart.clone(), |x, y| (reference.lap_u)(x, y));
    let g_vals: Vec<f64> = chart.b_pos.iter().map(|p| (reference.u)(p[0], p[1])).collect();
    let g = BoundarySeries::from_samples(&g_vals, chart.n_theta / 2 - 1);
    (f, g)
}

/// Reference solve of the same discrete problem at `refinement_factor` times
/// the resolution and 100x tighter tolerance, transferred back by sampling.
pub fn fine_reference_solve(
    surface: &SurfaceGraph,
    f_expr: &ReferenceSolution,
    n_r: usize,
    n_theta: usize,
    refinement_factor: usize,
    tol: f64,
) -> Result<ScalarField> {
    let fine_chart = Arc::new(DomainChart::build(
        surface.clone(),
        n_r * refinement_factor,
        n_theta * refinement_factor,
    ));
    let ws = EllipticWorkspace::new(fine_chart.clone(), tol / 100.0, 8000);
    let (f, g) = manufactured_data(f_expr, &fine_chart);
    let u = ws.poisson_dirichlet(&f, &g)?;
    if refinement_factor == 1 {
        return Ok(u);
    }
    let coarse_chart = Arc::new(DomainChart::build(surface.clone(), n_r, n_theta));
    crate::field::transfer_scalar(&u, &coarse_chart)
}

/// Deterministic PRNG for reproducible "random" test fields (SplitMix64).
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    /// Random band-limited boundary function with modes 1..=k_max.
    pub fn boundary_fn(&mut self, k_max: usize, amp: f64) -> BoundarySeries {
        let mut s = BoundarySeries::zero(k_max);
        for k in 1..=k_max {
            let a = self.uniform(-amp, amp) / k as f64;
            let b = self.uniform(-amp, amp) / k as f64;
            s = s.add(&BoundarySeries::cosine(a, k, k_max));
            s = s.add(&BoundarySeries::sine(b, k, k_max));
        }
        s
    }

    /// Random smooth scalar field from a few low harmonics.
    pub fn scalar_field(&mut self, chart: &Arc<DomainChart>, amp: f64) -> ScalarField {
        let c: Vec<f64> = (0..8).map(|_| self.uniform(-amp, amp)).collect();
        ScalarField::from_fn_with_boundary(chart.clone(), move |x, y| {
            c[0] + c[1] * x + c[2] * y + c[3] * x * y
                + c[4] * (2.0 * x).sin()
                + c[5] * (2.0 * y).cos()
                + c[6] * (x + 1.3 * y).sin()
                + c[7] * (1.7 * x - y).cos()
        })
    }

    /// Random smooth vector field.
    pub fn vector_field(&mut self, chart: &Arc<DomainChart>, amp: f64) -> VectorField {
        let fx = self.scalar_field(chart, amp);
        let fy = self.scalar_field(chart, amp);
        VectorField {
            chart: chart.clone(),
            vx: fx.values,
            vy: fy.values,
            boundary: match (fx.boundary, fy.boundary) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            },
            div_residual: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotor_reference_is_consistent() {
        let (_, _, _, reference) = equilibrium_rotor(1.0, 8, 8);
        assert!(reference.consistency_defect() < 1e-6);
    }

    #[test]
    fn rotor_momentum_cancellation() {
        assert!(rotor_momentum_residual(1.0) < 1e-10);
        assert!(rotor_momentum_residual(2.0) < 1e-10);
    }

    #[test]
    fn catalog_entries_consistent() {
        for id in ["one_minus_r2", "linear_x", "r3_cos3", "r3_cos3_plus_r2", "gauss_bump"] {
            let r = manufactured_poisson(id).unwrap();
            assert!(r.consistency_defect() < 1e-6, "{id}");
        }
        assert!(matches!(
            manufactured_poisson("nope"),
            Err(Error::UnknownExpr { .. })
        ));
    }

    #[test]
    fn fine_reference_brackets_production_error() {
        use crate::elliptic::EllipticWorkspace;
        let reference = manufactured_poisson("gauss_bump").unwrap();
        let surface = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        let mut errs = Vec::new();
        for n in [16usize, 32] {
            let chart = Arc::new(DomainChart::build(surface.clone(), n, n));
            let ws = EllipticWorkspace::new(chart.clone(), 1e-11, 4000);
            let (f, g) = manufactured_data(&reference, &chart);
            let u = ws.poisson_dirichlet(&f, &g).unwrap();
            let fine = fine_reference_solve(&surface, &reference, n, n, 4, 1e-9).unwrap();
            let mut worst = 0.0_f64;
            for idx in 0..chart.n_nodes() {
                worst = worst.max((u.values[idx] - fine.values[idx]).abs());
            }
            errs.push(worst);
        }
        // production-vs-fine error shrinks by at least 3x per doubling
        assert!(errs[0] / errs[1] >= 3.0, "errors {errs:?}");
        // refinement_factor = 1 reproduces the production solve exactly
        let n = 16;
        let chart = Arc::new(DomainChart::build(surface.clone(), n, n));
        let ws = EllipticWorkspace::new(chart.clone(), 1e-9, 4000);
        let (f, g) = manufactured_data(&reference, &chart);
        let u = ws.poisson_dirichlet(&f, &g).unwrap();
        let same = fine_reference_solve(&surface, &reference, n, n, 1, 1e-9 * 100.0).unwrap();
        let mut worst = 0.0_f64;
        for idx in 0..chart.n_nodes() {
            worst = worst.max((u.values[idx] - same.values[idx]).abs());
        }
        assert!(worst < 1e-7, "refinement 1 mismatch {worst:.3e}");
    }

    #[test]
    fn splitmix_reproducible() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
