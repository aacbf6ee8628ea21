//! The runtime-verifiable functionals: linearized energy, the k = 3 higher
//! energy with its good-variable components, the two-state distance
//! functional on the intersected domain, and discrete proxies of the
//! pointwise control parameters.

use crate::elliptic::BoundaryFn;
use crate::error::Result;
use crate::field::{
    fractional_proxy_scalar, integrate_boundary_samples, integrate_scalar, sobolev_norm_scalar,
    transfer_scalar, transfer_vector, Region, VectorField,
};
use crate::series::BoundarySeries;
use crate::state::{tangential_directional, MhdState};
use crate::surface::{intersect, DomainChart};
use std::sync::Arc;

/// E_lin(w±, s) = ½∫|w⁺|² + ½∫|w⁻|² + ∫_Γ a s² dS.
pub fn linearized_energy(
    state: &MhdState,
    w_plus: &VectorField,
    w_minus: &VectorField,
    s: &BoundaryFn,
) -> f64 {
    let interior = 0.5 * integrate_scalar(&w_plus.dot(w_plus), Region::Domain)
        + 0.5 * integrate_scalar(&w_minus.dot(w_minus), Region::Domain);
    let boundary = weighted_boundary_sq(&state.chart, &state.a, s, false);
    interior + boundary
}

/// ∫_Γ a^{±1} f² dS by grid quadrature (invert = true uses 1/a).
fn weighted_boundary_sq(chart: &DomainChart, a: &BoundaryFn, f: &BoundaryFn, invert: bool) -> f64 {
    let nt = chart.n_theta;
    let vals: Vec<f64> = (0..nt)
        .map(|j| {
            let th = chart.theta[j];
            let av = a.eval(th);
            let w = if invert { 1.0 / av } else { av };
            let fv = f.eval(th);
            w * fv * fv
        })
        .collect();
    integrate_boundary_samples(chart, &vals, None)
}

/// Per-component breakdown of the k = 3 energy
/// E³ = Σ_± [1 + ‖W±‖² + ‖ω±‖²_{H²} + ‖∇_Bω±‖²_{H^{3/2}}]
///    + 2‖a^{1/2}N²a‖²_{L²(Γ)} + Σ_± ‖∇H N G±‖²_{L²(Ω)}
///    + 2‖∇H N ∇_Ba‖²_{L²(Ω)} + Σ_± ‖a^{-1/2}N ∇_B G^∓‖²_{L²(Γ)}.
///
/// The sign-independent terms appear once per Elsässer sign in the energy's
/// sign sum and are stored here with that doubling included.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// ‖W±‖²_{L²(Ω)} per sign (+, −)
    pub w_l2: [f64; 2],
    /// ‖ω±‖²_{H²(Ω)} per sign
    pub omega_h2: [f64; 2],
    /// ‖∇_B ω±‖²_{H^{3/2}} (geometric-mean proxy) per sign
    pub grad_b_omega_h32: [f64; 2],
    /// 2·‖a^{1/2} N²a‖²_{L²(Γ)} (both sign copies)
    pub a_n2a_boundary: f64,
    /// ‖∇H N G±‖²_{L²(Ω)} per sign, Green-identity (boundary) route
    pub grad_h_n_g: [f64; 2],
    /// 2·‖∇H N ∇_B a‖²_{L²(Ω)} (both sign copies), boundary route
    pub grad_h_n_grad_b_a: f64,
    /// ‖a^{-1/2} N ∇_B G^∓‖²_{L²(Γ)} per sign
    pub inv_a_n_grad_b_g: [f64; 2],
    pub total: f64,
}

impl EnergyReport {
    pub fn component_sum(&self) -> f64 {
        self.w_l2.iter().sum::<f64>()
            + self.omega_h2.iter().sum::<f64>()
            + self.grad_b_omega_h32.iter().sum::<f64>()
            + self.a_n2a_boundary
            + self.grad_h_n_g.iter().sum::<f64>()
            + self.grad_h_n_grad_b_a
            + self.inv_a_n_grad_b_g.iter().sum::<f64>()
    }
}

/// ‖∇H g‖²_{L²(Ω)} by the Green identity ⟨N g, g⟩_{L²(Γ)} (canonical route).
pub fn gradh_energy_boundary(state: &MhdState, g: &BoundaryFn) -> Result<f64> {
    let ng = state.ws.dtn(g)?;
    Ok(state.ws.boundary_inner(&ng, g).max(0.0))
}

/// ‖∇H g‖²_{L²(Ω)} by explicit harmonic extension and volume quadrature.
pub fn gradh_energy_volume(state: &MhdState, g: &BoundaryFn) -> Result<f64> {
    let h = state.ws.harmonic_extension(g)?;
    let grad = h.gradient();
    Ok(integrate_scalar(&grad.dot(&grad), Region::Domain))
}

pub fn higher_energy(state: &MhdState) -> Result<EnergyReport> {
    let ws = &state.ws;
    let w_l2 = [
        integrate_scalar(&state.w_plus.dot(&state.w_plus), Region::Domain),
        integrate_scalar(&state.w_minus.dot(&state.w_minus), Region::Domain),
    ];
    let omega_h2 = [
        sobolev_norm_scalar(&state.omega_plus, 2).powi(2),
        sobolev_norm_scalar(&state.omega_minus, 2).powi(2),
    ];
    let grad_b_omega_h32 = [
        fractional_proxy_scalar(&crate::field::directional_scalar(&state.b, &state.omega_plus), 1)
            .powi(2),
        fractional_proxy_scalar(&crate::field::directional_scalar(&state.b, &state.omega_minus), 1)
            .powi(2),
    ];
    // boundary terms
    let na = ws.dtn(&state.a)?;
    let n2a = ws.dtn(&na)?;
    let a_n2a_boundary = 2.0 * weighted_boundary_sq(&state.chart, &state.a, &n2a, false);

    let mut grad_h_n_g = [0.0; 2];
    for (slot, g) in [&state.g_plus, &state.g_minus].iter().enumerate() {
        let ng = ws.dtn(g)?;
        grad_h_n_g[slot] = gradh_energy_boundary(state, &ng)?;
    }
    let grad_h_n_grad_b_a = 2.0 * {
        let ngba = ws.dtn(&state.grad_b_a)?;
        gradh_energy_boundary(state, &ngba)?
    };

    let mut inv_a_n_grad_b_g = [0.0; 2];
    for (slot, g) in [&state.g_minus, &state.g_plus].iter().enumerate() {
        // s_B^± pairs with G^∓
        let gbg = tangential_directional(&state.chart, &state.b, g);
        let n_gbg = ws.dtn(&gbg)?;
        inv_a_n_grad_b_g[slot] = weighted_boundary_sq(&state.chart, &state.a, &n_gbg, true);
    }

    let mut report = EnergyReport {
        w_l2,
        omega_h2,
        grad_b_omega_h32,
        a_n2a_boundary,
        grad_h_n_g,
        grad_h_n_grad_b_a,
        inv_a_n_grad_b_g,
        total: 0.0,
    };
    report.total = 2.0 + report.component_sum();
    Ok(report)
}

/// The distance functional between two states sharing a collar:
/// D = Σ_± ½∫_{Ω̃}|W±_h − W±|² + ∫_A a⁻¹|P_h−P|² + ∫_{A_h} a_h⁻¹|P_h−P|².
#[derive(Debug, Clone)]
pub struct DistanceReport {
    pub interior_plus: f64,
    pub interior_minus: f64,
    /// boundary term over A = {η < η_h} with weight a⁻¹ (both sign copies)
    pub boundary_a: f64,
    /// boundary term over A_h = {η_h < η} with weight a_h⁻¹
    pub boundary_ah: f64,
    pub total: f64,
}

pub fn distance(x: &MhdState, y: &MhdState) -> Result<DistanceReport> {
    let nt = x.chart.n_theta.max(y.chart.n_theta);
    let mask = intersect(&x.chart.surface, &y.chart.surface, nt);
    let tilde_surface = crate::surface::build_surface(
        mask.eta_min.clone(),
        x.chart.surface.collar_delta.max(y.chart.surface.collar_delta),
    )?;
    let tilde_chart = Arc::new(DomainChart::build(tilde_surface, x.chart.n_r.max(y.chart.n_r), nt));

    // interior terms: Elsässer differences transferred to the intersection
    let wxp = transfer_vector(&x.w_plus, &tilde_chart)?;
    let wyp = transfer_vector(&y.w_plus, &tilde_chart)?;
    let wxm = transfer_vector(&x.w_minus, &tilde_chart)?;
    let wym = transfer_vector(&y.w_minus, &tilde_chart)?;
    let dp = wyp.sub(&wxp);
    let dm = wym.sub(&wxm);
    let interior_plus = 0.5 * integrate_scalar(&dp.dot(&dp), Region::Domain);
    let interior_minus = 0.5 * integrate_scalar(&dm.dot(&dm), Region::Domain);

    // boundary terms: pressures on Γ̃ (the state whose graph realizes the
    // minimum vanishes there; the other is evaluated in its interior)
    let px = transfer_scalar(&x.pressure, &tilde_chart)?;
    let py = transfer_scalar(&y.pressure, &tilde_chart)?;
    let pxb = px.trace_samples();
    let pyb = py.trace_samples();
    let mut vals_a = vec![0.0; nt];
    let mut vals_ah = vec![0.0; nt];
    for j in 0..nt {
        let th = tilde_chart.theta[j];
        let diff = pyb[j] - pxb[j];
        if mask.mask_a[j] {
            vals_a[j] = diff * diff / x.a.eval(th);
        } else if mask.mask_ah[j] {
            vals_ah[j] = diff * diff / y.a.eval(th);
        }
    }
    let boundary_a = integrate_boundary_samples(&tilde_chart, &vals_a, None);
    let boundary_ah = integrate_boundary_samples(&tilde_chart, &vals_ah, None);

    let total = interior_plus + interior_minus + boundary_a + boundary_ah;
    Ok(DistanceReport { interior_plus, interior_minus, boundary_a, boundary_ah, total })
}

/// Discrete proxies of the pointwise control parameters:
/// A  ~ ‖(v,B)‖_{C^{1/2}} + ‖Γ‖_{C¹} + Hölder-½ seminorm of η',
/// A½ ~ ‖(v,B)‖_{W^{1,∞}} + ‖(D_t^+P, D_t^-P)‖_{W^{1,∞}} + the same surface part.
/// Hölder quotients are taken at the two finest grid separations.
#[derive(Debug, Clone)]
pub struct ControlReport {
    pub a_proxy: f64,
    pub a_half_proxy: f64,
    pub field_sup: f64,
    pub field_grad_sup: f64,
    pub surface_c1: f64,
}

pub fn control_parameters(state: &MhdState) -> Result<ControlReport> {
    let field_holder = holder_half_proxy(&state.v).max(holder_half_proxy(&state.b));
    let surface_c1 = state.chart.surface.sup_eta + state.chart.surface.sup_eta_prime;
    let eta_prime = state.chart.surface.eta.derivative();
    let surface_holder = boundary_holder_half(&eta_prime, state.chart.n_theta);

    let field_sup = state.v.max_abs().max(state.b.max_abs());
    let grad_sup = |f: &VectorField| -> f64 {
        f.gradient_tensor()
            .iter()
            .map(|c| c.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    };
    let field_grad_sup = grad_sup(&state.v).max(grad_sup(&state.b));

    let (dtp_p, dtp_m) = state.material_pressure()?;
    let dtp_sup = dtp_p.max_abs().max(dtp_m.max_abs());
    let dtp_grad = dtp_p.gradient().max_abs().max(dtp_m.gradient().max_abs());

    let a_proxy = field_holder + surface_c1 + surface_holder;
    let a_half_proxy = field_sup + field_grad_sup + dtp_sup + dtp_grad + surface_c1 + surface_holder;
    Ok(ControlReport { a_proxy, a_half_proxy, field_sup, field_grad_sup, surface_c1 })
}

/// Hölder-1/2 difference quotients of a vector field at the two finest grid
/// separations (θ- and ρ-neighbors at offsets 1 and 2), plus the sup norm.
fn holder_half_proxy(v: &VectorField) -> f64 {
    let chart = &v.chart;
    let (nr, nt) = (chart.n_r, chart.n_theta);
    let mut worst = v.max_abs();
    let mut quotient = |a: usize, b: usize| {
        let dx = chart.pos[a][0] - chart.pos[b][0];
        let dy = chart.pos[a][1] - chart.pos[b][1];
        let dist = (dx * dx + dy * dy).sqrt();
        if dist > 1e-12 {
            let dvx = v.vx[a] - v.vx[b];
            let dvy = v.vy[a] - v.vy[b];
            let dv = (dvx * dvx + dvy * dvy).sqrt();
            worst = worst.max(dv / dist.sqrt());
        }
    };
    for offset in [1usize, 2] {
        for i in 0..nr {
            for j in 0..nt {
                quotient(chart.idx(i, j), chart.idx(i, (j + offset) % nt));
            }
        }
        for i in offset..nr {
            for j in 0..nt {
                quotient(chart.idx(i, j), chart.idx(i - offset, j));
            }
        }
    }
    worst
}

fn boundary_holder_half(f: &BoundarySeries, nt: usize) -> f64 {
    let vals = f.sample(nt);
    let h = 2.0 * std::f64::consts::PI / nt as f64;
    let mut worst = 0.0_f64;
    for offset in [1usize, 2] {
        let sep = (offset as f64 * h).sqrt();
        for j in 0..nt {
            let d = (vals[(j + offset) % nt] - vals[j]).abs();
            worst = worst.max(d / sep);
        }
    }
    worst
}
