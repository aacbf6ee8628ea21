//! Full MHD states (η, v, B) with pressure recovery and the derived good
//! variables.
//!
//! Assembly is tolerant: incoming fields are re-projected (divergence-free
//! velocity, rotational magnetic field) before validation, and hard errors
//! fire only past 10x the configured tolerances. The cached quantities are
//! the pressure P solving ΔP = tr(∇B)² − tr(∇v)² with P|_Γ = 0, the Taylor
//! coefficient a = −∂_n P, the Elsässer fields W± = v ± B with scalar
//! vorticities ω± = ∇×W±, and the boundary good variables
//! G± = ∇_n W±·∇P − ∇_n Δ⁻¹ ∇·M₂(∇W±, ∇P).

use crate::elliptic::{BoundaryFn, EllipticWorkspace};
use crate::error::{Error, Result};
use crate::field::{
    directional_vector, div_free_projection, integrate_scalar, Region,
    ScalarField, VectorField,
};
use crate::series::BoundarySeries;
use crate::surface::{DomainChart, SurfaceGraph};
use std::sync::Arc;

/// Constraint tolerances and validation floors used at assembly.
#[derive(Debug, Clone)]
pub struct StateConfig {
    pub tol_elliptic: f64,
    pub max_iterations: usize,
    pub tol_div: f64,
    pub tol_tangency: f64,
    pub c0_min: f64,
    /// Skip the Taylor-sign check (test/diagnostic use).
    pub skip_taylor_check: bool,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            tol_elliptic: 1e-10,
            max_iterations: 6000,
            tol_div: 1e-9,
            tol_tangency: 1e-9,
            c0_min: 1e-3,
            skip_taylor_check: false,
        }
    }
}

#[derive(Clone)]
pub struct MhdState {
    pub chart: Arc<DomainChart>,
    pub ws: Arc<EllipticWorkspace>,
    pub cfg: StateConfig,
    pub v: VectorField,
    pub b: VectorField,
    pub pressure: ScalarField,
    pub grad_p: VectorField,
    /// Taylor coefficient a = −∂_n P (variational flux).
    pub a: BoundaryFn,
    pub a_min: f64,
    pub w_plus: VectorField,
    pub w_minus: VectorField,
    pub omega_plus: ScalarField,
    pub omega_minus: ScalarField,
    pub g_plus: BoundaryFn,
    pub g_minus: BoundaryFn,
    pub grad_b_a: BoundaryFn,
    pub tangency_residual: f64,
    pub div_residual_v: f64,
    pub div_residual_b: f64,
}

#[derive(Debug, Clone)]
pub struct StateDiagnostics {
    pub total_energy: f64,
    pub a_min: f64,
    pub tangency_residual: f64,
    pub div_residual_v: f64,
    pub div_residual_b: f64,
    pub collar_margin: f64,
}

/// Tangency projection B − ∇H N⁻¹(B·n), iterated so the measured trace
/// residual reaches the target (the flux and trace discretizations differ
/// at interpolation order, hence the short fixed-point loop).
pub fn tangency_correct(
    b: &VectorField,
    ws: &EllipticWorkspace,
    tol: f64,
    max_passes: usize,
) -> Result<VectorField> {
    let mut cur = b.clone();
    let scale = 1.0 + b.l2();
    for _ in 0..max_passes {
        let bn = cur.normal_trace();
        let res = ws.boundary_norm(&bn);
        if res <= tol * scale {
            return Ok(cur);
        }
        // remove any tiny mean defect so the Neumann solve is compatible
        let curve_len: f64 = ws.chart.b_len.iter().sum();
        let mean = ws.boundary_inner(&bn, &BoundarySeries::constant(1.0, 1)) / curve_len;
        let bn0 = bn.shift_mean(-mean);
        let g = ws.dtn_inverse(&bn0)?;
        let zero = crate::field::ScalarField::zeros(ws.chart.clone());
        let (_, grad) = ws.poisson_dirichlet_gradient(&zero, &g)?;
        cur = cur.sub(&grad);
    }
    Ok(cur)
}

/// Combined divergence-free + tangential projection for magnetic fields.
/// The two corrections are only consistent up to discretization order (a
/// divergence pass re-injects a small normal trace and vice versa), so the
/// projections alternate until both measured residuals sit below target.
pub fn rotational_project(
    b: &VectorField,
    ws: &EllipticWorkspace,
    tol_div: f64,
    tol_tan: f64,
) -> Result<VectorField> {
    let mut cur = b.clone();
    let scale = 1.0 + b.l2();
    // the cross-injection between the two corrections contracts slowly on
    // rough near-boundary modes, so allow a generous alternation budget
    for _ in 0..30 {
        let (div_res, grad) = crate::field::div_distance(&cur, ws)?;
        let tan_res = ws.boundary_norm(&cur.normal_trace());
        let div_ok = div_res <= tol_div * scale;
        let tan_ok = tan_res <= tol_tan * scale;
        if div_ok && tan_ok {
            cur.div_residual = Some(div_res);
            return Ok(cur);
        }
        if !div_ok {
            cur = cur.sub(&grad);
        }
        if !tan_ok {
            cur = tangency_correct(&cur, ws, tol_tan, 1)?;
        }
    }
    let (div_res, _) = crate::field::div_distance(&cur, ws)?;
    cur.div_residual = Some(div_res);
    Ok(cur)
}

/// The vector kernel M₂(∇W, ∇P) with ∇·M₂ = ΔW·∇P + 2∇W·∇²P for
/// divergence-free W: M₂_j = (∂_j W_i + ∂_i W_j) ∂_i P.
pub fn m2_kernel(w: &VectorField, grad_p: &VectorField) -> VectorField {
    let gt = w.gradient_tensor(); // [dx wx, dy wx, dx wy, dy wy]
    let n = w.vx.len();
    let mut mx = vec![0.0; n];
    let mut my = vec![0.0; n];
    for i in 0..n {
        let (dxwx, dywx, dxwy, dywy) = (gt[0][i], gt[1][i], gt[2][i], gt[3][i]);
        let (px, py) = (grad_p.vx[i], grad_p.vy[i]);
        // j = x: (∂_x W_i + ∂_i W_x) ∂_i P over i ∈ {x, y}
        mx[i] = (dxwx + dxwx) * px + (dxwy + dywx) * py;
        // j = y
        my[i] = (dywx + dxwy) * px + (dywy + dywy) * py;
    }
    VectorField { chart: w.chart.clone(), vx: mx, vy: my, boundary: None, div_residual: None }
}

pub fn assemble(
    surface: SurfaceGraph,
    v_in: &VectorField,
    b_in: &VectorField,
    n_r: usize,
    n_theta: usize,
    cfg: &StateConfig,
) -> Result<MhdState> {
    let chart = Arc::new(DomainChart::build(surface, n_r, n_theta));
    let ws = Arc::new(EllipticWorkspace::new(chart.clone(), cfg.tol_elliptic, cfg.max_iterations));
    assemble_on(chart, ws, v_in, b_in, cfg)
}

/// Assemble on an existing chart/workspace (fields must already live on it).
pub fn assemble_on(
    chart: Arc<DomainChart>,
    ws: Arc<EllipticWorkspace>,
    v_in: &VectorField,
    b_in: &VectorField,
    cfg: &StateConfig,
) -> Result<MhdState> {
    // tolerant ingestion: re-project instead of rejecting
    let v = div_free_projection(v_in, &ws, cfg.tol_div, 5)?;
    let b = rotational_project(b_in, &ws, cfg.tol_div, cfg.tol_tangency)?;

    let div_residual_v = v.div_residual.unwrap_or(crate::field::div_distance(&v, &ws)?.0);
    let div_residual_b = b.div_residual.unwrap_or(crate::field::div_distance(&b, &ws)?.0);
    let tangency_residual = ws.boundary_norm(&b.normal_trace());
    let v_scale = 1.0 + v.l2();
    let b_scale = 1.0 + b.l2();
    if div_residual_v > 10.0 * cfg.tol_div * v_scale || div_residual_b > 10.0 * cfg.tol_div * b_scale
    {
        return Err(Error::DivergenceViolation {
            residual: div_residual_v.max(div_residual_b),
            tol: cfg.tol_div,
        });
    }
    if tangency_residual > 10.0 * cfg.tol_tangency * b_scale {
        return Err(Error::TangencyViolation { residual: tangency_residual, tol: cfg.tol_tangency });
    }

    // pressure: ΔP = tr(∇B)² − tr(∇v)² = −∂_i W⁺_j ∂_j W⁻_i, P|_Γ = 0
    let w_plus = v.add(&b);
    let w_minus = v.sub(&b);
    let rhs = pressure_rhs(&w_plus, &w_minus);
    let (pressure, flux) = ws.poisson_dirichlet_flux(&rhs, &BoundarySeries::zero(1))?;
    let a = flux.scale(-1.0);
    let nt = chart.n_theta;
    let a_min = (0..nt).map(|j| a.eval(chart.theta[j])).fold(f64::MAX, f64::min);
    if !cfg.skip_taylor_check && a_min < cfg.c0_min {
        return Err(Error::TaylorSignViolation { a_min, c0_min: cfg.c0_min });
    }

    let grad_p = {
        let mut g = pressure.gradient();
        // on Γ the pressure vanishes, so ∇P = −a·n exactly; store that trace
        let bx: Vec<f64> = (0..nt)
            .map(|j| -a.eval(chart.theta[j]) * chart.b_normal[j][0])
            .collect();
        let by: Vec<f64> = (0..nt)
            .map(|j| -a.eval(chart.theta[j]) * chart.b_normal[j][1])
            .collect();
        g.boundary = Some((bx, by));
        g
    };

    let omega_plus = w_plus.curl2d();
    let omega_minus = w_minus.curl2d();

    let (g_plus, g_minus) = good_variable_pair(&ws, &w_plus, &w_minus, &grad_p, &a)?;
    let grad_b_a = tangential_directional(&chart, &b, &a);

    Ok(MhdState {
        chart,
        ws,
        cfg: cfg.clone(),
        v,
        b,
        pressure,
        grad_p,
        a,
        a_min,
        w_plus,
        w_minus,
        omega_plus,
        omega_minus,
        g_plus,
        g_minus,
        grad_b_a,
        tangency_residual,
        div_residual_v,
        div_residual_b,
    })
}

/// ΔP right-hand side −∂_i W⁺_j ∂_j W⁻_i (= tr(∇B)² − tr(∇v)²).
fn pressure_rhs(w_plus: &VectorField, w_minus: &VectorField) -> ScalarField {
    let gp = w_plus.gradient_tensor();
    let gm = w_minus.gradient_tensor();
    let n = w_plus.vx.len();
    let mut values = vec![0.0; n];
    for i in 0..n {
        // ∂_i W⁺_j ∂_j W⁻_i = dxWx⁺dxWx⁻ + dxWy⁺dyWx⁻ + dyWx⁺dxWy⁻ + dyWy⁺dyWy⁻
        let t = gp[0][i] * gm[0][i] + gp[2][i] * gm[1][i] + gp[1][i] * gm[2][i]
            + gp[3][i] * gm[3][i];
        values[i] = -t;
    }
    ScalarField { chart: w_plus.chart.clone(), values, boundary: None }
}

/// G± = ∇_n W±·∇P − ∇_n Δ⁻¹ ∇·M₂(∇W±, ∇P). The first term uses
/// ∇P|_Γ = −a n and the cubic-fit normal trace of the W components; the
/// second is the variational flux of a zero-Dirichlet solve.
fn good_variable_pair(
    ws: &EllipticWorkspace,
    w_plus: &VectorField,
    w_minus: &VectorField,
    grad_p: &VectorField,
    a: &BoundaryFn,
) -> Result<(BoundaryFn, BoundaryFn)> {
    let mut out = Vec::with_capacity(2);
    for w in [w_plus, w_minus] {
        let dnwx = ws.normal_trace_grad(&w.x_component());
        let dnwy = ws.normal_trace_grad(&w.y_component());
        let chart = &ws.chart;
        let nt = chart.n_theta;
        let m2 = m2_kernel(w, grad_p);
        let div_m2 = m2.divergence();
        let (_, flux) = ws.poisson_dirichlet_flux(&div_m2, &BoundarySeries::zero(1))?;
        let vals: Vec<f64> = (0..nt)
            .map(|j| {
                let th = chart.theta[j];
                let n = chart.b_normal[j];
                let term1 = -a.eval(th) * (dnwx.eval(th) * n[0] + dnwy.eval(th) * n[1]);
                term1 - flux.eval(th)
            })
            .collect();
        out.push(BoundarySeries::from_samples(&vals, nt / 2 - 1));
    }
    let g_minus = out.pop().unwrap();
    let g_plus = out.pop().unwrap();
    Ok((g_plus, g_minus))
}

/// ∇_B of a boundary function via the tangential route (B·τ)∂_s f, exact
/// under the tangency condition.
pub fn tangential_directional(
    chart: &DomainChart,
    b: &VectorField,
    f: &BoundaryFn,
) -> BoundaryFn {
    let nt = chart.n_theta;
    let (bx, by) = b.trace_samples();
    let df = f.derivative();
    let vals: Vec<f64> = (0..nt)
        .map(|j| {
            let th = chart.theta[j];
            let t = chart.b_tangent[j];
            let btau = bx[j] * t[0] + by[j] * t[1];
            let ds = (chart.r_b[j] * chart.r_b[j] + chart.r_b_prime[j] * chart.r_b_prime[j]).sqrt();
            btau * df.eval(th) / ds
        })
        .collect();
    BoundarySeries::from_samples(&vals, nt / 2 - 1)
}

impl MhdState {
    pub fn total_energy(&self) -> f64 {
        0.5 * integrate_scalar(&self.v.dot(&self.v), Region::Domain)
            + 0.5 * integrate_scalar(&self.b.dot(&self.b), Region::Domain)
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            total_energy: self.total_energy(),
            a_min: self.a_min,
            tangency_residual: self.tangency_residual,
            div_residual_v: self.div_residual_v,
            div_residual_b: self.div_residual_b,
            collar_margin: self.chart.surface.collar_delta
                - self
                    .chart
                    .surface
                    .sup_eta
                    .max(self.chart.surface.sup_eta_prime),
        }
    }

    /// Elsässer consistency check: max node error of v − (W⁺+W⁻)/2 and
    /// B − (W⁺−W⁻)/2 (identically zero by construction).
    pub fn elsasser_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.v.vx.len() {
            worst = worst
                .max((self.v.vx[i] - 0.5 * (self.w_plus.vx[i] + self.w_minus.vx[i])).abs())
                .max((self.b.vx[i] - 0.5 * (self.w_plus.vx[i] - self.w_minus.vx[i])).abs())
                .max((self.v.vy[i] - 0.5 * (self.w_plus.vy[i] + self.w_minus.vy[i])).abs())
                .max((self.b.vy[i] - 0.5 * (self.w_plus.vy[i] - self.w_minus.vy[i])).abs());
        }
        worst
    }

    /// Material pressures D_t^± P = Δ⁻¹F^± with zero Dirichlet data, where
    /// F^± = ∇·M₂(∇W^±, ∇P) + D_t^±ΔP and the cubic term is evaluated from
    /// its displayed expansion with D_t^±W^∓ = −∇P, D_t^±W^± = −∇P ± 2∇_B W^±.
    pub fn material_pressure(&self) -> Result<(ScalarField, ScalarField)> {
        let mut out = Vec::with_capacity(2);
        for sign_plus in [true, false] {
            let w_same = if sign_plus { &self.w_plus } else { &self.w_minus };
            let m2 = m2_kernel(w_same, &self.grad_p);
            let div_m2 = m2.divergence();
            let dt_lap = self.dt_delta_p(sign_plus);
            let f = div_m2.add(&dt_lap);
            let u = self.ws.poisson_dirichlet(&f, &BoundarySeries::zero(1))?;
            out.push(u);
        }
        let minus = out.pop().unwrap();
        let plus = out.pop().unwrap();
        Ok((plus, minus))
    }

    /// D_t^±ΔP = ∂_iW_k^± ∂_kW_j^+ ∂_jW_i^− + ∂_iW_k^± ∂_kW_j^− ∂_jW_i^+
    ///           − ∂_i(D_t^±W^+)_j ∂_jW_i^− − ∂_iW_j^+ ∂_j(D_t^±W^−)_i.
    fn dt_delta_p(&self, sign_plus: bool) -> ScalarField {
        let chart = &self.chart;
        let gp = self.w_plus.gradient_tensor();
        let gm = self.w_minus.gradient_tensor();
        let gs = if sign_plus { &gp } else { &gm };
        // D_t^±W^+ and D_t^±W^- as fields
        let dtw_plus = if sign_plus {
            // −∇P + 2∇_B W⁺
            let gbw = directional_vector(&self.b, &self.w_plus);
            gbw.scale(2.0).sub(&self.grad_p)
        } else {
            self.grad_p.scale(-1.0)
        };
        let dtw_minus = if sign_plus {
            self.grad_p.scale(-1.0)
        } else {
            let gbw = directional_vector(&self.b, &self.w_minus);
            gbw.scale(-2.0).sub(&self.grad_p)
        };
        let gdp = dtw_plus.gradient_tensor();
        let gdm = dtw_minus.gradient_tensor();

        // tensor entry access: t[m][n] = ∂_n W_m with layout [dxwx,dywx,dxwy,dywy]
        let entry = |g: &[Vec<f64>; 4], m: usize, n: usize, i: usize| -> f64 {
            g[2 * m + n][i]
        };
        let n_nodes = chart.n_nodes();
        let mut values = vec![0.0; n_nodes];
        for i in 0..n_nodes {
            let mut t1 = 0.0;
            let mut t2 = 0.0;
            let mut t3 = 0.0;
            let mut t4 = 0.0;
            for ii in 0..2 {
                for jj in 0..2 {
                    for kk in 0..2 {
                        // ∂_i W_k^± ∂_k W_j^+ ∂_j W_i^-
                        t1 += entry(gs, kk, ii, i) * entry(&gp, jj, kk, i) * entry(&gm, ii, jj, i);
                        // ∂_i W_k^± ∂_k W_j^- ∂_j W_i^+
                        t2 += entry(gs, kk, ii, i) * entry(&gm, jj, kk, i) * entry(&gp, ii, jj, i);
                    }
                    // ∂_i (D_t^±W^+)_j ∂_j W_i^-
                    t3 += entry(&gdp, jj, ii, i) * entry(&gm, ii, jj, i);
                    // ∂_i W_j^+ ∂_j (D_t^±W^-)_i
                    t4 += entry(&gp, jj, ii, i) * entry(&gdm, ii, jj, i);
                }
            }
            values[i] = t1 + t2 - t3 - t4;
        }
        ScalarField { chart: chart.clone(), values, boundary: None }
    }

    /// Residual of the curvature-pressure identity aκ = n·∇²P·n − ΔP on Γ
    /// (κ the positive polar-curve curvature; the convexity orientation
    /// fixes the sign of the identity).
    pub fn curvature_pressure_residual(&self) -> f64 {
        let chart = &self.chart;
        let nt = chart.n_theta;
        let hess = self.pressure.hessian();
        let hxx = extrap(chart, &hess[0].values);
        let hxy = extrap(chart, &hess[1].values);
        let hyx = extrap(chart, &hess[2].values);
        let hyy = extrap(chart, &hess[3].values);
        let gp = self.w_plus.gradient_tensor();
        let gm = self.w_minus.gradient_tensor();
        let n_nodes = chart.n_nodes();
        let mut lap_vals = vec![0.0; n_nodes];
        for i in 0..n_nodes {
            lap_vals[i] = -(gp[0][i] * gm[0][i]
                + gp[2][i] * gm[1][i]
                + gp[1][i] * gm[2][i]
                + gp[3][i] * gm[3][i]);
        }
        let lap_b = extrap(chart, &lap_vals);
        let mut worst = 0.0_f64;
        for j in 0..nt {
            let n = chart.b_normal[j];
            let nhn = n[0] * n[0] * hxx[j]
                + n[0] * n[1] * (hxy[j] + hyx[j])
                + n[1] * n[1] * hyy[j];
            let lhs = self.a.eval(chart.theta[j]) * chart.b_kappa[j];
            let rhs = nhn - lap_b[j];
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    /// Residual of the stationary wave identity aNa = f for equilibria
    /// (time-derivative terms evaluated as pure advection). Returns
    /// (‖aNa − f‖_∞, ‖aNa‖_∞) on the boundary grid.
    pub fn stationary_wave_residual(&self) -> Result<(f64, f64)> {
        let chart = &self.chart;
        let ws = &self.ws;
        let nt = chart.n_theta;
        let na = ws.dtn(&self.a)?;
        // f = −g·n + a D_t^∓n·D_t^±n + n·∇Δ⁻¹(|∇Ha|²)
        let ha = ws.harmonic_extension(&self.a)?;
        let gha = ha.gradient();
        let gha_sq = gha.dot(&gha);
        let (_, flux_ha) = ws.poisson_dirichlet_flux(&gha_sq, &BoundarySeries::zero(1))?;

        // |∇P|² and its Laplacian route: ½∇Δ⁻¹Δ|∇P|² with zero Dirichlet data
        let gp_sq = self.grad_p.dot(&self.grad_p);
        let lap_gp_sq = laplacian_fd(&gp_sq);
        let half_grad_pot = {
            let u = ws.poisson_dirichlet(&lap_gp_sq, &BoundarySeries::zero(1))?;
            u.gradient().scale(0.5)
        };

        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for sign_plus in [true, false] {
            let w_same = if sign_plus { &self.w_plus } else { &self.w_minus };
            let w_other = if sign_plus { &self.w_minus } else { &self.w_plus };
            // stationary D_t^∓X = (W^∓·∇)X
            let m2 = m2_kernel(w_same, &self.grad_p);
            let div_m2 = m2.divergence();
            let b_pm = ws.poisson_dirichlet(&div_m2, &BoundarySeries::zero(1))?;
            let grad_b_pm = b_pm.gradient();
            let adv_grad_b = directional_vector(w_other, &grad_b_pm);

            // ∇W^∓ · (∇W^± · ∇P) and ∇W^± · D_t^∓∇P
            let gw_same = w_same.gradient_tensor();
            let gw_other = w_other.gradient_tensor();
            let n_nodes = chart.n_nodes();
            let mut gx = vec![0.0; n_nodes];
            let mut gy = vec![0.0; n_nodes];
            // D_t^∓ P = Δ⁻¹ F^∓ (stationary) — reuse material pressure of the ∓ sign
            let (dtp_p, dtp_m) = self.material_pressure()?;
            let dtp_other = if sign_plus { dtp_m } else { dtp_p };
            let grad_dtp_other = dtp_other.gradient();
            for i in 0..n_nodes {
                let pvec = [self.grad_p.vx[i], self.grad_p.vy[i]];
                // (∇W^± ∇P)_m = ∂_n W^±_m P_n
                let wp = [
                    gw_same[0][i] * pvec[0] + gw_same[1][i] * pvec[1],
                    gw_same[2][i] * pvec[0] + gw_same[3][i] * pvec[1],
                ];
                // ∇W^∓ applied to that
                let t1 = [
                    gw_other[0][i] * wp[0] + gw_other[1][i] * wp[1],
                    gw_other[2][i] * wp[0] + gw_other[3][i] * wp[1],
                ];
                // D_t^∓∇P = −∇W^∓·∇P + ∇D_t^∓P
                let dwp = [
                    gw_other[0][i] * pvec[0] + gw_other[1][i] * pvec[1],
                    gw_other[2][i] * pvec[0] + gw_other[3][i] * pvec[1],
                ];
                let dtgp = [
                    -dwp[0] + grad_dtp_other.vx[i],
                    -dwp[1] + grad_dtp_other.vy[i],
                ];
                // ∇W^± applied to D_t^∓∇P
                let t2 = [
                    gw_same[0][i] * dtgp[0] + gw_same[1][i] * dtgp[1],
                    gw_same[2][i] * dtgp[0] + gw_same[3][i] * dtgp[1],
                ];
                gx[i] = half_grad_pot.vx[i] + adv_grad_b.vx[i] + t1[0] - t2[0];
                gy[i] = half_grad_pot.vy[i] + adv_grad_b.vy[i] + t1[1] - t2[1];
            }
            let g_field = VectorField {
                chart: chart.clone(),
                vx: gx,
                vy: gy,
                boundary: None,
                div_residual: None,
            };
            let (gbx, gby) = g_field.trace_samples();

            for j in 0..nt {
                let th = chart.theta[j];
                let n = chart.b_normal[j];
                // D_t^±n = −((∇W^±)^* n)^T, computed from the gradient traces
                let dtn_same = moving_normal(chart, w_same, j);
                let dtn_other = moving_normal(chart, w_other, j);
                let f_val = -(gbx[j] * n[0] + gby[j] * n[1])
                    + self.a.eval(th) * (dtn_other[0] * dtn_same[0] + dtn_other[1] * dtn_same[1])
                    + flux_ha.eval(th);
                let lhs = self.a.eval(th) * na.eval(th);
                worst = worst.max((lhs - f_val).abs());
                scale = scale.max(lhs.abs());
            }
        }
        Ok((worst, scale))
    }
}

fn extrap(chart: &DomainChart, values: &[f64]) -> Vec<f64> {
    // second-derivative fields are rough on the outermost rings; read the
    // clean interior stencils and extrapolate the longer way
    crate::field::extrapolate_trace_offset(chart, values, 3)
}

/// D_t n = −((∇v)^* n)^⊤ at boundary node j, with (∇v)^*_{ij} = ∂_i v_j.
fn moving_normal(chart: &DomainChart, w: &VectorField, j: usize) -> [f64; 2] {
    let gt = w.gradient_tensor();
    let gx = extrap(chart, &gt[0]);
    let gyx = extrap(chart, &gt[1]);
    let gxy = extrap(chart, &gt[2]);
    let gy = extrap(chart, &gt[3]);
    let n = chart.b_normal[j];
    // (∇v)^* n: row i = ∂_i v_j n_j
    let sx = gx[j] * n[0] + gxy[j] * n[1];
    let sy = gyx[j] * n[0] + gy[j] * n[1];
    // tangential projection
    let dot = sx * n[0] + sy * n[1];
    [-(sx - dot * n[0]), -(sy - dot * n[1])]
}

/// FD Laplacian via the gradient chain (diagnostic use).
fn laplacian_fd(u: &ScalarField) -> ScalarField {
    let g = u.gradient();
    g.divergence()
}
