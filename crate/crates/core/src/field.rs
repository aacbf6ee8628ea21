//! Interior fields on a domain chart and their calculus: chain-ruled finite
//! differences, quadrature, Sobolev norms, Hodge-type projections, and
//! transfer between nearby domains.
//!
//! Fields store Cartesian components at the chart nodes. Radial stencils are
//! centered in the interior and one-sided at the first and last rings; the
//! θ direction is periodic. Fields produced by elliptic solves carry their
//! boundary ring, which the boundary-adjacent stencils then use.

use crate::elliptic::EllipticWorkspace;
use crate::error::{Error, Result};
use crate::series::BoundarySeries;
use crate::surface::DomainChart;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ScalarField {
    pub chart: Arc<DomainChart>,
    pub values: Vec<f64>,
    /// Trace at ρ = 1 when known (Dirichlet data of a solve).
    pub boundary: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct VectorField {
    pub chart: Arc<DomainChart>,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub boundary: Option<(Vec<f64>, Vec<f64>)>,
    /// Divergence residual recorded by the last projection, if any.
    pub div_residual: Option<f64>,
}

impl ScalarField {
    pub fn zeros(chart: Arc<DomainChart>) -> Self {
        let n = chart.n_nodes();
        ScalarField { chart, values: vec![0.0; n], boundary: None }
    }

    pub fn from_fn(chart: Arc<DomainChart>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values: Vec<f64> = chart.pos.iter().map(|p| f(p[0], p[1])).collect();
        let out = ScalarField { chart, values, boundary: None };
        out.assert_finite();
        out
    }

    pub fn from_fn_with_boundary(chart: Arc<DomainChart>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values: Vec<f64> = chart.pos.iter().map(|p| f(p[0], p[1])).collect();
        let boundary: Vec<f64> = chart.b_pos.iter().map(|p| f(p[0], p[1])).collect();
        let out = ScalarField { chart, values, boundary: Some(boundary) };
        out.assert_finite();
        out
    }

    pub fn assert_finite(&self) {
        debug_assert!(self.values.iter().all(|v| v.is_finite()), "non-finite field value");
    }

    /// Boundary trace: stored ring if present, else cubic extrapolation to ρ=1.
    pub fn trace_samples(&self) -> Vec<f64> {
        if let Some(b) = &self.boundary {
            return b.clone();
        }
        extrapolate_trace(&self.chart, &self.values)
    }

    pub fn trace(&self) -> BoundarySeries {
        BoundarySeries::from_samples(&self.trace_samples(), self.chart.n_theta / 2 - 1)
    }

    /// ∂u/∂ρ and ∂u/∂θ by second-order finite differences.
    fn chart_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        chart_derivatives(&self.chart, &self.values, self.boundary.as_deref())
    }

    pub fn gradient(&self) -> VectorField {
        let (du_r, du_t) = self.chart_derivatives();
        let n = self.chart.n_nodes();
        let mut vx = vec![0.0; n];
        let mut vy = vec![0.0; n];
        for idx in 0..n {
            let it = &self.chart.inv_jac_t[idx];
            vx[idx] = it[0][0] * du_r[idx] + it[0][1] * du_t[idx];
            vy[idx] = it[1][0] * du_r[idx] + it[1][1] * du_t[idx];
        }
        VectorField { chart: self.chart.clone(), vx, vy, boundary: None, div_residual: None }
    }

    /// Hessian entries (xx, xy, yx, yy) as four scalar fields.
    pub fn hessian(&self) -> [ScalarField; 4] {
        let g = self.gradient();
        let gx = g.x_component();
        let gy = g.y_component();
        let ggx = gx.gradient();
        let ggy = gy.gradient();
        [
            ScalarField { chart: self.chart.clone(), values: ggx.vx, boundary: None },
            ScalarField { chart: self.chart.clone(), values: ggx.vy, boundary: None },
            ScalarField { chart: self.chart.clone(), values: ggy.vx, boundary: None },
            ScalarField { chart: self.chart.clone(), values: ggy.vy, boundary: None },
        ]
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            boundary: self.boundary.as_ref().map(|b| b.iter().map(|v| a * v).collect()),
        }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            boundary: match (&self.boundary, &other.boundary) {
                (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x + y).collect()),
                _ => None,
            },
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        let sq = ScalarField {
            chart: self.chart.clone(),
            values: self.values.iter().map(|v| v * v).collect(),
            boundary: None,
        };
        integrate_scalar(&sq, Region::Domain).max(0.0).sqrt()
    }
}

impl VectorField {
    pub fn zeros(chart: Arc<DomainChart>) -> Self {
        let n = chart.n_nodes();
        VectorField { chart, vx: vec![0.0; n], vy: vec![0.0; n], boundary: None, div_residual: None }
    }

    pub fn from_fn(chart: Arc<DomainChart>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = chart.n_nodes();
        let mut vx = vec![0.0; n];
        let mut vy = vec![0.0; n];
        for (idx, p) in chart.pos.iter().enumerate() {
            let v = f(p[0], p[1]);
            vx[idx] = v[0];
            vy[idx] = v[1];
        }
        let boundary = {
            let bx: Vec<f64> = chart.b_pos.iter().map(|p| f(p[0], p[1])[0]).collect();
            let by: Vec<f64> = chart.b_pos.iter().map(|p| f(p[0], p[1])[1]).collect();
            Some((bx, by))
        };
        VectorField { chart, vx, vy, boundary, div_residual: None }
    }

    pub fn x_component(&self) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.vx.clone(),
            boundary: self.boundary.as_ref().map(|(bx, _)| bx.clone()),
        }
    }

    pub fn y_component(&self) -> ScalarField {
        ScalarField {
            chart: self.chart.clone(),
            values: self.vy.clone(),
            boundary: self.boundary.as_ref().map(|(_, by)| by.clone()),
        }
    }

    pub fn divergence(&self) -> ScalarField {
        let gx = self.x_component().gradient();
        let gy = self.y_component().gradient();
        let values: Vec<f64> = gx.vx.iter().zip(&gy.vy).map(|(a, b)| a + b).collect();
        ScalarField { chart: self.chart.clone(), values, boundary: None }
    }

    /// Scalar curl ∂_x v_y − ∂_y v_x.
    pub fn curl2d(&self) -> ScalarField {
        let gx = self.x_component().gradient();
        let gy = self.y_component().gradient();
        let values: Vec<f64> = gy.vx.iter().zip(&gx.vy).map(|(a, b)| a - b).collect();
        ScalarField { chart: self.chart.clone(), values, boundary: None }
    }

    /// Full gradient tensor (∇v)_{mn} = ∂_n v_m as [dxvx, dyvx, dxvy, dyvy].
    pub fn gradient_tensor(&self) -> [Vec<f64>; 4] {
        let gx = self.x_component().gradient();
        let gy = self.y_component().gradient();
        [gx.vx, gx.vy, gy.vx, gy.vy]
    }

    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let values: Vec<f64> = (0..self.vx.len())
            .map(|i| self.vx[i] * other.vx[i] + self.vy[i] * other.vy[i])
            .collect();
        ScalarField { chart: self.chart.clone(), values, boundary: None }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            vx: self.vx.iter().zip(&other.vx).map(|(a, b)| a + b).collect(),
            vy: self.vy.iter().zip(&other.vy).map(|(a, b)| a + b).collect(),
            boundary: match (&self.boundary, &other.boundary) {
                (Some((ax, ay)), Some((bx, by))) => Some((
                    ax.iter().zip(bx).map(|(p, q)| p + q).collect(),
                    ay.iter().zip(by).map(|(p, q)| p + q).collect(),
                )),
                _ => None,
            },
            div_residual: None,
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            vx: self.vx.iter().map(|v| a * v).collect(),
            vy: self.vy.iter().map(|v| a * v).collect(),
            boundary: self.boundary.as_ref().map(|(bx, by)| {
                (bx.iter().map(|v| a * v).collect(), by.iter().map(|v| a * v).collect())
            }),
            div_residual: None,
        }
    }

    pub fn l2(&self) -> f64 {
        let sq = self.dot(self);
        integrate_scalar(&sq, Region::Domain).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.vx.len())
            .map(|i| (self.vx[i] * self.vx[i] + self.vy[i] * self.vy[i]).sqrt())
            .fold(0.0_f64, f64::max)
    }

    /// Boundary traces of both components (stored ring or extrapolated).
    pub fn trace_samples(&self) -> (Vec<f64>, Vec<f64>) {
        if let Some(b) = &self.boundary {
            return b.clone();
        }
        (
            extrapolate_trace(&self.chart, &self.vx),
            extrapolate_trace(&self.chart, &self.vy),
        )
    }

    /// Normal trace v·n on Γ.
    pub fn normal_trace(&self) -> BoundarySeries {
        let (bx, by) = self.trace_samples();
        let nt = self.chart.n_theta;
        let vals: Vec<f64> = (0..nt)
            .map(|j| {
                let n = self.chart.b_normal[j];
                bx[j] * n[0] + by[j] * n[1]
            })
            .collect();
        BoundarySeries::from_samples(&vals, nt / 2 - 1)
    }

    /// Tangential trace v·τ on Γ.
    pub fn tangent_trace(&self) -> BoundarySeries {
        let (bx, by) = self.trace_samples();
        let nt = self.chart.n_theta;
        let vals: Vec<f64> = (0..nt)
            .map(|j| {
                let t = self.chart.b_tangent[j];
                bx[j] * t[0] + by[j] * t[1]
            })
            .collect();
        BoundarySeries::from_samples(&vals, nt / 2 - 1)
    }
}

/// Directional derivative (B·∇)u for scalar u.
pub fn directional_scalar(b: &VectorField, u: &ScalarField) -> ScalarField {
    let g = u.gradient();
    let values: Vec<f64> = (0..u.values.len())
        .map(|i| b.vx[i] * g.vx[i] + b.vy[i] * g.vy[i])
        .collect();
    ScalarField { chart: u.chart.clone(), values, boundary: None }
}

/// Directional derivative (B·∇)u componentwise for vector u.
pub fn directional_vector(b: &VectorField, u: &VectorField) -> VectorField {
    let dx = directional_scalar(b, &u.x_component());
    let dy = directional_scalar(b, &u.y_component());
    VectorField {
        chart: u.chart.clone(),
        vx: dx.values,
        vy: dy.values,
        boundary: None,
        div_residual: None,
    }
}

/// Integration region selector.
pub enum Region<'a> {
    Domain,
    Boundary,
    BoundaryMasked(&'a [bool]),
}

/// Quadrature of a scalar field over the domain (chart area weights) for
/// Region::Domain; for boundary regions integrates the field's trace with
/// the curve element √(r²+r'²) dθ.
pub fn integrate_scalar(u: &ScalarField, region: Region) -> f64 {
    match region {
        Region::Domain => u
            .values
            .iter()
            .zip(&u.chart.area_weight)
            .map(|(v, w)| v * w)
            .sum(),
        Region::Boundary => {
            let tr = u.trace_samples();
            tr.iter().zip(&u.chart.b_len).map(|(v, l)| v * l).sum()
        }
        Region::BoundaryMasked(mask) => {
            let tr = u.trace_samples();
            tr.iter()
                .zip(&u.chart.b_len)
                .zip(mask)
                .map(|((v, l), &m)| if m { v * l } else { 0.0 })
                .sum()
        }
    }
}

/// Boundary quadrature of explicit samples with the curve element.
pub fn integrate_boundary_samples(chart: &DomainChart, vals: &[f64], mask: Option<&[bool]>) -> f64 {
    vals.iter()
        .zip(&chart.b_len)
        .enumerate()
        .map(|(j, (v, l))| match mask {
            Some(m) if !m[j] => 0.0,
            _ => v * l,
        })
        .sum()
}

/// Integer Sobolev norm by quadrature of all chain-ruled derivatives up to
/// order m (m ≤ 3 supported).
pub fn sobolev_norm_scalar(u: &ScalarField, m: usize) -> f64 {
    assert!(m <= 3, "integer Sobolev norms supported up to m = 3");
    let mut total = integrate_scalar(
        &ScalarField {
            chart: u.chart.clone(),
            values: u.values.iter().map(|v| v * v).collect(),
            boundary: None,
        },
        Region::Domain,
    );
    let mut layer: Vec<ScalarField> = vec![u.clone()];
    for _ in 1..=m {
        let mut next = Vec::new();
        for f in &layer {
            let g = f.gradient();
            next.push(g.x_component());
            next.push(g.y_component());
        }
        for f in &next {
            total += integrate_scalar(
                &ScalarField {
                    chart: u.chart.clone(),
                    values: f.values.iter().map(|v| v * v).collect(),
                    boundary: None,
                },
                Region::Domain,
            );
        }
        layer = next;
    }
    total.max(0.0).sqrt()
}

pub fn sobolev_norm_vector(v: &VectorField, m: usize) -> f64 {
    let nx = sobolev_norm_scalar(&v.x_component(), m);
    let ny = sobolev_norm_scalar(&v.y_component(), m);
    (nx * nx + ny * ny).sqrt()
}

/// Half-integer proxy (‖u‖_{H^m} ‖u‖_{H^{m+1}})^{1/2}.
pub fn fractional_proxy_scalar(u: &ScalarField, m: usize) -> f64 {
    (sobolev_norm_scalar(u, m) * sobolev_norm_scalar(u, m + 1)).sqrt()
}

pub fn fractional_proxy_vector(v: &VectorField, m: usize) -> f64 {
    (sobolev_norm_vector(v, m) * sobolev_norm_vector(v, m + 1)).sqrt()
}

/// Divergence-free projection v − ∇Δ⁻¹(∇·v).
///
/// The recorded residual is the L² distance to the discretely
/// divergence-free set, i.e. ‖∇Δ⁻¹(∇·v)‖_{L²(Ω)} — the norm of the
/// correction the projection would still apply. This metric is exactly
/// paired with the projector (elliptic smoothing suppresses the
/// sub-representation aliasing that a pointwise divergence norm retains),
/// so the loop contracts geometrically.
pub fn div_free_projection(
    v: &VectorField,
    ws: &EllipticWorkspace,
    tol_div: f64,
    max_passes: usize,
) -> Result<VectorField> {
    let mut cur = v.clone();
    let scale = 1.0 + v.l2();
    for _ in 0..max_passes {
        let (dist, grad) = div_distance(&cur, ws)?;
        cur.div_residual = Some(dist);
        if dist <= tol_div * scale {
            return Ok(cur);
        }
        cur = cur.sub(&grad);
        cur.div_residual = Some(dist);
    }
    let (dist, _) = div_distance(&cur, ws)?;
    cur.div_residual = Some(dist);
    Ok(cur)
}

/// L² distance of v to the discretely divergence-free fields, together with
/// the realizing correction gradient.
pub fn div_distance(v: &VectorField, ws: &EllipticWorkspace) -> Result<(f64, VectorField)> {
    let div = ws.smooth_divergence(v);
    let (_, grad) = ws.poisson_dirichlet_gradient(&div, &BoundarySeries::zero(1))?;
    let dist = integrate_scalar(&grad.dot(&grad), Region::Domain).max(0.0).sqrt();
    Ok((dist, grad))
}

/// Rotational/irrotational split of a (divergence-free) field:
/// irrot = ∇H N⁻¹(v_div·n), rot = v_div − irrot.
pub struct HodgeSplit {
    pub rot: VectorField,
    pub irrot: VectorField,
}

pub fn hodge_split(
    v: &VectorField,
    ws: &EllipticWorkspace,
    tol_div: f64,
) -> Result<HodgeSplit> {
    let vdiv = div_free_projection(v, ws, tol_div, 8)?;
    let vn = vdiv.normal_trace();
    // a noise-level normal trace means the field is already rotational;
    // the Neumann solve's mean precondition is meaningless at that scale
    if ws.boundary_norm(&vn) <= 1e-13 * (1.0 + vdiv.l2()) {
        let irrot = VectorField::zeros(ws.chart.clone());
        return Ok(HodgeSplit { rot: vdiv, irrot });
    }
    let g = ws.dtn_inverse(&vn)?;
    let zero = ScalarField::zeros(ws.chart.clone());
    let (_, irrot) = ws.poisson_dirichlet_gradient(&zero, &g)?;
    let rot = vdiv.sub(&irrot);
    Ok(HodgeSplit { rot, irrot })
}

/// Cubic-extrapolated boundary trace of node values.
pub fn extrapolate_trace(chart: &DomainChart, values: &[f64]) -> Vec<f64> {
    extrapolate_trace_offset(chart, values, 0)
}

/// Cubic extrapolation to ρ = 1 from rings starting `skip` rings inside the
/// outermost one (derived fields built from nested one-sided stencils are
/// rough on the outer rings; skipping them restores the interior order).
pub fn extrapolate_trace_offset(chart: &DomainChart, values: &[f64], skip: usize) -> Vec<f64> {
    let (nr, nt) = (chart.n_r, chart.n_theta);
    let mut out = vec![0.0; nt];
    for j in 0..nt {
        let pts: Vec<(f64, f64)> = (0..4)
            .map(|m| {
                let i = nr - 1 - skip - m;
                (chart.rho[i], values[i * nt + j])
            })
            .collect();
        out[j] = lagrange_eval(&pts, 1.0);
    }
    out
}

fn lagrange_eval(pts: &[(f64, f64)], x: f64) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for m in 0..n {
        let mut w = pts[m].1;
        for p in 0..n {
            if p != m {
                w *= (x - pts[p].0) / (pts[m].0 - pts[p].0);
            }
        }
        acc += w;
    }
    acc
}

/// ∂/∂ρ and ∂/∂θ of node values. The θ-derivative is spectral (the grid is
/// uniform periodic, so band-limited rows differentiate exactly); the
/// ρ-derivative uses centered second-order stencils inside, one-sided at the
/// first ring, and the boundary trace at the last ring when available.
pub fn chart_derivatives(
    chart: &DomainChart,
    values: &[f64],
    boundary: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>) {
    let (nr, nt) = (chart.n_r, chart.n_theta);
    let h = chart.h_r;
    let n = nr * nt;
    let mut du_r = vec![0.0; n];
    let mut du_t = vec![0.0; n];
    for i in 0..nr {
        let row = &values[i * nt..(i + 1) * nt];
        let drow = spectral_theta_derivative(row);
        du_t[i * nt..(i + 1) * nt].copy_from_slice(&drow);
        for j in 0..nt {
            let idx = i * nt + j;
            du_r[idx] = if i == 0 {
                // one-sided second order: (-3u0 + 4u1 - u2)/(2h)
                (-3.0 * values[idx] + 4.0 * values[nt + j] - values[2 * nt + j]) / (2.0 * h)
            } else if i == nr - 1 {
                match boundary {
                    Some(b) => {
                        // nodes at 1−3h/2, 1−h/2 and boundary value at 1:
                        // derivative of the quadratic through them at ρ = 1−h/2
                        let pts = [
                            (chart.rho[nr - 2], values[(nr - 2) * nt + j]),
                            (chart.rho[nr - 1], values[idx]),
                            (1.0, b[j]),
                        ];
                        quad_derivative_at(&pts, chart.rho[nr - 1])
                    }
                    None => {
                        (3.0 * values[idx] - 4.0 * values[(nr - 2) * nt + j]
                            + values[(nr - 3) * nt + j])
                            / (2.0 * h)
                    }
                }
            } else {
                (values[(i + 1) * nt + j] - values[(i - 1) * nt + j]) / (2.0 * h)
            };
        }
    }
    (du_r, du_t)
}

/// Spectral d/dθ of one periodic row of samples.
pub fn spectral_theta_derivative(row: &[f64]) -> Vec<f64> {
    let n = row.len();
    let spec = crate::series::dft_forward(row);
    let mut dspec = vec![crate::complex::Complex64::new(0.0, 0.0); n];
    for (k, d) in dspec.iter_mut().enumerate() {
        // wavenumber with the Nyquist mode zeroed (its derivative is
        // ill-defined on the real grid)
        let kk = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        let kk = if 2 * k == n { 0 } else { kk };
        let c = spec[k];
        *d = crate::complex::Complex64::new(-kk as f64 * c.im, kk as f64 * c.re);
    }
    crate::series::dft_inverse(&dspec)
        .into_iter()
        .map(|c| c.re / n as f64)
        .collect()
}

fn quad_derivative_at(pts: &[(f64, f64); 3], x: f64) -> f64 {
    let mut acc = 0.0;
    for m in 0..3 {
        let mut denom = 1.0;
        let mut dsum = 0.0;
        for p in 0..3 {
            if p != m {
                denom *= pts[m].0 - pts[p].0;
            }
        }
        for q in 0..3 {
            if q == m {
                continue;
            }
            let mut prod = 1.0;
            for p in 0..3 {
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

/// Sample a grid field at arbitrary chart coordinates of its own chart by
/// bicubic (Catmull-Rom style Lagrange) interpolation; ρ beyond the node
/// range uses one-sided cubics, and ρ > 1 evaluates the boundary cubic at
/// ρ = 1 (constant radial extension).
pub fn sample_chart(
    chart: &DomainChart,
    values: &[f64],
    rho: f64,
    theta: f64,
    clamp_to_trace: bool,
) -> f64 {
    let (nr, nt) = (chart.n_r, chart.n_theta);
    let ht = chart.h_theta;
    let th = theta.rem_euclid(2.0 * PI);
    let jf = th / ht;
    let j0 = jf.floor() as i64;
    // four θ columns j0-1..j0+2 (periodic)
    let cols: [usize; 4] = [
        ((j0 - 1).rem_euclid(nt as i64)) as usize,
        (j0.rem_euclid(nt as i64)) as usize,
        ((j0 + 1).rem_euclid(nt as i64)) as usize,
        ((j0 + 2).rem_euclid(nt as i64)) as usize,
    ];
    let rho_eval = if clamp_to_trace { rho.min(1.0) } else { rho };
    // radial stencil: centered on rho, clamped to [0, nr-4]; near ρ=1 the
    // stencil automatically becomes one-sided.
    let fi = rho_eval / chart.h_r - 0.5;
    let mut i0 = fi.floor() as i64 - 1;
    i0 = i0.clamp(0, nr as i64 - 4);
    let i0 = i0 as usize;
    let mut col_vals = [0.0; 4];
    for (c, &jc) in cols.iter().enumerate() {
        let pts: Vec<(f64, f64)> = (0..4)
            .map(|m| (chart.rho[i0 + m], values[(i0 + m) * nt + jc]))
            .collect();
        col_vals[c] = lagrange_eval(&pts, rho_eval);
    }
    let th_pts: Vec<(f64, f64)> = (0..4)
        .map(|m| ((j0 - 1 + m as i64) as f64 * ht, col_vals[m]))
        .collect();
    lagrange_eval(&th_pts, th)
}

/// Transfer a scalar field onto another chart. Destination nodes outside the
/// source domain use constant radial extension from the boundary ring; more
/// than one source radial cell outside is an error.
pub fn transfer_scalar(
    u: &ScalarField,
    dst: &Arc<DomainChart>,
) -> Result<ScalarField> {
    let src = &u.chart;
    let mut values = vec![0.0; dst.n_nodes()];
    for (idx, p) in dst.pos.iter().enumerate() {
        let (rho, th) = src.chart_coords(p[0], p[1]);
        if rho > 1.0 + src.h_r {
            return Err(Error::ExtrapolationTooFar {
                overshoot: (rho - 1.0) * src.surface.radius(th),
                max_allowed: src.h_r * src.surface.radius(th),
            });
        }
        values[idx] = sample_chart(src, &u.values, rho, th, true);
    }
    // boundary ring of the destination
    let mut b = vec![0.0; dst.n_theta];
    for (j, p) in dst.b_pos.iter().enumerate() {
        let (rho, th) = src.chart_coords(p[0], p[1]);
        if rho > 1.0 + src.h_r {
            return Err(Error::ExtrapolationTooFar {
                overshoot: (rho - 1.0) * src.surface.radius(th),
                max_allowed: src.h_r * src.surface.radius(th),
            });
        }
        b[j] = sample_chart(src, &u.values, rho, th, true);
    }
    Ok(ScalarField { chart: dst.clone(), values, boundary: Some(b) })
}

pub fn transfer_vector(v: &VectorField, dst: &Arc<DomainChart>) -> Result<VectorField> {
    let fx = transfer_scalar(&v.x_component(), dst)?;
    let fy = transfer_scalar(&v.y_component(), dst)?;
    Ok(VectorField {
        chart: dst.clone(),
        vx: fx.values,
        vy: fy.values,
        boundary: match (fx.boundary, fy.boundary) {
            (Some(bx), Some(by)) => Some((bx, by)),
            _ => None,
        },
        div_residual: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{build_surface, DomainChart};

    fn disk(n: usize) -> Arc<DomainChart> {
        let s = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
        Arc::new(DomainChart::build(s, n, n))
    }

    fn perturbed(n: usize) -> Arc<DomainChart> {
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        Arc::new(DomainChart::build(s, n, n))
    }

    #[test]
    fn gradient_of_linear_function() {
        let chart = perturbed(32);
        let u = ScalarField::from_fn(chart, |x, _| x);
        let g = u.gradient();
        for i in 0..g.vx.len() {
            assert!((g.vx[i] - 1.0).abs() < 1e-10, "{}", g.vx[i]);
            assert!(g.vy[i].abs() < 1e-10);
        }
    }

    #[test]
    fn rigid_rotation_curl_and_div() {
        let chart = perturbed(32);
        let v = VectorField::from_fn(chart, |x, y| [-y, x]);
        let curl = v.curl2d();
        let div = v.divergence();
        assert!(curl.values.iter().all(|c| (c - 2.0).abs() < 1e-9));
        assert!(div.values.iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn hessian_of_x_squared() {
        let chart = disk(48);
        let u = ScalarField::from_fn(chart, |x, _| x * x);
        let h = u.hessian();
        // away from the innermost rings the nested one-sided stencils are clean
        let nt = 48;
        for i in 4..44 {
            for j in 0..nt {
                let idx = i * nt + j;
                assert!((h[0].values[idx] - 2.0).abs() < 1e-7, "{}", h[0].values[idx]);
                assert!(h[3].values[idx].abs() < 1e-7);
            }
        }
    }

    #[test]
    fn directional_examples() {
        let chart = disk(32);
        let b = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let u = ScalarField::from_fn(chart.clone(), |x, _| x);
        let d = directional_scalar(&b, &u);
        for (idx, p) in chart.pos.iter().enumerate() {
            assert!((d.values[idx] + p[1]).abs() < 1e-9);
        }
        // (B·∇)B for rigid rotation = −(x, y)
        let dbb = directional_vector(&b, &b);
        for (idx, p) in chart.pos.iter().enumerate() {
            assert!((dbb.vx[idx] + p[0]).abs() < 1e-9);
            assert!((dbb.vy[idx] + p[1]).abs() < 1e-9);
        }
        // zero field
        let z = VectorField::zeros(chart.clone());
        let dz = directional_vector(&z, &b);
        assert!(dz.max_abs() < 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let chart = disk(128);
        let one = ScalarField::from_fn_with_boundary(chart.clone(), |_, _| 1.0);
        assert!((integrate_scalar(&one, Region::Domain) - PI).abs() / PI <= 1e-8);
        assert!((integrate_scalar(&one, Region::Boundary) - 2.0 * PI).abs() / (2.0 * PI) <= 1e-10);
        let bsq = ScalarField::from_fn(chart, |x, y| x * x + y * y);
        assert!((integrate_scalar(&bsq, Region::Domain) - PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn sobolev_norm_of_constant() {
        let chart = disk(64);
        let c = ScalarField::from_fn_with_boundary(chart, |_, _| 2.0);
        for m in 0..=3 {
            let n = sobolev_norm_scalar(&c, m);
            assert!((n - 2.0 * PI.sqrt()).abs() < 2e-4, "m={m}: {n}");
        }
        let f = fractional_proxy_scalar(&c, 1);
        assert!((f * f - sobolev_norm_scalar(&c, 1) * sobolev_norm_scalar(&c, 2)).abs() < 1e-12);
    }

    #[test]
    fn divergence_theorem() {
        let chart = perturbed(64);
        let v = VectorField::from_fn(chart.clone(), |x, y| {
            [x * x + 0.3 * y, y + 0.1 * (x * y)]
        });
        let div_int = integrate_scalar(&v.divergence(), Region::Domain);
        let flux = integrate_boundary_samples(
            &chart,
            &{
                let (bx, by) = v.trace_samples();
                (0..chart.n_theta)
                    .map(|j| bx[j] * chart.b_normal[j][0] + by[j] * chart.b_normal[j][1])
                    .collect::<Vec<f64>>()
            },
            None,
        );
        assert!((div_int - flux).abs() < 2e-4, "{div_int} vs {flux}");
    }

    #[test]
    fn transfer_identity_and_constants() {
        let chart = perturbed(48);
        let u = ScalarField::from_fn(chart.clone(), |x, y| (2.0 * x).sin() * (1.5 * y).cos());
        let back = transfer_scalar(&u, &chart).unwrap();
        let err: f64 = u
            .values
            .iter()
            .zip(&back.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "identity transfer error {err:.3e}");
        let c = ScalarField::from_fn(chart.clone(), |_, _| 4.0);
        let cb = transfer_scalar(&c, &chart).unwrap();
        assert!(cb.values.iter().all(|&v| (v - 4.0).abs() < 1e-13));
    }

    #[test]
    fn transfer_linear_to_shrunk_disk() {
        let src = disk(48);
        let s2 = build_surface(BoundarySeries::constant(-0.1, 4), 0.3).unwrap();
        let dst = Arc::new(DomainChart::build(s2, 48, 48));
        let u = ScalarField::from_fn(src, |x, _| x);
        let t = transfer_scalar(&u, &dst).unwrap();
        for (idx, p) in dst.pos.iter().enumerate() {
            assert!((t.values[idx] - p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn hodge_split_examples() {
        use crate::elliptic::EllipticWorkspace;
        let chart = disk(48);
        let ws = EllipticWorkspace::new(chart.clone(), 1e-11, 4000);
        // rigid rotation is tangent: rot = v, irrot = 0
        let v = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
        let split = hodge_split(&v, &ws, 1e-9).unwrap();
        assert!(split.irrot.max_abs() < 1e-8, "{}", split.irrot.max_abs());
        assert!(split.rot.sub(&v).max_abs() < 1e-7);
        // constant field is a harmonic gradient: irrot = v, rot = 0
        let c = VectorField::from_fn(chart.clone(), |_, _| [1.0, 0.0]);
        let split = hodge_split(&c, &ws, 1e-9).unwrap();
        assert!(split.rot.l2() < 1e-6, "{}", split.rot.l2());
        assert!(split.irrot.sub(&c).l2() < 1e-6);
        // zero in, zero out
        let z = VectorField::zeros(chart.clone());
        let split = hodge_split(&z, &ws, 1e-9).unwrap();
        assert!(split.rot.max_abs() < 1e-12 && split.irrot.max_abs() < 1e-12);
        // idempotence: splitting rot again returns (rot, ~0)
        let v2 = VectorField::from_fn(chart.clone(), |x, y| {
            [-y + 0.3 * (2.0 * y - 4.0 * y * y * y), x + 0.3 * (2.0 * x - 4.0 * x * x * x)]
        });
        let s1 = hodge_split(&v2, &ws, 1e-9).unwrap();
        let s2 = hodge_split(&s1.rot, &ws, 1e-9).unwrap();
        assert!(s2.irrot.l2() <= 1e-6, "{}", s2.irrot.l2());
        // rot stays tangent
        assert!(ws.boundary_norm(&s1.rot.normal_trace()) < 1e-7);
    }

    #[test]
    fn curl_of_gradient_decays_under_refinement() {
        // second-order decay away from the pole; near the pole the 1/ρ
        // chain-rule factor costs one order, so the global sup decays at
        // first order — both refinement-decaying
        let mut bulk = Vec::new();
        let mut global = Vec::new();
        for n in [32usize, 64] {
            let chart = perturbed(n);
            let u = ScalarField::from_fn(chart, |x, y| (1.3 * x).sin() * (0.8 * y).cos());
            let curl = u.gradient().curl2d();
            let nt = curl.chart.n_theta;
            let mut worst_bulk = 0.0_f64;
            let mut worst_all = 0.0_f64;
            for i in 0..curl.chart.n_r {
                for j in 0..nt {
                    let v = curl.values[i * nt + j].abs();
                    worst_all = worst_all.max(v);
                    if i >= n / 4 && i < curl.chart.n_r - 3 {
                        worst_bulk = worst_bulk.max(v);
                    }
                }
            }
            bulk.push(worst_bulk);
            global.push(worst_all);
        }
        assert!(bulk[0] / bulk[1] >= 3.0, "bulk curl(grad) errors {bulk:?}");
        assert!(global[0] / global[1] >= 1.8, "global curl(grad) errors {global:?}");
    }

    #[test]
    fn directional_derivative_is_skew_adjoint_under_refinement() {
        use crate::elliptic::EllipticWorkspace;
        // ⟨∇_B f, g⟩ + ⟨f, ∇_B g⟩ → 0 for div-free tangent B
        let mut defects = Vec::new();
        for n in [32usize, 64] {
            let chart = disk(n);
            let _ws = EllipticWorkspace::new(chart.clone(), 1e-10, 2000);
            let b = VectorField::from_fn(chart.clone(), |x, y| {
                [-y + 2.0 * y - 4.0 * y * y * y, x + 2.0 * x - 4.0 * x * x * x]
            });
            let f = ScalarField::from_fn(chart.clone(), |x, y| (x + 0.5 * y).sin());
            let g = ScalarField::from_fn(chart.clone(), |x, y| (0.7 * x - y).cos());
            let bf = directional_scalar(&b, &f);
            let bg = directional_scalar(&b, &g);
            let prod1: Vec<f64> = bf.values.iter().zip(&g.values).map(|(a, b)| a * b).collect();
            let prod2: Vec<f64> = f.values.iter().zip(&bg.values).map(|(a, b)| a * b).collect();
            let p1 = ScalarField { chart: chart.clone(), values: prod1, boundary: None };
            let p2 = ScalarField { chart: chart.clone(), values: prod2, boundary: None };
            let defect =
                (integrate_scalar(&p1, Region::Domain) + integrate_scalar(&p2, Region::Domain)).abs();
            defects.push(defect);
        }
        assert!(defects[1] < defects[0], "defects {defects:?}");
        assert!(defects[1] < 2e-3, "defects {defects:?}");
    }

    #[test]
    fn transfer_too_far_errors() {
        let src = disk(16);
        let s2 = build_surface(BoundarySeries::constant(0.2, 4), 0.3).unwrap();
        let dst = Arc::new(DomainChart::build(s2, 16, 16));
        let u = ScalarField::from_fn(src, |x, _| x);
        assert!(matches!(
            transfer_scalar(&u, &dst),
            Err(Error::ExtrapolationTooFar { .. })
        ));
    }
}
