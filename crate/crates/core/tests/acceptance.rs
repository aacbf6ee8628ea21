//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured quantities at the stated tolerances.

use fbmhd::elliptic::EllipticWorkspace;
use fbmhd::field::{ScalarField, VectorField};
use fbmhd::functionals::{distance, higher_energy};
use fbmhd::oracle::{self, SplitMix64};
use fbmhd::regularize::LxSystem;
use fbmhd::series::BoundarySeries;
use fbmhd::state::{assemble, MhdState, StateConfig};
use fbmhd::stepper::{run, self_convergence, step, StepConfig};
use fbmhd::surface::{build_surface, DomainChart};
use std::f64::consts::PI;
use std::sync::Arc;

fn disk_ws(n: usize) -> EllipticWorkspace {
    let s = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(s, n, n));
    EllipticWorkspace::new(chart, 1e-10, 4000)
}

fn run_cfg(n: usize, eps: f64) -> StepConfig {
    StepConfig {
        epsilon: eps,
        n_r: n,
        n_theta: n,
        track_higher_energy: false,
        ..Default::default()
    }
}

fn verdict(number: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {:>2} ({name}): {} — {detail}",
        number,
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} failed: {detail}");
}

/// 1. Disk DtN spectrum: ‖N(cos kθ) − k cos kθ‖_∞ / k ≤ 1e−3 for k = 1..8
///    at 128²; ≤ 10 s.
#[test]
fn criterion_01_dtn_spectrum() {
    let t0 = std::time::Instant::now();
    let ws = disk_ws(128);
    let mut worst = 0.0_f64;
    for k in 1..=8usize {
        let g = BoundarySeries::cosine(1.0, k, 10);
        let ng = ws.dtn(&g).unwrap();
        let mut err = 0.0_f64;
        for j in 0..512 {
            let th = 2.0 * PI * j as f64 / 512.0;
            err = err.max((ng.eval(th) - k as f64 * (k as f64 * th).cos()).abs());
        }
        worst = worst.max(err / k as f64);
    }
    let elapsed = t0.elapsed();
    verdict(
        1,
        "dtn spectrum",
        worst <= 1e-3 && elapsed.as_secs() <= 10,
        &format!("worst relative error {worst:.3e} (≤ 1e-3), {elapsed:.2?} (≤ 10 s)"),
    );
}

/// 2. Manufactured Poisson on η = 0.1cos2θ: observed order ≥ 1.8 over
///    n ∈ {32, 64, 128}; ≤ 30 s.
#[test]
fn criterion_02_elliptic_convergence() {
    let t0 = std::time::Instant::now();
    let reference = oracle::manufactured_poisson("r3_cos3_plus_r2").unwrap();
    let mut errs = Vec::new();
    for n in [32usize, 64, 128] {
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        let chart = Arc::new(DomainChart::build(s, n, n));
        let ws = EllipticWorkspace::new(chart.clone(), 1e-12, 4000);
        let (f, g) = oracle::manufactured_data(&reference, &chart);
        let u = ws.poisson_dirichlet(&f, &g).unwrap();
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for (idx, p) in chart.pos.iter().enumerate() {
            let exact = (reference.u)(p[0], p[1]);
            num += (u.values[idx] - exact).powi(2) * chart.area_weight[idx];
            den += exact * exact * chart.area_weight[idx];
        }
        errs.push((num / den).sqrt());
    }
    let order = (errs[0] / errs[2]).log2() / 2.0;
    let elapsed = t0.elapsed();
    verdict(
        2,
        "elliptic convergence",
        order >= 1.8 && elapsed.as_secs() <= 30,
        &format!("relative L2 errors {errs:?}, observed order {order:.2} (>= 1.8), {elapsed:.2?}"),
    );
}

/// 3. Magnetic-rotor equilibrium: P and a to relative 1e−5 at 128²; a run
///    with T = 1, ε = 1e−2 keeps ‖v‖_{L²} ≤ 1e−4 and boundary displacement
///    ≤ 1e−4; ≤ 2 min.
#[test]
fn criterion_03_rotor_equilibrium() {
    let t0 = std::time::Instant::now();
    let n = 128;
    let c = 1.0;
    let (surface, v, b, reference) = oracle::equilibrium_rotor(c, n, n);
    let state = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
    let mut p_err = 0.0_f64;
    for (idx, p) in state.chart.pos.iter().enumerate() {
        p_err = p_err.max((state.pressure.values[idx] - (reference.u)(p[0], p[1])).abs());
    }
    let p_rel = p_err / (0.5 * c * c);
    let mut a_err = 0.0_f64;
    for j in 0..512 {
        let th = 2.0 * PI * j as f64 / 512.0;
        a_err = a_err.max((state.a.eval(th) - c * c).abs());
    }
    let a_rel = a_err / (c * c);

    let log = run(state, 1.0, &run_cfg(n, 1e-2));
    let completed = log.completed();
    let final_state = log.final_state.as_ref().unwrap();
    let v_l2 = final_state.v.l2();
    let disp = final_state.chart.surface.eta.sup_norm(512);
    let elapsed = t0.elapsed();
    verdict(
        3,
        "rotor equilibrium",
        p_rel <= 1e-5 && a_rel <= 1e-5 && completed && v_l2 <= 1e-4 && disp <= 1e-4
            && elapsed.as_secs() <= 120,
        &format!(
            "P rel {p_rel:.3e}, a rel {a_rel:.3e} (≤ 1e-5); after T=1: ‖v‖ {v_l2:.3e}, \
             boundary sup {disp:.3e} (≤ 1e-4), {elapsed:.2?}"
        ),
    );
}

/// 4. Taylor-sign rejection on rigid fluid rotation; ≤ 1 s.
#[test]
fn criterion_04_taylor_rejection() {
    let t0 = std::time::Instant::now();
    let (surface, v, b) = oracle::taylor_violating_rotation(1.0, 48, 48);
    let result = assemble(surface, &v, &b, 48, 48, &StateConfig::default());
    let rejected = matches!(result, Err(fbmhd::Error::TaylorSignViolation { .. }));
    let elapsed = t0.elapsed();
    verdict(
        4,
        "taylor rejection",
        rejected && elapsed.as_secs() < 1,
        &format!("rigid rotation rejected with TaylorSignViolation, {elapsed:.2?} (≤ 1 s)"),
    );
}

/// 5. Constraint preservation over a 50-step perturbed-rotor run:
///    ‖B·n‖_{L²(Γ)} ≤ 1e−8·(1+‖B‖) and divergence residuals ≤ 1e−8 in
///    every StepReport; ≤ 2 min.
#[test]
fn criterion_05_constraint_preservation() {
    let t0 = std::time::Instant::now();
    let n = 64;
    let (surface, v, b, _) = oracle::perturbed_rotor(1.0, 0.05, n, n);
    let state = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
    let b_norm = state.b.l2();
    let log = run(state, 0.25, &run_cfg(n, 5e-3));
    let completed = log.completed() && log.reports.len() == 50;
    let mut worst_tan = 0.0_f64;
    let mut worst_div = 0.0_f64;
    for r in &log.reports {
        worst_tan = worst_tan.max(r.tangency_residual);
        worst_div = worst_div.max(r.div_residual_v).max(r.div_residual_b);
    }
    let tan_bound = 1e-8 * (1.0 + b_norm);
    let elapsed = t0.elapsed();
    verdict(
        5,
        "constraint preservation",
        completed && worst_tan <= tan_bound && worst_div <= 1e-8 && elapsed.as_secs() <= 120,
        &format!(
            "50 steps: worst ‖B·n‖ {worst_tan:.3e} (≤ {tan_bound:.3e}), worst div \
             {worst_div:.3e} (≤ 1e-8), {elapsed:.2?}"
        ),
    );
}

/// 6. Energy near-conservation: perturbed rotor (5% mode-2 velocity),
///    T = 0.5: drift(ε)/drift(ε/2) ∈ [1.3, 3] for ε = 2e−2; ≤ 5 min.
#[test]
fn criterion_06_energy_drift_scaling() {
    let t0 = std::time::Instant::now();
    let n = 64;
    let mut drifts = Vec::new();
    for eps in [2e-2, 1e-2] {
        let (surface, v, b, _) = oracle::perturbed_rotor(1.0, 0.05, n, n);
        let state = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
        let e0 = state.total_energy();
        let log = run(state, 0.5, &run_cfg(n, eps));
        assert!(log.completed(), "run at eps={eps} halted: {:?}", log.halt_reason);
        let ef = log.final_state.as_ref().unwrap().total_energy();
        drifts.push((ef - e0).abs() / e0);
    }
    let ratio = drifts[0] / drifts[1];
    let elapsed = t0.elapsed();
    verdict(
        6,
        "energy drift scaling",
        (1.3..=3.0).contains(&ratio) && elapsed.as_secs() <= 300,
        &format!(
            "drift(ε) {:.3e}, drift(ε/2) {:.3e}, ratio {ratio:.2} (∈ [1.3, 3]), {elapsed:.2?}",
            drifts[0], drifts[1]
        ),
    );
}

/// 7. Vorticity dichotomy: the B = 0 irrotational run keeps max|ω| ≤ 1e−6
///    over T = 0.5; the B ≠ 0 perturbed rotor exceeds 1e−4; ≤ 5 min.
#[test]
fn criterion_07_vorticity_dichotomy() {
    let t0 = std::time::Instant::now();
    // Euler side at 128² (noise floor scales with resolution)
    let n_euler = 128;
    let (surface, v, b) = oracle::irrotational_pulse(0.05, n_euler, n_euler);
    let state = assemble(surface, &v, &b, n_euler, n_euler, &StateConfig::default()).unwrap();
    let log = run(state, 0.5, &run_cfg(n_euler, 2e-2));
    assert!(log.completed(), "euler run halted: {:?}", log.halt_reason);
    let omega_euler = log.final_state.as_ref().unwrap().v.curl2d().max_abs();

    // MHD side: rotor + irrotational pulse + tangential magnetic
    // perturbation carrying non-constant current (ω_v(0) = 0)
    let n_mhd = 64;
    let (surface, v, b) = oracle::magnetically_perturbed_rotor(1.0, 0.05, 0.02, n_mhd, n_mhd);
    let state = assemble(surface, &v, &b, n_mhd, n_mhd, &StateConfig::default()).unwrap();
    let omega0 = state.v.curl2d().max_abs();
    let log = run(state, 0.5, &run_cfg(n_mhd, 1e-2));
    assert!(log.completed(), "mhd run halted: {:?}", log.halt_reason);
    let omega_mhd = log.final_state.as_ref().unwrap().v.curl2d().max_abs();
    let elapsed = t0.elapsed();
    verdict(
        7,
        "vorticity dichotomy",
        omega_euler <= 1e-6 && omega_mhd >= 1e-4 && omega0 < 1e-10 && elapsed.as_secs() <= 300,
        &format!(
            "euler max|ω(T)| {omega_euler:.3e} (≤ 1e-6); mhd ω_v(0) {omega0:.1e} → \
             max|ω_v(T)| {omega_mhd:.3e} (≥ 1e-4), {elapsed:.2?}"
        ),
    );
}

/// 8. L_X discrete energy identity on 20 random fields:
///    |‖u‖² − ‖uε‖² − 2ε²‖S²uε‖² − ε⁴‖S⁴uε‖²| ≤ 100·tol_elliptic·‖u‖²; ≤ 1 min.
#[test]
fn criterion_08_lx_energy_identity() {
    let t0 = std::time::Instant::now();
    let s = build_surface(BoundarySeries::zero(4), 0.3).unwrap();
    let chart = Arc::new(DomainChart::build(s, 32, 32));
    let x_field = VectorField::from_fn(chart.clone(), |x, y| [-y, x]);
    let sys = LxSystem::new(x_field, 0.05);
    let tol_elliptic = 1e-10;
    let mut rng = SplitMix64::new(0xACCE97);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let u: ScalarField = rng.scalar_field(&chart, 1.0);
        let ue = sys.solve(&u, tol_elliptic, 30000).unwrap();
        let res = sys.energy_identity_residual(&u, &ue).abs();
        let bound = 100.0 * tol_elliptic * u.l2().powi(2);
        worst = worst.max(res / bound);
    }
    let elapsed = t0.elapsed();
    verdict(
        8,
        "lx energy identity",
        worst <= 1.0 && elapsed.as_secs() <= 60,
        &format!("worst residual / bound {worst:.3e} (≤ 1), {elapsed:.2?} (≤ 1 min)"),
    );
}

/// 9. DtN Leibniz identity residual decreases ≥ 2.5× under grid doubling
///    for 5 random band-limited pairs on a perturbed domain; ≤ 2 min.
#[test]
fn criterion_09_dtn_leibniz() {
    let t0 = std::time::Instant::now();
    let mut rng = SplitMix64::new(0xFEED);
    let mut pairs = Vec::new();
    for _ in 0..5 {
        pairs.push((rng.boundary_fn(6, 1.0), rng.boundary_fn(6, 1.0)));
    }
    let mut residuals = Vec::new();
    for n in [32usize, 64] {
        let s = build_surface(BoundarySeries::cosine(0.1, 2, 8), 0.4).unwrap();
        let chart = Arc::new(DomainChart::build(s, n, n));
        let ws = EllipticWorkspace::new(chart.clone(), 1e-11, 4000);
        let nt = chart.n_theta;
        let mut errs = Vec::new();
        for (f, g) in &pairs {
            let fg_vals: Vec<f64> = (0..nt)
                .map(|j| f.eval(chart.theta[j]) * g.eval(chart.theta[j]))
                .collect();
            let fg = BoundarySeries::from_samples(&fg_vals, nt / 2 - 1);
            let n_fg = ws.dtn(&fg).unwrap();
            let nf = ws.dtn(f).unwrap();
            let ng = ws.dtn(g).unwrap();
            let hf = ws.harmonic_extension(f).unwrap();
            let hg = ws.harmonic_extension(g).unwrap();
            let dot = hf.gradient().dot(&hg.gradient());
            let (_, flux) = ws.poisson_dirichlet_flux(&dot, &BoundarySeries::zero(2)).unwrap();
            let res_vals: Vec<f64> = (0..nt)
                .map(|j| {
                    let th = chart.theta[j];
                    n_fg.eval(th)
                        - (f.eval(th) * ng.eval(th) + g.eval(th) * nf.eval(th)
                            - 2.0 * flux.eval(th))
                })
                .collect();
            let res = BoundarySeries::from_samples(&res_vals, nt / 2 - 1);
            errs.push(ws.boundary_norm(&res));
        }
        residuals.push(errs);
    }
    let mut min_ratio = f64::MAX;
    for p in 0..5 {
        min_ratio = min_ratio.min(residuals[0][p] / residuals[1][p]);
    }
    let elapsed = t0.elapsed();
    verdict(
        9,
        "dtn leibniz identity",
        min_ratio >= 2.5 && elapsed.as_secs() <= 120,
        &format!("smallest halving ratio over 5 pairs {min_ratio:.2} (≥ 2.5), {elapsed:.2?}"),
    );
}

/// 10. Curvature–pressure identity residual decreases ≥ 2.5× under grid
///     doubling on the boundary-perturbed rotor; ≤ 1 min.
#[test]
fn criterion_10_curvature_pressure() {
    let t0 = std::time::Instant::now();
    let mut residuals = Vec::new();
    for n in [32usize, 64] {
        let (surface, v, b) = oracle::perturbed_boundary_rotor(1.0, 0.05, n, n);
        let st = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
        residuals.push(st.curvature_pressure_residual());
    }
    let ratio = residuals[0] / residuals[1];
    let elapsed = t0.elapsed();
    verdict(
        10,
        "curvature-pressure identity",
        ratio >= 2.5 && elapsed.as_secs() <= 60,
        &format!(
            "residuals {:.3e} → {:.3e}, ratio {ratio:.2} (≥ 2.5), {elapsed:.2?}",
            residuals[0], residuals[1]
        ),
    );
}

/// 11. Distance-functional growth: two nearby perturbed-rotor states with
///     D(0) ≈ 1e−4 run to T = 0.25 at two resolutions; the measured growth
///     rate Λ agrees within a factor 2 and D stays inside the Λ-envelope;
///     ≤ 5 min.
#[test]
fn criterion_11_distance_gronwall() {
    let t0 = std::time::Instant::now();
    let pair_states = |n: usize| -> (MhdState, MhdState) {
        let (surface, v, b, _) = oracle::perturbed_rotor(1.0, 0.05, n, n);
        let a = assemble(surface.clone(), &v, &b, n, n, &StateConfig::default()).unwrap();
        let delta = 0.004;
        let w = VectorField::from_fn(a.chart.clone(), move |x, y| {
            [2.0 * delta * x, -2.0 * delta * y]
        });
        let v2 = v.add(&w);
        let b2 = assemble(surface, &v2, &b, n, n, &StateConfig::default()).unwrap();
        (a, b2)
    };
    let mut lambdas = Vec::new();
    let mut d0_seen = 0.0;
    let mut envelope_ok = true;
    for n in [48usize, 64] {
        let (mut sa, mut sb) = pair_states(n);
        let d0 = distance(&sa, &sb).unwrap().total;
        d0_seen = d0;
        let c = run_cfg(n, 1e-2);
        let mut t = 0.0;
        let mut lambda: f64 = 0.0;
        let mut samples = Vec::new();
        for k in 0..25 {
            let (na, _) = step(&sa, t, &c).unwrap();
            let (nb, r) = step(&sb, t, &c).unwrap();
            t = r.t;
            sa = na;
            sb = nb;
            if (k + 1) % 5 == 0 {
                let d = distance(&sa, &sb).unwrap().total;
                assert!(d.is_finite() && d > 0.0, "distance degenerate: {d}");
                lambda = lambda.max(((d / d0).ln() / t).abs());
                samples.push((t, d));
            }
        }
        for (ts, d) in &samples {
            let lo = d0 * (-lambda * ts).exp();
            let hi = d0 * (lambda * ts).exp();
            if *d < lo - 1e-300 || *d > hi * (1.0 + 1e-12) {
                envelope_ok = false;
            }
        }
        lambdas.push(lambda);
    }
    let ratio = (lambdas[0] / lambdas[1]).max(lambdas[1] / lambdas[0]);
    let elapsed = t0.elapsed();
    verdict(
        11,
        "distance growth rate",
        ratio <= 2.0 && envelope_ok && elapsed.as_secs() <= 300,
        &format!(
            "D(0) {d0_seen:.3e}, Λ at two resolutions {:.3}/{:.3} (ratio {ratio:.2} ≤ 2), \
             envelope holds, {elapsed:.2?}",
            lambdas[0], lambdas[1]
        ),
    );
}

/// 12. Self-convergence of the first-order scheme: observed order ≥ 0.8
///     across ε, ε/2, ε/4; ≤ 10 min.
#[test]
fn criterion_12_self_convergence() {
    let t0 = std::time::Instant::now();
    let n = 48;
    let (surface, v, b, _) = oracle::perturbed_rotor(1.0, 0.05, n, n);
    let st = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
    let table = self_convergence(&st, 0.2, &[8e-3, 4e-3, 2e-3], &run_cfg(n, 8e-3)).unwrap();
    let order = table.observed_orders[0];
    let elapsed = t0.elapsed();
    verdict(
        12,
        "self convergence",
        order >= 0.8 && elapsed.as_secs() <= 600,
        &format!(
            "pairwise distances {:.3e}, {:.3e}; observed order {order:.2} (≥ 0.8), {elapsed:.2?}",
            table.rows[0].distance_total, table.rows[1].distance_total
        ),
    );
}

/// 13. E³ on the rotor: total = 2 + 9π within relative 1e−3 at 128²; ≤ 30 s.
#[test]
fn criterion_13_higher_energy_value() {
    let t0 = std::time::Instant::now();
    let n = 128;
    let (surface, v, b, _) = oracle::equilibrium_rotor(1.0, n, n);
    let st = assemble(surface, &v, &b, n, n, &StateConfig::default()).unwrap();
    let rep = higher_energy(&st).unwrap();
    let exact = 2.0 + 9.0 * PI;
    let rel = (rep.total - exact).abs() / exact;
    let elapsed = t0.elapsed();
    verdict(
        13,
        "higher energy value",
        rel <= 1e-3 && elapsed.as_secs() <= 30,
        &format!("E³ {} vs 2+9π {exact:.6} (rel {rel:.3e} ≤ 1e-3), {elapsed:.2?}", rep.total),
    );
}
