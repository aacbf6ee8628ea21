//! Command-line front end: state validation, energy reports, runs with CSV
//! and SVG emission, two-state distance, and ε-sweep self-convergence.
//!
//! Exit codes: 0 success, 1 I/O or parse errors, 2 constraint violations,
//! 3 early run halts.

use fbmhd_cli::{config, statefile, svg};

use fbmhd::functionals::{distance, higher_energy};
use fbmhd::oracle;
use fbmhd::state::{assemble, MhdState};
use fbmhd::stepper::{run, self_convergence, step, StepConfig};
use fbmhd::Error as CoreError;
use statefile::StateFile;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn main() -> ExitCode {
    // FBMHD_THREADS caps solver parallelism (0 = sequential, the default);
    // the current solvers are sequential, so the value is validated only.
    if let Ok(v) = std::env::var("FBMHD_THREADS") {
        if v.parse::<usize>().is_err() {
            eprintln!("error: FBMHD_THREADS must be a nonnegative integer");
            return ExitCode::from(1);
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        print_usage();
        return ExitCode::from(1);
    }
    let code = match args[0].as_str() {
        "validate" => cmd_validate(&args[1..]),
        "energy" => cmd_energy(&args[1..]),
        "distance" => cmd_distance(&args[1..]),
        "step" => cmd_step(&args[1..]),
        "run" => cmd_run(&args[1..]),
        "converge" => cmd_converge(&args[1..]),
        "dtn-test" => cmd_dtn_test(&args[1..]),
        "make-equilibrium" => cmd_make_equilibrium(&args[1..]),
        "--help" | "-h" | "help" => {
            print_usage();
            0
        }
        other => {
            eprintln!("error: unknown command '{other}'");
            print_usage();
            1
        }
    };
    ExitCode::from(code)
}

fn print_usage() {
    eprintln!(
        "usage: fbmhd <command> [args]\n\
         commands:\n\
         \x20 validate <state>                      check constraints, print diagnostics\n\
         \x20 energy <state>                        print E and the E3 component breakdown\n\
         \x20 distance <state-a> <state-b>          two-state distance functional\n\
         \x20 step --config <path>                  one time step, write the updated state\n\
         \x20 run --config <path> [--svg] [--timing] [--out DIR]\n\
         \x20 converge --config <path>              eps-sweep self-convergence CSV\n\
         \x20 dtn-test [n]                          disk Dirichlet-to-Neumann symbol check\n\
         \x20 make-equilibrium <out> [kind] [args]  write a reference state file\n\
         \x20     kinds: rotor <c> | perturbed <c> <amp> | rotation <c>  (plus n_r n_theta)\n\
         env: FBMHD_THREADS caps solver parallelism (0 = sequential, default)"
    );
}

fn load_state(path: &Path, cfg: &StepConfig) -> Result<MhdState, u8> {
    let file = match StateFile::load(path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(1);
        }
    };
    let (surface, v, b) = match file.unpack() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(1);
        }
    };
    match assemble(surface, &v, &b, file.n_r, file.n_theta, &cfg.state_config()) {
        Ok(st) => Ok(st),
        Err(e) => {
            eprintln!("constraint violation: {e}");
            Err(2)
        }
    }
}

fn cmd_validate(args: &[String]) -> u8 {
    let Some(path) = args.first() else {
        eprintln!("usage: fbmhd validate <state>");
        return 1;
    };
    let cfg = StepConfig::default();
    let state = match load_state(Path::new(path), &cfg) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let d = state.diagnostics();
    println!("a_min            {}", d.a_min);
    println!("tangency_res     {}", d.tangency_residual);
    println!("div_res_v        {}", d.div_residual_v);
    println!("div_res_B        {}", d.div_residual_b);
    println!("collar_margin    {}", d.collar_margin);
    println!("E_total          {}", d.total_energy);
    match higher_energy(&state) {
        Ok(rep) => println!("E3_total         {}", rep.total),
        Err(e) => {
            eprintln!("constraint violation: {e}");
            return 2;
        }
    }
    println!("valid");
    0
}

fn cmd_energy(args: &[String]) -> u8 {
    let Some(path) = args.first() else {
        eprintln!("usage: fbmhd energy <state>");
        return 1;
    };
    let cfg = StepConfig::default();
    let state = match load_state(Path::new(path), &cfg) {
        Ok(s) => s,
        Err(code) => return code,
    };
    println!("E_total {}", state.total_energy());
    match higher_energy(&state) {
        Ok(rep) => {
            println!("E3_total {}", rep.total);
            println!("w_l2 {} {}", rep.w_l2[0], rep.w_l2[1]);
            println!("omega_h2 {} {}", rep.omega_h2[0], rep.omega_h2[1]);
            println!("grad_b_omega_h32 {} {}", rep.grad_b_omega_h32[0], rep.grad_b_omega_h32[1]);
            println!("a_n2a_boundary {}", rep.a_n2a_boundary);
            println!("grad_h_n_g {} {}", rep.grad_h_n_g[0], rep.grad_h_n_g[1]);
            println!("grad_h_n_grad_b_a {}", rep.grad_h_n_grad_b_a);
            println!("inv_a_n_grad_b_g {} {}", rep.inv_a_n_grad_b_g[0], rep.inv_a_n_grad_b_g[1]);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn cmd_distance(args: &[String]) -> u8 {
    if args.len() < 2 {
        eprintln!("usage: fbmhd distance <state-a> <state-b>");
        return 1;
    }
    let cfg = StepConfig::default();
    let a = match load_state(Path::new(&args[0]), &cfg) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let b = match load_state(Path::new(&args[1]), &cfg) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match distance(&a, &b) {
        Ok(d) => {
            println!("interior_plus  {}", d.interior_plus);
            println!("interior_minus {}", d.interior_minus);
            println!("boundary_A     {}", d.boundary_a);
            println!("boundary_Ah    {}", d.boundary_ah);
            println!("total          {}", d.total);
            0
        }
        Err(CoreError::ExtrapolationTooFar { .. }) | Err(CoreError::CollarViolation { .. }) => {
            eprintln!("error: states too far apart in the collar");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct CliFlags {
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    svg: bool,
    timing: bool,
}

fn parse_flags(args: &[String]) -> Result<CliFlags, String> {
    let mut flags = CliFlags { config: None, out: None, svg: false, timing: false };
    let mut i = 0;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                i += 1;
                flags.config =
                    Some(PathBuf::from(args.get(i).ok_or("--config needs a path")?.clone()));
            }
            "--out" => {
                i += 1;
                flags.out = Some(PathBuf::from(args.get(i).ok_or("--out needs a path")?.clone()));
            }
            "--svg" => flags.svg = true,
            "--timing" => flags.timing = true,
            other => return Err(format!("unknown argument '{other}'")),
        }
        i += 1;
    }
    Ok(flags)
}

fn read_config(flags: &CliFlags) -> Result<config::RunConfig, u8> {
    let Some(path) = &flags.config else {
        eprintln!("error: --config <path> is required");
        return Err(1);
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config: {e}");
            return Err(1);
        }
    };
    match config::parse(&text) {
        Ok(mut cfg) => {
            if flags.svg {
                cfg.svg = true;
            }
            if flags.timing {
                cfg.timing = true;
            }
            if let Some(out) = &flags.out {
                cfg.out_dir = out.display().to_string();
            }
            Ok(cfg)
        }
        Err(e) => {
            eprintln!("config error: {e}");
            Err(1)
        }
    }
}

fn cmd_step(args: &[String]) -> u8 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cfg = match read_config(&flags) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(state_path) = &cfg.state_path else {
        eprintln!("config error: 'state' is required");
        return 1;
    };
    let state = match load_state(Path::new(state_path), &cfg.step) {
        Ok(s) => s,
        Err(code) => return code,
    };
    match step(&state, 0.0, &cfg.step) {
        Ok((next, report)) => {
            println!("t {}", report.t);
            println!("E_total {}", report.total_energy);
            println!("a_min {}", report.a_min_after);
            println!("tangency_res {}", report.tangency_residual);
            println!("div_res_v {}", report.div_residual_v);
            println!("div_res_B {}", report.div_residual_b);
            println!("boundary_sup_disp {}", report.boundary_sup_disp);
            println!("contract_constant {}", report.contract_constant);
            let out = Path::new(&cfg.out_dir).join("state_step.fbmhd");
            let file = StateFile::from_parts(
                &next.chart.surface,
                &next.v,
                &next.b,
                cfg.step.epsilon,
            );
            if let Err(e) = file.save(&out) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return 1;
            }
            println!("wrote {}", out.display());
            0
        }
        Err(e) => {
            eprintln!("step failed: {e}");
            3
        }
    }
}

fn csv_header(timing: bool) -> String {
    let mut h = String::from(
        "t,E_total,E3_total,a_min,tangency_res,div_res_v,div_res_B,boundary_sup_disp,halt_reason",
    );
    if timing {
        h.push_str(",wall_time_ms");
    }
    h
}

fn cmd_run(args: &[String]) -> u8 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cfg = match read_config(&flags) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(state_path) = &cfg.state_path else {
        eprintln!("config error: 'state' is required");
        return 1;
    };
    let state = match load_state(Path::new(state_path), &cfg.step) {
        Ok(s) => s,
        Err(code) => return code,
    };

    let out_dir = Path::new(&cfg.out_dir);
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create out dir: {e}");
        return 1;
    }
    let initial_surface = state.chart.surface.clone();
    let initial_e3 = if cfg.step.track_higher_energy {
        match higher_energy(&state) {
            Ok(r) => Some(r.total),
            Err(_) => None,
        }
    } else {
        None
    };
    let initial_row = RowData {
        t: 0.0,
        e_total: state.total_energy(),
        e3_total: initial_e3,
        a_min: state.a_min,
        tangency: state.tangency_residual,
        div_v: state.div_residual_v,
        div_b: state.div_residual_b,
        bdry: 0.0,
        wall: 0.0,
    };

    let log = run(state, cfg.t_final, &cfg.step);

    let mut csv = String::new();
    csv.push_str(&csv_header(cfg.timing));
    csv.push('\n');
    let mut rows: Vec<(RowData, String)> = vec![(initial_row, String::new())];
    for r in &log.reports {
        rows.push((
            RowData {
                t: r.t,
                e_total: r.total_energy,
                e3_total: r.e3_after.as_ref().map(|e| e.total),
                a_min: r.a_min_after,
                tangency: r.tangency_residual,
                div_v: r.div_residual_v,
                div_b: r.div_residual_b,
                bdry: r.boundary_sup_disp,
                wall: r.wall_time_ms,
            },
            String::new(),
        ));
    }
    if let Some((_, reason)) = rows.last_mut().map(|r| (0, &mut r.1)) {
        *reason = log.halt_reason.clone().unwrap_or_default();
    }
    for (row, reason) in &rows {
        csv.push_str(&row.format(reason, cfg.timing));
        csv.push('\n');
    }
    let csv_path = out_dir.join("run.csv");
    if let Err(e) = std::fs::write(&csv_path, csv) {
        eprintln!("error: cannot write CSV: {e}");
        return 1;
    }
    println!("wrote {}", csv_path.display());

    for (t_snap, snap) in &log.snapshots {
        let file = StateFile::from_parts(&snap.chart.surface, &snap.v, &snap.b, cfg.step.epsilon);
        let path = out_dir.join(format!("state_t{t_snap:.6}.fbmhd"));
        if let Err(e) = file.save(&path) {
            eprintln!("error: cannot write snapshot: {e}");
            return 1;
        }
    }
    if let Some(final_state) = &log.final_state {
        let file = StateFile::from_parts(
            &final_state.chart.surface,
            &final_state.v,
            &final_state.b,
            cfg.step.epsilon,
        );
        let state_out = out_dir.join("state_final.fbmhd");
        if let Err(e) = file.save(&state_out) {
            eprintln!("error: cannot write final state: {e}");
            return 1;
        }
        println!("wrote {}", state_out.display());
        if cfg.svg {
            let svg_path = out_dir.join("boundary.svg");
            let body = svg::boundary_figure(&initial_surface, &final_state.chart.surface);
            if let Err(e) = std::fs::write(&svg_path, body) {
                eprintln!("error: cannot write SVG: {e}");
                return 1;
            }
            println!("wrote {}", svg_path.display());
        }
    }

    if let Some(reason) = &log.halt_reason {
        eprintln!("halted early: {reason}");
        return 3;
    }
    0
}

struct RowData {
    t: f64,
    e_total: f64,
    e3_total: Option<f64>,
    a_min: f64,
    tangency: f64,
    div_v: f64,
    div_b: f64,
    bdry: f64,
    wall: f64,
}

impl RowData {
    fn format(&self, halt: &str, timing: bool) -> String {
        let e3 = match self.e3_total {
            Some(v) => format!("{v}"),
            None => String::new(),
        };
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t,
            self.e_total,
            e3,
            self.a_min,
            self.tangency,
            self.div_v,
            self.div_b,
            self.bdry,
            halt
        );
        if timing {
            row.push_str(&format!(",{}", self.wall));
        }
        row
    }
}

fn cmd_converge(args: &[String]) -> u8 {
    let flags = match parse_flags(args) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cfg = match read_config(&flags) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let Some(state_path) = &cfg.state_path else {
        eprintln!("config error: 'state' is required");
        return 1;
    };
    if cfg.eps_list.is_empty() {
        eprintln!("config error: 'eps_list' is required for converge");
        return 1;
    }
    let state = match load_state(Path::new(state_path), &cfg.step) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let out_dir = Path::new(&cfg.out_dir);
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create out dir: {e}");
        return 1;
    }
    let mut csv = String::from("eps_coarse,eps_fine,distance,observed_order\n");
    match self_convergence(&state, cfg.t_final, &cfg.eps_list, &cfg.step) {
        Ok(table) => {
            for (i, row) in table.rows.iter().enumerate() {
                let order = if i + 1 < table.rows.len() {
                    format!("{}", table.observed_orders[i])
                } else {
                    String::new()
                };
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    row.eps_coarse, row.eps_fine, row.distance_total, order
                ));
            }
            let path = out_dir.join("converge.csv");
            if let Err(e) = std::fs::write(&path, csv) {
                eprintln!("error: cannot write CSV: {e}");
                return 1;
            }
            println!("wrote {}", path.display());
            0
        }
        Err(e) => {
            // partial CSV with the failure note
            let path = out_dir.join("converge.csv");
            let _ = std::fs::write(&path, csv);
            eprintln!("converge failed: {e}");
            3
        }
    }
}

fn cmd_dtn_test(args: &[String]) -> u8 {
    let n: usize = match args.first().map(|s| s.parse()) {
        Some(Ok(v)) => v,
        Some(Err(_)) => {
            eprintln!("usage: fbmhd dtn-test [n]");
            return 1;
        }
        None => 128,
    };
    use fbmhd::elliptic::EllipticWorkspace;
    use fbmhd::surface::{build_surface, DomainChart};
    use std::sync::Arc;
    let surface = build_surface(fbmhd::BoundarySeries::zero(4), 0.3).expect("unit disk");
    let chart = Arc::new(DomainChart::build(surface, n, n));
    let ws = EllipticWorkspace::new(chart, 1e-10, 2000);
    let mut worst_rel = 0.0_f64;
    println!("k,rel_error");
    for k in 1..=8usize {
        let g = fbmhd::BoundarySeries::cosine(1.0, k, 10);
        let ng = match ws.dtn(&g) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("solve failed: {e}");
                return 2;
            }
        };
        let mut worst = 0.0_f64;
        for j in 0..512 {
            let th = 2.0 * std::f64::consts::PI * j as f64 / 512.0;
            worst = worst.max((ng.eval(th) - k as f64 * (k as f64 * th).cos()).abs());
        }
        let rel = worst / k as f64;
        worst_rel = worst_rel.max(rel);
        println!("{k},{rel}");
    }
    if worst_rel <= 1e-3 {
        0
    } else {
        eprintln!("DtN symbol error {worst_rel} exceeds 1e-3");
        2
    }
}

fn cmd_make_equilibrium(args: &[String]) -> u8 {
    let Some(out) = args.first() else {
        eprintln!("usage: fbmhd make-equilibrium <out> [rotor|perturbed|rotation] [c] [amp] [n_r] [n_theta]");
        return 1;
    };
    let kind = args.get(1).map(|s| s.as_str()).unwrap_or("rotor");
    let c: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let (amp_idx, n_idx) = if kind == "perturbed" { (3, 4) } else { (3, 3) };
    let amp: f64 = args.get(amp_idx).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let n_r: usize = args.get(n_idx).and_then(|s| s.parse().ok()).unwrap_or(64);
    let n_theta: usize = args.get(n_idx + 1).and_then(|s| s.parse().ok()).unwrap_or(n_r);

    let (surface, v, b) = match kind {
        "rotor" => {
            let (s, v, b, _) = oracle::equilibrium_rotor(c, n_r, n_theta);
            (s, v, b)
        }
        "perturbed" => {
            let (s, v, b, _) = oracle::perturbed_rotor(c, amp, n_r, n_theta);
            (s, v, b)
        }
        "rotation" => {
            let (s, v, b) = oracle::taylor_violating_rotation(c, n_r, n_theta);
            (s, v, b)
        }
        other => {
            eprintln!("error: unknown kind '{other}'");
            return 1;
        }
    };
    let file = StateFile::from_parts(&surface, &v, &b, 1e-2);
    match file.save(Path::new(out)) {
        Ok(()) => {
            println!("wrote {out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
