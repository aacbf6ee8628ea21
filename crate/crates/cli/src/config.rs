//! Line-oriented key=value run configuration. Unknown keys are rejected;
//! parse-then-serialize is idempotent up to key order (serialization sorts).

use fbmhd::stepper::StepConfig;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub step: StepConfig,
    pub state_path: Option<String>,
    pub t_final: f64,
    pub out_dir: String,
    pub svg: bool,
    pub timing: bool,
    pub snapshot_every: usize,
    pub eps_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            step: StepConfig::default(),
            state_path: None,
            t_final: 1.0,
            out_dir: ".".into(),
            svg: false,
            timing: false,
            snapshot_every: 0,
            eps_list: Vec::new(),
        }
    }
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| format!("line {}: bad {} '{}'", lineno + 1, what, value);
        match key {
            "state" => cfg.state_path = Some(value.to_string()),
            "t_final" => cfg.t_final = value.parse().map_err(|_| bad("t_final"))?,
            "epsilon" => cfg.step.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "n_r" => cfg.step.n_r = value.parse().map_err(|_| bad("n_r"))?,
            "n_theta" => cfg.step.n_theta = value.parse().map_err(|_| bad("n_theta"))?,
            "mode_cutoff" => cfg.step.mode_cutoff = value.parse().map_err(|_| bad("mode_cutoff"))?,
            "tol_elliptic" => cfg.step.tol_elliptic = value.parse().map_err(|_| bad("tol_elliptic"))?,
            "max_iterations" => {
                cfg.step.max_iterations = value.parse().map_err(|_| bad("max_iterations"))?
            }
            "tol_div" => cfg.step.tol_div = value.parse().map_err(|_| bad("tol_div"))?,
            "tol_tangency" => cfg.step.tol_tangency = value.parse().map_err(|_| bad("tol_tangency"))?,
            "c0_min" => cfg.step.c0_min = value.parse().map_err(|_| bad("c0_min"))?,
            "collar_delta" => cfg.step.collar_delta = value.parse().map_err(|_| bad("collar_delta"))?,
            "step1_surface" => cfg.step.step1_surface = parse_bool(value).ok_or_else(|| bad("bool"))?,
            "step2_mollify" => cfg.step.step2_mollify = parse_bool(value).ok_or_else(|| bad("bool"))?,
            "step3_fieldline" => {
                cfg.step.step3_fieldline = parse_bool(value).ok_or_else(|| bad("bool"))?
            }
            "step1_scale" => cfg.step.step1_scale = Some(value.parse().map_err(|_| bad("scale"))?),
            "step2_scale" => cfg.step.step2_scale = Some(value.parse().map_err(|_| bad("scale"))?),
            "step3_scale" => cfg.step.step3_scale = Some(value.parse().map_err(|_| bad("scale"))?),
            "max_fp_iters" => cfg.step.max_fp_iters = value.parse().map_err(|_| bad("max_fp_iters"))?,
            "tol_fp" => cfg.step.tol_fp = value.parse().map_err(|_| bad("tol_fp"))?,
            "track_higher_energy" => {
                cfg.step.track_higher_energy = parse_bool(value).ok_or_else(|| bad("bool"))?
            }
            "out_dir" => cfg.out_dir = value.to_string(),
            "svg" => cfg.svg = parse_bool(value).ok_or_else(|| bad("bool"))?,
            "timing" => cfg.timing = parse_bool(value).ok_or_else(|| bad("bool"))?,
            "snapshot_every" => {
                cfg.snapshot_every = value.parse().map_err(|_| bad("snapshot_every"))?;
                cfg.step.snapshot_every = cfg.snapshot_every;
            }
            "eps_list" => {
                cfg.eps_list = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|_| bad("eps_list"))?
            }
            other => return Err(format!("line {}: unknown key '{}'", lineno + 1, other)),
        }
    }
    Ok(cfg)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "on" | "1" | "yes" => Some(true),
        "false" | "off" | "0" | "no" => Some(false),
        _ => None,
    }
}

pub fn serialize(cfg: &RunConfig) -> String {
    let mut map: BTreeMap<&str, String> = BTreeMap::new();
    if let Some(p) = &cfg.state_path {
        map.insert("state", p.clone());
    }
    map.insert("t_final", format!("{}", cfg.t_final));
    map.insert("epsilon", format!("{}", cfg.step.epsilon));
    map.insert("n_r", format!("{}", cfg.step.n_r));
    map.insert("n_theta", format!("{}", cfg.step.n_theta));
    map.insert("mode_cutoff", format!("{}", cfg.step.mode_cutoff));
    map.insert("tol_elliptic", format!("{}", cfg.step.tol_elliptic));
    map.insert("max_iterations", format!("{}", cfg.step.max_iterations));
    map.insert("tol_div", format!("{}", cfg.step.tol_div));
    map.insert("tol_tangency", format!("{}", cfg.step.tol_tangency));
    map.insert("c0_min", format!("{}", cfg.step.c0_min));
    map.insert("collar_delta", format!("{}", cfg.step.collar_delta));
    map.insert("step1_surface", format!("{}", cfg.step.step1_surface));
    map.insert("step2_mollify", format!("{}", cfg.step.step2_mollify));
    map.insert("step3_fieldline", format!("{}", cfg.step.step3_fieldline));
    if let Some(s) = cfg.step.step1_scale {
        map.insert("step1_scale", format!("{s}"));
    }
    if let Some(s) = cfg.step.step2_scale {
        map.insert("step2_scale", format!("{s}"));
    }
    if let Some(s) = cfg.step.step3_scale {
        map.insert("step3_scale", format!("{s}"));
    }
    map.insert("max_fp_iters", format!("{}", cfg.step.max_fp_iters));
    map.insert("tol_fp", format!("{}", cfg.step.tol_fp));
    map.insert("track_higher_energy", format!("{}", cfg.step.track_higher_energy));
    map.insert("out_dir", cfg.out_dir.clone());
    map.insert("svg", format!("{}", cfg.svg));
    map.insert("timing", format!("{}", cfg.timing));
    map.insert("snapshot_every", format!("{}", cfg.snapshot_every));
    if !cfg.eps_list.is_empty() {
        let joined: Vec<String> = cfg.eps_list.iter().map(|e| format!("{e}")).collect();
        map.insert("eps_list", joined.join(","));
    }
    let mut out = String::new();
    for (k, v) in map {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    }
    out
}
