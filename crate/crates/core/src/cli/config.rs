//! INI-style scenario files.
//!
//! ```text
//! # comment
//! [plant]
//! alpha = 0.5
//! demand = 0:560, 60:620
//! ```
//!
//! Sections are `[solver] [plant] [noise] [metering] [harness]`. Unknown
//! sections and keys are rejected. Omitted keys keep their defaults.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::ScenarioConfig;
use crate::plant::Profile;

pub const SECTIONS: [&str; 5] = ["solver", "plant", "noise", "metering", "harness"];

fn parse_value<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("cannot parse `{v}` as {}", std::any::type_name::<T>()))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_value(s.trim())).collect()
}

fn parse_profile(v: &str) -> std::result::Result<Profile, String> {
    let mut segs = Vec::new();
    for item in v.split(',') {
        let (t, r) = item
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("profile segment `{}` is not `cycle:value`", item.trim()))?;
        segs.push((parse_value::<usize>(t.trim())?, parse_value::<f64>(r.trim())?));
    }
    Profile::new(segs).map_err(|e| e.to_string())
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("cannot parse `{v}` as a boolean")),
    }
}

/// Resolves a possibly aliased dotted key to `(section, key)`. A path whose
/// middle component names a section (`plant.noise.flow_bound`) refers to
/// that section.
pub fn resolve_key(path: &str) -> Option<(String, String)> {
    let parts: Vec<&str> = path.split('.').map(str::trim).collect();
    match parts.as_slice() {
        [s, k] => Some((s.to_string(), k.to_string())),
        [_, s, k] if SECTIONS.contains(s) => Some((s.to_string(), k.to_string())),
        _ => None,
    }
}

/// Applies one `key = value` in `section`. Errors are plain messages; the
/// caller attaches location.
pub fn apply(cfg: &mut ScenarioConfig, section: &str, key: &str, value: &str) -> std::result::Result<(), String> {
    let v = value.trim();
    match (section, key) {
        ("solver", "beta") => cfg.solver.beta = parse_value(v)?,
        ("solver", "delta_t") => cfg.solver.delta_t = parse_value(v)?,
        ("solver", "theta") => cfg.solver.theta_bound = parse_value(v)?,
        ("solver", "epsilon") => cfg.solver.epsilon = parse_value(v)?,
        ("solver", "tol") => cfg.solver.tol = parse_value(v)?,
        ("solver", "mu1_cap") => cfg.solver.mu1_cap = parse_value(v)?,
        ("solver", "inline") => {
            cfg.solver.inline = if v.is_empty() {
                None
            } else {
                let vals: Vec<f64> = parse_list(v)?;
                Some(vals.try_into().map_err(|_| {
                    "inline design needs 8 values: L1, L2, P11, P12, P22, mu1, mu2, mu3".to_string()
                })?)
            }
        }

        ("plant", "capacity") => cfg.plant.capacity = parse_value(v)?,
        ("plant", "alpha") => cfg.plant.alpha = parse_value(v)?,
        ("plant", "mode") => cfg.plant.mode = v.parse()?,
        ("plant", "theta_bound") => cfg.plant.theta_bound = parse_value(v)?,
        ("plant", "initial_queue") => cfg.plant.initial_queue = parse_value(v)?,
        ("plant", "demand") => cfg.plant.demand = parse_profile(v)?,
        ("plant", "mainline") => cfg.plant.mainline = parse_profile(v)?,
        ("plant", "occupancy_exponent") => cfg.plant.occupancy_exponent = parse_value(v)?,
        ("plant", "occupancy_coupling") => cfg.plant.occupancy_coupling = parse_value(v)?,

        ("noise", "window_start") => cfg.noise.window.0 = parse_value(v)?,
        ("noise", "window_end") => cfg.noise.window.1 = parse_value(v)?,
        ("noise", "flow_bound") => cfg.noise.flow_bound = parse_value(v)?,
        ("noise", "count_bound") => cfg.noise.count_bound = parse_value(v)?,

        ("metering", "k_i") => cfg.metering.k_i = parse_value(v)?,
        ("metering", "o_m_target") => cfg.metering.o_m_target = parse_value(v)?,
        ("metering", "o_a_threshold") => cfg.metering.o_a_threshold = parse_value(v)?,
        ("metering", "r_min") => cfg.metering.r_min = parse_value(v)?,
        ("metering", "r_max") => cfg.metering.r_max = parse_value(v)?,

        ("harness", "horizon") => cfg.harness.horizon = parse_value(v)?,
        ("harness", "warmup") => cfg.harness.warmup = parse_value(v)?,
        ("harness", "seeds") => cfg.harness.seeds = parse_list(v)?,
        ("harness", "init") => cfg.harness.init = v.parse()?,
        ("harness", "clamp") => cfg.harness.clamp = parse_bool(v)?,
        ("harness", "mu1_hat") => cfg.harness.mu1_hat = v.parse()?,
        ("harness", "eps_flow") => cfg.harness.eps_flow = parse_value(v)?,
        ("harness", "open_loop_window") => cfg.harness.open_loop_window = parse_value(v)?,
        ("harness", "kalman_k_f") => cfg.harness.kalman_k_f = parse_value(v)?,
        ("harness", "kalman_l_veh") => cfg.harness.kalman_l_veh = parse_value(v)?,
        ("harness", "kalman_l_d") => cfg.harness.kalman_l_d = parse_value(v)?,
        ("harness", "kalman_q_bb") => {
            cfg.harness.kalman_q_bb = if v.is_empty() { None } else { Some(parse_value(v)?) }
        }
        ("harness", "sweep_alpha") => cfg.harness.sweep_alpha = parse_list(v)?,
        ("harness", "sweep_theta") => cfg.harness.sweep_theta = parse_list(v)?,
        ("harness", "sweep_flow_bound") => cfg.harness.sweep_flow_bound = parse_list(v)?,

        (s, k) if SECTIONS.contains(&s) => return Err(format!("unknown key `{k}` in [{s}]")),
        (s, _) => return Err(format!("unknown section [{s}]")),
    }
    Ok(())
}

/// Parses a scenario file without validating ranges.
pub fn parse_unvalidated(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated section header".into()))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(err(format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let sec = section
            .as_deref()
            .ok_or_else(|| err("key outside of any section".into()))?;
        apply(&mut cfg, sec, key.trim(), value).map_err(err)?;
    }
    Ok(cfg)
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg = parse_unvalidated(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies `section.key=value` overrides, in order, then validates.
pub fn apply_overrides(cfg: &mut ScenarioConfig, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (path, value) = o.split_once('=').ok_or_else(|| {
            Error::validation(o.clone(), "override must look like section.key=value")
        })?;
        let (sec, key) = resolve_key(path.trim())
            .ok_or_else(|| Error::validation(path.trim(), "override key must be section.key"))?;
        apply(cfg, &sec, &key, value).map_err(|msg| Error::validation(path.trim(), msg))?;
    }
    cfg.validate()
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn profile(p: &Profile) -> String {
    p.segments()
        .iter()
        .map(|(t, v)| format!("{t}:{v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn kv(out: &mut String, k: &str, v: String) {
    let _ = writeln!(out, "{k} = {v}");
}

/// Writes a complete scenario file. Floats use the shortest representation
/// that parses back to the same value.
pub fn emit_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let s_ = &mut s;

    s_.push_str("[solver]\n");
    kv(s_, "beta", cfg.solver.beta.to_string());
    kv(s_, "delta_t", cfg.solver.delta_t.to_string());
    kv(s_, "theta", cfg.solver.theta_bound.to_string());
    kv(s_, "epsilon", cfg.solver.epsilon.to_string());
    kv(s_, "tol", cfg.solver.tol.to_string());
    kv(s_, "mu1_cap", cfg.solver.mu1_cap.to_string());
    if let Some(v) = cfg.solver.inline {
        kv(s_, "inline", list(&v));
    }

    s_.push_str("\n[plant]\n");
    kv(s_, "capacity", cfg.plant.capacity.to_string());
    kv(s_, "alpha", cfg.plant.alpha.to_string());
    kv(s_, "mode", cfg.plant.mode.to_string());
    kv(s_, "theta_bound", cfg.plant.theta_bound.to_string());
    kv(s_, "initial_queue", cfg.plant.initial_queue.to_string());
    kv(s_, "demand", profile(&cfg.plant.demand));
    kv(s_, "mainline", profile(&cfg.plant.mainline));
    kv(s_, "occupancy_exponent", cfg.plant.occupancy_exponent.to_string());
    kv(s_, "occupancy_coupling", cfg.plant.occupancy_coupling.to_string());

    s_.push_str("\n[noise]\n");
    kv(s_, "window_start", cfg.noise.window.0.to_string());
    kv(s_, "window_end", cfg.noise.window.1.to_string());
    kv(s_, "flow_bound", cfg.noise.flow_bound.to_string());
    kv(s_, "count_bound", cfg.noise.count_bound.to_string());

    s_.push_str("\n[metering]\n");
    kv(s_, "k_i", cfg.metering.k_i.to_string());
    kv(s_, "o_m_target", cfg.metering.o_m_target.to_string());
    kv(s_, "o_a_threshold", cfg.metering.o_a_threshold.to_string());
    kv(s_, "r_min", cfg.metering.r_min.to_string());
    kv(s_, "r_max", cfg.metering.r_max.to_string());

    let h = &cfg.harness;
    s_.push_str("\n[harness]\n");
    kv(s_, "horizon", h.horizon.to_string());
    kv(s_, "warmup", h.warmup.to_string());
    kv(s_, "seeds", list(&h.seeds));
    kv(s_, "init", h.init.to_string());
    kv(s_, "clamp", h.clamp.to_string());
    kv(s_, "mu1_hat", h.mu1_hat.to_string());
    kv(s_, "eps_flow", h.eps_flow.to_string());
    kv(s_, "open_loop_window", h.open_loop_window.to_string());
    kv(s_, "kalman_k_f", h.kalman_k_f.to_string());
    kv(s_, "kalman_l_veh", h.kalman_l_veh.to_string());
    kv(s_, "kalman_l_d", h.kalman_l_d.to_string());
    if let Some(q) = h.kalman_q_bb {
        kv(s_, "kalman_q_bb", q.to_string());
    }
    kv(s_, "sweep_alpha", list(&h.sweep_alpha));
    kv(s_, "sweep_theta", list(&h.sweep_theta));
    kv(s_, "sweep_flow_bound", list(&h.sweep_flow_bound));
    s
}
