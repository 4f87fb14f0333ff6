//! Model loading and flag parsing shared by the subcommands.

use crate::ModelArgs;
use canard_core::{chua3, chua4, ChuaParams3, ChuaParams4, Error, Result, SlowFastSystem};

/// Build the system from `--builtin`/`--model`, then apply `--param` and
/// `--epsilon` overrides.
pub fn load_system(args: &ModelArgs) -> Result<SlowFastSystem> {
    let mut system = match (&args.builtin, &args.model) {
        (Some(name), None) => match name.as_str() {
            "chua3" => chua3(ChuaParams3::default())?,
            "chua4" => chua4(ChuaParams4::default())?,
            other => {
                return Err(Error::Model(format!(
                    "unknown built-in model `{other}` (available: chua3, chua4)"
                )))
            }
        },
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Model(format!("cannot read model file {}: {e}", path.display()))
            })?;
            SlowFastSystem::from_toml_str(&text)?
        }
        (None, None) => {
            return Err(Error::Model(
                "no model selected: pass --builtin chua3|chua4 or --model <file>".to_string(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --builtin with --model"),
    };
    for spec in &args.params {
        let (name, value) = parse_param(spec)?;
        system = system.with_param(&name, value)?;
    }
    if let Some(eps) = args.epsilon {
        system = system.with_epsilon(eps)?;
    }
    Ok(system)
}

/// Parse one `--param NAME=VALUE` token.
pub fn parse_param(spec: &str) -> Result<(String, f64)> {
    let (name, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Model(format!("--param expects NAME=VALUE, got `{spec}`")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Model(format!("--param {name}: `{value}` is not a number")))?;
    Ok((name.trim().to_string(), value))
}

/// Expand `--box VAR=LO:HI` flags into one interval per full-space variable,
/// defaulting to [-2, 2].
pub fn parse_boxes(system: &SlowFastSystem, flags: &[String]) -> Result<Vec<(f64, f64)>> {
    let names = system.full_var_names();
    let mut out = vec![(-2.0, 2.0); names.len()];
    for flag in flags {
        let (var, range) = flag
            .split_once('=')
            .ok_or_else(|| Error::Model(format!("--box expects VAR=LO:HI, got `{flag}`")))?;
        let idx = names
            .iter()
            .position(|n| n == var.trim())
            .ok_or_else(|| {
                Error::Model(format!(
                    "--box: unknown variable `{}` (model has {})",
                    var.trim(),
                    names.join(", ")
                ))
            })?;
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| Error::Model(format!("--box {var}: expected LO:HI, got `{range}`")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| Error::Model(format!("--box {var}: `{lo}` is not a number")))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| Error::Model(format!("--box {var}: `{hi}` is not a number")))?;
        if !(lo < hi) {
            return Err(Error::Model(format!(
                "--box {var}: need LO < HI, got {lo}:{hi}"
            )));
        }
        out[idx] = (lo, hi);
    }
    Ok(out)
}

/// Parse a comma-separated full-space point.
pub fn parse_point(spec: &str, dim: usize, what: &str) -> Result<Vec<f64>> {
    let coords: Vec<f64> = spec
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| Error::Model(format!("{what}: `{c}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if coords.len() != dim {
        return Err(Error::Model(format!(
            "{what}: expected {dim} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(coords)
}

/// Parse `--t-span T` (meaning 0..T) or `T0:T1`.
pub fn parse_t_span(spec: &str) -> Result<(f64, f64)> {
    let (t0, t1) = match spec.split_once(':') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| Error::Model(format!("--t-span: `{a}` is not a number")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| Error::Model(format!("--t-span: `{b}` is not a number")))?;
            (a, b)
        }
        None => {
            let b: f64 = spec
                .trim()
                .parse()
                .map_err(|_| Error::Model(format!("--t-span: `{spec}` is not a number")))?;
            (0.0, b)
        }
    };
    if !(t0.is_finite() && t1.is_finite() && t0 <= t1) {
        return Err(Error::Model(format!(
            "--t-span: need finite T0 <= T1, got {t0}:{t1}"
        )));
    }
    Ok((t0, t1))
}
