//! `name:key=val,key=val` noise presets.
//!
//! ```text
//! depolarizing:d=2,eps=0.1     (alias depol; d defaults to 2)
//! dephasing:eps=0.25           (alias deph)
//! gdeph:axis=pi8,eps=0.1       (alias generalized_dephasing)
//! ad:eps=0.1                   (alias amplitude_damping)
//! ```
//!
//! Axes are `x`, `y`, `z`, `pi8` for `(cos π/8, 0, sin π/8)`, or three numbers
//! separated by `;`. Text starting with `{` is read as a JSON spec.

use std::f64::consts::PI;

use qpec_core::NoiseSpec;

use crate::Failure;

fn parse_axis(v: &str) -> Result<[f64; 3], Failure> {
    match v {
        "x" => Ok([1.0, 0.0, 0.0]),
        "y" => Ok([0.0, 1.0, 0.0]),
        "z" => Ok([0.0, 0.0, 1.0]),
        "pi8" => Ok([(PI / 8.0).cos(), 0.0, (PI / 8.0).sin()]),
        _ => {
            let parts: Vec<f64> = v
                .split(';')
                .map(|p| p.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::usage(format!("bad axis '{v}'")))?;
            parts.try_into().map_err(|_| Failure::usage(format!("axis '{v}' needs three components")))
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, Failure> {
    v.parse().map_err(|_| Failure::usage(format!("{key}: '{v}' is not a number")))
}

/// Parses a preset. When `eps` is given it fills in (or overrides) the rate.
pub fn parse_noise(text: &str, eps: Option<f64>) -> Result<NoiseSpec, Failure> {
    let text = text.trim();
    if text.starts_with('{') {
        let spec: NoiseSpec = serde_json::from_str(text).map_err(|e| Failure::usage(format!("noise JSON: {e}")))?;
        return match eps {
            Some(e) => spec.with_eps(e).map_err(Failure::from),
            None => Ok(spec),
        };
    }
    let (name, rest) = text.split_once(':').unwrap_or((text, ""));
    const NAMES: [&str; 8] =
        ["depolarizing", "depol", "dephasing", "deph", "gdeph", "generalized_dephasing", "ad", "amplitude_damping"];
    if !NAMES.contains(&name) {
        return Err(Failure::usage(format!("unknown noise '{name}' (expected depolarizing, dephasing, gdeph or ad)")));
    }
    let (mut d, mut rate, mut axis) = (None, None, None);
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::usage(format!("expected key=value, got '{kv}'")))?;
        match k.trim() {
            "d" => d = Some(v.parse::<usize>().map_err(|_| Failure::usage(format!("d: '{v}' is not a dimension")))?),
            "eps" => rate = Some(parse_f64("eps", v)?),
            "axis" => axis = Some(parse_axis(v.trim())?),
            other => return Err(Failure::usage(format!("unknown key '{other}'"))),
        }
    }
    let eps = eps.or(rate).ok_or_else(|| Failure::usage(format!("'{text}' needs eps=<rate>")))?;
    let reject = |what: &str| Failure::usage(format!("{name} does not take {what}"));
    match name {
        "depolarizing" | "depol" => {
            if axis.is_some() {
                return Err(reject("an axis"));
            }
            Ok(NoiseSpec::Depolarizing { d: d.unwrap_or(2), eps })
        }
        "dephasing" | "deph" | "ad" | "amplitude_damping" => {
            if d.is_some() || axis.is_some() {
                return Err(reject("d or axis"));
            }
            if name.starts_with('d') {
                Ok(NoiseSpec::Dephasing { eps })
            } else {
                Ok(NoiseSpec::AmplitudeDamping { eps })
            }
        }
        "gdeph" | "generalized_dephasing" => {
            if d.is_some() {
                return Err(reject("d"));
            }
            Ok(NoiseSpec::GeneralizedDephasing { axis: axis.unwrap_or([0.0, 0.0, 1.0]), eps })
        }
        _ => unreachable!("name checked above"),
    }
}

/// Resolves `--noise` / `--noise-file`; exactly one must be given.
pub fn resolve(noise: Option<&str>, file: Option<&std::path::Path>, eps: Option<f64>) -> Result<NoiseSpec, Failure> {
    match (noise, file) {
        (Some(n), None) => parse_noise(n, eps),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            parse_noise(&text, eps)
        }
        (Some(_), Some(_)) => Err(Failure::usage("give either --noise or --noise-file, not both")),
        (None, None) => Err(Failure::usage("missing --noise or --noise-file")),
    }
}
