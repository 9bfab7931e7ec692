//! One-parameter sweeps addressed by a dotted path into the configuration.

use serde_json::Value;

use super::presets::linspace;
use super::{Plan, Point, RunConfig, Series};
use crate::constants::two_pi;
use crate::controls::valid_dd_amplitudes;
use crate::{Error, Result};

/// Parses a value list:
/// - `a,b,c`: explicit values, kept in order;
/// - `start:stop:count`: `count` evenly spaced values, both ends included;
/// - `grid:lo:hi`: feasible carrier amplitudes of `base` in `[lo, hi]` Hz.
pub fn parse_values(spec: &str, base: &RunConfig) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Config(format!("--values '{spec}': {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("'{s}' is not a number ({e})")));
    let spec = spec.trim();
    let values = if let Some(rest) = spec.strip_prefix("grid:") {
        let (lo, hi) = rest.split_once(':').ok_or_else(|| bad("expected grid:lo:hi".into()))?;
        let s = base.solve()?;
        valid_dd_amplitudes(&s, two_pi(num(lo)?), two_pi(num(hi)?))
            .map_err(|e| bad(e.to_string()))?
            .into_iter()
            .map(|w| w / two_pi(1.0))
            .collect()
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count".into()));
        }
        let count: usize = parts[2].trim().parse().map_err(|_| bad(format!("count '{}' is not an integer", parts[2])))?;
        linspace(num(parts[0])?, num(parts[1])?, count)
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(bad(format!("non-finite value {v}")));
    }
    Ok(values)
}

/// Returns a copy of `base` with the number at `path` replaced by `value`.
pub fn set_path(base: &RunConfig, path: &str, value: f64) -> Result<RunConfig> {
    let unresolved = |why: &str| Error::Config(format!("parameter path '{path}' {why}"));
    let mut root = serde_json::to_value(base)?;
    let mut node = &mut root;
    for key in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(key).ok_or_else(|| unresolved(&format!("has no key '{key}'")))?,
            _ => return Err(unresolved(&format!("does not resolve at '{key}'"))),
        };
    }
    *node = match node {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 {
                return Err(unresolved(&format!("is an integer field; {value} is not an integer")));
            }
            if n.is_u64() && value < 0.0 {
                return Err(unresolved(&format!("is a non-negative integer field; got {value}")));
            }
            if value < 0.0 { Value::from(value as i64) } else { Value::from(value as u64) }
        }
        Value::Number(_) => Value::from(value),
        Value::Null => return Err(unresolved("points to an unset block; set it in the config first")),
        _ => return Err(unresolved("is not numeric")),
    };
    let c: RunConfig = serde_json::from_value(root).map_err(|e| unresolved(&format!("cannot take {value}: {e}")))?;
    c.validate()?;
    Ok(c)
}

/// One series with a row per value, in input order.
pub fn plan(base: &RunConfig, path: &str, values: &[f64]) -> Result<Plan> {
    let points = values
        .iter()
        .map(|&v| Ok(Point { value: v, config: set_path(base, path, v)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Plan { label: "sweep".into(), series: vec![Series { name: path.into(), points }] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::from_json(
            r#"{"schema_version": 1,
                "physical": {"trap_frequency_hz": 207e3, "gradient_t_per_m": 38.5},
                "schedule": {"rabi_hz": 26.6e3}}"#,
        )
        .unwrap()
    }

    #[test]
    fn value_lists() {
        let b = base();
        assert_eq!(parse_values("3, 1,2", &b).unwrap(), vec![3.0, 1.0, 2.0]);
        assert_eq!(parse_values("0:1:5", &b).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_values("0:1", &b).is_err());
        assert!(parse_values("a,b", &b).is_err());
        assert!(parse_values("0:1:0", &b).is_err());
        let g = parse_values("grid:30e3:80e3", &b).unwrap();
        assert!(!g.is_empty() && g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.iter().all(|&v| (30e3..=80e3).contains(&v)));
    }

    #[test]
    fn paths_resolve_and_keep_types() {
        let b = base();
        let c = set_path(&b, "schedule.carrier_hz", 50e3).unwrap();
        assert_eq!(c.schedule.carrier_hz, 50e3);
        let c = set_path(&b, "schedule.phase_flips", 3.0).unwrap();
        assert_eq!(c.schedule.phase_flips, 3);
        assert!(set_path(&b, "schedule.phase_flips", 2.5).is_err());
        assert!(set_path(&b, "schedule.nope", 1.0).is_err());
        assert!(set_path(&b, "noise.magnetic.tau_s", 1.0).is_err());
        assert!(set_path(&b, "model.kind", 1.0).is_err());
        assert!(set_path(&b, "physical.trap_frequency_hz", -5.0).is_err());
    }

    #[test]
    fn rows_follow_input_order() {
        let p = plan(&base(), "errors.rabi_rel", &[0.01, -0.01, 0.0]).unwrap();
        let v: Vec<f64> = p.series[0].points.iter().map(|p| p.config.errors.rabi_rel).collect();
        assert_eq!(v, vec![0.01, -0.01, 0.0]);
    }
}
