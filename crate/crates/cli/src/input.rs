//! Parsing of distributions and list-valued flags.

use std::fs;
use std::path::Path;

use schmidt_core::SchmidtState;
use serde_json::Value;

/// A user input problem, reported with exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(flag: &str, msg: impl std::fmt::Display) -> InputError {
    InputError(format!("--{flag}: {msg}"))
}

/// Sums further than this from 1 are rejected rather than renormalized.
const MASS_TOL: f64 = 1e-6;

/// Reads a distribution given inline as `0.5,0.3,0.2`, as a JSON array, or
/// as a path to a JSON file holding an array or `{"dist": [...]}`.
pub fn parse_weights(flag: &str, raw: &str) -> Result<Vec<f64>, InputError> {
    let raw = raw.trim();
    let weights = if raw.starts_with('[') || raw.starts_with('{') {
        from_json(flag, raw)?
    } else if Path::new(raw).is_file() {
        let text = fs::read_to_string(raw).map_err(|e| bad(flag, format!("cannot read {raw}: {e}")))?;
        from_json(flag, &text)?
    } else {
        raw.split(',')
            .enumerate()
            .map(|(i, s)| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(flag, format!("entry {i} ({:?}) is not a number", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    check_weights(flag, &weights)?;
    Ok(weights)
}

fn from_json(flag: &str, text: &str) -> Result<Vec<f64>, InputError> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(flag, format!("invalid JSON: {e}")))?;
    let arr = match &v {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("dist") {
            Some(Value::Array(a)) => a,
            _ => return Err(bad(flag, "JSON object needs a \"dist\" array")),
        },
        _ => return Err(bad(flag, "expected a JSON array or {\"dist\": [...]}")),
    };
    arr.iter()
        .enumerate()
        .map(|(i, x)| x.as_f64().ok_or_else(|| bad(flag, format!("entry {i} ({x}) is not a number"))))
        .collect()
}

fn check_weights(flag: &str, w: &[f64]) -> Result<(), InputError> {
    if w.is_empty() {
        return Err(bad(flag, "distribution is empty"));
    }
    if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(bad(flag, format!("entry {i} ({x}) must be finite and >= 0")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(bad(flag, format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// Parses, normalizes and sorts a distribution, noting on stderr when the
/// input was not already in nonincreasing order.
pub fn parse_state(flag: &str, raw: &str) -> Result<SchmidtState, InputError> {
    let mut w = parse_weights(flag, raw)?;
    if w.windows(2).any(|p| p[1] > p[0]) {
        eprintln!("note: --{flag} sorted into nonincreasing order");
        w.sort_by(|a, b| b.total_cmp(a));
    }
    // Sorting first keeps the result independent of the input order.
    let sum: f64 = w.iter().sum();
    let w = w.into_iter().map(|x| x / sum).collect();
    SchmidtState::new(w).map_err(|e| bad(flag, e))
}

/// Parses `p:q,p:q,...`.
pub fn parse_pairs(raw: &str) -> Result<Vec<(f64, f64)>, InputError> {
    raw.split(',')
        .enumerate()
        .map(|(i, item)| {
            let (p, q) = item
                .split_once(':')
                .ok_or_else(|| bad("pairs", format!("entry {i} ({item:?}) is not of the form p:q")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad("pairs", format!("entry {i} ({item:?}) is not of the form p:q")))
            };
            Ok((num(p)?, num(q)?))
        })
        .collect()
}

/// Parses `1-8`, `2,3,5` or a mix such as `1-3,6`.
pub fn parse_dims(raw: &str) -> Result<Vec<usize>, InputError> {
    let mut dims = Vec::new();
    for item in raw.split(',') {
        let item = item.trim();
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| bad("dims", format!("{item:?} is not a dimension or range")))
        };
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(bad("dims", format!("empty range {item:?}")));
                }
                dims.extend(a..=b);
            }
            None => dims.push(num(item)?),
        }
    }
    dims.sort_unstable();
    dims.dedup();
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_json_forms() {
        assert_eq!(parse_weights("target", "0.5,0.5").unwrap(), vec![0.5, 0.5]);
        assert_eq!(parse_weights("target", "[0.25, 0.75]").unwrap(), vec![0.25, 0.75]);
        assert_eq!(parse_weights("target", r#"{"dist": [1.0]}"#).unwrap(), vec![1.0]);
    }

    #[test]
    fn errors_name_flag_and_index() {
        let e = parse_weights("seed", "0.5,x,0.5").unwrap_err().0;
        assert!(e.contains("--seed") && e.contains("entry 1"), "{e}");
        let e = parse_weights("target", "0.5,-0.1,0.6").unwrap_err().0;
        assert!(e.contains("entry 1"), "{e}");
        assert!(parse_weights("target", "0.5,0.4").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_dims("1-3,6").unwrap(), vec![1, 2, 3, 6]);
        assert!(parse_dims("3-1").is_err());
        assert_eq!(parse_pairs("0.5:0.55,0.6:0.8").unwrap(), vec![(0.5, 0.55), (0.6, 0.8)]);
        assert!(parse_pairs("0.5").is_err());
    }
}
