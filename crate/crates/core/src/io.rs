//! CSV profiles and full-precision JSON.
//!
//! JSON floats are written as decimal strings with 17 significant digits so a
//! stored result reloads bit for bit; [`from_json`] accepts both those strings
//! and plain numbers.

use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::radial::{RadialField, RadialGrid, StatePair};
use crate::real::{lit, Real};

fn float_string(x: f64) -> String {
    format!("{x:.16e}")
}

/// Whether `s` has the exact shape produced by [`float_string`].
fn is_float_string(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let Some((mant, exp)) = body.split_once('e') else {
        return false;
    };
    let exp = exp.strip_prefix('-').unwrap_or(exp);
    let mut m = mant.splitn(2, '.');
    let (Some(int), Some(frac)) = (m.next(), m.next()) else {
        return false;
    };
    int.len() == 1
        && frac.len() == 16
        && !exp.is_empty()
        && int.bytes().chain(frac.bytes()).chain(exp.bytes()).all(|b| b.is_ascii_digit())
}

fn floats_to_strings(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_u64() || n.is_i64()) => match n.as_f64() {
            Some(x) => Value::String(float_string(x)),
            None => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(floats_to_strings).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, floats_to_strings(v))).collect()),
        other => other,
    }
}

fn strings_to_floats(v: Value) -> Value {
    match v {
        Value::String(s) if is_float_string(&s) => s
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map(Value::Number)
            .unwrap_or(Value::String(s)),
        Value::Array(a) => Value::Array(a.into_iter().map(strings_to_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, strings_to_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with every float as a 17-digit decimal string.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let v = floats_to_strings(serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&v)?)
}

pub fn from_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    let v: Value = serde_json::from_str(text)?;
    Ok(serde_json::from_value(strings_to_floats(v))?)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    from_json(&fs::read_to_string(path)?)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    fs::write(path, to_json(value)? + "\n")?;
    Ok(())
}

/// Writes rows under a header; values use the shortest round-trip formatting.
pub fn write_csv<T: Display>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<T>>) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a numeric CSV; returns the header and the columns.
pub fn read_csv<T: FromStr>(path: &Path) -> Result<(Vec<String>, Vec<Vec<T>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut cols: Vec<Vec<T>> = header.iter().map(|_| Vec::new()).collect();
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Format(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                k + 2,
                fields.len(),
                header.len()
            )));
        }
        for (c, f) in fields.iter().enumerate() {
            let x = f.trim().parse::<T>().map_err(|_| {
                Error::Format(format!("{}: row {}: cannot parse '{}'", path.display(), k + 2, f))
            })?;
            cols[c].push(x);
        }
    }
    Ok((header, cols))
}

/// `r,u` for one field.
pub fn write_field_csv<T: Real>(path: &Path, f: &RadialField<T>) -> Result<()> {
    let rows = f.grid().nodes().iter().zip(f.values()).map(|(&r, &u)| vec![r, u]);
    write_csv(path, &["r", "u"], rows)
}

/// `r,u,v` for a pair.
pub fn write_pair_csv<T: Real>(path: &Path, pair: &StatePair<T>) -> Result<()> {
    let g = pair.grid();
    let rows = (0..g.len()).map(|i| vec![g.nodes()[i], pair.u.values()[i], pair.v.values()[i]]);
    write_csv(path, &["r", "u", "v"], rows)
}

/// Rebuilds the uniform grid implied by an `r` column.
pub fn grid_from_nodes<T: Real + FromStr>(dim: usize, r: &[T]) -> Result<Arc<RadialGrid<T>>> {
    let n = r.len();
    if n < 2 {
        return Err(Error::InvalidGrid("profile has fewer than two rows".into()));
    }
    let grid = RadialGrid::new(dim, r[n - 1], n)?;
    let tol = lit::<T>(1e-12) * r[n - 1];
    if grid.nodes().iter().zip(r).any(|(&a, &b)| (a - b).abs() > tol) {
        return Err(Error::InvalidGrid("r column is not a uniform grid starting at 0".into()));
    }
    Ok(grid)
}

/// Reads `r,u,v` into a pair on the matching grid.
pub fn read_pair_csv<T: Real + FromStr>(path: &Path, dim: usize) -> Result<StatePair<T>> {
    let (header, cols) = read_csv::<T>(path)?;
    if header != ["r", "u", "v"] {
        return Err(Error::Format(format!(
            "{}: expected header r,u,v, found {}",
            path.display(),
            header.join(",")
        )));
    }
    let grid = grid_from_nodes(dim, &cols[0])?;
    let u = RadialField::new(grid.clone(), cols[1].clone())?;
    let v = RadialField::new(grid, cols[2].clone())?;
    StatePair::new(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, serde::Serialize, serde::Deserialize)]
    struct Sample {
        x: f64,
        n: usize,
        name: String,
        v: Vec<f64>,
    }

    #[test]
    fn float_strings_round_trip() {
        let s = Sample {
            x: 0.1 + 0.2,
            n: 7,
            name: "MixedSubSuper".into(),
            v: vec![-1.0e-300, 3.0, std::f64::consts::PI],
        };
        let text = to_json(&s).unwrap();
        assert!(text.contains("\"3.0000000000000000e0\""));
        assert!(text.contains("\"n\": 7"));
        let back: Sample = from_json(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn plain_numbers_accepted() {
        let back: Sample = from_json(r#"{"x": 1.5, "n": 2, "name": "1", "v": []}"#).unwrap();
        assert_eq!(back.x, 1.5);
        assert_eq!(back.name, "1");
    }

    #[test]
    fn shape_detection() {
        assert!(is_float_string("1.0000000000000000e-3"));
        assert!(is_float_string("-9.9999999999999999e300"));
        assert!(!is_float_string("1.0e3"));
        assert!(!is_float_string("inf"));
        assert!(!is_float_string("MixedSubSuper"));
    }
}
