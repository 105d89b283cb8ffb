//! Value parsers for flags and the flat `key=value` configuration file.

use std::path::Path;

/// Comma-separated reals, e.g. `-1,0,1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatList(pub Vec<f64>);

/// Comma-separated positive integers.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeList(pub Vec<usize>);

/// Inclusive grid `start:end:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Grid {
    /// Points `start + i·step` up to `end`, with `end` included within half a step.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 0.5).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

pub fn finite(s: &str) -> Result<f64, String> {
    real(s)
}

pub fn positive(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be positive".into())
    }
}

pub fn nonnegative(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err("must be nonnegative".into())
    }
}

pub fn at_least_one(s: &str) -> Result<usize, String> {
    let v: usize = s.trim().parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

pub fn float_list(s: &str) -> Result<FloatList, String> {
    let v = s.split(',').map(real).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(FloatList(v))
}

pub fn size_list(s: &str) -> Result<SizeList, String> {
    Ok(SizeList(s.split(',').map(at_least_one).collect::<Result<Vec<_>, _>>()?))
}

pub fn grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts[..] else {
        return Err("expected start:end:step".into());
    };
    let g = Grid {
        start: real(a)?,
        end: real(b)?,
        step: real(c)?,
    };
    if !(g.step > 0.0) {
        return Err("step must be positive".into());
    }
    if g.end < g.start {
        return Err("end must not be below start".into());
    }
    Ok(g)
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped, underscores
/// in keys become hyphens, and later duplicates replace earlier ones.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", no + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        out.retain(|(existing, _)| existing != &key);
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text)
}
