//! Formatting and writing of run artifacts.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! enough to round-trip any `f64`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Number, Value};

use crate::error::{CliError, Result};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number carrying the same digits as [`fmt_f64`]; non-finite values
/// become `null`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_f64(x)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

pub fn json_f64s(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_f64(x)).collect())
}

pub fn join_usize(xs: &[usize], sep: &str) -> String {
    let mut out = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write!(out, "{x}").unwrap();
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    text.push('\n');
    write_file(path, &text)
}

/// `position,probability` rows for `t = 1..n−1`.
pub fn pos_prob_csv(pos_prob: &[f64]) -> String {
    let mut out = String::from("position,probability\n");
    for (i, &p) in pos_prob.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, fmt_f64(p)).unwrap();
    }
    out
}
