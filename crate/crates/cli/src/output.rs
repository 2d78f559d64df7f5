//! Deterministic number formatting and file output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::CliError;

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt(x)).expect("formatted float is valid JSON")
    } else {
        Value::Null
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>, leading: impl Fn(usize) -> Option<String>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for (i, row) in rows.into_iter().enumerate() {
        let mut cells: Vec<String> = leading(i).into_iter().collect();
        cells.extend(row.into_iter().map(fmt));
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.to_owned(), source }),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}
