//! Output formatting: every number is rounded to 12 significant digits.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// `v` rounded to 12 significant digits; non-finite values pass through.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Shortest decimal for [`round12`] of `v`, for CSV cells.
pub fn fmt12(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{}", round12(v))
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round12)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(data: &T) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(data).map_err(|e| CliError::Internal(e.to_string()))?;
    round_value(&mut v);
    Ok(v)
}

/// Pretty JSON with rounded numbers, followed by a newline.
pub fn write_json<T: Serialize>(out: &mut dyn Write, data: &T) -> Result<(), CliError> {
    let v = to_value(data)?;
    serde_json::to_writer_pretty(&mut *out, &v)?;
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt12(-45.46564923412345), "-45.4656492341");
        assert_eq!(fmt12(1e-20 / 3.0), "0.00000000000000000000333333333333");
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(f64::INFINITY), "inf");
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 2.0f64.sqrt()}});
        round_value(&mut v);
        assert_eq!(
            v.to_string(),
            r#"{"a":[0.333333333333,2],"b":{"c":1.41421356237}}"#
        );
    }
}
