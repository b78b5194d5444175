//! Number formatting shared by the CSV and JSON writers.

use serde::Serializer;

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Non-finite values come out as `NaN`, `inf`, or `-inf`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Converts `x` into a JSON number that keeps all 17 significant digits,
/// or `null` when `x` is not finite.
pub fn json_number(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        return serde_json::Value::Null;
    }
    let number: serde_json::Number = sig17(x)
        .parse()
        .expect("scientific notation is a valid JSON number");
    serde_json::Value::Number(number)
}

pub(crate) fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&json_number(*x), s)
}

pub(crate) fn serialize_f64_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let values: Vec<serde_json::Value> = xs.iter().copied().map(json_number).collect();
    serde::Serialize::serialize(&values, s)
}

pub(crate) fn serialize_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    let value = x.map_or(serde_json::Value::Null, json_number);
    serde::Serialize::serialize(&value, s)
}
