//! Deterministic JSON output.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! reports are byte-stable and round-trip exactly. Non-finite values, which
//! JSON cannot represent, are written as the strings `"inf"`, `"-inf"`, `"nan"`.

use std::io;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::error::{Error, Result};

/// A float as a JSON value; non-finite values become strings.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

/// Reads a float written by [`number`] (or any JSON number).
pub fn read_number(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}"))),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            _ => Err(Error::Parse(format!("expected number, found \"{s}\""))),
        },
        _ => Err(Error::Parse(format!("expected number, found {v}"))),
    }
}

/// Pretty-printing formatter with fixed-precision floats.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` deterministically (object keys keep insertion order).
pub fn to_canonical_string(value: &Value) -> String {
    use serde::Serialize;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing a JSON value into memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_use_fixed_precision() {
        let s = to_canonical_string(&json!({"a": 0.1, "b": [1, 2.5]}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.5000000000000000e0"), "{s}");
        assert!(s.contains(": 1") || s.contains("1,"), "{s}");
    }

    #[test]
    fn round_trip_is_exact() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, -2.0] {
            let s = to_canonical_string(&number(x));
            let v: Value = serde_json::from_str(&s).unwrap();
            assert_eq!(read_number(&v).unwrap(), x);
        }
    }

    #[test]
    fn non_finite_as_strings() {
        assert_eq!(number(f64::INFINITY), json!("inf"));
        assert_eq!(read_number(&json!("inf")).unwrap(), f64::INFINITY);
        assert!(read_number(&json!("x")).is_err());
    }
}
