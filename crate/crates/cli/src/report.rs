//! Report serialization with 17 significant digits for every float.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

use geoquant::expr::Expr;
use geoquant::geometry::{Chart, InhomTensor, SymTensor};
use geoquant::quantizer::DiffOperator;

struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Pretty JSON with every float printed as `d.dddddddddddddddde±x`.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn expr(e: &Expr) -> Value {
    Value::String(e.to_string())
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Comma-joined coordinate names of an index tuple; `""` for the empty one.
pub fn key(chart: &Chart, idx: &[usize]) -> String {
    idx.iter().map(|&j| chart.coord(j)).collect::<Vec<_>>().join(",")
}

/// Derivative multiset of a multi-index, in the same key format.
pub fn multi_index_key(chart: &Chart, alpha: &[usize]) -> String {
    key(chart, &geoquant::geometry::key_of_multi_index(alpha))
}

pub fn sym_tensor(t: &SymTensor) -> Value {
    let mut m = serde_json::Map::new();
    for (idx, c) in t.components() {
        if !c.is_zero() {
            m.insert(key(t.chart(), idx), expr(c));
        }
    }
    Value::Object(m)
}

pub fn inhom_tensor(t: &InhomTensor) -> Value {
    let mut parts = serde_json::Map::new();
    for p in t.parts() {
        parts.insert(p.order().to_string(), sym_tensor(p));
    }
    json!({ "variance": t.variance().name(), "parts": parts })
}

pub fn operator(op: &DiffOperator) -> Value {
    let mut m = serde_json::Map::new();
    for (alpha, c) in op.coefficients() {
        m.insert(multi_index_key(op.chart(), alpha), expr(c));
    }
    json!({ "order": op.order(), "coefficients": m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_string(&json!({ "x": 0.1, "n": 3 }));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
    }

    #[test]
    fn round_trips_through_serde_json() {
        let v = json!({ "a": [1.5, -2.25e-7, 0.0], "b": { "c": true } });
        let back: Value = serde_json::from_str(&to_string(&v)).unwrap();
        assert_eq!(back, v);
    }
}
