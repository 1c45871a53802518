//! Tabular and record output as CSV or JSON.
//!
//! Floats are rounded to 12 significant digits and printed in shortest
//! round-trip form, so repeated runs are byte-identical. Complex values are
//! `{"re", "im"}` objects in JSON and `<name>_re`, `<name>_im` columns in CSV.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Str(String),
    Complex(Complex64),
    Null,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(i64::from(x))
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<Complex64> for Value {
    fn from(z: Complex64) -> Self {
        Value::Complex(z)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Null, Into::into)
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Canonical text of a float: rounded, shortest round-trip, `.` separator.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    serde_json::to_string(&round_sig(x)).expect("finite float serializes")
}

struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(round_sig(self.0))
        } else {
            s.serialize_none()
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Num(x) => Num(*x).serialize(s),
            Value::Int(i) => s.serialize_i64(*i),
            Value::Str(t) => s.serialize_str(t),
            Value::Null => s.serialize_none(),
            Value::Complex(z) => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("re", &Num(z.re))?;
                m.serialize_entry("im", &Num(z.im))?;
                m.end()
            }
        }
    }
}

/// Ordered key-value record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_owned(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Record(Record),
    Table(Vec<Record>),
}

impl Serialize for Document {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Document::Record(r) => r.serialize(s),
            Document::Table(rows) => {
                let mut seq = s.serialize_seq(Some(rows.len()))?;
                for r in rows {
                    seq.serialize_element(r)?;
                }
                seq.end()
            }
        }
    }
}

fn csv_header(r: &Record) -> Vec<String> {
    let mut h = Vec::new();
    for (k, v) in &r.0 {
        if let Value::Complex(_) = v {
            h.push(format!("{k}_re"));
            h.push(format!("{k}_im"));
        } else {
            h.push(k.clone());
        }
    }
    h
}

fn csv_cells(r: &Record) -> Vec<String> {
    let mut c = Vec::new();
    for (_, v) in &r.0 {
        match v {
            Value::Num(x) => c.push(format_num(*x)),
            Value::Int(i) => c.push(i.to_string()),
            Value::Str(s) => c.push(s.clone()),
            Value::Null => c.push(String::new()),
            Value::Complex(z) => {
                c.push(format_num(z.re));
                c.push(format_num(z.im));
            }
        }
    }
    c
}

/// Writes `doc` in the given format. A table always gets a CSV header, even
/// when empty, provided `columns` names it.
pub fn write_document(doc: &Document, columns: &[&str], format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer(&mut *out, doc)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let rows: Vec<&Record> = match doc {
                Document::Record(r) => vec![r],
                Document::Table(rows) => rows.iter().collect(),
            };
            match rows.first() {
                Some(r) => w.write_record(csv_header(r))?,
                None => w.write_record(columns)?,
            }
            for r in rows {
                w.write_record(csv_cells(r))?;
            }
            w.flush()
        }
    }
}
