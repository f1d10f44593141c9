use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

/// Floats with 17 significant digits, which round-trip every f64.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_num(value).as_bytes())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A result ready for printing: always a JSON value, plus an optional
/// table for commands whose natural CSV form is not `key,value`.
pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(json: Value) -> Self {
        Report { json, table: None }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(&self.json) + "\n",
            Format::Csv => match &self.table {
                Some(t) => t.render(),
                None => {
                    let mut rows = Vec::new();
                    flatten("", &self.json, &mut rows);
                    Table {
                        header: vec!["key".into(), "value".into()],
                        rows,
                    }
                    .render()
                }
            },
        }
    }
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
    }
}

/// `{"a": {"b": [1, 2]}}` becomes rows `a.b.1,1` and `a.b.2,2`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&(i + 1).to_string()), v, out)),
        Value::Number(n) => {
            let s = match n.as_f64() {
                Some(f) if !(n.is_i64() || n.is_u64()) => fmt_num(f),
                _ => n.to_string(),
            };
            out.push(vec![prefix.to_string(), s]);
        }
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        Value::Bool(b) => out.push(vec![prefix.to_string(), b.to_string()]),
        Value::Null => out.push(vec![prefix.to_string(), String::new()]),
    }
}

pub fn error_envelope(code: &str, message: &str) -> String {
    to_json(&serde_json::json!({ "error": { "code": code, "message": message } })) + "\n"
}
