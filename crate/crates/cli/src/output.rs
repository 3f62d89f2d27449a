//! Deterministic number formatting and the two document shapes: tables and
//! flat key/value records.

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

/// Rounds to 12 significant digits; `-0` becomes `0`.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    let r: f64 = format!("{v:.11e}").parse().expect("formatted float");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest representation of `v` rounded to 12 significant digits, in
/// exponent form outside `[1e-5, 1e16)`.
pub fn fmt_num(v: f64) -> String {
    let r = round12(v);
    let a = r.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(round12(v)).map_or(Value::Null, Value::Number)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn nums(vs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(vs.into_iter().map(num).collect())
}

/// Key/value record that keeps insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Value)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.0.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable record");
        s.push('\n');
        s
    }

    /// `key,value` lines; arrays are joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.0 {
            out.push_str(k);
            out.push(',');
            out.push_str(&csv_cell(v));
            out.push('\n');
        }
        out
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

pub fn csv_cell(v: &Value) -> String {
    let cell = match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_num),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => v.to_string(),
    };
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell
    }
}

/// Rows of records sharing the keys of the first row.
pub fn records_to_csv(rows: &[Record]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let mut out = first.keys().collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.0.iter().map(|(_, v)| csv_cell(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn records_to_json(rows: &[Record]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("serializable rows");
    s.push('\n');
    s
}
