//! Tables with a fixed column order, written as CSV or JSON.

use serde_json::{Map, Value};

/// Floats use 17 significant digits so files round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn to_csv(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_f64(x),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Cell::Int(i) => Value::from(i),
            // NaN and infinities become null
            Cell::Float(x) => serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_csv()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("plain values serialise");
        s.push('\n');
        s
    }
}

/// `{"value": x, "route": "..."}` entry of a constants map.
pub fn constant(value: f64, route: &str) -> Value {
    serde_json::json!({ "value": Cell::Float(value).to_json(), "route": route })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 12345.678901234567, -2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(vec!["seed", "x"]);
        t.push(vec![Cell::Int(3), Cell::Float(0.5)]);
        t.push(vec![Cell::Int(4), Cell::Float(f64::NAN)]);
        assert_eq!(t.to_csv(), "seed,x\n3,5.0000000000000000e-1\n4,NaN\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["x"], 0.5);
        assert!(v[1]["x"].is_null());
    }
}
