//! Rendering of command results. Sweep commands name a row array inside their JSON
//! payload; CSV and JSON Lines output are generated from those same rows.

use std::io::Write;

use collatz_core::report::envelope;
use serde_json::Value;

use crate::args::Format;

pub struct Output {
    pub kind: &'static str,
    pub payload: Value,
    /// JSON pointer to an array of flat objects inside `payload`.
    pub rows: Option<&'static str>,
}

impl Output {
    pub fn new(kind: &'static str, payload: Value) -> Output {
        Output { kind, payload, rows: None }
    }

    pub fn with_rows(mut self, pointer: &'static str) -> Output {
        self.rows = Some(pointer);
        self
    }

    fn row_slice(&self) -> Option<&Vec<Value>> {
        self.rows.and_then(|p| self.payload.pointer(p)).and_then(Value::as_array)
    }

    pub fn render(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &envelope(self.kind, &self.payload))?;
                writeln!(out)
            }
            Format::Jsonl => match self.row_slice() {
                Some(rows) => {
                    for r in rows {
                        serde_json::to_writer(&mut *out, r)?;
                        writeln!(out)?;
                    }
                    Ok(())
                }
                None => {
                    serde_json::to_writer(&mut *out, &envelope(self.kind, &self.payload))?;
                    writeln!(out)
                }
            },
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                match self.row_slice() {
                    Some(rows) => {
                        let header = columns(rows);
                        w.write_record(&header)?;
                        for r in rows {
                            w.write_record(header.iter().map(|h| cell(r.get(h))))?;
                        }
                    }
                    None => {
                        w.write_record(["key", "value"])?;
                        for (k, v) in flatten(&self.payload) {
                            w.write_record([k, v])?;
                        }
                    }
                }
                w.flush()
            }
            Format::Text => {
                writeln!(out, "{}", self.kind)?;
                for (k, v) in flatten(&self.payload) {
                    writeln!(out, "  {k}: {v}")?;
                }
                Ok(())
            }
        }
    }
}

/// Keys of the first row, then any keys that appear later.
fn columns(rows: &[Value]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        if let Some(obj) = r.as_object() {
            for k in obj.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
    }
    cols
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(v @ (Value::Array(_) | Value::Object(_))) => v.to_string(),
        Some(v) => v.to_string(),
    }
}

/// Dotted paths to scalar leaves; arrays of scalars stay whole.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                walk(&join(k), x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                walk(&join(&i.to_string()), x, out);
            }
        }
        _ => out.push((prefix.to_string(), cell(Some(v)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn render(o: &Output, f: Format) -> String {
        let mut buf = Vec::new();
        o.render(f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_from_rows() {
        let o = Output::new("demo", json!({"n": 3, "rows": [{"a": 1, "b": "x"}, {"a": 2, "b": "y"}]})).with_rows("/rows");
        assert_eq!(render(&o, Format::Csv), "a,b\n1,x\n2,y\n");
        assert_eq!(render(&o, Format::Jsonl), "{\"a\":1,\"b\":\"x\"}\n{\"a\":2,\"b\":\"y\"}\n");
    }

    #[test]
    fn csv_without_rows_flattens() {
        let o = Output::new("demo", json!({"x": {"y": 1}, "v": [1, 2]}));
        assert_eq!(render(&o, Format::Csv), "key,value\nv,\"[1,2]\"\nx.y,1\n");
        let j: Value = serde_json::from_str(&render(&o, Format::Json)).unwrap();
        assert_eq!(j["kind"], "demo");
        assert_eq!(j["result"]["x"]["y"], 1);
    }
}
