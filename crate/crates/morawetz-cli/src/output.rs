//! Deterministic report serialization. Every floating-point value is
//! written with 17 significant digits (`{:.16e}`), enough to reproduce the
//! exact bits on read-back, and every file starts with a single timestamp
//! line; stripping that one line leaves output that is byte-identical
//! across repeated runs with the same configuration and seed.

use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// Seventeen significant digits: the shortest fixed format that encodes an
/// `f64` losslessly.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        return String::from("nan");
    }
    if v.is_infinite() {
        return String::from(if v > 0.0 { "inf" } else { "-inf" });
    }
    format!("{v:.16e}")
}

pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// One cell of a CSV row.
pub enum Cell<'a> {
    Str(&'a str),
    Int(i64),
    UInt(u64),
    Float(f64),
    Bool(bool),
}

impl Cell<'_> {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => {
                debug_assert!(!s.contains(',') && !s.contains('\n'), "cell needs quoting: {s}");
                (*s).to_string()
            }
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

/// Comma-separated table with the timestamp comment and a header row.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Csv {
        let mut buf = format!("# generated_at_unix_s {}\n", unix_timestamp());
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv { buf, columns: columns.len() }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&cell.render());
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Render a JSON value with two-space indentation and all floats in the
/// fixed 17-digit format. Object keys keep their insertion order.
pub fn render_json(value: &Value) -> String {
    let mut out = String::new();
    render_value(value, 0, &mut out);
    out.push('\n');
    out
}

/// Wrap a report object with the single timestamp header field.
pub fn json_report(body: Value) -> Result<String, CliError> {
    let Value::Object(entries) = body else {
        return Err(CliError::Config("internal: report body must be a JSON object".into()));
    };
    let mut wrapped = serde_json::Map::new();
    wrapped.insert("generated_at_unix_s".into(), Value::from(unix_timestamp()));
    wrapped.extend(entries);
    Ok(render_json(&Value::Object(wrapped)))
}

fn render_value(value: &Value, depth: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                // Finite by construction: serde_json cannot hold a
                // non-finite f64.
                out.push_str(&fmt_float(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(depth + 1, out);
                render_value(item, depth + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push(']');
        }
        Value::Object(entries) => {
            if entries.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (key, item)) in entries.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&serde_json::to_string(key).expect("strings always serialize"));
                out.push_str(": ");
                render_value(item, depth + 1, out);
                if i + 1 < entries.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push('}');
        }
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Drop the timestamp header from rendered output: the `# generated_at`
/// comment line of a CSV or the `"generated_at_unix_s"` field line of a
/// JSON report. What remains is reproducible byte for byte.
pub fn strip_timestamp_line(text: &str) -> String {
    text.lines()
        .filter(|line| {
            !line.starts_with("# generated_at_unix_s")
                && !line.trim_start().starts_with("\"generated_at_unix_s\"")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.001953125), "-1.9531250000000000e-3");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        let v = core::f64::consts::PI * 1e-7;
        let back: f64 = fmt_float(v).parse().unwrap();
        assert_eq!(back.to_bits(), v.to_bits());
        assert_eq!(fmt_float(f64::NAN), "nan");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn json_rendering_distinguishes_floats_from_integers() {
        let value = json!({
            "count": 3,
            "ratio": 0.5,
            "name": "k",
            "flags": [true, false],
            "nested": {"empty": [], "none": null}
        });
        let text = render_json(&value);
        assert!(text.contains("\"count\": 3,"));
        assert!(text.contains("\"ratio\": 5.0000000000000000e-1,"));
        assert!(text.contains("\"name\": \"k\""));
        assert!(text.contains("\"empty\": []"));
        assert!(text.contains("\"none\": null"));
    }

    #[test]
    fn report_wrapper_puts_the_timestamp_on_one_line() {
        let body = json!({"alpha": 10.0});
        let text = json_report(body).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("{"));
        let ts_line = lines.next().unwrap();
        assert!(ts_line.trim_start().starts_with("\"generated_at_unix_s\": "));
        let stripped = strip_timestamp_line(&text);
        assert!(!stripped.contains("generated_at"));
        assert!(stripped.contains("\"alpha\""));
    }

    #[test]
    fn csv_rows_join_rendered_cells() {
        let mut csv = Csv::new(&["check", "value", "passed"]);
        csv.row(&[Cell::Str("ratio"), Cell::Float(0.75), Cell::Bool(true)]);
        let text = csv.finish();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# generated_at_unix_s "));
        assert_eq!(lines[1], "check,value,passed");
        assert_eq!(lines[2], "ratio,7.5000000000000000e-1,true");
    }
}
