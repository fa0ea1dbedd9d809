//! JSON and CSV rendering of a command's report.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};

/// The document every command prints.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub input: Value,
    pub result: Value,
    pub certificates: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, input: Value) -> Self {
        Report {
            command,
            input,
            result: Value::Object(Map::new()),
            certificates: Value::Object(Map::new()),
            warnings: Vec::new(),
        }
    }
}

/// Formats `v` with 17 significant digits, in plain decimal notation when the
/// exponent is moderate.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..=16).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        out.push_str(&digits[..int_len]);
        out.push('.');
        let frac = &digits[int_len..];
        out.push_str(if frac.is_empty() { "0" } else { frac });
    }
    out
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json(report: &Report) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    report.serialize(&mut ser).expect("report serializes");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if !(n.is_i64() || n.is_u64()) => fmt17(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        _ => unreachable!("only scalars reach here"),
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, rows);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), child, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar(v))),
    }
}

/// One `field,value` row per scalar, with dotted paths for nesting.
pub fn to_csv(report: &Report) -> String {
    let mut rows = vec![("command".to_string(), report.command.to_string())];
    flatten("input", &report.input, &mut rows);
    flatten("result", &report.result, &mut rows);
    flatten("certificates", &report.certificates, &mut rows);
    for (i, w) in report.warnings.iter().enumerate() {
        rows.push((format!("warnings.{i}"), w.clone()));
    }
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["field", "value"]).expect("in-memory write");
    for (k, v) in rows {
        wtr.write_record([k, v]).expect("in-memory write");
    }
    String::from_utf8(wtr.into_inner().expect("flush to memory")).expect("CSV is UTF-8")
}
