//! Deterministic JSON and CSV reports.

use cantor_dioph_core::arith::{Interval, LogInterval};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rows for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub seed: u64,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub certificates: Value,
    pub table: Option<Table>,
    /// Wall-clock seconds per phase; only emitted on request.
    pub timings: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Report {
            command,
            seed,
            inputs: Map::new(),
            outputs: Map::new(),
            certificates: Value::Null,
            table: None,
            timings: Map::new(),
        }
    }

    pub fn input(&mut self, k: &str, v: impl Into<Value>) -> &mut Self {
        self.inputs.insert(k.into(), v.into());
        self
    }

    pub fn output(&mut self, k: &str, v: impl Into<Value>) -> &mut Self {
        self.outputs.insert(k.into(), v.into());
        self
    }

    pub fn to_value(&self, with_timings: bool) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), self.command.into());
        m.insert("version".into(), VERSION.into());
        m.insert("seed".into(), self.seed.into());
        m.insert("inputs".into(), Value::Object(self.inputs.clone()));
        m.insert("outputs".into(), Value::Object(self.outputs.clone()));
        m.insert("certificates".into(), self.certificates.clone());
        if with_timings {
            m.insert("timings".into(), Value::Object(self.timings.clone()));
        }
        Value::Object(m)
    }

    pub fn to_json(&self, with_timings: bool) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value(with_timings)).expect("reports serialize");
        s.push('\n');
        s
    }

    /// The table when there is one, otherwise `key,value` pairs of the outputs.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.header)?;
                for r in &t.rows {
                    w.write_record(r)?;
                }
            }
            None => {
                w.write_record(["key", "value"])?;
                let mut pairs = Vec::new();
                for (k, v) in &self.outputs {
                    flatten(k, v, &mut pairs);
                }
                for (k, v) in pairs {
                    w.write_record([k, v])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format, with_timings: bool) -> Result<String, csv::Error> {
        match format {
            Format::Json => Ok(self.to_json(with_timings)),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Objects become dotted keys; arrays stay as JSON text.
fn flatten(key: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{key}.{k}"), x, out);
            }
        }
        Value::String(s) => out.push((key.into(), s.clone())),
        v => out.push((key.into(), v.to_string())),
    }
}

pub fn display_f64(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn int(n: &BigInt) -> Value {
    Value::String(n.to_string())
}

pub fn rat_str(x: &BigRational) -> String {
    x.to_string()
}

/// Exact value plus a decimal rendering that is for display only.
pub fn rat(x: &BigRational) -> Value {
    json!({ "exact": rat_str(x), "display_only": display_f64(x.to_f64().unwrap_or(f64::NAN)) })
}

pub fn vec_str(x: &[BigRational]) -> String {
    x.iter().map(rat_str).collect::<Vec<_>>().join(",")
}

pub fn interval(iv: &Interval) -> Value {
    json!({ "lo": rat_str(&iv.lo), "hi": rat_str(&iv.hi), "display_only": display_f64(iv.mid_f64()) })
}

pub fn log_interval(l: &LogInterval) -> Value {
    interval(l.interval())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_falls_back_to_pairs() {
        let mut r = Report::new("x", 1);
        r.output("a", 1).output("b", "two,three").output("c", json!({ "x": "1/2" }));
        assert_eq!(r.to_csv().unwrap(), "key,value\na,1\nb,\"two,three\"\nc.x,1/2\n");
    }

    #[test]
    fn timings_are_optional() {
        let r = Report::new("x", 7);
        assert!(!r.to_json(false).contains("timings"));
        assert!(r.to_json(true).contains("timings"));
        assert_eq!(r.to_json(false), r.clone().to_json(false));
    }

    #[test]
    fn rationals_carry_exact_and_display() {
        let v = rat(&BigRational::new(1.into(), 6.into()));
        assert_eq!(v["exact"], "1/6");
        assert_eq!(v["display_only"], "1.666666666667e-1");
    }
}
