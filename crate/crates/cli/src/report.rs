use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

/// Everything one invocation produced. Apart from `duration_ms`, the JSON is
/// a pure function of the command line and seed.
#[derive(Serialize, Debug)]
pub struct ExperimentReport {
    pub command: Vec<String>,
    pub seed: u64,
    pub parameters: Map<String, Value>,
    pub records: Vec<Value>,
    pub summary: Map<String, Value>,
    pub duration_ms: u64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command     {}", self.command.join(" "));
        let _ = writeln!(out, "seed        {}", self.seed);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "param       {k} = {}", scalar(v));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "summary     {k} = {}", scalar(v));
        }
        for (i, r) in self.records.iter().enumerate() {
            let fields = match r {
                Value::Object(m) => m
                    .iter()
                    .filter(|(k, _)| k.as_str() != "trace")
                    .map(|(k, v)| format!("{k}={}", scalar(v)))
                    .collect::<Vec<_>>()
                    .join("  "),
                other => scalar(other),
            };
            let _ = writeln!(out, "record {i:<4} {fields}");
        }
        let _ = writeln!(out, "duration    {} ms", self.duration_ms);
        out
    }
}

/// Compact text for a table cell; exact dyadics print as `m*2^e`.
fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Object(m) if m.len() == 2 && m.contains_key("mantissa") && m.contains_key("exp2") => {
            format!("{}*2^{}", scalar(&m["mantissa"]), m["exp2"])
        }
        other => other.to_string(),
    }
}
