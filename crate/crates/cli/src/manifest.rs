use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

/// One printed number (or string) together with where it came from.
#[derive(Clone, Debug, Serialize)]
pub struct Output {
    pub name: String,
    pub value: Value,
    /// Formula trace for computed values, or `"seeds"` for Monte Carlo values.
    pub provenance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// Record of a single invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub kappa: f64,
    pub seeds: Vec<u64>,
    pub tool_version: &'static str,
    pub timestamp: u64,
    pub outputs: Vec<Output>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn new(command: &str, params: Value, kappa: f64) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        RunManifest {
            command: command.to_string(),
            params,
            kappa,
            seeds: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp,
            outputs: Vec::new(),
            details: Value::Null,
            exit_code: 0,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: Value, provenance: impl Into<String>) {
        self.outputs.push(Output { name: name.into(), value, provenance: provenance.into(), tolerance: None });
    }

    pub fn push_tol(&mut self, name: impl Into<String>, value: Value, provenance: impl Into<String>, tol: f64) {
        self.outputs.push(Output { name: name.into(), value, provenance: provenance.into(), tolerance: Some(tol) });
    }

    /// Plain two-column table, or `name,value` lines.
    pub fn render(&self, csv: bool) -> String {
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let mut out = String::new();
        if csv {
            out.push_str("name,value\n");
            for o in &self.outputs {
                out.push_str(&format!("{},{}\n", quote(&o.name), quote(&cell(&o.value))));
            }
        } else {
            let width = self.outputs.iter().map(|o| o.name.chars().count()).max().unwrap_or(0);
            for o in &self.outputs {
                let pad = width - o.name.chars().count();
                out.push_str(&format!("{}{}  {}\n", o.name, " ".repeat(pad), cell(&o.value)));
            }
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
