//! Report rendering. Text reports are `key=value` lines; JSON reports are a
//! single object tagged with [`SCHEMA`].

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "icbsif-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Ordered field list for one command's report.
pub struct Report {
    command: &'static str,
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_owned(), value.into()));
        self
    }

    /// Appends every field of a JSON object.
    pub fn merge(mut self, value: Value) -> Self {
        if let Value::Object(map) = value {
            self.fields.extend(map);
        }
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self
                .fields
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}={s}\n"),
                    Value::Number(n) if n.is_f64() => {
                        format!("{k}={:.6}\n", n.as_f64().unwrap_or(f64::NAN))
                    }
                    other => format!("{k}={other}\n"),
                })
                .collect(),
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("schema".into(), SCHEMA.into());
                obj.insert("command".into(), self.command.into());
                obj.extend(self.fields.iter().cloned());
                let mut s =
                    serde_json::to_string_pretty(&Value::Object(obj)).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}
