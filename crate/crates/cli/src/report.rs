//! Run reports: one JSON object per command with sorted keys and
//! 17-significant-digit floats, so identical runs print identical bytes.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::value::RawValue;

/// Formats a float with 17 significant digits as a raw JSON number.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v)
    } else {
        "null".to_string()
    }
}

/// Deterministic per-command report. Field order is alphabetical and
/// map keys are sorted, so serialization is byte-stable.
#[derive(Debug, Serialize)]
pub struct RunReport {
    command: String,
    metrics: BTreeMap<String, Box<RawValue>>,
    parameters: BTreeMap<String, String>,
    version: String,
    warnings: Vec<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        RunReport {
            command: command.into(),
            metrics: BTreeMap::new(),
            parameters: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            warnings: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        let raw = RawValue::from_string(format_f64(value)).expect("formatted float is valid JSON");
        self.metrics.insert(name.into(), raw);
        self
    }

    pub fn parameter(&mut self, name: impl Into<String>, value: impl ToString) -> &mut Self {
        self.parameters.insert(name.into(), value.to_string());
        self
    }

    pub fn warning(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(format_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-2.0f64.powi(100)), "-1.2676506002282294e30");
    }

    #[test]
    fn report_serializes_with_sorted_keys() {
        let mut r = RunReport::new("demo");
        r.metric("zeta", 1.0).metric("alpha", 0.5);
        r.parameter("k", 10).parameter("a", "x");
        let json = r.to_json();
        let alpha = json.find("\"alpha\"").unwrap();
        let zeta = json.find("\"zeta\"").unwrap();
        assert!(alpha < zeta);
        assert!(json.starts_with("{\"command\":\"demo\""));
        // Valid JSON with raw number values.
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["metrics"]["alpha"], serde_json::json!(0.5));
    }

    #[test]
    fn identical_reports_are_byte_identical() {
        let make = || {
            let mut r = RunReport::new("x");
            r.metric("m", std::f64::consts::E);
            r.parameter("p", 3);
            r.to_json()
        };
        assert_eq!(make(), make());
    }
}
