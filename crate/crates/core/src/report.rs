//! Verification reports with deterministic JSON and Markdown rendering.

use std::io;

use serde::Serialize;
use serde_json::Value;

use crate::liealg::{Family, Presentation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// Numeric comparison with an absolute tolerance.
    pub fn close(name: impl Into<String>, expected: f64, actual: f64, tol: f64) -> Self {
        let residual = (expected - actual).abs();
        Check {
            name: name.into(),
            expected: num(expected),
            actual: num(actual),
            residual,
            pass: residual <= tol,
        }
    }

    /// A residual that must not exceed `tol`.
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected: num(0.0),
            actual: num(residual),
            residual,
            pass: residual <= tol,
        }
    }

    pub fn with_values(
        name: impl Into<String>,
        expected: impl Serialize,
        actual: impl Serialize,
        residual: f64,
        pass: bool,
    ) -> Self {
        Check {
            name: name.into(),
            expected: serde_json::to_value(expected).unwrap_or(Value::Null),
            actual: serde_json::to_value(actual).unwrap_or(Value::Null),
            residual,
            pass,
        }
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(x.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PresentationSummary {
    pub family: Family,
    pub n: usize,
    pub tau: f64,
    pub dim_p1: usize,
    pub dim_p2: usize,
}

impl From<&Presentation> for PresentationSummary {
    fn from(p: &Presentation) -> Self {
        PresentationSummary { family: p.family(), n: p.n(), tau: p.tau(), dim_p1: p.dim_p1(), dim_p2: p.dim_p2() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub presentation: Option<PresentationSummary>,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: Vec<String>, presentation: Option<&Presentation>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            presentation: presentation.map(PresentationSummary::from),
            checks: Vec::new(),
            pass: true,
            data: None,
            wall_time_s: None,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn set_data(&mut self, data: impl Serialize) {
        self.data = serde_json::to_value(data).ok();
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# {}\n\n", self.command.join(" ")));
        if let Some(p) = &self.presentation {
            s.push_str(&format!(
                "Presentation: F = {}, n = {}, tau = {}, dim p1 = {}, dim p2 = {}\n\n",
                p.family,
                p.n,
                fmt_f64(p.tau),
                p.dim_p1,
                p.dim_p2
            ));
        }
        s.push_str("| check | expected | actual | residual | pass |\n|---|---|---|---|---|\n");
        for c in &self.checks {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                c.name.replace('|', "\\|"),
                to_json_string(&c.expected).replace('|', "\\|"),
                to_json_string(&c.actual).replace('|', "\\|"),
                fmt_f64(c.residual),
                if c.pass { "yes" } else { "NO" }
            ));
        }
        s.push_str(&format!("\nOverall: {}\n", if self.pass { "PASS" } else { "FAIL" }));
        s
    }
}

/// Seventeen significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Compact JSON with every float printed by [`fmt_f64`]. Non-finite floats
/// become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("serializing to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_fixed_width() {
        let s = to_json_string(&vec![0.1, 1.0, -2.5e-13]);
        assert_eq!(s, "[1.0000000000000001e-1,1.0000000000000000e0,-2.4999999999999999e-13]");
        let back: Vec<f64> = s.trim_matches(['[', ']']).split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, vec![0.1, 1.0, -2.5e-13]);
    }

    #[test]
    fn pass_flag_tracks_checks() {
        let mut r = Report::new(vec!["t".into()], None);
        r.push(Check::close("a", 1.0, 1.0 + 1e-13, 1e-12));
        assert!(r.pass);
        r.push(Check::residual("b", 1e-3, 1e-9));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_markdown().contains("| b |"));
        assert!(r.to_json().contains("\"schema_version\":1"));
    }
}
