//! Experiment reports and their byte-stable serialization.
//!
//! Reports are deterministic for fixed (version, seed, parameters): maps are
//! ordered, nothing carries timestamps, and every float is written with 17
//! significant digits so a reload reproduces the binary double exactly.

use esl_core::suite::Check;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::{self, Write};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope shared by every command that emits a report.
#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub experiment: String,
    pub version: &'static str,
    pub seed: u64,
    pub parameters: BTreeMap<String, String>,
    pub results: T,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl<T: Serialize> Report<T> {
    pub fn new(
        experiment: impl Into<String>,
        seed: u64,
        parameters: BTreeMap<String, String>,
        results: T,
        checks: Vec<Check>,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { experiment: experiment.into(), version: TOOL_VERSION, seed, parameters, results, checks, passed }
    }
}

/// JSON formatter writing every f64 with 17 significant digits
/// (`{:.16e}`), which round-trips binary doubles exactly.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.16e}", value)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

/// Format one float the way matrix CSV files store entries.
pub fn format_entry(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for &v in &[0.0, 1.0, 1.0 / 3.0, 2.0 / 3.0, 0.05, 20.0 / 3.0, f64::MIN_POSITIVE] {
            let s = format_entry(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn json_uses_sig_digit_floats() {
        let bytes = to_json_bytes(&vec![1.0 / 3.0]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        let back: Vec<f64> = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(back[0], 1.0 / 3.0);
    }
}
