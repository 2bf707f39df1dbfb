//! Report documents and their JSON and CSV encodings.
//!
//! JSON objects are written with sorted keys and every non-integer number
//! rendered with exactly six decimals, so equal inputs give byte-identical
//! files.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use qkdrand_core::battery::{BatteryReport, TestOutcome};
use qkdrand_core::qkd::{PipelineReport, QberEstimate, RoundCounts};
use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
    pub schema: u32,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo { name: "qkdrand".into(), version: env!("CARGO_PKG_VERSION").into(), schema: SCHEMA_VERSION }
    }
}

/// One cell of the attrition table: bits alive after `phase` in `round`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttritionRow {
    pub round: usize,
    pub phase: String,
    pub bits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub aborted: bool,
    pub abort_reason: Option<String>,
    pub qber: Option<QberEstimate>,
    pub corrected_errors: usize,
    pub leaked_bits: usize,
    pub residual_mismatches: usize,
    pub final_key_bits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub attrition: Vec<AttritionRow>,
    pub rounds: Vec<RoundSummary>,
    pub battery: Vec<BatteryReport>,
}

impl ReportDocument {
    pub fn new(config: RunConfig) -> Self {
        ReportDocument { tool: ToolInfo::default(), config, attrition: Vec::new(), rounds: Vec::new(), battery: Vec::new() }
    }

    pub fn add_pipeline(&mut self, report: &PipelineReport) {
        for r in &report.rounds {
            self.attrition.extend(attrition_rows(r.round, &r.counts));
            self.rounds.push(RoundSummary {
                round: r.round,
                aborted: r.aborted,
                abort_reason: r.abort_reason.clone(),
                qber: r.qber,
                corrected_errors: r.corrected_errors,
                leaked_bits: r.leaked_bits,
                residual_mismatches: r.residual_mismatches,
                final_key_bits: r.counts.after_pa,
            });
        }
    }

    /// True when some test that ran did not pass.
    pub fn has_failures(&self) -> bool {
        self.battery.iter().any(|b| !b.all_passed())
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        let mut text = serde_json::to_string_pretty(&fix_decimals(value)).expect("value is serializable");
        text.push('\n');
        text
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["round", "phase", "bits"]).expect("in-memory write");
            for row in &self.attrition {
                w.write_record([row.round.to_string(), row.phase.clone(), row.bits.to_string()]).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        out.push(b'\n');
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["round", "test", "pvalue_index", "pvalue", "verdict"]).expect("in-memory write");
            for report in &self.battery {
                let round = report.metadata.round.map(|r| r.to_string()).unwrap_or_default();
                for outcome in &report.outcomes {
                    let TestOutcome::Ran(r) = outcome else { continue };
                    for (i, &p) in r.p_values.iter().enumerate() {
                        let verdict = if p >= r.alpha { "pass" } else { "fail" };
                        w.write_record([round.clone(), r.test.name().to_string(), i.to_string(), fixed6(p), verdict.into()])
                            .expect("in-memory write");
                    }
                }
            }
            w.flush().expect("in-memory write");
        }
        String::from_utf8(out).expect("csv output is utf-8")
    }
}

pub fn attrition_rows(round: usize, counts: &RoundCounts) -> Vec<AttritionRow> {
    RoundCounts::PHASES
        .iter()
        .zip(counts.as_array())
        .map(|(phase, bits)| AttritionRow { round, phase: phase.to_string(), bits })
        .collect()
}

/// `x` with six decimals; negative zero prints as `0.000000`.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fix_decimals(v: Value) -> Value {
    match v {
        Value::Number(n) if !n.is_u64() && !n.is_i64() => match n.as_f64() {
            Some(x) if x.is_finite() => Value::Number(Number::from_str(&fixed6(x)).expect("fixed decimal is valid JSON")),
            _ => Value::Null,
        },
        Value::Array(items) => Value::Array(items.into_iter().map(fix_decimals).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, fix_decimals(v))).collect()),
        other => other,
    }
}

pub fn write_output(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    file.sync_all()
}

/// Splits a combined CSV back into its attrition and battery sections.
pub fn split_csv_sections(text: &str) -> (Vec<csv::StringRecord>, Vec<csv::StringRecord>) {
    let mut parts = text.splitn(2, "\n\n");
    let read = |s: &str| -> Vec<csv::StringRecord> {
        csv::Reader::from_reader(s.as_bytes()).records().map(|r| r.expect("well-formed csv")).collect()
    };
    let attrition = parts.next().map(read).unwrap_or_default();
    let battery = parts.next().map(read).unwrap_or_default();
    (attrition, battery)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkdrand_core::battery::{run_battery_with_metadata, BatteryConfig, BatteryMetadata, TestId};
    use qkdrand_core::BitSequence;

    fn sample_doc() -> ReportDocument {
        let mut doc = ReportDocument::new(RunConfig::default());
        let seq: BitSequence = (0..20_000).map(|i| (i * 7919) % 13 < 6).collect();
        let cfg = BatteryConfig::with_tests(vec![TestId::Frequency, TestId::Serial]);
        doc.battery.push(run_battery_with_metadata(
            &seq,
            &cfg,
            BatteryMetadata { source: "test".into(), seed: None, round: Some(1) },
        ));
        doc
    }

    #[test]
    fn attrition_row_format() {
        let mut doc = ReportDocument::new(RunConfig::default());
        doc.attrition.push(AttritionRow { round: 1, phase: "after_pa".into(), bits: 41_000 });
        let csv = doc.to_csv();
        assert!(csv.lines().any(|l| l == "1,after_pa,41000"), "{csv}");
        assert!(csv.starts_with("round,phase,bits\n"));
        assert!(csv.contains("\n\nround,test,pvalue_index,pvalue,verdict\n"));
    }

    #[test]
    fn empty_report_is_valid_json() {
        let doc = ReportDocument::new(RunConfig::default());
        let v: Value = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(v["attrition"], Value::Array(vec![]));
        assert_eq!(v["battery"], Value::Array(vec![]));
        assert_eq!(v["rounds"], Value::Array(vec![]));
    }

    #[test]
    fn six_decimals_everywhere() {
        let json = sample_doc().to_json();
        assert!(json.contains("\"alpha\": 0.010000"), "{json}");
        let v: Value = serde_json::from_str(&json).unwrap();
        fn check(v: &Value) {
            match v {
                Value::Number(n) if !n.is_u64() && !n.is_i64() => {
                    let s = n.to_string();
                    let decimals = s.split('.').nth(1).map_or(0, str::len);
                    assert_eq!(decimals, 6, "{s}");
                }
                Value::Array(a) => a.iter().for_each(check),
                Value::Object(m) => m.values().for_each(check),
                _ => {}
            }
        }
        check(&v);
    }

    #[test]
    fn json_and_csv_agree() {
        let doc = sample_doc();
        let v: Value = serde_json::from_str(&doc.to_json()).unwrap();
        let (_, battery) = split_csv_sections(&doc.to_csv());
        let mut from_json = Vec::new();
        for outcome in v["battery"][0]["outcomes"].as_array().unwrap() {
            for p in outcome["p_values"].as_array().unwrap() {
                from_json.push(p.to_string());
            }
        }
        let from_csv: Vec<String> = battery.iter().map(|r| r[3].to_string()).collect();
        assert_eq!(from_json, from_csv);
        assert_eq!(from_csv.len(), 3);
        for (row, p) in battery.iter().zip(&from_csv) {
            let p: f64 = p.parse().unwrap();
            assert_eq!(&row[4], if p >= 0.01 { "pass" } else { "fail" });
            assert_eq!(&row[0], "1");
        }
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(fixed6(-0.0), "0.000000");
        assert_eq!(fixed6(-1e-9), "0.000000");
        assert_eq!(fixed6(0.6044582693), "0.604458");
    }
}
