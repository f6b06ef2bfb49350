use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainRow {
    /// 1-based subdomain id.
    pub i: usize,
    pub deg: usize,
    /// 1-based ids of the adjacent subdomains.
    pub i_ad: Vec<usize>,
    pub l_in: u64,
    pub l_r: u64,
    pub l_fin: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioReport {
    pub case: String,
    pub n: usize,
    pub m: u64,
    pub p: usize,
    pub seed: u64,
    pub subdomains: Vec<SubdomainRow>,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "T_DyDD")]
    pub t_dydd: f64,
    #[serde(rename = "T_r")]
    pub t_r: f64,
    #[serde(rename = "Oh_DyDD")]
    pub oh_dydd: f64,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "Tp")]
    pub tp: f64,
    pub speedup: f64,
    pub efficiency: f64,
    /// `‖x̂_KF − x̂_DD‖∞`.
    pub error: f64,
    pub iterations: usize,
    pub rounds: usize,
    pub converged: bool,
    pub balanced: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 18] = [
    "case", "p", "i", "deg", "i_ad", "l_in", "l_r", "l_fin", "E", "T_DyDD", "T_r", "Oh_DyDD",
    "T1", "Tp", "speedup", "efficiency", "error", "iterations",
];

/// Six significant digits, `%#.6g` style.
pub fn fmt6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // Exponent after rounding, so 9.999996 counts as 1.00000e1.
    let sci = format!("{:.5e}", v);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        sci
    }
}

/// `v` rounded to six significant digits.
pub fn round6(v: f64) -> f64 {
    fmt6(v).parse().unwrap_or(v)
}

impl ScenarioReport {
    /// Copy with every float rounded to six significant digits, as emitted.
    pub fn rounded(&self) -> Self {
        Self {
            e: round6(self.e),
            t_dydd: round6(self.t_dydd),
            t_r: round6(self.t_r),
            oh_dydd: round6(self.oh_dydd),
            t1: round6(self.t1),
            tp: round6(self.tp),
            speedup: round6(self.speedup),
            efficiency: round6(self.efficiency),
            error: round6(self.error),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rounded()).expect("report serialises")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS)?;
        for row in &self.subdomains {
            let ad = row.i_ad.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            w.write_record([
                self.case.clone(),
                self.p.to_string(),
                row.i.to_string(),
                row.deg.to_string(),
                format!("[{ad}]"),
                row.l_in.to_string(),
                row.l_r.to_string(),
                row.l_fin.to_string(),
                fmt6(self.e),
                fmt6(self.t_dydd),
                fmt6(self.t_r),
                fmt6(self.oh_dydd),
                fmt6(self.t1),
                fmt6(self.tp),
                fmt6(self.speedup),
                fmt6(self.efficiency),
                fmt6(self.error),
                self.iterations.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Json => Ok(self.to_json()),
        }
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &ScenarioReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
