use std::io::Write;

use serde::Serialize;

/// One line of output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    /// `module::operation` plus the parameters of this instance.
    pub check: String,
    pub anchor: String,
    pub value_re: f64,
    pub value_im: f64,
    pub bound: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
    pub millis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

const COLUMNS: [&str; 12] = [
    "suite",
    "check",
    "anchor",
    "value_re",
    "value_im",
    "bound",
    "threshold",
    "pass",
    "millis",
    "condition",
    "bits",
    "detail",
];

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_records(records: &[Record], csv: bool, out: &mut dyn Write) -> std::io::Result<()> {
    if csv {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in records {
            w.write_record([
                r.suite.clone(),
                r.check.clone(),
                r.anchor.clone(),
                r.value_re.to_string(),
                r.value_im.to_string(),
                cell(&r.bound),
                cell(&r.threshold),
                r.pass.to_string(),
                r.millis.to_string(),
                cell(&r.condition),
                cell(&r.bits),
                cell(&r.detail),
            ])?;
        }
        w.flush()?;
    } else {
        for r in records {
            let line = serde_json::to_string(r).map_err(std::io::Error::other)?;
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Human summary for stderr.
pub fn summarize(suite: &str, records: &[Record], err: &mut dyn Write) -> std::io::Result<()> {
    let passed = records.iter().filter(|r| r.pass).count();
    for r in records.iter().filter(|r| !r.pass) {
        let value =
            if r.value_im == 0.0 { format!("{:e}", r.value_re) } else { format!("{:e}{:+e}i", r.value_re, r.value_im) };
        let threshold = r.threshold.map(|t| format!("{t:e}")).unwrap_or_else(|| "-".into());
        write!(err, "FAIL {}: value {value} vs threshold {threshold}", r.check)?;
        match &r.detail {
            Some(d) => writeln!(err, " ({d})")?,
            None => writeln!(err)?,
        }
    }
    writeln!(err, "{suite}: {passed}/{} checks passed", records.len())
}
