//! CSV files.
//!
//! Regret file: `t,variant,epsilon,delta,mean_cum_regret,std_cum_regret`
//! plus `upper_bound` when any trace carries an overlay. Rows are sorted by
//! variant name, then ε, δ and t. Statistics use six significant digits in
//! C `%g` style; parameters use the shortest round-trip form.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Result, SimError};
use crate::harness::{RegretTrace, SummaryRow};

pub const REGRET_HEADER: &str = "t,variant,epsilon,delta,mean_cum_regret,std_cum_regret";
pub const SUMMARY_HEADER: &str =
    "variant,epsilon,delta,num_items,list_size,repetitions,final_mean_regret,final_std_regret,error";

/// `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| SimError::io(path, e))
}

/// Renders traces as regret CSV text.
pub fn regret_csv(traces: &[RegretTrace]) -> Result<String> {
    if traces.is_empty() {
        return Err(SimError::Aggregation("no traces to write".into()));
    }
    let overlay = traces.iter().any(|t| t.upper_bound.is_some());
    let mut order: Vec<&RegretTrace> = traces.iter().collect();
    order.sort_by(|a, b| {
        a.variant
            .name()
            .cmp(b.variant.name())
            .then(cmp_f64(a.params.epsilon, b.params.epsilon))
            .then(cmp_f64(a.params.delta, b.params.delta))
    });

    let mut out = String::from(REGRET_HEADER);
    if overlay {
        out.push_str(",upper_bound");
    }
    out.push('\n');
    for trace in order {
        let eps = trace.params.epsilon.to_string();
        let delta = trace.params.delta.to_string();
        for (i, t) in trace.rounds.iter().enumerate() {
            out.push_str(&format!(
                "{t},{},{eps},{delta},{},{}",
                trace.variant,
                format_sig6(trace.mean[i]),
                format_sig6(trace.std[i])
            ));
            if overlay {
                out.push(',');
                if let Some(ub) = &trace.upper_bound {
                    out.push_str(&format_sig6(ub[i]));
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_csv(traces: &[RegretTrace], path: &Path) -> Result<()> {
    let text = regret_csv(traces)?;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}

/// One parsed row of a regret CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RegretRow {
    pub t: u64,
    pub variant: String,
    pub epsilon: f64,
    pub delta: f64,
    pub mean_cum_regret: f64,
    pub std_cum_regret: f64,
    #[serde(default, deserialize_with = "csv::invalid_option")]
    pub upper_bound: Option<f64>,
}

pub fn read_csv(path: &Path) -> Result<Vec<RegretRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<RegretRow>, _>>()
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::io(path, io),
        other => SimError::Aggregation(format!("{}: {other:?}", path.display())),
    }
}

/// Renders summary rows, sorted by list size, item count, variant and ε.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut order: Vec<&SummaryRow> = rows.iter().collect();
    order.sort_by(|a, b| {
        a.list_size
            .cmp(&b.list_size)
            .then(a.num_items.cmp(&b.num_items))
            .then(a.variant.name().cmp(b.variant.name()))
            .then(cmp_f64(a.epsilon, b.epsilon))
            .then(cmp_f64(a.delta, b.delta))
    });
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in order {
        let (mean, std) = if r.error.is_some() {
            (String::new(), String::new())
        } else {
            (format_sig6(r.final_mean_regret), format_sig6(r.final_std_regret))
        };
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{mean},{std},{error}\n",
            r.variant, r.epsilon, r.delta, r.num_items, r.list_size, r.repetitions
        ));
    }
    out
}

pub fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(summary_csv(rows).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}

/// Aligned plain-text table for the terminal.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<22} {:>8} {:>8} {:>4} {:>3} {:>14} {:>12}\n",
        "variant", "epsilon", "delta", "L", "K", "final_mean", "final_std"
    );
    for r in rows {
        let stats = match &r.error {
            Some(e) => format!("failed: {e}"),
            None => format!(
                "{:>14} {:>12}",
                format_sig6(r.final_mean_regret),
                format_sig6(r.final_std_regret)
            ),
        };
        out.push_str(&format!(
            "{:<22} {:>8} {:>8} {:>4} {:>3} {stats}\n",
            r.variant.name(),
            r.epsilon,
            r.delta,
            r.num_items,
            r.list_size
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_c_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234567, "1.23457e-05"),
            (3.14159265, "3.14159"),
            (999999.5, "1e+06"),
            (-2.5, "-2.5"),
            (100.0, "100"),
            (0.1 + 0.2, "0.3"),
            (12.0000049, "12"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig6(x), want, "{x}");
        }
    }
}
