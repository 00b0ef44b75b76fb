//! Study tables in CSV and markdown.

use std::path::Path;

use crate::analysis::ConvergenceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

pub const CSV_HEADER: &str = "R,err_l2_obstacle,rate_l2,err_h1,rate_h1";

/// Six significant digits; positional for exponents in `[-3, 5]`, otherwise
/// scientific (`2.48610e-4`).
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).expect("exponent");
    if (-3..=5).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        sci
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn format_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_number(r.r),
            format_number(r.err_l2_obstacle),
            cell(r.rate_l2),
            format_number(r.err_h1),
            cell(r.rate_h1)
        ));
    }
    out
}

/// Error/rate pairs per norm, one row per penalty value.
pub fn format_markdown(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("| R | L2 error on obstacle | Rate | H1 error | Rate |\n|---|---|---|---|---|\n");
    for r in records {
        let rate = |v: Option<f64>| v.map(format_number).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            format_number(r.r),
            format_number(r.err_l2_obstacle),
            rate(r.rate_l2),
            format_number(r.err_h1),
            rate(r.rate_h1)
        ));
    }
    out
}

pub fn write_table(records: &[ConvergenceRecord], path: &Path, format: TableFormat) -> std::io::Result<()> {
    let text = match format {
        TableFormat::Csv => format_csv(records),
        TableFormat::Markdown => format_markdown(records),
    };
    std::fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_number(1.0), "1.00000");
        assert_eq!(format_number(0.99999999), "1.00000");
        assert_eq!(format_number(9.999996), "10.0000");
        assert_eq!(format_number(429.61), "429.610");
        assert_eq!(format_number(1e5), "100000");
        assert_eq!(format_number(1e6), "1.00000e6");
        assert_eq!(format_number(2.4861e-4), "2.48610e-4");
        assert_eq!(format_number(0.0012345678), "0.00123457");
        assert_eq!(format_number(-0.5), "-0.500000");
        assert_eq!(format_number(0.0), "0.00000");
    }

    #[test]
    fn single_record_has_empty_rates() {
        let rec = ConvergenceRecord { r: 1.0, err_l2_obstacle: 0.5, rate_l2: None, err_h1: 2.0, rate_h1: None };
        assert_eq!(format_csv(&[rec]), "R,err_l2_obstacle,rate_l2,err_h1,rate_h1\n1.00000,0.500000,,2.00000,\n");
        let md = format_markdown(&[rec]);
        assert_eq!(md.lines().count(), 3);
        assert!(md.lines().nth(2).unwrap().contains("| - |"));
    }
}
