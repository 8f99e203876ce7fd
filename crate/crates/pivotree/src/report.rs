//! CSV and metadata rendering for evaluation reports.
//!
//! Column order is fixed and every real is printed with six significant
//! digits, so identical reports render to identical bytes.

use std::fmt::Write as _;

use pivotree_core::EvalReport;

pub const ROWS_HEADER: &str = "method,gamma,query_id,precision,spearman,prune_fraction,scored";
pub const SUMMARY_HEADER: &str = "method,gamma,queries,mean_precision,mean_spearman,mean_prune_fraction,mean_scored";

/// Formats `x` like C's `%g` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One line per (method, gamma, query). `query_ids[i]` names query `i`.
pub fn rows_csv(report: &EvalReport, query_ids: &[String]) -> String {
    let mut out = String::from(ROWS_HEADER);
    out.push('\n');
    for r in &report.rows {
        let id = query_ids.get(r.query).map_or_else(|| r.query.to_string(), Clone::clone);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.method.name(),
            sig6(r.gamma),
            id,
            sig6(r.precision),
            sig6(r.spearman),
            sig6(r.prune_fraction),
            r.scored
        );
    }
    out
}

/// One line per (method, gamma) with per-query means.
pub fn summary_csv(report: &EvalReport) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for a in &report.aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            a.method.name(),
            sig6(a.gamma),
            a.queries,
            sig6(a.mean_precision),
            sig6(a.mean_spearman),
            sig6(a.mean_prune_fraction),
            sig6(a.mean_scored)
        );
    }
    out
}

/// `key=value` lines; `extra` pairs are appended in the given order.
pub fn meta_text(report: &EvalReport, extra: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_docs={}", report.n_docs);
    let _ = writeln!(out, "k={}", report.k);
    match report.heuristic_violation_rate {
        Some(rate) => {
            let _ = writeln!(out, "heuristic_violation_rate={rate:.4}");
        }
        None => out.push_str("heuristic_violation_rate=n/a\n"),
    }
    for (k, v) in extra {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.95), "0.95");
        assert_eq!(sig6(1.0 / 3.0), "0.333333");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(0.0000123456), "1.23456e-05");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(9.999999), "10");
    }
}
