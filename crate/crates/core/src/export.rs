//! CSV and JSON renderings of element matrices and conditioning studies.
//!
//! Numbers in CSV are written like C's `%.17g`, which round-trips every
//! double and keeps repeated runs byte-identical.

use serde::Serialize;
use serde_json::json;

use crate::analysis::StudyResult;
use crate::assembly::ElementMatrix;

pub const TOOL_NAME: &str = "bbpyramid";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Row-major CSV, one matrix row per line. An empty matrix gives an empty
/// string.
pub fn matrix_csv(m: &ElementMatrix) -> String {
    let mut out = String::new();
    for row in m.entries.row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_g17(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct MatrixDoc<'a> {
    tool: &'static str,
    version: &'static str,
    shape: String,
    #[serde(rename = "N")]
    order: usize,
    kind: String,
    nq: usize,
    geometry_hash: &'a str,
    symmetry: crate::assembly::Symmetry,
    asymmetry: f64,
    restricted: bool,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<&'a str>,
}

pub fn matrix_json(m: &ElementMatrix, geometry_hash: &str, warning: Option<&str>) -> String {
    let doc = MatrixDoc {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        shape: m.shape.to_string(),
        order: m.order,
        kind: m.kind.to_string(),
        nq: m.nq,
        geometry_hash,
        symmetry: m.symmetry,
        asymmetry: m.asymmetry,
        restricted: m.restricted,
        rows: m.entries.nrows(),
        cols: m.entries.ncols(),
        entries: m.entries.row_iter().map(|r| r.iter().copied().collect()).collect(),
        warning,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub const STUDY_CSV_HEADER: &str = "shape,kind,N,dof_count,nq,lambda_min,lambda_max,cond";

pub fn study_csv(result: &StudyResult) -> String {
    let mut out = String::from(STUDY_CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.shape,
            r.kind,
            r.order,
            r.dof_count,
            r.nq,
            fmt_g17(r.lambda_min),
            fmt_g17(r.lambda_max),
            r.cond.map(fmt_g17).unwrap_or_default(),
        ));
    }
    out
}

pub fn study_json(result: &StudyResult, seed: u64, config: &impl Serialize) -> String {
    let doc = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "seed": seed,
        "config": config,
        "records": result.records,
        "skipped": result.skipped,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // reference strings from C printf("%.17g")
        assert_eq!(fmt_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1.5e20), "1.5e+20");
        assert_eq!(fmt_g17(12345.678), "12345.678");
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1e16), "10000000000000000");
        assert_eq!(fmt_g17(1e17), "1e+17");
    }

    #[test]
    fn g17_round_trips() {
        for &x in &[1.0 / 3.0, std::f64::consts::PI, 1e-300, 6.02214076e23, -7.25e-9] {
            assert_eq!(fmt_g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
