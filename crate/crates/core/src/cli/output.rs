//! Human-readable matrix output.

use std::fmt::Write as _;

use crate::linalg::PsdMatrix;

/// `x` with `digits` significant digits, trailing zeros removed, switching to
/// exponent notation for very large or small magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let exponent = x.abs().log10().floor() as i32;
    if !(-5..digits as i32).contains(&exponent) {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, exp) = s.split_once('e').expect("exponent notation");
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into a new digit (9.999995 -> 10.00000).
    trim_zeros(&s).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rows at 6 significant digits, then the largest eigenvalue and trace.
pub fn format_matrix(a: &PsdMatrix) -> String {
    let m = a.as_matrix();
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| format_sig(m[(i, j)], 6)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "lambda_max {}", format_sig(a.max_eigenvalue(), 6));
    let _ = writeln!(out, "trace {}", format_sig(a.trace(), 6));
    out
}
