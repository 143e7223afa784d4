//! Deterministic number formatting for CSV and JSON outputs.

/// Shortest decimal string that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
