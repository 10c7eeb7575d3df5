//! Plain-text output helpers shared by the library and the command line.

/// Shortest-round-trip-safe scientific notation: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Comma-separated table with a header line; every line ends in `\n`.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
