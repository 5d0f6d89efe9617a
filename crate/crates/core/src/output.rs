//! Plain-text number formatting and a minimal CSV writer.
//!
//! Every float is written in its shortest round-trip form, so parsing a
//! written value returns the same bits. Non-finite values are written as `NA`.

use std::io::{self, Write};

/// Shortest string that parses back to exactly `x`; `NA` if `x` is not finite.
///
/// Magnitudes outside `[1e-5, 1e16)` use exponent notation.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return "NA".to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Comma-separated rows with `\n` line endings.
pub struct CsvWriter<W: Write> {
    out: io::BufWriter<W>,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W) -> Self {
        CsvWriter {
            out: io::BufWriter::new(out),
        }
    }

    pub fn header(&mut self, columns: &[&str]) -> io::Result<()> {
        writeln!(self.out, "{}", columns.join(","))
    }

    pub fn row(&mut self, values: &[f64]) -> io::Result<()> {
        let fields: Vec<String> = values.iter().map(|&v| format_value(v)).collect();
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
