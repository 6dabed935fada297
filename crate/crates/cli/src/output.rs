use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;
use crate::{Common, Format};

/// Version of the machine-readable output layout.
pub const SCHEMA: &str = "1";

/// Writes the machine output to `--out` and the table to standard output.
/// With `--out -` the machine output replaces the table on standard output;
/// without `--out` only the table is printed.
pub fn emit<T: Serialize>(
    common: &Common,
    report: &T,
    csv_rows: impl FnOnce(&mut csv::Writer<Box<dyn Write>>) -> Result<(), CliError>,
    table: &str,
) -> Result<(), CliError> {
    match common.out.as_deref() {
        Some(path) if path == Path::new("-") => write_machine(common.format, report, csv_rows, Box::new(io::stdout().lock())),
        Some(path) => {
            let file = File::create(path)?;
            write_machine(common.format, report, csv_rows, Box::new(BufWriter::new(file)))?;
            print!("{table}");
            Ok(())
        }
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn write_machine<T: Serialize>(
    format: Format,
    report: &T,
    csv_rows: impl FnOnce(&mut csv::Writer<Box<dyn Write>>) -> Result<(), CliError>,
    mut out: Box<dyn Write>,
) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            csv_rows(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Fixed-width text table with a left-aligned first column.
pub fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (k, cell) in cells.iter().enumerate().take(cols) {
            if k == 0 {
                s.push_str(&format!("{cell:<w$}", w = widths[0]));
            } else {
                s.push_str(&format!("  {cell:>w$}", w = widths[k]));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header);
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}

pub fn strings<const N: usize>(cells: [&str; N]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let t = render_table(&strings(["mu0", "p"]), &[strings(["0.30", "0.012"]), strings(["0.35", "1"])]);
        assert_eq!(t, "mu0       p\n0.30  0.012\n0.35      1\n");
    }
}
