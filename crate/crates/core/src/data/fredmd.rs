use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Month {
    pub year: i32,
    pub month: u32,
}

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if (1..=12).contains(&month) {
            Ok(Month { year, month })
        } else {
            Err(Error::Data(format!("month {month} outside 1..12")))
        }
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Accepts `M/D/YYYY`, `YYYY-MM` and `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Data(format!("unrecognized date '{s}'"));
        let nums = |parts: Vec<&str>| -> Result<Vec<i64>> {
            parts.iter().map(|p| p.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        let (year, month) = if s.contains('/') {
            let v = nums(s.split('/').collect())?;
            match v[..] {
                [m, d, y] if (1..=31).contains(&d) => (y, m),
                _ => return Err(bad()),
            }
        } else {
            let v = nums(s.split('-').collect())?;
            match v[..] {
                [y, m] => (y, m),
                [y, m, d] if (1..=31).contains(&d) => (y, m),
                _ => return Err(bad()),
            }
        };
        let year = i32::try_from(year).map_err(|_| bad())?;
        let month = u32::try_from(month).map_err(|_| bad())?;
        Month::new(year, month).map_err(|_| bad())
    }
}

/// Untransformed panel in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    pub dates: Vec<Month>,
    pub names: Vec<String>,
    /// `series[j][t]`; `None` marks a missing cell.
    pub series: Vec<Vec<Option<f64>>>,
    pub tcodes: Vec<u8>,
}

impl RawPanel {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

fn format_err(row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Format { row, col, msg: msg.into() }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "NaN" | "nan" | ".")
}

/// Parses a FRED-MD file: a header row of series names (first cell labels
/// the date column), a `Transform:` row of codes 1..7, then one row per
/// month. Blank, `NA`, `NaN` and `.` cells are missing; entirely blank rows
/// are skipped.
pub fn parse_fredmd<R: Read>(input: R) -> Result<RawPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();
    let mut next = |expect: &str| -> Result<Option<(usize, csv::StringRecord)>> {
        loop {
            match records.next() {
                None => return Ok(None),
                Some(Err(e)) => {
                    let row = e.position().map_or(0, |p| p.line() as usize);
                    return Err(format_err(row, 0, format!("unreadable {expect}: {e}")));
                }
                Some(Ok(rec)) => {
                    if rec.iter().all(str::is_empty) {
                        continue;
                    }
                    let row = rec.position().map_or(0, |p| p.line() as usize);
                    return Ok(Some((row, rec)));
                }
            }
        }
    };

    let (header_row, header) = next("header")?.ok_or_else(|| format_err(1, 1, "empty file"))?;
    let width = header.len();
    if width < 2 {
        return Err(format_err(header_row, 2, "header names no series"));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    for (j, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(format_err(header_row, j + 2, "empty series name"));
        }
        if names[..j].contains(name) {
            return Err(format_err(header_row, j + 2, format!("duplicate series name '{name}'")));
        }
    }

    let (code_row, codes) =
        next("transform row")?.ok_or_else(|| format_err(header_row + 1, 1, "missing transform row"))?;
    let label = codes.get(0).unwrap_or("").trim_end_matches(':').to_ascii_lowercase();
    if label != "transform" {
        return Err(format_err(code_row, 1, "expected the 'Transform:' row after the header"));
    }
    if codes.len() != width {
        return Err(format_err(code_row, codes.len().min(width) + 1, format!(
            "transform row has {} cells, header has {width}",
            codes.len()
        )));
    }
    let tcodes = codes
        .iter()
        .skip(1)
        .enumerate()
        .map(|(j, cell)| {
            let code = cell.parse::<f64>().ok().filter(|c| c.fract() == 0.0 && (1.0..=7.0).contains(c));
            code.map(|c| c as u8)
                .ok_or_else(|| format_err(code_row, j + 2, format!("transform code '{cell}' is not an integer in 1..7")))
        })
        .collect::<Result<Vec<u8>>>()?;

    let mut dates = Vec::new();
    let mut series = vec![Vec::new(); names.len()];
    while let Some((row, rec)) = next("data row")? {
        if rec.len() != width {
            return Err(format_err(row, rec.len().min(width) + 1, format!(
                "row has {} cells, header has {width}",
                rec.len()
            )));
        }
        let date = rec[0]
            .parse::<Month>()
            .map_err(|_| format_err(row, 1, format!("unparseable date '{}'", &rec[0])))?;
        dates.push(date);
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let value = if is_missing(cell) {
                None
            } else {
                let v = cell
                    .parse::<f64>()
                    .map_err(|_| format_err(row, j + 2, format!("'{cell}' is not a number")))?;
                v.is_finite().then_some(v)
            };
            series[j].push(value);
        }
    }
    Ok(RawPanel { dates, names, series, tcodes })
}

pub fn read_fredmd(path: impl AsRef<Path>) -> Result<RawPanel> {
    parse_fredmd(File::open(path)?)
}

/// Writes a panel in the layout [`parse_fredmd`] reads, values at full precision.
pub fn write_fredmd<W: Write>(panel: &RawPanel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["sasdate".to_string()];
    header.extend(panel.names.iter().cloned());
    w.write_record(&header).map_err(io)?;
    let mut codes = vec!["Transform:".to_string()];
    codes.extend(panel.tcodes.iter().map(u8::to_string));
    w.write_record(&codes).map_err(io)?;
    for (t, date) in panel.dates.iter().enumerate() {
        let mut row = vec![format!("{}/1/{}", date.month, date.year)];
        row.extend(panel.series.iter().map(|s| s[t].map_or_else(String::new, |v| v.to_string())));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
