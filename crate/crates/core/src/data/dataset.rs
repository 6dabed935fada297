use std::io::Write;

use serde::Serialize;

use super::fredmd::{Month, RawPanel};
use super::transform::apply_tcode;
use crate::config::{PredictorTiming, SeriesSample};
use crate::error::{Error, Result};

/// Optional inclusive window on the target dates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DatasetOptions {
    pub start: Option<Month>,
    pub end: Option<Month>,
}

/// A candidate row left out for missing values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedRow {
    /// Date of the target observation.
    pub date: Month,
    /// Series missing on that row (the target, or predictors one month earlier).
    pub missing: Vec<String>,
}

/// Aligned sample: row `t` pairs the target at `dates[t]` with every
/// predictor one month earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub target: String,
    pub dates: Vec<Month>,
    pub sample: SeriesSample,
    pub dropped: Vec<DroppedRow>,
}

impl Dataset {
    /// Canonical dump: `date,<target>,<predictors...>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec!["date".to_string(), self.target.clone()];
        header.extend(self.sample.names().iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (t, date) in self.dates.iter().enumerate() {
            let mut row = vec![date.to_string(), self.sample.y()[t].to_string()];
            row.extend(self.sample.columns().iter().map(|c| c[t].to_string()));
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Transforms the target and predictors by their codes and pairs `y_{t+1}`
/// with `x_t`. Rows with any missing value are dropped and reported; nothing
/// is imputed.
pub fn build_dataset(
    panel: &RawPanel,
    target: &str,
    predictors: &[String],
    options: DatasetOptions,
) -> Result<Dataset> {
    if predictors.is_empty() {
        return Err(Error::Data("no predictors selected".into()));
    }
    let transformed = |name: &str| -> Result<Vec<Option<f64>>> {
        let j = panel
            .index_of(name)
            .ok_or_else(|| Error::Data(format!("series '{name}' not found in the panel")))?;
        apply_tcode(&panel.series[j], panel.tcodes[j], name)
    };
    let y = transformed(target)?;
    let xs = predictors.iter().map(|p| transformed(p)).collect::<Result<Vec<_>>>()?;

    let in_window = |d: Month| options.start.is_none_or(|s| d >= s) && options.end.is_none_or(|e| d <= e);
    let mut dates = Vec::new();
    let mut y_out = Vec::new();
    let mut x_out = vec![Vec::new(); predictors.len()];
    let mut dropped = Vec::new();
    for t in 1..panel.len() {
        let date = panel.dates[t];
        if !in_window(date) {
            continue;
        }
        let mut missing = Vec::new();
        if y[t].is_none() {
            missing.push(target.to_string());
        }
        for (name, x) in predictors.iter().zip(&xs) {
            if x[t - 1].is_none() {
                missing.push(name.clone());
            }
        }
        if !missing.is_empty() {
            dropped.push(DroppedRow { date, missing });
            continue;
        }
        dates.push(date);
        y_out.push(y[t].expect("checked"));
        for (col, x) in x_out.iter_mut().zip(&xs) {
            col.push(x[t - 1].expect("checked"));
        }
    }
    if dates.is_empty() {
        return Err(Error::Data(format!(
            "no month has the target and all {} predictors observed",
            predictors.len()
        )));
    }
    let sample = SeriesSample::new(y_out, x_out, predictors.to_vec(), PredictorTiming::Lagged)?;
    Ok(Dataset { target: target.to_string(), dates, sample, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_fredmd;

    fn toy(rows: usize) -> RawPanel {
        let mut text = String::from("sasdate,Y,A,B\nTransform:,5,2,1\n");
        for t in 0..rows {
            let tf = t as f64;
            text.push_str(&format!("{}/1/2000,{},{},{}\n", t + 1, 1.0 + tf * tf, 2.0 * tf + 0.5 * tf * tf, (tf * 1.7).sin()));
        }
        parse_fredmd(text.as_bytes()).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn alignment_pairs_target_with_previous_month() {
        // Ten rows, one lag consumed: 10 - 1 - 1 = 8 aligned rows.
        let panel = toy(10);
        let ds = build_dataset(&panel, "Y", &names(&["A", "B"]), DatasetOptions::default()).unwrap();
        assert_eq!(ds.sample.n(), 8);
        assert_eq!(ds.sample.timing(), PredictorTiming::Lagged);
        assert_eq!(ds.dates[0], Month { year: 2000, month: 3 });
        let ylog = |t: usize| (1.0 + (t * t) as f64).ln();
        assert!((ds.sample.y()[0] - (ylog(2) - ylog(1))).abs() < 1e-12);
        // A at row 1 minus row 0, dated one month before the target.
        assert!((ds.sample.column(0)[0] - 2.5).abs() < 1e-12);
        assert_eq!(ds.sample.column(1)[0], 1.7f64.sin());
        assert_eq!(ds.dropped.len(), 1);
        assert!(ds.dates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn one_missing_cell_drops_one_row() {
        let mut panel = toy(10);
        let full = build_dataset(&panel, "Y", &names(&["B"]), DatasetOptions::default()).unwrap();
        panel.series[2][5] = None;
        let ds = build_dataset(&panel, "Y", &names(&["B"]), DatasetOptions::default()).unwrap();
        assert_eq!(ds.sample.n(), full.sample.n() - 1);
        assert!(ds.dropped.iter().any(|d| d.missing == vec!["B".to_string()] && d.date.month == 7));
    }

    #[test]
    fn window_and_errors() {
        let panel = toy(12);
        let opts = DatasetOptions { start: Some(Month { year: 2000, month: 3 }), end: Some(Month { year: 2000, month: 11 }) };
        let ds = build_dataset(&panel, "Y", &names(&["A"]), opts).unwrap();
        assert_eq!(ds.sample.n(), 9);
        assert!(build_dataset(&panel, "Z", &names(&["A"]), opts).is_err());
        assert!(build_dataset(&panel, "Y", &[], opts).is_err());
        let late = DatasetOptions { start: Some(Month { year: 2001, month: 1 }), end: None };
        assert!(matches!(build_dataset(&panel, "Y", &names(&["A"]), late), Err(Error::Data(_))));
    }

    #[test]
    fn csv_dump() {
        let ds = build_dataset(&toy(10), "Y", &names(&["A", "B"]), DatasetOptions::default()).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "date,Y,A,B");
        assert_eq!(lines.len(), 9);
        assert!(lines[1].starts_with("2000-03,"));
    }
}
