use crate::error::{Error, Result};

/// Leading observations lost to differencing under `code`.
pub fn lags_consumed(code: u8) -> usize {
    match code {
        2 | 5 => 1,
        3 | 6 | 7 => 2,
        _ => 0,
    }
}

fn diff(x: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(x.len());
    if !x.is_empty() {
        out.push(None);
    }
    out.extend(x.windows(2).map(|w| Some(w[1]? - w[0]?)));
    out
}

/// Applies a FRED-MD transformation code:
/// 1 level, 2 first difference, 3 second difference, 4 log, 5 log difference,
/// 6 second log difference, 7 first difference of the growth rate.
/// `name` identifies the series in errors.
pub fn apply_tcode(series: &[Option<f64>], code: u8, name: &str) -> Result<Vec<Option<f64>>> {
    let logs = || -> Result<Vec<Option<f64>>> {
        series
            .iter()
            .enumerate()
            .map(|(t, v)| match v {
                Some(x) if *x <= 0.0 => Err(Error::Data(format!(
                    "series {name} has non-positive value {x} at row {} under log transform code {code}",
                    t + 1
                ))),
                Some(x) => Ok(Some(x.ln())),
                None => Ok(None),
            })
            .collect()
    };
    Ok(match code {
        1 => series.to_vec(),
        2 => diff(series),
        3 => diff(&diff(series)),
        4 => logs()?,
        5 => diff(&logs()?),
        6 => diff(&diff(&logs()?)),
        7 => {
            let mut growth = Vec::with_capacity(series.len());
            if !series.is_empty() {
                growth.push(None);
            }
            growth.extend(series.windows(2).map(|w| {
                let (prev, cur) = (w[0]?, w[1]?);
                (prev != 0.0).then(|| cur / prev - 1.0)
            }));
            diff(&growth)
        }
        other => return Err(Error::Data(format!("series {name}: unknown transform code {other}"))),
    })
}
