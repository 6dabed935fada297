//! FRED-MD style monthly panels: parsing, transformation codes and the
//! aligned `(y_{t+1}, x_t)` sample for the forecast engine.

mod dataset;
mod fredmd;
mod transform;

pub use dataset::{build_dataset, Dataset, DatasetOptions, DroppedRow};
pub use fredmd::{parse_fredmd, read_fredmd, write_fredmd, Month, RawPanel};
pub use transform::{apply_tcode, lags_consumed};
