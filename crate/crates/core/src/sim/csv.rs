//! Result tables as CSV.
//!
//! Floats use Rust's shortest round-trip scientific notation, which never
//! depends on the locale. An `error` column is appended only when some row
//! failed.

use std::fmt::Write as _;
use std::path::Path;

use super::run::ResultRow;
use crate::error::{Error, Result};

pub const HEADER: &str = "waveform,snr_rad_db,snr_com_db,rmse_range_m,rmse_velocity_mps,crlb_range_m,crlb_velocity_mps,rate_bpshz,trials,seed";

fn escape(msg: &str) -> String {
    format!(
        "\"{}\"",
        msg.replace('"', "\"\"").replace(['\n', '\r'], " ")
    )
}

pub fn to_csv_string(rows: &[ResultRow]) -> String {
    let with_errors = rows.iter().any(|r| r.error.is_some());
    let mut out = String::from(HEADER);
    if with_errors {
        out.push_str(",error");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
            r.waveform.name(),
            r.snr_rad_db,
            r.snr_com_db,
            r.rmse_range,
            r.rmse_velocity,
            r.crlb_range,
            r.crlb_velocity,
            r.rate,
            r.trials,
            r.seed
        );
        if with_errors {
            out.push(',');
            if let Some(e) = &r.error {
                out.push_str(&escape(e));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(rows))
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}
