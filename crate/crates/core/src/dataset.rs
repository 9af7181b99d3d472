//! Dataset CSV format: header `time,event,arm`, one subject per row.
//!
//! `time` is decimal months, `event` is 0/1, `arm` is 0 (control) /
//! 1 (experimental). Parsing is strict: missing or extra fields and
//! out-of-range codes are rejected with the offending 1-based line number.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::survival::{Arm, SubjectRecord};

pub const DATASET_HEADER: &str = "time,event,arm";

/// Parse a dataset from any buffered reader.
pub fn read_dataset<R: BufRead>(reader: R) -> Result<Vec<SubjectRecord>> {
    let mut records = Vec::new();
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => {
            return Err(Error::Csv {
                line: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(Error::Csv {
                line: 1,
                message: "empty file, expected header `time,event,arm`".into(),
            })
        }
    };
    if header.trim_end_matches('\r') != DATASET_HEADER {
        return Err(Error::Csv {
            line: 1,
            message: format!("expected header `{DATASET_HEADER}`, got `{header}`"),
        });
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Csv {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        records.push(parse_row(line, line_no)?);
    }
    Ok(records)
}

fn parse_row(line: &str, line_no: usize) -> Result<SubjectRecord> {
    let mut fields = line.split(',');
    let (time, event, arm) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
        (Some(t), Some(e), Some(a), None) => (t, e, a),
        _ => {
            return Err(Error::Csv {
                line: line_no,
                message: format!("expected 3 fields `time,event,arm`, got `{line}`"),
            })
        }
    };

    let time: f64 = time.trim().parse().map_err(|_| Error::Csv {
        line: line_no,
        message: format!("invalid time `{time}`"),
    })?;
    let event = match event.trim() {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::Csv {
                line: line_no,
                message: format!("event must be 0 or 1, got `{other}`"),
            })
        }
    };
    let arm = match arm.trim() {
        "0" => Arm::Control,
        "1" => Arm::Experimental,
        other => {
            return Err(Error::Csv {
                line: line_no,
                message: format!("arm must be 0 or 1, got `{other}`"),
            })
        }
    };

    SubjectRecord::new(time, event, arm).map_err(|e| Error::Csv {
        line: line_no,
        message: e.to_string(),
    })
}

/// Write a dataset; times carry 17 significant digits so values round-trip
/// bit-exactly through `read_dataset`.
pub fn write_dataset<W: Write>(mut writer: W, records: &[SubjectRecord]) -> std::io::Result<()> {
    writeln!(writer, "{DATASET_HEADER}")?;
    for r in records {
        writeln!(writer, "{:.16e},{},{}", r.time, r.event as u8, r.arm.code())?;
    }
    Ok(())
}
