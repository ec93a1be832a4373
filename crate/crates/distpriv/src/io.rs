// SPDX-License-Identifier: Apache-2.0

//! Check-in and region CSV formats, and result tables with a `#` header.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use distpriv_core::geo::{CheckinRecord, Region};
use serde::Deserialize;

use crate::error::RunError;

/// Prefix of the header line that carries the wall-clock time. Determinism
/// comparisons skip this line.
pub const TIMESTAMP_PREFIX: &str = "# generated: ";

#[derive(Debug, Deserialize)]
struct CheckinRow {
    user_id: String,
    x_km: f64,
    y_km: f64,
    attr_name: String,
    attr_value: u8,
    timestamp: Option<i64>,
}

/// Reads `user_id,x_km,y_km,attr_name,attr_value,timestamp` rows. Consecutive
/// rows with the same user, position, and timestamp form one record.
/// Records outside the inclusive `time_range` are dropped; records without a
/// timestamp are kept.
pub fn read_checkins(path: &Path, time_range: Option<[i64; 2]>) -> Result<Vec<CheckinRecord>, RunError> {
    let data_err = |message: String| RunError::Data {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(e.to_string()))?;
    let mut out: Vec<CheckinRecord> = Vec::new();
    for (i, row) in reader.deserialize::<CheckinRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| data_err(format!("line {line}: {e}")))?;
        if !row.x_km.is_finite() || !row.y_km.is_finite() {
            return Err(data_err(format!("line {line}: coordinates must be finite")));
        }
        let value = match row.attr_value {
            0 => false,
            1 => true,
            v => {
                return Err(data_err(format!(
                    "line {line}: attr_value must be 0 or 1, got {v}"
                )))
            }
        };
        if let (Some([lo, hi]), Some(t)) = (time_range, row.timestamp) {
            if t < lo || t > hi {
                continue;
            }
        }
        let same = out.last().is_some_and(|r| {
            r.user_id == row.user_id
                && r.x_km == row.x_km
                && r.y_km == row.y_km
                && r.timestamp == row.timestamp
        });
        if same {
            out.last_mut().unwrap().attributes.insert(row.attr_name, value);
        } else {
            out.push(CheckinRecord {
                user_id: row.user_id,
                x_km: row.x_km,
                y_km: row.y_km,
                attributes: BTreeMap::from([(row.attr_name, value)]),
                timestamp: row.timestamp,
            });
        }
    }
    Ok(out)
}

pub fn write_checkins(path: &Path, records: &[CheckinRecord]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(["user_id", "x_km", "y_km", "attr_name", "attr_value", "timestamp"])
        .map_err(|e| csv_io(path, e))?;
    for r in records {
        for (name, &value) in &r.attributes {
            let ts = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
            w.write_record([
                r.user_id.as_str(),
                &r.x_km.to_string(),
                &r.y_km.to_string(),
                name,
                if value { "1" } else { "0" },
                &ts,
            ])
            .map_err(|e| csv_io(path, e))?;
        }
    }
    w.flush().map_err(RunError::io(path))
}

pub fn write_regions(path: &Path, regions: &[Region]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record([
        "id",
        "min_x",
        "min_y",
        "max_x",
        "max_y",
        "centroid_x",
        "centroid_y",
    ])
    .map_err(|e| csv_io(path, e))?;
    for r in regions {
        let b = r.bounds;
        let cells = [
            r.id.to_string(),
            b.min_x.to_string(),
            b.min_y.to_string(),
            b.max_x.to_string(),
            b.max_y.to_string(),
            r.centroid.0.to_string(),
            r.centroid.1.to_string(),
        ];
        w.write_record(&cells).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(RunError::io(path))
}

fn csv_io(path: &Path, e: csv::Error) -> RunError {
    RunError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// Metadata written above a result table.
#[derive(Debug, Clone)]
pub struct TableHeader {
    pub curve: String,
    pub config_hash: String,
    pub seed: u64,
    pub samples: usize,
}

/// A result table; cells are already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip rendering; infinities as `inf`.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        v.to_string()
    }
}

pub fn write_table(path: &Path, header: &TableHeader, table: &Table) -> Result<(), RunError> {
    let file = File::create(path).map_err(RunError::io(path))?;
    let mut out = BufWriter::new(file);
    let now = time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default();
    let meta = format!(
        "# distpriv {}\n# curve: {}\n# config_sha256: {}\n# seed: {}\n# samples: {}\n{TIMESTAMP_PREFIX}{now}\n",
        env!("CARGO_PKG_VERSION"),
        header.curve,
        header.config_hash,
        header.seed,
        header.samples,
    );
    out.write_all(meta.as_bytes()).map_err(RunError::io(path))?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.columns).map_err(|e| csv_io(path, e))?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(RunError::io(path))?;
    }
    out.flush().map_err(RunError::io(path))
}

/// Reads a result table back, skipping `#` lines. Rows are keyed by column.
pub fn read_table(path: &Path) -> Result<Vec<BTreeMap<String, String>>, RunError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    let headers = reader.headers().map_err(|e| csv_io(path, e))?.clone();
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| csv_io(path, e))?;
            Ok(headers
                .iter()
                .map(String::from)
                .zip(r.iter().map(String::from))
                .collect())
        })
        .collect()
}
