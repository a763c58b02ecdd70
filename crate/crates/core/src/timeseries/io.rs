//! CSV ingestion and emission for index panels and factor tables.
//!
//! HPI files are long format (`msa_id,msa_name,state,quarter,index`), factor
//! files are wide (`quarter,<factor_id>...`) with empty cells for missing
//! observations. Row numbers in errors are 1-based file lines, header = 1.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{
    parse_quarter, FactorTable, IndexPanel, Msa, MsaSeries, Quarter, QuarterSeries, TimeseriesError,
    TransformConfig,
};

pub const HPI_HEADER: [&str; 5] = ["msa_id", "msa_name", "state", "quarter", "index"];

fn csv_err(e: csv::Error) -> TimeseriesError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    TimeseriesError::Ingest {
        row,
        reason: e.to_string(),
    }
}

pub fn load_hpi_panel(path: impl AsRef<Path>) -> Result<IndexPanel, TimeseriesError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| TimeseriesError::Io {
        path: path.as_ref().display().to_string(),
        source: e,
    })?;
    read_hpi_panel(file)
}

pub fn read_hpi_panel<R: Read>(reader: R) -> Result<IndexPanel, TimeseriesError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != HPI_HEADER {
        return Err(TimeseriesError::Ingest {
            row: 1,
            reason: format!("expected header {}", HPI_HEADER.join(",")),
        });
    }

    struct Pending {
        msa: Msa,
        obs: BTreeMap<Quarter, (f64, usize)>,
    }
    let mut by_id: BTreeMap<String, Pending> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 5 {
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("expected 5 fields, found {}", rec.len()),
            });
        }
        let (id, name, state) = (&rec[0], &rec[1], &rec[2]);
        if id.is_empty() {
            return Err(TimeseriesError::Ingest {
                row,
                reason: "empty msa_id".into(),
            });
        }
        let quarter = parse_quarter(&rec[3]).map_err(|e| TimeseriesError::Ingest {
            row,
            reason: e.to_string(),
        })?;
        let level: f64 = rec[4].parse().map_err(|_| TimeseriesError::Ingest {
            row,
            reason: format!("index '{}' is not a number", &rec[4]),
        })?;
        if !(level > 0.0) || !level.is_finite() {
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("index {level} for MSA {id} at {quarter} is not positive"),
            });
        }
        let entry = by_id.entry(id.to_string()).or_insert_with(|| Pending {
            msa: Msa::new(id, name, state),
            obs: BTreeMap::new(),
        });
        if entry.msa.name != name || entry.msa.state != state {
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("MSA {id} has inconsistent name/state"),
            });
        }
        if let Some((_, first_row)) = entry.obs.insert(quarter, (level, row)) {
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("duplicate (MSA {id}, {quarter}); first seen on row {first_row}"),
            });
        }
    }
    if by_id.is_empty() {
        return Err(TimeseriesError::Ingest {
            row: 1,
            reason: "no data rows".into(),
        });
    }

    let panel_end = by_id
        .values()
        .filter_map(|p| p.obs.keys().next_back().copied())
        .max()
        .expect("non-empty");
    let mut members = Vec::with_capacity(by_id.len());
    for (id, p) in by_id {
        let mut prev: Option<Quarter> = None;
        let mut values = Vec::with_capacity(p.obs.len());
        for (&q, &(level, row)) in &p.obs {
            if let Some(pq) = prev {
                if pq.succ() != q {
                    return Err(TimeseriesError::Ingest {
                        row,
                        reason: format!("MSA {id} has a gap: {} to {} missing", pq.succ(), q.pred()),
                    });
                }
            }
            prev = Some(q);
            values.push(level);
        }
        let (&start, _) = p.obs.iter().next().expect("non-empty");
        let last = prev.expect("non-empty");
        if last != panel_end {
            let (_, &(_, row)) = p.obs.iter().next_back().expect("non-empty");
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("MSA {id} ends at {last} but the panel ends at {panel_end}"),
            });
        }
        members.push(MsaSeries {
            msa: p.msa,
            series: QuarterSeries::new(start, values),
        });
    }
    IndexPanel::new(members)
}

/// Raw wide factor file contents before transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFactorFile {
    pub start: Quarter,
    pub factor_ids: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

pub fn read_raw_factors<R: Read>(reader: R) -> Result<RawFactorFile, TimeseriesError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() < 2 || &header[0] != "quarter" {
        return Err(TimeseriesError::Ingest {
            row: 1,
            reason: "expected header quarter,<factor_id>...".into(),
        });
    }
    let factor_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    {
        let mut seen = std::collections::HashSet::new();
        for id in &factor_ids {
            if id.is_empty() || !seen.insert(id) {
                return Err(TimeseriesError::Ingest {
                    row: 1,
                    reason: format!("empty or duplicate factor id '{id}'"),
                });
            }
        }
    }
    let mut start: Option<Quarter> = None;
    let mut prev: Option<Quarter> = None;
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); factor_ids.len()];
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != factor_ids.len() + 1 {
            return Err(TimeseriesError::Ingest {
                row,
                reason: format!("expected {} fields, found {}", factor_ids.len() + 1, rec.len()),
            });
        }
        let q = parse_quarter(&rec[0]).map_err(|e| TimeseriesError::Ingest {
            row,
            reason: e.to_string(),
        })?;
        match prev {
            None => start = Some(q),
            Some(p) if p == q => {
                return Err(TimeseriesError::Ingest {
                    row,
                    reason: format!("duplicate quarter {q}"),
                })
            }
            Some(p) if p.succ() != q => {
                return Err(TimeseriesError::Ingest {
                    row,
                    reason: format!("quarters must be consecutive and ascending: {p} followed by {q}"),
                })
            }
            Some(_) => {}
        }
        prev = Some(q);
        for (f, cell) in rec.iter().skip(1).enumerate() {
            let v = if cell.is_empty() {
                None
            } else {
                Some(cell.parse::<f64>().map_err(|_| TimeseriesError::Ingest {
                    row,
                    reason: format!("factor {} value '{cell}' is not a number", factor_ids[f]),
                })?)
            };
            columns[f].push(v);
        }
    }
    let start = start.ok_or(TimeseriesError::Ingest {
        row: 1,
        reason: "no data rows".into(),
    })?;
    for (f, col) in columns.iter().enumerate() {
        let first = col.iter().position(Option::is_some);
        let last = col.iter().rposition(Option::is_some);
        if let (Some(a), Some(b)) = (first, last) {
            if let Some(gap) = col[a..=b].iter().position(Option::is_none) {
                return Err(TimeseriesError::Ingest {
                    row: a + gap + 2,
                    reason: format!(
                        "factor {} has an interior gap at {}",
                        factor_ids[f],
                        start.offset((a + gap) as i64)
                    ),
                });
            }
        } else {
            return Err(TimeseriesError::Ingest {
                row: 1,
                reason: format!("factor {} has no observations", factor_ids[f]),
            });
        }
    }
    Ok(RawFactorFile {
        start,
        factor_ids,
        columns,
    })
}

pub fn read_factor_table<R: Read>(reader: R, config: &TransformConfig) -> Result<FactorTable, TimeseriesError> {
    let raw = read_raw_factors(reader)?;
    FactorTable::from_raw(raw.start, raw.factor_ids, raw.columns, config)
}

pub fn load_factor_table(path: impl AsRef<Path>, config: &TransformConfig) -> Result<FactorTable, TimeseriesError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| TimeseriesError::Io {
        path: path.as_ref().display().to_string(),
        source: e,
    })?;
    read_factor_table(file, config)
}

/// Shortest round-trip decimal representation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

pub fn write_hpi_csv<W: Write>(writer: W, panel: &IndexPanel) -> Result<(), TimeseriesError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(HPI_HEADER).map_err(csv_err)?;
    for m in panel.members() {
        for (q, v) in m.series.iter() {
            w.write_record([
                m.msa.id.as_str(),
                m.msa.name.as_str(),
                m.msa.state.as_str(),
                &q.to_string(),
                &fmt_f64(v),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| TimeseriesError::Io {
        path: "<writer>".into(),
        source: e,
    })
}

pub fn write_raw_factors_csv<W: Write>(writer: W, raw: &RawFactorFile) -> Result<(), TimeseriesError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header = vec!["quarter".to_string()];
    header.extend(raw.factor_ids.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    let len = raw.columns.first().map_or(0, Vec::len);
    for t in 0..len {
        let mut rec = vec![raw.start.offset(t as i64).to_string()];
        rec.extend(raw.columns.iter().map(|c| c[t].map(fmt_f64).unwrap_or_default()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| TimeseriesError::Io {
        path: "<writer>".into(),
        source: e,
    })
}
