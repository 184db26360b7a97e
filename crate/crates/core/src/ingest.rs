//! Parsing of raw AP counter exports and neighbour candidate lists.
//!
//! The measurement export is comma-separated text with the header
//! `Time,AP_name,Radio_type,TxC,STx,STxR,FTx`. Counters are per-period
//! deltas (the collector resets them each period). Neighbour candidates
//! arrive as an optional side file with one `ap:neighbor1,neighbor2,...`
//! line per AP; without one, every other AP is a candidate.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use thiserror::Error;

pub const MEASUREMENT_HEADER: &str = "Time,AP_name,Radio_type,TxC,STx,STxR,FTx";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    HeaderMismatch {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: expected {expected} comma-separated fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: unparseable timestamp `{value}`")]
    BadTimestamp { line: usize, value: String },
    #[error("line {line}: counter {name} is not an integer: `{value}`")]
    BadCounter {
        line: usize,
        name: &'static str,
        value: String,
    },
    #[error("line {line}: counter {name} is negative ({value})")]
    NegativeCounter {
        line: usize,
        name: &'static str,
        value: i64,
    },
    #[error("no rows left after filtering radio type `{radio}` in {path}")]
    EmptyDataset { radio: String, path: String },
    #[error("line {line}: malformed neighbor entry `{entry}`")]
    BadNeighborLine { line: usize, entry: String },
}

/// One row of the counter export.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCounterRecord {
    pub timestamp: NaiveDateTime,
    pub ap_name: String,
    pub radio_type: String,
    /// Transmitted MSDUs in the period (TxC).
    pub tx_count: u64,
    /// MSDUs transmitted successfully without retries (STx).
    pub success_tx: u64,
    /// MSDUs transmitted successfully after one or more retries (STxR).
    pub success_retx: u64,
    /// MSDUs dropped after the retry limit (FTx).
    pub failed_tx: u64,
}

/// Per-AP, time-ordered counter records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawDataset {
    /// Keyed by AP name; each list strictly increasing in timestamp.
    pub records: BTreeMap<String, Vec<RawCounterRecord>>,
    /// Number of (ap, timestamp) duplicates dropped while loading.
    pub dropped_duplicates: usize,
}

impl RawDataset {
    /// Number of distinct APs.
    pub fn ap_count(&self) -> usize {
        self.records.len()
    }

    pub fn ap_names(&self) -> Vec<String> {
        self.records.keys().cloned().collect()
    }
}

/// Neighbour candidates per AP, either imported or the all-pairs fallback.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborCandidateList {
    pub candidates: BTreeMap<String, Vec<String>>,
    /// Entries dropped because they named an AP absent from the dataset.
    pub warnings: Vec<String>,
}

impl NeighborCandidateList {
    pub fn candidates_of(&self, ap: &str) -> &[String] {
        self.candidates.get(ap).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn parse_timestamp(value: &str, line: usize) -> Result<NaiveDateTime, IngestError> {
    NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M")
        .or_else(|_| NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S"))
        .or_else(|_| NaiveDateTime::parse_from_str(value, "%Y-%m-%d %H:%M:%S"))
        .map_err(|_| IngestError::BadTimestamp {
            line,
            value: value.to_string(),
        })
}

fn parse_counter(value: &str, name: &'static str, line: usize) -> Result<u64, IngestError> {
    let parsed: i64 = value.trim().parse().map_err(|_| IngestError::BadCounter {
        line,
        name,
        value: value.to_string(),
    })?;
    if parsed < 0 {
        return Err(IngestError::NegativeCounter {
            line,
            name,
            value: parsed,
        });
    }
    Ok(parsed as u64)
}

/// Parses one data line of the export. `line` is the 1-based line number
/// used in error messages.
pub fn parse_record(text: &str, line: usize) -> Result<RawCounterRecord, IngestError> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 7 {
        return Err(IngestError::FieldCount {
            line,
            expected: 7,
            found: fields.len(),
        });
    }
    Ok(RawCounterRecord {
        timestamp: parse_timestamp(fields[0].trim(), line)?,
        ap_name: fields[1].trim().to_string(),
        radio_type: fields[2].trim().to_string(),
        tx_count: parse_counter(fields[3], "TxC", line)?,
        success_tx: parse_counter(fields[4], "STx", line)?,
        success_retx: parse_counter(fields[5], "STxR", line)?,
        failed_tx: parse_counter(fields[6], "FTx", line)?,
    })
}

/// Loads a counter export, keeping only rows of the requested radio type.
///
/// Rows with the same (ap, timestamp) are resolved keeping the last
/// occurrence; the number of dropped duplicates is recorded on the dataset.
pub fn load_raw_dataset(path: &Path, radio_filter: &str) -> Result<RawDataset, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_raw_dataset_from_str(&text, radio_filter, &path.display().to_string())
}

pub fn load_raw_dataset_from_str(
    text: &str,
    radio_filter: &str,
    path_label: &str,
) -> Result<RawDataset, IngestError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == MEASUREMENT_HEADER => {}
        Some((i, header)) => {
            return Err(IngestError::HeaderMismatch {
                line: i + 1,
                expected: MEASUREMENT_HEADER.to_string(),
                found: header.trim().to_string(),
            })
        }
        None => {
            return Err(IngestError::EmptyDataset {
                radio: radio_filter.to_string(),
                path: path_label.to_string(),
            })
        }
    }

    let mut records: BTreeMap<String, Vec<RawCounterRecord>> = BTreeMap::new();
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let record = parse_record(raw, i + 1)?;
        if record.radio_type != radio_filter {
            continue;
        }
        records.entry(record.ap_name.clone()).or_default().push(record);
    }

    let mut dropped = 0usize;
    for list in records.values_mut() {
        // stable sort keeps file order within equal timestamps, so keeping
        // the later element implements the last-occurrence rule
        list.sort_by_key(|r| r.timestamp);
        let before = list.len();
        // walk backwards so the last occurrence of each timestamp survives
        let mut seen = std::collections::BTreeSet::new();
        let mut kept: Vec<RawCounterRecord> = Vec::with_capacity(before);
        for rec in list.drain(..).rev() {
            if seen.insert(rec.timestamp) {
                kept.push(rec);
            }
        }
        kept.reverse();
        dropped += before - kept.len();
        *list = kept;
    }

    if records.is_empty() {
        return Err(IngestError::EmptyDataset {
            radio: radio_filter.to_string(),
            path: path_label.to_string(),
        });
    }
    Ok(RawDataset {
        records,
        dropped_duplicates: dropped,
    })
}

/// Loads neighbour candidates from `path`, or derives the all-pairs list
/// from the dataset when no file is given.
///
/// Self-entries are removed and candidates naming APs absent from the
/// dataset are dropped with a warning rather than failing the load.
pub fn load_neighbor_candidates(
    path: Option<&Path>,
    dataset: &RawDataset,
) -> Result<NeighborCandidateList, IngestError> {
    load_neighbor_candidates_named(path, &dataset.ap_names())
}

/// [`load_neighbor_candidates`] against a plain AP name list (used by
/// pipeline stages that no longer hold the raw dataset).
pub fn load_neighbor_candidates_named(
    path: Option<&Path>,
    ap_names: &[String],
) -> Result<NeighborCandidateList, IngestError> {
    let known = |name: &str| ap_names.iter().any(|n| n == name);
    let mut out = NeighborCandidateList::default();
    match path {
        None => {
            for ap in ap_names {
                out.candidates.insert(
                    ap.clone(),
                    ap_names.iter().filter(|n| *n != ap).cloned().collect(),
                );
            }
        }
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| IngestError::Io {
                path: p.display().to_string(),
                source,
            })?;
            for (i, raw) in text.lines().enumerate() {
                let trimmed = raw.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let (ap, rest) = trimmed.split_once(':').ok_or(IngestError::BadNeighborLine {
                    line: i + 1,
                    entry: trimmed.to_string(),
                })?;
                let ap = ap.trim().to_string();
                if !known(&ap) {
                    out.warnings
                        .push(format!("neighbor list names unknown AP `{ap}`; line skipped"));
                    continue;
                }
                let mut list = Vec::new();
                for cand in rest.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                    if cand == ap {
                        continue;
                    }
                    if !known(cand) {
                        out.warnings.push(format!(
                            "candidate `{cand}` for AP `{ap}` is not in the dataset; dropped"
                        ));
                        continue;
                    }
                    if !list.contains(&cand.to_string()) {
                        list.push(cand.to_string());
                    }
                }
                out.candidates.insert(ap, list);
            }
            // APs missing from the file get no candidates rather than all-pairs,
            // so a partial file stays authoritative
            for ap in ap_names {
                out.candidates.entry(ap.clone()).or_default();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn dataset_text() -> String {
        let mut s = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
        s.push_str("2019-09-09T08:00,A,2.4GHz,500,450,40,10\n");
        s.push_str("2019-09-09T08:30,A,2.4GHz,600,540,50,10\n");
        s.push_str("2019-09-09T08:00,A,5GHz,80,70,5,5\n");
        s.push_str("2019-09-09T08:00,B,2.4GHz,100,90,8,2\n");
        s
    }

    #[test]
    fn parse_record_maps_fields() {
        let rec = parse_record("2019-09-09T08:00,XSFA4PS205,2.4GHz,500,450,40,10", 2).unwrap();
        assert_eq!(rec.ap_name, "XSFA4PS205");
        assert_eq!(rec.tx_count, 500);
        assert_eq!(rec.success_tx, 450);
        assert_eq!(rec.success_retx, 40);
        assert_eq!(rec.failed_tx, 10);
        assert_eq!(
            rec.timestamp,
            NaiveDateTime::parse_from_str("2019-09-09T08:00", "%Y-%m-%dT%H:%M").unwrap()
        );
    }

    #[test]
    fn parse_record_rejects_negative_counter() {
        let err = parse_record("2019-09-09T08:00,A,2.4GHz,500,450,40,-3", 4).unwrap_err();
        match err {
            IngestError::NegativeCounter { line, name, value } => {
                assert_eq!((line, name, value), (4, "FTx", -3));
            }
            other => panic!("expected NegativeCounter, got {other:?}"),
        }
    }

    #[test]
    fn parse_record_rejects_bad_timestamp() {
        let err = parse_record("notadate,A,2.4GHz,1,1,1,1", 9).unwrap_err();
        assert!(matches!(err, IngestError::BadTimestamp { line: 9, .. }));
    }

    #[test]
    fn parse_record_rejects_short_line() {
        let err = parse_record("2019-09-09T08:00,A,2.4GHz,1", 3).unwrap_err();
        assert!(matches!(err, IngestError::FieldCount { found: 4, .. }));
    }

    #[test]
    fn load_filters_radio_type() {
        let ds = load_raw_dataset_from_str(&dataset_text(), "2.4GHz", "test").unwrap();
        assert_eq!(ds.ap_count(), 2);
        assert_eq!(ds.records["A"].len(), 2);
        assert!(ds.records["A"].iter().all(|r| r.radio_type == "2.4GHz"));
    }

    #[test]
    fn load_keeps_last_duplicate() {
        let mut text = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
        text.push_str("2019-09-09T08:00,A,2.4GHz,500,450,40,10\n");
        text.push_str("2019-09-09T08:00,A,2.4GHz,510,460,40,10\n");
        let ds = load_raw_dataset_from_str(&text, "2.4GHz", "test").unwrap();
        assert_eq!(ds.records["A"].len(), 1);
        assert_eq!(ds.records["A"][0].tx_count, 510);
        assert_eq!(ds.dropped_duplicates, 1);
    }

    #[test]
    fn load_counts_aps_and_rows() {
        let mut text = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
        for ap in ["A", "B", "C"] {
            for k in 0..10 {
                text.push_str(&format!("2019-09-09T{:02}:00,{ap},2.4GHz,5,4,1,0\n", 8 + k));
            }
        }
        let ds = load_raw_dataset_from_str(&text, "2.4GHz", "test").unwrap();
        assert_eq!(ds.ap_count(), 3);
        assert!(ds.records.values().all(|v| v.len() == 10));
    }

    #[test]
    fn load_rejects_empty_after_filter() {
        let err = load_raw_dataset_from_str(&dataset_text(), "6GHz", "test").unwrap_err();
        assert!(matches!(err, IngestError::EmptyDataset { .. }));
    }

    #[test]
    fn load_rejects_bad_header() {
        let err = load_raw_dataset_from_str("Time,AP,Radio\n", "2.4GHz", "t").unwrap_err();
        assert!(matches!(err, IngestError::HeaderMismatch { line: 1, .. }));
    }

    #[test]
    fn load_is_idempotent_and_sorted() {
        let mut text = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
        text.push_str("2019-09-09T09:00,A,2.4GHz,2,1,1,0\n");
        text.push_str("2019-09-09T08:00,A,2.4GHz,1,1,0,0\n");
        let a = load_raw_dataset_from_str(&text, "2.4GHz", "t").unwrap();
        let b = load_raw_dataset_from_str(&text, "2.4GHz", "t").unwrap();
        assert_eq!(a, b);
        for list in a.records.values() {
            assert!(list.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        }
    }

    #[test]
    fn load_missing_file_is_io_error() {
        let err = load_raw_dataset(Path::new("/nonexistent/x.csv"), "2.4GHz").unwrap_err();
        assert!(matches!(err, IngestError::Io { .. }));
    }

    #[test]
    fn neighbors_all_pairs_fallback() {
        let ds = {
            let mut text = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
            for ap in ["A", "B", "C"] {
                text.push_str(&format!("2019-09-09T08:00,{ap},2.4GHz,1,1,0,0\n"));
            }
            load_raw_dataset_from_str(&text, "2.4GHz", "t").unwrap()
        };
        let nc = load_neighbor_candidates(None, &ds).unwrap();
        assert_eq!(nc.candidates_of("A"), ["B", "C"]);
        assert_eq!(nc.candidates_of("B"), ["A", "C"]);
        assert_eq!(nc.candidates_of("C"), ["A", "B"]);
        assert!(nc.warnings.is_empty());
    }

    #[test]
    fn neighbors_file_drops_unknown_and_self() {
        let ds = {
            let mut text = String::from("Time,AP_name,Radio_type,TxC,STx,STxR,FTx\n");
            for ap in ["A", "B"] {
                text.push_str(&format!("2019-09-09T08:00,{ap},2.4GHz,1,1,0,0\n"));
            }
            load_raw_dataset_from_str(&text, "2.4GHz", "t").unwrap()
        };
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "A:B,C").unwrap();
        writeln!(file, "B:B,A").unwrap();
        let nc = load_neighbor_candidates(Some(file.path()), &ds).unwrap();
        assert_eq!(nc.candidates_of("A"), ["B"]);
        assert_eq!(nc.candidates_of("B"), ["A"]);
        assert_eq!(nc.warnings.len(), 1);
        assert!(nc.warnings[0].contains('C'));
    }
}
