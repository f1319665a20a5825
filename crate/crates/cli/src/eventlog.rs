//! Event logs: one CSV row per detection.
//!
//! ```text
//! pair_id,station,setting_label,setting_rad,outcome,time_tag
//! 0,A,a,0.0000000000000000e0,1,0.0000000000000000e0
//! ```
//!
//! Angles and time tags are written with 17 significant digits so a log
//! reads back bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use spcelab::hv::{Outcome, Station, StationRecord, StationStream};
use spcelab::quantum::AnalyzerSetting;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 6] = [
    "pair_id",
    "station",
    "setting_label",
    "setting_rad",
    "outcome",
    "time_tag",
];

/// Write records sorted by `(station, pair_id)`.
pub fn write_records<W: Write>(w: W, records: &[StationRecord]) -> csv::Result<()> {
    let mut sorted: Vec<&StationRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.station, r.pair_id));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER)?;
    for r in sorted {
        out.write_record([
            r.pair_id.to_string(),
            r.station.tag().to_string(),
            r.setting_label.clone(),
            format!("{:.16e}", r.setting.radians()),
            r.outcome.value().to_string(),
            format!("{:.16e}", r.time_tag),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_event_log(path: &Path, records: &[StationRecord]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_records(BufWriter::new(file), records).map_err(|e| CliError::io(path, e))
}

/// Parse a log; any malformed row is reported with its line number.
pub fn read_records<R: Read>(r: R, name: &str) -> CliResult<Vec<StationRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = reader.headers().map_err(|e| CliError::Data(format!("{name}: {e}")))?;
    if header.iter().ne(HEADER) {
        return Err(CliError::Data(format!(
            "{name}: expected header `{}`, found `{}`",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Data(format!("{name}: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |field: &str, msg: String| CliError::Data(format!("{name} line {line}: {field}: {msg}"));
        let pair_id = row[0].parse::<u64>().map_err(|e| bad("pair_id", e.to_string()))?;
        let station = match &row[1] {
            "A" => Station::A,
            "B" => Station::B,
            s => return Err(bad("station", format!("expected A or B, got `{s}`"))),
        };
        let setting = row[3]
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|x| AnalyzerSetting::new(x).map_err(|e| e.to_string()))
            .map_err(|m| bad("setting_rad", m))?;
        let outcome = match &row[4] {
            "1" => Outcome::Plus,
            "-1" => Outcome::Minus,
            s => return Err(bad("outcome", format!("expected 1 or -1, got `{s}`"))),
        };
        let time_tag = row[5].parse::<f64>().map_err(|e| bad("time_tag", e.to_string()))?;
        if !(time_tag.is_finite() && time_tag >= 0.0) {
            return Err(bad(
                "time_tag",
                format!("must be finite and non-negative, got {time_tag}"),
            ));
        }
        records.push(StationRecord {
            pair_id,
            station,
            setting_label: row[2].to_string(),
            setting,
            outcome,
            time_tag,
        });
    }
    Ok(records)
}

pub fn read_event_log(path: &Path) -> CliResult<Vec<StationRecord>> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_records(file, &path.display().to_string())
}

/// Split a two-station log into its A and B streams.
pub fn streams_from_log(records: &[StationRecord], name: &str) -> CliResult<(StationStream, StationStream)> {
    let split = |s: Station| -> CliResult<StationStream> {
        let rows: Vec<StationRecord> = records.iter().filter(|r| r.station == s).cloned().collect();
        if rows.is_empty() {
            return Err(CliError::Data(format!("{name}: no records for station {s}")));
        }
        StationStream::from_records(&rows).map_err(|e| CliError::Data(format!("{name}: {e}")))
    };
    Ok((split(Station::A)?, split(Station::B)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<StationRecord> {
        let rec = |pair_id, station, label: &str, rad, outcome, time_tag| StationRecord {
            pair_id,
            station,
            setting_label: label.into(),
            setting: AnalyzerSetting::new(rad).unwrap(),
            outcome,
            time_tag,
        };
        vec![
            rec(0, Station::A, "a'", 1.0 / 3.0, Outcome::Plus, 0.123_456_789_012_345_67),
            rec(0, Station::B, "b,odd", 6.0, Outcome::Minus, 1e-300),
            rec(1, Station::A, "a'", 1.0 / 3.0, Outcome::Minus, 1_000.000_000_000_1),
        ]
    }

    fn round_trip(records: &[StationRecord]) -> Vec<StationRecord> {
        let mut buf = Vec::new();
        write_records(&mut buf, records).unwrap();
        read_records(buf.as_slice(), "mem").unwrap()
    }

    #[test]
    fn empty_log_is_header_only() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            format!("{}\n", HEADER.join(","))
        );
        assert!(round_trip(&[]).is_empty());
    }

    #[test]
    fn fixture_round_trips() {
        let mut expected = fixture();
        expected.sort_by_key(|r| (r.station, r.pair_id));
        assert_eq!(round_trip(&fixture()), expected);
    }

    #[test]
    fn bad_outcome_names_the_line() {
        let text = format!("{}\n0,A,a,0,1,0\n1,A,a,0,2,1\n", HEADER.join(","));
        let err = read_records(text.as_bytes(), "x.csv").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, CliError::Data(_)));
        assert!(msg.contains("line 3") && msg.contains("outcome"), "{msg}");
    }

    #[test]
    fn wrong_header_rejected() {
        let err = read_records("a,b\n1,2\n".as_bytes(), "x.csv").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }
}
