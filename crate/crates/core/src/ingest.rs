//! Reports CSV parsing and validation.
//!
//! Expected header: `latitude,longitude,country,year,denv1,denv2,denv3,denv4`.
//! Bad rows are rejected into [`IngestDiagnostics`] and never repaired.

use std::fmt;
use std::io::Read;

use serde::Serialize;

use crate::error::IngestError;
use crate::gazetteer::{fold_name, Gazetteer};
use crate::model::{DatasetSpan, Report, Serotype, SerotypeSet, Source};

pub const REPORT_COLUMNS: [&str; 8] = [
    "latitude",
    "longitude",
    "country",
    "year",
    "denv1",
    "denv2",
    "denv3",
    "denv4",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowIssue {
    /// 1-based line in the input file; the header is line 1.
    pub row: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IngestDiagnostics {
    pub accepted: usize,
    pub rejected: Vec<RowIssue>,
    pub warnings: Vec<RowIssue>,
}

impl IngestDiagnostics {
    pub fn total_rows(&self) -> usize {
        self.accepted + self.rejected.len()
    }

    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }

    pub fn merge(&mut self, other: IngestDiagnostics) {
        self.accepted += other.accepted;
        self.rejected.extend(other.rejected);
        self.warnings.extend(other.warnings);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    FieldCount(usize),
    InvalidUtf8,
    Latitude(String),
    Longitude(String),
    UnknownCountry(String),
    Year(String),
    YearOutOfSpan(i32, DatasetSpan),
    Flag(&'static str, String),
    NoSerotype,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FieldCount(n) => write!(f, "expected 8 fields, found {n}"),
            Self::InvalidUtf8 => f.write_str("row is not valid UTF-8"),
            Self::Latitude(raw) => write!(f, "latitude {raw:?} is not a number in [-90, 90]"),
            Self::Longitude(raw) => {
                write!(f, "longitude {raw:?} is not a number in [-180, 180]")
            }
            Self::UnknownCountry(raw) => write!(f, "unknown country {raw:?}"),
            Self::Year(raw) => write!(f, "year {raw:?} is not an integer"),
            Self::YearOutOfSpan(y, span) => write!(
                f,
                "year {y} is outside the dataset span {}..={}",
                span.year_min, span.year_max
            ),
            Self::Flag(col, raw) => write!(f, "{col} flag {raw:?} must be 0 or 1"),
            Self::NoSerotype => f.write_str("no serotype reported"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParsedReports {
    pub reports: Vec<Report>,
    pub diagnostics: IngestDiagnostics,
}

/// Parses one reports file. Accepted rows get sequential ids starting at
/// `first_id`, in file order.
pub fn parse_reports<R: Read>(
    input: R,
    source: Source,
    gazetteer: &Gazetteer,
    span: DatasetSpan,
    first_id: u32,
) -> Result<ParsedReports, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);

    let header = reader.byte_headers().map_err(csv_fatal)?.clone();
    let names: Vec<String> = header
        .iter()
        .map(|h| String::from_utf8_lossy(h).trim().to_ascii_lowercase())
        .collect();
    if names != REPORT_COLUMNS {
        return Err(IngestError::Header(format!(
            "expected {:?}, found {:?}",
            REPORT_COLUMNS.join(","),
            names.join(",")
        )));
    }

    let mut reports = Vec::new();
    let mut diagnostics = IngestDiagnostics::default();
    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_fatal(e)),
        }
        let row = record.position().map(|p| p.line()).unwrap_or(0);
        let id = first_id + reports.len() as u32;
        match parse_row(&record, id, source, gazetteer, span) {
            Ok((report, warning)) => {
                if let Some(message) = warning {
                    diagnostics.warnings.push(RowIssue { row, message });
                }
                reports.push(report);
                diagnostics.accepted += 1;
            }
            Err(reason) => diagnostics.rejected.push(RowIssue {
                row,
                message: reason.to_string(),
            }),
        }
    }
    Ok(ParsedReports {
        reports,
        diagnostics,
    })
}

fn csv_fatal(e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::Csv(format!("{other:?}")),
    }
}

fn parse_row(
    record: &csv::ByteRecord,
    id: u32,
    source: Source,
    gazetteer: &Gazetteer,
    span: DatasetSpan,
) -> Result<(Report, Option<String>), RejectReason> {
    if record.len() != REPORT_COLUMNS.len() {
        return Err(RejectReason::FieldCount(record.len()));
    }
    let mut fields = [""; 8];
    for (slot, raw) in fields.iter_mut().zip(record.iter()) {
        *slot = std::str::from_utf8(raw)
            .map_err(|_| RejectReason::InvalidUtf8)?
            .trim();
    }
    let [lat, lng, country, year, d1, d2, d3, d4] = fields;

    let latitude = parse_coord(lat, 90.0).ok_or_else(|| RejectReason::Latitude(lat.into()))?;
    let longitude = parse_coord(lng, 180.0).ok_or_else(|| RejectReason::Longitude(lng.into()))?;

    let code = gazetteer
        .normalize_country(country)
        .ok_or_else(|| RejectReason::UnknownCountry(country.into()))?;

    let year: i32 = year.parse().map_err(|_| RejectReason::Year(year.into()))?;
    if !span.contains(year) {
        return Err(RejectReason::YearOutOfSpan(year, span));
    }

    let mut serotypes = SerotypeSet::EMPTY;
    for ((raw, col), serotype) in [d1, d2, d3, d4]
        .into_iter()
        .zip(&REPORT_COLUMNS[4..])
        .zip(Serotype::ALL)
    {
        match raw {
            "1" => serotypes = serotypes.with(serotype),
            "0" => {}
            _ => return Err(RejectReason::Flag(col, raw.into())),
        }
    }
    if serotypes.is_empty() {
        return Err(RejectReason::NoSerotype);
    }

    let warning = gazetteer
        .country(code)
        .filter(|info| fold_name(&info.name) != fold_name(country))
        .map(|info| format!("country {country:?} resolved to {code} ({})", info.name));

    Ok((
        Report {
            id,
            latitude,
            longitude,
            country: code,
            year,
            serotypes,
            source,
        },
        warning,
    ))
}

fn parse_coord(raw: &str, limit: f64) -> Option<f64> {
    let v: f64 = raw.parse().ok()?;
    (v.is_finite() && (-limit..=limit).contains(&v)).then_some(v)
}
