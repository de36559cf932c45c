use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors from constructing domain values.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("serotype mask {0} is out of range 0..=15")]
    MaskOutOfRange(u32),
    #[error("unknown serotype {0:?}")]
    UnknownSerotype(String),
    #[error("current year {year} is outside the dataset span {min}..={max}")]
    YearOutOfSpan { year: i32, min: i32, max: i32 },
    #[error("interval length must be at least 1, got {0}")]
    IntervalTooShort(i64),
    #[error("invalid dataset span {min}..={max}")]
    InvalidSpan { min: i32, max: i32 },
    #[error("region {0:?} has no countries")]
    EmptyRegion(String),
    #[error("region name must not be empty")]
    UnnamedRegion,
    #[error("duplicate region name {0:?}")]
    DuplicateRegion(String),
    #[error("shade {0} is outside the 4-step ramp")]
    ShadeOutOfRange(u8),
    #[error("invalid country code {0:?}")]
    InvalidCountryCode(String),
    #[error("latitude/longitude ({lat}, {lng}) out of range")]
    CoordinateOutOfRange { lat: f64, lng: f64 },
}

/// Errors from loading the region gazetteer.
#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("malformed gazetteer document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("country {0} appears more than once in the region tree")]
    DuplicateCountry(String),
    #[error("country {0} in the region tree has no gazetteer entry")]
    UnlistedCountry(String),
    #[error("country {0} is listed but not placed in the region tree")]
    UnplacedCountry(String),
    #[error("duplicate node name {0:?} at the same level")]
    DuplicateNode(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Fatal ingest failures. Row-level problems go into diagnostics instead.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[from] io::Error),
    #[error("malformed CSV header: {0}")]
    Header(String),
    #[error("CSV error: {0}")]
    Csv(String),
}

/// Fatal suitability raster failures.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("failed to read grid: {0}")]
    Io(#[from] io::Error),
    #[error("grid header: {0}")]
    Header(String),
    #[error("grid shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("unparseable value {token:?} at row {row}, col {col}")]
    Value {
        row: usize,
        col: usize,
        token: String,
    },
    #[error("suitability {value} at row {row}, col {col} is outside [0, 100]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("ambiguous scale: maximum value {value} at row {row}, col {col} fits neither a [0, 1] fraction nor a percentage grid")]
    AmbiguousScale { row: usize, col: usize, value: f64 },
}

/// Errors from a classified suitability window request.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindowError {
    #[error("malformed bbox {0:?}: expected min_lng,min_lat,max_lng,max_lat")]
    MalformedBbox(String),
    #[error("resolution must be a positive number of degrees, got {0}")]
    Resolution(f64),
    #[error("window of {rows}x{cols} cells exceeds the {limit} cell limit")]
    TooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },
}

/// Errors building or loading a snapshot.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("no reports to explore")]
    Empty,
    #[error("data directory {0} does not exist")]
    MissingDataDir(PathBuf),
    #[error("required file {0} is missing")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    Ingest {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error("{path}: {source}")]
    Grid {
        path: PathBuf,
        #[source]
        source: GridError,
    },
    #[error("{path}: {source}")]
    Gazetteer {
        path: PathBuf,
        #[source]
        source: GazetteerError,
    },
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("inconsistent snapshot input: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from analytics operations with non-trivial preconditions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("co-occurrence combination must not be empty")]
    EmptyCombination,
    #[error("report {0} shares no serotype with the active filter")]
    NoActiveSection(u32),
    #[error("suitability {0} is outside [0, 100]")]
    SuitabilityOutOfRange(f64),
    #[error("glyph radii must be positive and strictly increasing")]
    InvalidGlyphSizes,
}
