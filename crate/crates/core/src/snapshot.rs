//! Immutable, indexed snapshot of a dataset, and loading one from a data
//! directory.
//!
//! Data directory layout:
//!
//! | file              | required | contents                                   |
//! |-------------------|----------|--------------------------------------------|
//! | `core.csv`        | yes      | reports, source `core`                     |
//! | `supplement.csv`  | no       | reports, source `supplement`               |
//! | `suitability.asc` | no       | ESRI ASCII suitability grid                |
//! | `gazetteer.json`  | no       | region tree; the bundled one otherwise     |
//! | `dataset.json`    | no       | `{"year_min": .., "year_max": ..}` span    |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SnapshotError;
use crate::gazetteer::Gazetteer;
use crate::grid::{load_suitability_grid, SuitabilityGrid};
use crate::ingest::{parse_reports, IngestDiagnostics};
use crate::model::{CountryCode, DatasetSpan, Report, Serotype, Source};

pub const CORE_FILE: &str = "core.csv";
pub const SUPPLEMENT_FILE: &str = "supplement.csv";
pub const GRID_FILE: &str = "suitability.asc";
pub const GAZETTEER_FILE: &str = "gazetteer.json";
pub const DATASET_FILE: &str = "dataset.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotMeta {
    pub report_count: usize,
    /// Earliest and latest year with at least one report.
    pub year_min: i32,
    pub year_max: i32,
    /// Selectable span windows are clamped to.
    pub span: DatasetSpan,
    pub source_counts: BTreeMap<Source, usize>,
    pub serotypes: Vec<Serotype>,
    pub has_suitability: bool,
}

#[derive(Debug)]
pub struct Snapshot {
    reports: Vec<Report>,
    by_year: BTreeMap<i32, Vec<u32>>,
    by_country: BTreeMap<CountryCode, Vec<u32>>,
    gazetteer: Arc<Gazetteer>,
    grid: Option<SuitabilityGrid>,
    meta: SnapshotMeta,
}

/// Builds the indexes. Report ids must equal their positions.
pub fn build_snapshot(
    reports: Vec<Report>,
    gazetteer: Arc<Gazetteer>,
    grid: Option<SuitabilityGrid>,
    span: DatasetSpan,
) -> Result<Snapshot, SnapshotError> {
    if reports.is_empty() {
        return Err(SnapshotError::Empty);
    }
    let mut by_year: BTreeMap<i32, Vec<u32>> = BTreeMap::new();
    let mut by_country: BTreeMap<CountryCode, Vec<u32>> = BTreeMap::new();
    let mut source_counts = BTreeMap::new();
    for (pos, r) in reports.iter().enumerate() {
        if r.id as usize != pos {
            return Err(SnapshotError::Inconsistent(format!(
                "report at position {pos} has id {}",
                r.id
            )));
        }
        if !span.contains(r.year) {
            return Err(SnapshotError::Inconsistent(format!(
                "report {} year {} is outside {}..={}",
                r.id, r.year, span.year_min, span.year_max
            )));
        }
        if !gazetteer.contains(r.country) {
            return Err(SnapshotError::Inconsistent(format!(
                "report {} country {} is not in the gazetteer",
                r.id, r.country
            )));
        }
        if r.serotypes.is_empty() {
            return Err(SnapshotError::Inconsistent(format!(
                "report {} has no serotype",
                r.id
            )));
        }
        by_year.entry(r.year).or_default().push(r.id);
        by_country.entry(r.country).or_default().push(r.id);
        *source_counts.entry(r.source).or_insert(0) += 1;
    }
    let meta = SnapshotMeta {
        report_count: reports.len(),
        year_min: *by_year.keys().next().expect("non-empty"),
        year_max: *by_year.keys().next_back().expect("non-empty"),
        span,
        source_counts,
        serotypes: Serotype::ALL.to_vec(),
        has_suitability: grid.is_some(),
    };
    Ok(Snapshot {
        reports,
        by_year,
        by_country,
        gazetteer,
        grid,
        meta,
    })
}

impl Snapshot {
    pub fn meta(&self) -> &SnapshotMeta {
        &self.meta
    }

    pub fn span(&self) -> DatasetSpan {
        self.meta.span
    }

    pub fn reports(&self) -> &[Report] {
        &self.reports
    }

    pub fn report(&self, id: u32) -> &Report {
        &self.reports[id as usize]
    }

    /// Ids reported in `year`, ascending.
    pub fn ids_in_year(&self, year: i32) -> &[u32] {
        self.by_year.get(&year).map_or(&[], Vec::as_slice)
    }

    pub fn ids_in_country(&self, country: CountryCode) -> &[u32] {
        self.by_country.get(&country).map_or(&[], Vec::as_slice)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        self.by_year.keys().copied()
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.by_country.keys().copied()
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn gazetteer_arc(&self) -> Arc<Gazetteer> {
        Arc::clone(&self.gazetteer)
    }

    pub fn grid(&self) -> Option<&SuitabilityGrid> {
        self.grid.as_ref()
    }
}

/// A snapshot together with everything ingest had to say about the inputs.
#[derive(Debug)]
pub struct LoadedSnapshot {
    pub snapshot: Snapshot,
    pub diagnostics: IngestDiagnostics,
    pub grid_warnings: Vec<String>,
}

#[derive(Deserialize)]
struct DatasetConfig {
    year_min: i32,
    year_max: i32,
}

/// Loads a data directory. Rejected rows are reported in the diagnostics
/// and left out of the snapshot.
pub fn load_data_dir(dir: &Path) -> Result<LoadedSnapshot, SnapshotError> {
    if !dir.is_dir() {
        return Err(SnapshotError::MissingDataDir(dir.to_path_buf()));
    }

    let span = match read_optional(dir, DATASET_FILE)? {
        Some((path, text)) => {
            let cfg: DatasetConfig =
                serde_json::from_str(&text).map_err(|e| SnapshotError::Config {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            DatasetSpan::new(cfg.year_min, cfg.year_max)?
        }
        None => DatasetSpan::default(),
    };

    let gazetteer = match read_optional(dir, GAZETTEER_FILE)? {
        Some((path, text)) => Arc::new(
            Gazetteer::from_json(&text)
                .map_err(|source| SnapshotError::Gazetteer { path, source })?,
        ),
        None => Arc::new(Gazetteer::bundled().clone()),
    };

    let core_path = dir.join(CORE_FILE);
    if !core_path.is_file() {
        return Err(SnapshotError::MissingFile(core_path));
    }
    let mut reports = Vec::new();
    let mut diagnostics = IngestDiagnostics::default();
    for (path, source) in [
        (core_path, Source::Core),
        (dir.join(SUPPLEMENT_FILE), Source::Supplement),
    ] {
        if source == Source::Supplement && !path.is_file() {
            continue;
        }
        let file = File::open(&path)?;
        let parsed = parse_reports(
            BufReader::new(file),
            source,
            &gazetteer,
            span,
            reports.len() as u32,
        )
        .map_err(|source| SnapshotError::Ingest {
            path: path.clone(),
            source,
        })?;
        reports.extend(parsed.reports);
        diagnostics.merge(parsed.diagnostics);
    }

    let grid_path = dir.join(GRID_FILE);
    let (grid, grid_warnings) = if grid_path.is_file() {
        let file = File::open(&grid_path)?;
        let load =
            load_suitability_grid(BufReader::new(file)).map_err(|source| SnapshotError::Grid {
                path: grid_path.clone(),
                source,
            })?;
        (Some(load.grid), load.warnings)
    } else {
        (None, Vec::new())
    };

    let snapshot = build_snapshot(reports, gazetteer, grid, span)?;
    Ok(LoadedSnapshot {
        snapshot,
        diagnostics,
        grid_warnings,
    })
}

fn read_optional(dir: &Path, name: &str) -> Result<Option<(PathBuf, String)>, SnapshotError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    Ok(Some((path, text)))
}
