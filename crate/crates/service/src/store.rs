//! Named custom regions persisted as one JSON document with a version
//! counter. Writes replace the whole set under optimistic concurrency.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use geoden_core::gazetteer::Gazetteer;
use geoden_core::query::{resolve_countries, ErrorKind, QueryError};
use geoden_core::{CountryCode, Region, RegionSet, Shade};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("region store {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("region store {path} is corrupt: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("version conflict: request is based on {expected}, store is at {current}")]
    Conflict { expected: u64, current: u64 },
}

/// The store's content as served by `GET /api/regions`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoreView {
    pub version: u64,
    pub regions: RegionSet,
}

#[derive(Deserialize)]
struct StoredRegion {
    name: String,
    countries: Vec<CountryCode>,
    #[serde(default = "yes")]
    visible: bool,
    #[serde(default)]
    shade: Option<Shade>,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
struct StoredDocument {
    version: u64,
    regions: Vec<StoredRegion>,
}

#[derive(Debug)]
pub struct RegionStore {
    path: Option<PathBuf>,
    state: Mutex<StoreView>,
}

impl RegionStore {
    /// Store that lives only as long as the process.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            state: Mutex::new(StoreView {
                version: 0,
                regions: RegionSet::default(),
            }),
        }
    }

    /// Opens `path`, starting empty at version 0 when it does not exist.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let view = if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|source| StoreError::Io {
                path: path.clone(),
                source,
            })?;
            let corrupt = |message: String| StoreError::Corrupt {
                path: path.clone(),
                message,
            };
            let doc: StoredDocument =
                serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
            let regions = doc
                .regions
                .into_iter()
                .enumerate()
                .map(|(i, r)| {
                    Region::new(r.name, r.countries).map(|g| {
                        g.with_visible(r.visible)
                            .with_shade(r.shade.unwrap_or(Shade::cycled(i)))
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .and_then(RegionSet::new)
                .map_err(|e| corrupt(e.to_string()))?;
            StoreView {
                version: doc.version,
                regions,
            }
        } else {
            StoreView {
                version: 0,
                regions: RegionSet::default(),
            }
        };
        Ok(Self {
            path: Some(path),
            state: Mutex::new(view),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn view(&self) -> StoreView {
        self.state.lock().expect("store lock").clone()
    }

    pub fn regions(&self) -> RegionSet {
        self.view().regions
    }

    /// Replaces the region set. With `base` set, fails unless the store is
    /// still at that version. The file is written to a temporary sibling
    /// and renamed over the old one before the new version is visible.
    pub fn replace(&self, base: Option<u64>, regions: RegionSet) -> Result<StoreView, StoreError> {
        let mut state = self.state.lock().expect("store lock");
        if let Some(expected) = base {
            if expected != state.version {
                return Err(StoreError::Conflict {
                    expected,
                    current: state.version,
                });
            }
        }
        let next = StoreView {
            version: state.version + 1,
            regions,
        };
        if let Some(path) = &self.path {
            write_atomic(path, &next).map_err(|source| StoreError::Io {
                path: path.clone(),
                source,
            })?;
        }
        *state = next.clone();
        Ok(next)
    }
}

fn write_atomic(path: &Path, view: &StoreView) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, view)?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineRegion {
    name: String,
    countries: Vec<String>,
    #[serde(default = "yes")]
    visible: bool,
    #[serde(default)]
    shade: Option<u8>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PutBody {
    Structured {
        #[serde(default)]
        version: Option<u64>,
        regions: Vec<InlineRegion>,
    },
    /// `{"name": ["country", ...], ...}`
    Map(BTreeMap<String, Vec<String>>),
}

/// Parses a `PUT /api/regions` body: either `{"version"?, "regions": [{name,
/// countries, visible?, shade?}]}` or a bare map from name to countries.
/// Returns the base version carried in the body, if any.
pub fn parse_put_body(
    body: &[u8],
    gazetteer: &Gazetteer,
) -> Result<(Option<u64>, RegionSet), QueryError> {
    let parsed: PutBody = serde_json::from_slice(body).map_err(|e| {
        QueryError::new(
            ErrorKind::BadRequest,
            "",
            format!("expected a region list or a name-to-countries map: {e}"),
        )
    })?;
    let bad = |field: String, e: &dyn std::fmt::Display| {
        QueryError::new(ErrorKind::BadRequest, field, e.to_string())
    };
    let (version, regions) = match parsed {
        PutBody::Structured { version, regions } => {
            let mut out = Vec::with_capacity(regions.len());
            for (i, r) in regions.into_iter().enumerate() {
                let field = format!("regions[{i}]");
                let codes =
                    resolve_countries(gazetteer, &r.countries, &format!("{field}.countries"))?;
                let shade = match r.shade {
                    Some(s) => Shade::new(s).map_err(|e| bad(format!("{field}.shade"), &e))?,
                    None => Shade::cycled(i),
                };
                let region = Region::new(r.name, codes).map_err(|e| bad(field, &e))?;
                out.push(region.with_shade(shade).with_visible(r.visible));
            }
            (version, out)
        }
        PutBody::Map(map) => {
            let mut out = Vec::with_capacity(map.len());
            for (i, (name, countries)) in map.into_iter().enumerate() {
                let field = format!("regions.{name}");
                let codes = resolve_countries(gazetteer, &countries, &field)?;
                let region = Region::new(name, codes).map_err(|e| bad(field, &e))?;
                out.push(region.with_shade(Shade::cycled(i)));
            }
            (None, out)
        }
    };
    let set = RegionSet::new(regions).map_err(|e| bad("regions".to_string(), &e))?;
    Ok((version, set))
}
