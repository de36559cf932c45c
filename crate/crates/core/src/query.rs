//! Wire-level query requests and response payloads, shared by the HTTP
//! service and the CLI so both produce identical output for a context.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytics::{
    centroid, cooccurrence, filter, filter_region, glyph_spec, serotype_centroids, timeline,
    trajectory, CombinationCount, GlyphSizes, GlyphSpec, TimelineMatrix, Trajectory,
    TrajectorySerotype,
};
use crate::model::{
    enumerate_combinations, resolve_window, CountryCode, GeoPoint, Region, RegionSet,
    SelectionContext, Serotype, SerotypeSet, Shade, Source, YearWindow,
};
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Structurally invalid request (HTTP 400).
    BadRequest,
    /// Names a country the gazetteer cannot resolve (HTTP 422).
    UnknownCountry,
    /// Names a region preset that does not exist (HTTP 422).
    UnknownRegion,
}

/// Machine-readable request error with the offending field path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryError {
    #[serde(skip)]
    pub kind: ErrorKind,
    pub code: String,
    pub field: String,
    pub message: String,
}

impl QueryError {
    pub fn new(kind: ErrorKind, field: impl Into<String>, message: impl Into<String>) -> Self {
        let code = match kind {
            ErrorKind::BadRequest => "invalid_request",
            ErrorKind::UnknownCountry => "unknown_country",
            ErrorKind::UnknownRegion => "unknown_region",
        };
        Self {
            kind,
            code: code.to_string(),
            field: field.into(),
            message: message.into(),
        }
    }

    fn bad(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self::new(ErrorKind::BadRequest, field, message.to_string())
    }
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for QueryError {}

/// A region in a request: either a preset name (stored custom region,
/// continent, subcontinent or country) or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionSpec {
    Preset(String),
    Inline {
        name: String,
        countries: Vec<String>,
        #[serde(default = "default_visible")]
        visible: bool,
        #[serde(default)]
        shade: Option<u8>,
    },
}

fn default_visible() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub current_year: i64,
    pub interval_length: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CombinationSpec {
    /// Only `"all"` is accepted.
    Keyword(String),
    List(Vec<Vec<String>>),
}

/// Request body shared by every query endpoint. Omitted fields default to
/// the continent regions, the whole span, all serotypes and all 15
/// combinations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<Vec<RegionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serotypes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combinations: Option<CombinationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_serotype: Option<String>,
}

impl QueryRequest {
    /// Parses a JSON body, reporting the path of the first bad field.
    pub fn from_json(body: &[u8]) -> Result<Self, QueryError> {
        if body.iter().all(u8::is_ascii_whitespace) {
            return Ok(Self::default());
        }
        let de = &mut serde_json::Deserializer::from_slice(body);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { String::new() } else { path };
            QueryError::bad(field, e.into_inner())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CentroidMode {
    All,
    PerSerotype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    All,
    PerSerotype,
    Single(Serotype),
}

/// A validated request.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedQuery {
    pub context: SelectionContext,
    pub combinations: Vec<SerotypeSet>,
    pub centroid_mode: CentroidMode,
    pub trajectory_mode: TrajectoryMode,
}

fn parse_serotypes<'a>(
    field: &str,
    labels: impl IntoIterator<Item = &'a String>,
) -> Result<SerotypeSet, QueryError> {
    labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.parse::<Serotype>()
                .map_err(|e| QueryError::bad(format!("{field}[{i}]"), e))
        })
        .collect()
}

/// Validates a request against a snapshot. `custom` holds stored regions,
/// which take precedence over gazetteer presets of the same name and keep
/// their stored shade and visibility.
pub fn resolve_query(
    request: &QueryRequest,
    snapshot: &Snapshot,
    custom: &RegionSet,
) -> Result<ResolvedQuery, QueryError> {
    let gazetteer = snapshot.gazetteer();
    let regions = match &request.regions {
        None => gazetteer.default_regions().into_vec(),
        Some(specs) => {
            let mut out = Vec::with_capacity(specs.len());
            let mut names = BTreeSet::new();
            for (i, spec) in specs.iter().enumerate() {
                let field = format!("regions[{i}]");
                let region = match spec {
                    RegionSpec::Preset(name) => {
                        if let Some(stored) = custom.get(name) {
                            stored.clone()
                        } else if let Some(node) = gazetteer.resolve_node(name) {
                            Region::new(name.clone(), node.countries)
                                .map_err(|e| QueryError::bad(&field, e))?
                                .with_shade(Shade::cycled(i))
                        } else {
                            return Err(QueryError::new(
                                ErrorKind::UnknownRegion,
                                field,
                                format!("unknown region {name:?}"),
                            ));
                        }
                    }
                    RegionSpec::Inline {
                        name,
                        countries,
                        visible,
                        shade,
                    } => {
                        let codes =
                            resolve_countries(gazetteer, countries, &format!("{field}.countries"))?;
                        let shade = match shade {
                            Some(s) => Shade::new(*s)
                                .map_err(|e| QueryError::bad(format!("{field}.shade"), e))?,
                            None => Shade::cycled(i),
                        };
                        Region::new(name.clone(), codes)
                            .map_err(|e| QueryError::bad(&field, e))?
                            .with_shade(shade)
                            .with_visible(*visible)
                    }
                };
                if !names.insert(region.name.clone()) {
                    return Err(QueryError::bad(
                        field,
                        format!("duplicate region name {:?}", region.name),
                    ));
                }
                out.push(region);
            }
            out
        }
    };

    let span = snapshot.span();
    let window = match request.window {
        None => span.full_window(),
        Some(w) => {
            let year = i32::try_from(w.current_year).unwrap_or(i32::MAX);
            resolve_window(span, year, w.interval_length).map_err(|e| {
                let field = if w.interval_length < 1 {
                    "window.interval_length"
                } else {
                    "window.current_year"
                };
                QueryError::bad(field, e)
            })?
        }
    };

    let serotypes = match &request.serotypes {
        None => SerotypeSet::FULL,
        Some(labels) => parse_serotypes("serotypes", labels)?,
    };

    let combinations = match &request.combinations {
        None => enumerate_combinations(),
        Some(CombinationSpec::Keyword(k)) if k.eq_ignore_ascii_case("all") => {
            enumerate_combinations()
        }
        Some(CombinationSpec::Keyword(k)) => {
            return Err(QueryError::bad(
                "combinations",
                format!("expected \"all\" or a list of serotype lists, got {k:?}"),
            ))
        }
        Some(CombinationSpec::List(list)) => list
            .iter()
            .enumerate()
            .map(|(i, labels)| {
                let field = format!("combinations[{i}]");
                let set = parse_serotypes(&field, labels)?;
                if set.is_empty() {
                    return Err(QueryError::bad(field, "combination must not be empty"));
                }
                Ok(set)
            })
            .collect::<Result<_, _>>()?,
    };

    let centroid_mode = match request.centroid_mode.as_deref() {
        None | Some("all") => CentroidMode::All,
        Some("per_serotype") => CentroidMode::PerSerotype,
        Some(other) => {
            return Err(QueryError::bad(
                "centroid_mode",
                format!("expected \"all\" or \"per_serotype\", got {other:?}"),
            ))
        }
    };

    let trajectory_mode = match request.trajectory_serotype.as_deref() {
        None | Some("all") => TrajectoryMode::All,
        Some("per_serotype") => TrajectoryMode::PerSerotype,
        Some(other) => other
            .parse::<Serotype>()
            .map(TrajectoryMode::Single)
            .map_err(|_| {
                QueryError::bad(
                    "trajectory_serotype",
                    format!("expected \"all\", \"per_serotype\" or a serotype, got {other:?}"),
                )
            })?,
    };

    Ok(ResolvedQuery {
        context: SelectionContext::new(regions, window, serotypes),
        combinations,
        centroid_mode,
        trajectory_mode,
    })
}

/// Resolves country names or codes; `field` is the path of the list.
pub fn resolve_countries(
    gazetteer: &crate::gazetteer::Gazetteer,
    countries: &[String],
    field: &str,
) -> Result<Vec<CountryCode>, QueryError> {
    countries
        .iter()
        .enumerate()
        .map(|(j, raw)| {
            gazetteer.normalize_country(raw).ok_or_else(|| {
                QueryError::new(
                    ErrorKind::UnknownCountry,
                    format!("{field}[{j}]"),
                    format!("unknown country {raw:?}"),
                )
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QueryKind {
    Reports,
    Centroids,
    Trajectories,
    Cooccurrence,
    Timeline,
}

impl QueryKind {
    pub const ALL: [QueryKind; 5] = [
        Self::Reports,
        Self::Centroids,
        Self::Trajectories,
        Self::Cooccurrence,
        Self::Timeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Reports => "reports",
            Self::Centroids => "centroids",
            Self::Trajectories => "trajectories",
            Self::Cooccurrence => "cooccurrence",
            Self::Timeline => "timeline",
        }
    }
}

impl std::str::FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown query kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRecord {
    pub id: u32,
    pub latitude: f64,
    pub longitude: f64,
    pub country: CountryCode,
    pub country_name: String,
    pub year: i32,
    pub serotypes: SerotypeSet,
    pub source: Source,
    pub glyph: GlyphSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportsPayload {
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
    pub count: usize,
    pub reports: Vec<ReportRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCentroids {
    pub region: String,
    pub shade: Shade,
    pub shade_hex: &'static str,
    pub report_count: usize,
    pub centroid: Option<GeoPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub serotypes: Option<BTreeMap<Serotype, GeoPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentroidsPayload {
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
    pub mode: CentroidMode,
    pub regions: Vec<RegionCentroids>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoriesPayload {
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
    pub mode: TrajectoryMode,
    pub trajectories: Vec<Trajectory>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrencePayload {
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
    pub slice_size: usize,
    pub counts: Vec<CombinationCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelinePayload {
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
    #[serde(flatten)]
    pub matrix: TimelineMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Reports(ReportsPayload),
    Centroids(CentroidsPayload),
    Trajectories(TrajectoriesPayload),
    Cooccurrence(CooccurrencePayload),
    Timeline(TimelinePayload),
}

pub fn reports_payload(
    snapshot: &Snapshot,
    query: &ResolvedQuery,
    sizes: &GlyphSizes,
) -> ReportsPayload {
    let ctx = &query.context;
    let slice = filter(snapshot, ctx);
    let gazetteer = snapshot.gazetteer();
    let reports = slice
        .reports()
        .map(|r| ReportRecord {
            id: r.id,
            latitude: r.latitude,
            longitude: r.longitude,
            country: r.country,
            country_name: gazetteer
                .country(r.country)
                .map(|c| c.name.clone())
                .unwrap_or_default(),
            year: r.year,
            serotypes: r.serotypes,
            source: r.source,
            glyph: glyph_spec(r, ctx.serotypes, sizes)
                .expect("filtered reports share an active serotype"),
        })
        .collect::<Vec<_>>();
    ReportsPayload {
        window: ctx.window,
        serotypes: ctx.serotypes,
        count: reports.len(),
        reports,
    }
}

pub fn centroids_payload(snapshot: &Snapshot, query: &ResolvedQuery) -> CentroidsPayload {
    let ctx = &query.context;
    let regions = ctx
        .regions()
        .iter()
        .map(|region| {
            let slice = filter_region(snapshot, region, ctx.window, ctx.serotypes);
            RegionCentroids {
                region: region.name.clone(),
                shade: region.shade,
                shade_hex: region.shade.hex(),
                report_count: slice.len(),
                centroid: centroid(&slice),
                serotypes: (query.centroid_mode == CentroidMode::PerSerotype)
                    .then(|| serotype_centroids(&slice)),
            }
        })
        .collect();
    CentroidsPayload {
        window: ctx.window,
        serotypes: ctx.serotypes,
        mode: query.centroid_mode,
        regions,
    }
}

pub fn trajectories_payload(snapshot: &Snapshot, query: &ResolvedQuery) -> TrajectoriesPayload {
    let ctx = &query.context;
    let selectors: Vec<TrajectorySerotype> = match query.trajectory_mode {
        TrajectoryMode::All => vec![TrajectorySerotype::All],
        TrajectoryMode::PerSerotype => ctx
            .serotypes
            .iter()
            .map(TrajectorySerotype::Single)
            .collect(),
        TrajectoryMode::Single(s) => vec![TrajectorySerotype::Single(s)],
    };
    let trajectories = ctx
        .regions()
        .iter()
        .flat_map(|region| {
            selectors
                .iter()
                .map(move |sel| trajectory(snapshot, region, ctx.window, ctx.serotypes, *sel))
        })
        .collect();
    TrajectoriesPayload {
        window: ctx.window,
        serotypes: ctx.serotypes,
        mode: query.trajectory_mode,
        trajectories,
    }
}

pub fn cooccurrence_payload(snapshot: &Snapshot, query: &ResolvedQuery) -> CooccurrencePayload {
    let ctx = &query.context;
    let slice = filter(snapshot, ctx);
    let result =
        cooccurrence(&slice, &query.combinations).expect("resolved combinations are non-empty");
    CooccurrencePayload {
        window: ctx.window,
        serotypes: ctx.serotypes,
        slice_size: result.slice_size,
        counts: result.counts,
    }
}

pub fn timeline_payload(snapshot: &Snapshot, query: &ResolvedQuery) -> TimelinePayload {
    let ctx = &query.context;
    TimelinePayload {
        window: ctx.window,
        serotypes: ctx.serotypes,
        matrix: timeline(snapshot, ctx.regions(), ctx.serotypes, ctx.window),
    }
}

pub fn execute(
    kind: QueryKind,
    snapshot: &Snapshot,
    query: &ResolvedQuery,
    sizes: &GlyphSizes,
) -> Payload {
    match kind {
        QueryKind::Reports => Payload::Reports(reports_payload(snapshot, query, sizes)),
        QueryKind::Centroids => Payload::Centroids(centroids_payload(snapshot, query)),
        QueryKind::Trajectories => Payload::Trajectories(trajectories_payload(snapshot, query)),
        QueryKind::Cooccurrence => Payload::Cooccurrence(cooccurrence_payload(snapshot, query)),
        QueryKind::Timeline => Payload::Timeline(timeline_payload(snapshot, query)),
    }
}
