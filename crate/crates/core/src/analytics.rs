//! Computations behind the panels: filtering, centroids, trajectories,
//! co-occurrence counts, timeline matrices and report glyphs.
//!
//! Every function is pure over an immutable [`Snapshot`]. Reports are always
//! visited in ascending id order, so floating-point sums are reproducible
//! from any other route that visits the same reports in the same order.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::AnalyticsError;
use crate::model::{GeoPoint, Region, Report, SelectionContext, Serotype, SerotypeSet, YearWindow};
use crate::snapshot::Snapshot;

/// Reports matching a selection context, ascending by id.
#[derive(Debug, Clone)]
pub struct ReportSlice<'a> {
    snapshot: &'a Snapshot,
    ids: Vec<u32>,
    active: SerotypeSet,
}

impl<'a> ReportSlice<'a> {
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Serotype filter the slice was built with.
    pub fn active(&self) -> SerotypeSet {
        self.active
    }

    pub fn snapshot(&self) -> &'a Snapshot {
        self.snapshot
    }

    pub fn reports(&self) -> impl Iterator<Item = &'a Report> + '_ {
        self.ids.iter().map(|id| self.snapshot.report(*id))
    }
}

/// Reports whose country is in a visible region, whose year is in the
/// window, and which share at least one serotype with the active filter.
pub fn filter<'a>(snapshot: &'a Snapshot, context: &SelectionContext) -> ReportSlice<'a> {
    let countries = context.countries();
    let mut ids = Vec::new();
    if !countries.is_empty() && !context.serotypes.is_empty() {
        for year in context.window.years() {
            ids.extend(snapshot.ids_in_year(year).iter().copied().filter(|id| {
                let r = snapshot.report(*id);
                countries.contains(&r.country) && r.serotypes.intersects(context.serotypes)
            }));
        }
        // year-major index order; restore id order
        ids.sort_unstable();
    }
    ReportSlice {
        snapshot,
        ids,
        active: context.serotypes,
    }
}

/// Slice for a single region, regardless of its visibility flag.
pub fn filter_region<'a>(
    snapshot: &'a Snapshot,
    region: &Region,
    window: YearWindow,
    serotypes: SerotypeSet,
) -> ReportSlice<'a> {
    let region = region.clone().with_visible(true);
    filter(
        snapshot,
        &SelectionContext::new([region], window, serotypes),
    )
}

fn mean_point<'r>(reports: impl Iterator<Item = &'r Report>) -> Option<GeoPoint> {
    let (mut lat, mut lng, mut n) = (0.0f64, 0.0f64, 0usize);
    for r in reports {
        lat += r.latitude;
        lng += r.longitude;
        n += 1;
    }
    (n > 0).then(|| GeoPoint {
        latitude: lat / n as f64,
        longitude: lng / n as f64,
    })
}

/// Arithmetic mean of latitudes and longitudes, in degrees. Not meaningful
/// for sets straddling the antimeridian.
pub fn centroid(slice: &ReportSlice<'_>) -> Option<GeoPoint> {
    mean_point(slice.reports())
}

/// Centroid per active serotype over the reports containing it. Serotypes
/// without reports are omitted.
pub fn serotype_centroids(slice: &ReportSlice<'_>) -> BTreeMap<Serotype, GeoPoint> {
    slice
        .active
        .iter()
        .filter_map(|s| {
            mean_point(slice.reports().filter(|r| r.serotypes.contains(s))).map(|p| (s, p))
        })
        .collect()
}

/// Which reports a trajectory follows: everything passing the active filter,
/// or only reports containing one serotype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrajectorySerotype {
    All,
    Single(Serotype),
}

impl TrajectorySerotype {
    pub fn filter_set(self, active: SerotypeSet) -> SerotypeSet {
        match self {
            Self::All => active,
            Self::Single(s) => SerotypeSet::EMPTY.with(s),
        }
    }
}

impl fmt::Display for TrajectorySerotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => f.write_str("all"),
            Self::Single(s) => s.fmt(f),
        }
    }
}

impl Serialize for TrajectorySerotype {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TrajectorySerotype {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(de::Error::custom)
    }
}

impl std::str::FromStr for TrajectorySerotype {
    type Err = crate::error::ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(Self::All)
        } else {
            s.parse().map(Self::Single)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryVertex {
    pub year: i32,
    pub point: GeoPoint,
    pub report_count: usize,
}

/// Chronological polyline through yearly centroids. Years without reports
/// have no vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub region: String,
    pub serotype: TrajectorySerotype,
    pub vertices: Vec<TrajectoryVertex>,
}

pub fn trajectory(
    snapshot: &Snapshot,
    region: &Region,
    window: YearWindow,
    active: SerotypeSet,
    serotype: TrajectorySerotype,
) -> Trajectory {
    let wanted = serotype.filter_set(active);
    let vertices = window
        .years()
        .filter_map(|year| {
            let reports: Vec<&Report> = snapshot
                .ids_in_year(year)
                .iter()
                .map(|id| snapshot.report(*id))
                .filter(|r| region.contains(r.country) && r.serotypes.intersects(wanted))
                .collect();
            mean_point(reports.iter().copied()).map(|point| TrajectoryVertex {
                year,
                point,
                report_count: reports.len(),
            })
        })
        .collect();
    Trajectory {
        region: region.name.clone(),
        serotype,
        vertices,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinationCount {
    pub combination: SerotypeSet,
    /// Reports whose serotype set equals the combination.
    pub exact_count: u32,
    /// Reports whose serotype set contains the combination.
    pub superset_count: u32,
    pub exact_proportion: Option<f64>,
    pub superset_proportion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrenceResult {
    pub slice_size: usize,
    pub counts: Vec<CombinationCount>,
}

/// Exact and superset counts for each queried combination, tallied in one
/// pass over the slice.
pub fn cooccurrence(
    slice: &ReportSlice<'_>,
    combinations: &[SerotypeSet],
) -> Result<CooccurrenceResult, AnalyticsError> {
    if combinations.iter().any(|c| c.is_empty()) {
        return Err(AnalyticsError::EmptyCombination);
    }
    let mut by_mask = [0u32; 16];
    for r in slice.reports() {
        by_mask[r.serotypes.mask() as usize] += 1;
    }
    let size = slice.len();
    let proportion = |count: u32| (size > 0).then(|| count as f64 / size as f64);
    let counts = combinations
        .iter()
        .map(|&combination| {
            let exact_count = by_mask[combination.mask() as usize];
            let superset_count = (0u8..16)
                .filter(|m| m & combination.mask() == combination.mask())
                .map(|m| by_mask[m as usize])
                .sum();
            CombinationCount {
                combination,
                exact_count,
                superset_count,
                exact_proportion: proportion(exact_count),
                superset_proportion: proportion(superset_count),
            }
        })
        .collect();
    Ok(CooccurrenceResult {
        slice_size: size,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineRow {
    pub region: String,
    pub serotype: Serotype,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionTotals {
    pub region: String,
    /// Distinct reports per year passing the serotype filter.
    pub counts: Vec<u32>,
}

/// Dense region × serotype × year count matrix. A report counts once in
/// every row whose serotype it contains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelineMatrix {
    pub years: Vec<i32>,
    pub rows: Vec<TimelineRow>,
    pub totals: Vec<RegionTotals>,
}

impl TimelineMatrix {
    pub fn cell(&self, region: &str, serotype: Serotype, year: i32) -> Option<u32> {
        let col = self.years.iter().position(|y| *y == year)?;
        self.rows
            .iter()
            .find(|r| r.region == region && r.serotype == serotype)
            .map(|r| r.counts[col])
    }

    pub fn region_total(&self, region: &str) -> Option<u32> {
        self.totals
            .iter()
            .find(|t| t.region == region)
            .map(|t| t.counts.iter().sum())
    }
}

pub fn timeline(
    snapshot: &Snapshot,
    regions: &[Region],
    serotypes: SerotypeSet,
    window: YearWindow,
) -> TimelineMatrix {
    let years: Vec<i32> = window.years().collect();
    let active: Vec<Serotype> = serotypes.iter().collect();
    let mut rows = Vec::with_capacity(regions.len() * active.len());
    let mut totals = Vec::with_capacity(regions.len());
    for region in regions {
        let mut per_serotype = vec![vec![0u32; years.len()]; active.len()];
        let mut total = vec![0u32; years.len()];
        for (col, &year) in years.iter().enumerate() {
            for id in snapshot.ids_in_year(year) {
                let r = snapshot.report(*id);
                if !region.contains(r.country) || !r.serotypes.intersects(serotypes) {
                    continue;
                }
                total[col] += 1;
                for (row, s) in active.iter().enumerate() {
                    if r.serotypes.contains(*s) {
                        per_serotype[row][col] += 1;
                    }
                }
            }
        }
        rows.extend(
            active
                .iter()
                .zip(per_serotype)
                .map(|(&serotype, counts)| TimelineRow {
                    region: region.name.clone(),
                    serotype,
                    counts,
                }),
        );
        totals.push(RegionTotals {
            region: region.name.clone(),
            counts: total,
        });
    }
    TimelineMatrix {
        years,
        rows,
        totals,
    }
}

/// Glyph radius in pixels for 1..=4 visible sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlyphSizes([f64; 4]);

impl GlyphSizes {
    pub fn new(radii: [f64; 4]) -> Result<Self, AnalyticsError> {
        let ok = radii[0] > 0.0 && radii.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(AnalyticsError::InvalidGlyphSizes);
        }
        Ok(Self(radii))
    }

    pub fn radius(&self, sections: usize) -> f64 {
        self.0[sections.clamp(1, 4) - 1]
    }
}

impl Default for GlyphSizes {
    fn default() -> Self {
        Self([6.0, 8.0, 10.0, 12.0])
    }
}

/// Pie glyph for one report: equal sections for the active serotypes it
/// contains, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlyphSpec {
    pub center: GeoPoint,
    pub sections: Vec<Serotype>,
    pub section_angle: f64,
    pub radius: f64,
}

pub fn glyph_spec(
    report: &Report,
    active: SerotypeSet,
    sizes: &GlyphSizes,
) -> Result<GlyphSpec, AnalyticsError> {
    let shown = report.serotypes.intersection(active);
    if shown.is_empty() {
        return Err(AnalyticsError::NoActiveSection(report.id));
    }
    let sections: Vec<Serotype> = shown.iter().collect();
    Ok(GlyphSpec {
        center: report.point(),
        section_angle: 360.0 / sections.len() as f64,
        radius: sizes.radius(sections.len()),
        sections,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gazetteer::Gazetteer;
    use crate::model::{DatasetSpan, Source};
    use crate::snapshot::build_snapshot;

    fn set(items: &[Serotype]) -> SerotypeSet {
        items.iter().copied().collect()
    }

    use Serotype::*;

    fn snap(rows: &[(f64, f64, &str, i32, &[Serotype])]) -> Snapshot {
        let reports = rows
            .iter()
            .enumerate()
            .map(|(i, (lat, lng, c, y, s))| Report {
                id: i as u32,
                latitude: *lat,
                longitude: *lng,
                country: c.parse().unwrap(),
                year: *y,
                serotypes: set(s),
                source: Source::Core,
            })
            .collect();
        build_snapshot(
            reports,
            Arc::new(Gazetteer::bundled().clone()),
            None,
            DatasetSpan::default(),
        )
        .unwrap()
    }

    fn region(name: &str, countries: &[&str]) -> Region {
        Region::new(name, countries.iter().map(|c| c.parse().unwrap())).unwrap()
    }

    fn all_ctx(
        snapshot: &Snapshot,
        regions: Vec<Region>,
        serotypes: SerotypeSet,
    ) -> SelectionContext {
        SelectionContext::new(regions, snapshot.span().full_window(), serotypes)
    }

    fn sample() -> Snapshot {
        snap(&[
            (5.0, 5.0, "BRA", 1990, &[Denv1, Denv2]),
            (15.0, 5.0, "BRA", 1990, &[Denv1]),
            (-10.0, -70.0, "PER", 1992, &[Denv3]),
            (10.0, 100.0, "THA", 1990, &[Denv1, Denv2, Denv3, Denv4]),
        ])
    }

    #[test]
    fn no_op_filter_keeps_everything() {
        let s = sample();
        let ctx = all_ctx(
            &s,
            Gazetteer::bundled().default_regions().into_vec(),
            SerotypeSet::FULL,
        );
        assert_eq!(filter(&s, &ctx).len(), s.meta().report_count);
    }

    #[test]
    fn empty_serotype_filter_selects_nothing() {
        let s = sample();
        let ctx = all_ctx(
            &s,
            Gazetteer::bundled().default_regions().into_vec(),
            SerotypeSet::EMPTY,
        );
        assert!(filter(&s, &ctx).is_empty());
    }

    #[test]
    fn filter_applies_all_predicates() {
        let s = sample();
        let sa = region("SA", &["BRA", "PER"]);
        let ctx = all_ctx(&s, vec![sa.clone()], set(&[Denv3]));
        assert_eq!(filter(&s, &ctx).ids(), [2]);
        let ctx = SelectionContext::new([sa], YearWindow::single_year(1990), SerotypeSet::FULL);
        assert_eq!(filter(&s, &ctx).ids(), [0, 1]);
    }

    #[test]
    fn centroid_examples() {
        let s = snap(&[(10.0, 20.0, "BRA", 1990, &[Denv1])]);
        let ctx = all_ctx(&s, vec![region("b", &["BRA"])], SerotypeSet::FULL);
        assert_eq!(
            centroid(&filter(&s, &ctx)),
            Some(GeoPoint {
                latitude: 10.0,
                longitude: 20.0
            })
        );

        let s = snap(&[
            (0.0, 10.0, "BRA", 1990, &[Denv1]),
            (0.0, 30.0, "BRA", 1991, &[Denv2]),
        ]);
        let ctx = all_ctx(&s, vec![region("b", &["BRA"])], SerotypeSet::FULL);
        assert_eq!(
            centroid(&filter(&s, &ctx)),
            Some(GeoPoint {
                latitude: 0.0,
                longitude: 20.0
            })
        );

        let ctx = all_ctx(&s, vec![region("p", &["PER"])], SerotypeSet::FULL);
        assert_eq!(centroid(&filter(&s, &ctx)), None);
    }

    #[test]
    fn serotype_centroids_overlap() {
        let s = sample();
        let ctx = all_ctx(&s, vec![region("b", &["BRA"])], SerotypeSet::FULL);
        let map = serotype_centroids(&filter(&s, &ctx));
        assert_eq!(map.len(), 2);
        assert_eq!(
            map[&Denv1],
            GeoPoint {
                latitude: 10.0,
                longitude: 5.0
            }
        );
        assert_eq!(
            map[&Denv2],
            GeoPoint {
                latitude: 5.0,
                longitude: 5.0
            }
        );

        let ctx = all_ctx(&s, vec![region("b", &["BRA"])], set(&[Denv2]));
        let map = serotype_centroids(&filter(&s, &ctx));
        assert_eq!(map.keys().copied().collect::<Vec<_>>(), [Denv2]);
    }

    #[test]
    fn trajectory_skips_gap_years() {
        let s = snap(&[
            (1.0, 1.0, "BRA", 1990, &[Denv1]),
            (3.0, 3.0, "BRA", 1992, &[Denv1]),
            (5.0, 5.0, "BRA", 1992, &[Denv2]),
        ]);
        let r = region("b", &["BRA"]);
        let w = crate::model::resolve_window(s.span(), 1995, 10).unwrap();
        let t = trajectory(&s, &r, w, SerotypeSet::FULL, TrajectorySerotype::All);
        let years: Vec<_> = t.vertices.iter().map(|v| v.year).collect();
        assert_eq!(years, [1990, 1992]);
        assert_eq!(
            t.vertices[1].point,
            GeoPoint {
                latitude: 4.0,
                longitude: 4.0
            }
        );
        assert_eq!(t.vertices[1].report_count, 2);

        let t = trajectory(
            &s,
            &r,
            w,
            SerotypeSet::FULL,
            TrajectorySerotype::Single(Denv2),
        );
        assert_eq!(t.vertices.len(), 1);

        let t = trajectory(
            &s,
            &r,
            YearWindow::single_year(1991),
            SerotypeSet::FULL,
            TrajectorySerotype::All,
        );
        assert!(t.vertices.is_empty());
    }

    #[test]
    fn cooccurrence_examples() {
        let s = snap(&[
            (0.0, 0.0, "BRA", 1990, &[Denv1]),
            (0.0, 0.0, "BRA", 1990, &[Denv1]),
            (0.0, 0.0, "BRA", 1990, &[Denv1, Denv2]),
        ]);
        let ctx = all_ctx(&s, vec![region("b", &["BRA"])], SerotypeSet::FULL);
        let slice = filter(&s, &ctx);
        let res = cooccurrence(&slice, &[set(&[Denv1]), SerotypeSet::FULL]).unwrap();
        assert_eq!(res.counts[0].exact_count, 2);
        assert_eq!(res.counts[0].superset_count, 3);
        assert_eq!(res.counts[0].exact_proportion, Some(2.0 / 3.0));
        assert_eq!(res.counts[1].exact_count, res.counts[1].superset_count);
        assert_eq!(
            cooccurrence(&slice, &[SerotypeSet::EMPTY]),
            Err(AnalyticsError::EmptyCombination)
        );
    }

    #[test]
    fn cooccurrence_of_empty_slice_has_no_proportion() {
        let s = sample();
        let ctx = all_ctx(&s, vec![region("x", &["FRA"])], SerotypeSet::FULL);
        let res = cooccurrence(&filter(&s, &ctx), &[set(&[Denv1])]).unwrap();
        assert_eq!(res.slice_size, 0);
        assert_eq!(res.counts[0].exact_proportion, None);
    }

    #[test]
    fn timeline_zero_fill() {
        let s = sample();
        let w = crate::model::resolve_window(s.span(), 1980, 5).unwrap();
        let m = timeline(&s, &[region("b", &["BRA"])], set(&[Denv1]), w);
        assert_eq!(m.years, [1976, 1977, 1978, 1979, 1980]);
        assert_eq!(m.rows.len(), 1);
        assert_eq!(m.rows[0].counts, [0; 5]);
    }

    #[test]
    fn timeline_counts_multi_serotype_reports_per_row() {
        let s = sample();
        let w = YearWindow::single_year(1990);
        let m = timeline(&s, &[region("b", &["BRA", "THA"])], SerotypeSet::FULL, w);
        assert_eq!(m.cell("b", Denv1, 1990), Some(3));
        assert_eq!(m.cell("b", Denv2, 1990), Some(2));
        assert_eq!(m.cell("b", Denv4, 1990), Some(1));
        assert_eq!(m.region_total("b"), Some(3));
    }

    #[test]
    fn glyph_examples() {
        let s = sample();
        let sizes = GlyphSizes::default();
        let g = glyph_spec(s.report(3), SerotypeSet::FULL, &sizes).unwrap();
        assert_eq!(g.sections, [Denv1, Denv2, Denv3, Denv4]);
        assert_eq!(g.section_angle, 90.0);

        let r = Report {
            serotypes: set(&[Denv1, Denv3]),
            ..s.report(0).clone()
        };
        let g = glyph_spec(&r, set(&[Denv3]), &sizes).unwrap();
        assert_eq!(g.sections, [Denv3]);
        assert_eq!(g.section_angle, 360.0);

        assert!(glyph_spec(&r, set(&[Denv2]), &sizes).is_err());
    }

    #[test]
    fn glyph_radius_strictly_increases() {
        let sizes = GlyphSizes::default();
        let radii: Vec<f64> = (1..=4).map(|k| sizes.radius(k)).collect();
        assert_eq!(radii, [6.0, 8.0, 10.0, 12.0]);
        assert!(radii.windows(2).all(|w| w[0] < w[1]));
        assert!(GlyphSizes::new([6.0, 6.0, 8.0, 9.0]).is_err());
        assert!(GlyphSizes::new([0.0, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn trajectory_serotype_parsing() {
        assert_eq!(
            "all".parse::<TrajectorySerotype>().unwrap(),
            TrajectorySerotype::All
        );
        assert_eq!(
            "d2".parse::<TrajectorySerotype>().unwrap(),
            TrajectorySerotype::Single(Denv2)
        );
        assert_eq!(
            serde_json::to_string(&TrajectorySerotype::Single(Denv4)).unwrap(),
            "\"DENV4\""
        );
    }
}
