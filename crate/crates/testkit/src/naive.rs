//! Reference implementations that scan every report for every question.
//! They share no code with the indexed engine beyond the data types.

use std::collections::BTreeMap;

use geoden_core::{GeoPoint, Region, Report, SelectionContext, Serotype, SerotypeSet, YearWindow};

fn passes(r: &Report, regions: &[Region], window: YearWindow, serotypes: SerotypeSet) -> bool {
    let in_region = regions
        .iter()
        .any(|g| g.visible && g.countries.contains(&r.country));
    let in_window = r.year >= window.start && r.year <= window.end;
    let mut shared = false;
    for s in Serotype::ALL {
        if r.serotypes.contains(s) && serotypes.contains(s) {
            shared = true;
        }
    }
    in_region && in_window && shared
}

/// Ids passing the context, ascending.
pub fn filter(reports: &[Report], ctx: &SelectionContext) -> Vec<u32> {
    reports
        .iter()
        .filter(|r| passes(r, ctx.regions(), ctx.window, ctx.serotypes))
        .map(|r| r.id)
        .collect()
}

/// Mean position, summed in the order given.
pub fn mean(reports: &[Report], ids: &[u32]) -> Option<GeoPoint> {
    if ids.is_empty() {
        return None;
    }
    let mut lat = 0.0;
    let mut lng = 0.0;
    for id in ids {
        let r = &reports[*id as usize];
        assert_eq!(r.id, *id);
        lat += r.latitude;
        lng += r.longitude;
    }
    Some(GeoPoint {
        latitude: lat / ids.len() as f64,
        longitude: lng / ids.len() as f64,
    })
}

pub fn centroid(reports: &[Report], ctx: &SelectionContext) -> Option<GeoPoint> {
    mean(reports, &filter(reports, ctx))
}

pub fn serotype_centroids(
    reports: &[Report],
    ctx: &SelectionContext,
) -> BTreeMap<Serotype, GeoPoint> {
    let ids = filter(reports, ctx);
    let mut out = BTreeMap::new();
    for s in Serotype::ALL {
        if !ctx.serotypes.contains(s) {
            continue;
        }
        let with_s: Vec<u32> = ids
            .iter()
            .copied()
            .filter(|id| reports[*id as usize].serotypes.contains(s))
            .collect();
        if let Some(p) = mean(reports, &with_s) {
            out.insert(s, p);
        }
    }
    out
}

/// (year, centroid, count) for each year of the window with any report of
/// `region` sharing a serotype with `wanted`.
pub fn trajectory(
    reports: &[Report],
    region: &Region,
    window: YearWindow,
    wanted: SerotypeSet,
) -> Vec<(i32, GeoPoint, usize)> {
    let region = region.clone().with_visible(true);
    let mut out = Vec::new();
    for year in window.start..=window.end {
        let ctx = SelectionContext::new([region.clone()], YearWindow::single_year(year), wanted);
        let ids = filter(reports, &ctx);
        if let Some(p) = mean(reports, &ids) {
            out.push((year, p, ids.len()));
        }
    }
    out
}

/// (exact, superset) counts per combination over the context's slice.
pub fn cooccurrence(
    reports: &[Report],
    ctx: &SelectionContext,
    combos: &[SerotypeSet],
) -> Vec<(u32, u32)> {
    let ids = filter(reports, ctx);
    combos
        .iter()
        .map(|c| {
            let mut exact = 0;
            let mut superset = 0;
            for id in &ids {
                let set = reports[*id as usize].serotypes;
                if set == *c {
                    exact += 1;
                }
                if c.iter().all(|s| set.contains(s)) {
                    superset += 1;
                }
            }
            (exact, superset)
        })
        .collect()
}

/// Count of reports of `region` in `year` containing `serotype`, provided
/// `serotype` is active.
pub fn timeline_cell(
    reports: &[Report],
    region: &Region,
    serotypes: SerotypeSet,
    serotype: Serotype,
    year: i32,
) -> u32 {
    if !serotypes.contains(serotype) {
        return 0;
    }
    reports
        .iter()
        .filter(|r| {
            region.countries.contains(&r.country)
                && r.year == year
                && r.serotypes.contains(serotype)
        })
        .count() as u32
}

/// Distinct reports of `region` in `year` sharing a serotype with the filter.
pub fn timeline_total(
    reports: &[Report],
    region: &Region,
    serotypes: SerotypeSet,
    year: i32,
) -> u32 {
    let region = region.clone().with_visible(true);
    let window = YearWindow::single_year(year);
    reports
        .iter()
        .filter(|r| passes(r, std::slice::from_ref(&region), window, serotypes))
        .count() as u32
}
