//! Engine-versus-reference comparisons. Each returns a list of human-readable
//! mismatches; empty means agreement. Floating-point values are compared
//! with `==`.

use geoden_core::analytics::{
    centroid, cooccurrence, filter, filter_region, serotype_centroids, timeline, trajectory,
    TrajectorySerotype,
};
use geoden_core::model::enumerate_combinations;
use geoden_core::{SelectionContext, Serotype, Snapshot, YearWindow};

use crate::naive;

/// Every analytics operation for `ctx`, against the naive reference.
pub fn engine_vs_naive(snapshot: &Snapshot, ctx: &SelectionContext) -> Vec<String> {
    let reports = snapshot.reports();
    let mut bad = Vec::new();

    let slice = filter(snapshot, ctx);
    let expected = naive::filter(reports, ctx);
    if slice.ids() != expected.as_slice() {
        bad.push(format!(
            "filter: {} ids vs {} expected",
            slice.len(),
            expected.len()
        ));
    }
    if centroid(&slice) != naive::centroid(reports, ctx) {
        bad.push("centroid".to_string());
    }
    if serotype_centroids(&slice) != naive::serotype_centroids(reports, ctx) {
        bad.push("serotype_centroids".to_string());
    }

    let combos = enumerate_combinations();
    let got = cooccurrence(&slice, &combos).expect("non-empty combinations");
    let want = naive::cooccurrence(reports, ctx, &combos);
    for (c, (e, s)) in got.counts.iter().zip(want) {
        if (c.exact_count, c.superset_count) != (e, s) {
            bad.push(format!(
                "cooccurrence {}: ({}, {}) vs ({e}, {s})",
                c.combination.label(),
                c.exact_count,
                c.superset_count
            ));
        }
    }

    for region in ctx.regions() {
        let mut selectors = vec![TrajectorySerotype::All];
        selectors.extend(ctx.serotypes.iter().map(TrajectorySerotype::Single));
        for sel in selectors {
            let t = trajectory(snapshot, region, ctx.window, ctx.serotypes, sel);
            let got: Vec<_> = t
                .vertices
                .iter()
                .map(|v| (v.year, v.point, v.report_count))
                .collect();
            let want =
                naive::trajectory(reports, region, ctx.window, sel.filter_set(ctx.serotypes));
            if got != want {
                bad.push(format!("trajectory {} {sel}", region.name));
            }
        }
    }

    let matrix = timeline(snapshot, ctx.regions(), ctx.serotypes, ctx.window);
    let years: Vec<i32> = ctx.window.years().collect();
    if matrix.years != years {
        bad.push("timeline years".to_string());
    }
    if matrix.rows.len() != ctx.regions().len() * ctx.serotypes.len() {
        bad.push(format!("timeline has {} rows", matrix.rows.len()));
    }
    for region in ctx.regions() {
        for s in ctx.serotypes.iter() {
            for &y in &years {
                let want = naive::timeline_cell(reports, region, ctx.serotypes, s, y);
                if matrix.cell(&region.name, s, y) != Some(want) {
                    bad.push(format!("timeline cell {} {s} {y}", region.name));
                }
            }
        }
        let totals = matrix
            .totals
            .iter()
            .find(|t| t.region == region.name)
            .map(|t| t.counts.clone());
        let want: Vec<u32> = years
            .iter()
            .map(|&y| naive::timeline_total(reports, region, ctx.serotypes, y))
            .collect();
        if totals.as_ref() != Some(&want) {
            bad.push(format!("timeline totals {}", region.name));
        }
    }
    bad
}

/// Sum of exact counts over all 15 combinations against the slice size.
pub fn partition(snapshot: &Snapshot, ctx: &SelectionContext) -> Result<(), String> {
    let slice = filter(snapshot, ctx);
    let result = cooccurrence(&slice, &enumerate_combinations()).expect("non-empty combinations");
    let sum: u32 = result.counts.iter().map(|c| c.exact_count).sum();
    if sum as usize == slice.len() && result.slice_size == slice.len() {
        Ok(())
    } else {
        Err(format!("sum {sum} vs slice {}", slice.len()))
    }
}

/// Checks every vertex of every trajectory of `ctx` against the centroid of
/// the context restricted to that region and year. Returns the number of
/// vertices checked.
pub fn trajectory_consistency(
    snapshot: &Snapshot,
    ctx: &SelectionContext,
) -> Result<usize, String> {
    let mut checked = 0;
    for region in ctx.regions() {
        let mut selectors = vec![TrajectorySerotype::All];
        selectors.extend(Serotype::ALL.into_iter().map(TrajectorySerotype::Single));
        for sel in selectors {
            let wanted = sel.filter_set(ctx.serotypes);
            let t = trajectory(snapshot, region, ctx.window, ctx.serotypes, sel);
            for v in &t.vertices {
                let year = YearWindow::single_year(v.year);
                let slice = filter_region(snapshot, region, year, wanted);
                let independent = naive::mean(
                    snapshot.reports(),
                    &naive::filter(
                        snapshot.reports(),
                        &SelectionContext::new([region.clone().with_visible(true)], year, wanted),
                    ),
                );
                if centroid(&slice) != Some(v.point) || independent != Some(v.point) {
                    return Err(format!("{} {sel} {}", region.name, v.year));
                }
                checked += 1;
            }
            if t.vertices.windows(2).any(|w| w[0].year >= w[1].year) {
                return Err(format!("{} {sel}: years not increasing", region.name));
            }
        }
    }
    Ok(checked)
}
