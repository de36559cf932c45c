use std::sync::Arc;

use geoden_core::model::resolve_window;
use geoden_core::{
    build_snapshot, CountryCode, DatasetSpan, Gazetteer, Region, Report, SelectionContext,
    SerotypeSet, Shade, Snapshot, Source,
};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Snapshot of `n` random reports spread over `countries` random gazetteer
/// countries and the default span.
pub fn random_snapshot<R: Rng>(rng: &mut R, n: usize, countries: usize) -> Snapshot {
    let gazetteer = Gazetteer::bundled();
    let all: Vec<CountryCode> = gazetteer.countries().map(|c| c.code).collect();
    let pool: Vec<CountryCode> = all
        .choose_multiple(rng, countries.max(1))
        .copied()
        .collect();
    let span = DatasetSpan::default();
    let reports = (0..n)
        .map(|id| Report {
            id: id as u32,
            latitude: rng.random_range(-60.0..70.0),
            longitude: rng.random_range(-180.0..180.0),
            country: *pool.choose(rng).expect("non-empty pool"),
            year: rng.random_range(span.year_min..=span.year_max),
            serotypes: SerotypeSet::from_mask(rng.random_range(1..16)).expect("mask in range"),
            source: if rng.random_bool(0.9) {
                Source::Core
            } else {
                Source::Supplement
            },
        })
        .collect();
    build_snapshot(reports, Arc::new(gazetteer.clone()), None, span)
        .expect("generated reports are valid")
}

/// Random visible and hidden regions over the snapshot's countries plus
/// the occasional country without reports, a random window and a random
/// (possibly empty) serotype filter.
pub fn random_context<R: Rng>(rng: &mut R, snapshot: &Snapshot) -> SelectionContext {
    let mut pool: Vec<CountryCode> = snapshot.countries().collect();
    pool.push("ISL".parse().expect("valid code"));
    let n_regions = rng.random_range(1..=4);
    let regions: Vec<Region> = (0..n_regions)
        .map(|i| {
            let k = rng.random_range(1..=pool.len().min(8));
            let countries = pool.choose_multiple(rng, k).copied();
            Region::new(format!("R{i}"), countries)
                .expect("non-empty region")
                .with_shade(Shade::cycled(i))
                .with_visible(rng.random_bool(0.85))
        })
        .collect();
    let span = snapshot.span();
    let window = resolve_window(
        span,
        rng.random_range(span.year_min..=span.year_max),
        rng.random_range(1..=span.max_interval() as i64 + 5),
    )
    .expect("year drawn from span");
    let serotypes = SerotypeSet::from_mask(rng.random_range(0..16)).expect("mask in range");
    SelectionContext::new(regions, window, serotypes)
}
