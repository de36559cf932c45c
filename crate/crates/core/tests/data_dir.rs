use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use geoden_core::analytics::{cooccurrence, filter, timeline};
use geoden_core::gazetteer::Gazetteer;
use geoden_core::ingest::parse_reports;
use geoden_core::model::enumerate_combinations;
use geoden_core::{
    load_data_dir, DatasetSpan, SelectionContext, Serotype, SerotypeSet, SnapshotError, Source,
};
use geoden_testkit::fixture;

fn set(serotypes: &[Serotype]) -> SerotypeSet {
    serotypes.iter().copied().collect()
}

#[test]
fn fixture_loads_clean() {
    let dir = tempfile::tempdir().unwrap();
    fixture::write_data_dir(dir.path()).unwrap();
    let loaded = load_data_dir(dir.path()).unwrap();
    assert!(loaded.diagnostics.is_clean());
    assert_eq!(loaded.diagnostics.accepted, fixture::REPORT_COUNT);
    let meta = loaded.snapshot.meta();
    assert_eq!(meta.report_count, 12);
    assert_eq!(meta.source_counts[&Source::Core], fixture::CORE_COUNT);
    assert_eq!(
        meta.source_counts[&Source::Supplement],
        fixture::SUPPLEMENT_COUNT
    );
    assert_eq!((meta.year_min, meta.year_max), (1943, 2010));
    assert!(meta.has_suitability);
    // Viet Nam is an alias; the canonical name is Vietnam
    assert_eq!(loaded.diagnostics.warnings.len(), 1);
}

#[test]
fn fixture_cooccurrence_matches_hand_count() {
    use Serotype::*;
    let dir = tempfile::tempdir().unwrap();
    fixture::write_data_dir(dir.path()).unwrap();
    let snap = load_data_dir(dir.path()).unwrap().snapshot;
    let ctx = SelectionContext::new(
        snap.gazetteer().default_regions().into_vec(),
        snap.span().full_window(),
        SerotypeSet::FULL,
    );
    let slice = filter(&snap, &ctx);
    assert_eq!(slice.len(), 12);
    let result = cooccurrence(&slice, &enumerate_combinations()).unwrap();
    let exact = |s: &[Serotype]| {
        result
            .counts
            .iter()
            .find(|c| c.combination == set(s))
            .unwrap()
            .exact_count
    };
    assert_eq!(exact(&[Denv1]), 3);
    assert_eq!(exact(&[Denv2]), 1);
    assert_eq!(exact(&[Denv3]), 1);
    assert_eq!(exact(&[Denv4]), 1);
    assert_eq!(exact(&[Denv1, Denv2]), 2);
    assert_eq!(exact(&[Denv1, Denv3]), 1);
    assert_eq!(exact(&[Denv2, Denv3]), 1);
    assert_eq!(exact(&[Denv2, Denv4]), 1);
    assert_eq!(exact(&[Denv1, Denv2, Denv3, Denv4]), 1);
    assert_eq!(exact(&[Denv3, Denv4]), 0);
    let superset_d1 = result
        .counts
        .iter()
        .find(|c| c.combination == set(&[Denv1]))
        .unwrap();
    assert_eq!(superset_d1.superset_count, 7);
}

#[test]
fn fixture_africa_denv4_years() {
    let dir = tempfile::tempdir().unwrap();
    fixture::write_data_dir(dir.path()).unwrap();
    let snap = load_data_dir(dir.path()).unwrap().snapshot;
    let africa = snap
        .gazetteer()
        .default_regions()
        .get("Africa")
        .unwrap()
        .clone();
    let d4 = set(&[Serotype::Denv4]);
    let ctx = SelectionContext::new([africa.clone()], snap.span().full_window(), d4);
    let years: BTreeSet<i32> = filter(&snap, &ctx).reports().map(|r| r.year).collect();
    assert_eq!(years, BTreeSet::from([1983, 1995]));
    let tl = timeline(&snap, &[africa], d4, snap.span().full_window());
    let nonzero: Vec<i32> = tl
        .years
        .iter()
        .zip(&tl.rows[0].counts)
        .filter(|(_, c)| **c > 0)
        .map(|(y, _)| *y)
        .collect();
    assert_eq!(nonzero, [1983, 1995]);
}

#[test]
fn bad_rows_are_rejected_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    fixture::write_data_dir(dir.path()).unwrap();
    let mut core = fixture::CORE_CSV.to_string();
    core.push_str("10,10,Atlantis,1990,1,0,0,0\n10,10,Peru,2525,1,0,0,0\n");
    std::fs::write(dir.path().join("core.csv"), core).unwrap();
    let loaded = load_data_dir(dir.path()).unwrap();
    assert_eq!(loaded.diagnostics.accepted, 12);
    let rows: Vec<u64> = loaded.diagnostics.rejected.iter().map(|r| r.row).collect();
    assert_eq!(rows, [12, 13]);
    assert_eq!(loaded.snapshot.meta().report_count, 12);
}

#[test]
fn broken_grid_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    fixture::write_data_dir(dir.path()).unwrap();
    std::fs::write(dir.path().join("suitability.asc"), "ncols 1\nnrows 1\n").unwrap();
    assert!(matches!(
        load_data_dir(dir.path()),
        Err(SnapshotError::Grid { .. })
    ));
}

#[test]
fn dataset_sized_ingest_is_fast() {
    let countries = [
        "Brazil", "Thailand", "Nigeria", "India", "Peru", "Japan", "Viet Nam",
    ];
    let mut csv = String::from("latitude,longitude,country,year,denv1,denv2,denv3,denv4\n");
    for i in 0..3549u32 {
        let mask = i % 15 + 1;
        writeln!(
            csv,
            "{:.4},{:.4},{},{},{},{},{},{}",
            (i % 120) as f64 - 60.0 + 0.1234,
            (i % 360) as f64 - 180.0 + 0.5678,
            countries[i as usize % countries.len()],
            1943 + i % 78,
            mask & 1,
            (mask >> 1) & 1,
            (mask >> 2) & 1,
            (mask >> 3) & 1
        )
        .unwrap();
    }
    let t = Instant::now();
    let parsed = parse_reports(
        csv.as_bytes(),
        Source::Core,
        Gazetteer::bundled(),
        DatasetSpan::default(),
        0,
    )
    .unwrap();
    let elapsed = t.elapsed();
    assert_eq!(parsed.reports.len(), 3549);
    assert!(parsed.diagnostics.is_clean());
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
}
