//! Acceptance gate: one PASS/FAIL line per criterion, exit code 1 if any
//! criterion fails.
//!
//! Criteria about the published dataset read it from `GEODEN_DATA_DIR`, or
//! `data/` at the workspace root, in the data directory layout
//! (`core.csv`, `supplement.csv`, ...). Without it they fail and say so.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use geoden_core::analytics::{filter, timeline, GlyphSizes};
use geoden_core::grid::{classify_suitability, classify_window, load_suitability_grid};
use geoden_core::model::resolve_window;
use geoden_core::query::{execute, resolve_query, QueryKind, QueryRequest};
use geoden_core::{
    load_data_dir, LoadedSnapshot, RegionSet, SelectionContext, Serotype, SerotypeSet, Source,
};
use geoden_testkit::{compare, gen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

struct Gate {
    failed: usize,
}

impl Gate {
    fn check(&mut self, name: &str, run: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let outcome = run();
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms} ms]"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  {name}: {detail} [{ms} ms]");
            }
        }
    }
}

fn dataset_dir() -> PathBuf {
    std::env::var_os("GEODEN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
            manifest
                .ancestors()
                .nth(2)
                .expect("crate sits two levels below the workspace")
                .join("data")
        })
}

fn load_dataset() -> Result<(LoadedSnapshot, f64), String> {
    let dir = dataset_dir();
    if !dir.join("core.csv").is_file() {
        return Err(format!(
            "dataset not present: {} has no core.csv (set GEODEN_DATA_DIR)",
            dir.display()
        ));
    }
    let t = Instant::now();
    let loaded = load_data_dir(&dir).map_err(|e| e.to_string())?;
    Ok((loaded, t.elapsed().as_secs_f64()))
}

fn only(s: Serotype) -> SerotypeSet {
    SerotypeSet::EMPTY.with(s)
}

fn dataset_ingest() -> Outcome {
    let (loaded, secs) = load_dataset()?;
    let counts = &loaded.snapshot.meta().source_counts;
    let core = counts.get(&Source::Core).copied().unwrap_or(0);
    let supplement = counts.get(&Source::Supplement).copied().unwrap_or(0);
    let rejected = loaded.diagnostics.rejected.len();
    let detail = format!("core {core} + supplement {supplement}, rejected {rejected}, {secs:.3} s");
    if (core, supplement, rejected) == (3260, 289, 0) && secs < 2.0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; want 3260 + 289, 0 rejected, < 2 s"))
    }
}

fn dataset_span() -> Outcome {
    let (loaded, _) = load_dataset()?;
    let snap = &loaded.snapshot;
    let meta = snap.meta();
    let earliest = snap
        .reports()
        .iter()
        .filter(|r| r.serotypes.contains(Serotype::Denv1))
        .min_by_key(|r| (r.year, r.id))
        .map(|r| (r.country.to_string(), r.year));
    let detail = format!(
        "year_min {}, year_max {}, earliest DENV1 {:?}",
        meta.year_min, meta.year_max, earliest
    );
    if meta.year_min == 1943 && meta.year_max == 2020 && earliest == Some(("JPN".to_string(), 1943))
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn decade_counts() -> Outcome {
    let (loaded, _) = load_dataset()?;
    let snap = &loaded.snapshot;
    let regions = snap.gazetteer().default_regions();
    let asia = regions.get("Asia").ok_or("no Asia region")?.clone();
    let mut tried = Vec::new();
    for (scope, scope_regions) in [("Asia", vec![asia]), ("global", regions.clone().into_vec())] {
        for (convention, extra) in [("[Y,Y+9]", 9), ("[Y,Y+10]", 10)] {
            let count = |start: i32| -> Result<usize, String> {
                let w = resolve_window(snap.span(), start + extra, extra as i64 + 1)
                    .map_err(|e| e.to_string())?;
                let ctx = SelectionContext::new(scope_regions.clone(), w, SerotypeSet::FULL);
                let tl = timeline(snap, ctx.regions(), ctx.serotypes, w);
                let via_timeline: u32 = tl.totals.iter().flat_map(|t| t.counts.iter()).sum();
                let via_filter = filter(snap, &ctx).len();
                if via_timeline as usize != via_filter {
                    return Err(format!(
                        "{scope} {convention}: timeline {via_timeline} vs filter {via_filter}"
                    ));
                }
                Ok(via_filter)
            };
            let (seventies, eighties) = (count(1970)?, count(1980)?);
            if (seventies, eighties) == (242, 541) {
                return Ok(format!(
                    "matched with scope {scope}, decades {convention}: 242 / 541"
                ));
            }
            tried.push(format!("{scope} {convention}: {seventies} / {eighties}"));
        }
    }
    Err(format!(
        "no convention gives 242 / 541; got {}",
        tried.join(", ")
    ))
}

fn africa_denv4() -> Outcome {
    let (loaded, _) = load_dataset()?;
    let snap = &loaded.snapshot;
    let africa = snap
        .gazetteer()
        .default_regions()
        .get("Africa")
        .ok_or("no Africa region")?
        .clone();
    let ctx = SelectionContext::new([africa], snap.span().full_window(), only(Serotype::Denv4));
    let years: BTreeSet<i32> = filter(snap, &ctx).reports().map(|r| r.year).collect();
    if years == BTreeSet::from([1983, 1995]) {
        Ok(format!("years {years:?}"))
    } else {
        Err(format!("years {years:?}, want {{1983, 1995}}"))
    }
}

/// 50 random snapshots of up to 2,000 reports, several contexts each.
fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x6e0de4);
    let mut contexts = 0;
    let mut reports = 0;
    for i in 0..50 {
        let n = rng.random_range(1..=2000);
        let countries = rng.random_range(3..=40);
        let snap = gen::random_snapshot(&mut rng, n, countries);
        reports += n;
        for _ in 0..4 {
            let ctx = gen::random_context(&mut rng, &snap);
            let bad = compare::engine_vs_naive(&snap, &ctx);
            if !bad.is_empty() {
                return Err(format!("snapshot {i} ({n} reports): {}", bad.join("; ")));
            }
            contexts += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let detail = format!("50 snapshots, {reports} reports, {contexts} contexts, {secs:.2} s");
    if secs < 30.0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; over the 30 s budget"))
    }
}

fn partition() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x9a27);
    let mut violations = Vec::new();
    let mut checked = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=2000);
        let snap = gen::random_snapshot(&mut rng, n, 25);
        for _ in 0..50 {
            let ctx = gen::random_context(&mut rng, &snap);
            if let Err(e) = compare::partition(&snap, &ctx) {
                violations.push(e);
            }
            checked += 1;
        }
    }
    if violations.is_empty() {
        Ok(format!("{checked} contexts, 0 violations"))
    } else {
        Err(format!(
            "{} violations: {}",
            violations.len(),
            violations[0]
        ))
    }
}

fn trajectory_consistency() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7a1);
    let mut vertices = 0;
    let mut trajectories_seen = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=2000);
        let snap = gen::random_snapshot(&mut rng, n, 15);
        for _ in 0..10 {
            let ctx = gen::random_context(&mut rng, &snap);
            vertices += compare::trajectory_consistency(&snap, &ctx)?;
            trajectories_seen += ctx.regions().len() * 5;
        }
    }
    Ok(format!(
        "{trajectories_seen} trajectories, {vertices} vertices, all identical"
    ))
}

/// Class by arithmetic rather than comparisons: 0 stays 0, anything else
/// is the quarter it falls in, counting the upper bound in.
fn class_oracle(v: f64) -> u8 {
    if v == 0.0 {
        0
    } else {
        (v / 25.0).ceil() as u8
    }
}

fn suitability_classifier() -> Outcome {
    let table = [
        (0.0, 0),
        (0.0001, 1),
        (25.0, 1),
        (25.0001, 2),
        (50.0, 2),
        (75.0, 3),
        (100.0, 4),
    ];
    for (v, want) in table {
        let got = classify_suitability(Some(v))
            .map_err(|e| e.to_string())?
            .map(|c| c.index());
        if got != Some(want) {
            return Err(format!("{v} -> {got:?}, want {want}"));
        }
    }

    let mut rng = StdRng::seed_from_u64(0xa5c);
    let (nrows, ncols) = (180, 360);
    let specials = [0.0, 25.0, 50.0, 75.0, 100.0, 0.0001, 25.0001];
    let mut text = format!(
        "ncols {ncols}\nnrows {nrows}\nxllcorner -180\nyllcorner -90\ncellsize 1\nNODATA_value -9999\n"
    );
    let mut values = Vec::with_capacity(nrows * ncols);
    for _ in 0..nrows {
        let row: Vec<String> = (0..ncols)
            .map(|_| {
                let v: Option<f64> = match rng.random_range(0..10) {
                    0 => None,
                    1 | 2 => Some(specials[rng.random_range(0..specials.len())]),
                    _ => Some((rng.random_range(0.0..100.0f64) * 1e4).round() / 1e4),
                };
                values.push(v);
                v.map_or("-9999".to_string(), |v| v.to_string())
            })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let grid = load_suitability_grid(text.as_bytes())
        .map_err(|e| e.to_string())?
        .grid;
    let window = classify_window(&grid, grid.extent(), None).map_err(|e| e.to_string())?;
    if (window.nrows, window.ncols) != (nrows, ncols) {
        return Err(format!("window is {}x{}", window.nrows, window.ncols));
    }
    let mut mismatches = 0;
    for (i, v) in values.iter().enumerate() {
        let want = v.map(|v| class_oracle(v as f32 as f64));
        let got = window.classes[i / ncols][i % ncols].map(|c| c.index());
        if got != want {
            mismatches += 1;
        }
    }
    if mismatches == 0 {
        Ok(format!(
            "boundary table exact; {} cells match the per-cell oracle",
            values.len()
        ))
    } else {
        Err(format!(
            "{mismatches} of {} cells differ from the per-cell oracle",
            values.len()
        ))
    }
}

fn api_golden() -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (app, _, snap) = common::fixture_app(dir.path());
        let bodies = [
            "{}",
            r#"{"regions": ["Asia", "Africa"], "serotypes": ["DENV2", "DENV4"], "window": {"current_year": 1990, "interval_length": 40}}"#,
            r#"{"regions": [{"name": "Americas", "countries": ["BRA", "PER", "USA"]}], "trajectory_serotype": "per_serotype", "centroid_mode": "per_serotype"}"#,
        ];
        let mut checked = 0;
        for body in bodies {
            let request = QueryRequest::from_json(body.as_bytes()).map_err(|e| e.to_string())?;
            let resolved = resolve_query(&request, &snap, &RegionSet::default()).map_err(|e| e.to_string())?;
            for kind in QueryKind::ALL {
                let uri = format!("/api/query/{}", kind.name());
                let a = common::post(&app, &uri, body).await;
                let b = common::post(&app, &uri, body).await;
                if a.status != 200 || a.body != b.body {
                    return Err(format!("{uri} not stable for {body}"));
                }
                let direct = serde_json::to_value(execute(kind, &snap, &resolved, &GlyphSizes::default()))
                    .map_err(|e| e.to_string())?;
                if a.json() != direct {
                    return Err(format!("{uri} differs from the library for {body}"));
                }
                checked += 1;
            }
        }
        let meta = common::get(&app, "/api/meta").await;
        if meta.json() != serde_json::to_value(snap.meta()).map_err(|e| e.to_string())? {
            return Err("/api/meta differs from the snapshot".into());
        }
        Ok(format!("{checked} query responses byte-stable and equal to library results, meta equal"))
    })
}

fn main() {
    let mut gate = Gate { failed: 0 };
    gate.check("dataset ingest", dataset_ingest);
    gate.check("dataset span", dataset_span);
    gate.check("decade counts", decade_counts);
    gate.check("africa denv4", africa_denv4);
    gate.check("oracle equivalence", oracle_equivalence);
    gate.check("partition", partition);
    gate.check("trajectory consistency", trajectory_consistency);
    gate.check("suitability classifier", suitability_classifier);
    gate.check("api golden", api_golden);
    println!("{} of 9 criteria failed", gate.failed);
    if gate.failed > 0 {
        std::process::exit(1);
    }
}
