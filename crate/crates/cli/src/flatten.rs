//! CSV renderings of query payloads. Timeline and trajectory output has one
//! row per (entity, year).

use geoden_core::query::Payload;
use geoden_core::SerotypeSet;

fn joined(set: SerotypeSet) -> String {
    set.iter().map(|s| s.label()).collect::<Vec<_>>().join("|")
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(payload: &Payload) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match payload {
        Payload::Reports(p) => {
            w.write_record([
                "id",
                "latitude",
                "longitude",
                "country",
                "country_name",
                "year",
                "serotypes",
                "source",
                "glyph_sections",
                "glyph_radius",
            ])?;
            for r in &p.reports {
                let sections: Vec<&str> = r.glyph.sections.iter().map(|s| s.label()).collect();
                w.write_record([
                    r.id.to_string(),
                    r.latitude.to_string(),
                    r.longitude.to_string(),
                    r.country.to_string(),
                    r.country_name.clone(),
                    r.year.to_string(),
                    joined(r.serotypes),
                    r.source.to_string(),
                    sections.join("|"),
                    r.glyph.radius.to_string(),
                ])?;
            }
        }
        Payload::Centroids(p) => {
            w.write_record([
                "region",
                "serotype",
                "report_count",
                "latitude",
                "longitude",
            ])?;
            for c in &p.regions {
                w.write_record([
                    c.region.clone(),
                    "all".to_string(),
                    c.report_count.to_string(),
                    opt(c.centroid.map(|p| p.latitude)),
                    opt(c.centroid.map(|p| p.longitude)),
                ])?;
                for (s, point) in c.serotypes.iter().flatten() {
                    w.write_record([
                        c.region.clone(),
                        s.label().to_string(),
                        String::new(),
                        point.latitude.to_string(),
                        point.longitude.to_string(),
                    ])?;
                }
            }
        }
        Payload::Trajectories(p) => {
            w.write_record([
                "region",
                "serotype",
                "year",
                "latitude",
                "longitude",
                "report_count",
            ])?;
            for t in &p.trajectories {
                for v in &t.vertices {
                    w.write_record([
                        t.region.clone(),
                        t.serotype.to_string(),
                        v.year.to_string(),
                        v.point.latitude.to_string(),
                        v.point.longitude.to_string(),
                        v.report_count.to_string(),
                    ])?;
                }
            }
        }
        Payload::Cooccurrence(p) => {
            w.write_record([
                "combination",
                "exact_count",
                "superset_count",
                "exact_proportion",
                "superset_proportion",
            ])?;
            for c in &p.counts {
                w.write_record([
                    joined(c.combination),
                    c.exact_count.to_string(),
                    c.superset_count.to_string(),
                    opt(c.exact_proportion),
                    opt(c.superset_proportion),
                ])?;
            }
        }
        Payload::Timeline(p) => {
            // `total` rows count distinct reports; serotype rows count memberships
            w.write_record(["region", "serotype", "year", "count"])?;
            let m = &p.matrix;
            for t in &m.totals {
                let rows = m.rows.iter().filter(|r| r.region == t.region);
                for row in rows {
                    for (year, count) in m.years.iter().zip(&row.counts) {
                        w.write_record([
                            row.region.clone(),
                            row.serotype.label().to_string(),
                            year.to_string(),
                            count.to_string(),
                        ])?;
                    }
                }
                for (year, count) in m.years.iter().zip(&t.counts) {
                    w.write_record([
                        t.region.clone(),
                        "total".to_string(),
                        year.to_string(),
                        count.to_string(),
                    ])?;
                }
            }
        }
    }
    w.into_inner().map_err(|e| e.into_error().into())
}
