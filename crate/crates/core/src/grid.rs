//! Environmental suitability raster: ESRI ASCII grid parsing, point lookup
//! and the five-class classifier.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{AnalyticsError, GridError, WindowError};
use crate::model::GeoPoint;

/// Largest classified window the service will produce.
pub const MAX_WINDOW_CELLS: usize = 4_000_000;

/// Regular lat/lng raster of suitability percentages, stored north to south.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitabilityGrid {
    ncols: usize,
    nrows: usize,
    xll: f64,
    yll: f64,
    cellsize: f64,
    nodata: f64,
    // NaN marks nodata
    values: Vec<f32>,
}

#[derive(Debug, Clone)]
pub struct GridLoad {
    pub grid: SuitabilityGrid,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default)]
struct Header {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<(f64, bool)>,
    yll: Option<(f64, bool)>,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

fn header_value<T: std::str::FromStr>(key: &str, raw: Option<&str>) -> Result<T, GridError> {
    raw.and_then(|v| v.parse().ok())
        .ok_or_else(|| GridError::Header(format!("{key} has no valid value")))
}

/// Parses an ESRI ASCII grid. Values in [0, 1] throughout are taken as
/// fractions and scaled to percent with a warning.
pub fn load_suitability_grid<R: BufRead>(input: R) -> Result<GridLoad, GridError> {
    let mut header = Header::default();
    let mut raw: Vec<f32> = Vec::new();
    let mut expected = None;
    let mut nodata = -9999.0;
    // (value, row, col) of the largest data value
    let mut max: Option<(f64, usize, usize)> = None;
    let mut in_body = false;

    for line in input.lines() {
        let line = line?;
        let mut tokens = line.split_whitespace().peekable();
        let Some(first) = tokens.peek().copied() else {
            continue;
        };
        if !in_body && first.parse::<f64>().is_err() {
            let key = first.to_ascii_lowercase();
            tokens.next();
            let value = tokens.next();
            match key.as_str() {
                "ncols" => header.ncols = Some(header_value(&key, value)?),
                "nrows" => header.nrows = Some(header_value(&key, value)?),
                "xllcorner" => header.xll = Some((header_value(&key, value)?, false)),
                "xllcenter" => header.xll = Some((header_value(&key, value)?, true)),
                "yllcorner" => header.yll = Some((header_value(&key, value)?, false)),
                "yllcenter" => header.yll = Some((header_value(&key, value)?, true)),
                "cellsize" => header.cellsize = Some(header_value(&key, value)?),
                "nodata_value" => header.nodata = Some(header_value(&key, value)?),
                _ => return Err(GridError::Header(format!("unknown header key {first:?}"))),
            }
            continue;
        }
        if !in_body {
            in_body = true;
            let (ncols, nrows) = match (header.ncols, header.nrows) {
                (Some(c), Some(r)) if c > 0 && r > 0 => (c, r),
                _ => {
                    return Err(GridError::Header(
                        "ncols and nrows must be present and positive".into(),
                    ))
                }
            };
            if header.xll.is_none() || header.yll.is_none() {
                return Err(GridError::Header("missing xll/yll corner".into()));
            }
            match header.cellsize {
                Some(c) if c > 0.0 && c.is_finite() => {}
                _ => return Err(GridError::Header("cellsize must be positive".into())),
            }
            nodata = header.nodata.unwrap_or(nodata);
            expected = Some(ncols * nrows);
            raw.reserve(ncols * nrows);
        }
        let ncols = header.ncols.unwrap_or(1);
        for token in tokens {
            let idx = raw.len();
            let (row, col) = (idx / ncols, idx % ncols);
            let v: f64 = token.parse().map_err(|_| GridError::Value {
                row,
                col,
                token: token.to_string(),
            })?;
            if v == nodata {
                raw.push(f32::NAN);
                continue;
            }
            if !v.is_finite() || v < 0.0 {
                return Err(GridError::OutOfRange { row, col, value: v });
            }
            if max.is_none_or(|(m, _, _)| v > m) {
                max = Some((v, row, col));
            }
            raw.push(v as f32);
        }
    }

    let Some(expected) = expected else {
        return Err(GridError::Header("grid has no data rows".into()));
    };
    if raw.len() != expected {
        return Err(GridError::Shape {
            expected,
            found: raw.len(),
        });
    }

    let mut warnings = Vec::new();
    if let Some((value, row, col)) = max {
        if value <= 1.0 {
            warnings.push(format!(
                "all values lie in [0, 1] (max {value}); scaling fractions to percent"
            ));
            for v in raw.iter_mut().filter(|v| !v.is_nan()) {
                *v *= 100.0;
            }
        } else if value < 2.0 {
            return Err(GridError::AmbiguousScale { row, col, value });
        } else if value > 100.0 {
            return Err(GridError::OutOfRange { row, col, value });
        }
    }

    let cellsize = header.cellsize.unwrap_or_default();
    let corner = |(v, centered): (f64, bool)| if centered { v - cellsize / 2.0 } else { v };
    Ok(GridLoad {
        grid: SuitabilityGrid {
            ncols: header.ncols.unwrap_or_default(),
            nrows: header.nrows.unwrap_or_default(),
            xll: corner(header.xll.unwrap_or_default()),
            yll: corner(header.yll.unwrap_or_default()),
            cellsize,
            nodata,
            values: raw,
        },
        warnings,
    })
}

impl SuitabilityGrid {
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn extent(&self) -> BBox {
        BBox {
            min_lng: self.xll,
            min_lat: self.yll,
            max_lng: self.xll + self.ncols as f64 * self.cellsize,
            max_lat: self.yll + self.nrows as f64 * self.cellsize,
        }
    }

    /// Value at `row` (0 = northernmost) and `col`; `None` on nodata.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        if row >= self.nrows || col >= self.ncols {
            return None;
        }
        let v = self.values[row * self.ncols + col];
        (!v.is_nan()).then_some(v as f64)
    }

    /// Cell whose half-open extent `[x, x + cellsize)` contains the point.
    pub fn cell_of(&self, point: GeoPoint) -> Option<(usize, usize)> {
        let fx = ((point.longitude - self.xll) / self.cellsize).floor();
        let fy = ((point.latitude - self.yll) / self.cellsize).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.ncols as f64 || fy >= self.nrows as f64 {
            return None;
        }
        let from_bottom = fy as usize;
        Some((self.nrows - 1 - from_bottom, fx as usize))
    }

    /// Nearest-cell suitability, no interpolation.
    pub fn suitability_at(&self, point: GeoPoint) -> Option<f64> {
        let (row, col) = self.cell_of(point)?;
        self.value(row, col)
    }
}

/// One of the five equal-interval suitability classes: 0 is exactly 0 %,
/// then (0,25], (25,50], (50,75], (75,100].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct SuitabilityClass(u8);

impl SuitabilityClass {
    pub fn index(self) -> u8 {
        self.0
    }
}

pub fn classify_suitability(
    value: Option<f64>,
) -> Result<Option<SuitabilityClass>, AnalyticsError> {
    let Some(v) = value else {
        return Ok(None);
    };
    if !(0.0..=100.0).contains(&v) {
        return Err(AnalyticsError::SuitabilityOutOfRange(v));
    }
    let class = if v == 0.0 {
        0
    } else if v <= 25.0 {
        1
    } else if v <= 50.0 {
        2
    } else if v <= 75.0 {
        3
    } else {
        4
    };
    Ok(Some(SuitabilityClass(class)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BBox {
    pub min_lng: f64,
    pub min_lat: f64,
    pub max_lng: f64,
    pub max_lat: f64,
}

impl BBox {
    /// Parses `min_lng,min_lat,max_lng,max_lat`.
    pub fn parse(raw: &str) -> Result<Self, WindowError> {
        let bad = || WindowError::MalformedBbox(raw.to_string());
        let parts: Vec<f64> = raw
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [min_lng, min_lat, max_lng, max_lat] = parts[..] else {
            return Err(bad());
        };
        if !parts.iter().all(|v| v.is_finite()) || min_lng >= max_lng || min_lat >= max_lat {
            return Err(bad());
        }
        Ok(Self {
            min_lng,
            min_lat,
            max_lng,
            max_lat,
        })
    }
}

/// Classified, down-sampled view of a grid, rows north to south.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassWindow {
    pub bbox: BBox,
    pub resolution: f64,
    pub nrows: usize,
    pub ncols: usize,
    pub classes: Vec<Vec<Option<SuitabilityClass>>>,
}

/// Samples the grid at the centre of each `resolution`-degree output cell.
/// Cells outside the grid come back as nodata. `resolution` defaults to the
/// grid's native cell size.
pub fn classify_window(
    grid: &SuitabilityGrid,
    bbox: BBox,
    resolution: Option<f64>,
) -> Result<ClassWindow, WindowError> {
    let res = resolution.unwrap_or(grid.cellsize);
    if !(res.is_finite() && res > 0.0) {
        return Err(WindowError::Resolution(res));
    }
    let count = |span: f64| ((span / res) - 1e-9).ceil().max(1.0);
    let (rows_f, cols_f) = (
        count(bbox.max_lat - bbox.min_lat),
        count(bbox.max_lng - bbox.min_lng),
    );
    if rows_f * cols_f > MAX_WINDOW_CELLS as f64 {
        return Err(WindowError::TooLarge {
            rows: rows_f as usize,
            cols: cols_f as usize,
            limit: MAX_WINDOW_CELLS,
        });
    }
    let (nrows, ncols) = (rows_f as usize, cols_f as usize);
    let classes = (0..nrows)
        .map(|i| {
            let lat = bbox.max_lat - (i as f64 + 0.5) * res;
            (0..ncols)
                .map(|j| {
                    let lng = bbox.min_lng + (j as f64 + 0.5) * res;
                    let value = grid.suitability_at(GeoPoint {
                        latitude: lat,
                        longitude: lng,
                    });
                    // stored values were validated into [0, 100]
                    classify_suitability(value).ok().flatten()
                })
                .collect()
        })
        .collect();
    Ok(ClassWindow {
        bbox,
        resolution: res,
        nrows,
        ncols,
        classes,
    })
}
