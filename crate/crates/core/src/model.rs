//! Domain types shared by every other module: serotypes and their set
//! algebra, reports, regions, year windows and the selection context.
//!
//! Everything here is immutable once constructed.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One of the four dengue virus serotypes. Ordered DENV1 < ... < DENV4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Serotype {
    #[serde(rename = "DENV1")]
    Denv1,
    #[serde(rename = "DENV2")]
    Denv2,
    #[serde(rename = "DENV3")]
    Denv3,
    #[serde(rename = "DENV4")]
    Denv4,
}

impl Serotype {
    pub const ALL: [Serotype; 4] = [Self::Denv1, Self::Denv2, Self::Denv3, Self::Denv4];

    /// Zero-based position, also the bit index in a [`SerotypeSet`] mask.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Denv1 => "DENV1",
            Self::Denv2 => "DENV2",
            Self::Denv3 => "DENV3",
            Self::Denv4 => "DENV4",
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for Serotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Serotype {
    type Err = ModelError;

    /// Accepts `DENV1`, `denv-1`, `d1` and `1` style spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let digits = lower
            .strip_prefix("denv")
            .or_else(|| lower.strip_prefix('d'))
            .unwrap_or(&lower)
            .trim_start_matches(['-', '_', ' ']);
        match digits {
            "1" => Ok(Self::Denv1),
            "2" => Ok(Self::Denv2),
            "3" => Ok(Self::Denv3),
            "4" => Ok(Self::Denv4),
            _ => Err(ModelError::UnknownSerotype(s.to_string())),
        }
    }
}

/// A subset of the four serotypes stored as a 4-bit mask; bit `i` is
/// DENV(i+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SerotypeSet(u8);

impl SerotypeSet {
    pub const EMPTY: SerotypeSet = SerotypeSet(0);
    pub const FULL: SerotypeSet = SerotypeSet(0b1111);

    pub fn from_mask(mask: u32) -> Result<Self, ModelError> {
        if mask > 15 {
            return Err(ModelError::MaskOutOfRange(mask));
        }
        Ok(Self(mask as u8))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, serotype: Serotype) -> bool {
        self.0 & serotype.bit() != 0
    }

    pub fn with(self, serotype: Serotype) -> Self {
        Self(self.0 | serotype.bit())
    }

    pub fn intersection(self, other: Self) -> Self {
        Self(self.0 & other.0)
    }

    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_superset_of(self, other: Self) -> bool {
        self.0 & other.0 == other.0
    }

    /// Members in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Serotype> {
        Serotype::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn label(self) -> String {
        if self.is_empty() {
            return "none".to_string();
        }
        self.iter()
            .map(Serotype::label)
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl FromIterator<Serotype> for SerotypeSet {
    fn from_iter<I: IntoIterator<Item = Serotype>>(iter: I) -> Self {
        iter.into_iter().fold(Self::EMPTY, Self::with)
    }
}

impl fmt::Display for SerotypeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for SerotypeSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for s in self.iter() {
            seq.serialize_element(&s)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SerotypeSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(deserializer)?;
        labels
            .iter()
            .map(|l| l.parse::<Serotype>().map_err(de::Error::custom))
            .collect()
    }
}

/// Integer code of a serotype set; bit `i` set iff DENV(i+1) is present.
pub fn encode_serotype_set(set: SerotypeSet) -> u8 {
    set.mask()
}

pub fn decode_serotype_set(code: u8) -> Result<SerotypeSet, ModelError> {
    SerotypeSet::from_mask(code.into())
}

/// All 15 non-empty serotype combinations, by cardinality then mask.
pub fn enumerate_combinations() -> Vec<SerotypeSet> {
    let mut all: Vec<SerotypeSet> = (1u8..16).map(SerotypeSet).collect();
    all.sort_by_key(|s| (s.len(), s.mask()));
    all
}

/// ISO 3166-1 alpha-3 country code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        // constructed only from ASCII uppercase letters
        std::str::from_utf8(&self.0).expect("ascii country code")
    }
}

impl FromStr for CountryCode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(u8::is_ascii_alphabetic) {
            return Err(ModelError::InvalidCountryCode(s.to_string()));
        }
        let mut code = [0u8; 3];
        for (dst, src) in code.iter_mut().zip(bytes) {
            *dst = src.to_ascii_uppercase();
        }
        Ok(Self(code))
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoPoint {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self, ModelError> {
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            return Err(ModelError::CoordinateOutOfRange {
                lat: latitude,
                lng: longitude,
            });
        }
        Ok(Self {
            latitude,
            longitude,
        })
    }
}

/// Which input file a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Core,
    Supplement,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Core => "core",
            Self::Supplement => "supplement",
        })
    }
}

/// One geocoded, dated observation of at least one serotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub id: u32,
    pub latitude: f64,
    pub longitude: f64,
    pub country: CountryCode,
    pub year: i32,
    pub serotypes: SerotypeSet,
    pub source: Source,
}

impl Report {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            latitude: self.latitude,
            longitude: self.longitude,
        }
    }

    pub fn serotype_count(&self) -> usize {
        self.serotypes.len()
    }
}

/// Greyscale ramp used to tell region centroids apart.
pub const SHADE_RAMP: [&str; 4] = ["#000000", "#555555", "#aaaaaa", "#ffffff"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Shade(u8);

impl Shade {
    pub fn new(index: u8) -> Result<Self, ModelError> {
        if index as usize >= SHADE_RAMP.len() {
            return Err(ModelError::ShadeOutOfRange(index));
        }
        Ok(Self(index))
    }

    /// Shade for the `n`-th region in a list, cycling through the ramp.
    pub fn cycled(n: usize) -> Self {
        Self((n % SHADE_RAMP.len()) as u8)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn hex(self) -> &'static str {
        SHADE_RAMP[self.0 as usize]
    }
}

impl TryFrom<u8> for Shade {
    type Error = ModelError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<Shade> for u8 {
    fn from(value: Shade) -> Self {
        value.0
    }
}

/// A named set of countries the user aggregates over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub name: String,
    pub countries: BTreeSet<CountryCode>,
    pub visible: bool,
    pub shade: Shade,
}

impl Region {
    pub fn new(
        name: impl Into<String>,
        countries: impl IntoIterator<Item = CountryCode>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(ModelError::UnnamedRegion);
        }
        let countries: BTreeSet<_> = countries.into_iter().collect();
        if countries.is_empty() {
            return Err(ModelError::EmptyRegion(name));
        }
        Ok(Self {
            name,
            countries,
            visible: true,
            shade: Shade::cycled(0),
        })
    }

    pub fn with_shade(mut self, shade: Shade) -> Self {
        self.shade = shade;
        self
    }

    pub fn with_visible(mut self, visible: bool) -> Self {
        self.visible = visible;
        self
    }

    pub fn contains(&self, country: CountryCode) -> bool {
        self.countries.contains(&country)
    }
}

/// Regions with unique names, in user order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct RegionSet(Vec<Region>);

impl RegionSet {
    pub fn new(regions: Vec<Region>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for r in &regions {
            if !seen.insert(r.name.as_str()) {
                return Err(ModelError::DuplicateRegion(r.name.clone()));
            }
        }
        Ok(Self(regions))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.0.iter()
    }

    pub fn visible(&self) -> impl Iterator<Item = &Region> {
        self.0.iter().filter(|r| r.visible)
    }

    pub fn get(&self, name: &str) -> Option<&Region> {
        self.0.iter().find(|r| r.name == name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Region> {
        self.0
    }
}

/// First and last selectable year of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpan {
    pub year_min: i32,
    pub year_max: i32,
}

impl DatasetSpan {
    pub fn new(year_min: i32, year_max: i32) -> Result<Self, ModelError> {
        if year_min > year_max {
            return Err(ModelError::InvalidSpan {
                min: year_min,
                max: year_max,
            });
        }
        Ok(Self { year_min, year_max })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.year_min..=self.year_max).contains(&year)
    }

    /// Longest window that still fits, i.e. the number of years in the span.
    pub fn max_interval(&self) -> u32 {
        (self.year_max - self.year_min + 1) as u32
    }

    /// Window covering the whole span.
    pub fn full_window(&self) -> YearWindow {
        YearWindow {
            current_year: self.year_max,
            interval_length: self.max_interval(),
            start: self.year_min,
            end: self.year_max,
        }
    }
}

impl Default for DatasetSpan {
    fn default() -> Self {
        Self {
            year_min: 1943,
            year_max: 2020,
        }
    }
}

/// Years `start..=end`, anchored at `current_year == end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearWindow {
    pub current_year: i32,
    pub interval_length: u32,
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn years(&self) -> RangeInclusive<i32> {
        self.start..=self.end
    }

    pub fn contains(&self, year: i32) -> bool {
        self.years().contains(&year)
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn single_year(year: i32) -> Self {
        Self {
            current_year: year,
            interval_length: 1,
            start: year,
            end: year,
        }
    }
}

/// Resolves a current year plus interval length into a window ending at
/// `current_year`. The start is clamped to the span, and the interval is
/// capped at the span length.
pub fn resolve_window(
    span: DatasetSpan,
    current_year: i32,
    interval_length: i64,
) -> Result<YearWindow, ModelError> {
    if !span.contains(current_year) {
        return Err(ModelError::YearOutOfSpan {
            year: current_year,
            min: span.year_min,
            max: span.year_max,
        });
    }
    if interval_length < 1 {
        return Err(ModelError::IntervalTooShort(interval_length));
    }
    let interval = interval_length.min(span.max_interval() as i64) as u32;
    let start = (current_year - interval as i32 + 1).max(span.year_min);
    Ok(YearWindow {
        current_year,
        interval_length: interval,
        start,
        end: current_year,
    })
}

/// The query shared by all panels: visible regions, a year window and the
/// active serotype filter.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionContext {
    regions: Vec<Region>,
    pub window: YearWindow,
    pub serotypes: SerotypeSet,
}

impl SelectionContext {
    /// Hidden regions are dropped.
    pub fn new(
        regions: impl IntoIterator<Item = Region>,
        window: YearWindow,
        serotypes: SerotypeSet,
    ) -> Self {
        Self {
            regions: regions.into_iter().filter(|r| r.visible).collect(),
            window,
            serotypes,
        }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn with_window(&self, window: YearWindow) -> Self {
        Self {
            window,
            ..self.clone()
        }
    }

    pub fn with_regions(&self, regions: impl IntoIterator<Item = Region>) -> Self {
        Self::new(regions, self.window, self.serotypes)
    }

    pub fn with_serotypes(&self, serotypes: SerotypeSet) -> Self {
        Self {
            serotypes,
            ..self.clone()
        }
    }

    /// Union of the visible regions' countries.
    pub fn countries(&self) -> BTreeSet<CountryCode> {
        self.regions
            .iter()
            .flat_map(|r| r.countries.iter().copied())
            .collect()
    }
}
