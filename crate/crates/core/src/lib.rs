//! Data model, ingest and analytics for exploring dengue serotype reports
//! across regions and years.

pub mod analytics;
pub mod error;
pub mod gazetteer;
pub mod grid;
pub mod ingest;
pub mod model;
pub mod query;
pub mod snapshot;

pub use error::{
    AnalyticsError, GazetteerError, GridError, IngestError, ModelError, SnapshotError, WindowError,
};
pub use gazetteer::Gazetteer;
pub use model::{
    CountryCode, DatasetSpan, GeoPoint, Region, RegionSet, Report, SelectionContext, Serotype,
    SerotypeSet, Shade, Source, YearWindow,
};
pub use snapshot::{build_snapshot, load_data_dir, LoadedSnapshot, Snapshot, SnapshotMeta};
