//! Configuration files, field export and result tables.

pub mod config;
pub mod export;
pub mod report;

pub use config::{load_config, parse_config, CellConfig, HomogeneousCell, LaminateCell, ModeEntry, RunConfig, SCHEMA};
pub use export::{export_field, parse_field_csv, read_field_csv, field_from_rows, CsvRow, Format, CSV_HEADER};
pub use report::ResultBundle;
