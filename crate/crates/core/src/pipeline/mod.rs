//! End-to-end run: load, screen, then per revealed category test for unit
//! roots, identify, select, check, forecast and search for outliers; emit
//! tables, plots and a manifest.

mod config;
mod emit;
mod plot;
mod run;

pub use config::{InputMode, PipelineConfig, ENV_PREFIX};
pub use emit::{all_tables, direction_glyph, table1 as nrca_table, Table, TableFormat};
pub use plot::{emit_forecast_plot, render_forecast_svg};
pub use run::{load_series, read_orders_file, run_pipeline, CategoryReport, ReportBundle};
