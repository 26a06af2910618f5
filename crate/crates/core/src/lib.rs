//! Normalized Revealed Comparative Advantage (NRCA) computation and a
//! Box-Jenkins forecasting pipeline over NRCA series.

pub mod arima;
pub mod error;
pub mod identify;
pub mod ingest;
pub mod nrca;
pub mod outliers;
pub mod pipeline;
pub mod series;
pub mod sim;
pub mod stationarity;

pub use error::{Error, Result};
