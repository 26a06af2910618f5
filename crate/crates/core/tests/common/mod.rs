#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tradecast_core::ingest::TradeRecord;
use tradecast_core::nrca::{read_nrca_table_file, NrcaSeries};
use tradecast_core::pipeline::PipelineConfig;
use tradecast_core::series::Series;

pub const CODES: [&str; 6] = ["5201", "5502", "5603", "5205", "5703", "6309"];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn repo_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn table1() -> Vec<NrcaSeries> {
    read_nrca_table_file(&data_dir().join("table1_nrca.csv"), "USA").unwrap()
}

pub fn column(code: &str) -> NrcaSeries {
    table1().into_iter().find(|s| s.commodity == code).unwrap()
}

/// Training window 1996-2015 of a bundled column (raw scale).
pub fn train(code: &str) -> Series {
    column(code).series.window(1996, 2015).unwrap()
}

/// Display-scale values of a bundled column, 1996-2016.
pub fn display(code: &str) -> Vec<f64> {
    column(code).display_values()
}

pub fn config(name: &str, out: &std::path::Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_file(&repo_dir().join("configs").join(format!("{name}.toml"))).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

/// Random strictly positive panel: every country exports every commodity
/// every year.
pub fn random_records(seed: u64, countries: usize, commodities: usize, years: usize) -> Vec<TradeRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for y in 0..years {
        for c in 0..countries {
            for j in 0..commodities {
                out.push(TradeRecord {
                    reporter: format!("C{c:02}"),
                    year: 2000 + y as i32,
                    hs_code: format!("{}", 5000 + 7 * j),
                    export_value: rng.gen_range(1.0..1e6),
                });
            }
        }
    }
    out
}

/// NRCA straight from the definition with independent summation loops.
pub fn brute_nrca(records: &[TradeRecord], country: &str, code: &str, year: i32) -> f64 {
    let mut e = 0.0;
    let mut e_i = 0.0;
    let mut e_j = 0.0;
    let mut e_ij = 0.0;
    for r in records.iter().filter(|r| r.year == year) {
        e += r.export_value;
        if r.reporter == country {
            e_i += r.export_value;
        }
        if r.hs_code == code {
            e_j += r.export_value;
        }
        if r.reporter == country && r.hs_code == code {
            e_ij += r.export_value;
        }
    }
    e_ij / e - e_j * e_i / (e * e)
}
