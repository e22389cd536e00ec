//! Command-line orchestration: load a JSON config, run one experiment on a
//! sized thread pool, and write `results.json`, `results.csv` and
//! `manifest.json` into the output directory.

pub mod config;
pub mod error;
pub mod run;
pub mod suite;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, Format, Kind, SuiteName, BUDGET_ENV};
pub use error::{CliError, Result};
pub use run::{execute, Artifacts, Table};

pub const RESULTS_JSON: &str = "results.json";
pub const RESULTS_CSV: &str = "results.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// One invocation of the binary.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub kind: Kind,
    pub config: ExperimentConfig,
    /// Raw config bytes, hashed into the manifest.
    pub config_bytes: Vec<u8>,
    pub config_path: Option<PathBuf>,
    pub jobs: usize,
    pub out: PathBuf,
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { stage: "output", path: path.to_path_buf(), source })
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| CliError::Output(e.to_string()))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

/// Runs the experiment and writes its artifacts. Results depend only on the
/// config; the wall time goes to the manifest alone.
pub fn run(inv: &Invocation) -> Result<PathBuf> {
    inv.config.validate(inv.kind)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(inv.jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", inv.jobs)))?;
    let art = pool.install(|| execute(inv.kind, &inv.config))?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&inv.out)
        .map_err(|source| CliError::Io { stage: "output", path: inv.out.clone(), source })?;
    let mut outputs = serde_json::Map::new();
    for f in &inv.config.formats {
        let (name, bytes) = match f {
            Format::Json => {
                let doc = json!({
                    "experiment": inv.kind.name(),
                    "budget": inv.config.budget,
                    "tolerances": run::tolerances(),
                    "report": art.report,
                });
                let mut b = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
                b.push(b'\n');
                (RESULTS_JSON, b)
            }
            Format::Csv => (RESULTS_CSV, csv_bytes(&art.table)?),
        };
        write(&inv.out.join(name), &bytes)?;
        outputs.insert(name.into(), json!(sha256_hex(&bytes)));
    }
    let manifest = json!({
        "experiment": inv.kind.name(),
        "config": inv.config_path.as_ref().map(|p| p.display().to_string()),
        "config_sha256": sha256_hex(&inv.config_bytes),
        "versions": { "meandim-core": meandim::VERSION, "meandim-cli": env!("CARGO_PKG_VERSION") },
        "jobs": inv.jobs,
        "budget": inv.config.budget,
        "wall_time_secs": wall,
        "outputs": outputs,
    });
    let mut b = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
    b.push(b'\n');
    write(&inv.out.join(MANIFEST_JSON), &b)?;
    Ok(inv.out.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(String::from_utf8(csv_bytes(&t).unwrap()).unwrap(), "a,b\n\"x,y\",1\n");
    }
}
