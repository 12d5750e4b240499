use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

mod check_conditions;
mod compactness;
mod cz;
mod haar;
mod opnorm;
mod oracle_suite;
mod sparse;

pub use check_conditions::check_conditions;
pub use compactness::compactness;
pub use cz::cz;
pub use haar::haar;
pub use opnorm::opnorm;
pub use oracle_suite::oracle_suite;
pub use sparse::sparse;

/// Outcome of a command: assertion failures, if any, and the files written.
#[derive(Debug, Default)]
pub struct Verdict {
    pub failures: Vec<String>,
    pub outputs: Vec<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

pub(crate) fn create(cfg: &ExperimentConfig, name: &str, verdict: &mut Verdict) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let path = cfg.output_dir.join(name);
    verdict.outputs.push(path.display().to_string());
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub(crate) fn csv_writer(cfg: &ExperimentConfig, name: &str, verdict: &mut Verdict) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(cfg, name, verdict)?))
}

pub(crate) fn stem(cfg: &ExperimentConfig, name: &str, verdict: &mut Verdict) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let stem = cfg.output_dir.join(name);
    for ext in ["json", "csv"] {
        verdict.outputs.push(stem.with_extension(ext).display().to_string());
    }
    Ok(stem)
}

pub(crate) fn f(v: f64) -> String {
    epsdyadic::grid::fmt_f64(v)
}
