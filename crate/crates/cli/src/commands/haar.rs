use anyhow::Result;
use epsdyadic::operators::{domination_ratio, haar_multiplier};

use super::{csv_writer, f, stem, Verdict};
use crate::config::ExperimentConfig;

pub fn haar(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let eps = cfg.epsilon_collection()?;
    let func = cfg.input_function()?;
    let t = haar_multiplier(&func, &eps, cfg.haar_mode)?;
    t.save(&stem(cfg, "haar", &mut verdict)?)?;

    let mut w = csv_writer(cfg, "domination.csv", &mut verdict)?;
    w.write_record(["index", "ratio", "failures", "sparse_cubes"])?;
    for (i, g) in cfg.bank()?.iter().enumerate() {
        let r = domination_ratio(g, &eps, cfg.haar_mode)?;
        w.write_record([i.to_string(), f(r.ratio), r.failures.to_string(), r.sparse_cubes.to_string()])?;
        verdict.require(r.is_finite(), format!("bank member {i}: sparse bound vanishes where T f does not"));
    }
    w.flush()?;
    Ok(verdict)
}
