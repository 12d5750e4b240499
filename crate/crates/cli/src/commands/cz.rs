use anyhow::Result;
use epsdyadic::operators::cz_decompose;
use epsdyadic::oracle::verify_cz;

use super::{create, csv_writer, f, Verdict};
use crate::config::ExperimentConfig;

pub fn cz(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let func = cfg.input_function()?;
    let eps = cfg.epsilon_collection()?;
    let layout = func.layout();
    let lambda = cfg.lambda.unwrap_or_else(|| {
        let root_value = eps.value(layout.root()) * func.abs().integral() / layout.root().volume();
        let top = eps.sup_bound() * func.sup_abs();
        0.5 * (root_value + top.max(root_value))
    });
    let result = cz_decompose(&func, &eps, lambda)?;
    result.write_json(create(cfg, "cz.json", &mut verdict)?)?;

    let check = verify_cz(&result, &func, &eps, cfg.tolerances.relative)?;
    let mut w = csv_writer(cfg, "cz_check.csv", &mut verdict)?;
    w.write_record(["lambda", "cubes", "disjoint", "union_exact", "bounds", "maximal", "max_violation"])?;
    w.write_record([
        f(lambda),
        result.cubes.len().to_string(),
        check.disjoint.to_string(),
        check.union_exact.to_string(),
        check.bounds.to_string(),
        check.maximal.to_string(),
        f(check.max_violation),
    ])?;
    w.flush()?;
    verdict.require(check.passed(), format!("decomposition check failed: {check:?}"));
    Ok(verdict)
}
