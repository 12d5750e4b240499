use anyhow::Result;
use epsdyadic::operators::compactness_probe;

use super::{csv_writer, f, Verdict};
use crate::config::ExperimentConfig;

pub fn compactness(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let n_range = cfg.n_range.clone().unwrap_or_else(|| (0..=cfg.depth).collect());
    let probe = compactness_probe(
        &cfg.epsilon_collection()?,
        &cfg.exponent_function()?,
        &cfg.bank()?,
        &n_range,
        cfg.tolerances.norm,
    )?;

    let mut w = csv_writer(cfg, "compactness.csv", &mut verdict)?;
    w.write_record(["N", "e_N", "eps_tail_sup"])?;
    for &(n, e) in &probe.rows {
        let s = probe.eps_profile.get(n as usize).copied().map(f).unwrap_or_default();
        w.write_record([n.to_string(), f(e), s])?;
    }
    w.flush()?;

    let mut w = csv_writer(cfg, "compactness_summary.csv", &mut verdict)?;
    w.write_record(["eps_decays", "nonincreasing", "stalled"])?;
    w.write_record([
        probe.eps_decays.to_string(),
        probe.nonincreasing.to_string(),
        probe.stalled.to_string(),
    ])?;
    w.flush()?;

    if !probe.eps_decays {
        eprintln!("warning: epsilon does not decay on small cubes; the truncations need not converge");
    }
    if let Some(&(_, e)) = probe.rows.iter().find(|r| r.0 >= cfg.depth) {
        verdict.require(e == 0.0, format!("e_N at N >= depth is {e}, expected 0"));
    }
    if probe.eps_decays {
        verdict.require(probe.nonincreasing, "e_N increases although epsilon decays");
    }
    Ok(verdict)
}
