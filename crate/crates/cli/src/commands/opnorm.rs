use anyhow::Result;
use epsdyadic::operators::{opnorm_estimate, Operator};

use super::{csv_writer, f, Verdict};
use crate::config::{ExperimentConfig, OperatorName};

fn operator(cfg: &ExperimentConfig) -> Result<Operator> {
    let eps = cfg.epsilon_collection()?;
    Ok(match cfg.operator {
        OperatorName::Identity => Operator::Identity,
        OperatorName::Md => Operator::DyadicMaximal,
        OperatorName::Meps => Operator::EpsMaximal(eps),
        OperatorName::Teps => Operator::Haar(eps, cfg.haar_mode),
        OperatorName::Seps => Operator::Sparse(eps),
    })
}

pub fn opnorm(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let op = operator(cfg)?;
    let p = cfg.exponent_function()?;
    let tol = cfg.tolerances.norm;
    let est = opnorm_estimate(&op, &p, &cfg.bank()?, tol)?;

    let mut w = csv_writer(cfg, "opnorm.csv", &mut verdict)?;
    w.write_record(["index", "ratio"])?;
    for (i, r) in est.ratios.iter().enumerate() {
        w.write_record([i.to_string(), f(*r)])?;
    }
    w.write_record(["max".to_string(), f(est.max)])?;
    w.flush()?;

    let mut depths = vec![cfg.depth];
    depths.extend(cfg.sweep_depths.iter().copied().filter(|&d| d >= 1 && d != cfg.depth));
    depths.sort_unstable();
    let mut w = csv_writer(cfg, "opnorm_sweep.csv", &mut verdict)?;
    w.write_record(["operator", "depth", "max_ratio"])?;
    for d in depths {
        let m = if d == cfg.depth { est.max } else { opnorm_estimate(&op, &p, &cfg.bank_at(d)?, tol)?.max };
        w.write_record([op.name().to_string(), d.to_string(), f(m)])?;
        verdict.require(m.is_finite(), format!("ratio at depth {d} is not finite"));
    }
    w.flush()?;

    if let Operator::Identity = op {
        verdict.require((est.max - 1.0).abs() <= 2.0 * tol, "identity ratio differs from 1");
    }
    Ok(verdict)
}
