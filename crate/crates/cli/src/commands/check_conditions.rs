use std::collections::BTreeSet;

use anyhow::Result;
use epsdyadic::exponent::{
    check_diening, check_eps_diening, check_eps_diening_pointwise, check_lh_infty, conjugate_transfer_kappa,
    ConditionReport,
};
use epsdyadic::DyadicCube;

use super::{csv_writer, f, create, Verdict};
use crate::config::ExperimentConfig;

/// Every layout cube plus, in one dimension, the origin chain `Q_n = [0, 2^{-n})`
/// and `Q'_n = [2^{-n-1}, 2^{-n})` down to `max_level`.
fn cube_family(cfg: &ExperimentConfig) -> Result<Vec<DyadicCube>> {
    let layout = cfg.layout()?;
    let root = cfg.root();
    let mut family = BTreeSet::new();
    for d in 0..=layout.depth() {
        for i in 0..layout.count(d) {
            family.insert(layout.cube(d, i));
        }
    }
    if cfg.dimension == 1 {
        for n in 0..=cfg.max_level {
            for q in [DyadicCube::new(n, vec![0]), DyadicCube::new(n + 1, vec![1])] {
                if root.contains(&q) {
                    family.insert(q);
                }
            }
        }
    }
    Ok(family.into_iter().collect())
}

fn lh_samples(cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let p = cfg.exponent_function()?;
    if cfg.dimension == 1 {
        let far: Vec<Vec<f64>> = (0..=20)
            .flat_map(|k| [vec![2f64.powi(k)], vec![-(2f64.powi(k))]])
            .collect();
        if far.iter().all(|x| p.value_at(x).is_ok()) {
            return Ok(far);
        }
    }
    let layout = cfg.layout()?;
    Ok((0..layout.cell_count()).map(|i| layout.cell_center(i)).collect())
}

pub fn check_conditions(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let p = cfg.exponent_function()?;
    let eps = cfg.epsilon_collection()?;
    let family = cube_family(cfg)?;

    let reports: Vec<(&str, ConditionReport)> = vec![
        ("diening", check_diening(&p, &family)?),
        ("eps_diening", check_eps_diening(&p, &eps, &family)?),
        (
            "eps_diening_pointwise",
            check_eps_diening_pointwise(&p, &eps, &family, cfg.samples_per_cube)?,
        ),
        ("conjugate_eps_diening", check_eps_diening(&p.conjugate(), &eps, &family)?),
    ];
    for (name, report) in &reports {
        report.write_csv(create(cfg, &format!("{name}.csv"), &mut verdict)?)?;
    }

    let fit = check_lh_infty(&p, &lh_samples(cfg)?, None)?;
    let mut w = csv_writer(cfg, "lh_infty.csv", &mut verdict)?;
    w.write_record([
        "p_inf", "c_inf", "witness", "r_min", "r_max", "p_inf_positive", "p_inf_negative", "c_inner", "c_outer",
        "diverging",
    ])?;
    let opt = |v: Option<f64>| v.map(f).unwrap_or_default();
    w.write_record([
        f(fit.p_inf),
        f(fit.c_inf),
        fit.witness.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" "),
        f(fit.sampled_range.0),
        f(fit.sampled_range.1),
        opt(fit.p_inf_positive),
        opt(fit.p_inf_negative),
        f(fit.c_inner),
        f(fit.c_outer),
        fit.diverging.to_string(),
    ])?;
    w.flush()?;

    let eps_sup = reports[1].1.supremum;
    let conj_sup = reports[3].1.supremum;
    let kappa = conjugate_transfer_kappa(&p);
    let conj_bound = eps_sup.max(1.0).powf(kappa);

    let mut w = csv_writer(cfg, "summary.csv", &mut verdict)?;
    w.write_record(["condition", "supremum", "witness"])?;
    for (name, report) in &reports {
        let witness = report.witness.as_ref().map(|c| c.to_string()).unwrap_or_default();
        w.write_record([name.to_string(), f(report.supremum), witness])?;
    }
    w.write_record(["lh_infty_c".to_string(), f(fit.c_inf), String::new()])?;
    w.write_record(["conjugate_kappa".to_string(), f(kappa), String::new()])?;
    w.write_record(["conjugate_bound".to_string(), f(conj_bound), String::new()])?;
    w.flush()?;

    verdict.require(eps_sup.is_finite(), "eps-Diening supremum is not finite");
    verdict.require(conj_sup.is_finite(), "conjugate eps-Diening supremum is not finite");
    verdict.require(
        conj_sup <= conj_bound + cfg.tolerances.slack,
        format!("conjugate supremum {conj_sup} exceeds {conj_bound}"),
    );
    Ok(verdict)
}
