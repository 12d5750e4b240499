use anyhow::Result;
use epsdyadic::bank::{generate_bank, BankKind, Lcg};
use epsdyadic::exponent::ExponentFunction;
use epsdyadic::operators::{build_sparse_stopping, cz_decompose, dyadic_maximal, eps_maximal, verify_sparse};
use epsdyadic::oracle::{naive_dyadic_maximal, naive_eps_maximal, verify_cz};
use epsdyadic::{EpsilonCollection, GridFunction, Layout};

use super::{csv_writer, f, Verdict};
use crate::config::ExperimentConfig;

#[derive(Default)]
struct Row {
    failures: usize,
    max_deviation: f64,
}

impl Row {
    fn record(&mut self, ok: bool, deviation: f64) {
        if !ok {
            self.failures += 1;
        }
        self.max_deviation = self.max_deviation.max(deviation);
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A threshold strictly between `ε_root avg_root|f|` and just above the
/// largest attainable `ε_Q avg_Q|f|`.
fn pick_lambda(f: &GridFunction, eps: &EpsilonCollection, rng: &mut Lcg) -> f64 {
    let layout = f.layout();
    let root_value = eps.value(layout.root()) * f.abs().integral() / layout.root().volume();
    let top = eps.sup_bound() * f.sup_abs();
    let span = (top - root_value).max(1e-6 * (root_value.abs() + 1.0));
    root_value + rng.uniform(0.02, 1.1) * span
}

pub(crate) fn instance(layout: &Layout, seed: u64, i: usize) -> Result<GridFunction> {
    let kinds = [BankKind::RandomCells, BankKind::Indicators, BankKind::HaarLike];
    Ok(generate_bank(layout, kinds[i % 3], 1, seed.wrapping_add(i as u64))?.swap_remove(0))
}

pub fn oracle_suite(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let layout = cfg.layout()?;
    let eps = cfg.epsilon_collection()?;
    let tol = &cfg.tolerances;
    let p_const = 2.5;
    let constant = ExponentFunction::constant(p_const, cfg.root())?;
    let ratio = 2f64.powi(cfg.dimension as i32 + 1);
    let mut rng = Lcg::new(cfg.bank.seed ^ 0x9e37_79b9_7f4a_7c15);

    let names = ["dyadic_maximal", "eps_maximal", "eps_maximal_bound", "cz", "sparse_packing", "norm_closed_form"];
    let mut rows: Vec<Row> = names.iter().map(|_| Row::default()).collect();
    for i in 0..cfg.instances {
        let func = instance(&layout, cfg.bank.seed, i)?;

        let md = dyadic_maximal(&func);
        let d = max_diff(md.values(), &naive_dyadic_maximal(&func));
        rows[0].record(d <= tol.oracle, d);

        let me = eps_maximal(&func, &eps)?;
        let d = max_diff(me.values(), &naive_eps_maximal(&func, &eps));
        rows[1].record(d <= tol.oracle, d);

        let excess = me
            .values()
            .iter()
            .zip(md.values())
            .map(|(a, b)| a - eps.sup_bound() * b)
            .fold(0.0, f64::max);
        rows[2].record(excess <= tol.oracle, excess);

        let lambda = pick_lambda(&func, &eps, &mut rng);
        let used = if cfg.fault {
            let root_value = eps.value(layout.root()) * func.abs().integral() / layout.root().volume();
            if 0.75 * lambda > root_value { 0.75 * lambda } else { lambda }
        } else {
            lambda
        };
        let mut result = cz_decompose(&func, &eps, used)?;
        result.lambda = lambda;
        let check = verify_cz(&result, &func, &eps, tol.relative)?;
        rows[3].record(check.passed(), check.max_violation);

        let s = build_sparse_stopping(&func, ratio)?;
        let sc = verify_sparse(&s);
        rows[4].record(sc.holds(), sc.max_ratio);

        let closed = func.map(|v| v.abs().powf(p_const))?.integral().powf(1.0 / p_const);
        let n = constant.norm(&func, tol.norm)?;
        let rel = (n - closed).abs() / closed;
        rows[5].record(rel <= 1e-8, rel);
    }

    let mut w = csv_writer(cfg, "oracle_suite.csv", &mut verdict)?;
    w.write_record(["check", "instances", "failures", "max_deviation"])?;
    for (name, row) in names.iter().zip(&rows) {
        w.write_record([name.to_string(), cfg.instances.to_string(), row.failures.to_string(), f(row.max_deviation)])?;
        verdict.require(row.failures == 0, format!("{name}: {} of {} instances failed", row.failures, cfg.instances));
    }
    w.flush()?;
    Ok(verdict)
}
