use anyhow::Result;
use epsdyadic::operators::{build_sparse_stopping, sparse_operator, verify_sparse, SparseCheck, SparseCollection};
use serde::Serialize;

use super::{create, csv_writer, f, stem, Verdict};
use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct Entry {
    index: usize,
    collection: SparseCollection,
    check: SparseCheck,
}

pub fn sparse(cfg: &ExperimentConfig) -> Result<Verdict> {
    let mut verdict = Verdict::default();
    let eps = cfg.epsilon_collection()?;
    let ratio = 2f64.powi(cfg.dimension as i32 + 1);
    let mut entries = Vec::new();
    for (index, g) in cfg.bank()?.into_iter().enumerate() {
        let collection = build_sparse_stopping(&g, ratio)?;
        let check = verify_sparse(&collection);
        verdict.require(check.holds(), format!("bank member {index}: packing check failed"));
        if index == 0 {
            sparse_operator(&g.abs(), &collection, &eps)?.save(&stem(cfg, "sparse_operator", &mut verdict)?)?;
        }
        entries.push(Entry { index, collection, check });
    }
    serde_json::to_writer_pretty(create(cfg, "sparse.json", &mut verdict)?, &entries)?;

    let mut w = csv_writer(cfg, "sparse.csv", &mut verdict)?;
    w.write_record(["index", "cubes", "max_ratio", "packing", "disjoint_remainders"])?;
    for e in &entries {
        w.write_record([
            e.index.to_string(),
            e.collection.len().to_string(),
            f(e.check.max_ratio),
            e.check.packing.to_string(),
            e.check.disjoint_remainders.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(verdict)
}
