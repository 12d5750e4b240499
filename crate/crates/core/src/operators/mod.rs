//! Dyadic operators on grid functions.

mod cz;
mod estimate;
mod haar;
mod maximal;
mod sparse;

pub use cz::{cz_decompose, CzCube, CzResult};
pub use estimate::{
    compactness_probe, domination_ratio, opnorm_estimate, CompactnessProbe, DominationReport,
    OpnormEstimate, Operator,
};
pub use haar::{haar_coefficient, haar_function, haar_multiplier, HaarFunction, HaarMode};
pub use maximal::{dyadic_maximal, eps_maximal};

pub use sparse::{
    build_sparse_stopping, sparse_operator, sparse_tail, truncated_sparse, verify_sparse,
    SparseCheck, SparseCollection,
};

use crate::grid::Layout;

/// Indices at offset `d + 1` of the children of cube `(d, index)`, in the
/// order of [`crate::dyadic::DyadicCube::children`].
pub fn child_indices(layout: &Layout, d: u32, index: usize) -> Vec<usize> {
    let n = layout.dimension();
    let base = layout.decode(d, index);
    (0..1usize << n)
        .map(|t| {
            let local: Vec<u64> = base
                .iter()
                .enumerate()
                .map(|(j, &c)| 2 * c + ((t >> (n - 1 - j)) & 1) as u64)
                .collect();
            layout.encode(d + 1, &local)
        })
        .collect()
}

/// Cell values `Σ_d adds[d][ancestor of cell at offset d]`.
pub(crate) fn accumulate(layout: &Layout, adds: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = adds[0].clone();
    for d in 1..=layout.depth() {
        let parents = layout.parent_map(d);
        acc = adds[d as usize]
            .iter()
            .zip(&parents)
            .map(|(a, &p)| acc[p] + a)
            .collect();
    }
    acc
}

/// Cell values `max_d vals[d][ancestor of cell at offset d]`.
pub(crate) fn running_max(layout: &Layout, vals: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vals[0].clone();
    for d in 1..=layout.depth() {
        let parents = layout.parent_map(d);
        acc = vals[d as usize]
            .iter()
            .zip(&parents)
            .map(|(v, &p)| acc[p].max(*v))
            .collect();
    }
    acc
}
