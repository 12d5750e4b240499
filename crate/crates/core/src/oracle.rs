//! Brute-force reference implementations. Each one enumerates cells and
//! cubes directly, without the hierarchical sums the fast operators use.

use std::collections::HashMap;

use serde::Serialize;

use crate::dyadic::{DyadicCube, Relation};
use crate::epsilon::EpsilonCollection;
use crate::error::Result;
use crate::grid::GridFunction;
use crate::operators::{CzResult, HaarMode, SparseCollection};

/// `avg_Q f` by summing the cells inside `Q`.
pub fn naive_average(f: &GridFunction, q: &DyadicCube) -> f64 {
    let layout = f.layout();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, v) in f.values().iter().enumerate() {
        if q.contains(&layout.cell_cube(i)) {
            sum += v;
            count += 1;
        }
    }
    if count == 0 { 0.0 } else { sum / count as f64 }
}

/// `max_Q ε_Q avg_Q|f|` over every (cell, ancestor) pair.
pub fn naive_eps_maximal(f: &GridFunction, eps: &EpsilonCollection) -> Vec<f64> {
    let layout = f.layout();
    let abs = f.abs();
    let mut memo: HashMap<DyadicCube, f64> = HashMap::new();
    (0..layout.cell_count())
        .map(|i| {
            let cell = layout.cell_cube(i);
            (layout.root().level()..=layout.cell_level())
                .map(|k| {
                    let q = cell.ancestor(k);
                    *memo
                        .entry(q.clone())
                        .or_insert_with(|| eps.value(&q) * naive_average(&abs, &q))
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

pub fn naive_dyadic_maximal(f: &GridFunction) -> Vec<f64> {
    naive_eps_maximal(f, &EpsilonCollection::constant(1.0).expect("valid constant"))
}

/// Outcome of checking a decomposition against brute force.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzCheck {
    pub disjoint: bool,
    /// Covered cells coincide with `{M_ε f > λ}`.
    pub union_exact: bool,
    /// `λ < ε_Q avg_Q|f| ≤ 2^n λ` for every cube, up to the tolerance.
    pub bounds: bool,
    /// Parents inside the root have `ε avg ≤ λ`.
    pub maximal: bool,
    /// Largest relative violation of the bounds (0 when none).
    pub max_violation: f64,
}

impl CzCheck {
    pub fn passed(&self) -> bool {
        self.disjoint && self.union_exact && self.bounds && self.maximal
    }
}

pub fn verify_cz(result: &CzResult, f: &GridFunction, eps: &EpsilonCollection, rel_tol: f64) -> Result<CzCheck> {
    let layout = f.layout();
    let lambda = result.lambda;
    let n = layout.dimension() as i32;
    let abs = f.abs();
    let cubes: Vec<&DyadicCube> = result.cubes.iter().map(|c| &c.cube).collect();

    let mut disjoint = true;
    for (a, q) in cubes.iter().enumerate() {
        for r in &cubes[a + 1..] {
            if q.relation(r)? != Relation::Disjoint {
                disjoint = false;
            }
        }
    }

    let superlevel: Vec<bool> = naive_eps_maximal(f, eps).into_iter().map(|m| m > lambda).collect();
    let covered: Vec<bool> = (0..layout.cell_count())
        .map(|i| {
            let cell = layout.cell_cube(i);
            cubes.iter().any(|q| q.contains(&cell))
        })
        .collect();

    let mut bounds = true;
    let mut maximal = true;
    let mut max_violation = 0.0f64;
    let upper = 2f64.powi(n) * lambda;
    for q in &cubes {
        let v = eps.value(q) * naive_average(&abs, q);
        let low = (lambda - v) / lambda.abs().max(f64::MIN_POSITIVE);
        let high = (v - upper) / upper.abs().max(f64::MIN_POSITIVE);
        max_violation = max_violation.max(low).max(high);
        if v <= lambda * (1.0 - rel_tol) || v > upper * (1.0 + rel_tol) {
            bounds = false;
        }
        let parent = q.parent();
        if layout.root().contains(&parent) {
            let pv = eps.value(&parent) * naive_average(&abs, &parent);
            if pv > lambda * (1.0 + rel_tol) {
                maximal = false;
            }
        }
    }
    Ok(CzCheck {
        disjoint,
        union_exact: superlevel == covered,
        bounds,
        maximal,
        max_violation,
    })
}

/// `Σ_Q ε_Q ⟨f, h_Q⟩ h_Q` by quadrature of every Haar function over every cell.
pub fn naive_haar_multiplier(f: &GridFunction, eps: &EpsilonCollection, mode: HaarMode) -> Vec<f64> {
    let layout = f.layout();
    let n = layout.dimension() as i32;
    let cell_vol = layout.cell_volume();
    let mut out = vec![0.0; layout.cell_count()];
    let cells: Vec<DyadicCube> = (0..layout.cell_count()).map(|i| layout.cell_cube(i)).collect();
    for d in 1..=layout.depth() {
        for idx in 0..layout.count(d) {
            let q = layout.cube(d, idx);
            let parent = q.parent();
            let inner = (1.0 - 2f64.powi(-n)) / q.volume().sqrt();
            let outer = -(2f64.powi(-n)) / q.volume().sqrt();
            let h: Vec<f64> = cells
                .iter()
                .map(|c| {
                    if q.contains(c) {
                        inner
                    } else if parent.contains(c) {
                        outer
                    } else {
                        0.0
                    }
                })
                .collect();
            let coefficient: f64 = cells
                .iter()
                .zip(f.values())
                .zip(&h)
                .filter(|((c, _), _)| mode == HaarMode::FullSupport || q.contains(c))
                .map(|((_, v), hv)| v * hv * cell_vol)
                .sum();
            let w = eps.value(&q) * coefficient;
            for (o, hv) in out.iter_mut().zip(&h) {
                *o += w * hv;
            }
        }
    }
    out
}

/// `Σ_{Q∈S} ε_Q avg_Q f χ_Q` by a double loop over cells and members.
pub fn naive_sparse_operator(f: &GridFunction, s: &SparseCollection, eps: &EpsilonCollection) -> Vec<f64> {
    let layout = f.layout();
    let weights: Vec<(DyadicCube, f64)> = s
        .cubes()
        .iter()
        .map(|q| (q.clone(), eps.value(q) * naive_average(f, q)))
        .collect();
    (0..layout.cell_count())
        .map(|i| {
            let cell = layout.cell_cube(i);
            weights.iter().filter(|(q, _)| q.contains(&cell)).map(|(_, w)| w).sum()
        })
        .collect()
}
