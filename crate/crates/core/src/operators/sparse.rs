use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::epsilon::EpsilonCollection;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::{accumulate, child_indices};

/// A finite family of dyadic cubes inside a root, kept sorted and free of
/// duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseCollection {
    root: DyadicCube,
    cubes: Vec<DyadicCube>,
}

impl SparseCollection {
    pub fn new(root: DyadicCube, cubes: impl IntoIterator<Item = DyadicCube>) -> Result<Self> {
        let set: BTreeSet<DyadicCube> = cubes.into_iter().collect();
        for q in &set {
            if !root.contains(q) {
                return Err(Error::OutsideRoot { cube: q.clone(), root });
            }
        }
        Ok(Self { root, cubes: set.into_iter().collect() })
    }

    pub fn root(&self) -> &DyadicCube {
        &self.root
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.cubes.binary_search(q).is_ok()
    }

    /// The smallest member strictly containing `q`, if any.
    pub fn nearest_strict_ancestor(&self, q: &DyadicCube) -> Option<DyadicCube> {
        (self.root.level()..q.level())
            .rev()
            .map(|k| q.ancestor(k))
            .find(|a| self.contains(a))
    }

    /// `η_S(Q)` for every member: the maximal members strictly inside `Q`.
    pub fn eta(&self) -> BTreeMap<DyadicCube, Vec<DyadicCube>> {
        let mut out: BTreeMap<DyadicCube, Vec<DyadicCube>> =
            self.cubes.iter().map(|q| (q.clone(), Vec::new())).collect();
        for q in &self.cubes {
            if let Some(a) = self.nearest_strict_ancestor(q) {
                out.get_mut(&a).expect("ancestor is a member").push(q.clone());
            }
        }
        out
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseCheck {
    /// `Σ_{P∈η(Q)} |P| ≤ ½|Q|` for every member, in exact arithmetic.
    pub packing: bool,
    /// `Σ_Q |E_Q|` equals the measure of the union, so the `E_Q` are disjoint.
    pub disjoint_remainders: bool,
    pub max_ratio: f64,
    pub worst: Option<DyadicCube>,
}

impl SparseCheck {
    pub fn holds(&self) -> bool {
        self.packing && self.disjoint_remainders
    }
}

pub fn verify_sparse(s: &SparseCollection) -> SparseCheck {
    let n = s.root.dimension();
    let finest = s.cubes.iter().map(|q| q.level()).max().unwrap_or(s.root.level());
    // volumes in units of 2^{-n·finest}
    let vol = |q: &DyadicCube| BigUint::from(1u8) << (n * (finest - q.level()) as usize);
    let eta = s.eta();
    let mut packing = true;
    let mut max_ratio = 0.0f64;
    let mut worst = None;
    let mut remainder_total = BigUint::from(0u8);
    for (q, kids) in &eta {
        let inside: BigUint = kids.iter().map(vol).sum();
        let vq = vol(q);
        if inside.clone() * 2u8 > vq {
            packing = false;
        }
        let ratio: f64 = kids
            .iter()
            .map(|p| 2f64.powi(-(n as i32) * (p.level() - q.level())))
            .sum();
        if worst.is_none() || ratio > max_ratio {
            max_ratio = ratio;
            worst = Some(q.clone());
        }
        remainder_total += vq - inside;
    }
    let union: BigUint = s
        .cubes
        .iter()
        .filter(|q| s.nearest_strict_ancestor(q).is_none())
        .map(vol)
        .sum();
    SparseCheck {
        packing,
        disjoint_remainders: remainder_total == union,
        max_ratio,
        worst,
    }
}

/// Stopping cubes of `|f|`: the root, then recursively the maximal subcubes
/// whose average exceeds `ratio` times that of the enclosing stopping cube.
pub fn build_sparse_stopping(f: &GridFunction, ratio: f64) -> Result<SparseCollection> {
    let layout = f.layout();
    let minimum = 2f64.powi(layout.dimension() as i32 + 1);
    if ratio.is_nan() || ratio < minimum {
        return Err(Error::InvalidArgument(format!("stopping ratio must be at least {minimum}, got {ratio}")));
    }
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let abs = f.abs();
    let avgs: Vec<Vec<f64>> = (0..=layout.depth()).map(|d| abs.level_averages(d)).collect();
    let mut selected = vec![(0u32, 0usize)];
    let mut tops = vec![(0u32, 0usize)];
    while let Some((d0, i0)) = tops.pop() {
        let threshold = ratio * avgs[d0 as usize][i0];
        let mut stack = vec![(d0, i0)];
        while let Some((d, i)) = stack.pop() {
            if d == layout.depth() {
                continue;
            }
            for c in child_indices(layout, d, i) {
                if avgs[d as usize + 1][c] > threshold {
                    selected.push((d + 1, c));
                    tops.push((d + 1, c));
                } else {
                    stack.push((d + 1, c));
                }
            }
        }
    }
    SparseCollection::new(
        layout.root().clone(),
        selected.into_iter().map(|(d, i)| layout.cube(d, i)),
    )
}

fn sparse_filtered(
    f: &GridFunction,
    s: &SparseCollection,
    eps: &EpsilonCollection,
    keep: impl Fn(&DyadicCube) -> bool,
) -> Result<GridFunction> {
    let layout = f.layout();
    eps.check_dimension(layout.dimension())?;
    let mut adds: Vec<Vec<f64>> = (0..=layout.depth()).map(|d| vec![0.0; layout.count(d)]).collect();
    for q in s.cubes().iter().filter(|q| keep(q)) {
        let (d, i) = layout.locate(q)?;
        adds[d as usize][i] += eps.value(q) * f.block_average(d, i);
    }
    GridFunction::from_values(layout.clone(), accumulate(layout, &adds))
}

/// `S_ε f = Σ_{Q∈S} ε_Q avg_Q f χ_Q`.
pub fn sparse_operator(f: &GridFunction, s: &SparseCollection, eps: &EpsilonCollection) -> Result<GridFunction> {
    sparse_filtered(f, s, eps, |_| true)
}

/// `S_{ε,N} f`: only cubes with `2^{-N} ≤ ℓ(Q) ≤ 2^N`.
pub fn truncated_sparse(
    f: &GridFunction,
    s: &SparseCollection,
    eps: &EpsilonCollection,
    n: u32,
) -> Result<GridFunction> {
    let n = n as i32;
    sparse_filtered(f, s, eps, |q| (-n..=n).contains(&q.level()))
}

/// `(S_ε - S_{ε,N}) f`, summed directly over the excluded cubes.
pub fn sparse_tail(
    f: &GridFunction,
    s: &SparseCollection,
    eps: &EpsilonCollection,
    n: u32,
) -> Result<GridFunction> {
    let n = n as i32;
    sparse_filtered(f, s, eps, |q| !(-n..=n).contains(&q.level()))
}
