use serde::Serialize;

use crate::dyadic::DyadicCube;
use crate::epsilon::EpsilonCollection;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::child_indices;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzCube {
    pub cube: DyadicCube,
    pub eps: f64,
    pub average: f64,
}

/// Maximal dyadic cubes with `ε_Q avg_Q|f| > λ`, in depth-first order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzResult {
    pub lambda: f64,
    pub cubes: Vec<CzCube>,
}

impl CzResult {
    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Local Calderón–Zygmund decomposition below the layout root. Requires
/// `λ > ε_root avg_root|f|`.
pub fn cz_decompose(f: &GridFunction, eps: &EpsilonCollection, lambda: f64) -> Result<CzResult> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite(format!("lambda = {lambda}")));
    }
    let layout = f.layout();
    let field = eps.field(layout)?;
    let abs = f.abs();
    let avgs: Vec<Vec<f64>> = (0..=layout.depth()).map(|d| abs.level_averages(d)).collect();
    let root_value = field[0][0] * avgs[0][0];
    if lambda <= root_value {
        return Err(Error::NotLocalizable { lambda, root_value });
    }

    let mut cubes = Vec::new();
    let mut stack = vec![(0u32, 0usize)];
    while let Some((d, i)) = stack.pop() {
        if d == layout.depth() {
            continue;
        }
        // reversed so that children pop in order
        for c in child_indices(layout, d, i).into_iter().rev() {
            let (e, a) = (field[d as usize + 1][c], avgs[d as usize + 1][c]);
            if e * a > lambda {
                cubes.push((d + 1, c, e, a));
            } else {
                stack.push((d + 1, c));
            }
        }
    }
    cubes.sort_by_key(|&(d, c, _, _)| layout.cube(d, c));
    Ok(CzResult {
        lambda,
        cubes: cubes
            .into_iter()
            .map(|(d, c, eps, average)| CzCube {
                cube: layout.cube(d, c),
                eps,
                average,
            })
            .collect(),
    })
}
