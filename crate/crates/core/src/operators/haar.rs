use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::epsilon::EpsilonCollection;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Layout};

use super::{accumulate, child_indices};

/// Integration domain of `⟨f, h_Q⟩`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaarMode {
    /// Integrate over the parent `Q̂`, the support of `h_Q`.
    #[default]
    FullSupport,
    /// Integrate over `Q` only.
    LiteralQ,
}

/// `h_Q = |Q|^{-1/2}(χ_Q - 2^{-n} χ_{Q̂})`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarFunction {
    cube: DyadicCube,
    parent: DyadicCube,
}

impl HaarFunction {
    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn parent(&self) -> &DyadicCube {
        &self.parent
    }

    /// Value on `Q`.
    pub fn inner_value(&self) -> f64 {
        let n = self.cube.dimension() as i32;
        (1.0 - 2f64.powi(-n)) / self.cube.volume().sqrt()
    }

    /// Value on `Q̂ \ Q`.
    pub fn outer_value(&self) -> f64 {
        let n = self.cube.dimension() as i32;
        -(2f64.powi(-n)) / self.cube.volume().sqrt()
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        if self.cube.contains_point(x) {
            self.inner_value()
        } else if self.parent.contains_point(x) {
            self.outer_value()
        } else {
            0.0
        }
    }

    pub fn to_grid(&self, layout: &Layout) -> Result<GridFunction> {
        layout.locate(&self.cube)?;
        let (inner, outer) = (self.inner_value(), self.outer_value());
        GridFunction::from_values(
            layout.clone(),
            (0..layout.cell_count())
                .map(|i| {
                    let cell = layout.cell_cube(i);
                    if self.cube.contains(&cell) {
                        inner
                    } else if self.parent.contains(&cell) {
                        outer
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }
}

/// The Haar function of `q`; its parent must lie inside `root`.
pub fn haar_function(q: &DyadicCube, root: &DyadicCube) -> Result<HaarFunction> {
    let parent = q.parent();
    if !root.contains(&parent) {
        return Err(Error::ParentEscapesRoot(q.clone()));
    }
    Ok(HaarFunction { cube: q.clone(), parent })
}

/// Average of `f` over `q`, using the enclosing cell when `q` is finer than
/// the grid.
fn average_any(f: &GridFunction, q: &DyadicCube) -> Result<f64> {
    let cell_level = f.layout().cell_level();
    if q.level() > cell_level {
        f.average(&q.ancestor(cell_level))
    } else {
        f.average(q)
    }
}

pub fn haar_coefficient(f: &GridFunction, q: &DyadicCube, mode: HaarMode) -> Result<f64> {
    let h = haar_function(q, f.layout().root())?;
    let avg_q = average_any(f, q)?;
    let scale = q.volume().sqrt();
    Ok(match mode {
        HaarMode::FullSupport => scale * (avg_q - average_any(f, h.parent())?),
        HaarMode::LiteralQ => {
            let n = q.dimension() as i32;
            scale * (1.0 - 2f64.powi(-n)) * avg_q
        }
    })
}

/// `T_ε f = Σ ε_Q ⟨f, h_Q⟩ h_Q` over cubes strictly below the root down to
/// cell level.
pub fn haar_multiplier(f: &GridFunction, eps: &EpsilonCollection, mode: HaarMode) -> Result<GridFunction> {
    let layout = f.layout();
    let field = eps.field(layout)?;
    let n = layout.dimension() as i32;
    let share = 2f64.powi(-n);
    let mut adds = vec![vec![0.0; 1]];
    let mut parent_avgs = f.level_averages(0);
    for d in 1..=layout.depth() {
        let avgs = f.level_averages(d);
        let mut add = vec![0.0; layout.count(d)];
        for (p, &parent_avg) in parent_avgs.iter().enumerate() {
            let children = child_indices(layout, d - 1, p);
            // w_Q = ε_Q ⟨f, h_Q⟩ |Q|^{-1/2}
            let weights: Vec<f64> = children
                .iter()
                .map(|&c| {
                    let e = field[d as usize][c];
                    match mode {
                        HaarMode::FullSupport => e * (avgs[c] - parent_avg),
                        HaarMode::LiteralQ => e * (1.0 - share) * avgs[c],
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            for (&c, w) in children.iter().zip(weights) {
                add[c] = w - share * total;
            }
        }
        adds.push(add);
        parent_avgs = avgs;
    }
    GridFunction::from_values(layout.clone(), accumulate(layout, &adds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(k: i32, m: i64) -> DyadicCube {
        DyadicCube::new(k, vec![m])
    }

    #[test]
    fn function_values() {
        let root = DyadicCube::unit(1);
        let h = haar_function(&cube(1, 0), &root).unwrap();
        let s = 2f64.sqrt() / 2.0;
        assert!((h.value_at(&[0.1]) - s).abs() < 1e-15);
        assert!((h.value_at(&[0.9]) + s).abs() < 1e-15);
        assert_eq!(h.value_at(&[1.5]), 0.0);
        assert!(haar_function(&root, &root).is_err());

        let layout = Layout::unit(2, 3).unwrap();
        let q = DyadicCube::new(2, vec![1, 2]);
        let g = haar_function(&q, layout.root()).unwrap().to_grid(&layout).unwrap();
        assert!(g.integral().abs() < 1e-15);
        let sq = g.pointwise_mul(&g).unwrap().integral();
        assert!((sq - 0.75).abs() < 1e-14);
    }

    #[test]
    fn coefficients() {
        let layout = Layout::unit(1, 3).unwrap();
        let left = GridFunction::indicator(layout.clone(), &cube(1, 0)).unwrap();
        let right = GridFunction::indicator(layout.clone(), &cube(1, 1)).unwrap();
        let q = cube(1, 0);
        let v = 2f64.sqrt() / 4.0;
        assert!((haar_coefficient(&left, &q, HaarMode::FullSupport).unwrap() - v).abs() < 1e-15);
        assert!((haar_coefficient(&left, &q, HaarMode::LiteralQ).unwrap() - v).abs() < 1e-15);
        assert!((haar_coefficient(&right, &q, HaarMode::FullSupport).unwrap() + v).abs() < 1e-15);
        assert_eq!(haar_coefficient(&right, &q, HaarMode::LiteralQ).unwrap(), 0.0);
        let c = GridFunction::constant(layout.clone(), 5.0).unwrap();
        assert_eq!(haar_coefficient(&c, &cube(2, 3), HaarMode::FullSupport).unwrap(), 0.0);
        assert_eq!(haar_coefficient(&c, &cube(7, 3), HaarMode::FullSupport).unwrap(), 0.0);
    }

    #[test]
    fn multiplier_identity() {
        let layout = Layout::unit(1, 4).unwrap();
        let one = EpsilonCollection::constant(1.0).unwrap();
        let f = GridFunction::from_sampler(layout.clone(), |x| if x[0] < 0.5 { 1.0 } else { -1.0 }).unwrap();
        let t = haar_multiplier(&f, &one, HaarMode::FullSupport).unwrap();
        assert!(t.max_abs_diff(&f).unwrap() < 1e-15);
        let g = GridFunction::from_sampler(layout, |x| x[0] * x[0]).unwrap();
        let t = haar_multiplier(&g, &one, HaarMode::FullSupport).unwrap();
        let expected = g.map(|v| v - g.integral()).unwrap();
        assert!(t.max_abs_diff(&expected).unwrap() < 1e-14);
    }
}
