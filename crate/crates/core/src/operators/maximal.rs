use crate::epsilon::EpsilonCollection;
use crate::error::Result;
use crate::grid::GridFunction;

use super::running_max;

/// `M^d f`: at each cell, the largest `avg_Q |f|` over dyadic `Q` between
/// the cell and the root.
pub fn dyadic_maximal(f: &GridFunction) -> GridFunction {
    let layout = f.layout();
    let abs = f.abs();
    let avgs: Vec<Vec<f64>> = (0..=layout.depth()).map(|d| abs.level_averages(d)).collect();
    GridFunction::from_values(layout.clone(), running_max(layout, &avgs))
        .expect("averages of finite values are finite")
}

/// `M_ε f`: at each cell, the largest `ε_Q avg_Q |f|` over its ancestors.
pub fn eps_maximal(f: &GridFunction, eps: &EpsilonCollection) -> Result<GridFunction> {
    let layout = f.layout();
    let field = eps.field(layout)?;
    let abs = f.abs();
    let vals: Vec<Vec<f64>> = (0..=layout.depth())
        .map(|d| {
            abs.level_averages(d)
                .into_iter()
                .zip(&field[d as usize])
                .map(|(a, e)| a * e)
                .collect()
        })
        .collect();
    GridFunction::from_values(layout.clone(), running_max(layout, &vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;
    use crate::grid::Layout;

    #[test]
    fn constant_and_half_indicator() {
        let layout = Layout::unit(1, 4).unwrap();
        let c = GridFunction::constant(layout.clone(), 3.0).unwrap();
        assert_eq!(dyadic_maximal(&c), c);
        let f = GridFunction::indicator(layout, &DyadicCube::new(1, vec![0])).unwrap();
        let m = dyadic_maximal(&f);
        assert_eq!(m.values(), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn unit_eps_reduces_to_dyadic() {
        let layout = Layout::unit(2, 3).unwrap();
        let f = GridFunction::from_sampler(layout, |x| (x[0] * 7.0).sin() - x[1]).unwrap();
        let one = EpsilonCollection::constant(1.0).unwrap();
        assert_eq!(eps_maximal(&f, &one).unwrap(), dyadic_maximal(&f));
        let two = EpsilonCollection::constant(2.0).unwrap();
        assert_eq!(eps_maximal(&f, &two).unwrap(), dyadic_maximal(&f).scale(2.0).unwrap());
    }
}
