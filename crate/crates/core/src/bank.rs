//! Reproducible test-function banks.
//!
//! Randomness comes from a 64-bit linear congruential generator
//! `s ← 6364136223846793005·s + 1442695040888963407 (mod 2^64)` whose output
//! is the top 32 bits of the new state, so banks can be regenerated in any
//! language.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Layout};

#[derive(Clone, Debug)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub const MULTIPLIER: u64 = 6364136223846793005;
    pub const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = self.state.wrapping_mul(Self::MULTIPLIER).wrapping_add(Self::INCREMENT);
        (self.state >> 32) as u32
    }

    /// Uniform on `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / 4294967296.0
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Integer in `0..n` by multiply-shift.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0 && n <= 1 << 32, "range must be in 1..=2^32");
        (self.next_u32() as u64 * n) >> 32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankKind {
    /// Indicators of random dyadic cubes between the root and the cells.
    Indicators,
    /// Independent cell values uniform on `[-1, 1)`.
    RandomCells,
    /// `±1` on the children of a random cube, with mean zero on the cube.
    HaarLike,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankSpec {
    pub kind: BankKind,
    pub count: usize,
    pub seed: u64,
}

impl BankSpec {
    pub fn generate(&self, layout: &Layout) -> Result<Vec<GridFunction>> {
        generate_bank(layout, self.kind, self.count, self.seed)
    }
}

fn random_cube(layout: &Layout, rng: &mut Lcg, max_offset: u32) -> (u32, usize) {
    let d = rng.below(max_offset as u64 + 1) as u32;
    let i = rng.below(layout.count(d) as u64) as usize;
    (d, i)
}

pub fn generate_bank(layout: &Layout, kind: BankKind, count: usize, seed: u64) -> Result<Vec<GridFunction>> {
    if count == 0 {
        return Err(Error::EmptyBank);
    }
    if kind == BankKind::HaarLike && layout.depth() == 0 {
        return Err(Error::InvalidArgument("haar-like banks need depth >= 1".into()));
    }
    let mut rng = Lcg::new(seed);
    (0..count)
        .map(|_| match kind {
            BankKind::Indicators => {
                let (d, i) = random_cube(layout, &mut rng, layout.depth());
                GridFunction::indicator(layout.clone(), &layout.cube(d, i))
            }
            BankKind::RandomCells => GridFunction::from_values(
                layout.clone(),
                (0..layout.cell_count()).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            ),
            BankKind::HaarLike => {
                let (d, i) = random_cube(layout, &mut rng, layout.depth() - 1);
                let mut values = vec![0.0; layout.cell_count()];
                for (t, c) in crate::operators::child_indices(layout, d, i).into_iter().enumerate() {
                    let sign = if t.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    for cell in layout.cells_in(d + 1, c) {
                        values[cell] = sign;
                    }
                }
                GridFunction::from_values(layout.clone(), values)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcg_stream() {
        let mut rng = Lcg::new(0);
        // state after one step is the increment itself
        assert_eq!(rng.next_u32(), (Lcg::INCREMENT >> 32) as u32);
        let mut a = Lcg::new(42);
        let mut b = Lcg::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
        let mut r = Lcg::new(7);
        for _ in 0..1000 {
            let v = r.uniform(-1.0, 1.0);
            assert!((-1.0..1.0).contains(&v));
            assert!(r.below(5) < 5);
        }
    }

    #[test]
    fn banks() {
        let layout = Layout::unit(2, 3).unwrap();
        for kind in [BankKind::Indicators, BankKind::RandomCells, BankKind::HaarLike] {
            let a = generate_bank(&layout, kind, 20, 42).unwrap();
            assert_eq!(a, generate_bank(&layout, kind, 20, 42).unwrap());
            assert_eq!(a.len(), 20);
            assert!(a.iter().all(|f| !f.is_zero()));
            if kind == BankKind::HaarLike {
                assert!(a.iter().all(|f| f.integral().abs() < 1e-15));
            }
        }
        assert!(generate_bank(&layout, BankKind::Indicators, 0, 1).is_err());
        let spec: BankSpec = serde_json::from_str(r#"{"kind":"random_cells","count":3,"seed":9}"#).unwrap();
        assert_eq!(spec.generate(&layout).unwrap().len(), 3);
    }
}
