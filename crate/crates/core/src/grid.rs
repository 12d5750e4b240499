//! Piecewise-constant functions on the cells of a dyadic root cube.
//!
//! A [`Layout`] fixes a root cube `Q0` and a depth `N`; the cells are the
//! `2^{nN}` subcubes at level `level(Q0) + N`, stored in row-major order
//! (first coordinate slowest). Every dyadic cube between the root and the
//! cells is addressed by `(d, index)` where `d` is the level offset below the
//! root and `index` is the row-major position among the `2^{nd}` cubes at
//! that offset.
//!
//! [`GridFunction`] keeps per-level block sums so that the average over any
//! dyadic subcube is a single lookup.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    root: DyadicCube,
    depth: u32,
}

impl Layout {
    pub fn new(root: DyadicCube, depth: u32) -> Result<Self> {
        let bits = root.dimension() as u64 * depth as u64;
        if bits > 40 {
            return Err(Error::InvalidArgument(format!(
                "grid with 2^{bits} cells is too large"
            )));
        }
        Ok(Self { root, depth })
    }

    /// `[0, 1)^n` refined `depth` times.
    pub fn unit(dimension: usize, depth: u32) -> Result<Self> {
        Self::new(DyadicCube::unit(dimension), depth)
    }

    pub fn root(&self) -> &DyadicCube {
        &self.root
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn dimension(&self) -> usize {
        self.root.dimension()
    }

    pub fn cell_level(&self) -> i32 {
        self.root.level() + self.depth as i32
    }

    /// Number of cubes at offset `d` below the root.
    pub fn count(&self, d: u32) -> usize {
        1usize << (self.dimension() as u32 * d)
    }

    pub fn cell_count(&self) -> usize {
        self.count(self.depth)
    }

    pub fn cell_volume(&self) -> f64 {
        2f64.powi(-(self.dimension() as i32) * self.cell_level())
    }

    /// Number of cells inside one cube at offset `d`, i.e. `2^{n(N-d)}`.
    pub fn cells_per_block(&self, d: u32) -> usize {
        1usize << (self.dimension() as u32 * (self.depth - d))
    }

    pub fn encode(&self, d: u32, local: &[u64]) -> usize {
        let n = self.dimension();
        local
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &c)| acc | ((c as usize) << (d as usize * (n - 1 - j))))
    }

    pub fn decode(&self, d: u32, index: usize) -> Vec<u64> {
        let n = self.dimension();
        let mask = (1usize << d) - 1;
        (0..n)
            .map(|j| ((index >> (d as usize * (n - 1 - j))) & mask) as u64)
            .collect()
    }

    pub fn parent_index(&self, d: u32, index: usize) -> usize {
        assert!(d > 0, "the root has no parent inside the layout");
        let n = self.dimension();
        let mask = (1usize << d) - 1;
        (0..n).fold(0usize, |acc, j| {
            let c = (index >> (d as usize * (n - 1 - j))) & mask;
            acc | ((c >> 1) << ((d - 1) as usize * (n - 1 - j)))
        })
    }

    /// Parent index of every cube at offset `d`.
    pub fn parent_map(&self, d: u32) -> Vec<usize> {
        (0..self.count(d)).map(|i| self.parent_index(d, i)).collect()
    }

    pub fn cube(&self, d: u32, index: usize) -> DyadicCube {
        let base = self.root.corner();
        let corner = self
            .decode(d, index)
            .into_iter()
            .zip(base)
            .map(|(c, &m)| (m << d) + c as i64)
            .collect();
        DyadicCube::new(self.root.level() + d as i32, corner)
    }

    pub fn cell_cube(&self, index: usize) -> DyadicCube {
        self.cube(self.depth, index)
    }

    pub fn cell_center(&self, index: usize) -> Vec<f64> {
        self.cell_cube(index).center()
    }

    /// Address of `cube` inside this layout.
    pub fn locate(&self, cube: &DyadicCube) -> Result<(u32, usize)> {
        if !self.root.contains(cube) {
            return Err(Error::OutsideRoot {
                cube: cube.clone(),
                root: self.root.clone(),
            });
        }
        if cube.level() > self.cell_level() {
            return Err(Error::BelowResolution {
                cube: cube.clone(),
                cell_level: self.cell_level(),
            });
        }
        let d = (cube.level() - self.root.level()) as u32;
        let local: Vec<u64> = cube
            .corner()
            .iter()
            .zip(self.root.corner())
            .map(|(&m, &r)| (m - (r << d)) as u64)
            .collect();
        Ok((d, self.encode(d, &local)))
    }

    /// Cell index of the cell containing `point`, if the point is in the root.
    pub fn cell_of_point(&self, point: &[f64]) -> Option<usize> {
        let cell = DyadicCube::at(point, self.cell_level());
        self.locate(&cell).ok().map(|(_, i)| i)
    }

    /// Cell indices covered by the cube at `(d, index)`.
    pub fn cells_in(&self, d: u32, index: usize) -> Vec<usize> {
        let shift = self.depth - d;
        let base: Vec<u64> = self.decode(d, index).into_iter().map(|c| c << shift).collect();
        let per_axis = 1u64 << shift;
        let n = self.dimension();
        let total = self.cells_per_block(d);
        let mut out = Vec::with_capacity(total);
        let mut offset = vec![0u64; n];
        for _ in 0..total {
            let local: Vec<u64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            out.push(self.encode(self.depth, &local));
            for j in (0..n).rev() {
                offset[j] += 1;
                if offset[j] < per_axis {
                    break;
                }
                offset[j] = 0;
            }
        }
        out
    }
}

/// A real function constant on the cells of a [`Layout`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    layout: Layout,
    /// `sums[d][i]` is the plain sum of the cell values inside cube `(d, i)`;
    /// `sums[depth]` holds the cell values themselves.
    sums: Vec<Vec<f64>>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.values() == other.values()
    }
}

impl GridFunction {
    pub fn from_values(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} cell values, got {}",
                layout.cell_count(),
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("cell {i} has value {v}")));
        }
        Ok(Self::build(layout, values))
    }

    fn build(layout: Layout, values: Vec<f64>) -> Self {
        let depth = layout.depth();
        let mut sums = vec![Vec::new(); depth as usize + 1];
        sums[depth as usize] = values;
        for d in (1..=depth).rev() {
            let mut coarse = vec![0.0; layout.count(d - 1)];
            for (i, v) in sums[d as usize].iter().enumerate() {
                coarse[layout.parent_index(d, i)] += v;
            }
            sums[d as usize - 1] = coarse;
        }
        Self { layout, sums }
    }

    pub fn constant(layout: Layout, c: f64) -> Result<Self> {
        let n = layout.cell_count();
        Self::from_values(layout, vec![c; n])
    }

    pub fn zeros(layout: Layout) -> Self {
        let n = layout.cell_count();
        Self::build(layout, vec![0.0; n])
    }

    /// Cell value is the sampler evaluated at the cell center.
    pub fn from_sampler(layout: Layout, mut sampler: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let values = (0..layout.cell_count())
            .map(|i| sampler(&layout.cell_center(i)))
            .collect();
        Self::from_values(layout, values)
    }

    /// `χ_Q` for a cube of the layout tree.
    pub fn indicator(layout: Layout, cube: &DyadicCube) -> Result<Self> {
        let (d, idx) = layout.locate(cube)?;
        let mut values = vec![0.0; layout.cell_count()];
        for c in layout.cells_in(d, idx) {
            values[c] = 1.0;
        }
        Ok(Self::build(layout, values))
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.sums[self.layout.depth() as usize]
    }

    pub fn into_values(mut self) -> Vec<f64> {
        self.sums.swap_remove(self.layout.depth() as usize)
    }

    pub fn level_sums(&self, d: u32) -> &[f64] {
        &self.sums[d as usize]
    }

    /// Average over the cube `(d, index)`.
    pub fn block_average(&self, d: u32, index: usize) -> f64 {
        // The divisor is a power of two, so this is an exact rescaling.
        self.sums[d as usize][index] / self.layout.cells_per_block(d) as f64
    }

    pub fn level_averages(&self, d: u32) -> Vec<f64> {
        let k = self.layout.cells_per_block(d) as f64;
        self.sums[d as usize].iter().map(|s| s / k).collect()
    }

    pub fn average(&self, cube: &DyadicCube) -> Result<f64> {
        let (d, idx) = self.layout.locate(cube)?;
        Ok(self.block_average(d, idx))
    }

    pub fn integral(&self) -> f64 {
        self.sums[0][0] * self.layout.cell_volume()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values().iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.layout.clone(), self.values().iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self::build(
            self.layout.clone(),
            self.values().iter().map(|v| v.abs()).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        let values = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(self.layout.clone(), values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(self
            .values()
            .iter()
            .zip(other.values())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            dimension: self.layout.dimension(),
            root: self.layout.root().clone(),
            depth: self.layout.depth(),
        }
    }

    /// Writes `cell_index,value` rows under a header line.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["cell_index", "value"])?;
        for (i, v) in self.values().iter().enumerate() {
            w.write_record([i.to_string(), fmt_f64(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Cells missing from the CSV are zero.
    pub fn read_csv<R: Read>(header: &GridHeader, reader: R) -> Result<Self> {
        let layout = header.layout()?;
        let mut values = vec![0.0; layout.cell_count()];
        let mut r = csv::Reader::from_reader(reader);
        for record in r.records() {
            let record = record?;
            let parse_err = || Error::InvalidArgument(format!("bad csv row {record:?}"));
            let idx: usize = record.get(0).ok_or_else(parse_err)?.trim().parse().map_err(|_| parse_err())?;
            let v: f64 = record.get(1).ok_or_else(parse_err)?.trim().parse().map_err(|_| parse_err())?;
            let slot = values
                .get_mut(idx)
                .ok_or_else(|| Error::InvalidArgument(format!("cell index {idx} out of range")))?;
            *slot = v;
        }
        Self::from_values(layout, values)
    }

    /// Writes `<stem>.json` (header) and `<stem>.csv` (values).
    pub fn save(&self, stem: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.header())?;
        std::fs::write(stem.with_extension("json"), json + "\n")?;
        let file = std::fs::File::create(stem.with_extension("csv"))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let header: GridHeader =
            serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let file = std::fs::File::open(stem.with_extension("csv"))?;
        Self::read_csv(&header, std::io::BufReader::new(file))
    }
}

/// JSON header accompanying a CSV-encoded [`GridFunction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub dimension: usize,
    pub root: DyadicCube,
    pub depth: u32,
}

impl GridHeader {
    pub fn layout(&self) -> Result<Layout> {
        if self.root.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                left: self.dimension,
                right: self.root.dimension(),
            });
        }
        Layout::new(self.root.clone(), self.depth)
    }
}

/// Shortest round-trip formatting used by every CSV writer in the crate.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lcg_values(n: usize, mut state: u64) -> Vec<f64> {
        (0..n)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    fn naive_average(f: &GridFunction, q: &DyadicCube) -> f64 {
        let layout = f.layout();
        let mut acc = 0.0;
        for (i, v) in f.values().iter().enumerate() {
            if q.contains(&layout.cell_cube(i)) {
                acc += v * layout.cell_volume();
            }
        }
        acc / q.volume()
    }

    #[test]
    fn index_round_trip() {
        let layout = Layout::new(DyadicCube::new(1, vec![3, -2, 0]), 3).unwrap();
        for d in 0..=3 {
            for i in 0..layout.count(d) {
                let q = layout.cube(d, i);
                assert_eq!(layout.locate(&q).unwrap(), (d, i));
                if d > 0 {
                    assert_eq!(layout.cube(d - 1, layout.parent_index(d, i)), q.parent());
                }
            }
        }
    }

    #[test]
    fn row_major_order() {
        let layout = Layout::unit(2, 1).unwrap();
        let cells: Vec<_> = (0..4).map(|i| layout.cell_cube(i)).collect();
        assert_eq!(cells, DyadicCube::unit(2).children());
        assert_eq!(layout.cell_of_point(&[0.75, 0.25]), Some(2));
        assert_eq!(layout.cell_of_point(&[1.0, 0.25]), None);
    }

    #[test]
    fn constant_average() {
        let layout = Layout::unit(2, 3).unwrap();
        let f = GridFunction::constant(layout.clone(), 2.5).unwrap();
        for d in 0..=3 {
            for i in 0..layout.count(d) {
                assert_eq!(f.block_average(d, i), 2.5);
            }
        }
    }

    #[test]
    fn half_indicator_average() {
        let f = GridFunction::from_values(Layout::unit(1, 1).unwrap(), vec![1.0, 0.0]).unwrap();
        assert_eq!(f.average(&DyadicCube::unit(1)).unwrap(), 0.5);
    }

    #[test]
    fn average_errors() {
        let f = GridFunction::zeros(Layout::unit(1, 2).unwrap());
        assert!(matches!(
            f.average(&DyadicCube::new(0, vec![1])),
            Err(Error::OutsideRoot { .. })
        ));
        assert!(matches!(
            f.average(&DyadicCube::new(3, vec![0])),
            Err(Error::BelowResolution { .. })
        ));
    }

    #[test]
    fn averages_match_naive_loop() {
        for (dim, depth) in [(1usize, 7u32), (2, 4), (3, 2)] {
            let layout = Layout::new(DyadicCube::new(-1, vec![1; dim]), depth).unwrap();
            let f = GridFunction::from_values(layout.clone(), lcg_values(layout.cell_count(), 7))
                .unwrap();
            for d in 0..=depth {
                for i in 0..layout.count(d) {
                    let q = layout.cube(d, i);
                    let fast = f.average(&q).unwrap();
                    let slow = naive_average(&f, &q);
                    assert!((fast - slow).abs() <= 1e-13 * slow.abs().max(1.0), "{q}");
                }
            }
        }
    }

    #[test]
    fn plumbing() {
        let layout = Layout::unit(1, 1).unwrap();
        let chi = GridFunction::constant(layout.clone(), 1.0).unwrap();
        assert_eq!(chi.integral(), 1.0);
        let g = GridFunction::from_values(layout.clone(), vec![-1.0, 2.0]).unwrap();
        assert_eq!(g.abs().values(), &[1.0, 2.0]);
        assert_eq!(g.scale(-2.0).unwrap().values(), &[2.0, -4.0]);
        assert_eq!(g.add(&chi).unwrap().values(), &[0.0, 3.0]);
        assert_eq!(g.pointwise_mul(&g).unwrap().values(), &[1.0, 4.0]);
        let other = GridFunction::zeros(Layout::unit(1, 2).unwrap());
        assert!(matches!(g.add(&other), Err(Error::LayoutMismatch)));
        assert!(GridFunction::from_values(layout, vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn pairing_matches_naive_loop() {
        let layout = Layout::unit(2, 4).unwrap();
        let f = GridFunction::from_values(layout.clone(), lcg_values(256, 1)).unwrap();
        let g = GridFunction::from_values(layout.clone(), lcg_values(256, 2)).unwrap();
        let fast = f.pointwise_mul(&g).unwrap().integral();
        let slow: f64 = (0..256)
            .map(|i| f.values()[i] * g.values()[i] * layout.cell_volume())
            .sum();
        assert!((fast - slow).abs() <= 1e-13 * slow.abs().max(1.0));
    }

    #[test]
    fn sampler_uses_cell_centers() {
        let layout = Layout::unit(1, 2).unwrap();
        let f = GridFunction::from_sampler(layout, |x| x[0]).unwrap();
        assert_eq!(f.values(), &[0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn csv_round_trip() {
        let layout = Layout::new(DyadicCube::new(2, vec![1, 1]), 2).unwrap();
        let f = GridFunction::from_values(layout, lcg_values(16, 3)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cell_index,value\n0,"));
        let back = GridFunction::read_csv(&f.header(), buf.as_slice()).unwrap();
        assert_eq!(back, f);

        let dir = tempdir();
        let stem = dir.join("f");
        f.save(&stem).unwrap();
        assert_eq!(GridFunction::load(&stem).unwrap(), f);
        let header: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
                .unwrap();
        assert_eq!(header["root"], "2:1,1");
        assert_eq!(header["dimension"], 2);
        assert_eq!(header["depth"], 2);
        std::fs::remove_dir_all(dir).unwrap();
    }

    fn tempdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("epsdyadic-grid-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    proptest! {
        #[test]
        fn tree_consistency(seed in any::<u64>(), dim in 1usize..3) {
            let depth = if dim == 1 { 6 } else { 3 };
            let layout = Layout::unit(dim, depth).unwrap();
            let f = GridFunction::from_values(layout.clone(), lcg_values(layout.cell_count(), seed)).unwrap();
            for d in 0..depth {
                for i in 0..layout.count(d) {
                    let q = layout.cube(d, i);
                    let whole = f.average(&q).unwrap() * q.volume();
                    let parts: f64 = q.children().iter().map(|c| f.average(c).unwrap() * c.volume()).sum();
                    prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(q.volume()));
                }
            }
            let rebuilt = GridFunction::from_values(layout.clone(), f.values().to_vec()).unwrap();
            for d in 0..=depth {
                prop_assert_eq!(rebuilt.level_sums(d), f.level_sums(d));
            }
        }
    }
}
