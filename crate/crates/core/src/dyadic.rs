//! Dyadic cubes `2^{-k} ([m_1, m_1 + 1) x ... x [m_n, m_n + 1))`.
//!
//! A cube is identified by its level `k` and integer corner `m`. All
//! containment logic works on the integers; floating point only appears when
//! a side length or volume is requested.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    level: i32,
    corner: Vec<i64>,
}

/// Outcome of comparing two dyadic cubes. Any two dyadic cubes are either
/// disjoint or nested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Disjoint,
    Equal,
    FirstInsideSecond,
    SecondInsideFirst,
}

impl DyadicCube {
    pub fn new(level: i32, corner: Vec<i64>) -> Self {
        assert!(!corner.is_empty(), "dyadic cube needs dimension >= 1");
        Self { level, corner }
    }

    /// The unit cube `[0, 1)^n`.
    pub fn unit(dimension: usize) -> Self {
        Self::new(0, vec![0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.corner.len()
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn corner(&self) -> &[i64] {
        &self.corner
    }

    pub fn side_length(&self) -> f64 {
        2f64.powi(-self.level)
    }

    /// `log2 |Q| = -n k`, exact.
    pub fn log2_volume(&self) -> f64 {
        -(self.dimension() as f64) * self.level as f64
    }

    pub fn volume(&self) -> f64 {
        2f64.powi(-(self.dimension() as i32) * self.level)
    }

    /// Lower-left corner in real coordinates.
    pub fn lower(&self) -> Vec<f64> {
        let side = self.side_length();
        self.corner.iter().map(|&m| m as f64 * side).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        let side = self.side_length();
        self.corner.iter().map(|&m| (m + 1) as f64 * side).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let side = self.side_length();
        self.corner
            .iter()
            .map(|&m| (m as f64 + 0.5) * side)
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        self.ancestor(self.level - 1)
    }

    /// The unique cube at `level` (which must not exceed `self.level`)
    /// containing `self`.
    pub fn ancestor(&self, level: i32) -> DyadicCube {
        assert!(level <= self.level, "ancestor level {level} below {}", self.level);
        let shift = (self.level - level).min(63) as u32;
        DyadicCube {
            level,
            corner: self.corner.iter().map(|&m| m >> shift).collect(),
        }
    }

    /// The `2^n` children in row-major order (first coordinate slowest).
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dimension();
        (0..1usize << n)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                corner: self
                    .corner
                    .iter()
                    .enumerate()
                    .map(|(j, &m)| 2 * m + ((bits >> (n - 1 - j)) & 1) as i64)
                    .collect(),
            })
            .collect()
    }

    pub fn relation(&self, other: &DyadicCube) -> Result<Relation> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                left: self.dimension(),
                right: other.dimension(),
            });
        }
        Ok(match self.level.cmp(&other.level) {
            std::cmp::Ordering::Equal if self.corner == other.corner => Relation::Equal,
            std::cmp::Ordering::Equal => Relation::Disjoint,
            std::cmp::Ordering::Greater if self.ancestor(other.level) == *other => {
                Relation::FirstInsideSecond
            }
            std::cmp::Ordering::Less if other.ancestor(self.level) == *self => {
                Relation::SecondInsideFirst
            }
            _ => Relation::Disjoint,
        })
    }

    /// `other ⊆ self`. Cubes of different dimension are never nested.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        matches!(
            self.relation(other),
            Ok(Relation::Equal | Relation::SecondInsideFirst)
        )
    }

    /// Half-open membership test for a real point.
    pub fn contains_point(&self, point: &[f64]) -> bool {
        point.len() == self.dimension()
            && *self == DyadicCube::at(point, self.level)
    }

    /// The unique level-`level` cube containing `point`; boundary points
    /// belong to the cube on their right.
    pub fn at(point: &[f64], level: i32) -> DyadicCube {
        let scale = 2f64.powi(level);
        DyadicCube::new(
            level,
            point.iter().map(|&x| (x * scale).floor() as i64).collect(),
        )
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, m) in self.corner.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DyadicCube({self})")
    }
}

impl FromStr for DyadicCube {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadToken(s.to_string());
        let (level, corner) = s.trim().split_once(':').ok_or_else(bad)?;
        let level = level.trim().parse::<i32>().map_err(|_| bad())?;
        let corner = corner
            .split(',')
            .map(|c| c.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        if corner.is_empty() {
            return Err(bad());
        }
        Ok(DyadicCube { level, corner })
    }
}

impl Serialize for DyadicCube {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicCube {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube(level: i32, corner: &[i64]) -> DyadicCube {
        DyadicCube::new(level, corner.to_vec())
    }

    #[test]
    fn parent_examples() {
        assert_eq!(cube(1, &[0]).parent(), cube(0, &[0]));
        assert_eq!(cube(1, &[1]).parent(), cube(0, &[0]));
        assert_eq!(cube(3, &[5, 2]).parent(), cube(2, &[2, 1]));
        // floor toward -inf
        assert_eq!(cube(1, &[-1]).parent(), cube(0, &[-1]));
    }

    #[test]
    fn children_examples() {
        assert_eq!(cube(0, &[0]).children(), vec![cube(1, &[0]), cube(1, &[1])]);
        let quads = cube(0, &[0, 0]).children();
        assert_eq!(
            quads,
            vec![
                cube(1, &[0, 0]),
                cube(1, &[0, 1]),
                cube(1, &[1, 0]),
                cube(1, &[1, 1])
            ]
        );
    }

    #[test]
    fn relation_examples() {
        let r = |a: DyadicCube, b: DyadicCube| a.relation(&b).unwrap();
        assert_eq!(r(cube(1, &[0]), cube(0, &[0])), Relation::FirstInsideSecond);
        assert_eq!(r(cube(1, &[0]), cube(1, &[1])), Relation::Disjoint);
        assert_eq!(r(cube(4, &[7]), cube(2, &[1])), Relation::FirstInsideSecond);
        assert_eq!(r(cube(2, &[1]), cube(4, &[7])), Relation::SecondInsideFirst);
        assert_eq!(r(cube(2, &[1]), cube(2, &[1])), Relation::Equal);
        assert!(matches!(
            cube(0, &[0]).relation(&cube(0, &[0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cube_at_examples() {
        assert_eq!(DyadicCube::at(&[0.3], 2), cube(2, &[1]));
        assert_eq!(DyadicCube::at(&[0.0], 7), cube(7, &[0]));
        assert_eq!(DyadicCube::at(&[0.0, 0.0], -3), cube(-3, &[0, 0]));
        // boundary belongs to the right-hand cube
        assert_eq!(DyadicCube::at(&[0.5], 1), cube(1, &[1]));
        assert_eq!(DyadicCube::at(&[-0.25], 2), cube(2, &[-1]));
    }

    #[test]
    fn tokens() {
        let q = cube(3, &[5, -2]);
        assert_eq!(q.to_string(), "3:5,-2");
        assert_eq!("3:5,-2".parse::<DyadicCube>().unwrap(), q);
        assert!("3".parse::<DyadicCube>().is_err());
        assert!("x:1".parse::<DyadicCube>().is_err());
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "\"3:5,-2\"");
        assert_eq!(serde_json::from_str::<DyadicCube>(&json).unwrap(), q);
    }

    #[test]
    fn measures() {
        let q = cube(2, &[1, 3]);
        assert_eq!(q.side_length(), 0.25);
        assert_eq!(q.volume(), 0.0625);
        assert_eq!(q.log2_volume(), -4.0);
        assert_eq!(cube(-2, &[0]).volume(), 4.0);
    }

    fn arb_cube(dim: usize) -> impl Strategy<Value = DyadicCube> {
        (-4i32..12, proptest::collection::vec(-40i64..40, dim))
            .prop_map(|(level, corner)| DyadicCube::new(level, corner))
    }

    /// Exact interval comparison on rationals scaled to a common level.
    fn brute_relation(a: &DyadicCube, b: &DyadicCube) -> Relation {
        let fine = a.level().max(b.level());
        let span = |q: &DyadicCube, j: usize| {
            let s = (fine - q.level()) as u32;
            let lo = (q.corner()[j] as i128) << s;
            (lo, lo + (1i128 << s))
        };
        let mut a_in_b = true;
        let mut b_in_a = true;
        for j in 0..a.dimension() {
            let (alo, ahi) = span(a, j);
            let (blo, bhi) = span(b, j);
            if ahi <= blo || bhi <= alo {
                return Relation::Disjoint;
            }
            a_in_b &= blo <= alo && ahi <= bhi;
            b_in_a &= alo <= blo && bhi <= ahi;
        }
        match (a_in_b, b_in_a) {
            (true, true) => Relation::Equal,
            (true, false) => Relation::FirstInsideSecond,
            (false, true) => Relation::SecondInsideFirst,
            (false, false) => unreachable!("dyadic cubes are nested or disjoint"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn relation_matches_interval_arithmetic(a in arb_cube(2), b in arb_cube(2)) {
            prop_assert_eq!(a.relation(&b).unwrap(), brute_relation(&a, &b));
        }
    }

    proptest! {
        #[test]
        fn children_round_trip(q in (1usize..4).prop_flat_map(arb_cube)) {
            let kids = q.children();
            prop_assert_eq!(kids.len(), 1 << q.dimension());
            for c in &kids {
                prop_assert_eq!(&c.parent(), &q);
                prop_assert!(q.contains(c));
            }
            let total: f64 = kids.iter().map(|c| c.volume()).sum();
            prop_assert_eq!(total, q.volume());
            for (i, a) in kids.iter().enumerate() {
                for b in &kids[i + 1..] {
                    prop_assert_eq!(a.relation(b).unwrap(), Relation::Disjoint);
                }
            }
        }

        #[test]
        fn point_lands_in_its_cube(x in -8.0f64..8.0, y in -8.0f64..8.0, level in -3i32..20) {
            let q = DyadicCube::at(&[x, y], level);
            let (lo, hi) = (q.lower(), q.upper());
            prop_assert!(lo[0] <= x && x < hi[0]);
            prop_assert!(lo[1] <= y && y < hi[1]);
            prop_assert!(q.contains_point(&[x, y]));
        }
    }
}
