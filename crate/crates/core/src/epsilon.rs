//! Collections `ε = {ε_Q}` of positive weights indexed by dyadic cubes.
//!
//! Every collection is bounded and is expected to satisfy the domination
//! property `P ⊆ Q ⇒ ε_P ≤ ε_Q`; [`validate_domination`] checks it on a
//! finite family.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::error::{Error, Result};
use crate::grid::Layout;

/// Serializable rule describing an ε collection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpsilonRule {
    Constant {
        c: f64,
    },
    /// Depends on the level only.
    LevelRule(LevelProfile),
    /// The one-dimensional construction around the origin: `ε_{Q_n} =
    /// 2^{-n} C^{(n+1)^a}` on `Q_n = [0, 2^{-n})`, the same value on the right
    /// half `Q'_n = [2^{-n-1}, 2^{-n})`, and `C` elsewhere, then minimised
    /// along the ancestor chain so that domination holds.
    Section5 {
        #[serde(rename = "C")]
        c: f64,
        a: f64,
    },
    Table {
        entries: Vec<(DyadicCube, f64)>,
        fallback: Box<EpsilonRule>,
    },
    Power {
        alpha: f64,
        inner: Box<EpsilonRule>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", rename_all = "snake_case")]
pub enum LevelProfile {
    /// `min(1, ℓ(Q))^{1/2}`.
    SqrtSide,
    /// `min(1, ℓ(Q))^{exponent}`.
    SidePower { exponent: f64 },
    /// `values[k - start_level]`, clamped at both ends.
    Table { start_level: i32, values: Vec<f64> },
}

impl LevelProfile {
    fn value(&self, level: i32) -> f64 {
        match self {
            LevelProfile::SqrtSide => 2f64.powf(-0.5 * level.max(0) as f64),
            LevelProfile::SidePower { exponent } => 2f64.powf(-exponent * level.max(0) as f64),
            LevelProfile::Table { start_level, values } => {
                let i = (level - start_level).clamp(0, values.len() as i32 - 1);
                values[i as usize]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonCollection {
    rule: EpsilonRule,
    table: Option<BTreeMap<DyadicCube, f64>>,
    fallback: Option<Box<EpsilonCollection>>,
    inner: Option<Box<EpsilonCollection>>,
    sup_bound: f64,
}

impl EpsilonCollection {
    pub fn new(rule: EpsilonRule) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidEpsilon(msg));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let mut out = EpsilonCollection {
            rule: rule.clone(),
            table: None,
            fallback: None,
            inner: None,
            sup_bound: 0.0,
        };
        out.sup_bound = match &rule {
            EpsilonRule::Constant { c } => {
                if !positive(*c) {
                    return bad(format!("constant must be positive, got {c}"));
                }
                *c
            }
            EpsilonRule::LevelRule(profile) => match profile {
                LevelProfile::SqrtSide => 1.0,
                LevelProfile::SidePower { exponent } => {
                    if !(exponent.is_finite() && *exponent >= 0.0) {
                        return bad(format!("side power must be >= 0, got {exponent}"));
                    }
                    1.0
                }
                LevelProfile::Table { values, .. } => {
                    if values.is_empty() || !values.iter().all(|&v| positive(v)) {
                        return bad("level table needs positive values".into());
                    }
                    values.iter().cloned().fold(0.0, f64::max)
                }
            },
            EpsilonRule::Section5 { c, a } => {
                if !(c.is_finite() && *c >= 1.0) {
                    return bad(format!("C must be >= 1, got {c}"));
                }
                if !(*a > 0.0 && *a < 1.0) {
                    return bad(format!("a must lie in (0, 1), got {a}"));
                }
                *c
            }
            EpsilonRule::Table { entries, fallback } => {
                let fallback = EpsilonCollection::new((**fallback).clone())?;
                let mut map = BTreeMap::new();
                for (q, v) in entries {
                    if !positive(*v) {
                        return bad(format!("table value for {q} must be positive"));
                    }
                    map.insert(q.clone(), *v);
                }
                let sup = map.values().cloned().fold(fallback.sup_bound, f64::max);
                out.table = Some(map);
                out.fallback = Some(Box::new(fallback));
                sup
            }
            EpsilonRule::Power { alpha, inner } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("power must lie in (0, 1], got {alpha}"));
                }
                let inner = EpsilonCollection::new((**inner).clone())?;
                let sup = inner.sup_bound.powf(*alpha);
                out.inner = Some(Box::new(inner));
                sup
            }
        };
        Ok(out)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(EpsilonRule::Constant { c })
    }

    pub fn sqrt_side() -> Self {
        Self::new(EpsilonRule::LevelRule(LevelProfile::SqrtSide)).expect("valid rule")
    }

    pub fn section5(c: f64, a: f64) -> Result<Self> {
        Self::new(EpsilonRule::Section5 { c, a })
    }

    pub fn rule(&self) -> &EpsilonRule {
        &self.rule
    }

    /// `‖ε‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// True when `ε_Q` depends on `level(Q)` alone.
    pub fn is_level_only(&self) -> bool {
        match &self.rule {
            EpsilonRule::Constant { .. } | EpsilonRule::LevelRule(_) => true,
            EpsilonRule::Power { .. } => self.inner.as_ref().is_some_and(|e| e.is_level_only()),
            EpsilonRule::Section5 { .. } | EpsilonRule::Table { .. } => false,
        }
    }

    /// Errors when the rule is tied to a specific dimension that differs
    /// from `dimension`.
    pub fn check_dimension(&self, dimension: usize) -> Result<()> {
        match &self.rule {
            EpsilonRule::Section5 { .. } if dimension != 1 => Err(Error::InvalidEpsilon(
                "the origin construction lives on the real line (dimension 1)".into(),
            )),
            EpsilonRule::Table { .. } => {
                if let Some(q) = self.table.as_ref().and_then(|t| t.keys().next()) {
                    if q.dimension() != dimension {
                        return Err(Error::DimensionMismatch {
                            left: q.dimension(),
                            right: dimension,
                        });
                    }
                }
                self.fallback.as_ref().map_or(Ok(()), |f| f.check_dimension(dimension))
            }
            EpsilonRule::Power { .. } => {
                self.inner.as_ref().map_or(Ok(()), |e| e.check_dimension(dimension))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, q: &DyadicCube) -> f64 {
        match &self.rule {
            EpsilonRule::Constant { c } => *c,
            EpsilonRule::LevelRule(profile) => profile.value(q.level()),
            EpsilonRule::Section5 { c, a } => section5_value(*c, *a, q),
            EpsilonRule::Table { .. } => match self.table.as_ref().and_then(|t| t.get(q)) {
                Some(v) => *v,
                None => self.fallback.as_ref().expect("table fallback").value(q),
            },
            EpsilonRule::Power { alpha, .. } => {
                self.inner.as_ref().expect("power inner").value(q).powf(*alpha)
            }
        }
    }

    /// `ε^α = {ε_Q^α}`.
    pub fn power(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidEpsilon(format!(
                "power must lie in (0, 1], got {alpha}"
            )));
        }
        let rule = match &self.rule {
            EpsilonRule::Constant { c } => EpsilonRule::Constant { c: c.powf(alpha) },
            EpsilonRule::Power { alpha: inner_alpha, inner } => EpsilonRule::Power {
                alpha: inner_alpha * alpha,
                inner: inner.clone(),
            },
            other => EpsilonRule::Power {
                alpha,
                inner: Box::new(other.clone()),
            },
        };
        Self::new(rule)
    }

    /// `ε_Q` for every cube of a layout tree, indexed `[d][index]`.
    pub fn field(&self, layout: &Layout) -> Result<Vec<Vec<f64>>> {
        self.check_dimension(layout.dimension())?;
        Ok((0..=layout.depth())
            .map(|d| {
                if self.is_level_only() {
                    vec![self.value(&layout.cube(d, 0)); layout.count(d)]
                } else {
                    (0..layout.count(d)).map(|i| self.value(&layout.cube(d, i))).collect()
                }
            })
            .collect())
    }
}

fn section5_base(c: f64, a: f64, level: i32, corner: i64) -> f64 {
    let origin = |n: i32| {
        if n == 0 {
            c
        } else {
            (-(n as f64) + ((n + 1) as f64).powf(a) * c.log2()).exp2()
        }
    };
    match (level, corner) {
        (k, 0) if k >= 0 => origin(k),
        (k, 1) if k >= 1 => origin(k - 1),
        _ => c,
    }
}

fn section5_value(c: f64, a: f64, q: &DyadicCube) -> f64 {
    if q.dimension() != 1 {
        return c;
    }
    let m = q.corner()[0];
    (0..=q.level().max(-1))
        .map(|j| {
            let shift = ((q.level() - j) as u32).min(63);
            section5_base(c, a, j, m >> shift)
        })
        .fold(c, f64::min)
}

/// Result of [`validate_domination`]: `witness` is a pair `(P, Q)` with
/// `P ⊊ Q` and `ε_P > ε_Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct DominationCheck {
    pub holds: bool,
    pub witness: Option<(DyadicCube, DyadicCube)>,
}

/// Checks `ε_P ≤ ε_Q` for every nested pair of the family. Comparing each
/// cube with its nearest strict ancestor inside the family suffices because
/// nested members form chains.
pub fn validate_domination(eps: &EpsilonCollection, family: &[DyadicCube]) -> DominationCheck {
    let values: HashMap<&DyadicCube, f64> = family.iter().map(|q| (q, eps.value(q))).collect();
    let Some(min_level) = family.iter().map(|q| q.level()).min() else {
        return DominationCheck { holds: true, witness: None };
    };
    for p in family {
        let mut level = p.level() - 1;
        while level >= min_level {
            let anc = p.ancestor(level);
            if let Some(&v) = values.get(&anc) {
                if values[p] > v {
                    return DominationCheck {
                        holds: false,
                        witness: Some((p.clone(), anc)),
                    };
                }
                break;
            }
            level -= 1;
        }
    }
    DominationCheck { holds: true, witness: None }
}

/// `s_N = max{ε_Q : Q ⊆ root, ℓ(Q) < 2^{-N} ℓ(root)}` for `N = 0..=n_max`.
///
/// Under domination the supremum over all deeper cubes is attained at the
/// first level below the cutoff, so only that level is scanned.
pub fn decay_profile(eps: &EpsilonCollection, root: &DyadicCube, n_max: u32) -> Result<Vec<f64>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    eps.check_dimension(root.dimension())?;
    (0..=n_max)
        .map(|n| {
            let layout = Layout::new(root.clone(), n + 1)?;
            let d = n + 1;
            Ok(if eps.is_level_only() {
                eps.value(&layout.cube(d, 0))
            } else {
                (0..layout.count(d))
                    .map(|i| eps.value(&layout.cube(d, i)))
                    .fold(0.0, f64::max)
            })
        })
        .collect()
}
