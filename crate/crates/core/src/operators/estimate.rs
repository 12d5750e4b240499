use serde::Serialize;

use crate::epsilon::{decay_profile, EpsilonCollection};
use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::grid::GridFunction;

use super::{
    build_sparse_stopping, dyadic_maximal, eps_maximal, haar_multiplier, sparse_operator, sparse_tail,
    HaarMode, SparseCollection,
};

/// Stopping ratio `2^{n+1}` used whenever a sparse family is built on demand.
fn default_ratio(f: &GridFunction) -> f64 {
    2f64.powi(f.layout().dimension() as i32 + 1)
}

fn stopping_family(f: &GridFunction) -> Result<SparseCollection> {
    build_sparse_stopping(f, default_ratio(f))
}

#[derive(Clone, Debug)]
pub enum Operator {
    Identity,
    DyadicMaximal,
    EpsMaximal(EpsilonCollection),
    Haar(EpsilonCollection, HaarMode),
    /// `S_ε` with the stopping family of `|f|`.
    Sparse(EpsilonCollection),
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Identity => "identity",
            Operator::DyadicMaximal => "md",
            Operator::EpsMaximal(_) => "meps",
            Operator::Haar(..) => "teps",
            Operator::Sparse(_) => "seps",
        }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        match self {
            Operator::Identity => Ok(f.clone()),
            Operator::DyadicMaximal => Ok(dyadic_maximal(f)),
            Operator::EpsMaximal(eps) => eps_maximal(f, eps),
            Operator::Haar(eps, mode) => haar_multiplier(f, eps, *mode),
            Operator::Sparse(eps) => {
                if f.is_zero() {
                    return Ok(f.clone());
                }
                sparse_operator(f, &stopping_family(f)?, eps)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpnormEstimate {
    /// `‖Tf‖ / ‖f‖` for each bank member, in bank order.
    pub ratios: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

/// Largest `‖T f‖_{p(·)} / ‖f‖_{p(·)}` over the bank.
pub fn opnorm_estimate(
    op: &Operator,
    p: &ExponentFunction,
    bank: &[GridFunction],
    tol: f64,
) -> Result<OpnormEstimate> {
    let first = bank.first().ok_or(Error::EmptyBank)?;
    let field = p.field(first.layout())?;
    let mut ratios = Vec::with_capacity(bank.len());
    for f in bank {
        let nf = field.norm(f, tol)?;
        if nf == 0.0 {
            return Err(Error::ZeroFunction);
        }
        ratios.push(field.norm(&op.apply(f)?, tol)? / nf);
    }
    let (argmax, max) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, r)| if r > best.1 { (i, r) } else { best });
    Ok(OpnormEstimate { ratios, max, argmax })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    /// `max |T_ε f| / S_ε|f|` over cells where `f ≠ 0`.
    pub ratio: f64,
    /// Cells with `S_ε|f| = 0` but `T_ε f ≠ 0`.
    pub failures: usize,
    pub sparse_cubes: usize,
}

impl DominationReport {
    pub fn is_finite(&self) -> bool {
        self.failures == 0 && self.ratio.is_finite()
    }
}

pub fn domination_ratio(f: &GridFunction, eps: &EpsilonCollection, mode: HaarMode) -> Result<DominationReport> {
    let abs = f.abs();
    let s = stopping_family(&abs)?;
    let t = haar_multiplier(f, eps, mode)?;
    let bound = sparse_operator(&abs, &s, eps)?;
    let mut ratio = 0.0f64;
    let mut failures = 0;
    for ((&v, &tv), &sv) in f.values().iter().zip(t.values()).zip(bound.values()) {
        if v == 0.0 {
            continue;
        }
        if sv == 0.0 {
            if tv != 0.0 {
                failures += 1;
            }
        } else {
            ratio = ratio.max(tv.abs() / sv);
        }
    }
    Ok(DominationReport { ratio, failures, sparse_cubes: s.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessProbe {
    /// `(N, e_N)` with `e_N = max_f ‖(S_ε - S_{ε,N}) f‖ / ‖f‖`.
    pub rows: Vec<(u32, f64)>,
    /// `sup_{ℓ(Q) < 2^{-N}} ε_Q` for `N = 0..=depth`.
    pub eps_profile: Vec<f64>,
    pub eps_decays: bool,
    pub nonincreasing: bool,
    /// Every `e_N` with `N` below the grid depth stays within 1% of `e_0`.
    pub stalled: bool,
}

pub fn compactness_probe(
    eps: &EpsilonCollection,
    p: &ExponentFunction,
    bank: &[GridFunction],
    n_range: &[u32],
    tol: f64,
) -> Result<CompactnessProbe> {
    let first = bank.first().ok_or(Error::EmptyBank)?;
    let layout = first.layout();
    let field = p.field(layout)?;
    let eps_profile = decay_profile(eps, layout.root(), layout.depth().max(1))?;
    let mut e = vec![0.0f64; n_range.len()];
    for f in bank {
        let nf = field.norm(f, tol)?;
        if nf == 0.0 {
            return Err(Error::ZeroFunction);
        }
        let s = stopping_family(&f.abs())?;
        for (slot, &n) in e.iter_mut().zip(n_range) {
            let tail = sparse_tail(f, &s, eps, n)?;
            *slot = slot.max(field.norm(&tail, tol)? / nf);
        }
    }
    let rows: Vec<(u32, f64)> = n_range.iter().copied().zip(e).collect();
    let nonincreasing = rows.windows(2).all(|w| w[0].0 > w[1].0 || w[1].1 <= w[0].1);
    let e0 = rows.iter().find(|r| r.0 == 0).map(|r| r.1);
    let stalled = match e0 {
        Some(e0) if e0 > 0.0 => rows
            .iter()
            .filter(|r| r.0 < layout.depth())
            .all(|r| (r.1 - e0).abs() <= 0.01 * e0),
        _ => false,
    };
    let eps_decays = eps_profile.last() < eps_profile.first();
    Ok(CompactnessProbe { rows, eps_profile, eps_decays, nonincreasing, stalled })
}
