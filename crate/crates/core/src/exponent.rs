//! Exponent functions `p(·)`, the modular `ρ(f) = ∫|f|^{p(x)}dx`, the
//! Luxemburg norm, and checkers for the continuity conditions on `p(·)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::epsilon::EpsilonCollection;
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, GridFunction, Layout};

/// Default bisection tolerance for [`ExponentFunction::norm`].
pub const DEFAULT_NORM_TOL: f64 = 1e-10;
/// Default absolute slack for inequality checks.
pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentDescriptor {
    Constant {
        p: f64,
    },
    /// `p(x) = 2` for `x ≤ 0`, `2 + (log2(2/x))^{-a}` on `(0, 1)`, `3` for
    /// `x ≥ 1`; one-dimensional, `0 < a < 1`.
    Section5 {
        a: f64,
    },
    /// Cell values on the domain root refined `depth` times.
    PiecewiseGrid {
        depth: u32,
        values: Vec<f64>,
    },
    /// One-dimensional step function: `knots[i].1` on `[knots[i].0,
    /// knots[i+1].0)`, with the first value extended to the left.
    Table {
        knots: Vec<(f64, f64)>,
    },
    /// Pointwise conjugate of a closed-form exponent.
    Conjugate {
        of: Box<ExponentDescriptor>,
    },
}

#[derive(Clone, Debug)]
enum Kind {
    Constant(f64),
    Section5(f64),
    Grid(GridFunction),
    Table(Vec<(f64, f64)>),
    Conjugate(Box<Kind>),
}

pub fn conjugate_value(p: f64) -> f64 {
    p / (p - 1.0)
}

fn section5_at(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        2.0
    } else if x >= 1.0 {
        3.0
    } else {
        2.0 + (2.0 / x).log2().powf(-a)
    }
}

impl Kind {
    fn from_descriptor(desc: &ExponentDescriptor, root: &DyadicCube) -> Result<Kind> {
        let bad = |m: String| Err(Error::InvalidExponent(m));
        Ok(match desc {
            ExponentDescriptor::Constant { p } => Kind::Constant(*p),
            ExponentDescriptor::Section5 { a } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return bad(format!("a must lie in (0, 1), got {a}"));
                }
                if root.dimension() != 1 {
                    return bad("the origin exponent is one-dimensional".into());
                }
                Kind::Section5(*a)
            }
            ExponentDescriptor::PiecewiseGrid { depth, values } => {
                let layout = Layout::new(root.clone(), *depth)?;
                Kind::Grid(GridFunction::from_values(layout, values.clone())?)
            }
            ExponentDescriptor::Table { knots } => {
                if root.dimension() != 1 {
                    return bad("step tables are one-dimensional".into());
                }
                if knots.is_empty() || knots.windows(2).any(|w| w[0].0.partial_cmp(&w[1].0) != Some(std::cmp::Ordering::Less)) {
                    return bad("table knots must be non-empty and strictly increasing".into());
                }
                Kind::Table(knots.clone())
            }
            ExponentDescriptor::Conjugate { of } => Kind::from_descriptor(of, root)?.conjugate(),
        })
    }

    fn descriptor(&self) -> ExponentDescriptor {
        match self {
            Kind::Constant(p) => ExponentDescriptor::Constant { p: *p },
            Kind::Section5(a) => ExponentDescriptor::Section5 { a: *a },
            Kind::Grid(g) => ExponentDescriptor::PiecewiseGrid {
                depth: g.layout().depth(),
                values: g.values().to_vec(),
            },
            Kind::Table(knots) => ExponentDescriptor::Table { knots: knots.clone() },
            Kind::Conjugate(inner) => ExponentDescriptor::Conjugate {
                of: Box::new(inner.descriptor()),
            },
        }
    }

    fn conjugate(self) -> Kind {
        match self {
            Kind::Constant(p) => Kind::Constant(conjugate_value(p)),
            Kind::Grid(g) => Kind::Grid(g.map(conjugate_value).expect("finite conjugate")),
            Kind::Table(knots) => {
                Kind::Table(knots.into_iter().map(|(x, p)| (x, conjugate_value(p))).collect())
            }
            Kind::Conjugate(inner) => *inner,
            closed @ Kind::Section5(_) => Kind::Conjugate(Box::new(closed)),
        }
    }

    fn value_at(&self, root: &DyadicCube, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Kind::Constant(p) => *p,
            Kind::Section5(a) => section5_at(*a, x[0]),
            Kind::Grid(g) => {
                let cell = g.layout().cell_of_point(x).ok_or_else(|| Error::OutsideRoot {
                    cube: DyadicCube::at(x, g.layout().cell_level()),
                    root: root.clone(),
                })?;
                g.values()[cell]
            }
            Kind::Table(knots) => {
                let i = knots.partition_point(|k| k.0 <= x[0]);
                knots[i.saturating_sub(1)].1
            }
            Kind::Conjugate(inner) => conjugate_value(inner.value_at(root, x)?),
        })
    }

    fn range(&self, q: &DyadicCube) -> Result<(f64, f64)> {
        Ok(match self {
            Kind::Constant(p) => (*p, *p),
            // nondecreasing and continuous: extremes at the endpoints
            Kind::Section5(a) => (
                section5_at(*a, q.lower()[0]),
                section5_at(*a, q.upper()[0]),
            ),
            Kind::Grid(g) => {
                let (d, idx) = g.layout().locate(q)?;
                g.layout()
                    .cells_in(d, idx)
                    .into_iter()
                    .map(|c| g.values()[c])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            }
            Kind::Table(knots) => {
                let (l, r) = (q.lower()[0], q.upper()[0]);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (i, &(_, p)) in knots.iter().enumerate() {
                    let start = if i == 0 { f64::NEG_INFINITY } else { knots[i].0 };
                    let end = knots.get(i + 1).map_or(f64::INFINITY, |k| k.0);
                    if start < r && end > l {
                        lo = lo.min(p);
                        hi = hi.max(p);
                    }
                }
                (lo, hi)
            }
            Kind::Conjugate(inner) => {
                let (lo, hi) = inner.range(q)?;
                (conjugate_value(hi), conjugate_value(lo))
            }
        })
    }
}

/// An exponent function on a dyadic domain root with `1 < p₋ ≤ p₊ < ∞`.
#[derive(Clone, Debug)]
pub struct ExponentFunction {
    kind: Kind,
    root: DyadicCube,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentFunction {
    pub fn new(descriptor: &ExponentDescriptor, root: DyadicCube) -> Result<Self> {
        let kind = Kind::from_descriptor(descriptor, &root)?;
        Self::from_kind(kind, root)
    }

    fn from_kind(kind: Kind, root: DyadicCube) -> Result<Self> {
        let (p_minus, p_plus) = kind.range(&root)?;
        if !(p_minus > 1.0 && p_minus <= p_plus && p_plus.is_finite()) {
            return Err(Error::InvalidExponent(format!(
                "need 1 < p- <= p+ < inf, got p- = {p_minus}, p+ = {p_plus}"
            )));
        }
        Ok(Self { kind, root, p_minus, p_plus })
    }

    pub fn constant(p: f64, root: DyadicCube) -> Result<Self> {
        Self::new(&ExponentDescriptor::Constant { p }, root)
    }

    /// The origin exponent on `[0, 1)`.
    pub fn section5(a: f64) -> Result<Self> {
        Self::new(&ExponentDescriptor::Section5 { a }, DyadicCube::unit(1))
    }

    pub fn descriptor(&self) -> ExponentDescriptor {
        self.kind.descriptor()
    }

    pub fn root(&self) -> &DyadicCube {
        &self.root
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.root.dimension() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: self.root.dimension(),
            });
        }
        self.kind.value_at(&self.root, x)
    }

    /// `(p₋(Q), p₊(Q))`.
    pub fn p_range(&self, q: &DyadicCube) -> Result<(f64, f64)> {
        if !self.root.contains(q) {
            return Err(Error::OutsideRoot {
                cube: q.clone(),
                root: self.root.clone(),
            });
        }
        self.kind.range(q)
    }

    /// `p'(x) = p(x) / (p(x) - 1)`.
    pub fn conjugate(&self) -> ExponentFunction {
        Self::from_kind(self.kind.clone().conjugate(), self.root.clone())
            .expect("conjugate of a valid exponent is valid")
    }

    /// Exponent value at every cell center of `layout`.
    pub fn field(&self, layout: &Layout) -> Result<ExponentField> {
        if !self.root.contains(layout.root()) {
            return Err(Error::OutsideRoot {
                cube: layout.root().clone(),
                root: self.root.clone(),
            });
        }
        let exps = (0..layout.cell_count())
            .map(|i| self.value_at(&layout.cell_center(i)))
            .collect::<Result<Vec<_>>>()?;
        let root_volume = layout.root().volume();
        Ok(ExponentField {
            layout: layout.clone(),
            exps,
            root_volume,
            p_minus: self.p_minus,
        })
    }

    pub fn modular(&self, f: &GridFunction) -> Result<f64> {
        self.field(f.layout())?.modular(f)
    }

    pub fn norm(&self, f: &GridFunction, tol: f64) -> Result<f64> {
        self.field(f.layout())?.norm(f, tol)
    }
}

/// Exponent values sampled on a layout, reused across many modular and norm
/// evaluations.
#[derive(Clone, Debug)]
pub struct ExponentField {
    layout: Layout,
    exps: Vec<f64>,
    root_volume: f64,
    p_minus: f64,
}

impl ExponentField {
    pub fn exponents(&self) -> &[f64] {
        &self.exps
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if *f.layout() != self.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(())
    }

    fn rho_scaled(&self, values: &[f64], inv_lambda: f64) -> f64 {
        let sum: f64 = values
            .iter()
            .zip(&self.exps)
            .map(|(v, &p)| {
                let t = v.abs() * inv_lambda;
                if t == 0.0 { 0.0 } else { t.powf(p) }
            })
            .sum();
        sum * self.layout.cell_volume()
    }

    /// `Σ_cells |v|^{p(center)} |cell|`.
    pub fn modular(&self, f: &GridFunction) -> Result<f64> {
        self.check(f)?;
        Ok(self.rho_scaled(f.values(), 1.0))
    }

    /// Luxemburg norm by bisection on `λ ↦ ρ(f/λ)`. The returned `λ`
    /// satisfies `ρ(f/λ) ≤ 1` and lies within `tol·λ` of the infimum.
    pub fn norm(&self, f: &GridFunction, tol: f64) -> Result<f64> {
        self.check(f)?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let values = f.values();
        if values.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let rho = |lambda: f64| self.rho_scaled(values, 1.0 / lambda);
        let mut hi = f.sup_abs().max(1.0) * self.root_volume.powf(1.0 / self.p_minus);
        while rho(hi) > 1.0 {
            hi *= 2.0;
        }
        let mut lo = hi * 2f64.powi(-60);
        while rho(lo) <= 1.0 {
            hi = lo;
            lo *= 2f64.powi(-60);
        }
        for _ in 0..2000 {
            if hi - lo <= tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if rho(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub cube: DyadicCube,
    pub p_minus: f64,
    pub p_plus: f64,
    pub eps: f64,
    pub value: f64,
}

/// Per-cube values of a Diening-type quantity with their supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub records: Vec<ConditionRecord>,
    pub supremum: f64,
    pub witness: Option<DyadicCube>,
}

impl ConditionReport {
    fn from_records(records: Vec<ConditionRecord>) -> Self {
        let mut supremum = 0.0;
        let mut witness = None;
        for r in &records {
            if witness.is_none() || r.value > supremum {
                supremum = r.value;
                witness = Some(r.cube.clone());
            }
        }
        Self { records, supremum, witness }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["cube", "p_minus", "p_plus", "eps", "value"])?;
        for r in &self.records {
            w.write_record([
                r.cube.to_string(),
                fmt_f64(r.p_minus),
                fmt_f64(r.p_plus),
                fmt_f64(r.eps),
                fmt_f64(r.value),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn record(&self, cube: &DyadicCube) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.cube == *cube)
    }
}

/// `(|Q|/ε_Q)^{exponent}` evaluated in the log domain.
fn ratio_power(q: &DyadicCube, eps: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    ((q.log2_volume() - eps.log2()) * exponent).exp2()
}

/// `|Q|^{p₋(Q) - p₊(Q)}` for every cube.
pub fn check_diening(p: &ExponentFunction, cubes: &[DyadicCube]) -> Result<ConditionReport> {
    let one = EpsilonCollection::constant(1.0)?;
    check_eps_diening(p, &one, cubes)
}

/// `(|Q|/ε_Q)^{p₋(Q) - p₊(Q)}` for every cube.
pub fn check_eps_diening(
    p: &ExponentFunction,
    eps: &EpsilonCollection,
    cubes: &[DyadicCube],
) -> Result<ConditionReport> {
    let records = cubes
        .iter()
        .map(|q| {
            let (lo, hi) = p.p_range(q)?;
            let e = positive_eps(eps, q)?;
            Ok(ConditionRecord {
                cube: q.clone(),
                p_minus: lo,
                p_plus: hi,
                eps: e,
                value: ratio_power(q, e, lo - hi),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::from_records(records))
}

fn positive_eps(eps: &EpsilonCollection, q: &DyadicCube) -> Result<f64> {
    let e = eps.value(q);
    if e > 0.0 && e.is_finite() {
        Ok(e)
    } else {
        Err(Error::InvalidEpsilon(format!("ε at {q} is {e}")))
    }
}

/// Exponent `κ = 1/(p₋ - 1)²` with `sup_Q (|Q|/ε_Q)^{(p')₋(Q) - (p')₊(Q)} ≤
/// max(1, C)^κ` whenever the same quantity for `p` is at most `C`.
///
/// Per cube the conjugate exponent gap is the gap for `p` divided by
/// `(p₋(Q) - 1)(p₊(Q) - 1) ≥ (p₋ - 1)²`.
pub fn conjugate_transfer_kappa(p: &ExponentFunction) -> f64 {
    (p.p_minus() - 1.0).powi(-2)
}

/// Sample points on a regular sub-lattice of `q`: `m` midpoints per axis
/// with `m^n ≤ samples`.
pub fn sample_points(q: &DyadicCube, samples: usize) -> Vec<Vec<f64>> {
    let n = q.dimension();
    let mut m = 1usize;
    while (m + 1).checked_pow(n as u32).is_some_and(|t| t <= samples) {
        m += 1;
    }
    let lower = q.lower();
    let side = q.side_length();
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut t| {
            let mut x = vec![0.0; n];
            for j in (0..n).rev() {
                x[j] = lower[j] + ((t % m) as f64 + 0.5) / m as f64 * side;
                t /= m;
            }
            x
        })
        .collect()
}

/// `max_x (|Q|/ε_Q)^{p₋(Q) - p(x)}` over sampled points of each cube.
pub fn check_eps_diening_pointwise(
    p: &ExponentFunction,
    eps: &EpsilonCollection,
    cubes: &[DyadicCube],
    samples_per_cube: usize,
) -> Result<ConditionReport> {
    let records = cubes
        .iter()
        .map(|q| {
            let (lo, hi) = p.p_range(q)?;
            let e = positive_eps(eps, q)?;
            let mut value = f64::NEG_INFINITY;
            for x in sample_points(q, samples_per_cube.max(1)) {
                value = value.max(ratio_power(q, e, lo - p.value_at(&x)?));
            }
            Ok(ConditionRecord {
                cube: q.clone(),
                p_minus: lo,
                p_plus: hi,
                eps: e,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport::from_records(records))
}

/// Diagnostic fit of `|p(x) - p∞| ≤ C∞ / log(e + |x|)` over finite samples.
/// Unbounded domains cannot be certified this way; `sampled_range` records
/// what the evidence covers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhInftyFit {
    pub p_inf: f64,
    pub c_inf: f64,
    pub witness: Vec<f64>,
    pub sampled_range: (f64, f64),
    /// Per-direction limits fitted on one-dimensional samples.
    pub p_inf_positive: Option<f64>,
    pub p_inf_negative: Option<f64>,
    /// `C∞` restricted to `|x| ≤ max|x|/2` and to the outer half.
    pub c_inner: f64,
    pub c_outer: f64,
    /// The outer half needs a strictly larger constant than the inner one.
    pub diverging: bool,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Median of `p` over the largest tenth (at least one) of the samples by `|x|`.
fn tail_median(mut pts: Vec<(f64, f64)>) -> Option<f64> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let k = (pts.len() / 10).max(1).min(pts.len());
    median(pts[pts.len() - k..].iter().map(|t| t.1).collect())
}

pub fn check_lh_infty(
    p: &ExponentFunction,
    sample_points: &[Vec<f64>],
    p_inf_guess: Option<f64>,
) -> Result<LhInftyFit> {
    if sample_points.is_empty() {
        return Err(Error::InvalidArgument("no sample points".into()));
    }
    let evals = sample_points
        .iter()
        .map(|x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            Ok((x.clone(), r, p.value_at(x)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let one_dim = p.root().dimension() == 1;
    let directional = |positive: bool| {
        if !one_dim {
            return None;
        }
        tail_median(
            evals
                .iter()
                .filter(|(x, _, _)| if positive { x[0] > 0.0 } else { x[0] < 0.0 })
                .map(|(_, r, v)| (*r, *v))
                .collect(),
        )
    };
    let p_inf_positive = directional(true);
    let p_inf_negative = directional(false);
    let p_inf = match p_inf_guess {
        Some(g) => g,
        None => tail_median(evals.iter().map(|(_, r, v)| (*r, *v)).collect())
            .expect("non-empty samples"),
    };

    let min_r = evals.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let max_r = evals.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut c_inf = f64::NEG_INFINITY;
    let mut witness = Vec::new();
    let (mut c_inner, mut c_outer) = (0.0f64, 0.0f64);
    for (x, r, v) in &evals {
        let c = (v - p_inf).abs() * (std::f64::consts::E + r).ln();
        if c > c_inf {
            c_inf = c;
            witness = x.clone();
        }
        if *r <= 0.5 * max_r {
            c_inner = c_inner.max(c);
        } else {
            c_outer = c_outer.max(c);
        }
    }
    let diverging = c_outer > 0.0 && c_outer > c_inner * (1.0 + 1e-9);
    Ok(LhInftyFit {
        p_inf,
        c_inf,
        witness,
        sampled_range: (min_r, max_r),
        p_inf_positive,
        p_inf_negative,
        c_inner,
        c_outer,
        diverging,
    })
}

/// `∫|fg|` together with the Hölder bound `2‖f‖_{p}‖g‖_{p'}`.
pub fn holder_pairing(
    f: &GridFunction,
    g: &GridFunction,
    p: &ExponentFunction,
    tol: f64,
) -> Result<(f64, f64)> {
    let pairing = f.pointwise_mul(g)?.abs().integral();
    let nf = p.norm(f, tol)?;
    let ng = p.conjugate().norm(g, tol)?;
    Ok((pairing, 2.0 * nf * ng))
}

/// `max(0, max_g ∫ f g / ‖g‖_{p'})` over a finite bank; a lower estimate of
/// the associate norm (the zero function is always admissible).
pub fn associate_norm_lower_bound(
    f: &GridFunction,
    p: &ExponentFunction,
    bank: &[GridFunction],
    tol: f64,
) -> Result<f64> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let conj = p.conjugate().field(f.layout())?;
    let mut best = 0.0f64;
    for g in bank {
        let n = conj.norm(g, tol)?;
        if n == 0.0 {
            continue;
        }
        best = best.max(f.pointwise_mul(g)?.integral() / n);
    }
    Ok(best)
}
