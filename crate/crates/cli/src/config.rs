use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use epsdyadic::bank::{BankKind, BankSpec};
use epsdyadic::exponent::{ExponentDescriptor, ExponentFunction, DEFAULT_NORM_TOL, DEFAULT_SLACK};
use epsdyadic::{DyadicCube, EpsilonCollection, EpsilonRule, GridFunction, HaarMode, Layout};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative bisection tolerance of norms.
    pub norm: f64,
    /// Absolute slack for inequalities between computed quantities.
    pub slack: f64,
    /// Relative tolerance of exact-arithmetic checks done in floating point.
    pub relative: f64,
    /// Agreement between fast operators and brute force.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: DEFAULT_NORM_TOL,
            slack: DEFAULT_SLACK,
            relative: 1e-12,
            oracle: 1e-13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorName {
    Identity,
    Md,
    Meps,
    Teps,
    Seps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// Root cube token; the unit cube of `dimension` when absent.
    pub root: Option<DyadicCube>,
    pub depth: u32,
    pub exponent: ExponentDescriptor,
    pub epsilon: EpsilonRule,
    pub bank: BankSpec,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    /// Deepest origin-chain level examined by check-conditions.
    pub max_level: i32,
    /// Sample points per cube for the pointwise ε-Diening form.
    pub samples_per_cube: usize,
    /// Number of oracle-suite instances.
    pub instances: usize,
    /// Deliberately relax the CZ threshold to prove the suite detects it.
    pub fault: bool,
    pub operator: OperatorName,
    pub haar_mode: HaarMode,
    /// Extra depths for the opnorm resolution sweep.
    pub sweep_depths: Vec<u32>,
    /// Truncation levels for the compactness probe; `0..=depth` when absent.
    pub n_range: Option<Vec<u32>>,
    /// CZ threshold; a value between the root average and the supremum when absent.
    pub lambda: Option<f64>,
    /// Grid file stem (`stem.json` + `stem.csv`) used instead of the first bank member.
    pub input: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            root: None,
            depth: 8,
            exponent: ExponentDescriptor::Section5 { a: 0.5 },
            epsilon: serde_json::from_str(r#"{"kind":"section5","C":1.2,"a":0.5}"#)
                .expect("valid default epsilon"),
            bank: BankSpec {
                kind: BankKind::Indicators,
                count: 50,
                seed: 42,
            },
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("out"),
            max_level: 40,
            samples_per_cube: 64,
            instances: 200,
            fault: false,
            operator: OperatorName::Meps,
            haar_mode: HaarMode::FullSupport,
            sweep_depths: Vec::new(),
            n_range: None,
            lambda: None,
            input: None,
        }
    }
}

/// Command-line overrides applied after the config file is read.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub depth: Option<u32>,
    pub dim: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &overrides.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = overrides.seed {
            cfg.bank.seed = seed;
        }
        if let Some(depth) = overrides.depth {
            cfg.depth = depth;
        }
        if let Some(dim) = overrides.dim {
            cfg.dimension = dim;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            bail!("dimension must be at least 1");
        }
        if self.depth < 1 {
            bail!("depth must be at least 1");
        }
        if self.bank.count < 1 {
            bail!("bank count must be at least 1");
        }
        if self.root().dimension() != self.dimension {
            bail!("root {} does not have dimension {}", self.root(), self.dimension);
        }
        self.layout()?;
        self.exponent_function()?;
        self.epsilon_collection()?;
        if self.lambda.is_some_and(|l| !l.is_finite()) {
            bail!("lambda must be finite");
        }
        Ok(())
    }

    pub fn root(&self) -> DyadicCube {
        self.root.clone().unwrap_or_else(|| DyadicCube::unit(self.dimension))
    }

    pub fn layout(&self) -> Result<Layout> {
        self.layout_at(self.depth)
    }

    pub fn layout_at(&self, depth: u32) -> Result<Layout> {
        Ok(Layout::new(self.root(), depth)?)
    }

    pub fn exponent_function(&self) -> Result<ExponentFunction> {
        ExponentFunction::new(&self.exponent, self.root()).context("exponent descriptor")
    }

    pub fn epsilon_collection(&self) -> Result<EpsilonCollection> {
        let eps = EpsilonCollection::new(self.epsilon.clone()).context("epsilon descriptor")?;
        eps.check_dimension(self.dimension)?;
        Ok(eps)
    }

    pub fn bank_at(&self, depth: u32) -> Result<Vec<GridFunction>> {
        Ok(self.bank.generate(&self.layout_at(depth)?)?)
    }

    pub fn bank(&self) -> Result<Vec<GridFunction>> {
        self.bank_at(self.depth)
    }

    /// The function a single-input command acts on.
    pub fn input_function(&self) -> Result<GridFunction> {
        match &self.input {
            Some(stem) => {
                let f = GridFunction::load(stem).with_context(|| format!("loading grid {}", stem.display()))?;
                if *f.layout() != self.layout()? {
                    bail!("grid {} does not match the configured root and depth", stem.display());
                }
                Ok(f)
            }
            None => Ok(self.bank()?.swap_remove(0)),
        }
    }
}
