//! Experiment configuration (a single JSON document).

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::oracles::{generate_rows, Problem, ProblemKind, Row};
use crate::solvers::{EpochGdParams, Schedule};
use crate::vecdom::{Domain, Point};

/// A vector given in full, as a constant fill, or as a scaled axis vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Dense(Vec<f64>),
    Fill { fill: f64 },
    Axis { axis: usize, scale: f64 },
}

impl Default for VectorSpec {
    fn default() -> Self {
        VectorSpec::Fill { fill: 0.0 }
    }
}

impl VectorSpec {
    pub fn build(&self, dim: usize) -> Result<Point> {
        let p = match self {
            VectorSpec::Dense(v) => {
                if v.len() != dim {
                    return Err(Error::Config(format!(
                        "vector has {} entries, problem dim is {dim}",
                        v.len()
                    )));
                }
                Point::new(v.clone())?
            }
            VectorSpec::Fill { fill } => Point::new(vec![*fill; dim])?,
            VectorSpec::Axis { axis, scale } => {
                if *axis >= dim {
                    return Err(Error::Config(format!(
                        "axis {axis} out of range for dim {dim}"
                    )));
                }
                Point::new(Point::axis(dim, *axis, *scale).into_vec())?
            }
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Ball {
        #[serde(default)]
        center: VectorSpec,
        radius: f64,
    },
    Box {
        lower: VectorSpec,
        upper: VectorSpec,
    },
    Unbounded,
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<Domain> {
        match self {
            DomainSpec::Ball { center, radius } => Domain::ball(center.build(dim)?, *radius),
            DomainSpec::Box { lower, upper } => Domain::boxed(lower.build(dim)?, upper.build(dim)?),
            DomainSpec::Unbounded => Ok(Domain::Unbounded),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowsSpec {
    Explicit(Vec<Row>),
    Generated { generate: GenerateRows },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRows {
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub flip: f64,
}

impl RowsSpec {
    fn build(&self, dim: usize) -> Result<Vec<Row>> {
        match self {
            RowsSpec::Explicit(rows) => Ok(rows.clone()),
            RowsSpec::Generated { generate } => {
                generate_rows(dim, generate.m, generate.seed, generate.flip)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayloadSpec {
    NoisyQuadratic {
        #[serde(default)]
        w_star: VectorSpec,
        grad_noise: f64,
        #[serde(default)]
        value_noise: f64,
    },
    FiniteSumHinge {
        rows: RowsSpec,
    },
    FiniteSumLogistic {
        rows: RowsSpec,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub lambda: f64,
    pub domain: DomainSpec,
    #[serde(default)]
    pub x1: VectorSpec,
    /// Number of base oracle draws averaged per sample.
    #[serde(default = "one")]
    pub averaging: usize,
    #[serde(flatten)]
    pub payload: PayloadSpec,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        if self.dim < 1 {
            return Err(Error::Config("problem dim must be at least 1".into()));
        }
        let dim = self.dim;
        let kind = match &self.payload {
            PayloadSpec::NoisyQuadratic {
                w_star,
                grad_noise,
                value_noise,
            } => ProblemKind::NoisyQuadratic {
                w_star: w_star.build(dim)?,
                grad_noise: *grad_noise,
                value_noise: *value_noise,
            },
            PayloadSpec::FiniteSumHinge { rows } => ProblemKind::FiniteSumHinge {
                rows: rows.build(dim)?,
            },
            PayloadSpec::FiniteSumLogistic { rows } => ProblemKind::FiniteSumLogistic {
                rows: rows.build(dim)?,
            },
        };
        let problem = Problem::new(
            kind,
            self.lambda,
            self.domain.build(dim)?,
            self.x1.build(dim)?,
        )?;
        problem.averaged_oracle(self.averaging)
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SolverKind {
    Algorithm1 {
        #[serde(default)]
        schedule: Schedule,
        #[serde(default)]
        grad_bound: Option<f64>,
    },
    Sgd {
        #[serde(default = "yes")]
        average: bool,
    },
    EpochGd {
        #[serde(default = "default_t1")]
        t1: usize,
        #[serde(default)]
        eta1: Option<f64>,
    },
    Erm,
    /// Zero-iteration control: outputs `x1`.
    Start,
}

fn default_t1() -> usize {
    EpochGdParams::default().t1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    /// Column value in the CSV and seed-derivation key; defaults per kind.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub kind: SolverKind,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        SolverSpec { label: None, kind }
    }

    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match &self.kind {
            SolverKind::Algorithm1 {
                schedule: Schedule::WorstCase,
                ..
            } => "algorithm1".into(),
            SolverKind::Algorithm1 {
                schedule: Schedule::Adaptive,
                ..
            } => "algorithm1_adaptive".into(),
            SolverKind::Sgd { average: true } => "sgd".into(),
            SolverKind::Sgd { average: false } => "sgd_last".into(),
            SolverKind::EpochGd { .. } => "epoch_gd".into(),
            SolverKind::Erm => "erm".into(),
            SolverKind::Start => "start".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Sweep,
    Mc,
    Bounds,
    Trial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverSpec>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    /// Worker threads for trials; `1` runs sequentially, absent uses all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must not be empty".into()));
        }
        if self.n_grid[0] < 1 {
            return Err(Error::Config("oracle budgets must be at least 1".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::Config("at least one solver is required".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.solvers {
            let label = s.label();
            if !seen.insert(label.clone()) {
                return Err(Error::Config(format!("duplicate solver label `{label}`")));
            }
            if let SolverKind::EpochGd { t1, .. } = s.kind {
                if t1 < 1 || t1 > self.n_grid[0] {
                    return Err(Error::Config(format!(
                        "epoch_gd t1 = {t1} must lie in [1, smallest n = {}]",
                        self.n_grid[0]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The configuration behind the acceptance experiments.
pub fn canonical_config() -> ExperimentConfig {
    ExperimentConfig {
        problem: ProblemSpec {
            dim: 10,
            lambda: 1.0,
            domain: DomainSpec::Ball {
                center: VectorSpec::Fill { fill: 0.0 },
                radius: 1.0,
            },
            x1: VectorSpec::Axis {
                axis: 0,
                scale: 1.0,
            },
            averaging: 1,
            payload: PayloadSpec::NoisyQuadratic {
                w_star: VectorSpec::Axis {
                    axis: 0,
                    scale: -1.0,
                },
                grad_noise: 1.0 / 10f64.sqrt(),
                value_noise: 1.0,
            },
        },
        solvers: vec![
            SolverSpec::new(SolverKind::Algorithm1 {
                schedule: Schedule::WorstCase,
                grad_bound: None,
            }),
            SolverSpec::new(SolverKind::Sgd { average: true }),
            SolverSpec::new(SolverKind::EpochGd { t1: 4, eta1: None }),
            SolverSpec::new(SolverKind::Erm),
        ],
        n_grid: vec![100, 1000],
        trials: 200,
        master_seed: 20_240_601,
        output: None,
        mode: Mode::Sweep,
        threads: None,
    }
}
