use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clt::FindimParams;
use crate::dependence::{RateFamily, ThetaModel};
use crate::holder::MarginalCdf;
use crate::observable::{Observable, REFERENCE_DRAWS};
use crate::processes::ProcessSpec;
use crate::{Error, Result};

/// One experiment: a process, a task and a master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Defaults to `out/<name>`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub process: ProcessSpec,
    /// Marginal laws of `X_0` for tasks that need a distribution function and
    /// a process without closed-form marginals.
    #[serde(default)]
    pub marginals: Option<Vec<MarginalCdf>>,
    pub task: Task,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Simulate {
        n: usize,
        /// Time-delay embedding dimension applied to a scalar path.
        #[serde(default)]
        embed: Option<usize>,
        /// Also writes the coupled copy with innovations up to this time replaced.
        #[serde(default)]
        swap_point: Option<usize>,
    },
    Delta {
        lags: Vec<usize>,
        #[serde(default = "two")]
        s: f64,
        reps: usize,
    },
    Mixing {
        f: Observable,
        /// One entry per gap tuple `(i_1, ..., i_p)`.
        gaps: Vec<Vec<usize>>,
        split: usize,
        #[serde(default = "two")]
        r: f64,
        #[serde(default = "two")]
        s: f64,
        #[serde(default = "one")]
        alpha: f64,
        reps: usize,
        #[serde(default = "reference_draws")]
        reference_draws: usize,
        /// Optional ceiling on every fitted constant.
        #[serde(default)]
        k_max: Option<f64>,
    },
    Moment {
        f: Observable,
        n_list: Vec<usize>,
        p: usize,
        #[serde(default = "two")]
        r: f64,
        #[serde(default = "power")]
        family: RateFamily,
        reps: usize,
        #[serde(default = "reference_draws")]
        reference_draws: usize,
        #[serde(default)]
        oracle: Option<OracleTask>,
    },
    /// Normalized sums of one observable, and optionally the Cramér–Wold
    /// check of the smoothed cell vector.
    Clt {
        #[serde(default)]
        f: Option<Observable>,
        n: usize,
        reps: usize,
        #[serde(default = "sigma_reps")]
        sigma_reps: usize,
        #[serde(default)]
        lag: Option<usize>,
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default = "variance_tolerance")]
        variance_tolerance: f64,
        #[serde(default)]
        findim: Option<FindimParams>,
        #[serde(default = "min_pass")]
        min_pass_fraction: f64,
    },
    Empclt {
        n: usize,
        reps: usize,
        /// Levels `F(t)` of the kernel grid points, per coordinate.
        #[serde(default = "kernel_levels")]
        kernel_levels: Vec<f64>,
        /// Points of the sup-statistic grid per coordinate.
        #[serde(default = "sup_points")]
        sup_points: usize,
        /// Path length of the large-n sup-statistic reference run.
        #[serde(default)]
        oracle_n: Option<usize>,
        #[serde(default = "sup_tolerance")]
        sup_tolerance: f64,
        #[serde(default)]
        approximation: Option<ApproxTask>,
    },
    Chain {
        n: usize,
        m: usize,
        #[serde(default = "epsilon")]
        epsilon: f64,
        /// Number of random points `t`, each with a fresh path.
        points: usize,
        #[serde(default = "one")]
        alpha: f64,
    },
    Conditions {
        theta: f64,
        alpha: f64,
        r: f64,
        d: usize,
        #[serde(default = "p_min")]
        p_min: usize,
        #[serde(default = "p_max")]
        p_max: usize,
        #[serde(default)]
        series: Option<ThetaModel>,
        #[serde(default = "p_min")]
        series_p: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleTask {
    pub n: usize,
    pub p: usize,
    /// Replicates of the Monte Carlo cross-check.
    #[serde(default = "oracle_reps")]
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproxTask {
    pub m_list: Vec<usize>,
    pub reps: usize,
    #[serde(default = "epsilon")]
    pub epsilon: f64,
}

/// Default `epsilon` for chaining depths and approximation frequencies.
pub const DEFAULT_EPSILON: f64 = 0.25;
/// Default relative tolerance between replicate variance and `sigma^2`.
pub const DEFAULT_VARIANCE_TOLERANCE: f64 = 0.15;
/// Default tolerance on the 95% sup-statistic quantile against its large-n reference.
pub const DEFAULT_SUP_TOLERANCE: f64 = 0.05;
/// Task kinds accepted in `[task]`.
pub const TASK_KINDS: [&str; 8] = ["simulate", "delta", "mixing", "moment", "clt", "empclt", "chain", "conditions"];
/// Default minimal fraction of passing projections.
pub const DEFAULT_MIN_PASS: f64 = 0.9;
/// Standard errors allowed between Monte Carlo values and exact targets.
pub const DEFAULT_SE_MULTIPLIER: f64 = 3.0;
/// Standard errors allowed between an exact moment and its simulation.
pub const ORACLE_SE_MULTIPLIER: f64 = 4.0;
/// Relative tolerance of the telescoping identity, per unit of `n`.
pub const CHAIN_TOLERANCE: f64 = 1e-10;

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn reference_draws() -> usize {
    REFERENCE_DRAWS
}
fn power() -> RateFamily {
    RateFamily::Power
}
fn sigma_reps() -> usize {
    200
}
fn variance_tolerance() -> f64 {
    DEFAULT_VARIANCE_TOLERANCE
}
fn min_pass() -> f64 {
    DEFAULT_MIN_PASS
}
fn kernel_levels() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 0.9]
}
fn sup_points() -> usize {
    1000
}
fn sup_tolerance() -> f64 {
    DEFAULT_SUP_TOLERANCE
}
fn epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn p_min() -> usize {
    1
}
fn p_max() -> usize {
    10
}
fn oracle_reps() -> usize {
    100_000
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Simulate { .. } => "simulate",
            Task::Delta { .. } => "delta",
            Task::Mixing { .. } => "mixing",
            Task::Moment { .. } => "moment",
            Task::Clt { .. } => "clt",
            Task::Empclt { .. } => "empclt",
            Task::Chain { .. } => "chain",
            Task::Conditions { .. } => "conditions",
        }
    }

    /// Range checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::Config(format!("task.{name} must be positive")))
            } else {
                Ok(())
            }
        };
        let at_least = |name: &str, v: usize, min: usize| {
            if v < min {
                Err(Error::Config(format!("task.{name} must be at least {min}, got {v}")))
            } else {
                Ok(())
            }
        };
        match self {
            Task::Simulate { n, embed, .. } => {
                positive("n", *n)?;
                if let Some(e) = embed {
                    positive("embed", *e)?;
                }
            }
            Task::Delta { lags, s, reps } => {
                if lags.is_empty() || lags.contains(&0) {
                    return Err(Error::Config("task.lags must be nonempty with entries >= 1".into()));
                }
                if !(*s >= 1.0) {
                    return Err(Error::Config("task.s must be >= 1".into()));
                }
                at_least("reps", *reps, 2)?;
            }
            Task::Mixing { gaps, split, reps, .. } => {
                if gaps.is_empty() || gaps.iter().any(|g| *split == 0 || *split > g.len()) {
                    return Err(Error::Config("task.split must lie in 1..=p for every gap tuple".into()));
                }
                at_least("reps", *reps, 2)?;
            }
            Task::Moment { n_list, p, reps, .. } => {
                if n_list.is_empty() || n_list.contains(&0) {
                    return Err(Error::Config("task.n_list must be nonempty with positive entries".into()));
                }
                positive("p", *p)?;
                at_least("reps", *reps, 2)?;
            }
            Task::Clt { f, n, reps, sigma_reps, findim, .. } => {
                at_least("n", *n, 2)?;
                at_least("reps", *reps, 100)?;
                at_least("sigma_reps", *sigma_reps, 2)?;
                if f.is_none() && findim.is_none() {
                    return Err(Error::Config("task needs `f`, a `findim` table, or both".into()));
                }
                if let Some(p) = findim {
                    positive("findim.m", p.m)?;
                    at_least("findim.n", p.n, 2)?;
                    at_least("findim.reps", p.reps, 100)?;
                    at_least("findim.sigma_reps", p.sigma_reps, 2)?;
                }
            }
            Task::Empclt { n, reps, sup_points, approximation, .. } => {
                positive("n", *n)?;
                at_least("reps", *reps, 2)?;
                positive("sup_points", *sup_points)?;
                if let Some(a) = approximation {
                    if a.m_list.is_empty() || a.m_list.contains(&0) {
                        return Err(Error::Config("task.approximation.m_list must be nonempty and positive".into()));
                    }
                    positive("approximation.reps", a.reps)?;
                }
            }
            Task::Chain { n, m, points, epsilon, .. } => {
                positive("n", *n)?;
                positive("m", *m)?;
                positive("points", *points)?;
                if !(*epsilon > 0.0) {
                    return Err(Error::Config("task.epsilon must be positive".into()));
                }
            }
            Task::Conditions { p_min, p_max, series_p, .. } => {
                if p_min > p_max {
                    return Err(Error::Config("task.p_min exceeds task.p_max".into()));
                }
                positive("series_p", *series_p)?;
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        scenario.task.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }

    /// Same scenario with defaults written out (resolved process, output directory).
    pub fn resolved(&self) -> Self {
        Scenario { process: self.process.resolved(), output_dir: Some(self.output_dir()), ..self.clone() }
    }
}
