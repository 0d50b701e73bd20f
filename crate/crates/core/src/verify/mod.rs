//! Randomized verification of every identity and construction, keyed by anchor ids.
//!
//! Each check runs a number of independent trials. A trial returns its violation: the residual
//! of an identity, or how far an inequality overshoots its right-hand side. The reported residual
//! is the maximum over trials.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ProjError, Result};
use crate::numeric::fixtures::{trial_rng, FixtureRng};
use crate::numeric::Tolerances;

mod calculus;
mod gen;
mod geometry;
mod homotopy;
mod lifting;
mod states;
mod support;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Support,
    Geometry,
    Calculus,
    Homotopy,
    Lifting,
    States,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Support, Suite::Geometry, Suite::Calculus, Suite::Homotopy, Suite::Lifting, Suite::States];

    fn checks(self) -> Vec<Check> {
        match self {
            Suite::Support => support::checks(),
            Suite::Geometry => geometry::checks(),
            Suite::Calculus => calculus::checks(),
            Suite::Homotopy => homotopy::checks(),
            Suite::Lifting => lifting::checks(),
            Suite::States => states::checks(),
            Suite::All => Suite::ALL.iter().flat_map(|s| s.checks()).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Support => "support",
            Suite::Geometry => "geometry",
            Suite::Calculus => "calculus",
            Suite::Homotopy => "homotopy",
            Suite::Lifting => "lifting",
            Suite::States => "states",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = ProjError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| ProjError::UnknownSuite(s.to_string()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    pub dim_max: usize,
    pub tol: Tolerances,
    pub tau_spec: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 0, trials: 100, dim_max: 12, tol: Tolerances::default(), tau_spec: 1e-4 }
    }
}

impl VerifyConfig {
    fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if self.dim_max < 2 {
            return Err(ProjError::DimensionTooSmall { required: 2, available: self.dim_max });
        }
        if !(self.tau_spec > 0.0) {
            return Err(ProjError::InvalidTolerance(format!("tau_spec = {} must be positive", self.tau_spec)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub residual: f64,
    pub bound: f64,
    pub pass: bool,
    pub trials: usize,
    /// First failing trial's error, if any trial errored.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub dim_max: usize,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Acceptance threshold of a check, resolved against the configured tolerances.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Bound {
    /// Multiple of `τ_eq`.
    Eq(f64),
    Cluster,
    Spec,
    Abs(f64),
}

pub(crate) struct Ctx {
    pub tol: Tolerances,
    pub dim_max: usize,
    pub tau_spec: f64,
}

impl Ctx {
    fn bound(&self, b: Bound) -> f64 {
        match b {
            Bound::Eq(k) => k * self.tol.eq,
            Bound::Cluster => self.tol.cluster,
            Bound::Spec => self.tau_spec,
            Bound::Abs(x) => x,
        }
    }
}

pub(crate) type TrialFn = fn(&Ctx, &mut FixtureRng) -> Result<f64>;

pub(crate) struct Check {
    pub id: &'static str,
    pub bound: Bound,
    /// Upper limit on the number of trials for expensive or deterministic checks.
    pub cap: Option<usize>,
    pub run: TrialFn,
}

pub(crate) const fn check(id: &'static str, bound: Bound, run: TrialFn) -> Check {
    Check { id, bound, cap: None, run }
}

pub(crate) const fn capped(id: &'static str, bound: Bound, cap: usize, run: TrialFn) -> Check {
    Check { id, bound, cap: Some(cap), run }
}

/// Reported in place of a residual when a trial errors.
const ERROR_RESIDUAL: f64 = f64::MAX;

fn run_check(c: &Check, cfg: &VerifyConfig, ctx: &Ctx) -> CheckResult {
    let n = c.cap.map_or(cfg.trials, |cap| cap.min(cfg.trials)).max(1);
    let outcomes: Vec<Result<f64>> =
        (0..n).into_par_iter().map(|i| (c.run)(ctx, &mut trial_rng(cfg.seed, c.id, i))).collect();
    let bound = ctx.bound(c.bound);
    let mut residual = 0.0f64;
    let mut error = None;
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(x) if x.is_nan() => {
                residual = ERROR_RESIDUAL;
                error.get_or_insert_with(|| format!("trial {i}: residual is NaN"));
            }
            Ok(x) => residual = residual.max(x.min(ERROR_RESIDUAL)),
            Err(e) => {
                residual = ERROR_RESIDUAL;
                error.get_or_insert_with(|| format!("trial {i}: {e}"));
            }
        }
    }
    CheckResult { id: c.id.to_string(), residual, bound, pass: error.is_none() && residual <= bound, trials: n, error }
}

fn assemble(suite: String, cfg: &VerifyConfig, checks: Vec<Check>, start: Instant) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = Ctx { tol: cfg.tol, dim_max: cfg.dim_max, tau_spec: cfg.tau_spec };
    let mut checks = checks;
    checks.sort_by_key(|c| c.id);
    let results: Vec<CheckResult> = checks.iter().map(|c| run_check(c, cfg, &ctx)).collect();
    let passed = results.iter().filter(|r| r.pass).count();
    let summary = Summary { passed, failed: results.len() - passed };
    Ok(VerificationReport {
        suite,
        trials: cfg.trials,
        seed: cfg.seed,
        dim_max: cfg.dim_max,
        checks: results,
        summary,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<VerificationReport> {
    assemble(suite.name().to_string(), cfg, suite.checks(), Instant::now())
}

/// Runs only the checks whose id satisfies `select`, across all suites.
pub fn run_selected(select: impl Fn(&str) -> bool, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let checks = Suite::All.checks().into_iter().filter(|c| select(c.id)).collect();
    assemble("selected".to_string(), cfg, checks, Instant::now())
}

/// Check ids of a suite, sorted.
pub fn check_ids(suite: Suite) -> Vec<&'static str> {
    let mut ids: Vec<&'static str> = suite.checks().iter().map(|c| c.id).collect();
    ids.sort();
    ids
}

/// `max(0, lhs − rhs)`.
pub(crate) fn excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).max(0.0)
}

/// 0 when the condition holds, 1 otherwise.
pub(crate) fn flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}
