//! Gain tuners: chaotic fruit fly search and comparison baselines.
//!
//! Every optimizer searches a 3-D location space and reads candidate gains as
//! `(|x|, |y|, |z|) ⊙ gain_scale`. Randomness for one iteration is drawn before
//! the batch is evaluated in parallel, so results do not depend on the worker
//! count.

mod bfo;
mod cfoa;
mod foa;
mod ga;
mod pso;
mod zn;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::pid::PidGains;

pub use bfo::{bfo_minimize, BfoParams};
pub use cfoa::{
    cfoa_minimize, chaotic_update, logistic_step, smell_concentration, BetaMode, CfoaConfig, ChaosSource, GainEncoding,
    SwarmMode,
};
pub use foa::foa_minimize;
pub use ga::{ga_minimize, GaParams};
pub use pso::{pso_minimize, PsoParams};
pub use zn::{oscillates, zn_tune, LtiPlantProbe, OscillationProbe, ZnConfig, ZnResult};

pub type Vec3 = [f64; 3];

/// Score to minimize, defined on the positive-gain orthant.
pub trait Objective: Fn(&PidGains) -> f64 + Sync {}
impl<T: Fn(&PidGains) -> f64 + Sync> Objective for T {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_gains: PidGains,
    pub best_location: Vec3,
    pub best_score: f64,
    /// Best-so-far score after initialization and after each iteration.
    pub history: Vec<f64>,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Foa,
    Ga,
    Pso,
    Bfo,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Foa, Method::Ga, Method::Pso, Method::Bfo];

    pub fn name(self) -> &'static str {
        match self {
            Method::Foa => "foa",
            Method::Ga => "ga",
            Method::Pso => "pso",
            Method::Bfo => "bfo",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown optimizer {s:?} (expected foa, ga, pso or bfo)")))
    }
}

/// Settings shared by the baseline optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub pop_size: usize,
    /// Initial locations are drawn from `[0, search_radius]³`.
    pub search_radius: f64,
    pub gain_scale: Vec3,
    /// Fraction of the initial step size left at the end of the budget.
    pub radius_decay: f64,
    pub ga: GaParams,
    pub pso: PsoParams,
    pub bfo: BfoParams,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            pop_size: 30,
            search_radius: 2.0,
            gain_scale: [1.0; 3],
            radius_decay: 1e-3,
            ga: GaParams::default(),
            pso: PsoParams::default(),
            bfo: BfoParams::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.pop_size >= 2, || "pop_size must be >= 2".into())?;
        validate_space(self.search_radius, &self.gain_scale)?;
        ensure(self.radius_decay > 0.0 && self.radius_decay <= 1.0, || {
            format!("radius_decay must be in (0, 1], got {}", self.radius_decay)
        })
    }
}

pub(crate) fn validate_space(radius: f64, scale: &Vec3) -> Result<()> {
    ensure(radius > 0.0 && radius.is_finite(), || {
        format!("search_radius must be > 0, got {radius}")
    })?;
    ensure(scale.iter().all(|s| *s > 0.0 && s.is_finite()), || {
        format!("gain_scale entries must be > 0, got {scale:?}")
    })
}

/// Runs one baseline on an evaluation budget.
pub fn baseline_minimize<F: Objective>(
    method: Method,
    objective: &F,
    budget: usize,
    seed: u64,
    cfg: &BaselineConfig,
) -> Result<OptResult> {
    cfg.validate()?;
    ensure(budget >= cfg.pop_size, || {
        format!("budget {budget} is smaller than one population ({})", cfg.pop_size)
    })?;
    match method {
        Method::Foa => foa_minimize(objective, budget, seed, cfg),
        Method::Ga => ga_minimize(objective, budget, seed, cfg),
        Method::Pso => pso_minimize(objective, budget, seed, cfg),
        Method::Bfo => bfo_minimize(objective, budget, seed, cfg),
    }
}

pub fn gains_from_location(x: &Vec3, scale: &Vec3) -> PidGains {
    PidGains::new(x[0].abs() * scale[0], x[1].abs() * scale[1], x[2].abs() * scale[2])
}

/// Scores a batch in parallel, preserving order. NaN becomes `+∞`.
pub(crate) fn eval_batch<F: Objective>(objective: &F, gains: &[PidGains]) -> Vec<f64> {
    gains
        .par_iter()
        .map(|g| {
            let s = objective(g);
            if s.is_nan() {
                f64::INFINITY
            } else {
                s
            }
        })
        .collect()
}

/// Like [`eval_batch`] but fails if any score is NaN.
pub(crate) fn eval_initial<F: Objective>(objective: &F, gains: &[PidGains]) -> Result<Vec<f64>> {
    let scores: Vec<f64> = gains.par_iter().map(objective).collect();
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Optimizer(format!(
            "objective returned NaN for initial candidate {i} (gains {:?})",
            gains[i]
        )));
    }
    Ok(scores)
}

/// Best-so-far bookkeeping shared by all optimizers.
#[derive(Debug, Clone)]
pub(crate) struct Tracker {
    pub x: Vec3,
    pub gains: PidGains,
    pub score: f64,
    pub history: Vec<f64>,
    pub evals: usize,
}

impl Tracker {
    pub fn new() -> Self {
        Self {
            x: [0.0; 3],
            gains: PidGains::new(0.0, 0.0, 0.0),
            score: f64::INFINITY,
            history: Vec::new(),
            evals: 0,
        }
    }

    /// Takes a batch of evaluations; returns whether the best improved.
    pub fn offer(&mut self, xs: &[Vec3], gains: &[PidGains], scores: &[f64]) -> bool {
        self.evals += scores.len();
        let mut improved = false;
        for ((x, g), &s) in xs.iter().zip(gains).zip(scores) {
            if s < self.score {
                self.score = s;
                self.x = *x;
                self.gains = *g;
                improved = true;
            }
        }
        improved
    }

    pub fn record(&mut self) {
        self.history.push(self.score);
    }

    pub fn finish(self) -> Result<OptResult> {
        if !self.score.is_finite() {
            return Err(Error::Optimizer(format!(
                "no finite score found in {} evaluations",
                self.evals
            )));
        }
        Ok(OptResult {
            best_gains: self.gains,
            best_location: self.x,
            best_score: self.score,
            history: self.history,
            evals: self.evals,
        })
    }
}

/// Search radius at `progress ∈ [0, 1]`, decaying geometrically to `r0 · decay`.
pub(crate) fn decayed_radius(r0: f64, decay: f64, progress: f64) -> f64 {
    r0 * decay.powf(progress.clamp(0.0, 1.0))
}

/// Test functions used by the convergence experiments.
pub mod benchmarks {
    use crate::pid::PidGains;

    /// `Σ (g_i − 1)²`.
    pub fn sphere(g: &PidGains) -> f64 {
        g.as_array().iter().map(|x| (x - 1.0).powi(2)).sum()
    }

    /// Rastrigin shifted so the global minimum is at `(1, 1, 1)`.
    pub fn rastrigin(g: &PidGains) -> f64 {
        let tau = std::f64::consts::TAU;
        g.as_array()
            .iter()
            .map(|x| {
                let z = x - 1.0;
                z * z - 10.0 * (tau * z).cos() + 10.0
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_parsing() {
        assert_eq!("GA".parse::<Method>().unwrap(), Method::Ga);
        assert!("sa".parse::<Method>().is_err());
    }

    #[test]
    fn constant_objective_all_methods() {
        let cfg = BaselineConfig::default();
        for m in Method::ALL {
            let r = baseline_minimize(m, &|_: &PidGains| 4.5, 600, 3, &cfg).unwrap();
            assert_eq!(r.best_score, 4.5, "{m:?}");
            assert!(r.history.iter().all(|h| *h == 4.5));
            assert!(r.evals <= 600);
        }
    }

    #[test]
    fn baselines_deterministic_and_monotone() {
        let cfg = BaselineConfig::default();
        for m in Method::ALL {
            let a = baseline_minimize(m, &benchmarks::rastrigin, 900, 7, &cfg).unwrap();
            let b = baseline_minimize(m, &benchmarks::rastrigin, 900, 7, &cfg).unwrap();
            assert_eq!(a, b, "{m:?}");
            assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(*a.history.last().unwrap(), a.best_score);
            assert!(a.best_gains.is_admissible());
            assert!(a.evals <= 900);
        }
    }

    #[test]
    fn budget_below_population_rejected() {
        let cfg = BaselineConfig::default();
        assert!(baseline_minimize(Method::Ga, &benchmarks::sphere, 10, 0, &cfg).is_err());
    }
}
