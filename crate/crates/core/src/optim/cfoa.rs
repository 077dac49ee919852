//! Chaotic fruit fly optimization.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    decayed_radius, eval_batch, eval_initial, gains_from_location, validate_space, Objective, OptResult, Tracker, Vec3,
};
use crate::error::{ensure, Error, Result};
use crate::pid::PidGains;

/// Map from a fly location to PID gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainEncoding {
    /// Each gain is the absolute coordinate on its own axis, times `gain_scale`.
    #[default]
    Axis,
    /// Each gain is the absolute smell concentration of its own coordinate,
    /// times `gain_scale`.
    Smell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwarmMode {
    /// One swarm moves all three axes together.
    #[default]
    Joint,
    /// One swarm per gain; iteration `t` moves only axis `t mod 3`.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChaosSource {
    #[default]
    Logistic,
    /// Plain uniform draws from the main stream in place of the logistic map.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// Fresh uniform β each iteration.
    #[default]
    PerIteration,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CfoaConfig {
    pub pop_size: usize,
    pub max_iter: usize,
    pub s: f64,
    pub logistic_mu: f64,
    /// Initial flies are drawn from `[0, search_radius]³`; also the initial chaotic step.
    pub search_radius: f64,
    /// Fraction of `search_radius` left as the chaotic step at the last iteration.
    pub radius_decay: f64,
    pub beta_mode: BetaMode,
    pub seed: u64,
    pub gain_scale: Vec3,
    pub encoding: GainEncoding,
    pub swarm: SwarmMode,
    pub chaos: ChaosSource,
}

impl Default for CfoaConfig {
    fn default() -> Self {
        Self {
            pop_size: 30,
            max_iter: 200,
            s: 0.7,
            logistic_mu: 4.0,
            search_radius: 2.0,
            radius_decay: 1e-3,
            beta_mode: BetaMode::PerIteration,
            seed: 0,
            gain_scale: [1.0; 3],
            encoding: GainEncoding::Axis,
            swarm: SwarmMode::Joint,
            chaos: ChaosSource::Logistic,
        }
    }
}

impl CfoaConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.pop_size >= 2, || {
            format!("pop_size must be >= 2, got {}", self.pop_size)
        })?;
        ensure(self.max_iter >= 1, || "max_iter must be >= 1".into())?;
        ensure((0.0..=1.0).contains(&self.s), || {
            format!("s must be in [0, 1], got {}", self.s)
        })?;
        ensure(self.logistic_mu > 0.0 && self.logistic_mu <= 4.0, || {
            format!("logistic_mu must be in (0, 4], got {}", self.logistic_mu)
        })?;
        ensure(self.radius_decay > 0.0 && self.radius_decay <= 1.0, || {
            format!("radius_decay must be in (0, 1], got {}", self.radius_decay)
        })?;
        if let BetaMode::Fixed(b) = self.beta_mode {
            ensure((0.0..=1.0).contains(&b), || {
                format!("fixed beta must be in [0, 1], got {b}")
            })?;
        }
        validate_space(self.search_radius, &self.gain_scale)
    }

    /// Objective calls made by [`cfoa_minimize`].
    pub fn budget(&self) -> usize {
        self.pop_size * (self.max_iter + 1)
    }
}

/// `μ · c · (1 − c)`.
pub fn logistic_step(c: f64, mu: f64) -> Result<f64> {
    ensure(c > 0.0 && c < 1.0, || {
        format!("logistic state must be in (0, 1), got {c}")
    })?;
    Ok(mu * c * (1.0 - c))
}

/// `loc + s · balance + r · (1 − s) · chaos`, per axis.
pub fn chaotic_update(loc: Vec3, balance: Vec3, chaos: Vec3, r: f64, s: f64) -> Vec3 {
    std::array::from_fn(|i| loc[i] + s * balance[i] + r * (1.0 - s) * chaos[i])
}

/// `1/D + D · (0.5 − β)` with `D` the Euclidean norm of `loc`.
pub fn smell_concentration(loc: &[f64], beta: f64) -> Result<f64> {
    let d = loc.iter().map(|x| x * x).sum::<f64>().sqrt();
    ensure(d > 0.0, || "smell concentration is undefined at the origin".into())?;
    Ok(1.0 / d + d * (0.5 - beta))
}

fn degenerate(c: f64) -> bool {
    !(c > 0.0 && c < 1.0) || c == 0.25 || c == 0.5 || c == 0.75
}

fn fresh_state(rng: &mut impl Rng) -> f64 {
    loop {
        let c: f64 = rng.random();
        if !degenerate(c) {
            return c;
        }
    }
}

struct Chaos {
    source: ChaosSource,
    mu: f64,
    states: Vec<Vec3>,
}

impl Chaos {
    fn new(cfg: &CfoaConfig, rng: &mut ChaCha8Rng) -> Self {
        let states = match cfg.chaos {
            ChaosSource::Logistic => (0..cfg.pop_size)
                .map(|_| std::array::from_fn(|_| fresh_state(rng)))
                .collect(),
            ChaosSource::Uniform => Vec::new(),
        };
        Self {
            source: cfg.chaos,
            mu: cfg.logistic_mu,
            states,
        }
    }

    /// Next chaos value in `[0, 1]` for fly `k`, axis `i`.
    fn next(&mut self, k: usize, i: usize, rng: &mut ChaCha8Rng) -> f64 {
        match self.source {
            ChaosSource::Uniform => rng.random(),
            ChaosSource::Logistic => {
                let c = self.states[k][i];
                let next = self.mu * c * (1.0 - c);
                self.states[k][i] = if degenerate(next) { fresh_state(rng) } else { next };
                next.clamp(0.0, 1.0)
            }
        }
    }
}

fn encode(x: &Vec3, cfg: &CfoaConfig, beta: f64) -> Option<PidGains> {
    let g = match cfg.encoding {
        GainEncoding::Axis => gains_from_location(x, &cfg.gain_scale),
        GainEncoding::Smell => {
            let mut g = [0.0; 3];
            for i in 0..3 {
                g[i] = smell_concentration(&[x[i]], beta).ok()?.abs() * cfg.gain_scale[i];
            }
            PidGains::from_array(g)
        }
    };
    g.is_admissible().then_some(g)
}

const MAX_RESAMPLES: usize = 1000;

/// Minimizes `objective` over positive PID gains.
///
/// The swarm sits at the best location found so far. Each fly remembers its
/// previous location `p_k` and proposes
/// `best + s · (p_k − best) + r · (1 − s) · R_t · (2c − 1)`,
/// so it keeps a fraction `s` of its offset from the swarm while the chaotic
/// term explores. `c` comes from a per-fly, per-axis logistic map and `R_t`
/// shrinks geometrically from `search_radius` to `search_radius · radius_decay`.
/// With `s = 0` and uniform chaos this is plain fruit fly search.
/// Candidates whose gains are not all positive are redrawn.
pub fn cfoa_minimize<F: Objective>(objective: &F, cfg: &CfoaConfig) -> Result<OptResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut beta_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xB5AD_4ECE_DA1C_E2A9);
    let n = cfg.pop_size;
    let radius = cfg.search_radius;

    let mut beta = match cfg.beta_mode {
        BetaMode::Fixed(b) => b,
        BetaMode::PerIteration => beta_rng.random(),
    };

    let mut locs = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for _ in 0..n {
        let mut tries = 0;
        loop {
            let x: Vec3 = std::array::from_fn(|_| rng.random::<f64>() * radius);
            if let Some(g) = encode(&x, cfg, beta) {
                locs.push(x);
                gains.push(g);
                break;
            }
            tries += 1;
            if tries > MAX_RESAMPLES {
                return Err(Error::Optimizer("could not draw an admissible initial fly".into()));
            }
        }
    }
    let mut chaos = Chaos::new(cfg, &mut rng);

    let scores = eval_initial(objective, &gains)?;
    let mut track = Tracker::new();
    track.offer(&locs, &gains, &scores);
    track.record();
    let mut prev = locs;

    for t in 1..=cfg.max_iter {
        if cfg.beta_mode == BetaMode::PerIteration {
            beta = beta_rng.random();
        }
        let r_t = decayed_radius(radius, cfg.radius_decay, t as f64 / cfg.max_iter as f64);
        let best = track.x;
        let axis = t % 3;
        let mut cands = Vec::with_capacity(n);
        gains.clear();
        for (k, p) in prev.iter().enumerate() {
            let mut tries = 0;
            loop {
                let step: Vec3 = std::array::from_fn(|i| r_t * (2.0 * chaos.next(k, i, &mut rng) - 1.0));
                let r: f64 = rng.random();
                let balance: Vec3 = std::array::from_fn(|i| p[i] - best[i]);
                let mut x = chaotic_update(best, balance, step, r, cfg.s);
                if cfg.swarm == SwarmMode::Independent {
                    for i in (0..3).filter(|&i| i != axis) {
                        x[i] = best[i];
                    }
                }
                if let Some(g) = encode(&x, cfg, beta) {
                    cands.push(x);
                    gains.push(g);
                    break;
                }
                tries += 1;
                if tries > MAX_RESAMPLES {
                    return Err(Error::Optimizer(format!(
                        "fly {k} stuck outside the admissible region at iteration {t}"
                    )));
                }
            }
        }
        let scores = eval_batch(objective, &gains);
        track.offer(&cands, &gains, &scores);
        track.record();
        prev = cands;
    }
    track.finish()
}
