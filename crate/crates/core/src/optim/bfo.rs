//! Bacterial foraging: chemotaxis with swimming, reproduction, and
//! elimination-dispersal. Runs sequentially since every move depends on the
//! previous evaluation.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{decayed_radius, eval_initial, gains_from_location, BaselineConfig, Objective, OptResult, Tracker, Vec3};
use crate::error::{ensure, Result};
use crate::pid::PidGains;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BfoParams {
    pub chemotactic_steps: usize,
    pub swim_length: usize,
    pub reproduction_steps: usize,
    pub elimination_steps: usize,
    pub elimination_prob: f64,
    /// Initial run-length unit as a fraction of `search_radius`.
    pub step_size: f64,
}

impl Default for BfoParams {
    fn default() -> Self {
        Self {
            chemotactic_steps: 20,
            swim_length: 4,
            reproduction_steps: 4,
            elimination_steps: 2,
            elimination_prob: 0.25,
            step_size: 0.1,
        }
    }
}

struct Colony<'a, F: Objective> {
    objective: &'a F,
    scale: Vec3,
    budget: usize,
    track: Tracker,
}

impl<F: Objective> Colony<'_, F> {
    fn exhausted(&self) -> bool {
        self.track.evals >= self.budget
    }

    fn eval(&mut self, x: Vec3) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let g = gains_from_location(&x, &self.scale);
        let s = if g.is_admissible() {
            let v = (self.objective)(&g);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        } else {
            f64::INFINITY
        };
        self.track.offer(&[x], &[g], &[s]);
        Some(s)
    }
}

fn draw_location(rng: &mut ChaCha8Rng, radius: f64, scale: &Vec3) -> (Vec3, PidGains) {
    loop {
        let x: Vec3 = std::array::from_fn(|_| rng.random::<f64>() * radius);
        let g = gains_from_location(&x, scale);
        if g.is_admissible() {
            return (x, g);
        }
    }
}

pub fn bfo_minimize<F: Objective>(objective: &F, budget: usize, seed: u64, cfg: &BaselineConfig) -> Result<OptResult> {
    let p = &cfg.bfo;
    ensure(
        p.chemotactic_steps >= 1 && p.reproduction_steps >= 1 && p.elimination_steps >= 1,
        || "BFO loop counts must be >= 1".into(),
    )?;
    let n = cfg.pop_size;
    let radius = cfg.search_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut pos, gains): (Vec<Vec3>, Vec<PidGains>) =
        (0..n).map(|_| draw_location(&mut rng, radius, &cfg.gain_scale)).unzip();
    let mut cost = eval_initial(objective, &gains)?;
    let mut colony = Colony {
        objective,
        scale: cfg.gain_scale,
        budget,
        track: Tracker::new(),
    };
    colony.track.offer(&pos, &gains, &cost);
    colony.track.record();

    'outer: loop {
        for _ in 0..p.elimination_steps {
            for _ in 0..p.reproduction_steps {
                let mut health = vec![0.0; n];
                for _ in 0..p.chemotactic_steps {
                    let progress = colony.track.evals as f64 / budget as f64;
                    let c = decayed_radius(p.step_size * radius, cfg.radius_decay, progress);
                    for k in 0..n {
                        let dir: Vec3 = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-300);
                        let unit: Vec3 = std::array::from_fn(|i| dir[i] / norm);
                        let mut last = cost[k];
                        let tumble: Vec3 = std::array::from_fn(|i| pos[k][i] + c * unit[i]);
                        let Some(j) = colony.eval(tumble) else { break 'outer };
                        if j < last {
                            pos[k] = tumble;
                            cost[k] = j;
                            last = j;
                            for _ in 0..p.swim_length {
                                let swim: Vec3 = std::array::from_fn(|i| pos[k][i] + c * unit[i]);
                                let Some(j) = colony.eval(swim) else { break 'outer };
                                if j < last {
                                    pos[k] = swim;
                                    cost[k] = j;
                                    last = j;
                                } else {
                                    break;
                                }
                            }
                        }
                        health[k] += cost[k];
                    }
                    colony.track.record();
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| health[a].total_cmp(&health[b]));
                let half = n / 2;
                let survivors: Vec<(Vec3, f64)> = order[..n - half].iter().map(|&i| (pos[i], cost[i])).collect();
                for k in 0..n {
                    let (x, c) = survivors[k % survivors.len()];
                    pos[k] = x;
                    cost[k] = c;
                }
            }
            for k in 0..n {
                if rng.random::<f64>() < p.elimination_prob {
                    let (x, _) = draw_location(&mut rng, radius, &cfg.gain_scale);
                    let Some(j) = colony.eval(x) else { break 'outer };
                    pos[k] = x;
                    cost[k] = j;
                }
            }
        }
        if colony.exhausted() {
            break;
        }
    }
    if colony.track.history.last() != Some(&colony.track.score) {
        colony.track.record();
    }
    colony.track.finish()
}
