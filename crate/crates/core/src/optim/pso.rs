//! Global-best particle swarm with constriction coefficients.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    decayed_radius, eval_batch, eval_initial, gains_from_location, BaselineConfig, Objective, OptResult, Tracker, Vec3,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Velocity limit as a fraction of `search_radius`, decayed over the budget.
    pub v_max: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.7298,
            c1: 1.49618,
            c2: 1.49618,
            v_max: 0.5,
        }
    }
}

pub fn pso_minimize<F: Objective>(objective: &F, budget: usize, seed: u64, cfg: &BaselineConfig) -> Result<OptResult> {
    let p = &cfg.pso;
    let n = cfg.pop_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = cfg.search_radius;

    let mut pos: Vec<Vec3> = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    while pos.len() < n {
        let x: Vec3 = std::array::from_fn(|_| rng.random::<f64>() * radius);
        let g = gains_from_location(&x, &cfg.gain_scale);
        if g.is_admissible() {
            pos.push(x);
            gains.push(g);
        }
    }
    let mut vel: Vec<Vec3> = (0..n)
        .map(|_| std::array::from_fn(|_| (2.0 * rng.random::<f64>() - 1.0) * p.v_max * radius))
        .collect();
    let scores = eval_initial(objective, &gains)?;
    let mut track = Tracker::new();
    track.offer(&pos, &gains, &scores);
    track.record();
    let mut pbest = pos.clone();
    let mut pbest_score = scores;

    while track.evals + n <= budget {
        let v_lim = decayed_radius(p.v_max * radius, cfg.radius_decay, track.evals as f64 / budget as f64);
        let gbest = track.x;
        for k in 0..n {
            loop {
                let mut v = vel[k];
                let mut x = pos[k];
                for i in 0..3 {
                    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                    v[i] = p.inertia * v[i] + p.c1 * r1 * (pbest[k][i] - x[i]) + p.c2 * r2 * (gbest[i] - x[i]);
                    v[i] = v[i].clamp(-v_lim, v_lim);
                    x[i] += v[i];
                }
                let g = gains_from_location(&x, &cfg.gain_scale);
                if g.is_admissible() {
                    vel[k] = v;
                    pos[k] = x;
                    gains[k] = g;
                    break;
                }
            }
        }
        let scores = eval_batch(objective, &gains);
        for k in 0..n {
            if scores[k] < pbest_score[k] {
                pbest_score[k] = scores[k];
                pbest[k] = pos[k];
            }
        }
        track.offer(&pos, &gains, &scores);
        track.record();
    }
    track.finish()
}
