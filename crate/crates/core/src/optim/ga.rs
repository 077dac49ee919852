//! Real-coded genetic algorithm: tournament selection, BLX-α crossover,
//! Gaussian mutation, elitism.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    decayed_radius, eval_batch, eval_initial, gains_from_location, BaselineConfig, Objective, OptResult, Tracker, Vec3,
};
use crate::error::{ensure, Result};
use crate::pid::PidGains;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub tournament: usize,
    pub crossover_rate: f64,
    pub blx_alpha: f64,
    pub mutation_rate: f64,
    /// Initial mutation standard deviation as a fraction of `search_radius`.
    pub mutation_sigma: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            tournament: 3,
            crossover_rate: 0.9,
            blx_alpha: 0.5,
            mutation_rate: 0.2,
            mutation_sigma: 0.1,
            elitism: 1,
        }
    }
}

fn admissible(x: Vec3, scale: &Vec3) -> Option<(Vec3, PidGains)> {
    let g = gains_from_location(&x, scale);
    g.is_admissible().then_some((x, g))
}

pub fn ga_minimize<F: Objective>(objective: &F, budget: usize, seed: u64, cfg: &BaselineConfig) -> Result<OptResult> {
    let p = &cfg.ga;
    let n = cfg.pop_size;
    ensure(p.tournament >= 1 && p.elitism < n, || {
        "need tournament >= 1 and elitism < pop_size".into()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = cfg.search_radius;

    let mut pop: Vec<Vec3> = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    while pop.len() < n {
        let x: Vec3 = std::array::from_fn(|_| rng.random::<f64>() * radius);
        if let Some((x, g)) = admissible(x, &cfg.gain_scale) {
            pop.push(x);
            gains.push(g);
        }
    }
    let mut fit = eval_initial(objective, &gains)?;
    let mut track = Tracker::new();
    track.offer(&pop, &gains, &fit);
    track.record();

    let children = n - p.elitism;
    while track.evals + children <= budget {
        let sigma = decayed_radius(
            p.mutation_sigma * radius,
            cfg.radius_decay,
            track.evals as f64 / budget as f64,
        );
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));

        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let mut best = rng.random_range(0..n);
            for _ in 1..p.tournament {
                let c = rng.random_range(0..n);
                if fit[c] < fit[best] {
                    best = c;
                }
            }
            best
        };

        let mut next: Vec<Vec3> = Vec::with_capacity(children);
        let mut next_gains = Vec::with_capacity(children);
        while next.len() < children {
            let (a, b) = (pop[tournament(&mut rng)], pop[tournament(&mut rng)]);
            let cross = rng.random::<f64>() < p.crossover_rate;
            let mut child: Vec3 = if cross {
                std::array::from_fn(|i| {
                    let (lo, hi) = (a[i].min(b[i]), a[i].max(b[i]));
                    let ext = p.blx_alpha * (hi - lo);
                    lo - ext + rng.random::<f64>() * (hi - lo + 2.0 * ext)
                })
            } else {
                a
            };
            for c in child.iter_mut() {
                if rng.random::<f64>() < p.mutation_rate {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *c += sigma * z;
                }
            }
            if let Some((x, g)) = admissible(child, &cfg.gain_scale) {
                next.push(x);
                next_gains.push(g);
            }
        }
        let scores = eval_batch(objective, &next_gains);
        track.offer(&next, &next_gains, &scores);
        track.record();

        let elites: Vec<(Vec3, f64)> = order[..p.elitism].iter().map(|&i| (pop[i], fit[i])).collect();
        pop = elites.iter().map(|e| e.0).chain(next).collect();
        fit = elites.iter().map(|e| e.1).chain(scores).collect();
    }
    track.finish()
}
