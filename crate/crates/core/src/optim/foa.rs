//! Plain fruit fly optimization: random search around the best location.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    decayed_radius, eval_batch, eval_initial, gains_from_location, BaselineConfig, Objective, OptResult, Tracker, Vec3,
};
use crate::error::{Error, Result};

const MAX_RESAMPLES: usize = 1000;

pub fn foa_minimize<F: Objective>(objective: &F, budget: usize, seed: u64, cfg: &BaselineConfig) -> Result<OptResult> {
    cfg.validate()?;
    let n = cfg.pop_size;
    let iters = budget / n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = cfg.search_radius;

    let mut locs = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for _ in 0..n {
        let mut tries = 0;
        loop {
            let x: Vec3 = std::array::from_fn(|_| rng.random::<f64>() * radius);
            let g = gains_from_location(&x, &cfg.gain_scale);
            if g.is_admissible() {
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
    let scores = eval_initial(objective, &gains)?;
    let mut track = Tracker::new();
    track.offer(&locs, &gains, &scores);
    track.record();

    for t in 1..=iters {
        let r_t = decayed_radius(radius, cfg.radius_decay, t as f64 / iters as f64);
        let best = track.x;
        locs.clear();
        gains.clear();
        for _ in 0..n {
            loop {
                let u: Vec3 = std::array::from_fn(|_| r_t * (2.0 * rng.random::<f64>() - 1.0));
                let r: f64 = rng.random();
                let x: Vec3 = std::array::from_fn(|i| best[i] + r * u[i]);
                let g = gains_from_location(&x, &cfg.gain_scale);
                if g.is_admissible() {
                    locs.push(x);
                    gains.push(g);
                    break;
                }
            }
        }
        let scores = eval_batch(objective, &gains);
        track.offer(&locs, &gains, &scores);
        track.record();
    }
    track.finish()
}
