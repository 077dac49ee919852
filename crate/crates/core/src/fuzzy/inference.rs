use serde::{Deserialize, Serialize};

use super::membership::{bell, BellMF, FuzzyVariable, ACCELERATION_MFS, DISTORTION_MFS, FORCE_MFS, VELOCITY_MFS};
use super::rules::{build_rule_base_for, RuleBase};
use crate::error::{ensure, Result};

/// Membership-function parameters and defuzzification settings, as loaded from config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzyParams {
    pub velocity: [BellMF; 9],
    pub acceleration: [BellMF; 9],
    pub distortion: [BellMF; 9],
    pub force: [BellMF; 9],
    /// Output universe the centroid is taken over.
    pub output_range: [f64; 2],
    pub grid_points: usize,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self {
            velocity: VELOCITY_MFS,
            acceleration: ACCELERATION_MFS,
            distortion: DISTORTION_MFS,
            force: FORCE_MFS,
            output_range: [0.0, 350.0],
            grid_points: 1001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inference {
    pub u: f64,
    /// Set when no rule fired and `u` fell back to the universe midpoint.
    pub no_firing: bool,
}

/// Immutable three-input Mamdani controller.
#[derive(Debug, Clone)]
pub struct FuzzySystem {
    pub velocity: FuzzyVariable,
    pub acceleration: FuzzyVariable,
    pub distortion: FuzzyVariable,
    pub force: FuzzyVariable,
    pub rules: RuleBase,
    output_range: (f64, f64),
    clamp: (f64, f64),
    grid: Vec<f64>,
    /// `out_mu[level][j]`: membership of grid point `j` in each output level.
    out_mu: Vec<[f64; 9]>,
    rule_out: [u8; 729],
}

impl FuzzySystem {
    pub fn from_params(p: &FuzzyParams) -> Result<Self> {
        let velocity = FuzzyVariable::new("velocity", p.velocity)?;
        let acceleration = FuzzyVariable::new("acceleration", p.acceleration)?;
        let distortion = FuzzyVariable::new("distortion", p.distortion)?;
        let rules = build_rule_base_for(&velocity, &acceleration, &distortion);
        Self::with_rules(p, rules)
    }

    pub fn with_rules(p: &FuzzyParams, rules: RuleBase) -> Result<Self> {
        let velocity = FuzzyVariable::new("velocity", p.velocity)?;
        let acceleration = FuzzyVariable::new("acceleration", p.acceleration)?;
        let distortion = FuzzyVariable::new("distortion", p.distortion)?;
        let [lo, hi] = p.output_range;
        ensure(lo.is_finite() && hi.is_finite() && lo < hi, || {
            format!("output_range must be increasing, got {:?}", p.output_range)
        })?;
        ensure(p.grid_points >= 2, || "grid_points must be >= 2".into())?;
        let force = FuzzyVariable::with_universe("force", p.force, (lo, hi))?;
        let n = p.grid_points;
        let grid: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
        let out_mu = grid
            .iter()
            .map(|&y| std::array::from_fn(|l| bell(y, &force.mfs[l])))
            .collect();
        let rule_out = rules.ordinals();
        Ok(Self {
            velocity,
            acceleration,
            distortion,
            force,
            rules,
            output_range: (lo, hi),
            clamp: (lo, hi),
            grid,
            out_mu,
            rule_out,
        })
    }

    /// Bounds the defuzzified output is clamped to (the damper limits).
    pub fn with_output_clamp(mut self, f_min: f64, f_max: f64) -> Self {
        self.clamp = (f_min, f_max);
        self
    }

    /// Strongest firing of each output level (min-AND over antecedents, max over rules).
    pub fn activations(&self, velocity: f64, acceleration: f64, distortion: f64) -> [f64; 9] {
        let mv = self.velocity.memberships(velocity);
        let ma = self.acceleration.memberships(acceleration);
        let md = self.distortion.memberships(distortion);
        let mut alpha = [0.0f64; 9];
        for (iv, &v) in mv.iter().enumerate() {
            for (ia, &a) in ma.iter().enumerate() {
                let va = v.min(a);
                let base = (iv * 9 + ia) * 9;
                for (id, &d) in md.iter().enumerate() {
                    let o = self.rule_out[base + id] as usize;
                    let w = va.min(d);
                    if w > alpha[o] {
                        alpha[o] = w;
                    }
                }
            }
        }
        alpha
    }

    pub fn infer_detailed(&self, velocity: f64, acceleration: f64, distortion: f64) -> Inference {
        let alpha = self.activations(velocity, acceleration, distortion);
        let n = self.grid.len();
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (&y, mu_l)) in self.grid.iter().zip(&self.out_mu).enumerate() {
            let mut mu = 0.0f64;
            for l in 0..9 {
                mu = mu.max(alpha[l].min(mu_l[l]));
            }
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            num += w * mu * y;
            den += w * mu;
        }
        let (lo, hi) = self.output_range;
        let (u, no_firing) = if den > 0.0 && den.is_finite() {
            (num / den, false)
        } else {
            (0.5 * (lo + hi), true)
        };
        Inference {
            u: u.clamp(self.clamp.0, self.clamp.1),
            no_firing,
        }
    }

    pub fn infer(&self, velocity: f64, acceleration: f64, distortion: f64) -> f64 {
        self.infer_detailed(velocity, acceleration, distortion).u
    }
}

impl Default for FuzzySystem {
    fn default() -> Self {
        Self::from_params(&FuzzyParams::default()).expect("default fuzzy parameters are valid")
    }
}

/// Output level whose membership at `u` is largest.
pub fn nearest_level(sys: &FuzzySystem, u: f64) -> super::Level {
    let mut best = super::Level::NMin;
    let mut best_mu = f64::NEG_INFINITY;
    for l in super::Level::ALL {
        let m = bell(u, sys.force.mf(l));
        if m > best_mu {
            best_mu = m;
            best = l;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::rules::PRINTED_RULES;
    use super::*;

    #[test]
    fn output_stays_in_universe() {
        let sys = FuzzySystem::default();
        for &v in &[-5.0, -1.0, 0.0, 0.3, 2.0, 40.0] {
            for &a in &[-100.0, -9.0, 0.0, 3.0, 10.0, 100.0] {
                for &d in &[-1.0, 0.0, 0.2, 0.5, 3.0] {
                    let u = sys.infer(v, a, d);
                    assert!((0.0..=350.0).contains(&u), "{v} {a} {d} -> {u}");
                }
            }
        }
    }

    #[test]
    fn rule_seven_gives_high_force() {
        let sys = FuzzySystem::default();
        assert!(sys.infer(-1.0, -9.0, 0.0193) >= 300.0);
    }

    #[test]
    fn printed_rules_fire_to_consequents() {
        let sys = FuzzySystem::default();
        for ((v, a, d), o) in PRINTED_RULES {
            let u = sys.infer(sys.velocity.mf(v).r, sys.acceleration.mf(a).r, sys.distortion.mf(d).r);
            assert_eq!(nearest_level(&sys, u), o, "({v}, {a}, {d}) -> {u}");
        }
    }

    #[test]
    fn uniform_rules_center_on_their_level() {
        let sys =
            FuzzySystem::with_rules(&FuzzyParams::default(), RuleBase::uniform(super::super::Level::Small)).unwrap();
        let u = sys.infer(0.1, 0.2, 0.3);
        assert!((u - 175.0).abs() < 1e-9);
    }

    #[test]
    fn output_clamp_applies() {
        let sys = FuzzySystem::default().with_output_clamp(0.0, 100.0);
        assert!(sys.infer(-1.0, -9.0, 0.0193) <= 100.0);
    }
}
