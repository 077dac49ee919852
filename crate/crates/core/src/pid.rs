//! Discrete PID and the judgment functional used to score closed-loop runs.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub fn is_admissible(&self) -> bool {
        [self.kp, self.ki, self.kd].iter().all(|g| g.is_finite() && *g > 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.is_admissible(), || {
            format!("PID gains must be finite and > 0, got {self:?}")
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.kp, self.ki, self.kd]
    }

    pub fn from_array(g: [f64; 3]) -> Self {
        Self::new(g[0], g[1], g[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
}

/// Backward-Euler integral, backward-difference derivative (zero on the first step).
pub fn pid_step(gains: &PidGains, state: PidState, e: f64, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let integral = state.integral + e * dt;
    let deriv = state.prev_error.map_or(0.0, |p| (e - p) / dt);
    let u = gains.kp * e + gains.ki * integral + gains.kd * deriv;
    (
        u,
        PidState {
            integral,
            prev_error: Some(e),
        },
    )
}

/// How the overshoot term enters the judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvershootBranch {
    /// `w4 · overshoot` wherever the output is beyond the reference.
    #[default]
    Standard,
    /// Literal branch order: `w4 · |excursion|` on samples after the rise where
    /// the excursion is not positive.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgmentWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    /// Length of the closed-loop run that is scored, s.
    pub horizon: f64,
    pub overshoot_branch: OvershootBranch,
}

impl Default for JudgmentWeights {
    fn default() -> Self {
        Self {
            w1: 0.999,
            w2: 0.001,
            w3: 2.0,
            w4: 100.0,
            horizon: 2.0,
            overshoot_branch: OvershootBranch::Standard,
        }
    }
}

impl JudgmentWeights {
    pub fn validate(&self) -> Result<()> {
        for (n, w) in [("w1", self.w1), ("w2", self.w2), ("w3", self.w3), ("w4", self.w4)] {
            ensure(w.is_finite() && w >= 0.0, || format!("{n} must be >= 0, got {w}"))?;
        }
        ensure(self.horizon > 0.0 && self.horizon.is_finite(), || {
            format!("horizon must be > 0, got {}", self.horizon)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgmentResult {
    pub j: f64,
    pub t_p: f64,
    pub overshoot_peak: f64,
}

/// Scores an error/effort trajectory.
///
/// The setpoint is carried by the error series; `_reference` is accepted for
/// symmetry with the plant interface.
///
/// The plant output is `reference − e`. The rise time is the first sample
/// time at which the error has reached zero or changed sign relative to its
/// first nonzero value (zero if the run starts on the reference, the run length
/// `n·dt` if it never gets there). Overshoot is the excursion past the
/// reference in the direction opposite to the initial error; a run that starts
/// on the reference has no approach side, so any departure counts.
pub fn judgment(e: &[f64], u: &[f64], dt: f64, w: &JudgmentWeights, _reference: f64) -> Result<JudgmentResult> {
    ensure(!e.is_empty(), || "judgment needs at least one sample".into())?;
    ensure(e.len() == u.len(), || {
        format!("series length mismatch: e has {}, u has {}", e.len(), u.len())
    })?;
    ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be > 0, got {dt}"))?;

    let sigma = e.iter().find(|x| **x != 0.0).map_or(0.0, |x| x.signum());
    let rise_idx = if e[0] == 0.0 {
        Some(0)
    } else {
        e.iter().position(|x| sigma * x <= 0.0)
    };
    let t_p = rise_idx.map_or(e.len() as f64 * dt, |k| k as f64 * dt);

    let mut acc = 0.0;
    let mut peak = 0.0f64;
    for (k, (&ek, &uk)) in e.iter().zip(u).enumerate() {
        let excursion = if e[0] == 0.0 { ek.abs() } else { -sigma * ek };
        peak = peak.max(excursion);
        let over = match w.overshoot_branch {
            OvershootBranch::Standard => excursion.max(0.0),
            OvershootBranch::AsPrinted => match rise_idx {
                Some(r) if k >= r && excursion <= 0.0 => excursion.abs(),
                _ => 0.0,
            },
        };
        acc += w.w1 * ek.abs() + w.w2 * uk * uk + w.w4 * over;
    }
    Ok(JudgmentResult {
        j: acc * dt + w.w3 * t_p,
        t_p,
        overshoot_peak: peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn proportional_only() {
        let g = PidGains::new(1.0, 1e-12, 1e-12);
        let (u, s) = pid_step(&g, PidState::default(), 2.0, 0.01);
        assert_relative_eq!(u, 2.0, max_relative = 1e-9);
        assert_eq!(s.prev_error, Some(2.0));
    }

    #[test]
    fn zero_error_gives_zero_output() {
        let g = PidGains::new(3.0, 2.0, 1.0);
        let mut s = PidState::default();
        for _ in 0..10 {
            let (u, ns) = pid_step(&g, s, 0.0, 0.001);
            assert_eq!(u, 0.0);
            assert_eq!(ns.integral, 0.0);
            s = ns;
        }
        assert_eq!(s.prev_error, Some(0.0));
    }

    #[test]
    fn ramp_derivative() {
        let g = PidGains::new(1e-12, 1e-12, 1.0);
        let dt = 0.01;
        let mut s = PidState::default();
        for n in 0..50 {
            let (u, ns) = pid_step(&g, s, n as f64 * dt, dt);
            if n == 0 {
                assert!(u.abs() < 1e-9);
            } else {
                assert_relative_eq!(u, 1.0, max_relative = 1e-6);
            }
            s = ns;
        }
    }

    #[test]
    fn judgment_zero_and_never_rising() {
        let w = JudgmentWeights::default();
        let r = judgment(&[0.0; 10], &[0.0; 10], 0.1, &w, 0.0).unwrap();
        assert_eq!(r.j, 0.0);
        assert_eq!(r.t_p, 0.0);

        let w = JudgmentWeights {
            w1: 1.0,
            w2: 0.0,
            w3: 2.0,
            w4: 0.0,
            ..w
        };
        let r = judgment(&[1.0; 100], &[0.0; 100], 0.01, &w, 0.0).unwrap();
        assert_relative_eq!(r.j, 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.t_p, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn judgment_rise_and_overshoot() {
        let w = JudgmentWeights {
            w1: 0.0,
            w2: 0.0,
            w3: 1.0,
            w4: 1.0,
            ..Default::default()
        };
        let e = [1.0, 0.5, -0.25, -0.5, 0.0];
        let r = judgment(&e, &[0.0; 5], 0.1, &w, 1.0).unwrap();
        assert_relative_eq!(r.t_p, 0.2, max_relative = 1e-12);
        assert_relative_eq!(r.overshoot_peak, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.j, 0.2 + 0.75 * 0.1, max_relative = 1e-12);

        let printed = JudgmentWeights {
            overshoot_branch: OvershootBranch::AsPrinted,
            ..w
        };
        let r = judgment(&e, &[0.0; 5], 0.1, &printed, 1.0).unwrap();
        // only the post-rise sample back on the reference side: index 4 (excursion 0)
        assert_relative_eq!(r.j, 0.2, max_relative = 1e-12);
    }

    #[test]
    fn regulation_run_penalizes_both_sides() {
        let w = JudgmentWeights {
            w1: 0.0,
            w2: 0.0,
            w3: 0.0,
            w4: 1.0,
            ..Default::default()
        };
        let r = judgment(&[0.0, 0.5, -0.25, 0.0], &[0.0; 4], 0.1, &w, 0.0).unwrap();
        assert_eq!(r.t_p, 0.0);
        assert_relative_eq!(r.overshoot_peak, 0.5, max_relative = 1e-12);
        assert_relative_eq!(r.j, 0.075, max_relative = 1e-12);
    }

    #[test]
    fn judgment_rejects_mismatch() {
        let w = JudgmentWeights::default();
        assert!(judgment(&[1.0, 2.0], &[0.0], 0.1, &w, 0.0).is_err());
        assert!(judgment(&[], &[], 0.1, &w, 0.0).is_err());
    }

    #[test]
    fn effort_scales_quadratically() {
        let w = JudgmentWeights {
            w1: 0.0,
            w3: 0.0,
            w4: 0.0,
            w2: 1.0,
            ..Default::default()
        };
        let e = [0.3, 0.1, -0.2];
        let u = [1.0, -2.0, 0.5];
        let base = judgment(&e, &u, 0.01, &w, 0.0).unwrap().j;
        let u3: Vec<f64> = u.iter().map(|x| 3.0 * x).collect();
        let scaled = judgment(&e, &u3, 0.01, &w, 0.0).unwrap().j;
        assert_relative_eq!(scaled, 9.0 * base, max_relative = 1e-12);
    }
}
