//! Ziegler–Nichols ultimate-gain tuning.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::pid::PidGains;

/// A loop that can be closed with a pure proportional gain.
pub trait OscillationProbe {
    /// Output samples, one per `dt`, of the loop closed with gain `kp`.
    fn response(&self, kp: f64) -> Result<Vec<f64>>;
    fn dt(&self) -> f64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZnConfig {
    pub kp_start: f64,
    pub kp_min: f64,
    pub kp_max: f64,
    /// Bisection stops once the bracket is narrower than this fraction of its upper end.
    pub rel_tol: f64,
}

impl Default for ZnConfig {
    fn default() -> Self {
        Self {
            kp_start: 1.0,
            kp_min: 1e-9,
            kp_max: 1e9,
            rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZnResult {
    pub k_u: f64,
    pub t_u: f64,
    pub gains: PidGains,
}

const DIVERGED: f64 = 1e6;

/// Alternating local extrema whose swing exceeds a relative noise floor.
fn extrema(y: &[f64]) -> Vec<(usize, f64)> {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 1e-9 * scale.max(1e-300);
    let mut raw: Vec<(usize, f64)> = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let is_max = y[i] > y[i - 1] && y[i] >= y[i + 1];
        let is_min = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if is_max || is_min {
            raw.push((i, y[i]));
        }
    }
    let mut out: Vec<(usize, f64)> = Vec::new();
    for e in raw {
        match out.last() {
            Some(last) if (e.1 - last.1).abs() <= floor => {}
            _ => out.push(e),
        }
    }
    out
}

/// Sustained or growing oscillation: the last swing between consecutive
/// extrema is at least the first one. A run that blows up also counts.
pub fn oscillates(y: &[f64]) -> bool {
    if y.iter().any(|v| !v.is_finite() || v.abs() > DIVERGED) {
        return true;
    }
    let ex = extrema(y);
    if ex.len() < 4 {
        return false;
    }
    let first = (ex[1].1 - ex[0].1).abs();
    let last = (ex[ex.len() - 1].1 - ex[ex.len() - 2].1).abs();
    last >= first
}

fn period(y: &[f64], dt: f64) -> Option<f64> {
    let ex = extrema(y);
    let maxima: Vec<usize> = ex.windows(2).filter(|w| w[1].1 > w[0].1).map(|w| w[1].0).collect();
    // the first peak still carries the step transient
    let m = maxima.get(1..)?;
    if m.len() < 2 {
        return None;
    }
    Some((m[m.len() - 1] - m[0]) as f64 * dt / (m.len() - 1) as f64)
}

/// Brackets and bisects the smallest proportional gain that sustains
/// oscillation, then applies the classic PID rule.
pub fn zn_tune<P: OscillationProbe + ?Sized>(probe: &P, cfg: &ZnConfig) -> Result<ZnResult> {
    ensure(
        cfg.kp_min > 0.0 && cfg.kp_min <= cfg.kp_start && cfg.kp_start <= cfg.kp_max,
        || "need 0 < kp_min <= kp_start <= kp_max".into(),
    )?;
    ensure(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0, || {
        "rel_tol must be in (0, 1)".into()
    })?;
    let osc = |kp: f64| -> Result<bool> { Ok(oscillates(&probe.response(kp)?)) };

    let (mut lo, mut hi);
    if osc(cfg.kp_start)? {
        hi = cfg.kp_start;
        lo = hi / 2.0;
        while osc(lo)? {
            hi = lo;
            lo /= 2.0;
            if lo < cfg.kp_min {
                return Err(Error::NoOscillation { max_gain: cfg.kp_min });
            }
        }
    } else {
        lo = cfg.kp_start;
        hi = lo * 2.0;
        while !osc(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > cfg.kp_max {
                return Err(Error::NoOscillation { max_gain: cfg.kp_max });
            }
        }
    }
    while hi - lo > cfg.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if osc(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let k_u = hi;
    let y = probe.response(k_u)?;
    let t_u = period(&y, probe.dt()).ok_or(Error::NoOscillation { max_gain: k_u })?;
    let kp = 0.6 * k_u;
    let gains = PidGains::new(kp, 2.0 * kp / t_u, kp * t_u / 8.0);
    gains.validate()?;
    Ok(ZnResult { k_u, t_u, gains })
}

/// Strictly proper SISO transfer function under unit-feedback proportional
/// control with a step reference, integrated with RK4 and a zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiPlantProbe {
    /// Companion-form denominator coefficients `a_1 … a_n` of `s^n + a_1 s^{n-1} + … + a_n`.
    a: Vec<f64>,
    /// Output weights on the companion states `x_1 … x_n`.
    c: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub reference: f64,
}

impl LtiPlantProbe {
    /// `num` and `den` list coefficients from the highest power down.
    pub fn new(num: &[f64], den: &[f64], dt: f64, horizon: f64) -> Result<Self> {
        ensure(den.len() >= 2 && den[0] != 0.0, || {
            "denominator must have degree >= 1".into()
        })?;
        let n = den.len() - 1;
        let num: Vec<f64> = {
            let first = num.iter().position(|v| *v != 0.0).unwrap_or(num.len());
            num[first..].to_vec()
        };
        ensure(!num.is_empty() && num.len() <= n, || {
            "transfer function must be strictly proper and nonzero".into()
        })?;
        ensure(dt > 0.0 && horizon > dt, || "need dt > 0 and horizon > dt".into())?;
        let a: Vec<f64> = den[1..].iter().map(|v| v / den[0]).collect();
        // y = Σ b_{n-k} x_{k+1}: pad numerator to length n, lowest power last.
        let mut b = vec![0.0; n - num.len()];
        b.extend(num.iter().map(|v| v / den[0]));
        let c: Vec<f64> = b.iter().rev().copied().collect();
        Ok(Self {
            a,
            c,
            dt,
            horizon,
            reference: 1.0,
        })
    }

    fn deriv(&self, x: &[f64], u: f64, out: &mut [f64]) {
        let n = x.len();
        out[..n - 1].copy_from_slice(&x[1..]);
        let mut acc = u;
        for (k, ak) in self.a.iter().enumerate() {
            acc -= ak * x[n - 1 - k];
        }
        out[n - 1] = acc;
    }

    fn output(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }
}

impl OscillationProbe for LtiPlantProbe {
    fn response(&self, kp: f64) -> Result<Vec<f64>> {
        let n = self.a.len();
        let steps = (self.horizon / self.dt).round() as usize;
        let mut x = vec![0.0; n];
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let h = self.dt;
        let mut y = Vec::with_capacity(steps + 1);
        for _ in 0..=steps {
            let yk = self.output(&x);
            y.push(yk);
            if !yk.is_finite() || yk.abs() > DIVERGED {
                break;
            }
            let u = kp * (self.reference - yk);
            self.deriv(&x, u, &mut k1);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k1[i];
            }
            self.deriv(&tmp, u, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k2[i];
            }
            self.deriv(&tmp, u, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + h * k3[i];
            }
            self.deriv(&tmp, u, &mut k4);
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        Ok(y)
    }

    fn dt(&self) -> f64 {
        self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillation_predicate() {
        let decaying: Vec<f64> = (0..5000)
            .map(|i| (-0.001 * i as f64).exp() * (0.01 * i as f64).sin())
            .collect();
        assert!(!oscillates(&decaying));
        let growing: Vec<f64> = (0..5000)
            .map(|i| (0.0005 * i as f64).exp() * (0.01 * i as f64).sin())
            .collect();
        assert!(oscillates(&growing));
        let monotone: Vec<f64> = (0..1000).map(|i| 1.0 - (-0.01 * i as f64).exp()).collect();
        assert!(!oscillates(&monotone));
        assert!(oscillates(&[0.0, 1.0, f64::NAN]));
    }

    #[test]
    fn first_order_plant_step_response() {
        // 1/(s+1) under kp = 1 settles at 0.5
        let p = LtiPlantProbe::new(&[1.0], &[1.0, 1.0], 1e-3, 10.0).unwrap();
        let y = p.response(1.0).unwrap();
        assert!((y.last().unwrap() - 0.5).abs() < 1e-6);
        assert!(!oscillates(&y));
    }

    #[test]
    fn third_order_ultimate_gain() {
        let p = LtiPlantProbe::new(&[1.0], &[1.0, 3.0, 2.0, 0.0], 1e-3, 60.0).unwrap();
        let r = zn_tune(&p, &ZnConfig::default()).unwrap();
        assert!((r.k_u - 6.0).abs() / 6.0 < 0.05, "{r:?}");
        let t_u = std::f64::consts::TAU / 2f64.sqrt();
        assert!((r.t_u - t_u).abs() / t_u < 0.05, "{r:?}");
        assert!(r.gains.is_admissible());
    }

    #[test]
    fn no_oscillation_is_an_error() {
        let p = LtiPlantProbe::new(&[1.0], &[1.0, 1.0], 1e-2, 5.0).unwrap();
        let cfg = ZnConfig {
            kp_max: 50.0,
            ..Default::default()
        };
        assert!(matches!(zn_tune(&p, &cfg), Err(Error::NoOscillation { .. })));
    }

    #[test]
    fn rejects_improper() {
        assert!(LtiPlantProbe::new(&[1.0, 0.0], &[1.0, 1.0], 1e-3, 1.0).is_err());
    }
}
