use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub peak_accel: f64,
    pub rms_accel: f64,
    pub peak_distortion: f64,
    pub rms_distortion: f64,
    pub tire_load_min: f64,
    pub tire_load_max: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 6] = [
        "peak_accel",
        "rms_accel",
        "peak_distortion",
        "rms_distortion",
        "tire_load_min",
        "tire_load_max",
    ];

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.peak_accel,
            self.rms_accel,
            self.peak_distortion,
            self.rms_distortion,
            self.tire_load_min,
            self.tire_load_max,
        ]
    }
}

fn peak_rms(x: &[f64]) -> (f64, f64) {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    (peak, rms)
}

/// Peak and RMS of sprung acceleration and distortion, and the signed tire
/// load extremes, over samples with `time > settle_skip`.
pub fn compute_metrics(ts: &TimeSeries, settle_skip: f64) -> Result<Metrics> {
    let start = ts.time.partition_point(|t| *t <= settle_skip);
    if start >= ts.len() {
        return Err(Error::EmptyWindow { settle_skip });
    }
    let (peak_accel, rms_accel) = peak_rms(&ts.a_s[start..]);
    let (peak_distortion, rms_distortion) = peak_rms(&ts.distortion[start..]);
    let load = &ts.tire_load[start..];
    let tire_load_min = load.iter().copied().fold(f64::INFINITY, f64::min);
    let tire_load_max = load.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m = Metrics {
        peak_accel,
        rms_accel,
        peak_distortion,
        rms_distortion,
        tire_load_min,
        tire_load_max,
    };
    if m.as_array().iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite("metrics".into()))
    }
}
