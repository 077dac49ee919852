//! Random road profiles from a two-slope displacement PSD.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadSpec {
    /// Degree of roughness C(Ω₀), m²/(cycles/m).
    pub c_ref: f64,
    /// Reference spatial frequency Ω₀, cycles/m.
    pub omega_ref: f64,
    /// Waviness below Ω₀.
    pub w_low: f64,
    /// Waviness above Ω₀.
    pub w_high: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_harmonics: usize,
    pub seed: u64,
}

impl Default for RoadSpec {
    fn default() -> Self {
        Self {
            c_ref: 256e-6,
            omega_ref: 0.1,
            w_low: 2.0,
            w_high: 1.5,
            omega_min: 0.01,
            omega_max: 10.0,
            n_harmonics: 500,
            seed: 0,
        }
    }
}

impl RoadSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(self.c_ref.is_finite() && self.c_ref >= 0.0, || {
            format!("c_ref must be >= 0, got {}", self.c_ref)
        })?;
        ensure(
            0.0 < self.omega_min && self.omega_min < self.omega_ref && self.omega_ref < self.omega_max,
            || {
                format!(
                    "need 0 < omega_min < omega_ref < omega_max, got {} / {} / {}",
                    self.omega_min, self.omega_ref, self.omega_max
                )
            },
        )?;
        ensure(self.omega_max.is_finite(), || "omega_max must be finite".into())?;
        ensure(self.w_low.is_finite() && self.w_high.is_finite(), || {
            "waviness must be finite".into()
        })?;
        ensure(self.n_harmonics >= 1, || "n_harmonics must be >= 1".into())
    }

    /// PSD with `c_ref = 1`.
    fn shape(&self, omega: f64) -> f64 {
        let x = omega / self.omega_ref;
        if omega <= self.omega_ref {
            x.powf(-self.w_low)
        } else {
            x.powf(-self.w_high)
        }
    }

    /// Log-spaced synthesis frequencies and the band width each one represents.
    pub fn harmonics(&self) -> Vec<(f64, f64)> {
        let n = self.n_harmonics;
        if n == 1 {
            let om = (self.omega_min * self.omega_max).sqrt();
            return vec![(om, self.omega_max - self.omega_min)];
        }
        let (la, lb) = (self.omega_min.ln(), self.omega_max.ln());
        let om: Vec<f64> = (0..n)
            .map(|k| (la + (lb - la) * k as f64 / (n - 1) as f64).exp())
            .collect();
        (0..n)
            .map(|k| {
                let lo = if k == 0 {
                    self.omega_min
                } else {
                    (om[k - 1] * om[k]).sqrt()
                };
                let hi = if k == n - 1 {
                    self.omega_max
                } else {
                    (om[k] * om[k + 1]).sqrt()
                };
                (om[k], hi - lo)
            })
            .collect()
    }

    /// Closed-form integral of the PSD over `[omega_min, omega_max]`.
    pub fn band_variance(&self) -> f64 {
        let seg = |a: f64, b: f64, w: f64| -> f64 {
            // ∫ (Ω/Ω₀)^-w dΩ
            let o = self.omega_ref;
            if (w - 1.0).abs() < 1e-12 {
                o * (b / a).ln()
            } else {
                o / (1.0 - w) * ((b / o).powf(1.0 - w) - (a / o).powf(1.0 - w))
            }
        };
        self.c_ref
            * (seg(self.omega_min, self.omega_ref, self.w_low) + seg(self.omega_ref, self.omega_max, self.w_high))
    }
}

pub fn psd_value(spec: &RoadSpec, omega: f64) -> Result<f64> {
    ensure(omega > 0.0 && omega.is_finite(), || {
        format!("spatial frequency must be > 0, got {omega}")
    })?;
    Ok(spec.c_ref * spec.shape(omega))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub velocity: f64,
}

impl RoadProfile {
    pub fn new(dt: f64, samples: Vec<f64>, velocity: f64) -> Result<Self> {
        ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be > 0, got {dt}"))?;
        ensure(samples.len() >= 2, || "a road profile needs at least 2 samples".into())?;
        if let Some(i) = samples.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("road sample {i}")));
        }
        Ok(Self { dt, samples, velocity })
    }

    /// Flat road of the given length.
    pub fn flat(dt: f64, duration: f64, velocity: f64) -> Result<Self> {
        let n = sample_count(dt, duration)?;
        Self::new(dt, vec![0.0; n], velocity)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Elevation at time `t`, linearly interpolated and held at the ends.
    pub fn elevation_at(&self, t: f64) -> f64 {
        let x = t / self.dt;
        if x <= 0.0 {
            return self.samples[0];
        }
        let last = self.samples.len() - 1;
        let i = x.floor() as usize;
        if i >= last {
            return self.samples[last];
        }
        let f = x - i as f64;
        if f == 0.0 {
            self.samples[i]
        } else {
            self.samples[i] + f * (self.samples[i + 1] - self.samples[i])
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time_s,elevation_m")?;
        for (i, z) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 * self.dt, z)?;
        }
        Ok(())
    }

    /// Reads the two-column CSV written by [`RoadProfile::write_csv`]. The sample
    /// period is taken from the first two rows and must be uniform.
    pub fn read_csv<R: BufRead>(r: R, velocity: f64) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))??;
        if header.trim() != "time_s,elevation_m" {
            return Err(Error::Csv(format!("unexpected header {header:?}")));
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let mut field = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::Csv(format!("row {}: missing column", n + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {}: {e}", n + 2)))
            };
            times.push(field()?);
            samples.push(field()?);
        }
        ensure(times.len() >= 2, || "a road profile needs at least 2 samples".into())?;
        let dt = times[1] - times[0];
        for (i, t) in times.iter().enumerate() {
            if (t - i as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
                return Err(Error::Csv(format!("non-uniform time column at row {}", i + 2)));
            }
        }
        Self::new(dt, samples, velocity)
    }
}

fn sample_count(dt: f64, duration: f64) -> Result<usize> {
    ensure(dt > 0.0 && dt.is_finite(), || format!("dt must be > 0, got {dt}"))?;
    ensure(duration >= dt && duration.is_finite(), || {
        format!("duration {duration} must be >= dt {dt}")
    })?;
    Ok((duration / dt + 1e-9).floor() as usize + 1)
}

/// Sinusoidal-superposition synthesis with seeded uniform phases.
pub fn generate_profile(spec: &RoadSpec, velocity: f64, dt: f64, duration: f64) -> Result<RoadProfile> {
    spec.validate()?;
    ensure(velocity > 0.0 && velocity.is_finite(), || {
        format!("velocity must be > 0, got {velocity}")
    })?;
    let n = sample_count(dt, duration)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // (temporal angular frequency, unit-roughness amplitude, phase)
    let comps: Vec<(f64, f64, f64)> = spec
        .harmonics()
        .into_iter()
        .map(|(om, d_om)| {
            let phase = rng.random::<f64>() * TAU;
            (TAU * om * velocity, (2.0 * spec.shape(om) * d_om).sqrt(), phase)
        })
        .collect();
    let scale = spec.c_ref.sqrt();

    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dt;
            let sum: f64 = comps.iter().map(|&(w, a, ph)| a * (w * t + ph).sin()).sum();
            scale * sum
        })
        .collect();
    RoadProfile::new(dt, samples, velocity)
}

/// One-sided Welch PSD against spatial frequency.
///
/// Hann window, segment length the largest power of two not above `n / 4`,
/// 50 % overlap, per-segment mean removal. Returns `(Ω, S(Ω))` pairs for the
/// positive-frequency bins, with `Ω = f / v` and `S(Ω) = v · P(f)`.
pub fn estimate_psd(profile: &RoadProfile) -> Result<Vec<(f64, f64)>> {
    let n = profile.len();
    ensure(n >= 64, || format!("PSD estimation needs at least 64 samples, got {n}"))?;
    ensure(profile.velocity > 0.0, || "profile velocity must be > 0".into())?;
    let seg = 1usize << (usize::BITS - 1 - (n / 4).leading_zeros());
    let hop = seg / 2;
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / seg as f64).cos())
        .collect();
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / profile.dt;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= n {
        let chunk = &profile.samples[start..start + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, z), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex::new((z - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }

    let v = profile.velocity;
    let norm = 1.0 / (fs * win_energy * count as f64);
    Ok((1..=seg / 2)
        .map(|k| {
            let one_sided = if k == seg / 2 { 1.0 } else { 2.0 };
            let f = k as f64 * fs / seg as f64;
            (f / v, one_sided * acc[k] * norm * v)
        })
        .collect())
}

/// Averages PSD points over fractional-octave bands starting at `lo`.
///
/// Returns `(lower edge, upper edge, mean power, point count)` for each
/// non-empty band fully inside `[lo, hi]`.
pub fn band_average(points: &[(f64, f64)], lo: f64, hi: f64, bands_per_octave: u32) -> Vec<(f64, f64, f64, usize)> {
    let ratio = 2f64.powf(1.0 / bands_per_octave.max(1) as f64);
    let mut out = Vec::new();
    let mut a = lo;
    while a * ratio <= hi * (1.0 + 1e-12) {
        let b = a * ratio;
        let in_band: Vec<f64> = points.iter().filter(|(o, _)| *o >= a && *o < b).map(|p| p.1).collect();
        if !in_band.is_empty() {
            out.push((a, b, in_band.iter().sum::<f64>() / in_band.len() as f64, in_band.len()));
        }
        a = b;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn psd_reference_points() {
        let s = RoadSpec::default();
        assert_relative_eq!(psd_value(&s, 0.1).unwrap(), 256e-6, max_relative = 1e-14);
        assert_relative_eq!(psd_value(&s, 0.4).unwrap(), 32e-6, max_relative = 1e-12);
        assert_relative_eq!(psd_value(&s, 0.025).unwrap(), 4.096e-3, max_relative = 1e-12);
        assert!(psd_value(&s, 0.0).is_err());
        assert!(psd_value(&s, -1.0).is_err());
    }

    #[test]
    fn psd_continuous_at_reference() {
        let s = RoadSpec::default();
        let below = psd_value(&s, 0.1 * (1.0 - 1e-12)).unwrap();
        let above = psd_value(&s, 0.1 * (1.0 + 1e-12)).unwrap();
        assert_relative_eq!(below, above, max_relative = 1e-10);
    }

    #[test]
    fn harmonics_tile_the_band() {
        let s = RoadSpec::default();
        let h = s.harmonics();
        assert_eq!(h.len(), 500);
        assert_relative_eq!(h[0].0, 0.01, max_relative = 1e-12);
        assert_relative_eq!(h[499].0, 10.0, max_relative = 1e-12);
        let width: f64 = h.iter().map(|x| x.1).sum();
        assert_relative_eq!(width, 9.99, max_relative = 1e-12);
    }

    #[test]
    fn band_variance_matches_quadrature() {
        let s = RoadSpec::default();
        let n = 200_000;
        let (la, lb) = (s.omega_min.ln(), s.omega_max.ln());
        let h = (lb - la) / n as f64;
        // trapezoid in log space: ∫ S(Ω) Ω d(ln Ω)
        let f = |u: f64| {
            let om = u.exp();
            psd_value(&s, om).unwrap() * om
        };
        let mut q = 0.5 * (f(la) + f(lb));
        for k in 1..n {
            q += f(la + k as f64 * h);
        }
        assert_relative_eq!(s.band_variance(), q * h, max_relative = 1e-6);
    }

    #[test]
    fn generation_is_deterministic_and_seeded() {
        let s = RoadSpec::default();
        let a = generate_profile(&s, 20.0, 0.01, 5.0).unwrap();
        let b = generate_profile(&s, 20.0, 0.01, 5.0).unwrap();
        assert_eq!(a, b);
        let c = generate_profile(&RoadSpec { seed: 1, ..s }, 20.0, 0.01, 5.0).unwrap();
        assert_ne!(a.samples, c.samples);
        assert_eq!(a.len(), 501);
    }

    #[test]
    fn zero_roughness_is_flat() {
        let s = RoadSpec {
            c_ref: 0.0,
            ..RoadSpec::default()
        };
        let p = generate_profile(&s, 20.0, 0.01, 2.0).unwrap();
        assert!(p.samples.iter().all(|&z| z == 0.0));
    }

    #[test]
    fn scaling_roughness_by_four_doubles_samples() {
        let s = RoadSpec::default();
        let a = generate_profile(&s, 20.0, 0.01, 3.0).unwrap();
        let b = generate_profile(
            &RoadSpec {
                c_ref: 4.0 * s.c_ref,
                ..s
            },
            20.0,
            0.01,
            3.0,
        )
        .unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn generation_rejects_bad_input() {
        let s = RoadSpec::default();
        assert!(generate_profile(&s, 0.0, 0.01, 1.0).is_err());
        assert!(generate_profile(&s, 20.0, 0.0, 1.0).is_err());
        assert!(generate_profile(&s, 20.0, 0.1, 0.05).is_err());
        assert!(generate_profile(&RoadSpec { omega_min: 0.2, ..s }, 20.0, 0.01, 1.0).is_err());
        assert!(generate_profile(&RoadSpec { n_harmonics: 0, ..s }, 20.0, 0.01, 1.0).is_err());
    }

    #[test]
    fn interpolation() {
        let p = RoadProfile::new(0.5, vec![0.0, 1.0, 3.0], 1.0).unwrap();
        assert_eq!(p.elevation_at(-1.0), 0.0);
        assert_eq!(p.elevation_at(0.25), 0.5);
        assert_eq!(p.elevation_at(0.5), 1.0);
        assert_eq!(p.elevation_at(0.75), 2.0);
        assert_eq!(p.elevation_at(10.0), 3.0);
    }

    #[test]
    fn csv_round_trip() {
        let p = generate_profile(&RoadSpec::default(), 20.0, 0.001, 0.5).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = RoadProfile::read_csv(buf.as_slice(), 20.0).unwrap();
        assert_eq!(p.samples, q.samples);
        assert_relative_eq!(p.dt, q.dt, max_relative = 1e-12);
        assert!(RoadProfile::read_csv("x,y\n0,1\n".as_bytes(), 1.0).is_err());
    }

    #[test]
    fn psd_of_zero_profile_is_zero() {
        let p = RoadProfile::new(0.01, vec![0.0; 256], 10.0).unwrap();
        assert!(estimate_psd(&p).unwrap().iter().all(|&(_, s)| s == 0.0));
        assert!(estimate_psd(&RoadProfile::new(0.01, vec![0.0; 63], 10.0).unwrap()).is_err());
    }

    #[test]
    fn psd_parseval_for_single_sinusoid() {
        let (v, dt, amp, om_star) = (10.0, 0.01, 0.3, 0.5);
        let samples: Vec<f64> = (0..20_000)
            .map(|i| amp * (TAU * om_star * v * i as f64 * dt + 0.3).sin())
            .collect();
        let p = RoadProfile::new(dt, samples, v).unwrap();
        let psd = estimate_psd(&p).unwrap();
        let d_om = psd[1].0 - psd[0].0;
        let peak = psd
            .iter()
            .cloned()
            .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!((peak.0 - om_star).abs() <= d_om);
        let total: f64 = psd.iter().map(|x| x.1).sum::<f64>() * d_om;
        assert_relative_eq!(total, amp * amp / 2.0, max_relative = 0.1);
    }
}
