//! Closed-loop simulation: road input, plant integration, fuzzy damper command
//! with PID distortion correction, and the comparison metrics.

mod compare;
mod metrics;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    derivatives_with_parallel, static_equilibrium, tire_force, PlantMode, SuspensionParams, VehicleState,
};
use crate::error::{ensure, Error, Result};
use crate::fuzzy::FuzzySystem;
use crate::pid::{pid_step, PidGains, PidState};
use crate::road::RoadProfile;

pub use compare::{
    judgment_of, run_comparison, tune_gains, Comparison, ComparisonRow, Scenario, SuspensionProbe, Tuner, TuningConfig,
    TuningOutcome,
};
pub use metrics::{compute_metrics, Metrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Skyhook actuator plant.
    Active,
    /// MR damper with the command held at zero.
    SemiActiveZero,
    /// MR damper driven by the fuzzy controller plus PID correction.
    SemiActiveFuzzyPid,
}

impl ControlMode {
    pub fn plant(self) -> PlantMode {
        match self {
            ControlMode::Active => PlantMode::Active,
            _ => PlantMode::SemiActive,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Active => "active",
            ControlMode::SemiActiveZero => "semi_active_zero",
            ControlMode::SemiActiveFuzzyPid => "semi_active_fuzzy_pid",
        }
    }
}

/// Where the PID output enters the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PidRouting {
    /// Added to the fuzzy command before the damper clamp.
    #[default]
    Clamp,
    /// Applied as a separate, unconstrained force between the masses.
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    /// Forward speed, m/s.
    pub velocity: f64,
    pub mode: ControlMode,
    /// Start at rest in static equilibrium instead of the unloaded origin.
    pub equilibrium_start: bool,
    pub pid_routing: PidRouting,
    /// Metrics ignore samples at or before this time, s.
    pub settle_skip: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 10.0,
            velocity: 20.0,
            mode: ControlMode::SemiActiveFuzzyPid,
            equilibrium_start: true,
            pid_routing: PidRouting::Clamp,
            settle_skip: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.dt > 0.0 && self.dt.is_finite(), || {
            format!("dt must be > 0, got {}", self.dt)
        })?;
        ensure(self.duration >= self.dt && self.duration.is_finite(), || {
            format!("duration must be >= dt, got {}", self.duration)
        })?;
        ensure(self.velocity > 0.0 && self.velocity.is_finite(), || {
            format!("velocity must be > 0, got {}", self.velocity)
        })?;
        ensure(self.settle_skip >= 0.0, || {
            format!("settle_skip must be >= 0, got {}", self.settle_skip)
        })
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Sampled closed-loop run. `distortion` is the suspension travel `z_s − z_u`
/// measured from its static-equilibrium value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time: Vec<f64>,
    pub z_s: Vec<f64>,
    pub z_u: Vec<f64>,
    pub v_s: Vec<f64>,
    pub v_u: Vec<f64>,
    pub a_s: Vec<f64>,
    pub distortion: Vec<f64>,
    pub tire_load: Vec<f64>,
    pub f_d: Vec<f64>,
    pub u_pid: Vec<f64>,
}

impl TimeSeries {
    pub const COLUMNS: [&'static str; 10] = [
        "time_s",
        "z_s_m",
        "z_u_m",
        "v_s_mps",
        "v_u_mps",
        "a_s_mps2",
        "distortion_m",
        "tire_load_n",
        "f_d_n",
        "u_pid",
    ];

    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            time: v(),
            z_s: v(),
            z_u: v(),
            v_s: v(),
            v_u: v(),
            a_s: v(),
            distortion: v(),
            tire_load: v(),
            f_d: v(),
            u_pid: v(),
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Channels in [`Self::COLUMNS`] order.
    pub fn channels(&self) -> [&[f64]; 10] {
        [
            &self.time,
            &self.z_s,
            &self.z_u,
            &self.v_s,
            &self.v_u,
            &self.a_s,
            &self.distortion,
            &self.tire_load,
            &self.f_d,
            &self.u_pid,
        ]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::COLUMNS.join(","))?;
        let ch = self.channels();
        for i in 0..self.len() {
            for (c, col) in ch.iter().enumerate() {
                if c > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{}", col[i])?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

const DIVERGED: f64 = 1e6;

/// Damper/PID law applied at each sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Law<'a> {
    pub fuzzy: Option<&'a FuzzySystem>,
    pub gains: Option<PidGains>,
}

/// Integrates the closed loop with fixed-step RK4; the controller output is
/// held constant across each step.
///
/// At every sample the fuzzy controller sees the sprung velocity, the sprung
/// acceleration of the previous sample and the distortion; the PID acts on
/// `−distortion` and its output is routed per [`SimConfig::pid_routing`].
/// `gains` is ignored unless the mode is [`ControlMode::SemiActiveFuzzyPid`].
pub fn integrate_closed_loop(
    p: &SuspensionParams,
    fuzzy: &FuzzySystem,
    gains: &PidGains,
    road: &RoadProfile,
    cfg: &SimConfig,
) -> Result<TimeSeries> {
    let law = match cfg.mode {
        ControlMode::SemiActiveFuzzyPid => {
            gains.validate()?;
            Law {
                fuzzy: Some(fuzzy),
                gains: Some(*gains),
            }
        }
        _ => Law {
            fuzzy: None,
            gains: None,
        },
    };
    simulate(p, law, road, cfg, None)
}

pub(crate) fn simulate(
    p: &SuspensionParams,
    law: Law<'_>,
    road: &RoadProfile,
    cfg: &SimConfig,
    kick: Option<VehicleState>,
) -> Result<TimeSeries> {
    p.validate()?;
    cfg.validate()?;
    ensure(road.dt <= cfg.dt * (1.0 + 1e-9), || {
        format!("road sampled every {} s is coarser than the step {} s", road.dt, cfg.dt)
    })?;
    let plant = cfg.mode.plant();
    let z_g0 = road.elevation_at(0.0);
    let rest = static_equilibrium(p, plant, z_g0)?;
    let travel0 = rest.travel();
    let mut s = if cfg.equilibrium_start {
        rest
    } else {
        VehicleState::default()
    };
    if let Some(k) = kick {
        s = s + k;
    }

    let n = cfg.steps();
    let h = cfg.dt;
    let mut ts = TimeSeries::with_capacity(n + 1);
    let mut pid = PidState::default();
    let mut a_prev = 0.0;

    for k in 0..=n {
        let t = k as f64 * h;
        let z_g = road.elevation_at(t);
        let dist = s.travel() - travel0;

        let (f_d, u_pid, parallel) = match (law.fuzzy, law.gains) {
            (None, None) => (p.f_min, 0.0, 0.0),
            (fuzzy, gains) => {
                let u_fz = fuzzy.map_or(0.0, |fz| fz.infer(s.v_s, a_prev, dist));
                let u = match gains {
                    Some(g) => {
                        let (u, next) = pid_step(&g, pid, -dist, h);
                        pid = next;
                        u
                    }
                    None => 0.0,
                };
                match cfg.pid_routing {
                    PidRouting::Clamp => (p.clamp_command(u_fz + u), u, 0.0),
                    PidRouting::Parallel => (p.clamp_command(u_fz), u, u),
                }
            }
        };
        if !(f_d.is_finite() && parallel.is_finite()) {
            return Err(Error::NonFinite(format!("controller output at step {k}")));
        }

        let deriv = |x: &VehicleState, zg: f64| derivatives_with_parallel(p, x, zg, plant, f_d, parallel);
        let k1 = deriv(&s, z_g)?;
        ts.time.push(t);
        ts.z_s.push(s.z_s);
        ts.z_u.push(s.z_u);
        ts.v_s.push(s.v_s);
        ts.v_u.push(s.v_u);
        ts.a_s.push(k1.v_s);
        ts.distortion.push(dist);
        ts.tire_load.push(tire_force(p, s.z_u, z_g));
        ts.f_d.push(if plant == PlantMode::Active { 0.0 } else { f_d });
        ts.u_pid.push(u_pid);
        a_prev = k1.v_s;
        if k == n {
            break;
        }

        let z_mid = road.elevation_at(t + 0.5 * h);
        let z_end = road.elevation_at(t + h);
        let k2 = deriv(&(s + k1 * (0.5 * h)), z_mid)?;
        let k3 = deriv(&(s + k2 * (0.5 * h)), z_mid)?;
        let k4 = deriv(&(s + k3 * h), z_end)?;
        s = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !s.is_finite() || s.max_abs() > DIVERGED {
            return Err(Error::Diverged {
                step: k + 1,
                time: t + h,
            });
        }
    }
    Ok(ts)
}
