//! Head-to-head scenario runs on one shared road.

use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_metrics, simulate, ControlMode, Law, Metrics, SimConfig, TimeSeries};
use crate::dynamics::{SuspensionParams, VehicleState};
use crate::error::{ensure, Error, Result};
use crate::fuzzy::FuzzySystem;
use crate::optim::{
    baseline_minimize, cfoa_minimize, zn_tune, BaselineConfig, CfoaConfig, Method, OscillationProbe, ZnConfig,
};
use crate::pid::{judgment, JudgmentWeights, PidGains};
use crate::road::RoadProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tuner {
    None,
    Zn,
    Foa,
    Ga,
    Pso,
    Bfo,
    Cfoa,
}

impl Tuner {
    pub const ALL: [Tuner; 7] = [
        Tuner::None,
        Tuner::Zn,
        Tuner::Foa,
        Tuner::Ga,
        Tuner::Pso,
        Tuner::Bfo,
        Tuner::Cfoa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tuner::None => "none",
            Tuner::Zn => "zn",
            Tuner::Foa => "foa",
            Tuner::Ga => "ga",
            Tuner::Pso => "pso",
            Tuner::Bfo => "bfo",
            Tuner::Cfoa => "cfoa",
        }
    }
}

impl FromStr for Tuner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Tuner> {
        Tuner::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown tuner {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    pub mode: ControlMode,
    #[serde(default = "no_tuner")]
    pub tuner: Tuner,
    /// Fixed gains for an untuned fuzzy-PID scenario.
    #[serde(default)]
    pub gains: Option<PidGains>,
}

fn no_tuner() -> Tuner {
    Tuner::None
}

impl Scenario {
    pub fn new(label: &str, mode: ControlMode, tuner: Tuner) -> Self {
        Self {
            label: label.to_string(),
            mode,
            tuner,
            gains: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.label.is_empty(), || "scenario label must not be empty".into())?;
        let pid = self.mode == ControlMode::SemiActiveFuzzyPid;
        ensure(self.tuner == Tuner::None || pid, || {
            format!("scenario {:?}: a tuner needs mode semi_active_fuzzy_pid", self.label)
        })?;
        ensure(!pid || self.tuner != Tuner::None || self.gains.is_some(), || {
            format!("scenario {:?}: untuned fuzzy-PID needs explicit gains", self.label)
        })?;
        if let Some(g) = &self.gains {
            g.validate()?;
        }
        Ok(())
    }

    /// The default line-up: active, zero-command baseline, and five tuners.
    pub fn default_set() -> Vec<Scenario> {
        let pid = ControlMode::SemiActiveFuzzyPid;
        vec![
            Scenario::new("active", ControlMode::Active, Tuner::None),
            Scenario::new("passive", ControlMode::SemiActiveZero, Tuner::None),
            Scenario::new("zn", pid, Tuner::Zn),
            Scenario::new("ga", pid, Tuner::Ga),
            Scenario::new("pso", pid, Tuner::Pso),
            Scenario::new("bfo", pid, Tuner::Bfo),
            Scenario::new("cfoa", pid, Tuner::Cfoa),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    /// Judgment weights; `horizon` is the length of each scored run.
    pub weights: JudgmentWeights,
    /// Distortion that counts as unit error in the judgment, m.
    pub error_scale: f64,
    /// PID output that counts as unit effort in the judgment, N.
    pub effort_scale: f64,
    /// CFOA settings; `pop_size · (max_iter + 1)` is also the budget of every baseline.
    pub cfoa: CfoaConfig,
    pub baseline: BaselineConfig,
    pub zn: ZnConfig,
    /// Initial sprung-mass displacement of the ultimate-gain probe, m.
    pub zn_kick: f64,
    pub zn_horizon: f64,
}

const GAIN_SCALE: [f64; 3] = [2e4, 2e4, 1e3];

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            weights: JudgmentWeights::default(),
            error_scale: 0.01,
            effort_scale: 350.0,
            cfoa: CfoaConfig {
                pop_size: 20,
                max_iter: 20,
                gain_scale: GAIN_SCALE,
                ..Default::default()
            },
            baseline: BaselineConfig {
                pop_size: 20,
                gain_scale: GAIN_SCALE,
                ..Default::default()
            },
            zn: ZnConfig {
                kp_start: 1e3,
                kp_max: 1e9,
                ..Default::default()
            },
            zn_kick: 0.02,
            zn_horizon: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningOutcome {
    pub gains: PidGains,
    /// Judgment of the returned gains.
    pub score: f64,
    /// Best-so-far score per iteration (empty for ZN).
    pub history: Vec<f64>,
    pub evals: usize,
}

impl TuningConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        ensure(self.error_scale > 0.0 && self.effort_scale > 0.0, || {
            format!(
                "error_scale and effort_scale must be > 0, got {} and {}",
                self.error_scale, self.effort_scale
            )
        })?;
        self.cfoa.validate()?;
        self.baseline.validate()
    }
}

/// Judgment of the fuzzy-PID loop over the first `horizon` seconds of `road`,
/// on the scaled error and effort. Failed runs score `+∞`.
pub fn judgment_of(
    p: &SuspensionParams,
    fuzzy: &FuzzySystem,
    road: &RoadProfile,
    sim: &SimConfig,
    cfg: &TuningConfig,
    g: &PidGains,
) -> f64 {
    let w = &cfg.weights;
    let run = SimConfig {
        duration: w.horizon,
        mode: ControlMode::SemiActiveFuzzyPid,
        ..sim.clone()
    };
    let law = Law {
        fuzzy: Some(fuzzy),
        gains: Some(*g),
    };
    let Ok(ts) = simulate(p, law, road, &run, None) else {
        return f64::INFINITY;
    };
    let e: Vec<f64> = ts.distortion.iter().map(|d| -d / cfg.error_scale).collect();
    let u: Vec<f64> = ts.u_pid.iter().map(|u| u / cfg.effort_scale).collect();
    judgment(&e, &u, run.dt, w, 0.0).map_or(f64::INFINITY, |r| r.j)
}

/// Proportional loop on the damper command, released on a flat road from a
/// sprung displacement; the response is the distortion.
///
/// The fuzzy term is left out by default: on its own it sustains a small limit
/// cycle that proportional gain damps, which inverts the oscillation test.
#[derive(Debug, Clone)]
pub struct SuspensionProbe<'a> {
    pub params: &'a SuspensionParams,
    /// Fuzzy command added to the proportional loop, if any.
    pub fuzzy: Option<&'a FuzzySystem>,
    pub sim: SimConfig,
    pub kick: f64,
}

impl SuspensionProbe<'_> {
    pub fn new<'a>(params: &'a SuspensionParams, sim: &SimConfig, kick: f64, horizon: f64) -> SuspensionProbe<'a> {
        let sim = SimConfig {
            duration: horizon,
            mode: ControlMode::SemiActiveFuzzyPid,
            equilibrium_start: true,
            ..sim.clone()
        };
        SuspensionProbe {
            params,
            fuzzy: None,
            sim,
            kick,
        }
    }
}

impl OscillationProbe for SuspensionProbe<'_> {
    fn response(&self, kp: f64) -> Result<Vec<f64>> {
        let road = RoadProfile::flat(self.sim.dt, self.sim.duration, self.sim.velocity)?;
        let law = Law {
            fuzzy: self.fuzzy,
            gains: Some(PidGains::new(kp, 0.0, 0.0)),
        };
        let kick = VehicleState::new(self.kick, 0.0, 0.0, 0.0);
        match simulate(self.params, law, &road, &self.sim, Some(kick)) {
            Ok(ts) => Ok(ts.distortion),
            Err(Error::Diverged { .. }) | Err(Error::NonFinite(_)) => Ok(vec![0.0, f64::INFINITY]),
            Err(e) => Err(e),
        }
    }

    fn dt(&self) -> f64 {
        self.sim.dt
    }
}

/// Tunes PID gains for the fuzzy-PID loop on `road`.
pub fn tune_gains(
    tuner: Tuner,
    p: &SuspensionParams,
    fuzzy: &FuzzySystem,
    road: &RoadProfile,
    sim: &SimConfig,
    cfg: &TuningConfig,
    seed: u64,
) -> Result<TuningOutcome> {
    cfg.validate()?;
    let objective = |g: &PidGains| judgment_of(p, fuzzy, road, sim, cfg, g);
    let budget = cfg.cfoa.budget();
    let method = match tuner {
        Tuner::None => return Err(Error::InvalidParameter("no tuner selected".into())),
        Tuner::Zn => {
            let probe = SuspensionProbe::new(p, sim, cfg.zn_kick, cfg.zn_horizon);
            let r = zn_tune(&probe, &cfg.zn)?;
            return Ok(TuningOutcome {
                gains: r.gains,
                score: objective(&r.gains),
                history: Vec::new(),
                evals: 0,
            });
        }
        Tuner::Cfoa => {
            let r = cfoa_minimize(
                &objective,
                &CfoaConfig {
                    seed,
                    ..cfg.cfoa.clone()
                },
            )?;
            return Ok(TuningOutcome {
                gains: r.best_gains,
                score: r.best_score,
                history: r.history,
                evals: r.evals,
            });
        }
        Tuner::Foa => Method::Foa,
        Tuner::Ga => Method::Ga,
        Tuner::Pso => Method::Pso,
        Tuner::Bfo => Method::Bfo,
    };
    let r = baseline_minimize(method, &objective, budget, seed, &cfg.baseline)?;
    Ok(TuningOutcome {
        gains: r.best_gains,
        score: r.best_score,
        history: r.history,
        evals: r.evals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub mode: ControlMode,
    pub tuner: Tuner,
    pub gains: Option<PidGains>,
    pub tuning: Option<TuningOutcome>,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
    #[serde(skip)]
    pub series: Option<TimeSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub reference: String,
    pub settle_skip: f64,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Percentage change of every metric against the reference row,
    /// `100 · (value − ref) / |ref|`.
    pub fn deltas(&self, row: &ComparisonRow) -> Option<[f64; 6]> {
        let r = self.row(&self.reference)?.metrics?.as_array();
        let m = row.metrics?.as_array();
        Some(std::array::from_fn(|i| 100.0 * (m[i] - r[i]) / r[i].abs()))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["label", "mode", "tuner", "status", "kp", "ki", "kd", "tune_score"];
        header.extend(Metrics::NAMES);
        let delta_names: Vec<String> = Metrics::NAMES.iter().map(|n| format!("delta_pct_{n}")).collect();
        header.extend(delta_names.iter().map(String::as_str));
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut cells: Vec<String> = vec![
                row.label.clone(),
                row.mode.name().into(),
                row.tuner.name().into(),
                if row.error.is_some() {
                    "failed".into()
                } else {
                    "ok".into()
                },
            ];
            match row.gains {
                Some(g) => cells.extend(g.as_array().iter().map(|v| v.to_string())),
                None => cells.extend(["".to_string(), "".into(), "".into()]),
            }
            cells.push(row.tuning.as_ref().map(|t| t.score.to_string()).unwrap_or_default());
            let metrics = row.metrics.map(|m| m.as_array());
            let deltas = self.deltas(row);
            for block in [metrics, deltas] {
                match block {
                    Some(v) => cells.extend(v.iter().map(|x| x.to_string())),
                    None => cells.extend(std::iter::repeat_n(String::new(), 6)),
                }
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Aligned plain-text table of metrics and deltas.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "reference: {}   settle_skip: {} s",
            self.reference, self.settle_skip
        );
        let _ = write!(out, "{:<12}", "scenario");
        for n in Metrics::NAMES {
            let _ = write!(out, " {n:>16}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<12}", row.label);
            match (&row.metrics, &row.error) {
                (Some(m), _) => {
                    for v in m.as_array() {
                        let _ = write!(out, " {v:>16.6}");
                    }
                    out.push('\n');
                    if let Some(d) = self.deltas(row) {
                        let _ = write!(out, "{:<12}", "");
                        for v in d {
                            let _ = write!(out, " {:>15.2}%", v);
                        }
                        out.push('\n');
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, " FAILED: {e}");
                }
                (None, None) => out.push('\n'),
            }
        }
        out
    }
}

fn run_scenario(
    sc: &Scenario,
    p: &SuspensionParams,
    fuzzy: &FuzzySystem,
    road: &RoadProfile,
    sim: &SimConfig,
    tuning: &TuningConfig,
    seed: u64,
) -> ComparisonRow {
    let mut row = ComparisonRow {
        label: sc.label.clone(),
        mode: sc.mode,
        tuner: sc.tuner,
        gains: sc.gains,
        tuning: None,
        metrics: None,
        error: None,
        series: None,
    };
    let result = (|| -> Result<()> {
        if sc.tuner != Tuner::None {
            let t = tune_gains(sc.tuner, p, fuzzy, road, sim, tuning, seed)?;
            row.gains = Some(t.gains);
            row.tuning = Some(t);
        }
        let cfg = SimConfig {
            mode: sc.mode,
            ..sim.clone()
        };
        let law = match sc.mode {
            ControlMode::SemiActiveFuzzyPid => Law {
                fuzzy: Some(fuzzy),
                gains: row.gains,
            },
            _ => Law {
                fuzzy: None,
                gains: None,
            },
        };
        let ts = simulate(p, law, road, &cfg, None)?;
        row.metrics = Some(compute_metrics(&ts, cfg.settle_skip)?);
        row.series = Some(ts);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Tunes (where asked), simulates and scores every scenario on the same road.
/// A failing scenario is reported in its row and does not stop the others.
#[allow(clippy::too_many_arguments)]
pub fn run_comparison(
    p: &SuspensionParams,
    fuzzy: &FuzzySystem,
    road: &RoadProfile,
    sim: &SimConfig,
    scenarios: &[Scenario],
    reference: &str,
    tuning: &TuningConfig,
    seed: u64,
) -> Result<Comparison> {
    ensure(scenarios.len() >= 2, || {
        format!("need at least 2 scenarios, got {}", scenarios.len())
    })?;
    for (i, sc) in scenarios.iter().enumerate() {
        sc.validate()?;
        ensure(!scenarios[..i].iter().any(|o| o.label == sc.label), || {
            format!("duplicate scenario label {:?}", sc.label)
        })?;
    }
    ensure(scenarios.iter().any(|s| s.label == reference), || {
        format!("reference scenario {reference:?} is not in the scenario list")
    })?;
    p.validate()?;
    sim.validate()?;
    let rows = scenarios
        .par_iter()
        .map(|sc| run_scenario(sc, p, fuzzy, road, sim, tuning, seed))
        .collect();
    Ok(Comparison {
        reference: reference.to_string(),
        settle_skip: sim.settle_skip,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuner_names_round_trip() {
        for t in Tuner::ALL {
            assert_eq!(t.name().parse::<Tuner>().unwrap(), t);
        }
        assert!("sa".parse::<Tuner>().is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new("x", ControlMode::Active, Tuner::Ga).validate().is_err());
        assert!(Scenario::new("x", ControlMode::SemiActiveFuzzyPid, Tuner::None)
            .validate()
            .is_err());
        let mut s = Scenario::new("x", ControlMode::SemiActiveFuzzyPid, Tuner::None);
        s.gains = Some(PidGains::new(1.0, 1.0, 1.0));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn identical_scenarios_have_zero_delta() {
        let p = SuspensionParams::default();
        let sim = SimConfig {
            duration: 2.0,
            ..Default::default()
        };
        let road = RoadProfile::new(1e-3, (0..=2000).map(|i| 0.01 * (i as f64 * 0.01).sin()).collect(), 20.0).unwrap();
        let sc = vec![
            Scenario::new("a", ControlMode::SemiActiveZero, Tuner::None),
            Scenario::new("b", ControlMode::SemiActiveZero, Tuner::None),
        ];
        let c = run_comparison(
            &p,
            &FuzzySystem::default(),
            &road,
            &sim,
            &sc,
            "a",
            &TuningConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(c.rows.len(), 2);
        assert_eq!(c.deltas(&c.rows[1]).unwrap(), [0.0; 6]);
        assert!(run_comparison(
            &p,
            &FuzzySystem::default(),
            &road,
            &sim,
            &sc,
            "zz",
            &TuningConfig::default(),
            0
        )
        .is_err());
    }
}
