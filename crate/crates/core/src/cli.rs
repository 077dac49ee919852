//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};

use crate::config::{Config, SeedSource, SEED_ENV};
use crate::error::{Error, Result};
use crate::manifest::{RunManifest, FILE_NAME};
use crate::pid::PidGains;
use crate::plot::{Chart, Series};
use crate::road::{estimate_psd, generate_profile, psd_value, RoadProfile};
use crate::sim::{compute_metrics, integrate_closed_loop, run_comparison, tune_gains, ControlMode, TimeSeries, Tuner};

/// Like `println!`, but a closed stdout is not an error.
macro_rules! say {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "susplab", version, about = "Semi-active quarter-car suspension lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run to replay it [default: built-in defaults]
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; takes precedence over SUSPLAB_SEED and the config [default: SUSPLAB_SEED, else config seed = 0]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random road profile and its estimated PSD
    RoadGen {
        #[command(flatten)]
        common: Common,
        /// Profile length, s [default: sim.duration = 10]
        #[arg(long, value_name = "S")]
        duration: Option<f64>,
        /// Vehicle speed, m/s [default: sim.velocity = 20]
        #[arg(long, value_name = "M_PER_S")]
        velocity: Option<f64>,
    },
    /// Write the 729-entry fuzzy rule table as CSV
    RulesDump {
        /// TOML config [default: built-in defaults]
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Output CSV file; the manifest goes next to it as <FILE>.manifest.json
        #[arg(long, value_name = "FILE", default_value = "rules.csv")]
        out: PathBuf,
    },
    /// Tune PID gains for the fuzzy-PID loop
    Tune {
        #[command(flatten)]
        common: Common,
        /// Tuning method
        #[arg(long, value_enum, default_value_t = TunerArg::Cfoa)]
        tuner: TunerArg,
    },
    /// Simulate one closed-loop run
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Control mode [default: sim.mode = semi-active-fuzzy-pid]
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// PID gains as KP,KI,KD [default: config gains = 20000,20000,100]
        #[arg(long, value_name = "KP,KI,KD")]
        gains: Option<String>,
        /// Road profile CSV (time_s,elevation_m) instead of a generated road [default: generated from [road]]
        #[arg(long, value_name = "PATH")]
        road_csv: Option<PathBuf>,
    },
    /// Tune and simulate every configured scenario on one shared road
    Compare {
        #[command(flatten)]
        common: Common,
        /// Scenario the deltas are taken against [default: compare.reference = passive]
        #[arg(long, value_name = "LABEL")]
        reference: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TunerArg {
    Cfoa,
    Foa,
    Ga,
    Pso,
    Bfo,
    Zn,
}

impl From<TunerArg> for Tuner {
    fn from(t: TunerArg) -> Tuner {
        match t {
            TunerArg::Cfoa => Tuner::Cfoa,
            TunerArg::Foa => Tuner::Foa,
            TunerArg::Ga => Tuner::Ga,
            TunerArg::Pso => Tuner::Pso,
            TunerArg::Bfo => Tuner::Bfo,
            TunerArg::Zn => Tuner::Zn,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Active,
    SemiActiveZero,
    SemiActiveFuzzyPid,
}

impl From<ModeArg> for ControlMode {
    fn from(m: ModeArg) -> ControlMode {
        match m {
            ModeArg::Active => ControlMode::Active,
            ModeArg::SemiActiveZero => ControlMode::SemiActiveZero,
            ModeArg::SemiActiveFuzzyPid => ControlMode::SemiActiveFuzzyPid,
        }
    }
}

/// Runs the CLI; returns the process exit code (0 ok, 1 usage, 2 numeric failure).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<(Config, SeedSource)> {
    let mut cfg = match config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let env = std::env::var(SEED_ENV).ok();
    let source = cfg.resolve_seed(seed, env.as_deref())?;
    cfg.validate()?;
    Ok((cfg, source))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_convergence(path: &Path, history: &[f64]) -> Result<()> {
    write_with(path, |w| {
        writeln!(w, "iteration,best_score")?;
        for (i, h) in history.iter().enumerate() {
            writeln!(w, "{i},{h}")?;
        }
        Ok(())
    })
}

fn parse_gains(s: &str) -> Result<PidGains> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidParameter(format!("--gains expects KP,KI,KD, got {s:?}")))?;
    let g: [f64; 3] = parts
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("--gains expects three values, got {s:?}")))?;
    let g = PidGains::from_array(g);
    g.validate()?;
    Ok(g)
}

const SERIES_PLOTS: [(usize, &str, &str); 9] = [
    (1, "Sprung mass position", "z_s (m)"),
    (2, "Unsprung mass position", "z_u (m)"),
    (3, "Sprung mass velocity", "v_s (m/s)"),
    (4, "Unsprung mass velocity", "v_u (m/s)"),
    (5, "Sprung mass acceleration", "a_s (m/s²)"),
    (6, "Suspension distortion", "distortion (m)"),
    (7, "Tire load", "F_tire (N)"),
    (8, "Damper command", "f_d (N)"),
    (9, "PID output", "u_pid"),
];

const OVERLAYS: [(usize, &str, &str); 4] = [
    (5, "Sprung mass acceleration", "a_s (m/s²)"),
    (6, "Suspension distortion", "distortion (m)"),
    (7, "Tire load", "F_tire (N)"),
    (8, "Damper command", "f_d (N)"),
];

fn column_stem(i: usize) -> &'static str {
    match i {
        1 => "z_s",
        2 => "z_u",
        3 => "v_s",
        4 => "v_u",
        5 => "a_s",
        6 => "distortion",
        7 => "tire_load",
        8 => "f_d",
        _ => "u_pid",
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::RoadGen {
            common,
            duration,
            velocity,
        } => road_gen(common, duration, velocity),
        Command::RulesDump { config, out } => rules_dump(config, out),
        Command::Tune { common, tuner } => tune(common, tuner.into()),
        Command::Simulate {
            common,
            mode,
            gains,
            road_csv,
        } => simulate(common, mode.map(Into::into), gains, road_csv),
        Command::Compare { common, reference } => compare(common, reference),
    }
}

fn road_gen(common: Common, duration: Option<f64>, velocity: Option<f64>) -> Result<()> {
    let (cfg, source) = load(common.config.as_deref(), common.seed)?;
    let duration = duration.unwrap_or(cfg.sim.duration);
    let velocity = velocity.unwrap_or(cfg.sim.velocity);
    let mut m = RunManifest::new("road-gen", common.config.as_deref(), &cfg, source, &common.out);
    let csv = m.declare("road.csv");
    let psd_csv = m.declare("road_psd.csv");
    let svg = m.declare("road.svg");
    let psd_svg = m.declare("road_psd.svg");
    m.write(FILE_NAME)?;

    let road = generate_profile(&cfg.road, velocity, cfg.sim.dt, duration)?;
    write_with(&csv, |w| road.write_csv(w))?;
    let psd = estimate_psd(&road)?;
    let target: Vec<f64> = psd
        .iter()
        .map(|(o, _)| psd_value(&cfg.road, *o))
        .collect::<Result<_>>()?;
    write_with(&psd_csv, |w| {
        writeln!(w, "omega_cpm,estimated,target")?;
        for ((o, s), t) in psd.iter().zip(&target) {
            writeln!(w, "{o},{s},{t}")?;
        }
        Ok(())
    })?;
    let time: Vec<f64> = (0..road.len()).map(|i| i as f64 * road.dt).collect();
    write_text(
        &svg,
        &Chart::new("Road profile", "time (s)", "z_g (m)").render(&[Series {
            label: "z_g",
            x: &time,
            y: &road.samples,
        }]),
    )?;
    let omega: Vec<f64> = psd.iter().map(|p| p.0).collect();
    let est: Vec<f64> = psd.iter().map(|p| p.1).collect();
    write_text(
        &psd_svg,
        &Chart::new("Road PSD", "spatial frequency (cycles/m)", "S (m²/(cycles/m))")
            .log_log()
            .render(&[
                Series {
                    label: "estimated",
                    x: &omega,
                    y: &est,
                },
                Series {
                    label: "target",
                    x: &omega,
                    y: &target,
                },
            ]),
    )?;
    say!(
        "road: {} samples, dt {} s, std {:.4e} m -> {}",
        road.len(),
        road.dt,
        std_dev(&road.samples),
        common.out.display()
    );
    Ok(())
}

fn std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

fn rules_dump(config: Option<PathBuf>, out: PathBuf) -> Result<()> {
    let (cfg, source) = load(config.as_deref(), None)?;
    let name = out
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("--out must name a file, got {}", out.display())))?
        .to_string_lossy()
        .into_owned();
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut m = RunManifest::new("rules-dump", config.as_deref(), &cfg, source, &dir);
    let path = m.declare(name.clone());
    m.write(&format!("{name}.manifest.json"))?;
    let sys = cfg.fuzzy_system()?;
    write_with(&path, |w| sys.rules.write_csv(w))?;
    say!("rules: 729 entries -> {}", path.display());
    Ok(())
}

fn shared_road(cfg: &Config) -> Result<RoadProfile> {
    let duration = cfg.sim.duration.max(cfg.tuning.weights.horizon);
    generate_profile(&cfg.road, cfg.sim.velocity, cfg.sim.dt, duration)
}

fn tune(common: Common, tuner: Tuner) -> Result<()> {
    let (cfg, source) = load(common.config.as_deref(), common.seed)?;
    let mut m = RunManifest::new("tune", common.config.as_deref(), &cfg, source, &common.out);
    let json = m.declare("tuning.json");
    let csv = m.declare("convergence.csv");
    let svg = m.declare("convergence.svg");
    m.write(FILE_NAME)?;

    let road = shared_road(&cfg)?;
    let fuzzy = cfg.fuzzy_system()?;
    let r = tune_gains(tuner, &cfg.plant, &fuzzy, &road, &cfg.sim, &cfg.tuning, cfg.seed)?;
    write_json(&json, &serde_json::json!({ "tuner": tuner.name(), "outcome": r }))?;
    write_convergence(&csv, &r.history)?;
    let it: Vec<f64> = (0..r.history.len()).map(|i| i as f64).collect();
    write_text(
        &svg,
        &Chart::new(&format!("Convergence ({})", tuner.name()), "iteration", "best judgment").render(&[Series {
            label: tuner.name(),
            x: &it,
            y: &r.history,
        }]),
    )?;
    say!(
        "{}: kp={} ki={} kd={} score={} evals={}",
        tuner.name(),
        r.gains.kp,
        r.gains.ki,
        r.gains.kd,
        r.score,
        r.evals
    );
    Ok(())
}

fn write_series_plots(m: &RunManifest, ts: &TimeSeries) -> Result<()> {
    let ch = ts.channels();
    for (i, title, unit) in SERIES_PLOTS {
        let path = m.path_of(&format!("plot_{}.svg", column_stem(i)))?;
        write_text(
            &path,
            &Chart::new(title, "time (s)", unit).render(&[Series {
                label: column_stem(i),
                x: ch[0],
                y: ch[i],
            }]),
        )?;
    }
    Ok(())
}

fn simulate(common: Common, mode: Option<ControlMode>, gains: Option<String>, road_csv: Option<PathBuf>) -> Result<()> {
    let (mut cfg, source) = load(common.config.as_deref(), common.seed)?;
    if let Some(mode) = mode {
        cfg.sim.mode = mode;
    }
    if let Some(g) = gains {
        cfg.gains = parse_gains(&g)?;
    }
    let road = match &road_csv {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RoadProfile::read_csv(BufReader::new(f), cfg.sim.velocity)?
        }
        None => generate_profile(&cfg.road, cfg.sim.velocity, cfg.sim.dt, cfg.sim.duration)?,
    };
    let mut m = RunManifest::new("simulate", common.config.as_deref(), &cfg, source, &common.out);
    let csv = m.declare("timeseries.csv");
    let json = m.declare("metrics.json");
    for (i, _, _) in SERIES_PLOTS {
        m.declare(format!("plot_{}.svg", column_stem(i)));
    }
    m.write(FILE_NAME)?;

    let fuzzy = cfg.fuzzy_system()?;
    let ts = integrate_closed_loop(&cfg.plant, &fuzzy, &cfg.gains, &road, &cfg.sim)?;
    write_with(&csv, |w| ts.write_csv(w))?;
    let metrics = compute_metrics(&ts, cfg.sim.settle_skip)?;
    write_json(
        &json,
        &serde_json::json!({ "mode": cfg.sim.mode.name(), "settle_skip": cfg.sim.settle_skip, "metrics": metrics }),
    )?;
    write_series_plots(&m, &ts)?;
    say!(
        "{} ({} samples, settle_skip {} s)",
        cfg.sim.mode.name(),
        ts.len(),
        cfg.sim.settle_skip
    );
    for (n, v) in crate::sim::Metrics::NAMES.iter().zip(metrics.as_array()) {
        say!("  {n:<16} {v:.6}");
    }
    Ok(())
}

fn compare(common: Common, reference: Option<String>) -> Result<()> {
    let (mut cfg, source) = load(common.config.as_deref(), common.seed)?;
    if let Some(r) = reference {
        cfg.compare.reference = r;
    }
    let labels: Vec<String> = cfg.compare.scenarios.iter().map(|s| s.label.clone()).collect();
    for l in &labels {
        if !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::InvalidParameter(format!(
                "scenario label {l:?} must use only A-Z, a-z, 0-9, '_' and '-'"
            )));
        }
    }
    if !labels.contains(&cfg.compare.reference) {
        return Err(Error::InvalidParameter(format!(
            "reference scenario {:?} is not among the scenarios {labels:?}",
            cfg.compare.reference
        )));
    }
    let mut m = RunManifest::new("compare", common.config.as_deref(), &cfg, source, &common.out);
    let csv = m.declare("comparison.csv");
    let txt = m.declare("comparison.txt");
    let json = m.declare("comparison.json");
    let road_csv = m.declare("road.csv");
    for l in &labels {
        m.declare(format!("series_{l}.csv"));
    }
    for sc in cfg.compare.scenarios.iter().filter(|s| s.tuner != Tuner::None) {
        m.declare(format!("convergence_{}.csv", sc.label));
    }
    for (i, _, _) in OVERLAYS {
        m.declare(format!("overlay_{}.svg", column_stem(i)));
    }
    let conv_svg = m.declare("convergence.svg");
    m.write(FILE_NAME)?;

    let road = shared_road(&cfg)?;
    write_with(&road_csv, |w| road.write_csv(w))?;
    let fuzzy = cfg.fuzzy_system()?;
    let cmp = run_comparison(
        &cfg.plant,
        &fuzzy,
        &road,
        &cfg.sim,
        &cfg.compare.scenarios,
        &cfg.compare.reference,
        &cfg.tuning,
        cfg.seed,
    )?;

    write_with(&csv, |w| cmp.write_csv(w))?;
    let text = cmp.render_text();
    write_text(&txt, &text)?;
    write_json(&json, &cmp)?;
    for row in &cmp.rows {
        if let Some(ts) = &row.series {
            write_with(&m.path_of(&format!("series_{}.csv", row.label))?, |w| ts.write_csv(w))?;
        }
        if let Some(t) = &row.tuning {
            write_convergence(&m.path_of(&format!("convergence_{}.csv", row.label))?, &t.history)?;
        }
    }
    let with_series: Vec<_> = cmp
        .rows
        .iter()
        .filter_map(|r| r.series.as_ref().map(|s| (r.label.as_str(), s)))
        .collect();
    for (i, title, unit) in OVERLAYS {
        let series: Vec<Series> = with_series
            .iter()
            .map(|(l, s)| Series {
                label: l,
                x: &s.time,
                y: s.channels()[i],
            })
            .collect();
        write_text(
            &m.path_of(&format!("overlay_{}.svg", column_stem(i)))?,
            &Chart::new(title, "time (s)", unit).render(&series),
        )?;
    }
    let iters: Vec<(String, Vec<f64>, &[f64])> = cmp
        .rows
        .iter()
        .filter_map(|r| {
            r.tuning.as_ref().filter(|t| !t.history.is_empty()).map(|t| {
                (
                    r.label.clone(),
                    (0..t.history.len()).map(|i| i as f64).collect(),
                    t.history.as_slice(),
                )
            })
        })
        .collect();
    let series: Vec<Series> = iters.iter().map(|(l, x, y)| Series { label: l, x, y }).collect();
    write_text(
        &conv_svg,
        &Chart::new("Tuner convergence", "iteration", "best judgment").render(&series),
    )?;

    let _ = std::io::stdout().write_all(text.as_bytes());
    let failed: Vec<&str> = cmp
        .rows
        .iter()
        .filter(|r| r.error.is_some())
        .map(|r| r.label.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!("warning: scenarios failed: {}", failed.join(", "));
    }
    Ok(())
}
