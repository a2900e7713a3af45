// Same NaN-rejecting guards as the library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod config;

use config::{ConfigFile, UsageError};
use confined_ep::bulk::{evolve, time_grid, BulkOptions, BulkStatus};
use confined_ep::characteristic::{
    f_closed_form, first_crossing, integrate_orbit, integrate_pw, measured_period,
    min_f_along_orbit, CharacteristicState, DEFAULT_TOL,
};
use confined_ep::initial_data::{
    classify, fixture_suite, make_compliant, theta_of, ClassifyOptions, InitialData, MassShape,
    Verdict,
};
use confined_ep::io::{read_profile_file, write_table_file, PROFILE_HEADER};
use confined_ep::period::{
    c_v, log_spaced, period, period_at_level, period_derivative, period_table, small_energy_slope,
    turning_points, DEFAULT_PERIOD_TOL,
};
use confined_ep::potential::{
    c_min, e_min, tau_d, Dimension, EffectivePotential, NormalizedPotential, PotentialSpec,
};
use confined_ep::Error;

/// Exit status for malformed invocations and configs.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "confined-ep",
    version,
    about = "Period tables, initial-data checks and characteristic simulation for confined radial Euler-Poisson flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate T(E) for one dimension or a range of dimensions.
    PeriodTable(Opts),
    /// Compare T' near the well bottom with π c_V / d^{7/2}.
    ExpansionCheck(Opts),
    /// Classify an `r,P0,u0` profile; exit 0 global, 2 breakdown, 1 invalid.
    Check(Opts),
    /// Write the built-in fixtures (or a custom compliant profile) as CSV.
    Generate(Opts),
    /// Integrate one characteristic, the (P, w) system or the bulk.
    Simulate(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Orbit,
    Pw,
    Bulk,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Mode as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug, Default, Clone)]
struct Opts {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<u32>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Dimension range `A..B` (inclusive).
    #[arg(long)]
    all_dims: Option<String>,
    /// Search for the first crossing of two characteristics.
    #[arg(long)]
    crossing_demo: bool,
    #[arg(long)]
    emin_offset_min: Option<f64>,
    #[arg(long)]
    emin_offset_max: Option<f64>,
    /// Profile CSV with header `r,P0,u0`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in fixture: stationary, compliant, cond1-violated,
    /// cond2-violated, suite (generate only) or custom.
    #[arg(long)]
    fixture: Option<String>,
    /// Normalized level C0 of a custom compliant profile.
    #[arg(long)]
    level: Option<f64>,
    /// `A` in m0(r) = A r^d (1 + B r^2).
    #[arg(long)]
    shape_a: Option<f64>,
    /// `B` in m0(r) = A r^d (1 + B r^2).
    #[arg(long)]
    shape_b: Option<f64>,
    #[arg(long)]
    support_radius: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Orbit start: offset of the energy above e_min.
    #[arg(long)]
    energy_offset: Option<f64>,
    /// Start radius (orbit mode, crossing demo) or label radius (pw mode).
    #[arg(long)]
    radius: Option<f64>,
    /// Start velocity of the characteristic (orbit mode).
    #[arg(long)]
    velocity: Option<f64>,
    /// Mass of the second characteristic in the crossing demo.
    #[arg(long)]
    mass_b: Option<f64>,
    /// Custom profile moves inward (u0 <= 0) instead of outward.
    #[arg(long)]
    inward: bool,
    /// Number of Lagrangian labels (bulk mode).
    #[arg(long)]
    labels: Option<usize>,
    /// Output time step (bulk mode).
    #[arg(long)]
    dt: Option<f64>,
}

/// Flags merged with the config file.
#[derive(Debug, Clone)]
struct RunConfig {
    dims: Vec<Dimension>,
    dim_given: bool,
    mass: f64,
    tol: Option<f64>,
    samples: usize,
    out: PathBuf,
    mode: Mode,
    t_end: Option<f64>,
    all_dims: bool,
    crossing_demo: bool,
    emin_offset: (f64, f64),
    input: Option<PathBuf>,
    fixture: Option<String>,
    level: Option<f64>,
    shape_a: Option<f64>,
    shape_b: Option<f64>,
    support_radius: f64,
    nodes: usize,
    energy_offset: f64,
    radius: Option<f64>,
    velocity: f64,
    inward: bool,
    mass_b: Option<f64>,
    labels: usize,
    dt: Option<f64>,
}

fn parse_dims(s: &str) -> Result<Vec<Dimension>, UsageError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| UsageError(format!("--all-dims expects A..B, got `{s}`")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|_| UsageError(format!("--all-dims: `{x}` is not an integer")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(UsageError(format!("--all-dims range {a}..{b} is empty")));
    }
    (a..=b)
        .map(|d| Dimension::new(d).map_err(|e| UsageError(e.to_string())))
        .collect()
}

impl RunConfig {
    fn resolve(opts: Opts) -> Result<Self, UsageError> {
        let file = match &opts.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let dim = file.pick(opts.dim, "dim")?;
        let all_dims: Option<String> = file.pick(opts.all_dims.clone(), "all-dims")?;
        let dims = match &all_dims {
            Some(range) => parse_dims(range)?,
            None => vec![Dimension::new(dim.unwrap_or(3)).map_err(|e| UsageError(e.to_string()))?],
        };
        let mass = file.pick(opts.mass, "mass")?.unwrap_or(1.0);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(UsageError(format!("--mass must be positive, got {mass}")));
        }
        let tol = file.pick(opts.tol, "tol")?;
        if let Some(t) = tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(UsageError(format!("--tol must lie in (0, 1), got {t}")));
            }
        }
        let samples = file.pick(opts.samples, "samples")?.unwrap_or(100);
        let lo = file
            .pick(opts.emin_offset_min, "emin-offset-min")?
            .unwrap_or(1e-3);
        let hi = file
            .pick(opts.emin_offset_max, "emin-offset-max")?
            .unwrap_or(10.0);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(UsageError(format!(
                "energy range [{lo}, {hi}] must satisfy 0 < min <= max"
            )));
        }
        let crossing_demo =
            opts.crossing_demo || file.pick(None::<bool>, "crossing-demo")?.unwrap_or(false);
        let cfg = Self {
            dim_given: dim.is_some() || all_dims.is_some(),
            dims,
            mass,
            tol,
            samples,
            out: file
                .pick(opts.out, "out")?
                .unwrap_or_else(|| PathBuf::from(".")),
            mode: file.pick(opts.mode, "mode")?.unwrap_or(Mode::Orbit),
            t_end: file.pick(opts.t_end, "t-end")?,
            all_dims: all_dims.is_some(),
            crossing_demo,
            emin_offset: (lo, hi),
            input: file.pick(opts.input, "input")?,
            fixture: file.pick(opts.fixture, "fixture")?,
            level: file.pick(opts.level, "level")?,
            shape_a: file.pick(opts.shape_a, "shape-a")?,
            shape_b: file.pick(opts.shape_b, "shape-b")?,
            support_radius: file
                .pick(opts.support_radius, "support-radius")?
                .unwrap_or(1.0),
            nodes: file
                .pick(opts.nodes, "nodes")?
                .unwrap_or(confined_ep::initial_data::DEFAULT_GRID_NODES),
            energy_offset: file
                .pick(opts.energy_offset, "energy-offset")?
                .unwrap_or(1.0),
            radius: file.pick(opts.radius, "radius")?,
            velocity: file.pick(opts.velocity, "velocity")?.unwrap_or(0.0),
            inward: opts.inward || file.pick(None::<bool>, "inward")?.unwrap_or(false),
            mass_b: file.pick(opts.mass_b, "mass-b")?,
            labels: file
                .pick(opts.labels, "labels")?
                .unwrap_or(confined_ep::bulk::DEFAULT_LABELS),
            dt: file.pick(opts.dt, "dt")?,
        };
        if let Some(t) = cfg.t_end {
            if !(t > 0.0) || !t.is_finite() {
                return Err(UsageError(format!("--t-end must be positive, got {t}")));
            }
        }
        if let Some(dt) = cfg.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(UsageError(format!("--dt must be positive, got {dt}")));
            }
        }
        if !(cfg.energy_offset > 0.0) {
            return Err(UsageError(format!(
                "--energy-offset must be positive, got {}",
                cfg.energy_offset
            )));
        }
        if !(cfg.support_radius > 0.0) {
            return Err(UsageError("--support-radius must be positive".into()));
        }
        if cfg.nodes < 2 || cfg.labels < 2 {
            return Err(UsageError("--nodes and --labels need at least 2".into()));
        }
        Ok(cfg)
    }

    fn dim(&self) -> Dimension {
        self.dims[0]
    }

    fn out_path(&self, name: &str) -> anyhow::Result<PathBuf> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create output directory {}", self.out.display()))?;
        Ok(self.out.join(name))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (opts, run): (Opts, fn(&RunConfig) -> anyhow::Result<u8>) = match cli.command {
        Command::PeriodTable(o) => (o, cmd_period_table),
        Command::ExpansionCheck(o) => (o, cmd_expansion_check),
        Command::Check(o) => (o, cmd_check),
        Command::Generate(o) => (o, cmd_generate),
        Command::Simulate(o) => (o, cmd_simulate),
    };
    let cfg = match RunConfig::resolve(opts) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<UsageError>().is_some();
            ExitCode::from(if usage { EXIT_USAGE } else { 1 })
        }
    }
}

/// Stdout line; a closed pipe is not an error for a report printer.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_json(value: &serde_json::Value) {
    say(&serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn cmd_period_table(cfg: &RunConfig) -> anyhow::Result<u8> {
    if cfg.samples == 0 {
        return Err(UsageError("--samples must be at least 1".into()).into());
    }
    let tol = cfg.tol.unwrap_or(DEFAULT_PERIOD_TOL);
    let offsets = log_spaced(cfg.emin_offset.0, cfg.emin_offset.1, cfg.samples);
    let mut summary = Vec::new();
    for &d in &cfg.dims {
        let spec = PotentialSpec::with_dimension(d, cfg.mass)?;
        let base = e_min(spec);
        let energies: Vec<f64> = offsets.iter().map(|o| base + o).collect();
        let table = period_table(&energies, spec, tol)?;
        let path = cfg.out_path(&format!("period_table_d{d}.csv"))?;
        write_table_file(&path, &["E", "T"], table.rows.iter().map(|&(e, t)| [e, t]))?;
        let (lo, hi) = table
            .periods()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
                (a.min(t), b.max(t))
            });
        summary.push(serde_json::json!({
            "d": d.get(), "m": cfg.mass, "rows": table.rows.len(),
            "T_min": lo, "T_max": hi, "tau_d": tau_d(d), "file": path.display().to_string(),
        }));
    }
    if cfg.all_dims {
        // Unit mass on one absolute energy grid above every well bottom.
        let pots: Vec<EffectivePotential> = cfg
            .dims
            .iter()
            .map(|&d| EffectivePotential::new(PotentialSpec::unit_mass(d)))
            .collect();
        let base = pots
            .iter()
            .map(EffectivePotential::e_min)
            .fold(f64::NEG_INFINITY, f64::max);
        let energies: Vec<f64> = offsets.iter().map(|o| base + o).collect();
        let columns: Vec<Vec<f64>> = pots
            .iter()
            .map(|pot| {
                energies
                    .iter()
                    .map(|&e| period(e, pot))
                    .collect::<confined_ep::Result<Vec<f64>>>()
            })
            .collect::<confined_ep::Result<_>>()?;
        let mut header = vec!["E".to_string()];
        header.extend(cfg.dims.iter().map(|d| format!("T_d{d}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = energies.iter().enumerate().map(|(i, &e)| {
            std::iter::once(e)
                .chain(columns.iter().map(|c| c[i]))
                .collect::<Vec<f64>>()
        });
        let path = cfg.out_path("figure1_summary.csv")?;
        write_table_file(&path, &header, rows)?;
        let ordered = (0..offsets.len()).all(|i| columns.windows(2).all(|w| w[0][i] > w[1][i]));
        summary.push(serde_json::json!({ "figure1_summary": path.display().to_string(), "strictly_ordered": ordered }));
    }
    print_json(&serde_json::Value::Array(summary));
    Ok(0)
}

fn cmd_expansion_check(cfg: &RunConfig) -> anyhow::Result<u8> {
    let e = cfg.emin_offset.0;
    let mut rows = Vec::new();
    for &d in &cfg.dims {
        let pot = NormalizedPotential::new(d);
        let predicted = small_energy_slope(&pot);
        let h = 0.1 * e;
        let fd = (period(e + h, &pot)? - period(e - h, &pot)?) / (2.0 * h);
        let formula = period_derivative(e, &pot)?;
        let cv = c_v(d);
        // relative gap, absolute where the prediction vanishes (d = 4)
        let gap = if predicted == 0.0 {
            (formula - predicted).abs()
        } else {
            (formula - predicted).abs() / predicted.abs()
        };
        rows.push([
            d.as_f64(),
            e,
            cv.evaluated,
            cv.closed_form,
            predicted,
            formula,
            fd,
        ]);
        say(&format!(
            "d={d}: T'({e:e}) H-formula {formula:.10e}, finite difference {fd:.10e}, pi c_V/d^(7/2) = {predicted:.10e} (c_V = {:.6}), gap {gap:.3e}",
            cv.closed_form
        ));
    }
    let path = cfg.out_path("expansion_check.csv")?;
    write_table_file(
        &path,
        &[
            "d",
            "E",
            "c_V",
            "c_V_closed",
            "slope_predicted",
            "dT_formula",
            "dT_fd",
        ],
        rows,
    )?;
    Ok(0)
}

/// Profile from `--input` or `--fixture` (default: the compliant fixture).
fn load_data(cfg: &RunConfig) -> anyhow::Result<InitialData> {
    let d = cfg.dim();
    if let Some(path) = &cfg.input {
        let s = read_profile_file(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(InitialData::from_samples(d, s.r, s.p0, s.u0)?);
    }
    let slug = cfg.fixture.as_deref().unwrap_or("compliant");
    if slug == "custom" {
        return custom_profile(cfg);
    }
    fixture_suite(d)?
        .into_iter()
        .find(|f| f.kind.slug() == slug)
        .map(|f| f.data)
        .ok_or_else(|| UsageError(format!("unknown fixture `{slug}`")).into())
}

fn custom_profile(cfg: &RunConfig) -> anyhow::Result<InitialData> {
    let d = cfg.dim();
    let (Some(level), Some(a)) = (cfg.level, cfg.shape_a) else {
        return Err(UsageError("a custom profile needs --level and --shape-a".into()).into());
    };
    let shape = MassShape {
        a,
        b: cfg.shape_b.unwrap_or(0.0),
        support_radius: cfg.support_radius,
        nodes: cfg.nodes,
        sign: if cfg.inward { -1.0 } else { 1.0 },
    };
    Ok(make_compliant(d, level, &shape)?)
}

fn cmd_check(cfg: &RunConfig) -> anyhow::Result<u8> {
    if !cfg.dim_given {
        return Err(UsageError("check needs --dim".into()).into());
    }
    let Some(path) = &cfg.input else {
        return Err(UsageError("check needs --input".into()).into());
    };
    let d = cfg.dim();
    let report = match read_profile_file(path) {
        Ok(s) => confined_ep::initial_data::classify_samples(
            d,
            s.r,
            s.p0,
            s.u0,
            &ClassifyOptions::default(),
        ),
        Err(Error::Parse { line, reason }) => {
            eprintln!("error: {}:{line}: {reason}", path.display());
            return Ok(1);
        }
        Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
    };
    let value = serde_json::to_value(&report)?;
    let out = cfg.out_path("condition_report.json")?;
    std::fs::write(&out, serde_json::to_string_pretty(&value)? + "\n")?;
    print_json(&value);
    Ok(report.verdict.exit_code() as u8)
}

fn cmd_generate(cfg: &RunConfig) -> anyhow::Result<u8> {
    let slug = cfg.fixture.as_deref().unwrap_or("suite");
    let mut written = Vec::new();
    for &d in &cfg.dims {
        let mut profiles: Vec<(String, InitialData)> = Vec::new();
        if slug == "custom" {
            let sub = RunConfig {
                dims: vec![d],
                ..cfg.clone()
            };
            profiles.push(("custom".into(), custom_profile(&sub)?));
        } else {
            for f in fixture_suite(d)? {
                if slug == "suite" || f.kind.slug() == slug {
                    profiles.push((f.kind.slug().into(), f.data));
                }
            }
            if profiles.is_empty() {
                return Err(UsageError(format!("unknown fixture `{slug}`")).into());
            }
        }
        for (name, data) in profiles {
            let path = cfg.out_path(&format!("fixture_{name}_d{d}.csv"))?;
            let rows = data
                .nodes()
                .iter()
                .zip(data.p0().values().iter().zip(data.u0().values()))
                .map(|(&r, (&p, &u))| [r, p, u]);
            write_table_file(&path, &PROFILE_HEADER, rows)?;
            written.push(path.display().to_string());
        }
    }
    print_json(&serde_json::json!({ "written": written }));
    Ok(0)
}

fn cmd_simulate(cfg: &RunConfig) -> anyhow::Result<u8> {
    if cfg.crossing_demo {
        return crossing_demo(cfg);
    }
    match cfg.mode {
        Mode::Orbit => simulate_orbit(cfg),
        Mode::Pw => simulate_pw(cfg),
        Mode::Bulk => simulate_bulk(cfg),
    }
}

fn simulate_orbit(cfg: &RunConfig) -> anyhow::Result<u8> {
    let d = cfg.dim();
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let spec = PotentialSpec::with_dimension(d, cfg.mass)?;
    let pot = EffectivePotential::new(spec);
    let state = match cfg.radius {
        Some(r) => CharacteristicState::orbit(d, cfg.mass, r, cfg.velocity)?,
        None => {
            let tp = turning_points(pot.e_min() + cfg.energy_offset, &pot)?;
            CharacteristicState::orbit(d, cfg.mass, tp.x2, 0.0)?
        }
    };
    let energy = state.energy();
    let quadrature = period(energy, &pot)?;
    let measured = measured_period(&state, tol)?;
    let t_end = cfg.t_end.unwrap_or(10.0 * quadrature);
    let traj = integrate_orbit(&state, t_end, tol)?;
    let path = cfg.out_path(&format!("trajectory_orbit_d{d}.csv"))?;
    write_table_file(
        &path,
        &["t", "r", "u"],
        traj.samples.iter().map(|s| [s.t, s.r, s.u]),
    )?;
    print_json(&serde_json::json!({
        "d": d.get(), "m": cfg.mass, "energy": energy, "e_min": pot.e_min(),
        "measured_period": measured, "quadrature_period": quadrature,
        "t_end": t_end, "steps": traj.samples.len() - 1, "energy_drift": traj.energy_drift,
        "file": path.display().to_string(),
    }));
    Ok(0)
}

fn simulate_pw(cfg: &RunConfig) -> anyhow::Result<u8> {
    let data = load_data(cfg)?;
    let d = data.dimension();
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let r = match cfg.radius {
        Some(r) => r,
        None => classify(&data, &ClassifyOptions::default())?
            .offending_radius
            .unwrap_or(data.support_radius()),
    };
    if !(r > 0.0 && r <= data.support_radius()) {
        return Err(UsageError(format!("--radius {r} is outside (0, R0]")).into());
    }
    let node = data.characteristic_at(r);
    let state = CharacteristicState::from_node(&node);
    let t0 = period(node.energy(), &EffectivePotential::new(node.spec()?))?;
    let t_end = cfg.t_end.unwrap_or(t0);
    let traj = integrate_pw(&state, t_end, tol)?;
    let path = cfg.out_path(&format!("trajectory_pw_d{d}.csv"))?;
    write_table_file(
        &path,
        &["t", "r", "u", "P", "w"],
        traj.samples.iter().map(|s| [s.t, s.r, s.u, s.p, s.w]),
    )?;
    let theta = theta_of(&node, data.u0().max_abs())?.theta;
    let f_min = min_f_along_orbit(&state, theta, node.k(), t0, tol)?;
    let orbit = integrate_orbit(&state, t_end.min(traj.t_end()).max(0.0), tol)?;
    let f_path = cfg.out_path(&format!("f_closed_form_d{d}.csv"))?;
    match f_closed_form(&orbit, theta, node.k()) {
        Ok(fs) => write_table_file(
            &f_path,
            &["t", "f", "df"],
            fs.iter().map(|s| [s.t, s.f, s.df]),
        )?,
        Err(e) => eprintln!("warning: closed form skipped: {e}"),
    }
    print_json(&serde_json::json!({
        "d": d.get(), "radius": r, "theta": theta, "k": node.k(), "period": t0,
        "blowup_time": traj.blowup_time, "min_f_over_period": f_min.f, "min_f_time": f_min.t,
        "file": path.display().to_string(),
    }));
    Ok(if traj.blowup_time.is_some() { 2 } else { 0 })
}

fn simulate_bulk(cfg: &RunConfig) -> anyhow::Result<u8> {
    let data = load_data(cfg)?;
    let d = data.dimension();
    let report = classify(&data, &ClassifyOptions::default())?;
    let level = if report.verdict == Verdict::Stationary {
        c_min(d) + 1.0
    } else {
        report.c0_mean
    };
    let t0 = period_at_level(d, level)?;
    let t_end = cfg.t_end.unwrap_or(t0);
    let dt = cfg.dt.unwrap_or(t0 / 100.0);
    let opts = BulkOptions {
        labels: cfg.labels,
        tol: cfg.tol.unwrap_or(confined_ep::bulk::DEFAULT_BULK_TOL),
    };
    let sol = evolve(&data, &time_grid(t_end, dt), &opts)?;
    let boundary = sol.boundary();
    write_table_file(
        &cfg.out_path(&format!("bulk_boundary_d{d}.csv"))?,
        &["t", "R"],
        boundary.iter().map(|&(t, r)| [t, r]),
    )?;
    write_table_file(
        &cfg.out_path(&format!("bulk_monitor_d{d}.csv"))?,
        &["t", "monitor"],
        sol.continuation_monitor().iter().map(|&(t, m)| [t, m]),
    )?;
    let stride = (sol.times.len() / 10).max(1);
    let mut rows = Vec::new();
    let radii = cfg.samples.max(2);
    for i in (0..sol.times.len()).step_by(stride) {
        let snap = sol.snapshot(&data, sol.times[i])?;
        let big_r = snap.boundary();
        for k in 1..=radii {
            let r = big_r * k as f64 / radii as f64;
            let f = snap.fields(r);
            rows.push([sol.times[i], r, f.rho, f.u, f.p]);
        }
    }
    write_table_file(
        &cfg.out_path(&format!("bulk_fields_d{d}.csv"))?,
        &["t", "r", "rho", "u", "P"],
        rows,
    )?;
    let r0 = data.support_radius();
    let at_period = sol
        .times
        .iter()
        .position(|&t| (t - t0).abs() <= 1e-9 * t0)
        .map(|i| (boundary[i].1 - r0).abs());
    let breakdown = match sol.status {
        BulkStatus::Classical => serde_json::Value::Null,
        BulkStatus::ClassicalBreakdown(b) => serde_json::to_value(b)?,
    };
    print_json(&serde_json::json!({
        "d": d.get(), "verdict": report.verdict, "T0": t0, "t_end": sol.t_end(),
        "labels": sol.labels.len(), "breakdown": breakdown,
        "boundary_return_error": at_period,
    }));
    Ok(if sol.breakdown().is_some() { 2 } else { 0 })
}

/// Two characteristics with different masses on overlapping radial ranges;
/// their periods differ unless `d = 4`.
fn crossing_demo(cfg: &RunConfig) -> anyhow::Result<u8> {
    let d = cfg.dim();
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let mb = cfg.mass_b.unwrap_or(2.0 * cfg.mass);
    let pa = EffectivePotential::new(PotentialSpec::with_dimension(d, cfg.mass)?);
    let pb = EffectivePotential::new(PotentialSpec::with_dimension(d, mb)?);
    let ra = cfg.radius.unwrap_or(pa.r_star() * 0.5);
    let rb = ra * 1.02;
    let a = CharacteristicState::orbit(d, cfg.mass, ra, cfg.velocity)?;
    let b = CharacteristicState::orbit(d, mb, rb, cfg.velocity)?;
    let t_max = cfg.t_end.unwrap_or(50.0 * tau_d(d));
    let hit = first_crossing(&a, &b, t_max, tol)?;
    let periods = (period(a.energy(), &pa)?, period(b.energy(), &pb)?);
    match hit {
        Some(t) => say(&format!("first crossing at t = {t:.12e}")),
        None => say(&format!("none within t_max = {t_max:.6e}")),
    }
    print_json(&serde_json::json!({
        "d": d.get(), "mass_a": cfg.mass, "mass_b": mb, "r_a": ra, "r_b": rb,
        "period_a": periods.0, "period_b": periods.1, "t_max": t_max, "crossing_time": hit,
    }));
    Ok(0)
}
