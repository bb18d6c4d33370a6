//! Command-line front end.
//!
//! Every subcommand takes the same flag set; flags not used by a command are accepted and
//! ignored. Output files go under `--out` and a one-line JSON summary goes to stdout.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::jlm::{isochronicity_check, JlmBundle};
use crate::output::{csv_row, GridSpec};
use crate::phase_plane::{
    classify, integrate_orbit, singular_lines, slow_time_reparametrize, unstable_manifold_seed,
    OrbitTrace,
};
use crate::series::{
    assess_roots, continuity_roots, convergence_diagnostic, select_convergent_root,
    series_residual, Convention, SeriesSolution, DEFAULT_ORDER, DEFAULT_SEARCH_INTERVAL,
};
use crate::spe::{PhasePoint, SpeParams};
use crate::variational::{
    compatibility_report, default_guess, family_csv, residual_csv, residual_profile,
    solve_embedded, solve_regular_soliton, DEFAULT_EMBEDDED_STARTS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_GRID: &str = "-1:1:2001";
const DEFAULT_OUT: &str = "out";
const DEFAULT_XI_END: f64 = 20.0;
const DEFAULT_STEP: f64 = 1e-3;
/// Distance from the origin of the default unstable-manifold seeds.
const MANIFOLD_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Classify,
    Portrait,
    Series,
    Jlm,
    Variational,
    Embedded,
    Residual,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Classify => "classify",
            CommandKind::Portrait => "portrait",
            CommandKind::Series => "series",
            CommandKind::Jlm => "jlm",
            CommandKind::Variational => "variational",
            CommandKind::Embedded => "embedded",
            CommandKind::Residual => "residual",
        }
    }

    fn default_format(self) -> Format {
        match self {
            CommandKind::Classify | CommandKind::Jlm | CommandKind::Embedded => Format::Json,
            _ => Format::Csv,
        }
    }

    fn accepts(self, format: Format) -> bool {
        match self {
            CommandKind::Classify | CommandKind::Embedded => format == Format::Json,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: SpeParams,
    pub order: usize,
    pub grid: GridSpec,
    pub a1: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    /// Times for `series` profiles `u(x + ct)`; empty for a single `z,u` profile.
    pub times: Vec<f64>,
    pub search: (f64, f64),
    pub convention: Convention,
    pub xi_end: f64,
    pub step: f64,
    /// Portrait start points; empty selects the default seeds.
    pub start: Vec<PhasePoint>,
    /// Speeds for `variational`; empty means the single speed `c`.
    pub sweep: Vec<f64>,
    pub starts: usize,
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub exit_code: i32,
    pub diagnostics: Vec<String>,
    pub output_files: Vec<PathBuf>,
    pub summary: Option<Value>,
}

/// A rejected command line; `exit_code` is 0 for `--help`/`--version`.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

impl UsageError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "shortpulse",
    version,
    about = "Traveling waves of the generalized short-pulse equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Classify the phase plane: singular lines, equilibria, wave class.
    Classify(Opts),
    /// Integrate orbits of the regularized system and recover slow time.
    Portrait(Opts),
    /// Homoclinic exponential series: continuity roots, coefficients, profile.
    Series(Opts),
    /// Last multiplier, potential and the harmonic-oscillator test.
    Jlm(Opts),
    /// Gaussian variational solitons and the closed-form action check.
    Variational(Opts),
    /// Multi-start search of the zero-tail embedded-soliton equations.
    Embedded(Opts),
    /// ODE residual of the variational soliton on a grid.
    Residual(Opts),
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Wave speed.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Linear coefficient β [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Cubic coefficient γ [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Series truncation order M [default: 39].
    #[arg(long)]
    order: Option<usize>,
    /// Output grid as start:stop:count [default: -1:1:2001].
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Leading series coefficient, skipping root selection.
    #[arg(long, allow_negative_numbers = true)]
    a1: Option<f64>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with any of these options; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated times t for profiles u(x + ct).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    times: Option<Vec<f64>>,
    /// Root search interval as lo:hi [default: -1:1].
    #[arg(long, allow_hyphen_values = true)]
    search: Option<String>,
    /// Series sign convention: printed or consistent [default: printed].
    #[arg(long)]
    convention: Option<Convention>,
    /// Fast-time span of portrait orbits [default: 20].
    #[arg(long, allow_negative_numbers = true)]
    xi_end: Option<f64>,
    /// RK4 step [default: 0.001].
    #[arg(long)]
    step: Option<f64>,
    /// Portrait start point u,y (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    start: Vec<String>,
    /// Comma-separated speeds for the variational family.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sweep: Option<Vec<f64>>,
    /// Multi-start count for the embedded search [default: 50].
    #[arg(long)]
    starts: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    c: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    order: Option<usize>,
    grid: Option<String>,
    a1: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    times: Option<Vec<f64>>,
    search: Option<[f64; 2]>,
    convention: Option<Convention>,
    xi_end: Option<f64>,
    step: Option<f64>,
    start: Option<Vec<[f64; 2]>>,
    sweep: Option<Vec<f64>>,
    starts: Option<usize>,
}

fn parse_pair(s: &str, sep: char, what: &str) -> std::result::Result<(f64, f64), UsageError> {
    let bad = || {
        UsageError::new(format!(
            "{what} `{s}` is not two numbers separated by `{sep}`"
        ))
    };
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn read_config(path: &Path) -> std::result::Result<ConfigFile, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| UsageError::new(format!("invalid config {}: {e}", path.display())))
}

fn finite(name: &str, x: f64) -> std::result::Result<f64, UsageError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(UsageError::new(format!("--{name} must be finite")))
    }
}

fn resolve(command: CommandKind, opts: Opts) -> std::result::Result<RunConfig, UsageError> {
    let file = match &opts.config {
        Some(path) => read_config(path)?,
        None => ConfigFile::default(),
    };
    let sweep = opts.sweep.or(file.sweep).unwrap_or_default();
    for s in &sweep {
        finite("sweep", *s)?;
    }
    let c = match opts.c.or(file.c) {
        Some(c) => c,
        None if command == CommandKind::Variational && !sweep.is_empty() => sweep[0],
        None => return Err(UsageError::new("missing required option --c")),
    };
    let params = SpeParams::new(
        c,
        opts.beta.or(file.beta).unwrap_or(1.0),
        opts.gamma.or(file.gamma).unwrap_or(1.0),
    )
    .map_err(|e| UsageError::new(e.to_string()))?;

    let order = opts.order.or(file.order).unwrap_or(DEFAULT_ORDER);
    if order < 3 {
        return Err(UsageError::new(format!(
            "--order must be at least 3, got {order}"
        )));
    }
    let grid_text = opts
        .grid
        .or(file.grid)
        .unwrap_or_else(|| DEFAULT_GRID.to_string());
    let grid: GridSpec = grid_text
        .parse()
        .map_err(|e: Error| UsageError::new(e.to_string()))?;

    let a1 = opts.a1.or(file.a1).map(|a| finite("a1", a)).transpose()?;
    let out = opts
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let format = opts
        .format
        .or(file.format)
        .unwrap_or(command.default_format());
    if !command.accepts(format) {
        return Err(UsageError::new(format!(
            "--format {} is not available for `{}`",
            format.name(),
            command.name()
        )));
    }
    let times = opts.times.or(file.times).unwrap_or_default();
    for t in &times {
        finite("times", *t)?;
    }
    let search = match opts.search {
        Some(s) => parse_pair(&s, ':', "search interval")?,
        None => file
            .search
            .map(|[a, b]| (a, b))
            .unwrap_or(DEFAULT_SEARCH_INTERVAL),
    };
    if search.0 >= search.1 || !search.0.is_finite() || !search.1.is_finite() {
        return Err(UsageError::new(format!(
            "empty search interval {}:{}",
            search.0, search.1
        )));
    }
    let convention = opts.convention.or(file.convention).unwrap_or_default();
    let xi_end = finite(
        "xi-end",
        opts.xi_end.or(file.xi_end).unwrap_or(DEFAULT_XI_END),
    )?;
    if xi_end == 0.0 {
        return Err(UsageError::new("--xi-end must be nonzero"));
    }
    let step = finite("step", opts.step.or(file.step).unwrap_or(DEFAULT_STEP))?;
    if step <= 0.0 {
        return Err(UsageError::new("--step must be positive"));
    }
    let start = if opts.start.is_empty() {
        file.start
            .unwrap_or_default()
            .into_iter()
            .map(|[u, y]| (u, y))
            .collect::<Vec<_>>()
    } else {
        opts.start
            .iter()
            .map(|s| parse_pair(s, ',', "start point"))
            .collect::<std::result::Result<_, _>>()?
    };
    let start = start
        .into_iter()
        .map(|(u, y)| PhasePoint::new(u, y).map_err(|e| UsageError::new(e.to_string())))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let starts = opts
        .starts
        .or(file.starts)
        .unwrap_or(DEFAULT_EMBEDDED_STARTS);
    if starts == 0 {
        return Err(UsageError::new("--starts must be at least 1"));
    }

    Ok(RunConfig {
        command,
        params,
        order,
        grid,
        a1,
        out,
        format,
        times,
        search,
        convention,
        xi_end,
        step,
        start,
        sweep,
        starts,
    })
}

/// Parses a full argument vector (program name first) into a validated config.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        // clap reports 0 for help and version, 2 for everything else.
        exit_code: if e.exit_code() == 0 {
            EXIT_OK
        } else {
            EXIT_USAGE
        },
    })?;
    let (command, opts) = match cli.command {
        Sub::Classify(o) => (CommandKind::Classify, o),
        Sub::Portrait(o) => (CommandKind::Portrait, o),
        Sub::Series(o) => (CommandKind::Series, o),
        Sub::Jlm(o) => (CommandKind::Jlm, o),
        Sub::Variational(o) => (CommandKind::Variational, o),
        Sub::Embedded(o) => (CommandKind::Embedded, o),
        Sub::Residual(o) => (CommandKind::Residual, o),
    };
    resolve(command, opts)
}

fn list(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// The flag rendering of a config; `parse_args` of it reproduces the config.
pub fn to_args(cfg: &RunConfig) -> Vec<String> {
    let mut args = vec![
        "shortpulse".to_string(),
        cfg.command.name().to_string(),
        format!("--c={:?}", cfg.params.c()),
        format!("--beta={:?}", cfg.params.beta()),
        format!("--gamma={:?}", cfg.params.gamma()),
        format!("--order={}", cfg.order),
        format!("--grid={}", cfg.grid),
        format!("--out={}", cfg.out.display()),
        format!("--format={}", cfg.format.name()),
        format!("--search={:?}:{:?}", cfg.search.0, cfg.search.1),
        format!("--convention={}", cfg.convention),
        format!("--xi-end={:?}", cfg.xi_end),
        format!("--step={:?}", cfg.step),
        format!("--starts={}", cfg.starts),
    ];
    if let Some(a1) = cfg.a1 {
        args.push(format!("--a1={a1:?}"));
    }
    if !cfg.times.is_empty() {
        args.push(format!("--times={}", list(&cfg.times)));
    }
    if !cfg.sweep.is_empty() {
        args.push(format!("--sweep={}", list(&cfg.sweep)));
    }
    for pt in &cfg.start {
        args.push(format!("--start={:?},{:?}", pt.u, pt.y));
    }
    args
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::create_dir_all(self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn require_base(p: &SpeParams, command: CommandKind) -> Result<()> {
    if p.beta() != 1.0 || p.gamma() != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "`{}` uses the base equation (beta = gamma = 1)",
            command.name()
        )));
    }
    Ok(())
}

fn default_seeds(p: &SpeParams) -> Result<Vec<PhasePoint>> {
    let mut seeds = Vec::new();
    if p.is_saddle() {
        seeds.push(unstable_manifold_seed(p, MANIFOLD_OFFSET, 1.0)?);
        seeds.push(unstable_manifold_seed(p, MANIFOLD_OFFSET, -1.0)?);
    }
    let reach = singular_lines(p)
        .into_iter()
        .fold(0.0, |m: f64, u| m.max(u.abs()));
    let reach = if reach > 0.0 { reach } else { 1.0 };
    for f in [0.25, 0.5, 0.75] {
        seeds.push(PhasePoint::new(f * reach, 0.0)?);
    }
    Ok(seeds)
}

fn trace_json(start: PhasePoint, t: &OrbitTrace) -> Value {
    json!({
        "start": [start.u, start.y],
        "escaped": t.escaped,
        "breaking_point": t.breaking_point,
        "xi": t.xi,
        "u": t.points.iter().map(|p| p.u).collect::<Vec<_>>(),
        "y": t.points.iter().map(|p| p.y).collect::<Vec<_>>(),
        "z": t.z,
    })
}

fn run_portrait(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let p = &cfg.params;
    let seeds = if cfg.start.is_empty() {
        default_seeds(p)?
    } else {
        cfg.start.clone()
    };
    let mut traces = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        let trace = slow_time_reparametrize(&integrate_orbit(p, *seed, cfg.xi_end, cfg.step)?, p)?;
        if cfg.format == Format::Csv {
            out.write(&format!("orbit_{i:02}.csv"), &trace.to_csv())?;
        }
        traces.push(trace);
    }
    if cfg.format == Format::Json {
        let orbits: Vec<Value> = seeds
            .iter()
            .zip(&traces)
            .map(|(s, t)| trace_json(*s, t))
            .collect();
        out.write_json("portrait.json", &json!({ "orbits": orbits }))?;
    }
    Ok(json!({
        "orbits": traces.len(),
        "escaped": traces.iter().map(|t| t.escaped).collect::<Vec<_>>(),
        "breaking_points": traces.iter().map(|t| t.breaking_point).collect::<Vec<_>>(),
    }))
}

fn run_series(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let p = &cfg.params;
    let (roots, a1) = match cfg.a1 {
        Some(a1) => (Vec::new(), a1),
        None => {
            let roots = continuity_roots(cfg.order, p, cfg.search, cfg.convention)?;
            let a1 = select_convergent_root(&roots, cfg.order, p, cfg.convention)?;
            (roots, a1)
        }
    };
    let candidates = assess_roots(&roots, cfg.order, p, cfg.convention)?;
    let sol = SeriesSolution::new(a1, cfg.order, p, cfg.convention)?;
    let diag = convergence_diagnostic(&sol.coeffs)?;
    let grid = cfg.grid.points();
    let positive: Vec<f64> = grid.iter().copied().filter(|z| *z > 0.0).collect();
    let max_residual = (!positive.is_empty()).then(|| series_residual(&sol, &positive));

    match cfg.format {
        Format::Csv => {
            if cfg.times.is_empty() {
                out.write("series_profile.csv", &sol.solution_csv(&grid))?;
            } else {
                let mut text = String::from("x");
                for t in &cfg.times {
                    text.push_str(&format!(",u(t={t:?})"));
                }
                text.push('\n');
                for x in &grid {
                    let mut row = vec![*x];
                    row.extend(cfg.times.iter().map(|t| sol.evaluate(x + p.c() * t)));
                    text.push_str(&csv_row(&row));
                }
                out.write("series_profile.csv", &text)?;
            }
            out.write("series_coefficients.csv", &sol.coefficients_csv())?;
        }
        Format::Json => {
            let profile: Vec<Value> = if cfg.times.is_empty() {
                vec![
                    json!({ "t": Value::Null, "u": grid.iter().map(|z| sol.evaluate(*z)).collect::<Vec<_>>() }),
                ]
            } else {
                cfg.times
                    .iter()
                    .map(|t| json!({ "t": t, "u": grid.iter().map(|x| sol.evaluate(x + p.c() * t)).collect::<Vec<_>>() }))
                    .collect()
            };
            out.write_json(
                "series.json",
                &json!({
                    "a1": sol.a1,
                    "alpha": sol.alpha,
                    "order": sol.order,
                    "convention": sol.convention,
                    "coefficients": sol.coeffs,
                    "grid": grid,
                    "profiles": profile,
                }),
            )?;
        }
    }
    Ok(json!({
        "a1": a1,
        "tail_ratio": diag.tail_ratio,
        "converging": diag.converging,
        "max_residual": max_residual,
        "roots": to_value(&candidates),
        "order": cfg.order,
        "convention": cfg.convention,
    }))
}

fn run_jlm(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    let bundle = JlmBundle::new(&cfg.params);
    let iso = isochronicity_check(&cfg.params);
    match cfg.format {
        Format::Json => out.write_json(
            "jlm.json",
            &json!({
                "multiplier": bundle.multiplier,
                "potential": bundle.potential,
                "isochronicity": to_value(&iso),
            }),
        )?,
        Format::Csv => {
            let mut text = String::from("u,multiplier,potential\n");
            for u in cfg.grid.points() {
                text.push_str(&csv_row(&[
                    u,
                    bundle.multiplier.eval(u),
                    bundle.potential.eval(u),
                ]));
            }
            out.write("jlm.csv", &text)?;
        }
    }
    Ok(json!({
        "multiplier": bundle.multiplier,
        "potential": bundle.potential,
        "q_from_potential": iso.q_from_potential,
        "q_from_multiplier": iso.q_from_multiplier,
        "sho_mappable": iso.sho_mappable,
    }))
}

fn run_variational(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    require_base(&cfg.params, cfg.command)?;
    let speeds = if cfg.sweep.is_empty() {
        vec![cfg.params.c()]
    } else {
        cfg.sweep.clone()
    };
    let solitons = speeds
        .iter()
        .map(|&c| solve_regular_soliton(c, default_guess(c)))
        .collect::<Result<Vec<_>>>()?;
    let report = compatibility_report()?;
    match cfg.format {
        Format::Csv => {
            out.write("variational_family.csv", &family_csv(&solitons))?;
            out.write_json("compatibility.json", &to_value(&report))?;
        }
        Format::Json => out.write_json(
            "variational.json",
            &json!({ "solitons": to_value(&solitons), "compatibility": to_value(&report) }),
        )?,
    }
    let brief: Vec<Value> = solitons
        .iter()
        .map(|s| json!({ "c": s.params.c(), "amplitude": s.amplitude, "width": s.width, "gradient_norm": s.gradient_norm }))
        .collect();
    Ok(json!({ "solitons": brief, "compatibility_verdict": report.verdict }))
}

fn run_residual(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    require_base(&cfg.params, cfg.command)?;
    let c = cfg.params.c();
    let sol = solve_regular_soliton(c, default_guess(c))?;
    let grid = cfg.grid.points();
    let residual = residual_profile(&sol, &grid);
    match cfg.format {
        Format::Csv => out.write("residual.csv", &residual_csv(&grid, &residual))?,
        Format::Json => {
            out.write_json("residual.json", &json!({ "z": grid, "residual": residual }))?
        }
    }
    let max_abs = residual.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(json!({ "amplitude": sol.amplitude, "width": sol.width, "max_abs_residual": max_abs }))
}

fn dispatch(cfg: &RunConfig, out: &mut Outputs) -> Result<Value> {
    match cfg.command {
        CommandKind::Classify => {
            let value = classify(&cfg.params)?.to_json();
            out.write_json("classify.json", &value)?;
            Ok(value)
        }
        CommandKind::Portrait => run_portrait(cfg, out),
        CommandKind::Series => run_series(cfg, out),
        CommandKind::Jlm => run_jlm(cfg, out),
        CommandKind::Variational => run_variational(cfg, out),
        CommandKind::Embedded => {
            require_base(&cfg.params, cfg.command)?;
            let report = to_value(&solve_embedded(cfg.params.c(), cfg.starts)?);
            out.write_json("embedded.json", &report)?;
            Ok(report)
        }
        CommandKind::Residual => run_residual(cfg, out),
    }
}

/// Executes a validated config, writing only under `cfg.out`.
pub fn run(cfg: &RunConfig) -> RunReport {
    let mut out = Outputs {
        dir: &cfg.out,
        files: Vec::new(),
    };
    match dispatch(cfg, &mut out) {
        Ok(mut summary) => {
            if let Value::Object(map) = &mut summary {
                map.insert("command".into(), json!(cfg.command.name()));
                map.insert(
                    "output_files".into(),
                    json!(out
                        .files
                        .iter()
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()),
                );
            }
            RunReport {
                exit_code: EXIT_OK,
                diagnostics: Vec::new(),
                output_files: out.files,
                summary: Some(summary),
            }
        }
        Err(e) => RunReport {
            exit_code: EXIT_DOMAIN,
            diagnostics: vec![format!("{}: {e}", cfg.command.name())],
            output_files: out.files,
            summary: None,
        },
    }
}

/// Full program behavior: parse, run, print, and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(e) if e.exit_code == EXIT_OK => {
            print!("{}", e.message);
            return EXIT_OK;
        }
        Err(e) => {
            let mut usage = Cli::command();
            let message = e.message.trim_end();
            if message.starts_with("error:") {
                eprintln!("{message}");
            } else {
                eprintln!("error: {message}\n\n{}", usage.render_usage());
            }
            return e.exit_code;
        }
    };
    let report = run(&cfg);
    for d in &report.diagnostics {
        eprintln!("error: {d}");
    }
    if let Some(summary) = &report.summary {
        println!("{summary}");
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(args: &[&str]) -> std::result::Result<RunConfig, UsageError> {
        parse_args(std::iter::once("shortpulse").chain(args.iter().copied()))
    }

    #[test]
    fn fig2_flags() {
        let cfg = parse(&["series", "--c", "0.001", "--order", "39"]).unwrap();
        assert_eq!(cfg.command, CommandKind::Series);
        assert_eq!(cfg.params, SpeParams::base(0.001).unwrap());
        assert_eq!(cfg.order, 39);
        assert_eq!(cfg.grid, GridSpec::new(-1.0, 1.0, 2001).unwrap());
        assert_eq!(cfg.out, PathBuf::from("out"));
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn negative_values() {
        let cfg = parse(&[
            "classify", "--c", "-0.1", "--grid", "-2:-1:3", "--start", "-0.5,0.1",
        ])
        .unwrap();
        assert_eq!(cfg.params.c(), -0.1);
        assert_eq!(cfg.grid.start, -2.0);
        assert_eq!(cfg.start, vec![PhasePoint { u: -0.5, y: 0.1 }]);
        let cfg = parse(&["series", "--c=0.1", "--times", "-1,0.5"]).unwrap();
        assert_eq!(cfg.times, vec![-1.0, 0.5]);
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["series"][..],
            &["series", "--c", "0.1", "--grid", "0:1"],
            &["series", "--c", "0.1", "--bogus", "1"],
            &["series", "--c", "0.1", "--order", "2"],
            &["classify", "--c", "0.1", "--format", "csv"],
            &["embedded", "--c", "0.1", "--format", "csv"],
            &["frobnicate", "--c", "0.1"],
            &["series", "--c", "nan"],
            &["series", "--c", "0.1", "--search", "1:-1"],
        ] {
            assert_eq!(parse(args).unwrap_err().exit_code, EXIT_USAGE, "{args:?}");
        }
        assert_eq!(parse(&["--help"]).unwrap_err().exit_code, EXIT_OK);
        assert_eq!(parse(&["--version"]).unwrap_err().exit_code, EXIT_OK);
    }

    #[test]
    fn config_file_with_flag_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"c": 0.2, "gamma": 3.0, "order": 21, "search": [-0.5, 0.5]}"#,
        )
        .unwrap();
        let cfg = parse(&[
            "series",
            "--config",
            path.to_str().unwrap(),
            "--order",
            "25",
        ])
        .unwrap();
        assert_eq!(cfg.params, SpeParams::new(0.2, 1.0, 3.0).unwrap());
        assert_eq!(cfg.order, 25);
        assert_eq!(cfg.search, (-0.5, 0.5));
        std::fs::write(&path, r#"{"c": 0.2, "colour": 1}"#).unwrap();
        assert_eq!(
            parse(&["series", "--config", path.to_str().unwrap()])
                .unwrap_err()
                .exit_code,
            EXIT_USAGE
        );
    }

    #[test]
    fn domain_error_exit() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse(&[
            "series",
            "--c",
            "-0.1",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        let report = run(&cfg);
        assert_eq!(report.exit_code, EXIT_DOMAIN);
        assert!(report.diagnostics[0].contains("saddle"));
        assert!(report.output_files.is_empty());
    }

    #[test]
    fn series_with_override_writes_both_csvs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let cfg = parse(&[
            "series",
            "--c",
            "0.001",
            "--a1",
            "-0.0193",
            "--grid",
            "-0.5:0.5:11",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let report = run(&cfg);
        assert_eq!(report.exit_code, EXIT_OK, "{:?}", report.diagnostics);
        let summary = report.summary.unwrap();
        assert_eq!(summary["a1"], json!(-0.0193));
        assert!(summary["converging"].as_bool().unwrap());
        let profile = std::fs::read_to_string(out.join("series_profile.csv")).unwrap();
        assert!(profile.starts_with("z,u\n"));
        assert_eq!(profile.lines().count(), 12);
        let coeffs = std::fs::read_to_string(out.join("series_coefficients.csv")).unwrap();
        assert!(coeffs.starts_with("k,a_k\n1,"));
        for f in &report.output_files {
            assert!(f.starts_with(&out));
        }
    }

    #[test]
    fn series_times_columns() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse(&[
            "series",
            "--c",
            "0.001",
            "--a1",
            "-0.0193",
            "--grid",
            "-0.5:0.5:5",
            "--times",
            "0,2",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(run(&cfg).exit_code, EXIT_OK);
        let text = std::fs::read_to_string(dir.path().join("series_profile.csv")).unwrap();
        assert!(text.starts_with("x,u(t=0.0),u(t=2.0)\n"));
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        let cmd = prop_oneof![
            Just(CommandKind::Classify),
            Just(CommandKind::Portrait),
            Just(CommandKind::Series),
            Just(CommandKind::Jlm),
            Just(CommandKind::Variational),
            Just(CommandKind::Embedded),
            Just(CommandKind::Residual),
        ];
        (
            cmd,
            (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0),
            (3usize..80, -5.0f64..0.0, 0.0f64..5.0, 2usize..5000),
            proptest::option::of(-1.0f64..1.0),
            any::<bool>(),
            proptest::collection::vec(-5.0f64..5.0, 0..4),
            (-3.0f64..-0.1, 0.1f64..3.0, any::<bool>()),
            (0.1f64..100.0, 1e-5f64..0.1),
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..3),
            (proptest::collection::vec(0.01f64..1.0, 0..3), 1usize..500),
        )
            .prop_map(
                |(
                    command,
                    (c, beta, gamma),
                    (order, g0, g1, count),
                    a1,
                    json_fmt,
                    times,
                    (lo, hi, consistent),
                    (xi_end, step),
                    start,
                    (sweep, starts),
                )| {
                    let format = if command.accepts(Format::Csv) && !json_fmt {
                        Format::Csv
                    } else {
                        Format::Json
                    };
                    RunConfig {
                        command,
                        params: SpeParams::new(c, beta, gamma).unwrap(),
                        order,
                        grid: GridSpec::new(g0, g1, count).unwrap(),
                        a1,
                        out: PathBuf::from("some/out dir"),
                        format,
                        times,
                        search: (lo, hi),
                        convention: if consistent {
                            Convention::Consistent
                        } else {
                            Convention::Printed
                        },
                        xi_end,
                        step,
                        start: start
                            .into_iter()
                            .map(|(u, y)| PhasePoint { u, y })
                            .collect(),
                        sweep,
                        starts,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn flag_round_trip(cfg in arb_config()) {
            let back = parse_args(to_args(&cfg)).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
