//! The `lgisim` command line.
//!
//! Subcommands: `sweep-theta`, `sweep-gamma`, `bounds`, `pipeline` and
//! `rerun`. Angles are degrees on the command line and radians everywhere
//! else. Every file written is accompanied by a `<stem>.manifest.json`
//! [`RunManifest`]; `rerun <manifest>` replays it.
//!
//! Exit codes: 0 ok, 2 usage, 3 simulation or I/O failure, 4 bench parse error.
//!
//! CSV files have a header row; numbers are printed with 10 decimals and
//! undefined values as `NaN`. JSON files hold `{"manifest": …, "rows": […]}`
//! with one flat object per CSV row (NaN becomes `null`).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::expsim::{
    build_network, estimate_port, k_quadruple, run_layout, sweep_gamma, sweep_theta, BenchConfig,
    DetectorRecord, EstimateWithError,
};
use crate::lgi::{
    classical_bounds, classical_bounds_closed_form, luders_bound, maximize_precession,
    minimize_closed_form, KQuadruple,
};
use crate::optics::BenchLayout;
use crate::weakmeas::{amplified_prob, Coupling, PostPort};
use crate::Error;

pub const SEED_ENV: &str = "LGI_BENCH_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "lgisim",
    version,
    about = "Leggett-Garg tests by exact weak measurement"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Post-selection probabilities, weak values and K₃ᵢ over a θ grid.
    SweepTheta(ThetaArgs),
    /// Recovered weak value over a grid of coupling strengths.
    SweepGamma(GammaArgs),
    /// Classical, Lüders and precession bounds on Kₙ.
    Bounds(BoundsArgs),
    /// One configuration end to end, optionally from a bench file.
    Pipeline(PipelineArgs),
    /// Replays the command recorded in a manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SweepTheta(_) => "sweep-theta",
            Command::SweepGamma(_) => "sweep-gamma",
            Command::Bounds(_) => "bounds",
            Command::Pipeline(_) => "pipeline",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Post {
    Plus,
    Minus,
}

impl From<Post> for PostPort {
    fn from(p: Post) -> Self {
        match p {
            Post::Plus => PostPort::PlusM3,
            Post::Minus => PostPort::MinusM3,
        }
    }
}

/// Noise, seeding and output flags shared by the simulating commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimArgs {
    /// Relative intensity noise (standard deviation).
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Noisy readings per analyzer setting.
    #[arg(long, default_value_t = 100)]
    pub shots: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ThetaArgs {
    /// First θ (degrees).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub start: f64,
    /// Last θ (degrees, inclusive).
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    pub end: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    /// Coupling γ (degrees).
    #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Adds a p_plus_amp column with N-fold amplification.
    #[arg(long)]
    pub amplify: Option<u32>,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GammaArgs {
    /// Preparation angle θ (degrees).
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Comma-separated couplings (degrees); default −24…24 step 4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma_list: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Post::Plus)]
    pub post: Post,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    /// Number of measurement times (3…24).
    #[arg(short, long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    /// Bench description; the built-in network for --theta/--gamma when absent.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    /// Preparation angle θ (degrees); sets H1 and the theory columns.
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Coupling γ (degrees) used to invert the pointer readout.
    #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
    pub gamma: f64,
    /// Post-selection port whose weak value is reported first.
    #[arg(long, value_enum, default_value_t = Post::Minus)]
    pub post: Post,
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved arguments; `rerun` replays exactly these.
    pub config: Command,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Simulation(String),
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Parse(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Simulation(m) | CliError::Parse(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => CliError::Parse(e.to_string()),
            Error::InvalidConfig(_) | Error::CouplingOutOfRange(_) | Error::ZeroCoupling => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Simulation(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Entry point of the `lgisim` binary.
pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    ExitCode::from(run(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    ))
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::SweepTheta(a) => cmd_sweep_theta(a, out),
        Command::SweepGamma(a) => cmd_sweep_gamma(a, out, err),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Pipeline(a) => cmd_pipeline(a, out),
        Command::Rerun(a) => cmd_rerun(a, out, err),
    }
}

fn check_finite(name: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite")))
    }
}

/// Inclusive grid start, start + step, … ≤ end (up to rounding), in degrees.
pub fn degree_grid(start: f64, end: f64, step: f64) -> CliResult<Vec<f64>> {
    check_finite("start", start)?;
    check_finite("end", end)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage("--step must be positive".into()));
    }
    if end < start {
        return Err(CliError::Usage("--end must not be below --start".into()));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// Default γ grid: −24° … 24° in steps of 4°, without 0.
pub fn default_gamma_grid() -> Vec<f64> {
    (-6..=6)
        .filter(|&k| k != 0)
        .map(|k| 4.0 * k as f64)
        .collect()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    let s = format!("{x:.10}");
    if s.trim_start_matches('-')
        .bytes()
        .all(|b| b == b'0' || b == b'.')
    {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// A table of numbers with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, &x)| (c.clone(), serde_json::json!(x)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn push_est(cols: &mut Vec<String>, row: &mut Vec<f64>, name: &str, e: EstimateWithError) {
    cols.push(name.into());
    cols.push(format!("{name}_sigma"));
    row.push(e.value);
    row.push(e.sigma);
}

fn amplified(p: EstimateWithError, n: u32) -> EstimateWithError {
    let v = amplified_prob(p.value, n);
    let sigma = if v < 1.0 { f64::from(n) * p.sigma } else { 0.0 };
    EstimateWithError::new(v, sigma)
}

/// Writes `<stem>.csv` / `<stem>.json` and `<stem>.manifest.json` into `sim.out`.
fn emit(cmd: &Command, sim: &SimArgs, stem: &str, table: &Table) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(&sim.out)?;
    let mut outputs = Vec::new();
    if matches!(sim.format, Format::Csv | Format::Both) {
        let path = sim.out.join(format!("{stem}.csv"));
        fs::write(&path, table.to_csv())?;
        outputs.push(path);
    }
    let json_path = sim.out.join(format!("{stem}.json"));
    if matches!(sim.format, Format::Json | Format::Both) {
        outputs.push(json_path.clone());
    }
    let manifest = RunManifest {
        command: cmd.name().into(),
        config: cmd.clone(),
        seed: sim.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: outputs.clone(),
    };
    if matches!(sim.format, Format::Json | Format::Both) {
        let doc = serde_json::json!({ "manifest": manifest, "rows": table.to_json_rows() });
        fs::write(&json_path, to_pretty(&doc)?)?;
    }
    let manifest_path = sim.out.join(format!("{stem}.manifest.json"));
    fs::write(&manifest_path, to_pretty(&manifest)?)?;
    outputs.push(manifest_path);
    Ok(outputs)
}

fn to_pretty(v: &impl Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| CliError::Simulation(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn sim_config(
    sim: &SimArgs,
    theta_deg: f64,
    gamma_deg: f64,
    post: PostPort,
) -> CliResult<BenchConfig> {
    let cfg = BenchConfig {
        theta: check_finite("theta", theta_deg)?.to_radians(),
        gamma: check_finite("gamma", gamma_deg)?.to_radians(),
        post_port: post,
        noise_rel: sim.noise,
        shots: sim.shots,
        seed: sim.seed,
        amplification_n: 1,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// θ-sweep table in the `theta_sweep.csv` column layout.
pub fn theta_table(a: &ThetaArgs) -> CliResult<Table> {
    let thetas = degree_grid(a.start, a.end, a.step)?;
    if a.amplify == Some(0) {
        return Err(CliError::Usage("--amplify must be positive".into()));
    }
    if a.gamma == 0.0 {
        return Err(CliError::Usage("--gamma must be nonzero".into()));
    }
    let template = BenchConfig {
        amplification_n: a.amplify.unwrap_or(1),
        ..sim_config(&a.sim, 0.0, a.gamma, PostPort::PlusM3)?
    };
    let radians: Vec<f64> = thetas.iter().map(|t| t.to_radians()).collect();
    let rows = sweep_theta(&template, &radians)?;

    let mut columns = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for (i, (r, &theta_deg)) in rows.iter().zip(&thetas).enumerate() {
        let mut cols = vec!["theta_deg".to_string()];
        let mut row = vec![theta_deg];
        push_est(&mut cols, &mut row, "p_plus", r.plus.p_post);
        push_est(
            &mut cols,
            &mut row,
            "p_plus_N2",
            amplified(r.plus.p_post, 2),
        );
        push_est(
            &mut cols,
            &mut row,
            "p_plus_N3",
            amplified(r.plus.p_post, 3),
        );
        push_est(&mut cols, &mut row, "p_minus", r.minus.p_post);
        push_est(&mut cols, &mut row, "re_w_plus", r.plus.re);
        push_est(&mut cols, &mut row, "im_w_plus", r.plus.im);
        push_est(&mut cols, &mut row, "re_w_minus", r.minus.re);
        push_est(&mut cols, &mut row, "im_w_minus", r.minus.im);
        for (name, k) in KQuadruple::NAMES.iter().zip(r.k) {
            push_est(&mut cols, &mut row, name, k);
        }
        let theory = [
            ("p_plus_theory", r.plus_theory.p_post),
            ("p_minus_theory", r.minus_theory.p_post),
            ("re_w_plus_theory", r.plus_theory.re_w()),
            ("re_w_minus_theory", r.minus_theory.re_w()),
        ];
        for (name, v) in theory {
            cols.push(name.into());
            row.push(v);
        }
        for (name, k) in KQuadruple::NAMES.iter().zip(r.k_theory.as_array()) {
            cols.push(format!("{name}_theory"));
            row.push(k);
        }
        if let Some(n) = a.amplify {
            push_est(
                &mut cols,
                &mut row,
                "p_plus_amp",
                amplified(r.plus.p_post, n),
            );
        }
        if i == 0 {
            columns = cols;
        }
        out.push(row);
    }
    Ok(Table { columns, rows: out })
}

fn cmd_sweep_theta(a: &ThetaArgs, out: &mut dyn Write) -> CliResult<()> {
    let table = theta_table(a)?;
    let cmd = Command::SweepTheta(a.clone());
    let written = emit(&cmd, &a.sim, "theta_sweep", &table)?;

    let col = |name: &str| table.columns.iter().position(|c| c == name).unwrap();
    for (i, name) in KQuadruple::NAMES.iter().enumerate() {
        let (v, s) = (col(name), col(&format!("{name}_sigma")));
        let violated: Vec<&Vec<f64>> = table
            .rows
            .iter()
            .filter(|r| r[v] + r[s].max(1e-10) < 0.0)
            .collect();
        if violated.is_empty() {
            continue;
        }
        let worst = violated
            .iter()
            .min_by(|x, y| x[v].total_cmp(&y[v]))
            .unwrap();
        let (theta_min, k_min) = minimize_closed_form(i);
        writeln!(
            out,
            "{name} violated at {}/{} rows; lowest {} ± {} at theta={} deg; theory minimum {} at theta={:.4} deg",
            violated.len(),
            table.rows.len(),
            num(worst[v]),
            num(worst[s]),
            num(worst[0]),
            num(k_min),
            theta_min.to_degrees(),
        )?;
    }
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

/// γ-sweep table in the `gamma_sweep.csv` column layout, plus the number of
/// grid points dropped because γ = 0.
pub fn gamma_table(a: &GammaArgs) -> CliResult<(Table, usize)> {
    let requested = a.gamma_list.clone().unwrap_or_else(default_gamma_grid);
    if requested.is_empty() {
        return Err(CliError::Usage("--gamma-list is empty".into()));
    }
    for &g in &requested {
        check_finite("gamma-list", g)?;
    }
    let gammas: Vec<f64> = requested.iter().copied().filter(|&g| g != 0.0).collect();
    let dropped = requested.len() - gammas.len();
    if gammas.is_empty() {
        return Err(CliError::Usage(
            "no nonzero coupling in --gamma-list".into(),
        ));
    }
    let template = sim_config(&a.sim, a.theta, gammas[0], a.post.into())?;
    let radians: Vec<f64> = gammas.iter().map(|g| g.to_radians()).collect();
    let rows = sweep_gamma(&template, &radians)?;

    let mut columns = Vec::new();
    let mut out = Vec::with_capacity(rows.len());
    for (i, (r, &g)) in rows.iter().zip(&gammas).enumerate() {
        let mut cols = vec!["gamma_deg".to_string()];
        let mut row = vec![g];
        push_est(&mut cols, &mut row, "re_w", r.estimate.re);
        push_est(&mut cols, &mut row, "im_w", r.estimate.im);
        push_est(&mut cols, &mut row, "norm_w", r.norm_w);
        push_est(&mut cols, &mut row, "norm_w_sq", r.norm_w_sq);
        push_est(&mut cols, &mut row, "p_post", r.estimate.p_post);
        let w = r.theory.weak.map(|w| w.value());
        let theory = [
            ("re_w_theory", r.theory.re_w()),
            ("im_w_theory", r.theory.im_w()),
            ("norm_w_theory", w.map_or(f64::NAN, |w| w.norm())),
            ("norm_w_sq_theory", w.map_or(f64::NAN, |w| w.norm_sqr())),
            ("p_post_theory", r.theory.p_post),
        ];
        for (name, v) in theory {
            cols.push(name.into());
            row.push(v);
        }
        if i == 0 {
            columns = cols;
        }
        out.push(row);
    }
    Ok((Table { columns, rows: out }, dropped))
}

fn cmd_sweep_gamma(a: &GammaArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let (table, dropped) = gamma_table(a)?;
    if dropped > 0 {
        writeln!(
            err,
            "warning: dropped γ = 0 from the grid (no coupling, no readout)"
        )?;
    }
    let written = emit(
        &Command::SweepGamma(a.clone()),
        &a.sim,
        "gamma_sweep",
        &table,
    )?;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

/// The `bounds` report as text.
pub fn bounds_report(n: usize) -> CliResult<String> {
    if !(3..=24).contains(&n) {
        return Err(CliError::Usage(format!("-n must be in 3..=24, got {n}")));
    }
    let brute = classical_bounds(n)?;
    let closed = classical_bounds_closed_form(n)?;
    let (phi, k_max) = maximize_precession(n)?;
    let mut s = String::new();
    let _ = writeln!(s, "n = {n}");
    let _ = writeln!(
        s,
        "classical min {} max {} (enumeration)",
        num(brute.lower),
        num(brute.upper)
    );
    let agree = brute == closed;
    let _ = writeln!(
        s,
        "closed form min {} max {} ({})",
        num(closed.lower),
        num(closed.upper),
        if agree { "agrees" } else { "DISAGREES" }
    );
    let _ = writeln!(s, "Lüders bound {}", num(luders_bound(n)));
    let _ = writeln!(
        s,
        "max precession K {} at phi = {:.4} deg",
        num(k_max),
        phi.to_degrees()
    );
    Ok(s)
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> CliResult<()> {
    out.write_all(bounds_report(a.n)?.as_bytes())?;
    Ok(())
}

fn load_layout(a: &PipelineArgs, cfg: &BenchConfig) -> CliResult<BenchLayout> {
    match &a.bench {
        None => Ok(build_network(cfg)),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            BenchLayout::parse(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
    }
}

fn records_table(records: &[(String, Vec<DetectorRecord>)]) -> Table {
    let columns = [
        "detector",
        "shot",
        "i_plus",
        "i_minus",
        "i_r",
        "i_l",
        "i_h",
        "i_v",
        "reference",
        "clamped",
    ]
    .map(String::from)
    .to_vec();
    let rows = records
        .iter()
        .enumerate()
        .flat_map(|(d, (_, recs))| {
            recs.iter().enumerate().map(move |(shot, r)| {
                let mut row = vec![d as f64, shot as f64];
                row.extend(r.intensities());
                row.push(r.reference);
                row.push(if r.clamped { 1.0 } else { 0.0 });
                row
            })
        })
        .collect();
    Table { columns, rows }
}

fn cmd_pipeline(a: &PipelineArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = sim_config(&a.sim, a.theta, a.gamma, a.post.into())?;
    if cfg.gamma == 0.0 {
        return Err(CliError::Usage("--gamma must be nonzero".into()));
    }
    let coupling = Coupling::new(cfg.gamma)?;
    let layout = load_layout(a, &cfg)?;
    let records = run_layout(&layout, &cfg)?;
    if records.len() != 2 {
        return Err(CliError::Simulation(format!(
            "the bench needs two post-selection detectors (+m3, −m3), found {}",
            records.len()
        )));
    }

    let mut estimates = Vec::new();
    for (port, (name, recs)) in PostPort::BOTH.into_iter().zip(&records) {
        let mean: [f64; 6] = std::array::from_fn(|k| {
            recs.iter()
                .map(|r| r.intensities()[k] / r.reference)
                .sum::<f64>()
                / recs.len() as f64
        });
        let cells: Vec<String> = mean.iter().map(|&x| num(x)).collect();
        writeln!(
            out,
            "record {name} ({}) mean I+ I- IR IL IH IV: {}",
            port.short_name(),
            cells.join(" ")
        )?;
        estimates.push((port, estimate_port(recs, coupling)?));
    }
    let primary: PostPort = a.post.into();
    estimates.sort_by_key(|(p, _)| *p != primary);
    for (port, e) in &estimates {
        writeln!(
            out,
            "weak value ({}) re {} ± {} im {} ± {}; p {} ± {}; rejected {}",
            port.short_name(),
            num(e.re.value),
            num(e.re.sigma),
            num(e.im.value),
            num(e.im.sigma),
            num(e.p_post.value),
            num(e.p_post.sigma),
            e.rejected
        )?;
    }
    let by_port = |p: PostPort| estimates.iter().find(|(q, _)| *q == p).unwrap().1;
    let k = k_quadruple(&by_port(PostPort::PlusM3), &by_port(PostPort::MinusM3));
    for (name, e) in KQuadruple::NAMES.iter().zip(k) {
        writeln!(out, "{name} {} ± {}", num(e.value), num(e.sigma))?;
    }
    let violated: Vec<&str> = KQuadruple::NAMES
        .iter()
        .zip(k)
        .filter(|(_, e)| e.value + e.sigma.max(1e-10) < 0.0)
        .map(|(n, _)| *n)
        .collect();
    if violated.is_empty() {
        writeln!(out, "LGI_SATISFIED")?;
    }
    for name in violated {
        writeln!(out, "LGI_VIOLATED {name}")?;
    }

    let written = emit(
        &Command::Pipeline(a.clone()),
        &a.sim,
        "pipeline_records",
        &records_table(&records),
    )?;
    for p in written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(())
}

/// Reads a manifest written by an earlier run.
pub fn read_manifest(path: &Path) -> CliResult<RunManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: malformed manifest: {e}", path.display())))
}

fn cmd_rerun(a: &RerunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut cmd = read_manifest(&a.manifest)?.config;
    if let Some(dir) = &a.out {
        match &mut cmd {
            Command::SweepTheta(x) => x.sim.out = dir.clone(),
            Command::SweepGamma(x) => x.sim.out = dir.clone(),
            Command::Pipeline(x) => x.sim.out = dir.clone(),
            Command::Bounds(_) => {}
            Command::Rerun(_) => return Err(CliError::Usage("manifest records a rerun".into())),
        }
    }
    if matches!(cmd, Command::Rerun(_)) {
        return Err(CliError::Usage("manifest records a rerun".into()));
    }
    execute(&cmd, out, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("lgisim").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn degree_grid_counts() {
        assert_eq!(degree_grid(0.0, 90.0, 15.0).unwrap().len(), 7);
        assert_eq!(degree_grid(0.0, 90.0, 5.0).unwrap().len(), 19);
        assert_eq!(degree_grid(0.0, 0.9, 0.1).unwrap().len(), 10);
        assert!(degree_grid(0.0, 90.0, 0.0).is_err());
        assert!(degree_grid(10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn default_gamma_grid_skips_zero() {
        let g = default_gamma_grid();
        assert_eq!(g.len(), 12);
        assert_eq!((g[0], g[11]), (-24.0, 24.0));
        assert!(!g.contains(&0.0));
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "0.5000000000");
        assert_eq!(num(-1e-14), "0.0000000000");
        assert_eq!(num(-0.25), "-0.2500000000");
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn flags_parse_with_defaults() {
        let Command::SweepTheta(a) = parse(&["sweep-theta", "--seed", "7"]) else {
            panic!()
        };
        assert_eq!((a.start, a.end, a.step, a.gamma), (0.0, 90.0, 5.0, 12.0));
        assert_eq!((a.sim.noise, a.sim.shots, a.sim.seed), (0.01, 100, 7));
        let Command::SweepGamma(g) =
            parse(&["sweep-gamma", "--gamma-list", "-8,4", "--post", "minus"])
        else {
            panic!()
        };
        assert_eq!(g.gamma_list, Some(vec![-8.0, 4.0]));
        assert_eq!(g.post, Post::Minus);
        let Command::Bounds(b) = parse(&["bounds", "-n", "5"]) else {
            panic!()
        };
        assert_eq!(b.n, 5);
    }

    #[test]
    fn bounds_report_n3() {
        let r = bounds_report(3).unwrap();
        assert!(r.contains("classical min -3.0000000000 max 1.0000000000"));
        assert!(r.contains("Lüders bound 1.5000000000"));
        assert!(r.contains("at phi = 60.0000"));
        assert!(matches!(bounds_report(2), Err(CliError::Usage(_))));
    }

    #[test]
    fn theta_table_columns() {
        let a = ThetaArgs {
            step: 45.0,
            amplify: Some(4),
            ..match parse(&["sweep-theta", "--noise", "0"]) {
                Command::SweepTheta(a) => a,
                _ => unreachable!(),
            }
        };
        let t = theta_table(&a).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(
            &t.columns[..5],
            [
                "theta_deg",
                "p_plus",
                "p_plus_sigma",
                "p_plus_N2",
                "p_plus_N2_sigma"
            ]
        );
        assert_eq!(t.columns.last().unwrap(), "p_plus_amp_sigma");
        assert!(t.rows.iter().all(|r| r.len() == t.columns.len()));
    }

    #[test]
    fn manifest_round_trips() {
        let cmd = parse(&["sweep-gamma", "--gamma-list", "12", "--seed", "3"]);
        let m = RunManifest {
            command: cmd.name().into(),
            config: cmd.clone(),
            seed: 3,
            version: "x".into(),
            outputs: vec![],
        };
        let back: RunManifest = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn error_exit_codes() {
        let parse_err = Error::Parse {
            line: 3,
            column: 1,
            message: "unknown element `LENS`".into(),
        };
        assert_eq!(CliError::from(parse_err).exit_code(), 4);
        assert_eq!(
            CliError::from(Error::InvalidConfig("x".into())).exit_code(),
            2
        );
        assert_eq!(CliError::from(Error::AllShotsRejected(3)).exit_code(), 3);
    }
}
