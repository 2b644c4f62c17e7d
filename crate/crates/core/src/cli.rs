//! Command-line front end. `run` returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bath::{transform, ChainBath, PartitionStrategy};
use crate::circuit::{self, CircuitDesign, FeasibilityLimits, OscillatorHardware};
use crate::dynamics::{
    absorption_spectrum, propagate_ensemble, sample_occupations, time_grid, Propagator, SpectrumOptions,
};
use crate::error::Error;
use crate::hamiltonian::assemble_hamiltonian;
use crate::model::GeneralizedHolsteinModel;
use crate::operator::{SparseOperator, TruncationSpec, DEFAULT_DIM_CAP, DEFAULT_FOCK_DIM};
use crate::resources::{frontier, write_frontier_csv, FrontierConfig, DEFAULT_DEPTH, DEFAULT_MATSUBARA};
use crate::spectral::{fmt_g12, rescale_factor, to_mode_set, DensityKind, DiscretizationScheme, ModeSet, Rescale, SpectralDensity};

pub const DIM_CAP_ENV: &str = "POLARON_DIM_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "polaron", version, about = "Holstein polaron models, dynamics and analog-simulator compilation")]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate a model or compiled design and write site populations.
    Simulate(SimulateArgs),
    /// Map a model onto circuit parameters.
    Compile(CompileArgs),
    /// Star-to-chain transformation of a discrete or sampled bath.
    Transform(TransformArgs),
    /// Check a design against hardware limits (exit 3 on failure).
    Feasibility(FeasibilityArgs),
    /// Memory frontier of a hierarchical-equations solver.
    Estimate(EstimateArgs),
    /// Linear absorption spectrum of a model.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PropagatorArg {
    Krylov,
    Dense,
}

impl From<PropagatorArg> for Propagator {
    fn from(p: PropagatorArg) -> Self {
        match p {
            PropagatorArg::Krylov => Propagator::Krylov,
            PropagatorArg::Dense => Propagator::Dense,
        }
    }
}

#[derive(Debug, Args)]
pub struct TruncArgs {
    /// Fock cutoff per oscillator.
    #[arg(long = "d", default_value_t = DEFAULT_FOCK_DIM)]
    pub fock: usize,
    #[arg(long, value_enum, default_value = "krylov")]
    pub propagator: PropagatorArg,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, conflicts_with = "design", required_unless_present = "design")]
    pub model: Option<PathBuf>,
    /// Compiled circuit design (output of `compile`).
    #[arg(long)]
    pub design: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// 1-based site holding the initial excitation.
    #[arg(long, default_value_t = 1)]
    pub initial_site: usize,
    /// Bath temperature in K; 0 starts from the vacuum.
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    RoundRobin,
    Contiguous,
}

impl From<StrategyArg> for PartitionStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::RoundRobin => PartitionStrategy::RoundRobin,
            StrategyArg::Contiguous => PartitionStrategy::Contiguous,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Replace each site's modes by this many chains.
    #[arg(long, conflicts_with = "bath")]
    pub chains: Option<usize>,
    /// Chain bath JSON, one per site in site order.
    #[arg(long)]
    pub bath: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub strategy: StrategyArg,
    #[arg(long, default_value = "design.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Discrete,
    Sampled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    EqualWeight,
    LinearGrid,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Two-column CSV (`wavenumber_cm1,value_cm1` or `omega_ghz,value_ghz`).
    #[arg(long)]
    pub modes: PathBuf,
    #[arg(long, value_enum, default_value = "discrete")]
    pub kind: KindArg,
    /// Mode count for a sampled density.
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long, value_enum, default_value = "equal-weight")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub strategy: StrategyArg,
    /// Physical temperature of the source system in K.
    #[arg(long, requires = "target_temperature")]
    pub source_temperature: Option<f64>,
    /// Operating temperature of the simulator in K.
    #[arg(long, requires = "source_temperature")]
    pub target_temperature: Option<f64>,
    /// Also write the thermal spectral density at this temperature (K).
    #[arg(long)]
    pub thermal: Option<f64>,
    #[arg(long, default_value = "thermal.csv")]
    pub thermal_out: PathBuf,
    #[arg(long, default_value = "chains.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// JSON array of per-oscillator hardware; by default each oscillator gets
    /// the β that realizes its coupling.
    #[arg(long)]
    pub hardware: Option<PathBuf>,
    #[arg(long, default_value_t = 50.0)]
    pub current_na: f64,
    #[arg(long, default_value_t = 100.0)]
    pub impedance_ohm: f64,
    #[arg(long)]
    pub g_max: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub z_max: Option<f64>,
    #[arg(long, default_value = "feasibility.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Memory budget in GB (10⁹ bytes).
    #[arg(long, default_value_t = 250.0)]
    pub budget_gb: f64,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    #[arg(long, default_value_t = DEFAULT_MATSUBARA)]
    pub matsubara: usize,
    #[arg(long, default_value_t = 1)]
    pub min_sites: usize,
    #[arg(long, default_value_t = 64)]
    pub max_sites: usize,
    #[arg(long, default_value = "frontier.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated transition dipoles, one per site (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub dipoles: Option<Vec<f64>>,
    #[arg(long, default_value_t = 40.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub n_freq: usize,
    #[command(flatten)]
    pub trunc: TruncArgs,
    #[arg(long, default_value = "spectrum.csv")]
    pub out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Parse `args` (including the program name), execute and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((summary, code)) => {
            println!("{}", serde_json::to_string(&round_json(summary)).unwrap_or_default());
            code
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            EXIT_VALIDATION
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            EXIT_IO
        }
    }
}

fn execute(cli: &Cli) -> CliResult<(Value, i32)> {
    let cap = dim_cap()?;
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a, cap).map(|v| (v, EXIT_OK)),
        Command::Compile(a) => compile(cli, a).map(|v| (v, EXIT_OK)),
        Command::Transform(a) => transform_cmd(cli, a).map(|v| (v, EXIT_OK)),
        Command::Feasibility(a) => feasibility(cli, a),
        Command::Estimate(a) => estimate(cli, a).map(|v| (v, EXIT_OK)),
        Command::Spectrum(a) => spectrum(cli, a, cap).map(|v| (v, EXIT_OK)),
    }
}

fn dim_cap() -> CliResult<usize> {
    match std::env::var(DIM_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| invalid(format!("{DIM_CAP_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_DIM_CAP),
    }
}

fn truncation(fock: usize, cap: usize) -> CliResult<TruncationSpec> {
    if fock == 0 {
        return Err(invalid("--d must be >= 1"));
    }
    Ok(TruncationSpec::uniform(fock).with_cap(cap))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn resolve(cli: &Cli, out: &Path) -> PathBuf {
    cli.out_dir.join(out)
}

/// Write through a temporary file in the destination directory, then rename.
fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Failure::Io(e.to_string()))?;
    f(tmp.as_file_mut())?;
    tmp.as_file_mut().flush().map_err(|e| Failure::Io(e.to_string()))?;
    tmp.persist(path).map_err(|e| Failure::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn write_json(path: &Path, value: Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&round_json(value)).map_err(|e| invalid(e.to_string()))?;
    write_atomic(path, |w| {
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| invalid(e.to_string()))
}

/// Round every floating-point number to 12 significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(0.0);
            fmt_g12(x).parse::<f64>().ok().and_then(|r| serde_json::Number::from_f64(r)).map_or(Value::Number(n), Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs, cap: usize) -> CliResult<Value> {
    let trunc = truncation(a.trunc.fock, cap)?;
    let (h, omegas): (SparseOperator, Vec<f64>) = match (&a.model, &a.design) {
        (Some(p), None) => {
            let model = GeneralizedHolsteinModel::from_json_str(&read_text(p)?)?;
            let omegas = model.modes().iter().flatten().map(|m| m.omega).collect();
            (assemble_hamiltonian(&model, &trunc)?, omegas)
        }
        (None, Some(p)) => {
            let design = CircuitDesign::from_json_str(&read_text(p)?)?;
            let omegas = design.oscillators.iter().map(|o| o.omega_prime_ghz).collect();
            (circuit::circuit_hamiltonian(&design, &trunc, false)?, omegas)
        }
        _ => return Err(invalid("exactly one of --model or --design is required")),
    };
    let n_sites = h.basis().n_sites();
    if a.initial_site == 0 || a.initial_site > n_sites {
        return Err(invalid(format!("--initial-site must be in 1..={n_sites}")));
    }
    let times = time_grid(a.t_max, a.dt)?;
    let ensemble = sample_occupations(&omegas, &trunc, a.temperature, a.samples, a.seed)?;
    let traj = propagate_ensemble(&h, &ensemble, a.initial_site - 1, &times, a.trunc.propagator.into())?;
    let norm_err = traj
        .populations
        .iter()
        .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let out = resolve(cli, &a.out);
    write_atomic(&out, |w| traj.write_csv(w))?;
    Ok(json!({
        "command": "simulate",
        "output": out,
        "dim": h.dim(),
        "n_sites": n_sites,
        "n_times": times.len(),
        "n_samples": ensemble.members.len(),
        "max_norm_error": norm_err,
        "final_populations": traj.populations.last(),
    }))
}

fn compile(cli: &Cli, a: &CompileArgs) -> CliResult<Value> {
    let model = GeneralizedHolsteinModel::from_json_str(&read_text(&a.model)?)?;
    let baths: Option<Vec<ChainBath>> = if let Some(k) = a.chains {
        Some(
            (0..model.n_sites())
                .map(|s| {
                    let modes = ModeSet::from_model_site(&model, s);
                    if modes.is_empty() {
                        Ok(ChainBath { chains: vec![] })
                    } else {
                        transform(&modes, k, a.strategy.into())
                    }
                })
                .collect::<crate::Result<_>>()?,
        )
    } else if !a.bath.is_empty() {
        Some(
            a.bath
                .iter()
                .map(|p| Ok(ChainBath::from_json_str(&read_text(p)?)?))
                .collect::<CliResult<_>>()?,
        )
    } else {
        None
    };
    let design = circuit::compile(&model, baths.as_deref())?;
    let out = resolve(cli, &a.out);
    write_json(&out, to_value(&design)?)?;
    Ok(json!({
        "command": "compile",
        "output": out,
        "qubits": design.qubits.len(),
        "couplers": design.couplers.len(),
        "oscillators": design.oscillators.len(),
        "links": design.links.len(),
    }))
}

fn transform_cmd(cli: &Cli, a: &TransformArgs) -> CliResult<Value> {
    let kind = match a.kind {
        KindArg::Discrete => DensityKind::DiscreteModes,
        KindArg::Sampled => DensityKind::SampledContinuous,
    };
    let file = std::fs::File::open(&a.modes).map_err(|e| Failure::Io(format!("{}: {e}", a.modes.display())))?;
    let j = SpectralDensity::read_csv(file, kind)?;
    let modes = match kind {
        DensityKind::DiscreteModes => to_mode_set(&j, j.samples().len(), DiscretizationScheme::Direct)?,
        DensityKind::SampledContinuous => {
            let n = a.n_modes.ok_or_else(|| invalid("--n-modes is required for a sampled density"))?;
            let scheme = match a.scheme {
                SchemeArg::EqualWeight => DiscretizationScheme::EqualWeight,
                SchemeArg::LinearGrid => DiscretizationScheme::LinearGrid,
            };
            to_mode_set(&j, n, scheme)?
        }
    };
    let factor = match (a.source_temperature, a.target_temperature) {
        (Some(s), Some(t)) => Some(rescale_factor(s, t)?),
        _ => None,
    };
    let modes = match factor {
        Some(f) => modes.scaled_by(f),
        None => modes,
    };
    let bath = transform(&modes, a.chains, a.strategy.into())?;
    let out = resolve(cli, &a.out);
    write_json(&out, to_value(&bath)?)?;
    let mut summary = json!({
        "command": "transform",
        "output": out,
        "n_modes": modes.len(),
        "n_chains": bath.chains.len(),
        "max_chain_length": bath.max_chain_len(),
        "chain_lengths": bath.chains.iter().map(|c| c.len()).collect::<Vec<_>>(),
        "truncated_chains": bath.chains.iter().filter(|c| c.truncated).count(),
        "rescale_factor": factor,
        "reorganization_energy_ghz": modes.reorganization_energy(),
    });
    if let Some(kelvin) = a.thermal {
        let scaled = match factor {
            Some(f) => SpectralDensity::new(kind, j.samples().iter().map(|&(w, v)| (w * f, v * f * f)).collect())?,
            None => j,
        };
        let thermal = scaled.thermal_transform(kelvin)?;
        let path = resolve(cli, &a.thermal_out);
        write_atomic(&path, |w| thermal.write_csv(w))?;
        summary["thermal_output"] = to_value(&path)?;
        summary["detailed_balance_error"] = json!(thermal.detailed_balance_error());
    }
    Ok(summary)
}

fn feasibility(cli: &Cli, a: &FeasibilityArgs) -> CliResult<(Value, i32)> {
    let design = CircuitDesign::from_json_str(&read_text(&a.design)?)?;
    let hardware: Vec<OscillatorHardware> = match &a.hardware {
        Some(p) => serde_json::from_str(&read_text(p)?).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        None => circuit::matched_hardware(&design, a.current_na, a.impedance_ohm)?,
    };
    let d = FeasibilityLimits::default();
    let limits = FeasibilityLimits {
        g_max_ghz: a.g_max.unwrap_or(d.g_max_ghz),
        eta_max_ghz: a.eta_max.unwrap_or(d.eta_max_ghz),
        beta_max: a.beta_max.unwrap_or(d.beta_max),
        z_max_ohm: a.z_max.unwrap_or(d.z_max_ohm),
    };
    let report = circuit::check_feasibility(&design, &hardware, &limits)?;
    let out = resolve(cli, &a.out);
    write_json(&out, to_value(&report)?)?;
    let failed: Vec<Value> = report
        .failures()
        .map(|c| json!({"check": c.name, "subject": c.subject, "value": c.value, "margin": c.margin}))
        .collect();
    let code = if report.pass { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok((
        json!({
            "command": "feasibility",
            "output": out,
            "pass": report.pass,
            "n_checks": report.checks.len(),
            "failed": failed,
        }),
        code,
    ))
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> CliResult<Value> {
    if !(a.budget_gb > 0.0) || !a.budget_gb.is_finite() {
        return Err(invalid("--budget-gb must be > 0"));
    }
    let budget = (a.budget_gb * 1e9).round() as u128;
    let cfg = FrontierConfig {
        depth: a.depth,
        matsubara: a.matsubara,
        min_sites: a.min_sites,
        max_sites: a.max_sites,
        ..Default::default()
    };
    let pts = frontier(budget, &cfg)?;
    let out = resolve(cli, &a.out);
    write_atomic(&out, |w| write_frontier_csv(&pts, w))?;
    let largest = pts.iter().filter(|p| p.feasible && p.n_peaks > 0).map(|p| p.n_sites).max();
    Ok(json!({
        "command": "estimate",
        "output": out,
        "budget_bytes": budget.to_string(),
        "depth": a.depth,
        "matsubara": a.matsubara,
        "points": pts.len(),
        "largest_single_peak_sites": largest,
    }))
}

fn spectrum(cli: &Cli, a: &SpectrumArgs, cap: usize) -> CliResult<Value> {
    let model = GeneralizedHolsteinModel::from_json_str(&read_text(&a.model)?)?;
    let dipoles = a.dipoles.clone().unwrap_or_else(|| vec![1.0; model.n_sites()]);
    let opts = SpectrumOptions {
        t_max: a.t_max,
        dt: a.dt,
        f_min: a.f_min,
        f_max: a.f_max,
        n_freq: a.n_freq,
        propagator: a.trunc.propagator.into(),
    };
    let s = absorption_spectrum(&model, &truncation(a.trunc.fock, cap)?, &dipoles, &opts)?;
    let out = resolve(cli, &a.out);
    write_atomic(&out, |w| s.write_csv(w))?;
    let lo = s.frequency[0];
    let hi = s.frequency[s.frequency.len() - 1];
    Ok(json!({
        "command": "spectrum",
        "output": out,
        "n_points": s.frequency.len(),
        "linewidth_ghz": opts.linewidth(),
        "peak_ghz": s.peak_in(lo, hi),
        "area": s.integrate(lo, hi),
    }))
}
