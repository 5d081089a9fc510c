//! `rydeit` command-line front end.
//!
//! Inputs and outputs are plain MHz, fields in mV/cm, lengths in m and
//! temperatures in K. Exit status: 0 on success, 1 when the physics input is
//! rejected, 2 for I/O, parse and usage errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rydeit_core::fitting::{FitParameter, ParameterSpec, SplittingPoint};
use rydeit_core::io::{format_spectrum_csv, write_atomic};
use rydeit_core::{
    delta_t_spectrum, fit_power_law, fit_spectrum, linspace, load_spectrum_csv, mhz, rf_averaged_spectrum,
    stark, to_mhz, Config, Error, EitModel, Evaluator, FitProblem, PolarizabilitySet, RfField, ScanAxis, Spectrum,
    SpectrumMode,
};

pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Seed used for synthetic noise unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Parser)]
#[command(name = "rydeit", version, about = "Rydberg ladder-EIT spectra: simulate, compare and fit")]
struct Cli {
    /// TOML configuration (levels, cell, Rydberg series, velocity grid, polarizabilities)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise a spectrum and write it as CSV
    Simulate(SimulateArgs),
    /// Maximum absolute difference between two spectra on the same axis
    Diff(DiffArgs),
    /// Fit the model to a measured spectrum
    Fit(FitArgs),
    /// Fit A/(n - delta)^3 to fine-structure intervals
    Fsfit(FsfitArgs),
    /// Coupling scan in a dc or rf electric field
    Stark(StarkArgs),
    /// Print fine-structure interval, coupling wavelength and Rabi scale per n
    Rydberg(RydbergArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Principal quantum number of the Rydberg D state
    #[arg(long, default_value_t = 45)]
    n: u32,
    /// Coupling Rabi frequency Omega_c, MHz
    #[arg(long, default_value_t = 3.5, allow_hyphen_values = true)]
    omega_c: f64,
    /// Override the fine-structure interval, MHz
    #[arg(long, allow_hyphen_values = true)]
    fs: Option<f64>,
    /// Probe detuning, MHz (held fixed in a coupling scan)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_p: f64,
    /// Coupling detuning, MHz (held fixed in a probe scan)
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_c: f64,
}

#[derive(Debug, Args)]
struct AxisArgs {
    /// First axis point, MHz
    #[arg(long, default_value_t = -150.0, allow_hyphen_values = true)]
    start: f64,
    /// Last axis point, MHz
    #[arg(long, default_value_t = 150.0, allow_hyphen_values = true)]
    stop: f64,
    /// Number of axis points
    #[arg(long, default_value_t = 2000)]
    points: usize,
}

impl AxisArgs {
    fn axis(&self) -> Result<Vec<f64>, Error> {
        if self.points < 2 || !(self.stop > self.start) {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "need --points >= 2 and --stop > --start".to_owned(),
            });
        }
        Ok(linspace(self.start, self.stop, self.points).into_iter().map(mhz).collect())
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    axis: AxisArgs,
    /// probe | coupling
    #[arg(long, default_value = "probe")]
    scan: ScanAxis,
    /// delta-t | transmission
    #[arg(long, default_value = "delta-t")]
    mode: SpectrumMode,
    /// Gaussian noise, as a fraction of the largest |value|
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output CSV; stdout when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
    /// Exit with status 1 when the difference exceeds this value
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Measured spectrum (CSV, axis in MHz)
    data: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Free parameter as name=initial:lower:upper, frequencies in MHz.
    /// Names: omega_c, delta_c, gamma3, fs_splitting, amplitude_scale, baseline.
    /// Default: omega_c=3:0.1:20 and gamma3=0.5:0.02:5
    #[arg(long = "free", value_name = "SPEC")]
    free: Vec<String>,
    /// Report file; stdout when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FsfitArgs {
    /// CSV rows of n,splitting_MHz[,sigma_MHz]
    points: PathBuf,
    /// Hold the quantum defect at this value
    #[arg(long)]
    fix_delta: Option<f64>,
    /// Report file; stdout when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StarkArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// First axis point, MHz
    #[arg(long, default_value_t = -60.0, allow_hyphen_values = true)]
    start: f64,
    /// Last axis point, MHz
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    stop: f64,
    #[arg(long, default_value_t = 1601)]
    points: usize,
    /// Field amplitude E0, mV/cm
    #[arg(long, allow_hyphen_values = true)]
    e0: f64,
    /// rf frequency, MHz; a dc field when omitted
    #[arg(long)]
    rf: Option<f64>,
    /// Phase samples per rf cycle
    #[arg(long, default_value_t = RfField::DEFAULT_PHASE_SAMPLES)]
    phase_samples: usize,
    /// Treat the field as screened by the cell walls
    #[arg(long)]
    screened: bool,
    /// Output CSV; stdout when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RydbergArgs {
    #[arg(long, default_value_t = 26)]
    n_min: u32,
    #[arg(long, default_value_t = 96)]
    n_max: u32,
    /// Reference level for the Rabi scale column
    #[arg(long, default_value_t = 45)]
    n_ref: u32,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
    /// A check requested on the command line did not hold.
    Check(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_domain() => EXIT_DOMAIN,
            CliError::Check(_) => EXIT_DOMAIN,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) | CliError::Check(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parse `argv` (including the program name), run, and return the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("EIT_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("EIT_THREADS must be a positive integer, got '{raw}'")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Simulate(a) => simulate(&config, a),
        Command::Diff(a) => diff(a),
        Command::Fit(a) => fit(&config, a),
        Command::Fsfit(a) => fsfit(a),
        Command::Stark(a) => stark_scan(&config, a),
        Command::Rydberg(a) => rydberg(&config, a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_model(config: &Config, m: &ModelArgs) -> CliResult<EitModel> {
    let mut model = config.model(m.n, m.omega_c, m.fs)?;
    model.fields.delta_p = mhz(m.delta_p);
    model.fields.delta_c = mhz(m.delta_c);
    Ok(model)
}

fn simulate(config: &Config, a: SimulateArgs) -> CliResult<()> {
    let model = build_model(config, &a.model)?;
    let axis = a.axis.axis()?;
    let clean = match a.mode {
        SpectrumMode::DeltaT => delta_t_spectrum(&model, a.scan, &axis)?,
        SpectrumMode::Transmission => Evaluator::new(&model)?.scan(a.scan, &axis, false)?,
    };
    let spectrum = if a.noise > 0.0 {
        let sd = a.noise * clean.max_abs_value();
        let normal = Normal::new(0.0, sd).map_err(|e| {
            CliError::Core(Error::InvalidParameter {
                name: "noise",
                reason: e.to_string(),
            })
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let values = clean.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
        let fp = clean.fingerprint().map(|f| format!("{f}-seed{}", a.seed));
        let s = Spectrum::new(clean.axis().to_vec(), values, clean.scan(), clean.mode())?;
        match fp {
            Some(f) => s.with_fingerprint(f),
            None => s,
        }
    } else if a.noise < 0.0 || !a.noise.is_finite() {
        return Err(Error::InvalidParameter {
            name: "noise",
            reason: "must be finite and >= 0".to_owned(),
        }
        .into());
    } else {
        clean
    };
    emit(a.out.as_deref(), &format_spectrum_csv(&spectrum))
}

fn diff(a: DiffArgs) -> CliResult<()> {
    let x = load_spectrum_csv(&a.a)?;
    let y = load_spectrum_csv(&a.b)?;
    let d = x.max_abs_difference(&y)?;
    println!("max_abs_difference,{d}");
    match a.tolerance {
        Some(t) if d > t => Err(CliError::Check(format!("difference {d} exceeds tolerance {t}"))),
        _ => Ok(()),
    }
}

fn parse_free(spec: &str) -> CliResult<ParameterSpec> {
    let bad = || CliError::Usage(format!("--free expects name=initial:lower:upper, got '{spec}'"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parameter: FitParameter = name.trim().parse()?;
    let nums: Vec<f64> = range
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [initial, lower, upper] = nums[..] else { return Err(bad()) };
    let scale = |v: f64| if parameter.is_frequency() { mhz(v) } else { v };
    Ok(ParameterSpec::new(parameter, scale(initial), scale(lower), scale(upper)))
}

fn fit(config: &Config, a: FitArgs) -> CliResult<()> {
    let data = load_spectrum_csv(&a.data)?;
    let model = build_model(config, &a.model)?;
    let free = if a.free.is_empty() {
        vec![
            ParameterSpec::new(FitParameter::OmegaC, mhz(3.0), mhz(0.1), mhz(20.0)),
            ParameterSpec::new(FitParameter::Gamma3, mhz(0.5), mhz(0.02), mhz(5.0)),
        ]
    } else {
        a.free.iter().map(|s| parse_free(s)).collect::<CliResult<_>>()?
    };
    let res = fit_spectrum(&FitProblem::new(data, model, free))?;
    let mut report = String::from("parameter,value,uncertainty,unit\n");
    for p in &res.parameters {
        let (v, u, unit) = if p.parameter.is_frequency() {
            (to_mhz(p.value), to_mhz(p.uncertainty), "MHz")
        } else {
            (p.value, p.uncertainty, "1")
        };
        let _ = writeln!(report, "{},{v},{u},{unit}", p.parameter);
    }
    let _ = writeln!(report, "# rss={} iterations={} converged={}", res.residual_sum_of_squares, res.iterations, res.converged);
    emit(a.out.as_deref(), &report)
}

fn load_points(path: &Path) -> CliResult<Vec<SplittingPoint>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('n') {
            continue;
        }
        let err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(err(format!("expected n,splitting[,sigma], found {} columns", fields.len())).into());
        }
        let n: u32 = fields[0].parse().map_err(|_| err(format!("n '{}' is not an integer", fields[0])))?;
        let num = |f: &str| f.parse::<f64>().map_err(|_| err(format!("'{f}' is not a number")));
        let splitting = num(fields[1])?;
        let sigma = fields.get(2).map(|f| num(f)).transpose()?;
        points.push(SplittingPoint { n, splitting, sigma });
    }
    Ok(points)
}

fn fsfit(a: FsfitArgs) -> CliResult<()> {
    let points = load_points(&a.points)?;
    let fit = fit_power_law(&points, a.fix_delta)?;
    let mut report = String::new();
    let _ = writeln!(report, "a_ghz,{},{}", fit.a_ghz, fit.a_uncertainty);
    let _ = writeln!(report, "delta,{},{}", fit.delta, fit.delta_uncertainty);
    let _ = writeln!(report, "# delta_fixed={} chi_squared={} outlier_n={}", fit.delta_fixed, fit.chi_squared, points[fit.outlier].n);
    let _ = writeln!(report, "n,splitting_mhz,model_mhz,residual_mhz");
    for (p, r) in points.iter().zip(&fit.residuals) {
        let _ = writeln!(report, "{},{},{},{}", p.n, p.splitting, fit.splitting(p.n as f64), r);
    }
    emit(a.out.as_deref(), &report)
}

fn stark_scan(config: &Config, a: StarkArgs) -> CliResult<()> {
    let model = build_model(config, &a.model)?;
    let axis = AxisArgs {
        start: a.start,
        stop: a.stop,
        points: a.points,
    }
    .axis()?;
    let pols = config.polarizabilities.clone().unwrap_or_else(PolarizabilitySet::illustrative);
    let e0 = a.e0 / 1000.0;
    let spectrum = match a.rf {
        Some(freq) => {
            let rf = RfField {
                e0: if a.screened { 0.0 } else { e0 },
                frequency: freq,
                phase_samples: a.phase_samples,
            };
            rf_averaged_spectrum(&model, &pols, &rf, &axis)?
        }
        None => stark::dc_stark_spectrum(&model, &pols, e0, a.screened, &axis)?,
    };
    emit(a.out.as_deref(), &format_spectrum_csv(&spectrum))
}

fn rydberg(config: &Config, a: RydbergArgs) -> CliResult<()> {
    if a.n_min > a.n_max {
        return Err(CliError::Usage("--n-min must not exceed --n-max".to_owned()));
    }
    let r = &config.rydberg;
    let mut out = String::from("n,fs_mhz,lambda_nm,omega_scale\n");
    for n in a.n_min..=a.n_max {
        let fs = to_mhz(r.fs_splitting(n)?);
        let lambda = r.coupling_wavelength(n)? * 1e9;
        let scale = r.rabi_scale(1.0, a.n_ref, n)?;
        let _ = writeln!(out, "{n},{fs},{lambda},{scale}");
    }
    emit(None, &out)
}
