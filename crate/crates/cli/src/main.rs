mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dynmap_core::superop::reshuffle;
use dynmap_core::tomography::{default_probes, invertibility_verdict, reconstruct_process, simulate_outputs};
use dynmap_core::witness::{blp_scan, cp_divisibility_scan, invertibility_scan, rate_scan, smoothness_probe, Evidence};
use dynmap_core::{classify, DensityMatrix, MatrixJson, Region, Verdict};
use serde::Serialize;

use config::{ConfigEcho, PartialConfig, PartialGrid, PartialModel, Resolved, TimeUse};

#[derive(Parser)]
#[command(name = "dynmap", version, about = "Classify time-parametrized quantum dynamical maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place the family in one of the four regions; JSON report.
    Classify(Common),
    /// Run a single witness over the grid; CSV report.
    Scan {
        #[arg(value_enum)]
        which: ScanKind,
        #[command(flatten)]
        common: Common,
    },
    /// Simulated process tomography at one time; JSON report.
    Tomo {
        #[command(flatten)]
        common: Common,
        /// Evaluation time.
        #[arg(long)]
        t: Option<f64>,
        /// Gaussian noise on the Bloch components of each output.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Process and dynamical matrices on the grid, or at --t.
    ExportModel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanKind {
    Invertibility,
    Cpdiv,
    Blp,
    Smoothness,
    Rates,
}

impl ScanKind {
    fn label(self) -> &'static str {
        match self {
            ScanKind::Invertibility => "invertibility",
            ScanKind::Cpdiv => "cpdiv",
            ScanKind::Blp => "blp",
            ScanKind::Smoothness => "smoothness",
            ScanKind::Rates => "rates",
        }
    }
}

#[derive(Args)]
struct Common {
    /// identity, amplitude-damping, mixed-pauli, dephasing, decay-g or semigroup.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    tstar: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// dephasing: invertible | singular-crossing; decay-g: exponential | linear-cutoff.
    #[arg(long)]
    preset: Option<String>,
    /// Hilbert dimension of the identity model.
    #[arg(long)]
    dim: Option<usize>,
    /// Generator file for the semigroup model (JSON matrix format).
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid steps; the grid has steps + 1 points.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Report path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn partial(&self, t: Option<f64>, noise: Option<f64>) -> Result<PartialConfig, Failure> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_file(path).map_err(Failure::Config)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            model: PartialModel {
                name: self.model.clone(),
                gamma: self.gamma,
                a: self.a,
                r: self.r,
                tstar: self.tstar,
                lambda: self.lambda,
                preset: self.preset.clone(),
                dim: self.dim,
                generator: self.generator.clone(),
            },
            grid: PartialGrid {
                t_min: self.t_min,
                t_max: self.t_max,
                steps: self.steps,
            },
            tolerances: None,
            seed: self.seed,
            threads: self.threads,
            t,
            noise,
            out: self.out.clone(),
        };
        Ok(base.merge(flags))
    }
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        match self {
            Failure::Config(msg) => {
                eprintln!("dynmap: config error: {msg}");
                ExitCode::from(2)
            }
            Failure::Numerical(msg) => {
                eprintln!("dynmap: numerical error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

impl From<dynmap_core::Error> for Failure {
    fn from(e: dynmap_core::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    region: Region,
    evidence: &'a [Evidence],
    config: &'a ConfigEcho,
}

#[derive(Serialize)]
struct TomoReport<'a> {
    t: f64,
    #[serde(rename = "A_rec")]
    a_rec: MatrixJson,
    min_sv: f64,
    verdict: Verdict,
    tau_low: f64,
    tau_high: f64,
    config: &'a ConfigEcho,
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    process: MatrixJson,
    dynamical: MatrixJson,
}

#[derive(Serialize)]
struct ExportReport<'a> {
    samples: Vec<Sample>,
    config: &'a ConfigEcho,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Failure::Numerical(e.to_string()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

fn run_classify(r: &Resolved) -> Result<(), Failure> {
    let cls = classify(&r.family, &r.grid, &r.tol)?;
    let report = ClassifyReport {
        region: cls.region,
        evidence: &cls.evidence,
        config: &r.echo,
    };
    emit(r.out.as_deref(), &to_json(&report)?)
}

/// CSV keeps the column contract, so the config echo goes to a
/// `<out>.config.json` sidecar, or to stderr when writing to stdout.
fn run_scan(r: &Resolved, which: ScanKind) -> Result<(), Failure> {
    let report = match which {
        ScanKind::Invertibility => invertibility_scan(&r.family, &r.grid, &r.tol)?,
        ScanKind::Cpdiv => cp_divisibility_scan(&r.family, &r.grid, &r.tol)?,
        ScanKind::Blp => {
            let d = r.family.dim();
            let pair = (DensityMatrix::basis(d, 0), DensityMatrix::basis(d, 1));
            blp_scan(&r.family, &r.grid, (&pair.0, &pair.1), &r.tol)?
        }
        ScanKind::Smoothness => smoothness_probe(&r.family, &r.grid, &r.tol)?,
        ScanKind::Rates => rate_scan(&r.family, &r.grid, &r.tol)?,
    };
    let csv = report.to_csv_string()?;
    let echo = to_json(&r.echo)?;
    match r.out.as_deref() {
        Some(path) => {
            emit(Some(path), &csv)?;
            emit(Some(&sidecar(path)), &echo)
        }
        None => {
            eprint!("{echo}");
            emit(None, &csv)
        }
    }
}

fn run_tomo(r: &Resolved) -> Result<(), Failure> {
    let t = r.echo.t.expect("resolved with a required time");
    let noise = r.echo.noise.unwrap_or(0.0);
    let probes = default_probes(r.family.dim()).map_err(|e| Failure::Config(e.to_string()))?;
    let run = simulate_outputs(&r.family, t, &probes, noise, r.echo.seed)?;
    let a_rec = reconstruct_process(&run)?;
    let v = invertibility_verdict(&a_rec, noise, r.tol.sv_threshold);
    let report = TomoReport {
        t,
        a_rec: MatrixJson::from_process(&a_rec),
        min_sv: v.min_sv,
        verdict: v.verdict,
        tau_low: v.tau_low,
        tau_high: v.tau_high,
        config: &r.echo,
    };
    emit(r.out.as_deref(), &to_json(&report)?)
}

fn run_export(r: &Resolved) -> Result<(), Failure> {
    let times = match r.echo.t {
        Some(t) => vec![t],
        None => r.grid.points(),
    };
    let d = r.family.dim();
    let mut samples = Vec::with_capacity(times.len());
    for t in times {
        let a = r.family.eval(t)?;
        samples.push(Sample {
            t,
            process: MatrixJson::from_process(&a),
            dynamical: MatrixJson::new(d, reshuffle(&a).mat()),
        });
    }
    let report = ExportReport {
        samples,
        config: &r.echo,
    };
    emit(r.out.as_deref(), &to_json(&report)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (partial, name, time_use) = match &cli.command {
        Command::Classify(c) => (c.partial(None, None)?, "classify", TimeUse::Ignored),
        Command::Scan { common, .. } => (common.partial(None, None)?, "scan", TimeUse::Ignored),
        Command::Tomo { common, t, noise } => (common.partial(*t, *noise)?, "tomo", TimeUse::Required),
        Command::ExportModel { common, t } => (common.partial(*t, None)?, "export-model", TimeUse::Optional),
    };
    let mut resolved = partial.resolve(name, time_use).map_err(Failure::Config)?;
    if let Command::Scan { which, .. } = &cli.command {
        resolved.echo.command = format!("scan {}", which.label());
    }

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = resolved.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Failure::Config(format!("cannot start thread pool: {e}")))?
    };
    pool.install(|| match &cli.command {
        Command::Classify(_) => run_classify(&resolved),
        Command::Scan { which, .. } => run_scan(&resolved, *which),
        Command::Tomo { .. } => run_tomo(&resolved),
        Command::ExportModel { .. } => run_export(&resolved),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
