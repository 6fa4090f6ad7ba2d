//! fsht: plan building, coefficient conversion, and a round-trip benchmark
//! harness emitting CSV.
//!
//! Exit codes: 0 success, 2 invalid flags, 3 rotation exactness overflow,
//! 4 coefficient kind or bandlimit mismatch, 1 anything else.

use clap::{Parser, Subcommand, ValueEnum};
use harmonium::coeffs::{CoeffKind, CoeffMatrix, ColumnOrder};
use harmonium::transform::{PlanMode, SphPlan};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fsht", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Dense,
    Thin,
}

impl ModeArg {
    fn to_plan_mode(self, stride: usize) -> PlanMode {
        match self {
            ModeArg::Dense => PlanMode::DenseGivens,
            ModeArg::Thin => PlanMode::ThinButterfly { stride },
        }
    }

    fn label(self) -> &'static str {
        match self {
            ModeArg::Dense => "dense",
            ModeArg::Thin => "thin",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Sph2fourier,
    Fourier2sph,
}

#[derive(Subcommand)]
enum Command {
    /// Build a transform plan and serialize it.
    Plan {
        /// Bandlimit (maximum degree).
        #[arg(long)]
        n: usize,
        /// Target precision for the compressed factorizations.
        #[arg(long, default_value_t = f64::EPSILON)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Dense)]
        mode: ModeArg,
        /// Butterfly thinning stride (thin mode).
        #[arg(long, default_value_t = 64)]
        stride: usize,
        /// Worker threads (falls back to FSHT_THREADS, then all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stream a coefficient file through a serialized plan.
    Convert {
        #[arg(long)]
        plan: PathBuf,
        /// Input coefficients (.fshc binary, or .csv).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Round-trip benchmark over a list of bandlimits; CSV on stdout.
    Bench {
        /// Comma-separated bandlimits, e.g. 63,255,1023.
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Dense)]
        mode: ModeArg,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = f64::EPSILON)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        stride: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("fsht: {err}");
            exit_code(&err)
        }
    };
    std::process::exit(code);
}

#[derive(Debug)]
enum CliError {
    Core(harmonium::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<harmonium::Error> for CliError {
    fn from(e: harmonium::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(harmonium::Error::Io(e))
    }
}

fn exit_code(err: &CliError) -> i32 {
    match err {
        CliError::Usage(_) => 2,
        CliError::Core(harmonium::Error::ExactnessOverflow { .. }) => 3,
        CliError::Core(harmonium::Error::KindMismatch { .. })
        | CliError::Core(harmonium::Error::BandlimitMismatch { .. }) => 4,
        CliError::Core(_) => 1,
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let from_env = std::env::var("FSHT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    if let Some(t) = flag.or(from_env) {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan {
            n,
            tol,
            mode,
            stride,
            threads,
            out,
        } => {
            validate_tol(tol)?;
            validate_stride(mode, stride)?;
            init_threads(threads)?;
            let t0 = Instant::now();
            let plan = SphPlan::new(n, tol, mode.to_plan_mode(stride))?;
            let build_s = t0.elapsed().as_secs_f64();
            let bytes = plan.to_bytes();
            File::create(&out)?.write_all(&bytes)?;
            println!(
                "plan n={n} mode={} built in {build_s:.3}s, {} bytes -> {}",
                mode.label(),
                bytes.len(),
                out.display()
            );
            Ok(())
        }
        Command::Convert {
            plan,
            input,
            direction,
            out,
            threads,
        } => {
            init_threads(threads)?;
            let plan = load_plan(&plan)?;
            let in_kind = match direction {
                DirectionArg::Sph2fourier => CoeffKind::SphericalHarmonic,
                DirectionArg::Fourier2sph => CoeffKind::Fourier,
            };
            let coeffs = read_coeffs(&input, in_kind)?;
            let converted = match direction {
                DirectionArg::Sph2fourier => plan.sph2fourier(&coeffs)?,
                DirectionArg::Fourier2sph => plan.fourier2sph(&coeffs)?,
            };
            write_coeffs(&out, &converted)?;
            Ok(())
        }
        Command::Bench {
            n_list,
            mode,
            trials,
            seed,
            tol,
            stride,
            threads,
        } => {
            validate_tol(tol)?;
            validate_stride(mode, stride)?;
            if trials == 0 {
                return Err(CliError::Usage("--trials must be positive".into()));
            }
            init_threads(threads)?;
            bench(&n_list, mode, trials, seed, tol, stride)?;
            Ok(())
        }
    }
}

fn validate_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!("--tol must be in (0, 1), got {tol}")));
    }
    Ok(())
}

fn validate_stride(mode: ModeArg, stride: usize) -> Result<(), CliError> {
    if mode == ModeArg::Thin && stride == 0 {
        return Err(CliError::Usage("--stride must be positive".into()));
    }
    Ok(())
}

fn load_plan(path: &Path) -> Result<SphPlan, CliError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    Ok(SphPlan::from_bytes(&bytes)?)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_coeffs(path: &Path, kind: CoeffKind) -> Result<CoeffMatrix, CliError> {
    let mut reader = BufReader::new(File::open(path)?);
    let coeffs = if is_csv(path) {
        CoeffMatrix::read_csv(&mut reader, kind)?
    } else {
        let m = CoeffMatrix::read_fshc(&mut reader)?;
        if m.kind() != kind {
            return Err(harmonium::Error::KindMismatch {
                expected: kind,
                actual: m.kind(),
            }
            .into());
        }
        m
    };
    Ok(coeffs)
}

fn write_coeffs(path: &Path, coeffs: &CoeffMatrix) -> Result<(), CliError> {
    let mut writer = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        coeffs.write_csv(&mut writer)?;
    } else {
        coeffs.write_fshc(&mut writer)?;
    }
    writer.flush()?;
    Ok(())
}

/// Standard-normal coefficients over the staircase, columns normalized.
fn random_coeffs(n: usize, seed: u64) -> CoeffMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = CoeffMatrix::zeros(n, CoeffKind::SphericalHarmonic);
    for j in 0..2 * n + 1 {
        let len = n + 1 - ColumnOrder::from_column(j).abs_m;
        for i in 0..len {
            f.set(i, j, rng.sample(StandardNormal));
        }
    }
    f.normalize_columns()
}

fn max_column_error(a: &CoeffMatrix, b: &CoeffMatrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let err: f64 = a
            .column(j)
            .iter()
            .zip(b.column(j))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    worst
}

fn bench(
    n_list: &[usize],
    mode: ModeArg,
    trials: usize,
    seed: u64,
    tol: f64,
    stride: usize,
) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "n,mode,build_s,fwd_s,inv_s,max_col_err,plan_bytes,rank_avg,rank_std"
    )?;
    for &n in n_list {
        let t0 = Instant::now();
        let plan = SphPlan::new(n, tol, mode.to_plan_mode(stride))?;
        let build_s = t0.elapsed().as_secs_f64();
        let plan_bytes = plan.plan_bytes();
        let (mut fwd_s, mut inv_s, mut err_sum) = (0.0, 0.0, 0.0);
        for trial in 0..trials {
            // one reproducible stream per (seed, n, trial)
            let f = random_coeffs(n, seed ^ ((n as u64) << 24) ^ trial as u64);
            let t1 = Instant::now();
            let g = plan.sph2fourier(&f)?;
            fwd_s += t1.elapsed().as_secs_f64();
            let t2 = Instant::now();
            let back = plan.fourier2sph(&g)?;
            inv_s += t2.elapsed().as_secs_f64();
            err_sum += max_column_error(&f, &back);
        }
        let t = trials as f64;
        let (rank_avg, rank_std) = plan
            .rank_statistics()
            .map_or((0.0, 0.0), |s| (s.avg, s.std));
        writeln!(
            out,
            "{n},{mode},{build_s:.6},{fwd:.6},{inv:.6},{err:.6e},{plan_bytes},{rank_avg:.4},{rank_std:.4}",
            mode = mode.label(),
            fwd = fwd_s / t,
            inv = inv_s / t,
            err = err_sum / t,
        )?;
    }
    Ok(())
}
