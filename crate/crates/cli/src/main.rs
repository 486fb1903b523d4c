use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sturm_cli::{parse_expansion, run_phantom, run_suite, CliError, PhantomOptions, Suite, SuiteConfig};

/// Verification runner for Sturm's operator on Maass-shifted Siegel cusp forms.
#[derive(Debug, Parser)]
#[command(name = "sturm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite and emit a JSON report.
    Verify(VerifyArgs),
    /// Apply Sturm's operator to the Maass shift of a Fourier expansion given as JSON.
    Phantom(PhantomArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Monte Carlo samples per integral.
    #[arg(long, default_value_t = sturm_cli::suites::FULL_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Degrees of freedom of the Wishart proposal.
    #[arg(long)]
    nu: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 12)]
    max_genus: usize,
    /// Cap samples at 1e5 and genus at 3.
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PhantomArgs {
    file: PathBuf,
    /// Compare a(T, s) from Monte Carlo with the closed form for every term.
    #[arg(long)]
    crosscheck: bool,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    quick: bool,
    #[command(flatten)]
    common: Common,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STURM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("STURM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn emit(json: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{json}");
            Ok(())
        }
    }
}

fn verify(args: VerifyArgs) -> Result<bool, CliError> {
    let config = SuiteConfig {
        m: args.m,
        k: args.k,
        s: args.s,
        q: args.q,
        samples: args.common.samples,
        seed: args.common.seed,
        nu: args.common.nu,
        max_genus: args.max_genus,
        quick: args.quick,
    };
    let report = run_suite(args.suite, &config)?;
    emit(&report.to_json(), args.common.out.as_deref())?;
    let failed = report.failures().count();
    eprintln!(
        "verify {}: {}/{} checks passed in {:.2}s",
        report.suite,
        report.checks.len() - failed,
        report.checks.len(),
        report.wall_time_s
    );
    for check in report.failures() {
        eprintln!("  FAIL {}: closed {} oracle {} (rel err {:.3e})", check.id, check.closed, check.oracle, check.rel_err);
    }
    for note in &report.notes {
        eprintln!("  note: {note}");
    }
    Ok(report.pass)
}

fn phantom(args: PhantomArgs) -> Result<bool, CliError> {
    let text = fs::read_to_string(&args.file)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.file.display())))?;
    let h = parse_expansion(&text)?;
    let samples = if args.quick { args.common.samples.min(100_000) } else { args.common.samples };
    let opts = PhantomOptions { crosscheck: args.crosscheck, s: args.s, samples, seed: args.common.seed, nu: args.common.nu };
    let report = run_phantom(&h, &opts)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(&json, args.common.out.as_deref())?;
    if let Some(note) = &report.note {
        eprintln!("{note}");
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Verify(args) => verify(args),
        Command::Phantom(args) => phantom(args),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
