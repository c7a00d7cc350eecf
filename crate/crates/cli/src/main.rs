use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spinbound::bounds::{self, WitnessMode};
use spinbound::harness::{self, VerifyOptions};
use spinbound::qstate::{Basis, StateFile};
use spinbound::sampling::Family;
use spinbound::{twirl, wootters_concurrence, DensityOperator, Error, Observables};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "spinbound",
    version,
    about = "Certify spin-pair entanglement from singlet fraction and magnetisation"
)]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the singlet-bound witness for measured observables.
    Witness(WitnessArgs),
    /// Wootters concurrence of a state file.
    Concurrence { state: PathBuf },
    /// Twirl a state file about z (or about its magnetisation axis).
    Twirl(TwirlArgs),
    /// Sample random states and write the (|m|, p_s, C) scatter as CSV.
    Sample(SampleArgs),
    /// Extract iso-concurrence threshold lines from sampled states.
    Contour(ContourArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct WitnessArgs {
    /// Singlet fraction.
    #[arg(long)]
    ps: f64,
    /// Magnetisation: a magnitude `m` (taken along z) or a vector `x,y,z`.
    #[arg(long, allow_hyphen_values = true)]
    m: String,
    /// Use only |m_z| (sufficient but not tight).
    #[arg(long)]
    z_only: bool,
}

#[derive(Args, Debug)]
struct TwirlArgs {
    state: PathBuf,
    /// Rotate the magnetisation onto +z before twirling.
    #[arg(long)]
    align: bool,
    /// Use the quadrature average with this many points instead of the exact projection.
    #[arg(long)]
    numeric: Option<usize>,
    #[arg(long, value_enum, default_value_t = BasisArg::Computational)]
    basis: BasisArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BasisArg {
    Computational,
    Coupled,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    Spun,
    Ginibre,
    Separable,
    Saturating,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Spun => Family::Spun,
            FamilyArg::Ginibre => Family::Ginibre,
            FamilyArg::Separable => Family::Separable,
            FamilyArg::Saturating => Family::Saturating,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value_t = 5000)]
    count: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Spun)]
    family: FamilyArg,
}

#[derive(Args, Debug)]
struct ContourArgs {
    /// Target concurrences, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.5, 0.8])]
    targets: Vec<f64>,
    /// Number of |m| bins over [0, 1].
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = FamilyArg::Spun)]
    family: FamilyArg,
    /// Append the Mintert et al. reference singlet fraction as an extra column.
    #[arg(long)]
    mintert: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    let mut out = open_output(path)?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

fn parse_magnetisation(raw: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| format!("bad magnetisation component '{s}': {e}"))
    };
    match parts.as_slice() {
        [z] => Ok([0.0, 0.0, parse(z)?]),
        [x, y, z] => Ok([parse(x)?, parse(y)?, parse(z)?]),
        _ => Err(format!("--m takes a magnitude or x,y,z, got '{raw}'")),
    }
}

fn load_state(path: &Path) -> Result<Result<DensityOperator, Error>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(StateFile::parse(&text))
}

fn cmd_witness(cli: &Cli, args: &WitnessArgs) -> Result<u8> {
    let m = match parse_magnetisation(&args.m) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(EXIT_INVALID);
        }
    };
    let obs = Observables::new(args.ps, m);
    let mode = if args.z_only {
        WitnessMode::ZOnly
    } else {
        WitnessMode::FullVector
    };
    match bounds::witness(&obs, mode) {
        Ok(v) => {
            emit(cli.output.as_deref(), &serde_json::to_string_pretty(&v)?)?;
            Ok(if v.entangled_certified {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            })
        }
        Err(e @ Error::Unphysical { .. }) => {
            let v = bounds::WitnessVerdict::unphysical(&obs, mode);
            emit(cli.output.as_deref(), &serde_json::to_string_pretty(&v)?)?;
            eprintln!("error: {e}");
            Ok(EXIT_INVALID)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(EXIT_INVALID)
        }
    }
}

fn cmd_concurrence(cli: &Cli, path: &Path) -> Result<u8> {
    let rho = match load_state(path)? {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return Ok(EXIT_INVALID);
        }
    };
    match wootters_concurrence(&rho) {
        Ok(r) => {
            emit(cli.output.as_deref(), &serde_json::to_string_pretty(&r)?)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(EXIT_INVALID)
        }
    }
}

fn cmd_twirl(cli: &Cli, args: &TwirlArgs) -> Result<u8> {
    let rho = match load_state(&args.state)? {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", args.state.display());
            return Ok(EXIT_INVALID);
        }
    };
    let rho = if args.align {
        rho.align_magnetisation_to_z()
    } else {
        rho
    };
    let out = match args.numeric {
        Some(n) => match twirl::twirl_numeric(&rho, n) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(EXIT_INVALID);
            }
        },
        None => twirl::twirl_analytic(&rho),
    };
    let basis = match args.basis {
        BasisArg::Computational => Basis::Computational,
        BasisArg::Coupled => Basis::Coupled,
    };
    emit(
        cli.output.as_deref(),
        &StateFile::from_state(&out, basis).to_json(),
    )?;
    Ok(EXIT_OK)
}

fn cmd_sample(cli: &Cli, args: &SampleArgs) -> Result<u8> {
    if args.count == 0 {
        eprintln!("error: --count must be ≥ 1");
        return Ok(EXIT_INVALID);
    }
    let records = harness::generate_records(args.family.into(), cli.seed, args.count)?;
    let out = open_output(cli.output.as_deref())?;
    harness::write_sample_csv(out, &records).with_context(|| match &cli.output {
        Some(p) => format!("writing {}", p.display()),
        None => "writing stdout".into(),
    })?;
    Ok(EXIT_OK)
}

fn cmd_contour(cli: &Cli, args: &ContourArgs) -> Result<u8> {
    if args.bins == 0 || args.samples == 0 {
        eprintln!("error: --bins and --samples must be ≥ 1");
        return Ok(EXIT_INVALID);
    }
    if let Some(bad) = args.targets.iter().find(|c| !(0.0..1.0).contains(*c)) {
        eprintln!("error: target concurrence {bad} outside [0, 1)");
        return Ok(EXIT_INVALID);
    }
    let records = harness::generate_records(args.family.into(), cli.seed, args.samples)?;
    let contours = harness::extract_contours(&records, &args.targets, 1.0 / args.bins as f64)?;
    for c in contours.iter().filter(|c| !c.well_populated()) {
        eprintln!(
            "warning: InsufficientSamples: C = {}, m bin {:.3} holds {} states (< {})",
            c.target_concurrence,
            c.m,
            c.population,
            harness::MIN_BIN_POPULATION
        );
    }
    let out = open_output(cli.output.as_deref())?;
    harness::write_contour_csv(out, &contours, args.mintert).with_context(|| {
        match &cli.output {
            Some(p) => format!("writing {}", p.display()),
            None => "writing stdout".into(),
        }
    })?;
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<u8> {
    let opts = VerifyOptions {
        samples: args.samples,
        seed: cli.seed,
        inject_fault: args.inject_fault,
    };
    let started = std::time::Instant::now();
    let outcomes = harness::run_verification(&opts);
    let mut report = String::new();
    for o in &outcomes {
        report.push_str(&format!(
            "{} {:<22} n={:<8} worst_violation={:e}  {}\n",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.evaluated,
            o.worst_violation,
            o.detail
        ));
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    report.push_str(&format!(
        "{} of {} checks passed in {:.1} s",
        outcomes.len() - failed.len(),
        outcomes.len(),
        started.elapsed().as_secs_f64()
    ));
    emit(cli.output.as_deref(), &report)?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        for f in failed {
            eprintln!(
                "failed: {} (worst violation {:e})",
                f.name, f.worst_violation
            );
        }
        Ok(EXIT_NEGATIVE)
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Witness(a) => cmd_witness(cli, a),
        Command::Concurrence { state } => cmd_concurrence(cli, state),
        Command::Twirl(a) => cmd_twirl(cli, a),
        Command::Sample(a) => cmd_sample(cli, a),
        Command::Contour(a) => cmd_contour(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(e.into()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
