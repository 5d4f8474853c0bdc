use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hausdim::report::{
    self, cmd_bound, cmd_riesz, cmd_sweep, exit_code, parse_q_range, parse_step, sweep_values, verify_kappa,
    verify_martingale, verify_riesz_identities, BoundRow, MartingaleSuite, OutputFormat, ReportEnvelope,
    RieszOptions, RunConfig, OUT_DIR_ENV,
};
use hausdim::{Error, ResidueSet, Result};

#[derive(Parser)]
#[command(name = "hausdim", version, about = "Dimension bounds for measures with restricted spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format; defaults to csv for sweep and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; `-` writes to stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Directory for output files when --output is absent.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Text => OutputFormat::Text,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Martingale,
    Kappa,
    RieszIdentities,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Martingale => "martingale",
            Suite::Kappa => "kappa",
            Suite::RieszIdentities => "riesz-identities",
            Suite::All => "all",
        }
    }
}

#[derive(Args)]
struct RieszArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    /// Truncation order for Peyrière's formula.
    #[arg(long)]
    k: Option<usize>,
    /// Midpoint grid size for Peyrière's formula (a multiple of q^K).
    #[arg(long)]
    grid: Option<usize>,
    /// Level of the entropy estimate.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long)]
    no_peyriere: bool,
    #[arg(long)]
    no_entropy: bool,
}

impl RieszArgs {
    fn options(&self) -> RieszOptions {
        RieszOptions {
            a: self.a,
            order: self.k,
            grid: self.grid,
            level: self.level,
            peyriere: !self.no_peyriere,
            entropy: !self.no_entropy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound for measures with spectrum in C_B.
    Bound {
        #[arg(long)]
        q: usize,
        /// Comma-separated residues; empty for B = {}.
        #[arg(long, default_value = "")]
        b: String,
    },
    /// Bound table for Riesz products.
    Riesz {
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<usize>,
        #[command(flatten)]
        riesz: RieszArgs,
    },
    /// Numerical verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Bases for the martingale suite.
        #[arg(long, value_delimiter = ',')]
        q: Vec<usize>,
        /// Grid depth for the martingale suite.
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1.25, 2.0, 4.0])]
        p: Vec<f64>,
        /// Largest q for the kappa and identity suites.
        #[arg(long)]
        q_max: Option<usize>,
        /// Random subsets per exponent in the set-average check.
        #[arg(long, default_value_t = 100)]
        subsets: usize,
    },
    /// Riesz bound table over a range of q.
    Sweep {
        /// `lo..hi`, inclusive.
        #[arg(long)]
        q: String,
        /// `+k` adds k, `xk` multiplies by k.
        #[arg(long, default_value = "+1")]
        step: String,
        #[arg(long)]
        even_only: bool,
        #[command(flatten)]
        riesz: RieszArgs,
    },
}

enum Outcome {
    Envelope(ReportEnvelope),
    Table(ReportEnvelope, Vec<BoundRow>),
}

fn run(cli: &Cli, config: &mut RunConfig) -> Result<Outcome> {
    match &cli.command {
        Command::Bound { q, b } => {
            config.q = vec![*q];
            config.b = Some(b.clone());
            let set = ResidueSet::parse(*q, b)?;
            Ok(Outcome::Envelope(cmd_bound(config.clone(), *q, &set)?))
        }
        Command::Riesz { q, riesz } => {
            config.q = q.clone();
            fill_riesz(config, riesz);
            let (env, rows) = cmd_riesz(config.clone(), q, &riesz.options())?;
            Ok(Outcome::Table(env, rows))
        }
        Command::Sweep { q, step, even_only, riesz } => {
            let (lo, hi) = parse_q_range(q)?;
            let qs = sweep_values(lo, hi, parse_step(step)?, *even_only);
            if qs.is_empty() {
                return Err(Error::InvalidInput(format!("q range {q} with step {step} is empty")));
            }
            config.q = qs.clone();
            fill_riesz(config, riesz);
            let (env, rows) = cmd_sweep(config.clone(), &qs, &riesz.options())?;
            Ok(Outcome::Table(env, rows))
        }
        Command::Verify { suite, q, n, a, p, q_max, subsets } => {
            config.suite = Some(suite.name().into());
            let mut results = serde_json::Map::new();
            let mut checks = Vec::new();
            if matches!(suite, Suite::Martingale | Suite::All) {
                let qs = if q.is_empty() { vec![3, 4] } else { q.clone() };
                for &qi in &qs {
                    hausdim::martingale::QadicGrid::new(qi, *n)?;
                }
                config.q = qs.clone();
                config.n = Some(*n);
                config.a = Some(*a);
                config.p = p.clone();
                let s = MartingaleSuite { qs, a: *a, depth: *n, ps: p.clone(), subsets: *subsets, seed: cli.common.seed };
                let (r, c) = verify_martingale(&s)?;
                results.insert("martingale".into(), r);
                checks.extend(c);
            }
            if matches!(suite, Suite::Kappa | Suite::All) {
                let qm = q_max.unwrap_or(10);
                config.q_max = Some(qm);
                let (r, c) = verify_kappa(qm)?;
                results.insert("kappa".into(), r);
                checks.extend(c);
            }
            if matches!(suite, Suite::RieszIdentities | Suite::All) {
                let qm = q_max.unwrap_or(32);
                config.q_max = Some(qm);
                let (r, c) = verify_riesz_identities(qm, cli.common.seed)?;
                results.insert("riesz_identities".into(), r);
                checks.extend(c);
            }
            Ok(Outcome::Envelope(ReportEnvelope::new(config.clone(), results.into(), checks)))
        }
    }
}

fn fill_riesz(config: &mut RunConfig, r: &RieszArgs) {
    config.a = Some(r.a);
    config.k = r.k;
    config.grid = r.grid;
    config.level = r.level;
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bound { .. } => "bound",
        Command::Riesz { .. } => "riesz",
        Command::Verify { .. } => "verify",
        Command::Sweep { .. } => "sweep",
    }
}

fn open_output(cli: &Cli, format: OutputFormat) -> io::Result<Box<dyn Write>> {
    let ext = match format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
        OutputFormat::Text => "txt",
    };
    let path = match (&cli.common.output, &cli.common.out_dir) {
        (Some(p), _) if p.as_os_str() == "-" => None,
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.{ext}", command_name(&cli.command))))
        }
        (None, None) => None,
    };
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(cli: &Cli, outcome: &Outcome, format: OutputFormat) -> Result<()> {
    let io_err = |e: io::Error| Error::Resource(format!("writing output: {e}"));
    let mut out = open_output(cli, format).map_err(io_err)?;
    match (outcome, format) {
        (Outcome::Table(_, rows), OutputFormat::Csv) => report::write_csv(rows, &mut out)?,
        (Outcome::Envelope(env) | Outcome::Table(env, _), OutputFormat::Text) => env.write_text(&mut out).map_err(io_err)?,
        (Outcome::Envelope(env) | Outcome::Table(env, _), _) => writeln!(out, "{}", env.to_json()).map_err(io_err)?,
    }
    out.flush().map_err(io_err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let default_format = match cli.command {
        Command::Sweep { .. } => OutputFormat::Csv,
        _ => OutputFormat::Json,
    };
    let format = cli.common.format.map(OutputFormat::from).unwrap_or(default_format);
    let mut config = RunConfig {
        command: command_name(&cli.command).into(),
        seed: cli.common.seed,
        format: Some(format),
        output: cli.common.output.as_ref().map(|p| p.display().to_string()),
        ..Default::default()
    };
    if matches!(cli.command, Command::Bound { .. }) && format == OutputFormat::Csv {
        eprintln!("error: csv output is only available for riesz and sweep");
        return ExitCode::from(2);
    }

    let mut outcome = match run(&cli, &mut config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let env = match &mut outcome {
        Outcome::Envelope(env) | Outcome::Table(env, _) => env,
    };
    env.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    let pass = env.all_pass();
    for c in env.failures() {
        eprintln!("FAIL {}: value {:e}, tolerance {:e} {}", c.name, c.residual, c.tolerance, c.detail);
    }
    if let Err(e) = emit(&cli, &outcome, format) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e) as u8);
    }
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
