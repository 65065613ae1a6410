use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use blk_rksylv::bench::{emit_csv, emit_json, emit_table, parse_strategy, run, BenchmarkSpec, ProblemKind, DEFAULT_EPSILON};
use blk_rksylv::poles::DEFAULT_FOV_SAMPLES;
use blk_rksylv::rhs::RankRule;

#[derive(Parser)]
#[command(name = "blk-rksylv", version, about = "Block rational Krylov solver for AX - XB = uv^H")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Poisson,
    Convdiff,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run pole strategies on a benchmark problem.
    Bench {
        #[arg(long, value_enum)]
        problem: Problem,
        /// Interior grid points per direction.
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        maxit: usize,
        /// Comma-separated list of adm, sadm, ext, fixed:FILE.
        #[arg(long, default_value = "adm,sadm,ext")]
        poles: String,
        #[arg(long, default_value_t = DEFAULT_FOV_SAMPLES)]
        fov_samples: usize,
        /// Directory for per-strategy CSV histories.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Use this many singular triplets of the right-hand side.
        #[arg(long)]
        rhs_rank: Option<usize>,
        /// Run the strategies concurrently.
        #[arg(long)]
        parallel: bool,
        /// Follow each complex pole by its conjugate.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        pairing: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> blk_rksylv::Result<ExitCode> {
    let Command::Bench {
        problem,
        n,
        epsilon,
        tol,
        maxit,
        poles,
        fov_samples,
        out,
        format,
        rhs_rank,
        parallel,
        pairing,
    } = cli.command;
    let strategies = poles
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_strategy)
        .collect::<blk_rksylv::Result<Vec<_>>>()?;
    if strategies.is_empty() {
        return Err(blk_rksylv::Error::InvalidArgument("no pole strategy given".into()));
    }
    let mut spec = BenchmarkSpec::new(
        match problem {
            Problem::Poisson => ProblemKind::Poisson,
            Problem::Convdiff => ProblemKind::Convdiff,
        },
        n,
    );
    spec.epsilon = epsilon;
    spec.tol = tol;
    spec.max_iter = maxit;
    spec.fov_samples = fov_samples;
    spec.parallel = parallel;
    spec.pairing = pairing;
    if let Some(r) = rhs_rank {
        spec.rank = RankRule::Fixed(r);
    }
    let outcomes = run(&spec, &strategies)?;
    let csv_dir = match (&out, format) {
        (Some(d), _) => Some(d.clone()),
        (None, Format::Csv) => Some(PathBuf::from(".")),
        _ => None,
    };
    if let Some(dir) = csv_dir {
        for o in &outcomes {
            if let Ok(r) = &o.result {
                let path = emit_csv(&dir, r)?;
                if format == Format::Csv {
                    println!("{}", path.display());
                }
            }
        }
    }
    match format {
        Format::Table => print!("{}", emit_table(&outcomes)),
        Format::Json => println!("{}", emit_json(&outcomes)?),
        Format::Csv => eprint!("{}", emit_table(&outcomes)),
    }
    let failed = outcomes.iter().any(|o| o.result.is_err());
    let unconverged = outcomes.iter().any(|o| matches!(&o.result, Ok(r) if !r.converged));
    Ok(if failed {
        for o in &outcomes {
            if let Err(e) = &o.result {
                eprintln!("error in {}: {e}", o.strategy);
            }
        }
        ExitCode::from(1)
    } else if unconverged {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}
