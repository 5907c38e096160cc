use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chainrec::finite_oracle::run_oracle;
use chainrec::report::{parse_config, run_pipeline, write_outputs};
use chainrec::shadowing_lab::{
    expansion_factor, generate_pseudo_orbit, inverse_branch_shadow, orbit_deviation,
    shadowing_search, PseudoOrbitKind,
};
use chainrec::{builtin, Error, Point};

const EXIT_VALIDATION: u8 = 2;
const EXIT_ANALYSIS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chainrec",
    version,
    about = "Chain recurrence and basin analysis on box grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Perturbed,
    RandomWalk,
    Spliced,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses listed in a TOML config and write report.json,
    /// condensation.dot and boxes.csv.
    Analyze {
        config: PathBuf,
        /// Overrides output_dir from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check the finite-system identities exhaustively and on random relations.
    VerifyFinite {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        random_max_n: usize,
    },
    /// Generate one pseudo-orbit and search for a shadowing point.
    Shadow {
        #[arg(long)]
        system: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Kind::Perturbed)]
        kind: Kind,
        #[arg(long, default_value_t = 14)]
        search_depth: u32,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_ANALYSIS
    })
}

fn analyze(config: PathBuf, output_dir: Option<PathBuf>) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| Error::Validation(format!("{}: {e}", config.display())))?;
    let cfg = parse_config(&text)?;
    let started = Instant::now();
    let out = run_pipeline(&cfg)?;
    let dir = output_dir.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    write_outputs(&out, &dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    eprintln!(
        "wrote {} in {:.2}s",
        dir.display(),
        started.elapsed().as_secs_f64()
    );
    for f in &out.report.errors {
        eprintln!("analysis {} failed: {}", f.analysis, f.message);
    }
    Ok(if out.report.succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ANALYSIS)
    })
}

fn verify_finite(
    n: usize,
    random: usize,
    seed: u64,
    random_max_n: usize,
) -> Result<ExitCode, Error> {
    let summary = run_oracle(n, random, random_max_n, seed)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("plain data")
    );
    Ok(if summary.all_green {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ANALYSIS)
    })
}

#[allow(clippy::too_many_arguments)]
fn shadow(
    system: &str,
    delta: f64,
    epsilon: f64,
    length: usize,
    seed: u64,
    kind: Kind,
    search_depth: u32,
) -> Result<ExitCode, Error> {
    let sys = builtin(system, &Default::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = sys.domain();
    let mut coord = |a: usize| rng.gen_range(d.axis(a).0..d.axis(a).1);
    let x0 = if d.dim() == 1 {
        Point::new1(coord(0))
    } else {
        let x = coord(0);
        Point::new2(x, coord(1))
    };
    let kind = match kind {
        Kind::Perturbed => PseudoOrbitKind::PerturbedOrbit,
        Kind::RandomWalk => PseudoOrbitKind::RandomWalk,
        Kind::Spliced => PseudoOrbitKind::Spliced {
            at: (length / 2).max(1),
        },
    };
    let po = generate_pseudo_orbit(&sys, &x0, delta, length, seed, kind)?;
    let res = shadowing_search(&sys, &po, epsilon, search_depth)?;
    let mut out = serde_json::to_value(&res).expect("plain data");
    if expansion_factor(&sys).is_some() {
        let y = inverse_branch_shadow(&sys, &po)?;
        out["inverse_branch_deviation"] = orbit_deviation(&sys, &y, &po).into();
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("plain data")
    );
    if !res.found {
        eprintln!("no witness among box centers at depth {search_depth}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { config, output_dir } => analyze(config, output_dir),
        Command::VerifyFinite {
            n,
            random,
            seed,
            random_max_n,
        } => verify_finite(n, random, seed, random_max_n),
        Command::Shadow {
            system,
            delta,
            epsilon,
            length,
            seed,
            kind,
            search_depth,
        } => shadow(&system, delta, epsilon, length, seed, kind, search_depth),
    };
    result.unwrap_or_else(|e| fail(&e))
}
