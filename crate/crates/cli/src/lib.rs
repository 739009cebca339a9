//! Manifest-driven experiment runner for `lrfpp`.

pub mod error;
pub mod manifest;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, ManifestError, EXIT_INVARIANT, EXIT_IO, EXIT_VALIDATION};
pub use manifest::{parse_manifest, Format, Kind, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "lrfpp", version, about = "Long-range first-passage percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Typical distance, flooding time and diameter sweeps.
    Simulate(RunArgs),
    /// Limiting constants R(d, p, alpha).
    Constants(RunArgs),
    /// Rate sandwich, exploration against oracle, Gumbel fluctuations.
    Validate(RunArgs),
    /// Fluctuations of tau_k.
    Tau(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory, overriding the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Root seed, overriding the manifest.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(args: &RunArgs) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(&args.manifest).map_err(|source| CliError::Io {
        path: args.manifest.clone(),
        source,
    })?;
    let mut m = parse_manifest(&text)?;
    if let Some(out) = &args.out {
        m.out = out.clone();
    }
    if let Some(f) = args.format {
        m.format = f;
    }
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(ManifestError::Field {
                path: "--jobs".into(),
                message: "must be >= 1".into(),
            }
            .into());
        }
        m.jobs = Some(j);
    }
    if let Some(s) = args.seed {
        m.seed = s;
    }
    Ok(m)
}

/// Runs one subcommand on a loaded manifest and returns the exit code.
pub fn execute(manifest: &RunManifest, kind: Kind) -> i32 {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = manifest.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let e = CliError::Pool(e.to_string());
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let outcomes = pool.install(|| {
        run::run_kind(manifest.experiments.iter(), kind, manifest.seed, &manifest.out, manifest.format)
    });
    let outcomes = match outcomes {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut codes = Vec::new();
    for o in &outcomes {
        if let Some(p) = &o.path {
            println!("{}", p.display());
        }
        if let Some(e) = &o.error {
            eprintln!("{}: {e}", o.name);
            codes.push(e.exit_code());
        }
    }
    [EXIT_INVARIANT, EXIT_IO, EXIT_VALIDATION]
        .into_iter()
        .find(|c| codes.contains(c))
        .unwrap_or(0)
}

/// Entry point: parses `args` (program name first) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (args, kind) = match &cli.command {
        Command::Simulate(a) => (a, Kind::Simulate),
        Command::Constants(a) => (a, Kind::Constants),
        Command::Validate(a) => (a, Kind::Validate),
        Command::Tau(a) => (a, Kind::Tau),
    };
    match load(args) {
        Ok(m) => execute(&m, kind),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
