//! `ellint`: numerical verification of elliptic hypergeometric integral
//! identities and their basic and classical limits.

use std::path::PathBuf;
use std::process;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use ellint_cli::config::{self, Identity, ALL_IDENTITIES};
use ellint_cli::params_file::{parse_params_file, ParamsFile};
use ellint_cli::runner::{self, ConvergePlan, Job, VerifyPlan, EXIT_CONFIG};
use ellint_core::identities::VerifySettings;
use ellint_core::sampling::NamedParams;

#[derive(Parser)]
#[command(name = "ellint", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an identity (or every identity) over seeded parameter draws.
    Verify(VerifyArgs),
    /// Tabulate quadrature refinement, or the small-p collapse with --probe-ps.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity name, or "all" for the full suite at default dimensions.
    #[arg(long)]
    identity: String,

    /// Integration rank of the left (or only) side.
    #[arg(long)]
    n: Option<usize>,

    /// Integration rank of the transformed side, where the identity has one.
    #[arg(long)]
    m: Option<usize>,

    /// Survivor count for the single-nome families (bh1, bh2, bh3).
    #[arg(long)]
    k: Option<usize>,

    /// Seeds to run: comma-separated integers and inclusive ranges, e.g. "0,3..7".
    #[arg(long)]
    seeds: Option<String>,

    /// Pass threshold on the relative error (defaults per identity).
    #[arg(long)]
    tol: Option<f64>,

    /// Relative change between grid doublings that counts as converged.
    #[arg(long)]
    target_rel: Option<f64>,

    /// Nodes per torus dimension on the first grid level.
    #[arg(long)]
    grid_start: Option<usize>,

    /// Number of grid doublings allowed past the first level.
    #[arg(long)]
    max_level: Option<usize>,

    /// Read parameters from a file instead of sampling (single run, seed 0).
    #[arg(long)]
    params_file: Option<PathBuf>,

    /// Report path; rewritten after each completed job.
    #[arg(long, default_value = "report.json")]
    output: PathBuf,

    /// Report format: json or csv (default inferred from the output extension).
    #[arg(long)]
    format: Option<String>,

    /// Zero the wall_ms column, making reports reproducible byte for byte.
    #[arg(long)]
    redact_timing: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Identity name (the suite alias "all" is not a convergence study).
    #[arg(long)]
    identity: String,

    /// Integration rank of the left (or only) side.
    #[arg(long)]
    n: Option<usize>,

    /// Integration rank of the transformed side, where the identity has one.
    #[arg(long)]
    m: Option<usize>,

    /// Survivor count for the single-nome families (bh1, bh2, bh3).
    #[arg(long)]
    k: Option<usize>,

    /// Seed for the single parameter draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Relative change at which the ladder may stop early (default: run it out).
    #[arg(long)]
    target_rel: Option<f64>,

    /// Nodes per torus dimension on the first grid level.
    #[arg(long)]
    grid_start: Option<usize>,

    /// Number of grid doublings allowed past the first level.
    #[arg(long)]
    max_level: Option<usize>,

    /// Probe nomes for the small-p study, e.g. "1e-2,1e-3,1e-4".
    #[arg(long)]
    probe_ps: Option<String>,

    /// Read parameters from a file instead of sampling.
    #[arg(long)]
    params_file: Option<PathBuf>,

    /// Table path.
    #[arg(long, default_value = "converge.json")]
    output: PathBuf,

    /// Table format: json or csv (default inferred from the output extension).
    #[arg(long)]
    format: Option<String>,
}

fn main() {
    init_thread_pool();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    };
    process::exit(code);
}

/// ELLINT_THREADS caps the worker pool; report contents do not depend on it.
fn init_thread_pool() {
    if let Ok(raw) = std::env::var("ELLINT_THREADS") {
        match raw.parse::<usize>() {
            Ok(count) if count >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(count).build_global();
            }
            _ => eprintln!("warning: ignoring ELLINT_THREADS='{raw}' (want an integer >= 1)"),
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Verify(args) => runner::run_verify(&build_verify_plan(args)?),
        Command::Converge(args) => runner::run_converge(&build_converge_plan(args)?),
    }
}

/// File dimensions win where present; an explicit flag that disagrees with
/// the file is a configuration error rather than a silent override.
fn merge_dim(flag: Option<usize>, file: Option<usize>, name: &str) -> Result<Option<usize>> {
    match (flag, file) {
        (Some(a), Some(b)) if a != b => {
            bail!("{name} = {a} on the command line conflicts with {name} = {b} in the params file")
        }
        (_, Some(b)) => Ok(Some(b)),
        (a, None) => Ok(a),
    }
}

fn load_params(
    identity: Identity,
    path: &PathBuf,
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
) -> Result<(NamedParams, (usize, usize, usize))> {
    let ParamsFile { values, n: fn_, m: fm, k: fk } = parse_params_file(path)?;
    let dims = identity.resolve_dims(
        merge_dim(n, fn_, "n")?,
        merge_dim(m, fm, "m")?,
        merge_dim(k, fk, "k")?,
    )?;
    Ok((values, dims))
}

fn build_verify_plan(args: VerifyArgs) -> Result<VerifyPlan> {
    config::validate_numerics(args.tol, args.target_rel, args.grid_start)?;
    let format = config::resolve_format(args.format.as_deref(), &args.output)?;
    let settings = VerifySettings {
        grid_start: args.grid_start,
        target_rel: args.target_rel,
        max_level: args.max_level,
    };

    let mut file_params = None;
    let mut jobs = Vec::new();
    if args.identity == "all" {
        if args.n.is_some() || args.m.is_some() || args.k.is_some() {
            bail!("--identity all runs every identity at its default dimensions; drop --n/--m/--k");
        }
        if args.params_file.is_some() {
            bail!("--params-file fixes one identity's parameters; it cannot drive \"all\"");
        }
        let seeds = required_seeds(&args.seeds)?;
        for identity in ALL_IDENTITIES {
            let dims = identity.resolve_dims(None, None, None)?;
            jobs.extend(seeds.iter().map(|&seed| Job { identity, dims, seed }));
        }
    } else {
        let identity = Identity::parse(&args.identity)?;
        match &args.params_file {
            Some(path) => {
                if args.seeds.is_some() {
                    bail!("--seeds has no effect with --params-file (one run at the given point)");
                }
                let (values, dims) = load_params(identity, path, args.n, args.m, args.k)?;
                file_params = Some(values);
                jobs.push(Job { identity, dims, seed: 0 });
            }
            None => {
                let dims = identity.resolve_dims(args.n, args.m, args.k)?;
                let seeds = required_seeds(&args.seeds)?;
                jobs.extend(seeds.into_iter().map(|seed| Job { identity, dims, seed }));
            }
        }
    }
    jobs.sort_by(|a, b| a.identity.name().cmp(b.identity.name()).then(a.seed.cmp(&b.seed)));

    Ok(VerifyPlan {
        jobs,
        tol: args.tol,
        settings,
        file_params,
        output: args.output,
        format,
        redact_timing: args.redact_timing,
    })
}

fn required_seeds(raw: &Option<String>) -> Result<Vec<u64>> {
    match raw {
        Some(s) => config::parse_seeds(s),
        None => bail!("--seeds is required unless --params-file supplies an explicit point"),
    }
}

fn build_converge_plan(args: ConvergeArgs) -> Result<ConvergePlan> {
    config::validate_numerics(None, args.target_rel, args.grid_start)?;
    let format = config::resolve_format(args.format.as_deref(), &args.output)?;
    let identity = Identity::parse(&args.identity)?;
    let settings = VerifySettings {
        grid_start: args.grid_start,
        target_rel: args.target_rel,
        max_level: args.max_level,
    };

    let (file_params, dims) = match &args.params_file {
        Some(path) => {
            let (values, dims) = load_params(identity, path, args.n, args.m, args.k)?;
            (Some(values), dims)
        }
        None => (None, identity.resolve_dims(args.n, args.m, args.k)?),
    };

    let probe_ps = match &args.probe_ps {
        Some(raw) => Some(parse_probe_ps(raw)?),
        None => None,
    };

    Ok(ConvergePlan {
        identity,
        dims,
        seed: args.seed,
        settings,
        probe_ps,
        file_params,
        output: args.output,
        format,
    })
}

fn parse_probe_ps(raw: &str) -> Result<Vec<f64>> {
    let mut ps = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        let p: f64 = token
            .parse()
            .map_err(|_| anyhow::anyhow!("bad probe nome '{token}' in --probe-ps"))?;
        if !(p > 0.0 && p < 1.0) {
            bail!("probe nome {p} is outside (0, 1)");
        }
        ps.push(p);
    }
    if ps.is_empty() {
        bail!("--probe-ps expands to nothing");
    }
    Ok(ps)
}
