//! Command-line front end: every subcommand emits one JSON run report on
//! stdout. Exit 0 when all verdicts hold, 1 when some verdict fails, 2 on
//! usage or input errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mixcert::api::{run, Command, Params, Request};
use mixcert::config::ConfigOverrides;

#[derive(Parser)]
#[command(
    name = "mixcert",
    version,
    about = "Mixing, expansion, long-cycle, and amplification certifiers for regular graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Clone, Default)]
struct Shared {
    /// Search mode: exact | sweep | sampled (separator: exact | heuristic).
    #[arg(long)]
    mode: Option<String>,
    /// Numeric backend: exact | float (default: auto by size).
    #[arg(long)]
    backend: Option<String>,
    /// Walk chunk length, or "auto" for the measured max mixing time.
    #[arg(long)]
    tau: Option<String>,
    /// TV threshold for the well-mixing hypothesis.
    #[arg(long)]
    delta: Option<f64>,
    /// Well-mixing fraction of the hypothesis.
    #[arg(long)]
    eps: Option<f64>,
    /// Amplification rounds.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Seed for sampled searches and generators.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (fallback: MIXCERT_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Mixing-time scan cap (default 64*ceil(log2 n)).
    #[arg(long = "t-max")]
    t_max: Option<usize>,
    /// Mixing threshold (default 1/4).
    #[arg(long)]
    threshold: Option<f64>,
    /// Output file (required by gen).
    #[arg(short, long)]
    out: Option<String>,
    /// key=value configuration file; flags beat file values.
    #[arg(long)]
    config: Option<String>,
    /// Record wall time in the report (breaks byte-for-byte reruns).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Generate a named construction and write its edge list.
    Gen {
        /// Construction descriptor, e.g. "hypercube:D=3".
        spec: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Per-vertex TV at tau and mixing times.
    Profile {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Minimum cut conductance phi.
    Conductance {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Certify e(X, V\X) >= c|X| over a size range.
    Certify {
        input: String,
        /// Expansion bound c.
        #[arg(long)]
        c: f64,
        /// Size range "lo:hi" (default 1:n/2).
        #[arg(long)]
        range: Option<String>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Extract a certified expander by deleting few vertices.
    Extract {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Smallest vertex set splitting the graph into pieces <= 2n/3.
    Separator {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Find a long cycle: direct (k, ell) mode or the mixing pipeline.
    Cycle {
        input: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
        #[command(flatten)]
        shared: Shared,
    },
    /// The well-mixing amplification ladder and its claims.
    Amplify {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// The conductance/mixing-time sandwich.
    Sandwich {
        input: String,
        #[command(flatten)]
        shared: Shared,
    },
}

fn to_params(shared: &Shared) -> Result<Params, mixcert::Error> {
    let mut p = Params {
        mode: shared.mode.clone(),
        backend: shared.backend.clone(),
        tau: shared.tau.clone(),
        delta: shared.delta,
        eps: shared.eps,
        m: shared.m,
        seed: shared.seed,
        threads: shared.threads,
        t_max: shared.t_max,
        threshold: shared.threshold,
        c: None,
        range: None,
        k: None,
        ell: None,
        out: shared.out.clone(),
        timing: shared.timing,
    };
    if let Some(path) = &shared.config {
        let cfg = ConfigOverrides::load(path)?;
        p.mode = p.mode.or(cfg.mode);
        p.backend = p.backend.or(cfg.backend);
        p.tau = p.tau.or(cfg.tau);
        p.delta = p.delta.or(cfg.delta);
        p.eps = p.eps.or(cfg.eps);
        p.m = p.m.or(cfg.m);
        p.seed = p.seed.or(cfg.seed);
        p.threads = p.threads.or(cfg.threads);
        p.t_max = p.t_max.or(cfg.t_max);
        p.threshold = p.threshold.or(cfg.threshold);
    }
    Ok(p)
}

fn build_request(cli: CliCommand) -> Result<Request, mixcert::Error> {
    let (command, input, mut params) = match cli {
        CliCommand::Gen { spec, shared } => (Command::Gen, spec, to_params(&shared)?),
        CliCommand::Profile { input, shared } => (Command::Profile, input, to_params(&shared)?),
        CliCommand::Conductance { input, shared } => {
            (Command::Conductance, input, to_params(&shared)?)
        }
        CliCommand::Certify {
            input,
            c,
            range,
            shared,
        } => {
            let mut p = to_params(&shared)?;
            p.c = Some(c);
            p.range = range;
            (Command::Certify, input, p)
        }
        CliCommand::Extract { input, shared } => (Command::Extract, input, to_params(&shared)?),
        CliCommand::Separator { input, shared } => {
            (Command::Separator, input, to_params(&shared)?)
        }
        CliCommand::Cycle {
            input,
            k,
            ell,
            shared,
        } => {
            let mut p = to_params(&shared)?;
            p.k = k;
            p.ell = ell;
            (Command::Cycle, input, p)
        }
        CliCommand::Amplify { input, shared } => (Command::Amplify, input, to_params(&shared)?),
        CliCommand::Sandwich { input, shared } => (Command::Sandwich, input, to_params(&shared)?),
    };
    // Resolve the thread count now so the report records it.
    if params.threads.is_none() {
        if let Ok(t) = std::env::var("MIXCERT_THREADS") {
            params.threads = t.parse().ok();
        }
    }
    Ok(Request {
        command,
        input: Some(input),
        edge_text: None,
        params,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let request = match build_request(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("mixcert: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(threads) = request.params.threads {
        // Ignore failure: the global pool can only be set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&request) {
        Ok(report) => {
            println!("{}", report.to_json());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("mixcert: {e}");
            ExitCode::from(2)
        }
    }
}
