use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use radial_nls::cli::config::{PolicyName, TripleChoice};
use radial_nls::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "radnls", version, about = "Weighted Strichartz laboratory and small-data solver for radial NLS")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file and RADNLS_OUT_DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact exponent report.
    Exponents(ProblemArgs),
    /// Homogeneous ratio sweep over data families and dilations.
    StrichartzSweep(SweepArgs),
    /// Inhomogeneous ratios with refinement and rescaling checks.
    DuhamelCheck(DuhamelArgs),
    /// Picard solve with global-bound and cross-checks.
    Solve(SolveArgs),
    /// Summarize an output directory.
    Report {
        /// Directory to read; defaults to the configured output directory.
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Space dimension.
    #[arg(long)]
    n: Option<u32>,
    /// Power, exact: "11/5" or "2.2".
    #[arg(long)]
    p: Option<String>,
    /// Coupling as "re" or "re,im".
    #[arg(long, allow_hyphen_values = true, value_parser = parse_lambda)]
    lambda: Option<[f64; 2]>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Explicit 2/q0 for --policy two-over-q0.
    #[arg(long)]
    two_over_q0: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Midpoint,
    TwoOverQ0,
}

#[derive(Clone, Copy, ValueEnum)]
enum Triple {
    Primary,
    Dual,
}

#[derive(Args)]
struct GridArgs {
    /// Radial nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Radius of the computational ball.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Data family; repeat for several.
    #[arg(long = "family")]
    families: Vec<String>,
    #[arg(long, value_enum)]
    triple: Option<Triple>,
    /// Exact shift added to alpha, e.g. "1/5".
    #[arg(long, allow_hyphen_values = true)]
    alpha_shift: Option<String>,
    /// Time horizon; omitted means all of R.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    no_pointwise: bool,
    #[arg(long)]
    no_kernel: bool,
}

#[derive(Args)]
struct DuhamelArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    time_step: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long)]
    no_refine: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    family: Option<String>,
    /// Smallness bound on the data norm.
    #[arg(long)]
    delta: Option<f64>,
    /// Data norm; defaults to delta.
    #[arg(long)]
    data_norm: Option<f64>,
    /// Time horizon T.
    #[arg(long = "horizon", short = 'T')]
    horizon: Option<f64>,
    /// Radial nodes N.
    #[arg(long, short = 'N')]
    nodes: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Time step.
    #[arg(long)]
    time_step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Search for the largest contracting delta.
    #[arg(long)]
    bisect: bool,
    #[arg(long)]
    no_splitting: bool,
    #[arg(long)]
    no_doubling: bool,
}

fn parse_lambda(text: &str) -> Result<[f64; 2], String> {
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    match text.split_once(',') {
        Some((re, im)) => Ok([parse(re)?, parse(im)?]),
        None => Ok([parse(text)?, 0.0]),
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ProblemArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let p = &mut cfg.problem;
        set(&mut p.n, self.n);
        set(&mut p.p, self.p);
        set(&mut p.lambda, self.lambda);
        set(
            &mut p.policy,
            self.policy.map(|v| match v {
                Policy::Midpoint => PolicyName::Midpoint,
                Policy::TwoOverQ0 => PolicyName::TwoOverQ0,
            }),
        );
        if self.two_over_q0.is_some() {
            p.two_over_q0 = self.two_over_q0;
        }
    }
}

impl GridArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.grid.nodes, self.nodes);
        set(&mut cfg.grid.radius, self.radius);
    }
}

fn run(cli: Cli) -> radial_nls::Result<cli::Outcome> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    if let Some(dir) = cli.out {
        cfg.output_dir = dir;
    }
    match cli.command {
        Command::Exponents(args) => {
            args.apply(&mut cfg);
            cli::cmd_exponents(&cfg)
        }
        Command::StrichartzSweep(args) => {
            args.problem.apply(&mut cfg);
            args.grid.apply(&mut cfg);
            let s = &mut cfg.sweep;
            if !args.families.is_empty() {
                s.families = args.families;
            }
            set(
                &mut s.triple,
                args.triple.map(|t| match t {
                    Triple::Primary => TripleChoice::Primary,
                    Triple::Dual => TripleChoice::Dual,
                }),
            );
            set(&mut s.alpha_shift, args.alpha_shift);
            if args.horizon.is_some() {
                s.horizon = args.horizon;
            }
            s.pointwise.enabled &= !args.no_pointwise;
            s.kernel.enabled &= !args.no_kernel;
            cli::cmd_sweep(&cfg)
        }
        Command::DuhamelCheck(args) => {
            args.problem.apply(&mut cfg);
            args.grid.apply(&mut cfg);
            set(&mut cfg.duhamel.time_step, args.time_step);
            set(&mut cfg.duhamel.amplitude, args.amplitude);
            cfg.duhamel.refine &= !args.no_refine;
            cli::cmd_duhamel_check(&cfg)
        }
        Command::Solve(args) => {
            args.problem.apply(&mut cfg);
            let s = &mut cfg.solve;
            set(&mut s.family, args.family);
            if args.data_norm.is_some() {
                s.data_norm = args.data_norm;
            }
            let sv = &mut s.solver;
            set(&mut sv.delta, args.delta);
            set(&mut sv.horizon, args.horizon);
            set(&mut sv.nodes, args.nodes);
            set(&mut sv.radius, args.radius);
            set(&mut sv.time_step, args.time_step);
            set(&mut sv.tol, args.tol);
            set(&mut sv.max_iter, args.max_iter);
            s.bisect |= args.bisect;
            s.splitting_check &= !args.no_splitting;
            s.doubling_check &= !args.no_doubling;
            set(&mut cfg.seed, args.seed);
            cli::cmd_solve(&cfg)
        }
        Command::Report { dir } => cli::cmd_report(&dir.unwrap_or(cfg.output_dir)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(outcome) => {
            // a closed stdout (e.g. `| head`) must not turn into a panic
            let mut stdout = std::io::stdout().lock();
            for line in &outcome.summary {
                if writeln!(stdout, "{line}").is_err() {
                    break;
                }
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
