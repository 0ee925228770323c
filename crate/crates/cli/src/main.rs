use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minimax_cli::run::{error_report, Failure};
use minimax_cli::{builtins, execute, load_config, load_str, report, Command, RunConfig, Status};

#[derive(Parser)]
#[command(
    name = "minimax-lab",
    version,
    about = "Grid-scale minimax, multiplier-path and multiplicity solvers"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Use a named builtin fixture instead of a config file.
    #[arg(long, global = true)]
    builtin: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override `params.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// No status line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discrete minimax on a product grid.
    #[command(subcommand)]
    Minimax(MinimaxCmd),
    /// Constrained minimization along the multiplier path.
    #[command(subcommand)]
    Path(PathCmd),
    /// Radial profile analysis.
    #[command(subcommand)]
    Spherical(SphericalCmd),
    /// The θ functional and its minimality remarks.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// Searches for multiple critical points.
    #[command(subcommand)]
    Multiplicity(MultiplicityCmd),
    /// Monte Carlo checks of the integral inequalities.
    #[command(subcommand)]
    Integral(IntegralCmd),
    /// List builtin fixtures or print one as a config.
    #[command(subcommand)]
    Builtins(BuiltinsCmd),
}

#[derive(Subcommand)]
enum MinimaxCmd {
    /// sup-inf, inf-sup and the alternative.
    Check,
}

#[derive(Args, Default)]
struct RScan {
    #[arg(long)]
    r_from: Option<f64>,
    #[arg(long)]
    r_to: Option<f64>,
    /// Number of intervals; the scan has steps + 1 points.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
enum PathCmd {
    /// Minimize J on {Φ = r} through the multiplier path.
    Solve {
        #[arg(long)]
        r: Option<f64>,
    },
    /// Solve over an r-scan.
    Scan(RScan),
}

#[derive(Subcommand)]
enum SphericalCmd {
    /// Check the spherical hypotheses over an r-scan.
    Analyze(RScan),
}

#[derive(Subcommand)]
enum ThetaCmd {
    /// Compute θ over the domain.
    Compute,
}

#[derive(Subcommand)]
enum MultiplicityCmd {
    /// First ρ at which F on {Φ <= ρ} gains a second distant global minimum.
    ScanRho,
    /// First λ at which J + λΦ has two distant global minima.
    FindLambda,
    /// Point of the hull whose two largest distances to the set are closest.
    FarthestTie,
    /// Find y_μ with at least three solutions of J′(x) − μx = y_μ.
    ThreeSolutions,
}

#[derive(Args, Default)]
struct Sampling {
    /// Override `params.samples`.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum IntegralCmd {
    #[command(name = "verify-82")]
    /// Weighted integral inequality against sampled competitors.
    Verify82(Sampling),
    /// Jensen inequality for `problem.f`, a log-power member or a random suite.
    Jensen(Sampling),
    /// Logarithmic inequality for one `u` or a random suite.
    LogIneq(Sampling),
}

#[derive(Subcommand)]
enum BuiltinsCmd {
    /// Print the builtin names.
    List,
    /// Print one builtin as a JSON config.
    Show { name: String },
}

/// Subcommand flags that override `params`.
#[derive(Default)]
struct Overrides {
    r: Option<f64>,
    scan: RScan,
    samples: Option<usize>,
}

fn resolve(cmd: Cmd) -> Result<(Command, Overrides), BuiltinsCmd> {
    let mut o = Overrides::default();
    let c = match cmd {
        Cmd::Minimax(MinimaxCmd::Check) => Command::MinimaxCheck,
        Cmd::Path(PathCmd::Solve { r }) => {
            o.r = r;
            Command::PathSolve
        }
        Cmd::Path(PathCmd::Scan(s)) => {
            o.scan = s;
            Command::PathScan
        }
        Cmd::Spherical(SphericalCmd::Analyze(s)) => {
            o.scan = s;
            Command::SphericalAnalyze
        }
        Cmd::Theta(ThetaCmd::Compute) => Command::ThetaCompute,
        Cmd::Multiplicity(m) => match m {
            MultiplicityCmd::ScanRho => Command::ScanRho,
            MultiplicityCmd::FindLambda => Command::FindLambda,
            MultiplicityCmd::FarthestTie => Command::FarthestTie,
            MultiplicityCmd::ThreeSolutions => Command::ThreeSolutions,
        },
        Cmd::Integral(i) => {
            let (c, s) = match i {
                IntegralCmd::Verify82(s) => (Command::Verify82, s),
                IntegralCmd::Jensen(s) => (Command::Jensen, s),
                IntegralCmd::LogIneq(s) => (Command::LogIneq, s),
            };
            o.samples = s.samples;
            c
        }
        Cmd::Builtins(b) => return Err(b),
    };
    Ok((c, o))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn builtins_cmd(b: BuiltinsCmd) -> ExitCode {
    match b {
        BuiltinsCmd::List => {
            for name in builtins::NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        BuiltinsCmd::Show { name } => match builtins::builtin(&name) {
            Some(cfg) => {
                println!("{}", serde_json::to_string_pretty(&cfg).expect("serializable"));
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("minimax-lab: unknown builtin `{name}`");
                ExitCode::from(1)
            }
        },
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    match (&cli.config, &cli.builtin) {
        (Some(path), _) => load_config(path).map_err(Failure::from),
        (None, Some(name)) => {
            load_str(&serde_json::json!({ "problem": { "builtin": name } }).to_string()).map_err(Failure::from)
        }
        (None, None) => Err(Failure {
            kind: "io".into(),
            message: "no configuration: pass --config <file> or --builtin <name>".into(),
            context: serde_json::json!({}),
            hypothesis: false,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("minimax-lab: {e}");
            return ExitCode::from(1);
        }
    }
    let (quiet, seed, out) = (cli.quiet, cli.seed, cli.out.clone());
    let mut loaded = load(&cli);
    let (command, o) = match resolve(cli.cmd) {
        Ok(x) => x,
        Err(b) => return builtins_cmd(b),
    };

    let (status, text, out) = match &mut loaded {
        Err(f) => (Status::Error, report::render(&error_report(Some(command), f)), out),
        Ok(cfg) => {
            let p = &mut cfg.params;
            p.r = o.r.or(p.r);
            p.r_from = o.scan.r_from.or(p.r_from);
            p.r_to = o.scan.r_to.or(p.r_to);
            p.steps = o.scan.steps.or(p.steps);
            p.samples = o.samples.or(p.samples);
            p.seed = seed.or(p.seed);
            let outcome = execute(command, cfg);
            let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            (outcome.status, report::render(&outcome.report), out)
        }
    };
    if let Err(e) = emit(&text, out.as_ref()) {
        eprintln!("minimax-lab: {e}");
        return ExitCode::from(1);
    }
    if !quiet {
        eprintln!("minimax-lab: {command}: {}", status.name());
    }
    ExitCode::from(status.exit_code())
}
