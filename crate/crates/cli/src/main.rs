use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use token_lab::figures::{run, scan_csv, write_checked, Command, ExperimentConfig};
use token_lab::Error;

/// Timing-channel capacity bounds, ordering entropy and figure data for
/// identical-token molecular channels.
#[derive(Parser)]
#[command(name = "token-lab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// key=value file; flags given on the command line take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (decimal or 0x-hex)
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output CSV path (stdout if omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Per-token and per-time capacity bounds over a ρ grid
    Bounds {
        #[arg(long)]
        rho_min: Option<String>,
        #[arg(long)]
        rho_max: Option<String>,
        #[arg(long)]
        points: Option<String>,
    },
    /// Figure data
    Figures {
        #[command(subcommand)]
        figure: Figure,
    },
    /// Ordering entropy
    Ordering {
        #[command(subcommand)]
        what: Ordering,
    },
    /// Monte Carlo ordering entropy per token against its large-M limit
    McConvergence {
        /// Comma-separated token counts
        #[arg(long)]
        m_grid: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        trials: Option<String>,
    },
    /// M·Ḡ(γ) table and convergence verdict for the guard interval
    GuardDiagnostic {
        /// First-passage law, e.g. `gamma:shape=2,rate=1` or `table:file=x.csv,tail=hyperbolic`
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        intensity: Option<String>,
        #[arg(long)]
        guard_grid: Option<String>,
        #[arg(long)]
        tolerance: Option<String>,
    },
    /// One channel use under the optimal input density; writes a token CSV
    Simulate {
        #[arg(long)]
        dist: Option<String>,
        #[arg(long)]
        tokens: Option<String>,
        #[arg(long)]
        intensity: Option<String>,
    },
}

#[derive(Subcommand)]
enum Figure {
    /// Timing-only and timing-plus-payload rates against power
    Capacities {
        /// Payload lengths
        #[arg(long)]
        k: Option<String>,
        /// Parallel timing-channel counts
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        c0: Option<String>,
        #[arg(long)]
        c1: Option<String>,
        #[arg(long)]
        dc1: Option<String>,
        #[arg(long)]
        ce: Option<String>,
        /// Alphabet size
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        power_min: Option<String>,
        #[arg(long)]
        power_max: Option<String>,
        #[arg(long)]
        power_points: Option<String>,
        /// lower, lower-simple or upper
        #[arg(long)]
        bound: Option<String>,
    },
    /// Number-channel rate against the timing lower bound
    NumberVsTiming {
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        m_max: Option<String>,
    },
}

#[derive(Subcommand)]
enum Ordering {
    /// Admissible count, exact entropy and H↑ for a schedule and its arrivals
    Exact {
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        arrivals: Option<String>,
        #[arg(long)]
        dist: Option<String>,
    },
    /// Large-M ordering entropy per token
    Asymptote {
        #[arg(long)]
        rho: Option<String>,
    },
}

type Flags = Vec<(&'static str, Option<String>)>;

fn dispatch(cmd: Cmd) -> (Command, Flags) {
    match cmd {
        Cmd::Bounds {
            rho_min,
            rho_max,
            points,
        } => (
            Command::Bounds,
            vec![
                ("rho-min", rho_min),
                ("rho-max", rho_max),
                ("points", points),
            ],
        ),
        Cmd::Figures {
            figure:
                Figure::Capacities {
                    k,
                    n,
                    c0,
                    c1,
                    dc1,
                    ce,
                    b,
                    power_min,
                    power_max,
                    power_points,
                    bound,
                },
        } => (
            Command::Capacities,
            vec![
                ("k", k),
                ("n", n),
                ("c0", c0),
                ("c1", c1),
                ("dc1", dc1),
                ("ce", ce),
                ("b", b),
                ("power-min", power_min),
                ("power-max", power_max),
                ("power-points", power_points),
                ("bound", bound),
            ],
        ),
        Cmd::Figures {
            figure: Figure::NumberVsTiming { eps, m_max },
        } => (
            Command::NumberVsTiming,
            vec![("eps", eps), ("m-max", m_max)],
        ),
        Cmd::Ordering {
            what:
                Ordering::Exact {
                    schedule,
                    arrivals,
                    dist,
                },
        } => (
            Command::OrderingExact,
            vec![
                ("schedule", schedule),
                ("arrivals", arrivals),
                ("dist", dist),
            ],
        ),
        Cmd::Ordering {
            what: Ordering::Asymptote { rho },
        } => (Command::OrderingAsymptote, vec![("rho", rho)]),
        Cmd::McConvergence {
            m_grid,
            rho,
            trials,
        } => (
            Command::McConvergence,
            vec![("m-grid", m_grid), ("rho", rho), ("trials", trials)],
        ),
        Cmd::GuardDiagnostic {
            dist,
            epsilon,
            intensity,
            guard_grid,
            tolerance,
        } => (
            Command::GuardDiagnostic,
            vec![
                ("dist", dist),
                ("epsilon", epsilon),
                ("intensity", intensity),
                ("guard-grid", guard_grid),
                ("tolerance", tolerance),
            ],
        ),
        Cmd::Simulate {
            dist,
            tokens,
            intensity,
        } => (
            Command::Simulate,
            vec![("dist", dist), ("tokens", tokens), ("intensity", intensity)],
        ),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Numeric(_) | Error::Inconsistent(_) => 4,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("TOKEN_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Parameter(format!("TOKEN_LAB_THREADS must be ≥ 1, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Parameter(e.to_string()))
}

fn execute(command: Command, common: Common, flags: Flags) -> Result<(), Error> {
    configure_threads()?;
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(seed) = &common.seed {
        cfg.set("seed", seed)?;
    }
    if let Some(out) = common.out {
        cfg.out = Some(out);
    }

    let report = run(command, &cfg)?;
    let text = report.render(&cfg.meta_line(command));
    match &cfg.out {
        Some(path) => {
            write_checked(path, &text)?;
            for line in &report.summary {
                println!("{line}");
            }
        }
        None => {
            scan_csv(&text)?;
            print!("{text}");
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = dispatch(cli.command);
    match execute(command, cli.common, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("token-lab: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
