mod commands;
mod config;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or potential text.
    Usage(String),
    /// A requested assumption or check did not hold.
    Check(String),
    Compute(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Check(m) | CliError::Compute(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<bubblekit::Error> for CliError {
    fn from(e: bubblekit::Error) -> Self {
        use bubblekit::Error as E;
        match e {
            E::Parse { .. } | E::DimensionTooSmall(_) | E::InvalidParameter(_) | E::DimensionMismatch { .. } => {
                CliError::Usage(e.to_string())
            }
            E::NoCriticalPoint | E::DegenerateCriticalPoint | E::NoCriticalScale | E::EscapedSearchBox => {
                CliError::Check(e.to_string())
            }
            _ => CliError::Compute(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bubblekit", version, about = "Multi-bubble studies for -Δu + V(y)u = u^(N+2)/(N-2)")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Sectioned `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    dim: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct PotentialArgs {
    /// `builtin:appendix_d` or polynomial text, e.g. `V = 2 - r`.
    #[arg(long)]
    potential: Option<String>,
    /// `four_dim` or `two_dim`.
    #[arg(long)]
    symmetry: Option<String>,
}

#[derive(Debug, Args, Default)]
struct QuadratureArgs {
    /// `radial_gauss`, `tensor_gauss` or `monte_carlo`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical point, degree and non-degeneracy of V.
    Audit {
        #[command(flatten)]
        potential: PotentialArgs,
        /// Sector face for the non-degeneracy matrix: `plus` or `minus`.
        #[arg(long)]
        face: Option<String>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Critical scale μ* against the ring size n.
    Scaling {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Critical points of the reduced energy for each ring size.
    Reduced {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Expansion constants A1, A2, A3.
    Constants {
        #[command(flatten)]
        quadrature: QuadratureArgs,
    },
    /// Decay of the two-ring residual norm along a ladder of μ.
    Residual {
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        quadrature: QuadratureArgs,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Number of dyadic μ multipliers, starting at 1.
        #[arg(long)]
        mu_ladder: Option<usize>,
    },
    /// Corrected Pohozaev identities on a preset pair of fields.
    Pohozaev {
        /// `gaussian-ball-3d` or `bubble-ball-5d`.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        order: Option<usize>,
    },
}

/// Loaded config plus the source text, kept for line lookups.
pub struct Loaded {
    pub config: RunConfig,
    pub text: Option<String>,
    /// True when the potential spec came from the command line.
    pub potential_from_flag: bool,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_potential(c: &mut RunConfig, p: PotentialArgs) -> bool {
    let from_flag = p.potential.is_some();
    set(&mut c.potential.spec, p.potential);
    set(&mut c.potential.symmetry, p.symmetry);
    from_flag
}

fn apply_quadrature(c: &mut RunConfig, q: QuadratureArgs) {
    set(&mut c.quadrature.method, q.method);
    set(&mut c.quadrature.order, q.order);
    set(&mut c.quadrature.samples, q.samples);
}

fn load(global: GlobalArgs) -> Result<Loaded, CliError> {
    let text = match &global.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))?),
        None => None,
    };
    let mut config = match &text {
        Some(t) => RunConfig::parse(t)?,
        None => RunConfig::default(),
    };
    set(&mut config.run.seed, global.seed);
    set(&mut config.run.out, global.out);
    set(&mut config.run.dim, global.dim);
    Ok(Loaded {
        config,
        text,
        potential_from_flag: false,
    })
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("BUBBLEKIT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Usage(format!("BUBBLEKIT_THREADS must be a positive integer (got `{v}`)")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut l = load(cli.global)?;
    let c = &mut l.config;
    match cli.command {
        Command::Audit { potential, face, m } => {
            l.potential_from_flag = apply_potential(c, potential);
            set(&mut c.audit.face, face);
            set(&mut c.audit.m, m);
            commands::audit(&l)
        }
        Command::Scaling {
            potential,
            quadrature,
            n_min,
            n_max,
        } => {
            l.potential_from_flag = apply_potential(c, potential);
            apply_quadrature(c, quadrature);
            set(&mut c.scaling.n_min, n_min);
            set(&mut c.scaling.n_max, n_max);
            commands::scaling(&l)
        }
        Command::Reduced {
            potential,
            quadrature,
            n_min,
            n_max,
        } => {
            l.potential_from_flag = apply_potential(c, potential);
            apply_quadrature(c, quadrature);
            set(&mut c.scaling.n_min, n_min);
            set(&mut c.scaling.n_max, n_max);
            commands::reduced(&l)
        }
        Command::Constants { quadrature } => {
            apply_quadrature(c, quadrature);
            commands::constants(&l)
        }
        Command::Residual {
            potential,
            quadrature,
            m,
            n,
            lambda,
            mu,
            delta,
            mu_ladder,
        } => {
            l.potential_from_flag = apply_potential(c, potential);
            apply_quadrature(c, quadrature);
            set(&mut c.ring.m, m);
            set(&mut c.ring.n, n);
            set(&mut c.ring.lambda, lambda);
            if mu.is_some() {
                c.ring.mu = mu;
            }
            if delta.is_some() {
                c.ring.delta = delta;
            }
            set(&mut c.residual.mu_ladder, mu_ladder);
            commands::residual(&l)
        }
        Command::Pohozaev { preset, order } => {
            set(&mut c.pohozaev.preset, preset);
            if order.is_some() {
                c.pohozaev.order = order;
            }
            commands::pohozaev(&l)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bubblekit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
