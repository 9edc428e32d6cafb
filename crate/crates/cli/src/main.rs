mod commands;
mod error;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "plsmooth", version, about = "Subdivide, approximate, smooth and audit PL maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples per simplex for constructions and membership checks.
    #[arg(long)]
    pub density: Option<usize>,
    /// Membership tolerance for audits.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Print compact JSON instead of pretty JSON.
    #[arg(long)]
    pub compact: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AuditKind {
    Subdivision,
    Covering,
    Smooth,
    Wsm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PlotKind {
    Complex,
    Subdivision,
    Covering,
    Wsm,
    Smooth,
    Singular,
}

#[derive(Subcommand)]
enum Command {
    /// Iterated barycentric subdivision of a complex.
    Subdivide {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Barycentric subdivision that leaves a subcomplex untouched.
    SubdivideMod {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Simplices generating the fixed subcomplex, e.g. `0,1;3`.
        #[arg(long)]
        keep: String,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Relative simplicial approximation of a builtin map.
    Approx {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target complex; defaults to the source.
        #[arg(long)]
        target: Option<PathBuf>,
        /// `cross_map`, `degree2_circle` or `affine`.
        #[arg(long)]
        map: String,
        #[arg(long)]
        epsilon: f64,
        /// Simplices on which the approximation must equal the map.
        #[arg(long)]
        pin: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Smooths a weakly simplicial map within a constant budget.
    Smooth {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Smooth map of a complex onto itself within epsilon of the identity.
    IdentitySmoother {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Smooth approximation of a builtin map into a target polyhedron.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Shrink-widen covering with a constant displacement budget.
    Cover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Weak retraction onto the coordinate hyperplane arrangement.
    RetractNc {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        active: usize,
        /// One value, or one per active coordinate.
        #[arg(long, default_value = "1")]
        eta: String,
        #[arg(long, default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, default_value_t = 401)]
        grid: usize,
        /// Also retract this point.
        #[arg(long)]
        at: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Lifts `(x, y1)` onto `f(x)² + y1² = y2³`.
    SingularLift {
        /// Coefficients `c0,c1,...` or terms such as `x0^2 - x1 + 1`.
        #[arg(long)]
        poly: String,
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs every check for a stored object.
    Audit {
        #[arg(long)]
        kind: AuditKind,
        #[arg(long = "in")]
        input: PathBuf,
        /// Reference map for `wsm` audits.
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        pin: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// SVG of a stored object.
    Plot {
        #[arg(long)]
        kind: PlotKind,
        /// Input JSON; for `singular` pass `--poly` instead.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> error::CliResult<u8> {
    use commands as c;
    match command {
        Command::Subdivide { input, out, times, common } => c::subdivide(&input, None, times, out.as_deref(), &common),
        Command::SubdivideMod { input, out, keep, times, common } => {
            c::subdivide(&input, Some(&keep), times, out.as_deref(), &common)
        }
        Command::Approx { input, target, map, epsilon, pin, out, common } => c::approx(
            &input,
            target.as_deref(),
            &map,
            epsilon,
            pin.as_deref(),
            out.as_deref(),
            &common,
        ),
        Command::Smooth { input, epsilon, out, svg, common } => {
            c::smooth(&input, epsilon, out.as_deref(), svg.as_deref(), &common)
        }
        Command::IdentitySmoother { input, epsilon, out, svg, common } => {
            c::identity_smoother(&input, epsilon, out.as_deref(), svg.as_deref(), &common)
        }
        Command::Pipeline { input, target, map, epsilon, out, svg, common } => {
            c::pipeline(&input, &target, &map, epsilon, out.as_deref(), svg.as_deref(), &common)
        }
        Command::Cover { input, eta, out, common } => c::cover(&input, eta, out.as_deref(), &common),
        Command::RetractNc { dim, active, eta, half_width, grid, at, common } => {
            c::retract_nc(dim, active, &eta, half_width, grid, at.as_deref(), &common)
        }
        Command::SingularLift { poly, at, half_width, grid, svg, common } => {
            c::singular_lift(&poly, at.as_deref(), half_width, grid, svg.as_deref(), &common)
        }
        Command::Audit { kind, input, map, epsilon, pin, common } => {
            c::audit(kind, &input, map.as_deref(), epsilon, pin.as_deref(), &common)
        }
        Command::Plot { kind, input, poly, out, common } => {
            c::plot(kind, input.as_deref(), poly.as_deref(), &out, &common)
        }
    }
}
