//! Command-line front end: argument parsing, config resolution and dispatch.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qdelab_core::models::partition::BoxConvention;
use qdelab_core::wall::assemble::Side;
use qdelab_core::wall::{Frame, OperatorKind};
use qdelab_core::{Error, Result};

use config::{Config, Format};
use output::Outcome;

const EXIT_MATH: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qdelab", version, about = "Exact q-difference equations, slope limits and wall crossing")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML config file; defaults to $QDELAB_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in model: tp0, identity, diag2 or hilb<n>.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Truncation orders as `M,N` (z-order, q-order).
    #[arg(long, global = true, value_name = "M,N")]
    orders: Option<String>,
    #[arg(long, global = true)]
    maxden: Option<i64>,
    #[arg(long, global = true)]
    dencap: Option<i64>,
    /// `a:b` for `[a,b)`, or a bracketed interval.
    #[arg(long, global = true, allow_hyphen_values = true)]
    interval: Option<String>,
    /// Slopes, comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    slope: Vec<String>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Model manifest with external wall-crossing operators.
    #[arg(long, global = true)]
    external: Option<PathBuf>,
    /// Evaluation point entries `name=value`, comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Series solution of a q-difference system with its exact residual check.
    Solve {
        /// System JSON with `var`, `L` and `M`; the model's reference equation otherwise.
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// q -> 0 limits of the monodromy at the given slopes.
    Limits,
    /// Walls found by scanning the interval.
    Walls,
    /// Wall-crossing operators at the given slopes.
    Crossing {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, value_enum, default_value_t = FrameArg::Raw)]
        frame: FrameArg,
    },
    /// The operator of O(k) assembled from wall crossings.
    Assemble {
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
        #[arg(long, value_enum, default_value_t = KindArg::B)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = FrameArg::Raw)]
        frame: FrameArg,
    },
    /// Truncated product solution of one chart.
    ProductSolution {
        #[arg(long, value_enum, default_value_t = SideArg::Theta)]
        side: SideArg,
    },
    /// Exact relations, residuals and numeric reconstruction for a model.
    Verify,
    /// Walls of the Hilbert scheme of n points.
    HilbWalls {
        #[arg(long)]
        n: u32,
    },
    /// Fractional line bundle eigenvalues on the partition basis.
    HilbBundle {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = ConvArg::Row)]
        convention: ConvArg,
        /// Also list the components for the cyclic group of this order.
        #[arg(long)]
        cyclic: Option<u32>,
    },
    /// Numeric value of an expression or of the model's monodromy.
    Eval {
        /// Rational function; the model's monodromy when absent.
        #[arg(long, allow_hyphen_values = true)]
        expr: Option<String>,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Solve { .. } => "solve",
            Cmd::Limits => "limits",
            Cmd::Walls => "walls",
            Cmd::Crossing { .. } => "crossing",
            Cmd::Assemble { .. } => "assemble",
            Cmd::ProductSolution { .. } => "product-solution",
            Cmd::Verify => "verify",
            Cmd::HilbWalls { .. } => "hilb-walls",
            Cmd::HilbBundle { .. } => "hilb-bundle",
            Cmd::Eval { .. } => "eval",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    B,
    Bstar,
}

impl From<KindArg> for OperatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::B => OperatorKind::B,
            KindArg::Bstar => OperatorKind::Bstar,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FrameArg {
    Raw,
    Normalized,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Raw => Frame::Raw,
            FrameArg::Normalized => Frame::Normalized,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Theta,
    MinusTheta,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConvArg {
    Row,
    Column,
}

fn parse_orders(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::parse(format!("--orders expects M,N, got {s:?}"));
    let (m, n) = s.split_once(',').ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

fn resolve(c: &Common) -> Result<Config> {
    let mut cfg = Config::load(c.config.as_deref())?;
    if let Some(m) = &c.model {
        cfg.model = m.clone();
    }
    if let Some(o) = &c.orders {
        (cfg.zorder, cfg.qorder) = parse_orders(o)?;
    }
    if let Some(v) = c.maxden {
        cfg.maxden = v;
    }
    if let Some(v) = c.dencap {
        cfg.dencap = v;
    }
    if let Some(v) = &c.interval {
        cfg.interval = v.clone();
    }
    if !c.slope.is_empty() {
        cfg.slopes = c.slope.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    }
    if let Some(v) = c.tol {
        cfg.tol = v;
    }
    if let Some(v) = c.format {
        cfg.format = v;
    }
    if let Some(v) = &c.external {
        cfg.external = Some(v.clone());
    }
    for kv in &c.point {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("--point expects name=value, got {kv:?}")))?;
        cfg.point.insert(k.trim().to_string(), v.trim().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: &Cmd, cfg: &Config) -> Result<Outcome> {
    match cmd {
        Cmd::Solve { system } => commands::solve(cfg, system.as_deref()),
        Cmd::Limits => commands::limits(cfg),
        Cmd::Walls => commands::walls(cfg),
        Cmd::Crossing { kind, frame } => {
            let kinds = match kind {
                Some(k) => vec![(*k).into()],
                None => vec![OperatorKind::B, OperatorKind::Bstar],
            };
            commands::crossing(cfg, &kinds, (*frame).into())
        }
        Cmd::Assemble { k, kind, frame } => commands::assemble(cfg, *k, (*kind).into(), (*frame).into()),
        Cmd::ProductSolution { side } => commands::product(
            cfg,
            match side {
                SideArg::Theta => Side::Theta,
                SideArg::MinusTheta => Side::MinusTheta,
            },
        ),
        Cmd::Verify => commands::verify(cfg),
        Cmd::HilbWalls { n } => commands::hilb_walls(cfg, *n),
        Cmd::HilbBundle { n, convention, cyclic } => {
            let conv = match convention {
                ConvArg::Row => BoxConvention::Row,
                ConvArg::Column => BoxConvention::Column,
            };
            commands::hilb_bundle(cfg, *n, conv, *cyclic)
        }
        Cmd::Eval { expr } => commands::eval(cfg, expr.as_deref()),
    }
}

/// Result of one invocation: what goes to stdout and stderr, and the exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    fn error(code: u8, msg: impl std::fmt::Display) -> Self {
        Run { code, stdout: String::new(), stderr: format!("qdelab: {msg}\n") }
    }
}

fn code_for(e: &Error) -> u8 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_MATH
    }
}

/// Parses `args` (program name first) and runs the subcommand. With `--out`
/// the report goes to the file and stdout stays empty.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Run { code: EXIT_INPUT, stdout: String::new(), stderr: text }
            } else {
                Run { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    // configuration problems are input errors whatever their kind
    let cfg = match resolve(&cli.common) {
        Ok(c) => c,
        Err(e) => return Run::error(EXIT_INPUT, e),
    };
    let outcome = match dispatch(&cli.cmd, &cfg) {
        Ok(o) => o,
        Err(e) => return Run::error(code_for(&e), e),
    };
    let text = match output::render(cli.cmd.name(), &cfg, &outcome) {
        Ok(t) => t,
        Err(e) => return Run::error(code_for(&e), e),
    };
    let stdout = match &cli.common.out {
        Some(p) => match std::fs::write(p, &text) {
            Ok(()) => String::new(),
            Err(e) => return Run::error(EXIT_INPUT, format!("{}: {e}", p.display())),
        },
        None => text,
    };
    match &outcome.failure {
        Some(msg) => Run { code: EXIT_MATH, stdout, stderr: format!("qdelab: {msg}\n") },
        None => Run { code: 0, stdout, stderr: String::new() },
    }
}

