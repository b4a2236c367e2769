use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entropy_lab::commands::{run_entropy, run_rate, run_verify, Outcome, RunOptions};
use entropy_lab::engine::{
    bound_bracketing_local, bound_global_uniform, bound_thm21, bound_thm31, bound_thm32, NormKind,
};
use entropy_lab::integral::{EntropyCurve, EntropyFn, PowerJ};
use entropy_lab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "entropy-lab",
    version,
    about = "Entropy integrals and maximal-inequality checks for empirical processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CurveArgs {
    /// VC-type curve parameters `K,V`; exclusive with --power.
    #[arg(long, value_parser = parse_pair, conflicts_with = "power")]
    vc: Option<(f64, f64)>,
    /// `J(δ) = C·δ^a` as `C,a`.
    #[arg(long, value_parser = parse_pair)]
    power: Option<(f64, f64)>,
}

impl CurveArgs {
    fn build(&self) -> Result<Box<dyn EntropyFn<f64>>> {
        match (self.vc, self.power) {
            (Some((k, v)), None) => Ok(Box::new(EntropyCurve::vc(k, v)?)),
            (None, Some((c, a))) => Ok(Box::new(PowerJ::new(c, a)?)),
            (None, None) => Ok(Box::new(EntropyCurve::vc(1.0, 2.0)?)),
            _ => unreachable!("clap enforces exclusivity"),
        }
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Subcommand)]
enum Command {
    /// Covering, packing and bracketing sweeps with entropy integrals.
    Entropy(Common),
    /// Monte Carlo ratio studies, structure checks and inequality checkers.
    Verify(Common),
    /// Rate-of-convergence solver and the isotonic regression experiment.
    Rate(Common),
    /// Evaluate a single maximal-inequality bound.
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
}

#[derive(Subcommand)]
enum BoundCommand {
    /// `J(1)·‖F‖`.
    Global {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        f_norm: f64,
    },
    /// Bracketing bound `J(δ)(1 + J(δ)/(δ²√n‖F‖))·‖F‖`.
    Bracketing {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        f_norm: f64,
        #[arg(long, default_value = "l2")]
        norm: String,
    },
    /// Uniform-entropy bound for envelopes bounded by 1.
    Bounded {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        f_norm: f64,
    },
    /// Polynomial-moment envelope bound.
    Moment {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        f2: f64,
        #[arg(long)]
        fmom: f64,
    },
    /// Exponential-moment envelope bound with explicit constant.
    Exponential {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

fn run_bound(b: &BoundCommand) -> Result<String> {
    let v = match b {
        BoundCommand::Global { curve, f_norm } => {
            bound_global_uniform(curve.build()?.j(1.0)?, *f_norm)?
        }
        BoundCommand::Bracketing {
            curve,
            delta,
            n,
            f_norm,
            norm,
        } => {
            let kind = match norm.as_str() {
                "l2" => NormKind::L2,
                "bernstein" => NormKind::Bernstein,
                other => {
                    return Err(Error::Config(format!(
                        "unknown norm `{other}` (l2 or bernstein)"
                    )))
                }
            };
            bound_bracketing_local(curve.build()?.j(*delta)?, *delta, *n, *f_norm, kind)?
        }
        BoundCommand::Bounded {
            curve,
            delta,
            n,
            f_norm,
        } => bound_thm21(curve.build()?.j(*delta)?, *delta, *n, *f_norm)?,
        BoundCommand::Moment {
            curve,
            delta,
            n,
            p,
            f2,
            fmom,
        } => bound_thm31(curve.build()?.as_ref(), *delta, *n, *p, *f2, *fmom)?,
        BoundCommand::Exponential {
            curve,
            delta,
            n,
            p,
            c,
        } => {
            let e = bound_thm32(curve.build()?.as_ref(), *delta, *n, *p, *c)?;
            return Ok(format!(
                "{}{}",
                e.value,
                if e.clamped {
                    " (radius clamped to 1)"
                } else {
                    ""
                }
            ));
        }
    };
    Ok(v.to_string())
}

fn run(cli: Cli) -> Result<Outcome> {
    let (common, f): (
        &Common,
        fn(&std::path::Path, &RunOptions) -> Result<Outcome>,
    ) = match &cli.command {
        Command::Entropy(c) => (c, run_entropy),
        Command::Verify(c) => (c, run_verify),
        Command::Rate(c) => (c, run_rate),
        Command::Bound { which } => {
            let line = run_bound(which)?;
            return Ok(Outcome {
                passed: true,
                files: Vec::new(),
                lines: vec![line],
            });
        }
    };
    if common.workers == 0 {
        return Err(Error::Config("--workers must be ≥ 1".into()));
    }
    // Covering searches use the global pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(common.workers)
        .build_global();
    let opts = RunOptions {
        out: common.out.clone(),
        workers: common.workers,
        seed: common.seed,
    };
    f(&common.config, &opts)
}

fn main() -> ExitCode {
    // Usage errors are configuration errors; clap's own code 2 means assertion failure here.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(o) => {
            for l in &o.lines {
                println!("{l}");
            }
            for f in &o.files {
                println!("wrote {f}");
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("entropy-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
