use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cone_data::checks::Check;
use cone_data::config::RunConfig;
use cone_data::pipeline::{self, Artifacts};
use cone_data::Error;

#[derive(Parser)]
#[command(name = "cone-data", version, about = "Cone-supported vacuum initial data for the Einstein constraints")]
struct Cli {
    /// TOML run configuration; defaults apply to missing keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads, overriding `run.threads`
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the seed and its axis decay
    Seed,
    /// Kernel checks
    Kernels {
        #[command(subcommand)]
        cmd: KernelsCmd,
    },
    /// Constraint residuals of CIDF1 dumps of g and k
    Constraints {
        /// Metric dump; defaults to `<out>/g.cidf`
        #[arg(long)]
        g: Option<PathBuf>,
        /// Second fundamental form dump; defaults to `<out>/k.cidf`
        #[arg(long)]
        k: Option<PathBuf>,
    },
    /// Solve for the correction by fixed-point iteration
    Solve,
    /// Decay and sharpness diagnostics
    Diagnose {
        #[command(subcommand)]
        cmd: DiagnoseCmd,
    },
    /// Verification suite
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum KernelsCmd {
    /// Delta identities and outgoing support
    Verify,
}

#[derive(Subcommand)]
enum DiagnoseCmd {
    /// Fitted decay exponents along the axis
    Decay,
    /// Shell increments of the weighted seed norm
    Sharpness,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run every check
    All,
}

enum Failure {
    Config(String),
    Checks(usize),
    Divergence(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) => Failure::Config(e.to_string()),
            Error::Divergence { .. } | Error::BallViolation { .. } | Error::NotPositive { .. } => {
                Failure::Divergence(e.to_string())
            }
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn report(list: &[Check]) -> Result<(), Failure> {
    let failed = list.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        Err(Failure::Checks(failed))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default().resolved()?,
    };
    let threads = cli.threads.unwrap_or(cfg.run.threads);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let mut out = Artifacts::create(&cli.out)?;
    match cli.cmd {
        Cmd::Seed => {
            for line in pipeline::run_seed(&cfg, &mut out)? {
                println!("{line}");
            }
        }
        Cmd::Kernels { cmd: KernelsCmd::Verify } => {
            let list = pipeline::run_kernels_verify(&cfg, &mut out)?;
            list.iter().for_each(|c| println!("{}", c.line()));
            report(&list)?;
        }
        Cmd::Constraints { g, k } => {
            let g = g.unwrap_or_else(|| cli.out.join("g.cidf"));
            let k = k.unwrap_or_else(|| cli.out.join("k.cidf"));
            let (h, m) = pipeline::run_constraints(&cfg, &g, &k, &mut out)?;
            println!("norm_H {h:.6e} norm_M {m:.6e}");
        }
        Cmd::Solve => {
            let st = pipeline::run_solve(&cfg, &mut out, |r| {
                println!("iter {:3} update {:.4e} phi {:.4e} ratio {:.4}", r.iter, r.update_norm, r.phi_norm, r.ratio)
            })?;
            println!("{} after {} iterations", if st.converged { "converged" } else { "not converged" }, st.history.len());
        }
        Cmd::Diagnose { cmd: DiagnoseCmd::Decay } => {
            for p in pipeline::run_decay(&cfg, &mut out)? {
                if p.expected.is_nan() {
                    println!("{}: slope {:.4}", p.name, p.slope);
                } else {
                    println!("{}: slope {:.4} (expected {:.4})", p.name, p.slope, p.expected);
                }
            }
        }
        Cmd::Diagnose { cmd: DiagnoseCmd::Sharpness } => {
            for (sp, growth, decreasing) in pipeline::run_sharpness(&cfg, &mut out)? {
                println!("s' = {sp}: last/first {growth:.4e}, strictly decreasing {decreasing}");
            }
        }
        Cmd::Verify { cmd: VerifyCmd::All } => {
            let list = pipeline::run_verify(&cfg, &mut out, |c| println!("{}", c.line()))?;
            report(&list)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(3)
        }
        Err(Failure::Divergence(m)) => {
            eprintln!("{m}");
            ExitCode::from(4)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
