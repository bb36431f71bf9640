use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mopstar_core::cli_report::{self, Computation};
use mopstar_core::{Error, Result, StarConfig};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "mopstar", version, about = "Multiple orthogonal polynomials on a three-ray star")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Polynomials, recurrence coefficients and second-kind data.
    Compute(RunArgs),
    /// Compute, then run every verification check; exit 0 iff all acceptance checks pass.
    Verify(RunArgs),
    /// Emit plot scripts for the artifacts found in --out.
    Plot {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON or TOML configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides n_max from the config.
    #[arg(long)]
    nmax: Option<u64>,
    /// Overrides precision_bits from the config.
    #[arg(long)]
    precision: Option<u64>,
}

fn load(args: &RunArgs) -> Result<StarConfig> {
    let mut v = StarConfig::value_from_path(&args.config)?;
    let obj = v.as_object_mut().ok_or_else(|| Error::Config("configuration must be a table".into()))?;
    if let Some(n) = args.nmax {
        obj.insert("n_max".into(), Value::from(n));
    }
    if let Some(p) = args.precision {
        obj.insert("precision_bits".into(), Value::from(p));
    }
    StarConfig::from_value(&v)
}

fn run_compute(args: &RunArgs, cfg: StarConfig) -> Result<Computation> {
    let comp = cli_report::compute(&cfg)?;
    comp.write_artifacts(&args.out)?;
    Ok(comp)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Compute(args) => {
            let comp = run_compute(&args, load(&args)?)?;
            println!(
                "computed n = 0..={} at {} bits; artifacts in {}",
                comp.cfg.n_max,
                comp.cfg.precision_bits,
                args.out.display()
            );
            Ok(true)
        }
        Cmd::Verify(args) => {
            let cfg = load(&args)?;
            if cfg.n_max < cli_report::MIN_VERIFY_N {
                return Err(Error::Config(format!("verify needs n_max >= {} (got {})", cli_report::MIN_VERIFY_N, cfg.n_max)));
            }
            let comp = run_compute(&args, cfg)?;
            let v = cli_report::verify(&comp)?;
            v.write_artifacts(&args.out)?;
            print!("{}", v.report.summary());
            Ok(v.report.primary_ok())
        }
        Cmd::Plot { out } => {
            for name in cli_report::write_plot_scripts(Path::new(&out))? {
                println!("{}", out.join(name).display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MOP_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
