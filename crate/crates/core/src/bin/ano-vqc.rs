use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ano_vqc::cli::{self, RunConfig};
use ano_vqc::Error;

#[derive(Parser)]
#[command(
    name = "ano-vqc",
    version,
    about = "Quantum-circuit digit super-resolution"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a packed LR/HR dataset from MNIST IDX files (optionally gzipped).
    Prepare {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 3)]
        scale: usize,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output dataset file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train from a JSON run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average metrics of a checkpoint over a dataset.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Write LR, prediction and HR images as PGM files.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        count: usize,
    },
    /// Cross-check adjoint, parameter-shift and finite-difference gradients.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(args: Args) -> Result<(), Error> {
    match args.command {
        Command::Prepare {
            images,
            labels,
            scale,
            limit,
            seed,
            out,
        } => {
            let s = cli::cmd_prepare(&images, &labels, scale, limit, seed, &out)?;
            println!(
                "wrote {} samples at scale x{} to {}",
                s.samples,
                s.scale,
                out.display()
            );
        }
        Command::Train { config, seed, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let outcome = cli::cmd_train(&cfg)?;
            if let Some(last) = outcome.log_rows.last() {
                println!("{}", ano_vqc::train::EPOCH_CSV_HEADER);
                println!("{last}");
            }
            println!("checkpoint: {}", outcome.checkpoint.display());
        }
        Command::Eval {
            checkpoint,
            dataset,
        } => {
            print!("{}", cli::eval_csv(&cli::cmd_eval(&checkpoint, &dataset)?));
        }
        Command::Infer {
            checkpoint,
            dataset,
            out,
            count,
        } => {
            let files = cli::cmd_infer(&checkpoint, &dataset, &out, count)?;
            println!("wrote {} images to {}", files.len(), out.display());
        }
        Command::Gradcheck { seed } => {
            let report = cli::cmd_gradcheck(seed)?;
            print!("{}", report.summary());
            if !report.passed() {
                return Err(Error::Numerical("gradient engines disagree".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
