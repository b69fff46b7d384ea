use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cimba::cli::{self, CliError, CliResult, SweepAxis, SweepOutput};
use cimba::config::{Execution, ExperimentConfig};
use cimba::decoder::{DecoderChoice, LaParams};

#[derive(Parser)]
#[command(
    name = "cimba",
    version,
    about = "Compute-in-memory basecaller simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map the network and run the mesh simulator.
    Simulate(Common),
    /// Basecall reads and score them against ground truth.
    Basecall {
        #[command(flatten)]
        common: Common,
        /// Raw signal file, or a FASTA of sequences to synthesize reads from.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        execution: Option<ExecArg>,
    },
    /// Accuracy sweep along one axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        #[arg(long, value_enum)]
        execution: Option<ExecArg>,
    },
    /// Static system figures.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tokens: Option<usize>,
    #[arg(long, value_enum)]
    decoder: Option<DecoderArg>,
    #[arg(long)]
    ltp: Option<usize>,
    #[arg(long)]
    lmlp: Option<usize>,
    /// Defaults to $CIMBA_OUT_DIR, then ./out.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Full,
    Greedy,
    LookAround,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Reference,
    Analog,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

impl Common {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = cli::load_config(self.config.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tokens {
            cfg.sim.tokens = t;
        }
        let la = match cfg.decoder {
            DecoderChoice::LookAround(la) => la,
            _ => LaParams::default(),
        };
        let (t, m) = (
            self.ltp.unwrap_or(la.l_tp()),
            self.lmlp.unwrap_or(la.l_mlp()),
        );
        let la = || LaParams::new(t, m).map_err(|e| CliError::Config(e.to_string()));
        cfg.decoder = match self.decoder {
            Some(DecoderArg::Full) => DecoderChoice::Full,
            Some(DecoderArg::Greedy) => DecoderChoice::Greedy,
            Some(DecoderArg::LookAround) => DecoderChoice::LookAround(la()?),
            None if self.ltp.is_some() || self.lmlp.is_some() => DecoderChoice::LookAround(la()?),
            None => cfg.decoder,
        };
        if let DecoderChoice::LookAround(la) = cfg.decoder {
            cfg.costs.decode.cycles = la.cost().latency_cycles as u64;
        }
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        cli::output_dir(self.out_dir.as_deref())
    }
}

fn with_execution(mut cfg: ExperimentConfig, e: Option<ExecArg>) -> ExperimentConfig {
    match e {
        Some(ExecArg::Reference) => cfg.pipeline.execution = Execution::Reference,
        Some(ExecArg::Analog) => cfg.pipeline.execution = Execution::Analog,
        None => {}
    }
    cfg
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Simulate(c) => {
            let out = cli::cmd_simulate(&c.config()?, &c.out_dir())?;
            let s = &out.stats;
            println!(
                "tokens={} makespan_cycles={}",
                s.n_tokens, s.makespan_cycles
            );
            println!(
                "bases_per_s={:.0} real_time_factor={:.2}",
                s.bases_per_s, s.real_time_factor
            );
            println!("power_w={:.3} tops={:.2}", s.average_power_w, s.tops);
            println!("stats={}", out.stats_path.display());
            if let Some(p) = out.trace_path {
                println!("trace={}", p.display());
            }
        }
        Command::Basecall {
            common,
            input,
            execution,
        } => {
            let cfg = with_execution(common.config()?, execution);
            let out = cli::cmd_basecall(&cfg, input.as_deref(), &common.out_dir())?;
            println!("reads={}", out.calls.len());
            if let Some(a) = out.mean_accuracy {
                println!("mean_accuracy={a:.4}");
            }
            if let Some(c) = &out.decoder_cost {
                println!("{}", cli::decoder_cost_line(c));
            }
            println!("calls={}", out.fasta_path.display());
        }
        Command::Sweep {
            common,
            axis,
            execution,
        } => {
            let cfg = with_execution(common.config()?, execution);
            let (out, path) = cli::cmd_sweep(&cfg, axis, &common.out_dir())?;
            match &out {
                SweepOutput::LaGrid(cells) => {
                    for c in cells {
                        println!(
                            "l_tp={} l_mlp={} accuracy={:.4}",
                            c.l_tp, c.l_mlp, c.accuracy
                        );
                    }
                }
                SweepOutput::Rows(rows) => {
                    for r in rows {
                        println!("{} t={} accuracy={:.4}", r.config, r.time_s, r.accuracy);
                    }
                }
            }
            println!("csv={}", path.display());
        }
        Command::Report(c) => {
            let (_, path) = cli::cmd_report(&c.config()?, &c.out_dir())?;
            print!(
                "{}",
                std::fs::read_to_string(&path).map_err(cimba::Error::from)?
            );
            println!();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
