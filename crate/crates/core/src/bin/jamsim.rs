use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use jamsim::adversary::Strategy;
use jamsim::experiment::{self, ConfigOverrides, FlatConfig, ProtocolKind, SweepAxis, SweepSpec};
use jamsim::verify::{self, VerifyOptions};
use jamsim::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "jamsim", version, about = "Jamming-resistant MAC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration; writes trace.csv and report.json.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write every node's state per slot to nodes.csv (AntiJam only).
        #[arg(long)]
        node_snapshots: bool,
    },
    /// Sweep one parameter; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Parameter to vary: n, epsilon, gamma, p_hat or strategy.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 10)]
        reps: u32,
    },
    /// Run the analytical property suite; exits 3 on any violation.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "window-T")]
    window: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p_hat: Option<f64>,
    #[arg(long)]
    cw_min: Option<u32>,
    #[arg(long)]
    cw_max: Option<u32>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl ConfigArgs {
    fn resolve(&self) -> jamsim::Result<FlatConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::load(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            n: self.n,
            steps: self.steps,
            seed: self.seed,
            protocol: self
                .protocol
                .as_deref()
                .map(str::parse::<ProtocolKind>)
                .transpose()?,
            strategy: self
                .strategy
                .as_deref()
                .map(str::parse::<Strategy>)
                .transpose()?,
            epsilon: self.epsilon,
            window: self.window,
            gamma: self.gamma,
            p_hat: self.p_hat,
            cw_min: self.cw_min,
            cw_max: self.cw_max,
            ..Default::default()
        };
        let config = flags.apply(file.apply(FlatConfig::default()));
        config.to_sim()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> jamsim::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            node_snapshots,
        } => {
            let flat = config.resolve()?;
            if flat.protocol == ProtocolKind::AntiJam
                && flat.p_hat > jamsim::antijam::ANALYZED_P_HAT_MAX
            {
                eprintln!(
                    "note: p_hat = {} is above the analyzed cap of 1/24",
                    flat.p_hat
                );
            }
            let out = experiment::run_single(&flat, &config.out, node_snapshots)?;
            println!(
                "throughput {:.4} over {} non-jammed slots",
                out.report.throughput, out.report.non_jammed
            );
            println!(
                "wrote {} and {}",
                out.trace_path.display(),
                out.report_path.display()
            );
        }
        Command::Sweep {
            config,
            axis,
            values,
            reps,
        } => {
            let spec = SweepSpec {
                base: config.resolve()?,
                axis: axis.parse::<SweepAxis>()?,
                values,
                repetitions: reps,
                seed_base: config.seed.unwrap_or(0),
            };
            spec.validate()?;
            let rows = experiment::run_sweep(&spec)?;
            std::fs::create_dir_all(&config.out)?;
            let path = config.out.join(experiment::SWEEP_FILE);
            experiment::write_sweep_csv(&rows, BufWriter::new(File::create(&path)?))?;
            for (value, tp) in experiment::mean_throughput_by_value(&rows) {
                println!("{}={value}: mean throughput {tp:.4}", spec.axis);
            }
            println!("wrote {}", path.display());
        }
        Command::Verify { seed, steps, n } => {
            let report = verify::run(&VerifyOptions {
                seed,
                run_steps: steps,
                run_n: n,
                ..Default::default()
            });
            for check in &report.checks {
                println!("{check}");
            }
            if !report.passed() {
                return Ok(ExitCode::from(EXIT_VERIFY));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
