use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use photonic_ngrc::config::{ChipConfig, ExperimentConfig};
use photonic_ngrc::density::density;
use photonic_ngrc::experiment::{render_report, write_artifacts};
use photonic_ngrc::photonic::CouplerKind;
use photonic_ngrc::rankcheck::rank_check;
use photonic_ngrc::tasks::run_task;
use photonic_ngrc::textfmt::fmt_f64;
use photonic_ngrc::{Error, Result};

#[derive(Parser)]
#[command(name = "photonic-ngrc", version, about = "Photonic next-generation reservoir computing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coupler {
    Gaussian,
    Dft,
}

impl From<Coupler> for CouplerKind {
    fn from(c: Coupler) -> Self {
        match c {
            Coupler::Gaussian => CouplerKind::GaussianRandom,
            Coupler::Dft => CouplerKind::DftStar,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides every seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        noise_snr_db: Option<f64>,
        #[arg(long, value_enum)]
        coupler: Option<Coupler>,
        /// Output directory [default: config `output_dir`, else ./ngrc-output]
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Operations per symbol, throughput and computational density.
    Density {
        /// Input ports N (delayed inputs plus carrier).
        #[arg(long, default_value_t = 9)]
        inputs: u64,
        /// Output ports M.
        #[arg(long, default_value_t = 45)]
        outputs: u64,
        #[arg(long, default_value_t = 60.0)]
        baud_gbd: f64,
        #[arg(long, default_value_t = 2.0)]
        area_mm2: f64,
    },
    /// Numerical rank of the monomial map over a sweep of coupler seeds.
    RankCheck {
        /// Take chip settings from an experiment configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        coupler: Option<Coupler>,
        /// First seed of the sweep.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        seeds: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn set_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("--jobs: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            noise_snr_db,
            coupler,
            output,
            jobs,
        } => {
            set_jobs(jobs)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            if let Some(snr) = noise_snr_db {
                cfg.noise.snr_db = Some(snr);
            }
            if let Some(c) = coupler {
                cfg.chip.kind = c.into();
            }
            cfg.validate()?;
            let dir = output
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("ngrc-output"));
            let report = run_task(&cfg)?;
            let written = write_artifacts(&report, &dir)?;
            print!("{}", render_report(&report));
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Density {
            inputs,
            outputs,
            baud_gbd,
            area_mm2,
        } => {
            let r = density(inputs, outputs, baud_gbd, area_mm2)?;
            println!("inputs = {}", r.inputs);
            println!("outputs = {}", r.outputs);
            println!("baud_gbd = {}", fmt_f64(r.baud_gbd));
            println!("ops_per_symbol = {}", r.ops_per_symbol);
            println!("tops = {}", fmt_f64(r.tops));
            println!("area_mm2 = {}", fmt_f64(r.area_mm2));
            println!("tops_per_mm2 = {}", fmt_f64(r.tops_per_mm2));
            println!("summary: {:.1} TOPS, {:.1} TOPS/mm^2", r.tops, r.tops_per_mm2);
            Ok(())
        }
        Command::RankCheck {
            config,
            n,
            m,
            coupler,
            seed,
            seeds,
            jobs,
        } => {
            let mut chip = match config {
                Some(path) => ExperimentConfig::load(&path)?.chip,
                None => ChipConfig::default(),
            };
            chip.n = n.unwrap_or(chip.n);
            chip.m = m.unwrap_or(chip.m);
            chip.seed = seed.unwrap_or(chip.seed);
            if let Some(c) = coupler {
                chip.kind = c.into();
            }
            let report = rank_check(chip.n, chip.m, chip.kind, chip.seed, seeds, jobs)?;
            print!("{}", report.render());
            if !report.base_is_full() {
                return Err(Error::DegenerateCoupler {
                    rank: report.base.rank,
                    required: report.required,
                    attempts: 1,
                });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
