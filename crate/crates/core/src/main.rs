use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use moving_array::experiments::{self, ExperimentConfig, RawConfig, RATIO_MULTIPLES};
use moving_array::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "moving-array",
    version,
    about = "Near-field localization bounds and estimators for moving arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the position CRB over power, symbol count or element count.
    CrbSweep(Flags),
    /// Grid the concentrated log-likelihood of one seeded observation.
    LikelihoodMap(Flags),
    /// Monte Carlo RMSE of the ML estimator against the CRB.
    MonteCarlo(Flags),
    /// Moving-to-extended SEM bound ratio versus range.
    RatioCheck(Flags),
    /// Print the resolved configuration and aperture diagnostics.
    Describe(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML scenario file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis: power, symbols or antennas.
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    /// Architectures: moving, fixed, extended, a comma list or "all".
    #[arg(long)]
    arch: Option<String>,
    /// Waveform schemes: sem, isotropic, a comma list or "all".
    #[arg(long)]
    scheme: Option<String>,
    /// Master seed for waveforms and noise.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Random waveform realizations per isotropic moving-array row.
    #[arg(long)]
    realizations: Option<usize>,
    /// Search region as x_min,x_max,y_min,y_max in metres.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    region: Option<Vec<f64>>,
    /// Grid step in metres.
    #[arg(long)]
    resolution: Option<f64>,
    /// Skip the local refinement after the grid search.
    #[arg(long)]
    no_refine: bool,
    /// Number of elements.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Element spacing in metres.
    #[arg(long)]
    delta: Option<f64>,
    /// Platform speed in m/s.
    #[arg(long)]
    v: Option<f64>,
    /// Symbol duration in seconds.
    #[arg(long)]
    ts: Option<f64>,
    /// Number of symbols.
    #[arg(long = "l")]
    l: Option<usize>,
    /// Wavelength in metres.
    #[arg(long)]
    lambda: Option<f64>,
    /// Target range coordinate in metres.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Target along-track coordinate in metres.
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    /// Real part of the reflection coefficient.
    #[arg(long, allow_negative_numbers = true)]
    b_re: Option<f64>,
    /// Imaginary part of the reflection coefficient.
    #[arg(long, allow_negative_numbers = true)]
    b_im: Option<f64>,
    /// Transmit power in dBm.
    #[arg(long, allow_negative_numbers = true)]
    p0_dbm: Option<f64>,
    /// Noise power in dBm.
    #[arg(long, allow_negative_numbers = true)]
    sigma2_dbm: Option<f64>,
}

impl Flags {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let region = match &self.region {
            None => None,
            Some(v) => match v.as_slice() {
                &[a, b, c, d] => Some([a, b, c, d]),
                _ => return Err(Error::Config(format!("--region needs four values, got {}", v.len()))),
            },
        };
        let flags = RawConfig {
            n: self.n,
            delta: self.delta,
            v: self.v,
            ts: self.ts,
            l: self.l,
            lambda: self.lambda,
            x: self.x,
            y: self.y,
            b_re: self.b_re,
            b_im: self.b_im,
            p0_dbm: self.p0_dbm,
            sigma2_dbm: self.sigma2_dbm,
            scheme: self.scheme.clone(),
            arch: self.arch.clone(),
            axis: self.axis.clone(),
            values: self.values.clone(),
            seed: self.seed,
            out: self.out.clone(),
            trials: self.trials,
            realizations: self.realizations,
            region,
            resolution: self.resolution,
            refine: self.no_refine.then_some(false),
        };
        ExperimentConfig::from_sources(self.config.as_deref(), flags)
    }
}

fn run(command: &Command) -> Result<i32> {
    match command {
        Command::CrbSweep(flags) => {
            let cfg = flags.resolve()?;
            let rows = experiments::run_crb_sweep(&cfg)?;
            experiments::write_sweep_csv(experiments::open_output(cfg.out.as_deref())?, &cfg, &rows)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("{failed} of {} rows failed", rows.len());
            }
            Ok(if !rows.is_empty() && failed == rows.len() { 3 } else { 0 })
        }
        Command::LikelihoodMap(flags) => {
            let cfg = flags.resolve()?;
            let arch = cfg.architectures[0];
            let out = experiments::run_likelihood_map(&cfg, arch)?;
            if cfg.out.is_some() {
                println!("{}", out.summary());
            } else {
                eprintln!("{}", out.summary());
            }
            experiments::write_map_csv(experiments::open_output(cfg.out.as_deref())?, &cfg, &out)?;
            Ok(0)
        }
        Command::MonteCarlo(flags) => {
            let cfg = flags.resolve()?;
            let result = experiments::run_monte_carlo(&cfg)?;
            let line = format!(
                "rmse {:.6} m, crb rmse {:.6} m, ratio {:.4} over {} trials",
                result.rmse,
                result.crb_rmse,
                result.rmse / result.crb_rmse,
                result.trials.len()
            );
            if cfg.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
            experiments::write_monte_carlo_csv(experiments::open_output(cfg.out.as_deref())?, &cfg, &result)?;
            Ok(0)
        }
        Command::RatioCheck(flags) => {
            let cfg = flags.resolve()?;
            let multiples = cfg.values.clone().unwrap_or_else(|| RATIO_MULTIPLES.to_vec());
            let points = experiments::ratio_check(&cfg, &multiples)?;
            experiments::write_ratio_csv(experiments::open_output(cfg.out.as_deref())?, &cfg, &points)?;
            Ok(0)
        }
        Command::Describe(flags) => {
            let cfg = flags.resolve()?;
            let d = experiments::diagnostics(&cfg)?;
            for line in cfg.to_lines() {
                println!("{line}");
            }
            println!("# array_size_m = {}", d.array_size);
            println!("# platform_size_m = {}", d.platform_size);
            println!("# rayleigh_fixed_m = {}", d.rayleigh_fixed);
            if let Some(r) = d.rayleigh_extended {
                println!("# rayleigh_extended_m = {r}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(experiments::exit_code(&err) as u8)
        }
    }
}
