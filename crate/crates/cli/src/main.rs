use clap::{Parser, Subcommand};
use sphere_edgelab::{run, Command, RunConfig, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sphere-edgelab", version, about = "Directional wavelet edge analysis on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for any sampled study positions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Wavelet samples, coefficients and localization profile.
    SynthWavelet,
    /// Directionality functions over a γ grid.
    Chi,
    /// Leading-term residuals for a cap region.
    CapVerify,
    /// Osculating-cap, area-difference and latitude-distance checks.
    CurveVerify,
    /// Coefficient maps, sorted magnitudes and peaks.
    EdgeMap,
    /// Residual and decay study for a curved boundary.
    Residuals,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::SynthWavelet => Command::SynthWavelet,
            Cmd::Chi => Command::Chi,
            Cmd::CapVerify => Command::CapVerify,
            Cmd::CurveVerify => Command::CurveVerify,
            Cmd::EdgeMap => Command::EdgeMap,
            Cmd::Residuals => Command::Residuals,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(2);
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;

    let result = RunConfig::from_path(&config).and_then(|cfg| {
        let out = cli
            .out
            .or_else(|| cfg.config.out.as_ref().map(|o| cfg.base.join(o)))
            .unwrap_or_else(|| PathBuf::from("out"));
        run(cli.command.into(), &cfg, &RunOptions { out, seed: cli.seed })
    });
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("acceptance check failed: {}", outcome.summary);
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
