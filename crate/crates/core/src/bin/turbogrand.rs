use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use turbogrand::config::ExperimentConfig;
use turbogrand::plot::emit_plot;
use turbogrand::sim::{run_sweep, Simulator};
use turbogrand::Result;

#[derive(Parser)]
#[command(
    name = "turbogrand",
    version,
    about = "GRAND decoders and link-level BLER sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep and write one CSV row per point.
    Sweep(Box<SweepArgs>),
    /// Plot BLER curves from sweep CSV files into an SVG.
    Plot {
        /// Sweep CSV files, one series each.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Short end-to-end checks of every decoder at high SNR.
    Selftest,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key=value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// bch127 | file:<path> | random:<n>,<k>,<seed> | uncoded:<n>
    #[arg(long)]
    code: Option<String>,
    /// bpsk | qam16
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// awgn | rayleigh | rayleigh-csi-err
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    csi_mix: Option<String>,
    /// per-symbol | block
    #[arg(long)]
    fading: Option<String>,
    /// zf | ml
    #[arg(long)]
    detector: Option<String>,
    /// hard | orbgrand | sgrand | turbo
    #[arg(long)]
    decoder: Option<String>,
    /// Pattern source inside turbo iterations: sgrand | orbgrand | hamming
    #[arg(long)]
    core: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    /// zero | zf
    #[arg(long)]
    llr_in: Option<String>,
    /// start:step:stop in dB
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    frames: Option<String>,
    #[arg(long)]
    errors: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl SweepArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("code", self.code),
            ("mod", self.modulation),
            ("channel", self.channel),
            ("csi-mix", self.csi_mix),
            ("fading", self.fading),
            ("detector", self.detector),
            ("decoder", self.decoder),
            ("core", self.core),
            ("budget", self.budget),
            ("iters", self.iters),
            ("llr-in", self.llr_in),
            ("snr", self.snr),
            ("frames", self.frames),
            ("errors", self.errors),
            ("seed", self.seed),
            ("out", self.out),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = args.into_config()?;
    println!("snr_db  frames  errors  bler        ber         queries  iters  wall_s");
    for r in run_sweep(&cfg)? {
        println!(
            "{:6.2}  {:6}  {:6}  {:<10.4e}  {:<10.4e}  {:7.1}  {:5.2}  {:6.2}",
            r.snr_db,
            r.frames,
            r.frame_errors,
            r.bler,
            r.ber,
            r.mean_queries,
            r.mean_iters,
            r.wall_s
        );
    }
    if let Some(out) = &cfg.out {
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn selftest() -> Result<bool> {
    let mut ok = true;
    for decoder in ["hard", "orbgrand", "sgrand", "turbo"] {
        let mut cfg = ExperimentConfig::default();
        cfg.set("decoder", decoder)?;
        cfg.set("channel", "awgn")?;
        cfg.set("budget", "1000")?;
        cfg.max_frames = 200;
        let r = Simulator::new(cfg)?.run_point(40.0)?;
        let pass = r.frame_errors == 0;
        ok &= pass;
        println!(
            "{} {decoder:<8} awgn 40 dB: {} errors in {} frames",
            if pass { "PASS" } else { "FAIL" },
            r.frame_errors,
            r.frames
        );
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => sweep(*args).map(|_| true),
        Command::Plot { inputs, out } => emit_plot(&inputs, &out).map(|_| {
            println!("wrote {}", out.display());
            true
        }),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
