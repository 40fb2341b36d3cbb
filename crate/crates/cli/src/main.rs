use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ambimix::{analyze_cmd, orientations_cmd, render_cmd, run_pipeline, simulate_cmd, PipelineError, SceneSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ambimix", version, about = "Mixed-order binaural stimulus generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scene configuration (TOML); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Direction-sampled HRTF container.
    #[arg(long, conflicts_with = "synthetic_hrtf")]
    hrtf: Option<PathBuf>,
    /// Use a synthetic HRTF of this SH order.
    #[arg(long, value_name = "N")]
    synthetic_hrtf: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the SH room responses and report room acoustics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// SH order of the exported response files.
        #[arg(long)]
        export_order: Option<usize>,
    },
    /// Render and equalize the binaural responses of every condition.
    Render {
        #[command(flatten)]
        common: Common,
    },
    /// Room parameters, SH energy per order and band spectra per condition.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Binaural responses for a set of head azimuths.
    Orientations {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "mixed")]
        condition: String,
        /// Azimuth step in degrees.
        #[arg(long, default_value_t = 1.0)]
        resolution: f64,
    },
    /// Everything: responses, stimuli, manifest and analysis.
    Run {
        #[command(flatten)]
        common: Common,
    },
}

fn scene(common: &Common) -> Result<SceneSpec, PipelineError> {
    let mut spec = match &common.config {
        Some(path) => SceneSpec::load(path)?,
        None => SceneSpec::default(),
    };
    if let Some(out) = &common.out {
        spec.output = out.clone();
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(path) = &common.hrtf {
        spec.hrtf.path = Some(path.clone());
        spec.hrtf.synthetic_order = None;
    }
    if let Some(n) = common.synthetic_hrtf {
        spec.hrtf.path = None;
        spec.hrtf.synthetic_order = Some(n);
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Simulate { common, export_order } => {
            let spec = scene(&common)?;
            let report = simulate_cmd(&spec, export_order.unwrap_or(spec.sh_order))?;
            for env in &spec.environments {
                println!(
                    "environment {}: DRR {:.2} dB, T60 {:.3} s, r_d {:.3} m",
                    env.id,
                    report.value(env.id, "drr_db").unwrap_or(f64::NAN),
                    report.value(env.id, "t60_s").unwrap_or(f64::NAN),
                    report.value(env.id, "critical_distance_m").unwrap_or(f64::NAN),
                );
            }
        }
        Command::Render { common } => {
            let spec = scene(&common)?;
            render_cmd(&spec)?;
            println!("wrote {}", spec.output.display());
        }
        Command::Analyze { common } => {
            let spec = scene(&common)?;
            print!("{}", analyze_cmd(&spec)?.to_tsv());
        }
        Command::Orientations {
            common,
            condition,
            resolution,
        } => {
            let spec = scene(&common)?;
            let files = orientations_cmd(&spec, &condition, resolution)?;
            println!("wrote {} files", files.len());
        }
        Command::Run { common } => {
            let spec = scene(&common)?;
            let start = Instant::now();
            let manifest = run_pipeline(&spec)?;
            for e in &manifest.entries {
                println!("{e}");
            }
            println!(
                "{} stimuli in {:.1} s; manifest at {}",
                manifest.entries.len(),
                start.elapsed().as_secs_f64(),
                spec.output.join("manifest.tsv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
