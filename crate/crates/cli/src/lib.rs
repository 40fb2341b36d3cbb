//! Configuration-driven reproduction pipeline: simulate the reference
//! environments, render every order condition, equalize to the reference
//! and write stimuli with a metrics manifest.

pub mod config;
pub mod pipeline;

use std::path::PathBuf;

pub use config::SceneSpec;
pub use pipeline::{analyze_cmd, orientations_cmd, render_cmd, run_pipeline, simulate_cmd, Manifest, Report};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{stage} failed ({scene}): {source}")]
    Stage {
        stage: &'static str,
        scene: String,
        #[source]
        source: ambimix_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
