//! End-to-end orchestration: micro model → crack extraction → growth-law
//! fit → macro life prediction, with content-addressed caching and a run
//! manifest.

mod config;
mod manifest;
mod stages;

pub use config::{
    ConstantsSection, ExtractSection, FitSection, LoadSection, MacroSection, PipelineConfig,
    RunSection, RveSection,
};
pub use manifest::{digest_bytes, digest_file, RunManifest, StageRecord, StageStatus};
pub use stages::{
    compare_models, load_paris, run_pipeline, stage_extract, stage_fit, stage_macro, stage_md,
    standard_variants, CompareRow,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    pub fn stage(stage: &str, message: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }

    /// Process exit code per the interface contract: 2 for configuration
    /// problems, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            _ => 3,
        }
    }
}
