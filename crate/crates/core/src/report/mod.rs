//! Configuration, orchestration and serialization of analysis runs.

pub mod config;
pub mod emit;
pub mod pipeline;

pub use config::{parse_config, Analysis, AnalysisConfig};
pub use emit::{emit_csv, emit_dot, emit_json, parse_report, write_outputs};
pub use pipeline::{run_pipeline, AnalysisReport, PipelineOutput, SCHEMA_VERSION};
