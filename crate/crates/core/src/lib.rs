//! Video anomaly detection with learned deep representations.
//!
//! The pipeline learns appearance, motion and joint (early-fused) patch
//! representations with stacked denoising autoencoders, scores patches with
//! one one-class SVM per representation, and combines the three anomaly
//! scores with late-fusion weights learned on the probability simplex.
//! Evaluation covers frame-level and pixel-level ROC protocols.

pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod ingest;
pub mod linalg;
pub mod ocsvm;
pub mod optflow;
pub mod pipeline;
pub mod sdae;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::PipelineKind;
