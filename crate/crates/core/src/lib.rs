//! Pedestrian detection in RGB frame sequences and multi-target tracking
//! with a probability tree over three consecutive frames.
//!
//! The flow is [`frames`] → [`detection`] → [`features`] → [`tracker`],
//! wrapped by [`pipeline::Pipeline`]. [`synth`] renders scripted scenes with
//! ground truth for evaluation.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detection;
pub mod features;
pub mod frames;
pub mod pipeline;
pub mod synth;
pub mod tracker;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frames: {0}")]
    Frames(#[from] frames::FrameError),
    #[error("detection: {0}")]
    Detection(#[from] detection::DetectionError),
    #[error("features: {0}")]
    Features(#[from] features::OutOfBounds),
    #[error("config: {0}")]
    Config(#[from] config::ConfigError),
    #[error("synth: {0}")]
    Synth(#[from] synth::SynthError),
    #[error("frames: {}: frame is {}x{} but the sequence is {}x{}", path.display(), found.0, found.1, expected.0, expected.1)]
    FrameSize {
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("io: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
