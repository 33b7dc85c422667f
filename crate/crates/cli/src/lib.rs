//! Batch driver for the roadprior pipeline.

pub mod config;
pub mod kitti;
pub mod pipeline;
