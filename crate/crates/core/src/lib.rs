//! Tile-based 3D Gaussian splatting with mini-tile contribution-aware
//! culling, reduced-precision test arithmetic and a cycle-level model of
//! the culling and rasterization pipeline.
//!
//! The usual flow is [`scene_io`] (load or synthesize Gaussians) →
//! [`preprocess`] (project to screen space) → [`rasterizer`] (bin, sort and
//! blend, under a chosen [`rasterizer::Strategy`]) → [`pipesim`] (replay the
//! recorded per-tile traces through the hardware model).

pub mod cat;
pub mod cli;
pub mod config;
mod error;
pub mod numeric;
pub mod pipesim;
pub mod preprocess;
pub mod rasterizer;
pub mod scene_io;

pub use error::{Error, Result};
