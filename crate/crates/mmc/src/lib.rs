//! Multi-frame video super-resolution through motion-coupled convex
//! optimization.
//!
//! The toolkit reconstructs all high-resolution frames of a clip jointly by
//! minimizing one convex energy: an L1 data term ties each frame to its
//! low-resolution observation through blur and decimation, a sparse
//! motion-corrected time derivative couples neighboring high-resolution
//! frames through bicubic warping, and an infimal-convolution regularizer
//! picks between spatial and temporal smoothing per pixel.
//!
//! Modules:
//! - [`image`], [`color`], [`flow`], [`config`]: domain types.
//! - [`interp`]: the repo-wide bicubic/Gaussian resampling convention.
//! - [`linops`]: sparse linear operators with exact adjoints.
//! - [`pdsolve`]: preconditioned primal-dual saddle-point solver.
//! - [`optflow`]: coarse-to-fine optical flow with alternating directions.
//! - [`superres`]: the joint energy, its assembly and solution.
//! - [`eval`]: PSNR/SSIM metrics and synthetic data generation.
//!
//! The `parallel` feature (on by default) runs the inner loops on rayon;
//! without it the same code paths execute sequentially and produce
//! identical results.

pub mod color;
pub mod config;
pub mod error;
pub mod eval;
pub mod flow;
pub mod image;
pub mod interp;
pub mod linops;
pub mod optflow;
mod par;
pub mod pdsolve;
pub mod sparse;
pub mod superres;

pub use config::{FlowConfig, SuperResConfig};
pub use error::{Error, Result};
pub use flow::{FlowDirection, FlowField, FlowSet, Parity};
pub use image::{clip_image, FrameSequence, Image};
