//! Multi-key ring watermarking for diffusion-model initial latents.
//!
//! The crate is `no_std` with `alloc`. Transcendental functions come from
//! `libm`, so results are bit-identical across targets.
//!
//! Layout:
//!
//! - [`spectral`]: centered 2-D DFT, conjugate symmetry, chessboard modulation.
//! - [`patterns`]: ring masks, ring keys, Gaussian payloads.
//! - [`imprint`]: watermark configuration, key sets and embedding.
//! - [`detect`]: evidence extraction, distances, verification and identification.
//! - [`attacks`]: latent-space distortions and the channel surrogate.
//! - [`eval`]: ROC statistics, benchmarks and distribution-shift experiments.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod attacks;
pub mod detect;
mod error;
pub mod eval;
pub mod imprint;
pub mod patterns;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
