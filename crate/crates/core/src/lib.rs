//! Directional loudness maps of stereo signals and the directional loudness
//! distortion (DLD) between a reference and a signal under test.
//!
//! The pipeline runs each signal through a simple peripheral ear model
//! (Hann STFT, equal-ERB bands, outer/middle-ear weighting), estimates a
//! panning index for every time-frequency bin, splits the spectrum into
//! look directions with Gaussian windows, and measures the loudness of the
//! directional downmix per frame. Comparing two such maps yields the DLD.
//!
//! ```no_run
//! use dirloud::analysis::{compare_files, AnalysisConfig};
//!
//! let cfg = AnalysisConfig::default();
//! let cmp = compare_files("ref.wav".as_ref(), "sut.wav".as_ref(), &cfg, false)?;
//! println!("DLD = {}", cmp.report.dld);
//! # Ok::<(), dirloud::Error>(())
//! ```

pub mod analysis;
pub mod batch;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod export;
pub mod loudness;
pub mod panning;
pub mod peripheral;
pub mod signal_io;
pub mod synth;

pub use error::{Error, Result};
