//! Standard-library companion to `semiseg-core`: plain-text file formats,
//! synthetic data generators, a wall-clock benchmark harness, and the
//! command-line interface.
//!
//! See the crate-level docs of [`semiseg_core`] for the model and decoders.

pub mod bench;
pub mod cli;
pub mod error;
pub mod formats;
pub mod synth;

pub use error::DataError;
pub use formats::ClassDictionary;

pub use semiseg_core as core;
