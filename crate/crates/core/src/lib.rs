//! Joint temporal segmentation and classification of frame-score time series.
//!
//! The input everywhere is a [`ScoreMatrix`]: per-frame, per-class scores
//! produced by any upstream classifier. The output is a [`Segmentation`]:
//! an ordered list of `(label, start, duration)` action segments.
//!
//! The crate provides
//!
//! - [`segmental`] — segment-level energies, the classic duration-bounded
//!   segmental Viterbi decoder, a segment-count-bounded decoder that runs in
//!   `O(K·T·C²)` instead of `O(T·D·C²)`, transition/prior estimation, and an
//!   exhaustive brute-force oracle for testing,
//! - [`framewise`] — a linear frame-wise model with data, skip-frame pairwise,
//!   prior, boundary, and temporal-prior potentials, with exact Viterbi-style
//!   inference and loss augmentation,
//! - [`learning`] — max-margin (structural SVM) subgradient training with
//!   Adagrad step sizes and pluggable regularizers, plus a small recurrent
//!   baseline,
//! - [`metrics`] — segmental edit score, frame accuracy, and segment-level
//!   classification accuracy.
//!
//! The crate is `no_std` compatible (requires `alloc`); disable the default
//! `std` feature and enable `libm` to build without the standard library.
//! File formats, synthetic data generators, and the command-line interface
//! live in the companion `semiseg` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("semiseg-core requires either the `std` or the `libm` feature");

pub mod error;
pub mod framewise;
pub mod learning;
mod math;
pub mod metrics;
pub mod rng;
pub mod segmental;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    labels_to_segments, segments_to_labels, BackPointer, LabelSequence, ScoreMatrix, ScoreTable,
    Segment, Segmentation, TransitionModel,
};
