//! Experiment runner for constellation non-Gaussianity sweeps: resolves a
//! configuration from flags and/or JSON, computes figure data through
//! `ng-core`, and emits deterministic CSV (and PGM region maps).

// Parameter guards use `!(x >= 0.0)` so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod pgm;
pub mod table;
