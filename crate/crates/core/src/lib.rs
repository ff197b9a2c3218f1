//! Exact signed-measure algebra for weighted sums of integer-valued blocks.
//!
//! The crate is `no_std` and only needs `alloc`. It covers four layers:
//!
//! * [`measure`]: finite atomic signed measures with convolution, measure
//!   exponentials, Kolmogorov and total-variation norms, the Lévy
//!   concentration function and characteristic functions.
//! * [`exact`]: exact laws and moment summaries of weighted blocks
//!   (i.i.d. lattice, 1-dependent latent-driver, two-runs, Bernoulli-mixture
//!   jump blocks).
//! * [`approx`]: compound Poisson, second-order signed compound Poisson and
//!   symmetric smoothing measures.
//! * [`bounds`]: hypothesis checks, bound right-hand sides with unit
//!   constants, and numeric validators for the supporting inequalities.
#![no_std]

extern crate alloc;

pub mod approx;
pub mod bounds;
mod error;
pub mod exact;
pub mod measure;

pub use error::{Error, Result};
pub use measure::{Atom, SignedMeasure, Tolerances};

pub use num_complex::Complex64;
