//! Locally supported phaseless measurements and the witness pairs that pin
//! down how stably they can be inverted.
//!
//! The library constructs measurement ensembles whose masks live on a short
//! arc of the circle (two-shot, exponentially windowed Fourier, short-time
//! Fourier, masked Fourier), builds adversarial pairs of signals that such
//! measurements can barely distinguish, and certifies the resulting lower
//! Lipschitz bounds numerically: every certificate reports the quotient
//! distance of the pair, the distance of its measurements, their ratio, and
//! the constant-free bound formula the ratio is compared against.
//!
//! Modules:
//! - [`signal`]: complex signals, elementary operators, quotient metrics;
//! - [`measurement`]: geometries, mask families, the Y and Z maps;
//! - [`adapters`]: short-time Fourier and masked Fourier realizations;
//! - [`witness`]: atoll pairs, crossings, certificates, refinement;
//! - [`bounds`]: certified bound formulas, scaling fits, noise floors;
//! - [`io`]: the JSON container for families and pairs;
//! - [`oracle`]: brute-force references the closed forms are tested against.
//!
//! Everything numeric is generic over the scalar through [`Real`]; the
//! aliases below fix the common double-precision instantiation.

// Validation uses `!(x > 0)` so NaN is rejected along with the sign, window
// predicates keep the literal 1-based form `1 + la <= b`, and the dense
// oracle kernels index rows and columns directly.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::int_plus_one,
    clippy::needless_range_loop
)]

pub mod adapters;
pub mod bounds;
pub mod error;
pub mod io;
pub mod measurement;
pub mod oracle;
pub mod scalar;
pub mod signal;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

/// Relative comparison tolerance used where the API needs a default, scaled
/// by max(1, ||x||) for size-dependent checks.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-10;

pub type Signal64 = signal::ComplexSignal<f64>;
pub type Signal32 = signal::ComplexSignal<f32>;
pub type MaskFamily64 = measurement::MaskFamily<f64>;
pub type MeasurementMatrix64 = measurement::MeasurementMatrix<f64>;
pub type WitnessPair64 = witness::WitnessPair<f64>;
pub type Certificate64 = witness::Certificate<f64>;
pub type ScalingFit64 = bounds::ScalingFit<f64>;
