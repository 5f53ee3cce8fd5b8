//! Numerical checks of the inequalities behind uniqueness: the two vector
//! inequalities for `|X|^q X`, the Lipschitz bound on the second
//! fundamental form, and the weighted stability inequality on computed maps.
//!
//! Every check returns an [`InequalityMargin`] oriented so that a
//! nonnegative margin means the inequality holds.

mod sff;
mod stability;
mod vector;

use thiserror::Error;

use crate::energy::EnergyError;
use crate::geometry::GeometryError;

pub use sff::{check_sff_inequality, estimate_sff_constant, sff_margin, SFF_HEADROOM};
pub use stability::{euclidean_range_radius, random_test_field, stability_check, stability_margin, StabilityReport};
pub use vector::{
    check_lipschitz_inequality, check_monotonicity_inequality, sweep_vector_inequalities, VectorInequality,
    VectorSweepCell, SWEEP_DIMS, SWEEP_EXPONENTS,
};

/// Relative rounding allowance for inequalities that hold exactly.
pub const ROUNDING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid oracle parameter: {0}")]
    InvalidParameter(String),
    #[error("map has Euclidean range radius {range} about the center, above r = {radius}")]
    NotSmallRange { range: f64, radius: f64 },
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// `max(lhs, rhs, 1)`, the reference size for rounding allowances.
    pub scale: f64,
    /// The sampled inputs, flattened.
    pub witness: Vec<f64>,
    pub seed: u64,
}

impl InequalityMargin {
    /// `margin = rhs - lhs` with the inputs that produced it.
    pub fn new(lhs: f64, rhs: f64, witness: Vec<f64>, seed: u64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs, scale: lhs.abs().max(rhs.abs()).max(1.0), witness, seed }
    }

    /// Holds up to `ROUNDING_TOLERANCE * scale`.
    pub fn holds(&self) -> bool {
        self.margin >= -ROUNDING_TOLERANCE * self.scale
    }

    /// `margin / scale`, used to rank samples.
    pub fn relative_margin(&self) -> f64 {
        self.margin / self.scale
    }

    /// The worse of two margins by relative margin; ties keep `self`.
    pub(crate) fn worse(self, other: Self) -> Self {
        if other.relative_margin() < self.relative_margin() {
            other
        } else {
            self
        }
    }
}
