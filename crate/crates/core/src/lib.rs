//! Exact laboratory for polynomial sequences driven by differential–difference
//! recurrences of the form
//!
//! ```text
//! P_n(x) = γ(x)·P_{n-1}(x) + m·x·P'_{n-1}(x) + Σ_s w_s(n)·κ_s(x)·P_{n-s}(x)
//! ```
//!
//! The crate generates the polynomials and their coefficient triangles in exact
//! rational arithmetic, cross-checks them against closed-form exponential
//! generating functions and brute-force partition enumeration, extracts the
//! induced block-count distributions and runs the saddle-point pipeline that
//! predicts their `n/log n` mean and `n/log² n` variance.

pub mod algebra;
pub mod asymptotics;
pub mod distribution;
mod error;
pub mod families;
pub mod oracle;
pub mod recurrence;
pub mod speclang;

pub use algebra::{BivariateSeries, ExactPolynomial};
pub use error::{Error, Result};
pub use families::{catalog, FamilyDescriptor, SaddleFunction};
pub use recurrence::{LagTerm, RecurrenceSpec, TriangleRow};

/// Exact rational scalar used throughout.
pub type Rational = num_rational::BigRational;
