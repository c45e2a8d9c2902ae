//! Weak measurements on the critical transverse-field Ising chain.
//!
//! The chain is simulated as a free-fermion Gaussian state: a real
//! antisymmetric Majorana covariance matrix `Γ` that weak `σˣ` measurements
//! keep Gaussian. [`ed`] is a dense state-vector oracle for small chains,
//! [`analytics`] tabulates the closed-form predictions, and [`stats`] turns
//! entropy profiles into effective central charges and exponents.
//!
//! Numerical kernels are generic over [`scalar::Real`] (`f32`, `f64`); the
//! aliases below fix the scalar to `f64`, which is what the rest of the
//! tooling uses.

pub mod analytics;
pub mod ed;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod measurement;
pub mod pfaffian;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use gaussian::{build_ground_state, SpinInterval, StringCorrelator};
pub use measurement::{MeasurementRecord, MeasurementScheme, Outcome};
pub use stats::{EntropyProfile, EntropySample, FitResult};

/// Gaussian state in double precision.
pub type CovarianceState = gaussian::GaussianState<f64>;
/// Dense row-major matrix in double precision.
pub type Matrix = linalg::DenseMatrix<f64>;
/// Replica-limit parameters in double precision.
pub type Replica = analytics::ReplicaParams<f64>;
/// Pfaffian in sign/log form, double precision.
pub type Pfaffian = pfaffian::LogPfaffian<f64>;
