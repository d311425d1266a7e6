//! Phase-space dynamics of a one-dimensional quartic oscillator.
//!
//! The crate compares three propagation schemes for an initial Gaussian
//! Wigner distribution, all in natural oscillator units (hbar = m = omega = 1):
//!
//! * **exact**: Schrödinger evolution in a truncated harmonic-oscillator
//!   basis, mapped to phase space by a Wigner transform ([`exact`]);
//! * **TWA**: classical transport along the characteristics of the true
//!   Hamiltonian (the truncated Wigner approximation);
//! * **vTWA**: transport along the characteristics of an effective
//!   Hamiltonian chosen so that the short-time Hilbert-Schmidt distance to
//!   the exact state is minimal ([`effective`]).
//!
//! A closed algebra of polynomial-times-Gaussian phase-space functions
//! ([`polygauss`]) verifies the defining identities of the effective
//! Hamiltonian to machine precision: the double-bracket optimality condition,
//! the correction-term equation, and the vanishing of the quantum-jump
//! distribution for the Gaussian ansatz.
//!
//! [`semiclassics`] integrates trajectory ensembles and noise-free backward
//! grid maps, [`metrics`] measures Hilbert-Schmidt distances and growth
//! exponents, and [`experiments`] orchestrates the reproducible experiment
//! pipelines behind the `vtwa` command-line tool. Every run is deterministic:
//! per-trajectory counter-based seeding and fixed-order reductions make
//! results independent of thread count.

pub mod config;
pub mod effective;
pub mod exact;
pub mod experiments;
pub mod metrics;
pub mod phase;
pub mod polygauss;
pub mod semiclassics;

pub use config::RunConfig;
pub use effective::{centroid_rhs, twa_rhs, vtwa_rhs, EffectiveParams};
pub use phase::{
    GaussianWignerState, PhaseGrid, PhasePoint, QuarticModel, TimeSeries, TrajectoryEnsemble,
    WignerField,
};
pub use polygauss::PolyGauss;
pub use semiclassics::Method;
