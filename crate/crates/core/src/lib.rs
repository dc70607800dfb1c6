//! Robust joint baseband and pinching beamforming for pinching-antenna
//! systems (PASS).
//!
//! A base station drives `M` dielectric waveguides, each of which radiates
//! through `N` pinching antennas (PAs) placed at tunable positions along it.
//! The estimated wireless channel `h̄(P)` is corrupted by an error `e(P)`
//! that is either norm-bounded (`‖e‖₂ ≤ δ`) or circularly-symmetric Gaussian
//! (`e ~ CN(0, ε²I)`). Both models reduce to maximizing
//!
//! ```text
//! |h̄ᴴ(P) G(P) w| − δ ‖G(P) w‖₂     s.t. ‖w‖₂² ≤ Pₜ, spacing, range
//! ```
//!
//! which is solved by alternating between the baseband beamformer `w`
//! ([`baseband`]) and a Gauss–Seidel one-dimensional search over PA
//! positions ([`pinching`]), coordinated by [`driver`].
//!
//! Module map:
//! - [`scene`]: deployment geometry, candidate grids, layout validation.
//! - [`channel`]: in-waveguide response, LoS channel, error sampling.
//! - [`robust`]: worst-case value, adversarial error, chance-constraint maps.
//! - [`baseband`]: lossy (conic) and lossless (MRT) `w` subproblems.
//! - [`pinching`]: per-PA subproblem and GS1D sweeps.
//! - [`driver`]: alternating optimization.
//! - [`baseline`]: fixed-antenna hybrid beamforming comparison.
//! - [`experiments`]: configuration, Monte-Carlo sweeps, CSV, validators.

pub mod baseband;
pub mod baseline;
pub mod channel;
pub mod driver;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod pinching;
pub mod robust;
pub mod scene;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
