//! Baseband beamformer subproblem for fixed PA positions:
//!
//! ```text
//! min_w  δ‖Gw‖₂ − Re{h̄ᴴGw}   s.t. ‖w‖₂² ≤ Pₜ, Im{h̄ᴴGw} = 0
//! ```
//!
//! Three routes are provided:
//! - [`solve_baseband_lossy`]: stationarity conditions reduced to a scalar
//!   secular equation in the ball multiplier, solved by bisection.
//! - [`solve_baseband_barrier`]: log-barrier interior point on the SOCP
//!   epigraph form with dense real data, independent of the block structure.
//! - [`solve_baseband_lossless`]: MRT, exact when every `‖g(p_m)‖₂ = 1`.

mod barrier;
mod multiplier;

pub use barrier::{solve_baseband_barrier, BarrierOptions};
pub use multiplier::solve_baseband_lossy;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::BlockResponse;
use crate::linalg::{hdot, norm, norm_sq, phasor};
use crate::{Error, Result};

/// Default absolute residual tolerance of the subproblem solvers.
pub const SOLVER_TOLERANCE: f64 = 1e-8;

/// Column norms must be within this of 1 for the lossless path.
pub const LOSSLESS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasebandBeamformer {
    pub w: Vec<Complex64>,
}

impl BasebandBeamformer {
    pub fn power(&self) -> f64 {
        norm_sq(&self.w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// `|‖w‖² − Pₜ| / Pₜ` (zero when the solution is interior).
    pub power_residual: f64,
    /// `|Im{h̄ᴴGw}| / (√Pₜ ‖Gᴴh̄‖₂)`.
    pub phase_residual: f64,
    /// Relative KKT stationarity residual, where the method exposes one.
    pub stationarity_residual: f64,
    /// Upper bound on the objective gap, for interior-point solutions.
    pub duality_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubproblemSolution {
    pub beamformer: BasebandBeamformer,
    /// `δ‖Gw‖₂ − Re{h̄ᴴGw}`.
    pub objective: f64,
    pub certificate: Certificate,
    /// False when `δ` is large enough that no beamformer keeps a positive
    /// worst-case amplitude.
    pub worst_case_positive: bool,
    pub iterations: usize,
}

impl SubproblemSolution {
    pub fn w(&self) -> &[Complex64] {
        &self.beamformer.w
    }
}

pub(crate) fn check_inputs(delta: f64, power: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::config("delta", format!("must be finite and >= 0, got {delta}")));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::config("transmit_power", format!("must be positive, got {power}")));
    }
    Ok(())
}

pub(crate) fn finish(
    h: &[Complex64],
    g: &BlockResponse,
    w: Vec<Complex64>,
    delta: f64,
    power: f64,
    stationarity_residual: f64,
    duality_gap: Option<f64>,
    worst_case_positive: bool,
    iterations: usize,
) -> SubproblemSolution {
    let gain = hdot(h, &g.apply(&w));
    let scale = power.sqrt() * norm(&g.adjoint_apply(h));
    let objective = delta * g.product_norm(&w) - gain.re;
    let power_used = norm_sq(&w);
    SubproblemSolution {
        certificate: Certificate {
            power_residual: ((power_used - power) / power).abs(),
            phase_residual: gain.im.abs() / scale,
            stationarity_residual,
            duality_gap,
        },
        beamformer: BasebandBeamformer { w },
        objective,
        worst_case_positive,
        iterations,
    }
}

/// `w = √Pₜ Gᴴh̄/‖Gᴴh̄‖₂`.
pub fn solve_baseband_lossless(
    h: &[Complex64],
    g: &BlockResponse,
    delta: f64,
    power: f64,
) -> Result<SubproblemSolution> {
    check_inputs(delta, power)?;
    for (column, norm_sq) in g.column_norms_sq().into_iter().enumerate() {
        if (norm_sq - 1.0).abs() > LOSSLESS_TOLERANCE {
            return Err(Error::NotLossless { column, norm_sq });
        }
    }
    let b = g.adjoint_apply(h);
    let nb = norm(&b);
    if !(nb > 0.0) {
        return Err(Error::DegenerateChannel("‖Gᴴh̄‖₂ = 0".into()));
    }
    let w: Vec<Complex64> = b.iter().map(|x| x * (power.sqrt() / nb)).collect();
    let positive = nb > delta;
    Ok(finish(h, g, w, delta, power, 0.0, None, positive, 0))
}

/// Picks MRT for lossless responses and the multiplier solver otherwise.
pub fn solve_baseband(
    h: &[Complex64],
    g: &BlockResponse,
    delta: f64,
    power: f64,
    lossless: bool,
    tol: f64,
) -> Result<SubproblemSolution> {
    if lossless {
        solve_baseband_lossless(h, g, delta, power)
    } else {
        solve_baseband_lossy(h, g, delta, power, tol)
    }
}

/// Global phase fix used by every route: rotate `w` so `h̄ᴴGw` is real ≥ 0.
pub fn align_phase(h: &[Complex64], g: &BlockResponse, w: &[Complex64]) -> Vec<Complex64> {
    let r = phasor(hdot(h, &g.apply(w))).conj();
    w.iter().map(|x| x * r).collect()
}
