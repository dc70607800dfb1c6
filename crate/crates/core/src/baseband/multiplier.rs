//! With `b = Gᴴh̄`, `β = |b|` and `d_m = ‖g(p_m)‖₂²` (`GᴴG = diag(d)`), the
//! optimal `w` has `w_m = e^{j∠b_m} x_m` for a real `x ≥ 0` maximizing
//! `βᵀx − δ‖D^{1/2}x‖₂` on `‖x‖₂² = Pₜ`. Stationarity gives
//! `x_m ∝ β_m / (d_m + r)` where `r` solves
//!
//! ```text
//! φ(r) = Σ d_m β_m² / (d_m + r)² = δ²,   r > −min d_m.
//! ```
//!
//! `φ` is strictly decreasing on that interval, so the root is unique and
//! bisection converges. The attained value is `ν Pₜ` with `ν = r δ / s`,
//! so the worst case is positive iff `r > 0`; otherwise the same point is
//! the best full-power beamformer of the unclamped objective.

use num_complex::Complex64;

use super::{check_inputs, finish, SubproblemSolution};
use crate::channel::BlockResponse;
use crate::linalg::phasor;
use crate::{Error, Result};

const MAX_BISECTIONS: usize = 2000;

pub fn solve_baseband_lossy(
    h: &[Complex64],
    g: &BlockResponse,
    delta: f64,
    power: f64,
    tol: f64,
) -> Result<SubproblemSolution> {
    check_inputs(delta, power)?;
    let b = g.adjoint_apply(h);
    let beta: Vec<f64> = b.iter().map(|z| z.norm()).collect();
    let d = g.column_norms_sq();
    if beta.iter().all(|&x| !(x > 0.0)) {
        return Err(Error::DegenerateChannel("‖Gᴴh̄‖₂ = 0".into()));
    }

    let (mut x, r, iterations) = if delta == 0.0 {
        (beta.clone(), f64::INFINITY, 0)
    } else {
        let phi = |r: f64| -> f64 {
            beta.iter()
                .zip(&d)
                .filter(|(b, _)| **b > 0.0)
                .map(|(b, d)| d * b * b / ((d + r) * (d + r)))
                .sum()
        };
        let target = delta * delta;
        let mut lo = -beta
            .iter()
            .zip(&d)
            .filter(|(b, _)| **b > 0.0)
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        let mut hi = beta
            .iter()
            .zip(&d)
            .map(|(b, d)| d * b * b)
            .sum::<f64>()
            .sqrt()
            / delta;
        let mut iterations = 0;
        while iterations < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let r = hi;
        let x = beta
            .iter()
            .zip(&d)
            .map(|(b, d)| if *b > 0.0 { b / (d + r) } else { 0.0 })
            .collect();
        (x, r, iterations)
    };

    let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut x {
        *v *= power.sqrt() / len;
    }

    let s = x.iter().zip(&d).map(|(x, d)| d * x * x).sum::<f64>().sqrt();
    let linear: f64 = beta.iter().zip(&x).map(|(b, x)| b * x).sum();
    let nu = (linear - delta * s) / power;
    let beta_max = beta.iter().cloned().fold(0.0, f64::max);
    let stationarity = beta
        .iter()
        .zip(&x)
        .zip(&d)
        .map(|((b, x), d)| (b - x * (delta * d / s + nu)).abs())
        .fold(0.0, f64::max)
        / beta_max;
    if !(stationarity <= tol) {
        return Err(Error::SolverNonConvergence {
            iterations,
            residual: stationarity,
        });
    }

    let w = b.iter().zip(&x).map(|(bm, xm)| phasor(*bm) * *xm).collect();
    Ok(finish(h, g, w, delta, power, stationarity, None, r > 0.0, iterations))
}
