//! Worst-case objective, closed-form adversary and chance-constraint maps.
//!
//! For `‖e‖₂ ≤ δ`, the triangle and Cauchy–Schwarz inequalities give
//! `min |(h̄ + e)ᴴGw| = max{0, |h̄ᴴGw| − δ‖Gw‖₂}`, attained by
//! `e* = −δ (Gw/‖Gw‖₂) e^{−j∠(h̄ᴴGw)}`. For `e ~ CN(0, ε²I)`, `|eᴴGw|` is
//! Rayleigh with scale `ε‖Gw‖₂`, and the chance constraint at level `ρ` maps
//! onto the same worst-case form with `δ = ε√(−ln(1−ρ))`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::{sample_error, BlockResponse, ErrorRealization, UncertaintyModel};
use crate::linalg::{hdot, phasor};
use crate::{Error, Result};

/// Shannon rate `log₂(1 + snr)` in bit/s/Hz.
pub fn achievable_rate(snr: f64) -> f64 {
    (1.0 + snr).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustValue {
    pub perfect_amplitude: f64,
    pub penalty: f64,
    pub worst_case_amplitude: f64,
    pub worst_case_snr: f64,
    pub worst_case_ar: f64,
}

impl RobustValue {
    pub fn from_parts(perfect_amplitude: f64, penalty: f64, noise_power: f64) -> Self {
        let worst = (perfect_amplitude - penalty).max(0.0);
        let snr = worst * worst / noise_power;
        Self {
            perfect_amplitude,
            penalty,
            worst_case_amplitude: worst,
            worst_case_snr: snr,
            worst_case_ar: achievable_rate(snr),
        }
    }

    /// `|h̄ᴴGw| − δ‖Gw‖₂` before clamping at zero.
    pub fn raw_objective(&self) -> f64 {
        self.perfect_amplitude - self.penalty
    }

    pub fn perfect_ar(&self, noise_power: f64) -> f64 {
        achievable_rate(self.perfect_amplitude.powi(2) / noise_power)
    }
}

pub fn worst_case_amplitude(
    h: &[Complex64],
    g: &BlockResponse,
    w: &[Complex64],
    delta: f64,
    noise_power: f64,
) -> RobustValue {
    let perfect = hdot(h, &g.apply(w)).norm();
    RobustValue::from_parts(perfect, delta * g.product_norm(w), noise_power)
}

/// Minimizer of `|(h̄+e)ᴴGw|` over the ball, and the minimum value.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseError {
    pub error: ErrorRealization,
    /// `|(h̄ + e)ᴴGw|` at the returned error.
    pub value: f64,
    /// `|h̄ᴴGw| ≤ δ‖Gw‖₂`: the returned error nulls the gain, its norm is
    /// `|h̄ᴴGw|/‖Gw‖₂ ≤ δ`, and the worst case is 0.
    pub degenerate: bool,
}

pub fn adversarial_error(
    h: &[Complex64],
    g: &BlockResponse,
    w: &[Complex64],
    delta: f64,
) -> Result<WorstCaseError> {
    let gw = g.apply(w);
    let gw_norm = crate::linalg::norm(&gw);
    if !(gw_norm > 0.0) {
        return Err(Error::DegenerateChannel("‖Gw‖₂ = 0".into()));
    }
    let gain = hdot(h, &gw);
    let degenerate = gain.norm() <= delta * gw_norm;
    let radius = if degenerate { gain.norm() / gw_norm } else { delta };
    // eᴴGw must equal −radius‖Gw‖ e^{j∠gain}; the Hermitian product conjugates
    // the coefficient of e = k·Gw, so k carries e^{−j∠gain}.
    let rotation = phasor(gain).conj() * (-radius / gw_norm);
    let error: Vec<Complex64> = gw.iter().map(|x| x * rotation).collect();
    let value = (gain + hdot(&error, &gw)).norm();
    Ok(WorstCaseError {
        error: ErrorRealization { vector: error },
        value,
        degenerate,
    })
}

/// `δ = ε√(−ln(1−ρ))`.
pub fn delta_from_probabilistic(epsilon: f64, rho: f64) -> Result<f64> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::config("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if rho >= 1.0 {
        return Err(Error::UnboundedErrorBound(rho));
    }
    if !(rho > 0.0) {
        return Err(Error::config("rho", format!("must lie in (0, 1), got {rho}")));
    }
    Ok(epsilon * (-(-rho).ln_1p()).sqrt())
}

/// Converts any uncertainty model into the equivalent norm bound.
pub fn equivalent_delta(model: &UncertaintyModel) -> Result<f64> {
    model.validate()?;
    match *model {
        UncertaintyModel::NormBounded { delta } => Ok(delta),
        UncertaintyModel::Probabilistic { epsilon, rho } => delta_from_probabilistic(epsilon, rho),
    }
}

/// Rayleigh CDF of `|eᴴGw|` with scale `ε‖Gw‖₂`.
pub fn rayleigh_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-(x * x) / (scale * scale)).exp_m1()
    }
}

/// `Pr{|eᴴGw| ≤ |h̄ᴴGw| − Γ}`, the lower bound on `Pr{|hᴴGw| ≥ Γ}`.
pub fn nonoutage_probability(
    h: &[Complex64],
    g: &BlockResponse,
    w: &[Complex64],
    epsilon: f64,
    threshold: f64,
) -> f64 {
    let margin = hdot(h, &g.apply(w)).norm() - threshold;
    if margin < 0.0 {
        return 0.0;
    }
    rayleigh_cdf(margin, epsilon * g.product_norm(w))
}

/// `log₂(1 + Γ²/σ²)` for an amplitude threshold `Γ`.
pub fn nonoutage_ar(threshold: f64, noise_power: f64) -> f64 {
    achievable_rate(threshold * threshold / noise_power)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloNonoutage {
    /// Fraction of draws with `|(h̄+e)ᴴGw| ≥ Γ`.
    pub probability: f64,
    /// Sorted `|eᴴGw|` samples (the empirical CDF).
    pub error_magnitudes: Vec<f64>,
}

impl MonteCarloNonoutage {
    /// Kolmogorov distance between the empirical CDF and `cdf`.
    pub fn kolmogorov_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.error_magnitudes.len() as f64;
        self.error_magnitudes
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

pub fn monte_carlo_nonoutage<R: Rng + ?Sized>(
    h: &[Complex64],
    g: &BlockResponse,
    w: &[Complex64],
    epsilon: f64,
    threshold: f64,
    trials: usize,
    rng: &mut R,
) -> MonteCarloNonoutage {
    let gw = g.apply(w);
    let gain = hdot(h, &gw);
    let model = UncertaintyModel::Probabilistic { epsilon, rho: 0.5 };
    let mut hits = 0usize;
    let mut mags = Vec::with_capacity(trials);
    for _ in 0..trials {
        let e = sample_error(&model, gw.len(), rng);
        let err = hdot(&e.vector, &gw);
        if (gain + err).norm() >= threshold {
            hits += 1;
        }
        mags.push(err.norm());
    }
    mags.sort_by(f64::total_cmp);
    MonteCarloNonoutage {
        probability: hits as f64 / trials as f64,
        error_magnitudes: mags,
    }
}
