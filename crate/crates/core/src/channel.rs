//! In-waveguide response, estimated wireless channel and error draws.
//!
//! Vector convention: [`ChannelEstimate::vector`] is the stacked `h̄(P)`
//! whose Hermitian transpose multiplies `G(P)w`, so the received amplitude is
//! `h̄ᴴGw = Σ_{m,n} h̄*_{m,n} g_{m,n} w_m`. The per-PA LoS coefficient (the
//! physical path gain from PA to user) is the conjugate entry, which keeps
//! the guided and free-space phases accumulating with the same sign.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg::{hdot, norm, norm_sq};
use crate::scene::{PinchingLayout, RadioConstants, SystemGeometry};
use crate::{Error, Result};

/// Per-PA power coefficient `η = 10^{−κ|p−o|/10} / N`.
pub fn attenuation_eta(p: f64, o: f64, kappa_db_per_m: f64, pas_per_waveguide: usize) -> f64 {
    10f64.powf(-kappa_db_per_m * (p - o).abs() / 10.0) / pas_per_waveguide as f64
}

/// `η^{1/2} e^{−j k_g |p − o|}` for one PA.
pub fn guided_coefficient(p: f64, o: f64, constants: &RadioConstants, n: usize) -> Complex64 {
    let eta = attenuation_eta(p, o, constants.attenuation_db_per_m, n);
    Complex64::from_polar(eta.sqrt(), -constants.guided_wavenumber * (p - o).abs())
}

/// Block-diagonal `MN × M` operator: column `m` is supported on the rows of
/// block `m` only. Used both for `G(P)` and for the fixed-array analog map.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockResponse {
    pub blocks: Vec<Vec<Complex64>>,
}

pub type WaveguideResponse = BlockResponse;

impl BlockResponse {
    pub fn columns(&self) -> usize {
        self.blocks.len()
    }

    pub fn rows(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// `G w`, an `MN`-vector.
    pub fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(w.len(), self.columns());
        self.blocks
            .iter()
            .zip(w)
            .flat_map(|(g, &wm)| g.iter().map(move |&x| x * wm))
            .collect()
    }

    /// `Gᴴ h`, an `M`-vector.
    pub fn adjoint_apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(h.len(), self.rows());
        let mut offset = 0;
        self.blocks
            .iter()
            .map(|g| {
                let v = hdot(g, &h[offset..offset + g.len()]);
                offset += g.len();
                v
            })
            .collect()
    }

    /// Squared column norms `‖g(p_m)‖²`; `GᴴG` is diagonal with these entries.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        self.blocks.iter().map(|g| norm_sq(g)).collect()
    }

    /// `‖G w‖₂` without materializing `G w`.
    pub fn product_norm(&self, w: &[Complex64]) -> f64 {
        self.column_norms_sq()
            .iter()
            .zip(w)
            .map(|(d, x)| d * x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Dense column-major copy, for solvers that do not exploit structure.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let rows = self.rows();
        let mut offset = 0;
        self.blocks
            .iter()
            .map(|g| {
                let mut col = vec![Complex64::new(0.0, 0.0); rows];
                col[offset..offset + g.len()].copy_from_slice(g);
                offset += g.len();
                col
            })
            .collect()
    }
}

pub fn waveguide_response(
    layout: &PinchingLayout,
    geometry: &SystemGeometry,
    constants: &RadioConstants,
) -> BlockResponse {
    let n = geometry.pas_per_waveguide;
    BlockResponse {
        blocks: (0..geometry.waveguides)
            .map(|m| {
                layout
                    .row(m)
                    .iter()
                    .map(|&p| guided_coefficient(p, geometry.feed_points[m], constants, n))
                    .collect()
            })
            .collect(),
    }
}

/// Generator of estimated per-PA wireless coefficients.
pub trait ChannelModel: Sync {
    /// Physical path coefficient from a radiating point to the user.
    fn coefficient(&self, user: [f64; 3], antenna: [f64; 3]) -> Complex64;
}

/// Spherical-wave line of sight, `λ/(4πr) e^{−j2πr/λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosChannel {
    pub wavelength: f64,
}

impl LosChannel {
    pub fn new(constants: &RadioConstants) -> Self {
        Self {
            wavelength: constants.wavelength,
        }
    }
}

impl ChannelModel for LosChannel {
    fn coefficient(&self, user: [f64; 3], antenna: [f64; 3]) -> Complex64 {
        let r = distance(user, antenna);
        Complex64::from_polar(
            self.wavelength / (4.0 * PI * r),
            -2.0 * PI * r / self.wavelength,
        )
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Stacked `h̄`, waveguide-major, matching the row blocks of `G`.
    pub vector: Vec<Complex64>,
}

impl ChannelEstimate {
    pub fn from_coefficients(coefficients: impl IntoIterator<Item = Complex64>) -> Self {
        Self {
            vector: coefficients.into_iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.vector[k].conj()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }

    pub fn len(&self) -> usize {
        self.vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty()
    }
}

pub fn estimated_channel(
    model: &dyn ChannelModel,
    user: [f64; 3],
    layout: &PinchingLayout,
    geometry: &SystemGeometry,
) -> ChannelEstimate {
    ChannelEstimate::from_coefficients((0..geometry.waveguides).flat_map(|m| {
        layout
            .row(m)
            .iter()
            .map(move |&p| model.coefficient(user, geometry.pa_position(m, p)))
    }))
}

pub fn estimated_channel_los(
    user: [f64; 3],
    layout: &PinchingLayout,
    geometry: &SystemGeometry,
    constants: &RadioConstants,
) -> ChannelEstimate {
    estimated_channel(&LosChannel::new(constants), user, layout, geometry)
}

/// Channel error model with absolute parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum UncertaintyModel {
    NormBounded { delta: f64 },
    Probabilistic { epsilon: f64, rho: f64 },
}

impl UncertaintyModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            UncertaintyModel::NormBounded { delta } if !(delta >= 0.0) => {
                Err(Error::config("delta", format!("must be >= 0, got {delta}")))
            }
            UncertaintyModel::Probabilistic { epsilon, .. } if !(epsilon >= 0.0) => {
                Err(Error::config("epsilon", format!("must be >= 0, got {epsilon}")))
            }
            UncertaintyModel::Probabilistic { rho, .. } if !(rho > 0.0 && rho <= 1.0) => {
                Err(Error::config("rho", format!("must lie in (0, 1], got {rho}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRealization {
    pub vector: Vec<Complex64>,
}

impl ErrorRealization {
    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    let s = std / std::f64::consts::SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Probabilistic: i.i.d. `CN(0, ε²)` entries. NormBounded: uniform over the
/// complex ball of radius `δ` (Gaussian direction, radius `δ·U^{1/(2·dim)}`).
pub fn sample_error<R: Rng + ?Sized>(
    model: &UncertaintyModel,
    dim: usize,
    rng: &mut R,
) -> ErrorRealization {
    let vector = match *model {
        UncertaintyModel::Probabilistic { epsilon, .. } => {
            (0..dim).map(|_| complex_normal(rng, epsilon)).collect()
        }
        UncertaintyModel::NormBounded { delta } => {
            let dir: Vec<Complex64> = (0..dim).map(|_| complex_normal(rng, 1.0)).collect();
            let len = norm(&dir);
            let u: f64 = rng.random();
            let radius = delta * u.powf(1.0 / (2 * dim) as f64);
            if len > 0.0 {
                dir.into_iter().map(|z| z * (radius / len)).collect()
            } else {
                dir
            }
        }
    };
    ErrorRealization { vector }
}
