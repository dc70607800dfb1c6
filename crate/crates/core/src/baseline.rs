//! Fixed-antenna hybrid beamforming reference.
//!
//! `MN` elements sit on a λ/2-spaced line along y, centred at `(D_x/2, 0, a)`.
//! Each of the `M` RF chains drives `N` consecutive elements through phase
//! shifters. The analog map is phase-matched to the estimated channel, which
//! makes its columns orthonormal, so the robust digital step is MRT.

use num_complex::Complex64;

use crate::baseband::solve_baseband_lossless;
use crate::channel::{BlockResponse, ChannelEstimate, ChannelModel};
use crate::linalg::phasor;
use crate::robust::{worst_case_amplitude, RobustValue};
use crate::scene::{RadioConstants, SystemGeometry};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedArray {
    pub chains: usize,
    pub elements_per_chain: usize,
    pub positions: Vec<[f64; 3]>,
}

impl FixedArray {
    pub fn new(geometry: &SystemGeometry, constants: &RadioConstants) -> Self {
        let count = geometry.pa_count();
        let pitch = constants.wavelength / 2.0;
        let centre = (count as f64 - 1.0) / 2.0;
        let positions = (0..count)
            .map(|k| [geometry.area_x / 2.0, (k as f64 - centre) * pitch, geometry.height])
            .collect();
        Self {
            chains: geometry.waveguides,
            elements_per_chain: geometry.pas_per_waveguide,
            positions,
        }
    }

    pub fn aperture(&self) -> f64 {
        match (self.positions.first(), self.positions.last()) {
            (Some(a), Some(b)) => (b[1] - a[1]).abs(),
            _ => 0.0,
        }
    }
}

/// Estimated channel over the fixed elements, same convention as PASS.
pub fn fixed_array_response(
    channel: &dyn ChannelModel,
    user: [f64; 3],
    array: &FixedArray,
) -> ChannelEstimate {
    ChannelEstimate::from_coefficients(array.positions.iter().map(|&p| channel.coefficient(user, p)))
}

/// `F_RF` with entries `e^{j∠h̄_k}/√N`, stored column-by-column.
pub fn phase_matched_analog(h: &[Complex64], chains: usize) -> Result<BlockResponse> {
    if chains == 0 || h.len() % chains != 0 {
        return Err(Error::config(
            "geometry.waveguides",
            format!("{} elements cannot be split into {chains} chains", h.len()),
        ));
    }
    let per = h.len() / chains;
    let gain = 1.0 / (per as f64).sqrt();
    Ok(BlockResponse {
        blocks: h.chunks(per).map(|c| c.iter().map(|&x| phasor(x) * gain).collect()).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct HybridDesign {
    pub analog: BlockResponse,
    pub w: Vec<Complex64>,
    pub value: RobustValue,
}

pub fn hybrid_baseline_solve(
    h: &ChannelEstimate,
    chains: usize,
    delta: f64,
    power: f64,
    noise_power: f64,
) -> Result<HybridDesign> {
    let analog = phase_matched_analog(&h.vector, chains)?;
    let solution = solve_baseband_lossless(&h.vector, &analog, delta, power)?;
    let w = solution.beamformer.w;
    let value = worst_case_amplitude(&h.vector, &analog, &w, delta, noise_power);
    Ok(HybridDesign { analog, w, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{distance, LosChannel};
    use crate::linalg::{hdot, norm};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn setup() -> (SystemGeometry, RadioConstants) {
        (
            SystemGeometry::uniform(4, 4, 50.0, 50.0, 6.0, 5.0).unwrap(),
            RadioConstants::new(28e9, 1.4, 0.08, 1e-3, 1e-12, None).unwrap(),
        )
    }

    #[test]
    fn aperture_of_sixteen_elements() {
        let (geometry, constants) = setup();
        let array = FixedArray::new(&geometry, &constants);
        assert_eq!(array.positions.len(), 16);
        assert_relative_eq!(array.aperture(), 15.0 * constants.wavelength / 2.0, max_relative = 1e-12);
        assert_relative_eq!(array.aperture(), 0.0804, max_relative = 1e-3);
    }

    #[test]
    fn element_magnitudes_follow_distance() {
        let (geometry, constants) = setup();
        let los = LosChannel::new(&constants);
        let array = FixedArray::new(&geometry, &constants);
        let user = [25.0, 0.0, 0.0];
        let h = fixed_array_response(&los, user, &array);
        for (k, p) in array.positions.iter().enumerate() {
            let r = distance(user, *p);
            assert_relative_eq!(h.vector[k].norm(), constants.wavelength / (4.0 * PI * r), max_relative = 1e-12);
            let mirror = h.vector[15 - k].norm();
            assert_relative_eq!(h.vector[k].norm(), mirror, max_relative = 1e-12);
        }
    }

    #[test]
    fn analog_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h: Vec<Complex64> = (0..16).map(|_| Complex64::new(rng.random(), rng.random::<f64>() - 0.5)).collect();
        let f = phase_matched_analog(&h, 4).unwrap();
        for _ in 0..20 {
            let w: Vec<Complex64> = (0..4).map(|_| Complex64::new(rng.random(), rng.random())).collect();
            assert_relative_eq!(f.product_norm(&w), norm(&w), max_relative = 1e-12);
        }
    }

    #[test]
    fn phase_matching_beats_random_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h: Vec<Complex64> = (0..16).map(|_| Complex64::from_polar(rng.random(), rng.random::<f64>() * TAU)).collect();
        let best = norm(&phase_matched_analog(&h, 4).unwrap().adjoint_apply(&h));
        for _ in 0..1000 {
            let alt = BlockResponse {
                blocks: (0..4)
                    .map(|_| (0..4).map(|_| Complex64::from_polar(0.5, rng.random::<f64>() * TAU)).collect())
                    .collect(),
            };
            assert!(norm(&alt.adjoint_apply(&h)) <= best + 1e-15);
        }
    }

    #[test]
    fn closed_form_amplitude() {
        let (geometry, constants) = setup();
        let los = LosChannel::new(&constants);
        let array = FixedArray::new(&geometry, &constants);
        let h = fixed_array_response(&los, [10.0, 2.0, 0.0], &array);
        let p = 1e-3;
        let zero = hybrid_baseline_solve(&h, 4, 0.0, p, 1e-12).unwrap();
        let coherent: f64 = h
            .vector
            .chunks(4)
            .map(|c| c.iter().map(|x| x.norm()).sum::<f64>().powi(2) / 4.0)
            .sum::<f64>()
            .sqrt();
        assert_relative_eq!(zero.value.perfect_amplitude, p.sqrt() * coherent, max_relative = 1e-12);
        let delta = 0.3 * h.norm();
        let robust = hybrid_baseline_solve(&h, 4, delta, p, 1e-12).unwrap();
        assert_relative_eq!(
            robust.value.worst_case_amplitude,
            p.sqrt() * (coherent - delta).max(0.0),
            max_relative = 1e-12
        );
        let gain = hdot(&h.vector, &robust.analog.apply(&robust.w));
        assert!(gain.im.abs() < 1e-12 * gain.re);
    }

    #[test]
    fn single_element_clamps() {
        let h = ChannelEstimate { vector: vec![Complex64::from_polar(2.0, 0.7)] };
        let low = hybrid_baseline_solve(&h, 1, 0.5, 4.0, 1.0).unwrap();
        assert_relative_eq!(low.value.worst_case_amplitude, 2.0 * 1.5, max_relative = 1e-12);
        let high = hybrid_baseline_solve(&h, 1, 3.0, 4.0, 1.0).unwrap();
        assert_eq!(high.value.worst_case_amplitude, 0.0);
    }

    #[test]
    fn uneven_chains_rejected() {
        let h = vec![Complex64::new(1.0, 0.0); 5];
        assert!(phase_matched_analog(&h, 2).is_err());
    }
}
