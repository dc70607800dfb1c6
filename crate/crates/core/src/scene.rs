//! Deployment geometry, PA position constraints and candidate grids.
//!
//! Waveguides run parallel to the x-axis at height `a`, uniformly spaced
//! along y. Feed points sit at `o_m = 0`, so waveguide `m` spans
//! `x ∈ [0, L_m]`. A [`PinchingLayout`] stores only the x-coordinate of every
//! PA; the full 3-D position is `[p_{m,n}, y_m, a]`.

use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::experiments::config::ScenarioConfig;
use crate::{Error, Result};

/// Free-space propagation speed used for the carrier wavelength.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Absolute slack (metres) tolerated by [`validate_layout`].
pub const LAYOUT_TOLERANCE: f64 = 1e-12;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadioConstants {
    pub carrier_frequency: f64,
    pub wavelength: f64,
    pub effective_refractive_index: f64,
    pub guided_wavelength: f64,
    pub guided_wavenumber: f64,
    /// Average in-waveguide attenuation κ in dB/m.
    pub attenuation_db_per_m: f64,
    pub transmit_power: f64,
    pub noise_power: f64,
    pub min_spacing: f64,
}

impl RadioConstants {
    /// Derives λ, λ_g and k_g from the carrier. `min_spacing` defaults to λ/2.
    pub fn new(
        carrier_frequency: f64,
        effective_refractive_index: f64,
        attenuation_db_per_m: f64,
        transmit_power: f64,
        noise_power: f64,
        min_spacing: Option<f64>,
    ) -> Result<Self> {
        positive("carrier_frequency_hz", carrier_frequency)?;
        if !(effective_refractive_index >= 1.0) || !effective_refractive_index.is_finite() {
            return Err(Error::config(
                "effective_refractive_index",
                format!("must be finite and >= 1, got {effective_refractive_index}"),
            ));
        }
        if !(attenuation_db_per_m >= 0.0) || !attenuation_db_per_m.is_finite() {
            return Err(Error::config(
                "kappa",
                format!("must be finite and >= 0, got {attenuation_db_per_m}"),
            ));
        }
        positive("pt_dbm", transmit_power)?;
        positive("noise_dbm", noise_power)?;
        let wavelength = SPEED_OF_LIGHT / carrier_frequency;
        let min_spacing = min_spacing.unwrap_or(wavelength / 2.0);
        positive("min_spacing_m", min_spacing)?;
        let guided_wavelength = wavelength / effective_refractive_index;
        Ok(Self {
            carrier_frequency,
            wavelength,
            effective_refractive_index,
            guided_wavelength,
            guided_wavenumber: 2.0 * std::f64::consts::PI / guided_wavelength,
            attenuation_db_per_m,
            transmit_power,
            noise_power,
            min_spacing,
        })
    }

    pub fn is_lossless(&self) -> bool {
        self.attenuation_db_per_m == 0.0
    }

    pub fn with_attenuation(mut self, kappa: f64) -> Self {
        self.attenuation_db_per_m = kappa;
        self
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {value}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemGeometry {
    pub waveguides: usize,
    pub pas_per_waveguide: usize,
    pub waveguide_lengths: Vec<f64>,
    pub feed_points: Vec<f64>,
    pub height: f64,
    pub area_x: f64,
    pub area_y: f64,
    pub waveguide_spacing: f64,
    pub waveguide_y: Vec<f64>,
}

impl SystemGeometry {
    /// Equal-length waveguides fed at `x = 0` and spread uniformly over the
    /// user area's y-extent (`d = D_y/(M−1)`, or a single waveguide at `y = 0`).
    pub fn uniform(
        waveguides: usize,
        pas_per_waveguide: usize,
        waveguide_length: f64,
        area_x: f64,
        area_y: f64,
        height: f64,
    ) -> Result<Self> {
        if waveguides == 0 {
            return Err(Error::config("waveguides", "must be at least 1"));
        }
        if pas_per_waveguide == 0 {
            return Err(Error::config("pas_per_waveguide", "must be at least 1"));
        }
        positive("waveguide_length_m", waveguide_length)?;
        positive("area_x_m", area_x)?;
        positive("area_y_m", area_y)?;
        positive("height_m", height)?;
        let (spacing, ys) = if waveguides > 1 {
            let d = area_y / (waveguides - 1) as f64;
            let ys = (0..waveguides)
                .map(|m| -area_y / 2.0 + m as f64 * d)
                .collect();
            (d, ys)
        } else {
            (0.0, vec![0.0])
        };
        Ok(Self {
            waveguides,
            pas_per_waveguide,
            waveguide_lengths: vec![waveguide_length; waveguides],
            feed_points: vec![0.0; waveguides],
            height,
            area_x,
            area_y,
            waveguide_spacing: spacing,
            waveguide_y: ys,
        })
    }

    pub fn pa_count(&self) -> usize {
        self.waveguides * self.pas_per_waveguide
    }

    pub fn pa_position(&self, m: usize, x: f64) -> [f64; 3] {
        [x, self.waveguide_y[m], self.height]
    }

    /// Uniform user draw over `[0, D_x] × [−D_y/2, D_y/2]` at ground level.
    pub fn sample_user<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        let x = rng.random::<f64>() * self.area_x;
        let y = (rng.random::<f64>() - 0.5) * self.area_y;
        [x, y, 0.0]
    }
}

/// Builds the geometry and radio constants described by a scenario file.
pub fn build_geometry(config: &ScenarioConfig) -> Result<(SystemGeometry, RadioConstants)> {
    let g = &config.geometry;
    let geometry = SystemGeometry::uniform(
        g.waveguides,
        g.pas_per_waveguide,
        g.waveguide_length_m,
        g.area_x_m,
        g.area_y_m,
        g.height_m,
    )?;
    let r = &config.radio;
    let constants = RadioConstants::new(
        r.carrier_frequency_hz,
        r.effective_refractive_index,
        r.kappa,
        dbm_to_watts(r.pt_dbm),
        dbm_to_watts(r.noise_dbm),
        r.min_spacing_m,
    )?;
    Ok((geometry, constants))
}

/// M×N matrix of PA x-coordinates, stored waveguide-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchingLayout {
    waveguides: usize,
    per_waveguide: usize,
    positions: Vec<f64>,
}

impl PinchingLayout {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let waveguides = rows.len();
        let per_waveguide = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == per_waveguide),
            "ragged layout rows"
        );
        Self {
            waveguides,
            per_waveguide,
            positions: rows.into_iter().flatten().collect(),
        }
    }

    pub fn waveguides(&self) -> usize {
        self.waveguides
    }

    pub fn per_waveguide(&self) -> usize {
        self.per_waveguide
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.positions[m * self.per_waveguide + n]
    }

    pub fn set(&mut self, m: usize, n: usize, x: f64) {
        self.positions[m * self.per_waveguide + n] = x;
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.positions[m * self.per_waveguide..(m + 1) * self.per_waveguide]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.waveguides).map(|m| self.row(m).to_vec()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ActivationMode {
    /// Continuous activation approximated by `samples` uniform grid points.
    Continuous { samples: usize },
    /// A fixed set of `positions` pre-configured activation points.
    Discrete { positions: usize },
}

impl ActivationMode {
    pub fn count(&self) -> usize {
        match *self {
            ActivationMode::Continuous { samples } => samples,
            ActivationMode::Discrete { positions } => positions,
        }
    }
}

/// Uniform grid `o_m + i·δ_m`, `i = 0..count`, covering `[o_m, o_m + L_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub waveguide: usize,
    pub mode: ActivationMode,
    pub origin: f64,
    pub length: f64,
    pub spacing: f64,
    count: usize,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn offset(&self, i: usize) -> f64 {
        debug_assert!(i < self.count);
        self.origin + self.length * (i as f64 / (self.count - 1) as f64)
    }

    /// Grid index closest to `x`, ties to the lower index.
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.origin) / self.spacing).clamp(0.0, (self.count - 1) as f64);
        let lo = t.floor() as usize;
        if lo + 1 < self.count && (self.offset(lo + 1) - x).abs() < (x - self.offset(lo)).abs() {
            lo + 1
        } else {
            lo
        }
    }

    /// Indices `⌊(p−o−Δ)/δ⌋ ..= ⌈(p−o+Δ)/δ⌉` clamped to the grid, or `None`
    /// when the bracket lies entirely outside it.
    pub fn bracket(&self, p: f64, min_spacing: f64) -> Option<RangeInclusive<usize>> {
        let lo = ((p - self.origin - min_spacing) / self.spacing).floor();
        let hi = ((p - self.origin + min_spacing) / self.spacing).ceil();
        let last = (self.count - 1) as f64;
        if hi < 0.0 || lo > last {
            return None;
        }
        Some(lo.max(0.0) as usize..=hi.min(last) as usize)
    }
}

pub fn candidate_set(
    geometry: &SystemGeometry,
    m: usize,
    mode: ActivationMode,
) -> Result<CandidateSet> {
    let count = mode.count();
    if count < 2 {
        return Err(Error::Discretization(count));
    }
    let length = geometry.waveguide_lengths[m];
    Ok(CandidateSet {
        waveguide: m,
        mode,
        origin: geometry.feed_points[m],
        length,
        spacing: length / (count - 1) as f64,
        count,
    })
}

pub fn candidate_sets(geometry: &SystemGeometry, mode: ActivationMode) -> Result<Vec<CandidateSet>> {
    (0..geometry.waveguides)
        .map(|m| candidate_set(geometry, m, mode))
        .collect()
}

/// Which other PAs on the waveguide contribute exclusion brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionPolicy {
    /// Only PAs `n' < n`, i.e. those already updated earlier in a sweep.
    Predecessors,
    /// Every other PA `n' ≠ n` on the same waveguide.
    #[default]
    AllOthers,
}

/// Exclusion brackets of PA `(m, n)` as sorted, merged index ranges.
pub fn exclusion_ranges(
    layout: &PinchingLayout,
    m: usize,
    n: usize,
    cand: &CandidateSet,
    min_spacing: f64,
    policy: ExclusionPolicy,
) -> Vec<RangeInclusive<usize>> {
    let others = match policy {
        ExclusionPolicy::Predecessors => 0..n,
        ExclusionPolicy::AllOthers => 0..layout.per_waveguide(),
    };
    let mut ranges: Vec<_> = others
        .filter(|&k| k != n)
        .filter_map(|k| cand.bracket(layout.get(m, k), min_spacing))
        .collect();
    ranges.sort_by_key(|r| *r.start());
    let mut merged: Vec<RangeInclusive<usize>> = Vec::with_capacity(ranges.len());
    for r in ranges {
        match merged.last_mut() {
            Some(last) if *r.start() <= *last.end() + 1 => {
                if r.end() > last.end() {
                    *last = *last.start()..=*r.end();
                }
            }
            _ => merged.push(r),
        }
    }
    merged
}

/// The index set Î_m for PA `(m, n)`.
pub fn excluded_indices(
    layout: &PinchingLayout,
    m: usize,
    n: usize,
    cand: &CandidateSet,
    min_spacing: f64,
    policy: ExclusionPolicy,
) -> Vec<usize> {
    exclusion_ranges(layout, m, n, cand, min_spacing, policy)
        .into_iter()
        .flatten()
        .collect()
}

/// Random feasible layout by sorted gap sampling: draw `N` offsets in
/// `[0, L_m − (N−1)Δ]`, sort, then insert the mandatory `Δ` gaps.
pub fn random_initial_layout<R: Rng + ?Sized>(
    geometry: &SystemGeometry,
    min_spacing: f64,
    rng: &mut R,
) -> Result<PinchingLayout> {
    let n = geometry.pas_per_waveguide;
    let mut rows = Vec::with_capacity(geometry.waveguides);
    for m in 0..geometry.waveguides {
        let length = geometry.waveguide_lengths[m];
        let slack = length - (n - 1) as f64 * min_spacing;
        if slack < 0.0 {
            return Err(Error::Infeasible(format!(
                "{n} PAs with spacing {min_spacing} m do not fit on waveguide {m} of length {length} m"
            )));
        }
        let mut draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * slack).collect();
        draws.sort_by(f64::total_cmp);
        let origin = geometry.feed_points[m];
        rows.push(
            draws
                .into_iter()
                .enumerate()
                .map(|(i, u)| (origin + u + i as f64 * min_spacing).min(origin + length))
                .collect(),
        );
    }
    Ok(PinchingLayout::from_rows(rows))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    OutOfRange {
        m: usize,
        n: usize,
        offset: f64,
        length: f64,
    },
    Spacing {
        m: usize,
        n: usize,
        other: usize,
        distance: f64,
        min_spacing: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OutOfRange { m, n, offset, length } => {
                write!(f, "PA ({m},{n}) offset {offset} m outside [0, {length}] m")
            }
            Violation::Spacing { m, n, other, distance, min_spacing } => write!(
                f,
                "PAs ({m},{n}) and ({m},{other}) are {distance} m apart, below {min_spacing} m"
            ),
        }
    }
}

pub fn validate_layout(
    layout: &PinchingLayout,
    geometry: &SystemGeometry,
    min_spacing: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if layout.waveguides() != geometry.waveguides
        || layout.per_waveguide() != geometry.pas_per_waveguide
    {
        // Shape mismatch is reported as every PA being out of range.
        for m in 0..layout.waveguides() {
            for n in 0..layout.per_waveguide() {
                out.push(Violation::OutOfRange {
                    m,
                    n,
                    offset: layout.get(m, n),
                    length: f64::NAN,
                });
            }
        }
        return out;
    }
    for m in 0..geometry.waveguides {
        let length = geometry.waveguide_lengths[m];
        let row = layout.row(m);
        for (n, &p) in row.iter().enumerate() {
            let offset = p - geometry.feed_points[m];
            if !(offset >= -LAYOUT_TOLERANCE && offset <= length + LAYOUT_TOLERANCE) {
                out.push(Violation::OutOfRange { m, n, offset, length });
            }
            for (other, &q) in row.iter().enumerate().skip(n + 1) {
                let distance = (p - q).abs();
                if !(distance >= min_spacing - LAYOUT_TOLERANCE) {
                    out.push(Violation::Spacing { m, n, other, distance, min_spacing });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometry(m: usize, n: usize, length: f64) -> SystemGeometry {
        SystemGeometry::uniform(m, n, length, length, 6.0, 5.0).unwrap()
    }

    #[test]
    fn radio_constants_at_28ghz() {
        let c = RadioConstants::new(28e9, 1.4, 0.08, 1e-3, 1e-12, None).unwrap();
        assert_relative_eq!(c.wavelength, 0.010714285714, max_relative = 1e-9);
        assert_relative_eq!(c.guided_wavelength, 0.007653061224, max_relative = 1e-9);
        assert_relative_eq!(c.guided_wavenumber, 821.0028, max_relative = 1e-6);
        assert_eq!(c.guided_wavelength, c.wavelength / 1.4);
        assert_relative_eq!(c.min_spacing, c.wavelength / 2.0);
    }

    #[test]
    fn dbm_conversion() {
        assert_relative_eq!(dbm_to_watts(0.0), 1e-3, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(-90.0), 1e-12, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_fields() {
        let err = SystemGeometry::uniform(4, 4, 50.0, 50.0, 6.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("height_m"), "{err}");
        let err = RadioConstants::new(28e9, 0.9, 0.0, 1e-3, 1e-12, None).unwrap_err();
        assert!(err.to_string().contains("effective_refractive_index"));
        assert!(SystemGeometry::uniform(0, 4, 50.0, 50.0, 6.0, 5.0).is_err());
    }

    #[test]
    fn waveguide_y_coordinates() {
        let g = geometry(4, 4, 50.0);
        assert_eq!(g.waveguide_spacing, 2.0);
        assert_eq!(g.waveguide_y, vec![-3.0, -1.0, 1.0, 3.0]);
        assert_eq!(geometry(1, 1, 10.0).waveguide_y, vec![0.0]);
    }

    #[test]
    fn candidate_grid_spacing() {
        let g = geometry(1, 1, 50.0);
        let c = candidate_set(&g, 0, ActivationMode::Discrete { positions: 100 }).unwrap();
        assert_relative_eq!(c.spacing, 50.0 / 99.0);
        assert_relative_eq!(c.spacing, 0.505051, max_relative = 1e-6);
        let c = candidate_set(&g, 0, ActivationMode::Continuous { samples: 100_000 }).unwrap();
        assert_relative_eq!(c.spacing, 5.00005e-4, max_relative = 1e-6);
        assert_eq!(c.offset(0), 0.0);
        assert_eq!(c.offset(c.len() - 1), 50.0);

        let g = geometry(1, 1, 10.0);
        let c = candidate_set(&g, 0, ActivationMode::Discrete { positions: 11 }).unwrap();
        let offsets: Vec<f64> = (0..11).map(|i| c.offset(i)).collect();
        assert_eq!(offsets, (0..11).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            candidate_set(&g, 0, ActivationMode::Discrete { positions: 1 }),
            Err(Error::Discretization(1))
        ));
    }

    #[test]
    fn nearest_index_ties_low() {
        let g = geometry(1, 1, 10.0);
        let c = candidate_set(&g, 0, ActivationMode::Discrete { positions: 11 }).unwrap();
        assert_eq!(c.nearest_index(2.5), 2);
        assert_eq!(c.nearest_index(2.51), 3);
        assert_eq!(c.nearest_index(-1.0), 0);
        assert_eq!(c.nearest_index(11.0), 10);
    }

    #[test]
    fn exclusion_bracket_examples() {
        let g = geometry(1, 2, 10.0);
        let c = candidate_set(&g, 0, ActivationMode::Discrete { positions: 11 }).unwrap();
        let layout = PinchingLayout::from_rows(vec![vec![5.0, 9.0]]);
        let idx = excluded_indices(&layout, 0, 1, &c, 1.5, ExclusionPolicy::Predecessors);
        assert_eq!(idx, vec![3, 4, 5, 6, 7]);
        // first PA in a sweep has no predecessors
        assert!(excluded_indices(&layout, 0, 0, &c, 1.5, ExclusionPolicy::Predecessors).is_empty());
        let layout = PinchingLayout::from_rows(vec![vec![0.0, 9.0]]);
        let idx = excluded_indices(&layout, 0, 1, &c, 1.5, ExclusionPolicy::Predecessors);
        assert_eq!(idx, vec![0, 1, 2]);
        let idx = excluded_indices(&layout, 0, 0, &c, 1.5, ExclusionPolicy::AllOthers);
        assert_eq!(idx, vec![7, 8, 9, 10]);
    }

    #[test]
    fn overlapping_brackets_merge() {
        let g = geometry(1, 3, 10.0);
        let c = candidate_set(&g, 0, ActivationMode::Discrete { positions: 11 }).unwrap();
        let layout = PinchingLayout::from_rows(vec![vec![2.0, 4.0, 8.0]]);
        let ranges = exclusion_ranges(&layout, 0, 2, &c, 1.5, ExclusionPolicy::AllOthers);
        assert_eq!(ranges, vec![0..=6]);
    }

    #[test]
    fn random_layout_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = geometry(1, 1, 50.0);
        let l = random_initial_layout(&g, 1.0, &mut rng).unwrap();
        assert!((0.0..=50.0).contains(&l.get(0, 0)));

        let g = geometry(4, 4, 50.0);
        let dmin = 0.0107142857 / 2.0;
        for _ in 0..200 {
            let l = random_initial_layout(&g, dmin, &mut rng).unwrap();
            assert!(validate_layout(&l, &g, dmin).is_empty());
        }
        let g = geometry(1, 4, 1.0);
        assert!(matches!(
            random_initial_layout(&g, 0.5, &mut rng),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn random_layout_is_seeded() {
        let g = geometry(4, 4, 50.0);
        let a = random_initial_layout(&g, 0.005, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_initial_layout(&g, 0.005, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn validate_layout_bounds() {
        let g = geometry(1, 2, 10.0);
        let ok = PinchingLayout::from_rows(vec![vec![10.0, 0.0]]);
        assert!(validate_layout(&ok, &g, 1.0).is_empty());
        let clash = PinchingLayout::from_rows(vec![vec![3.0, 3.0]]);
        let v = validate_layout(&clash, &g, 1.0);
        assert!(matches!(v.as_slice(), [Violation::Spacing { m: 0, n: 0, other: 1, .. }]));
        let outside = PinchingLayout::from_rows(vec![vec![10.0 + 1e-6, 0.0]]);
        let v = validate_layout(&outside, &g, 1.0);
        assert!(matches!(v.as_slice(), [Violation::OutOfRange { m: 0, n: 0, .. }]));
    }
}
