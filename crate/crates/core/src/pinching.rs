//! Gauss–Seidel one-dimensional (GS1D) search over PA positions.
//!
//! With `w` fixed, the contribution of PA `(m, n)` at candidate `p` is
//! `t(p) = h̄*_{m,n}(p) η^{1/2}(p) e^{−jk_g|p−o_m|} w_m`. Everything else
//! collapses into `C₁` (sum of all other contributions to `h̄ᴴGw`) and `C₂`
//! (all other contributions to `‖Gw‖₂²`), so the coordinate objective is
//!
//! ```text
//! |t(p) + C₁| − δ √(η(p)|w_m|² + C₂)
//! ```
//!
//! and each update is an exhaustive scan of the waveguide's candidate grid
//! minus the exclusion brackets of its neighbours. Lossless waveguides have
//! `‖Gw‖₂ = ‖w‖₂`, so the penalty term is dropped there.

use num_complex::Complex64;

use crate::channel::{
    attenuation_eta, estimated_channel, guided_coefficient, waveguide_response, ChannelModel,
};
use crate::linalg::hdot;
use crate::scene::{
    exclusion_ranges, CandidateSet, ExclusionPolicy, PinchingLayout, RadioConstants,
    SystemGeometry,
};
use crate::{Error, Result};

/// Fixed inputs of the pinching subproblem for one user.
#[derive(Clone, Copy)]
pub struct PinchingProblem<'a> {
    pub geometry: &'a SystemGeometry,
    pub constants: &'a RadioConstants,
    pub channel: &'a dyn ChannelModel,
    pub user: [f64; 3],
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerPaContext {
    pub c1: Complex64,
    pub c2: f64,
    pub w_m: Complex64,
}

impl<'a> PinchingProblem<'a> {
    pub fn lossless(&self) -> bool {
        self.constants.is_lossless()
    }

    /// `h̄*_{m,n}(p) η^{1/2}(p) e^{−jk_g|p−o_m|}`, the contribution per unit `w_m`.
    pub fn unit_term(&self, m: usize, p: f64) -> Complex64 {
        let h = self.channel.coefficient(self.user, self.geometry.pa_position(m, p));
        h * guided_coefficient(
            p,
            self.geometry.feed_points[m],
            self.constants,
            self.geometry.pas_per_waveguide,
        )
    }

    pub fn eta(&self, m: usize, p: f64) -> f64 {
        attenuation_eta(
            p,
            self.geometry.feed_points[m],
            self.constants.attenuation_db_per_m,
            self.geometry.pas_per_waveguide,
        )
    }

    /// `C₁`, `C₂` for PA `(m, n)`, computed from scratch.
    pub fn context(&self, layout: &PinchingLayout, w: &[Complex64], m: usize, n: usize) -> PerPaContext {
        let mut c1 = Complex64::new(0.0, 0.0);
        let mut c2 = 0.0;
        for mm in 0..layout.waveguides() {
            for nn in 0..layout.per_waveguide() {
                if (mm, nn) == (m, n) {
                    continue;
                }
                let p = layout.get(mm, nn);
                c1 += self.unit_term(mm, p) * w[mm];
                c2 += self.eta(mm, p) * w[mm].norm_sqr();
            }
        }
        PerPaContext { c1, c2, w_m: w[m] }
    }

    pub fn per_pa_objective(&self, m: usize, p: f64, ctx: &PerPaContext) -> f64 {
        let gain = (self.unit_term(m, p) * ctx.w_m + ctx.c1).norm();
        if self.lossless() {
            gain
        } else {
            gain - self.delta * (self.eta(m, p) * ctx.w_m.norm_sqr() + ctx.c2).sqrt()
        }
    }

    /// `|h̄ᴴGw| − δ‖Gw‖₂` assembled from the channel and waveguide modules.
    pub fn objective(&self, layout: &PinchingLayout, w: &[Complex64]) -> f64 {
        let h = estimated_channel(self.channel, self.user, layout, self.geometry);
        let g = waveguide_response(layout, self.geometry, self.constants);
        hdot(&h.vector, &g.apply(w)).norm() - self.delta * g.product_norm(w)
    }
}

/// Unit terms and `η` precomputed at every grid point of one waveguide.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    pub candidates: CandidateSet,
    pub terms: Vec<Complex64>,
    pub etas: Vec<f64>,
}

impl CandidateTable {
    pub fn build(problem: &PinchingProblem<'_>, candidates: &CandidateSet) -> Self {
        let m = candidates.waveguide;
        let (terms, etas) = (0..candidates.len())
            .map(|i| {
                let p = candidates.offset(i);
                (problem.unit_term(m, p), problem.eta(m, p))
            })
            .unzip();
        Self {
            candidates: candidates.clone(),
            terms,
            etas,
        }
    }
}

pub fn build_tables(problem: &PinchingProblem<'_>, candidates: &[CandidateSet]) -> Vec<CandidateTable> {
    candidates
        .iter()
        .map(|c| CandidateTable::build(problem, c))
        .collect()
}

/// Waveguide-major, PA index ascending.
pub fn waveguide_major_order(waveguides: usize, per_waveguide: usize) -> Vec<(usize, usize)> {
    (0..waveguides)
        .flat_map(|m| (0..per_waveguide).map(move |n| (m, n)))
        .collect()
}

/// Moves every PA to its nearest grid point outside the brackets of the PAs
/// already snapped on the same waveguide (ties to the lower index).
pub fn snap_to_grid(
    layout: &PinchingLayout,
    candidates: &[CandidateSet],
    min_spacing: f64,
) -> Result<PinchingLayout> {
    let mut out = layout.clone();
    for (m, cand) in candidates.iter().enumerate() {
        for n in 0..layout.per_waveguide() {
            let p = layout.get(m, n);
            let blocked =
                exclusion_ranges(&out, m, n, cand, min_spacing, ExclusionPolicy::Predecessors);
            let best = allowed_indices(cand.len(), &blocked)
                .min_by(|&a, &b| {
                    let da = (cand.offset(a) - p).abs();
                    let db = (cand.offset(b) - p).abs();
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .ok_or_else(|| {
                    Error::Infeasible(format!(
                        "no grid point left for PA ({m},{n}) with spacing {min_spacing} m"
                    ))
                })?;
            out.set(m, n, cand.offset(best));
        }
    }
    Ok(out)
}

fn allowed_indices(
    len: usize,
    blocked: &[std::ops::RangeInclusive<usize>],
) -> impl Iterator<Item = usize> + '_ {
    let mut next_block = 0;
    (0..len).filter(move |&i| {
        while next_block < blocked.len() && *blocked[next_block].end() < i {
            next_block += 1;
        }
        !(next_block < blocked.len() && blocked[next_block].contains(&i))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub layout: PinchingLayout,
    /// `|h̄ᴴGw| − δ‖Gw‖₂` after the sweep.
    pub objective: f64,
    /// The same objective after each single-coordinate update.
    pub updates: Vec<f64>,
    /// PAs left in place because every candidate was excluded.
    pub stuck: usize,
}

/// One Gauss–Seidel pass over `order`, each coordinate set to the best
/// admissible grid point (ties to the lowest index).
pub fn gs1d_sweep(
    problem: &PinchingProblem<'_>,
    layout: &PinchingLayout,
    w: &[Complex64],
    tables: &[CandidateTable],
    order: &[(usize, usize)],
    policy: ExclusionPolicy,
) -> SweepOutcome {
    let mut layout = layout.clone();
    let per = layout.per_waveguide();
    let lossless = problem.lossless();
    let delta = problem.delta;

    let mut terms = Vec::with_capacity(layout.waveguides() * per);
    let mut etas = Vec::with_capacity(terms.capacity());
    let mut gain = Complex64::new(0.0, 0.0);
    let mut energy = 0.0;
    for m in 0..layout.waveguides() {
        for n in 0..per {
            let p = layout.get(m, n);
            let t = problem.unit_term(m, p);
            let e = problem.eta(m, p);
            gain += t * w[m];
            energy += e * w[m].norm_sqr();
            terms.push(t);
            etas.push(e);
        }
    }

    let mut updates = Vec::with_capacity(order.len());
    let mut stuck = 0;
    for &(m, n) in order {
        let k = m * per + n;
        let wm = w[m];
        let power_m = wm.norm_sqr();
        let c1 = gain - terms[k] * wm;
        let c2 = (energy - etas[k] * power_m).max(0.0);
        let table = &tables[m];
        let blocked = exclusion_ranges(
            &layout,
            m,
            n,
            &table.candidates,
            problem.constants.min_spacing,
            policy,
        );
        let mut best: Option<(usize, f64)> = None;
        for i in allowed_indices(table.terms.len(), &blocked) {
            let mut value = (table.terms[i] * wm + c1).norm();
            if !lossless {
                value -= delta * (table.etas[i] * power_m + c2).sqrt();
            }
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((i, value));
            }
        }
        match best {
            Some((i, _)) => {
                layout.set(m, n, table.candidates.offset(i));
                terms[k] = table.terms[i];
                etas[k] = table.etas[i];
                gain = c1 + terms[k] * wm;
                energy = c2 + etas[k] * power_m;
            }
            None => {
                log::warn!("all candidates excluded for PA ({m},{n}); keeping its position");
                stuck += 1;
            }
        }
        updates.push(gain.norm() - delta * energy.sqrt());
    }

    SweepOutcome {
        objective: gain.norm() - delta * energy.sqrt(),
        layout,
        updates,
        stuck,
    }
}
