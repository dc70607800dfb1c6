//! Alternating optimization: baseband step, then a GS1D position sweep,
//! repeated until the relative improvement drops below a tolerance.

use num_complex::Complex64;

use crate::baseband::{solve_baseband, SOLVER_TOLERANCE};
use crate::channel::{estimated_channel_los, waveguide_response, LosChannel};
use crate::pinching::{build_tables, gs1d_sweep, snap_to_grid, waveguide_major_order, PinchingProblem};
use crate::robust::{worst_case_amplitude, RobustValue};
use crate::scene::{CandidateSet, ExclusionPolicy, PinchingLayout, RadioConstants, SystemGeometry};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub solver_tol: f64,
    pub exclusion: ExclusionPolicy,
}

impl Default for AoOptions {
    fn default() -> Self {
        Self {
            max_iters: 20,
            rel_tol: 1e-4,
            solver_tol: SOLVER_TOLERANCE,
            exclusion: ExclusionPolicy::default(),
        }
    }
}

/// Everything fixed during one AO run.
#[derive(Debug, Clone)]
pub struct RobustProblem {
    pub geometry: SystemGeometry,
    pub constants: RadioConstants,
    pub candidates: Vec<CandidateSet>,
    pub user: [f64; 3],
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `|h̄ᴴGw| − δ‖Gw‖₂` after the baseband step.
    pub after_w: f64,
    /// The same after the position sweep; absent when the budget is zero.
    pub after_p: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RobustSolution {
    pub w: Vec<Complex64>,
    pub layout: PinchingLayout,
    pub value: RobustValue,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub converged: bool,
}

impl RobustSolution {
    /// The trace flattened in update order.
    pub fn objective_sequence(&self) -> Vec<f64> {
        self.trace
            .iter()
            .flat_map(|t| std::iter::once(t.after_w).chain(t.after_p))
            .collect()
    }
}

fn evaluate(problem: &RobustProblem, layout: &PinchingLayout, w: &[Complex64]) -> RobustValue {
    let h = estimated_channel_los(problem.user, layout, &problem.geometry, &problem.constants);
    let g = waveguide_response(layout, &problem.geometry, &problem.constants);
    worst_case_amplitude(&h.vector, &g, w, problem.delta, problem.constants.noise_power)
}

fn baseband_step(
    problem: &RobustProblem,
    layout: &PinchingLayout,
    opts: &AoOptions,
    iteration: usize,
) -> Result<Vec<Complex64>> {
    let h = estimated_channel_los(problem.user, layout, &problem.geometry, &problem.constants);
    let g = waveguide_response(layout, &problem.geometry, &problem.constants);
    solve_baseband(
        &h.vector,
        &g,
        problem.delta,
        problem.constants.transmit_power,
        problem.constants.is_lossless(),
        opts.solver_tol,
    )
    .map(|s| s.beamformer.w)
    .map_err(|e| Error::Iteration {
        iteration,
        source: Box::new(e),
    })
}

pub fn alternating_optimize(
    problem: &RobustProblem,
    init: &PinchingLayout,
    opts: &AoOptions,
) -> Result<RobustSolution> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::config("optimizer.rel_tol", "must be positive"));
    }
    if opts.max_iters == 0 {
        let w = baseband_step(problem, init, opts, 0)?;
        let value = evaluate(problem, init, &w);
        return Ok(RobustSolution {
            trace: vec![TraceEntry {
                iteration: 0,
                after_w: value.raw_objective(),
                after_p: None,
            }],
            w,
            layout: init.clone(),
            value,
            iterations: 0,
            converged: false,
        });
    }

    let los = LosChannel::new(&problem.constants);
    let pinching = PinchingProblem {
        geometry: &problem.geometry,
        constants: &problem.constants,
        channel: &los,
        user: problem.user,
        delta: problem.delta,
    };
    let tables = build_tables(&pinching, &problem.candidates);
    let order = waveguide_major_order(init.waveguides(), init.per_waveguide());
    let mut layout = snap_to_grid(init, &problem.candidates, problem.constants.min_spacing)?;

    let mut trace = Vec::with_capacity(opts.max_iters);
    let mut w = Vec::new();
    let mut previous: Option<f64> = None;
    let mut converged = false;
    for iteration in 1..=opts.max_iters {
        w = baseband_step(problem, &layout, opts, iteration)?;
        let after_w = pinching.objective(&layout, &w);
        let reference = *previous.get_or_insert(after_w);
        let sweep = gs1d_sweep(&pinching, &layout, &w, &tables, &order, opts.exclusion);
        layout = sweep.layout;
        trace.push(TraceEntry {
            iteration,
            after_w,
            after_p: Some(sweep.objective),
        });
        previous = Some(sweep.objective);
        let improvement = (sweep.objective - reference) / reference.abs().max(f64::MIN_POSITIVE);
        if improvement < opts.rel_tol {
            converged = true;
            break;
        }
    }

    Ok(RobustSolution {
        value: evaluate(problem, &layout, &w),
        iterations: trace.len(),
        trace,
        w,
        layout,
        converged,
    })
}
