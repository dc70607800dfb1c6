//! Monte-Carlo trials over random user positions and parameter sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ScenarioConfig, SweepAxis, UncertaintyConfig};
use crate::baseline::{fixed_array_response, hybrid_baseline_solve, FixedArray};
use crate::channel::{estimated_channel_los, LosChannel};
use crate::driver::{alternating_optimize, AoOptions, RobustProblem, RobustSolution, TraceEntry};
use crate::robust::{delta_from_probabilistic, nonoutage_ar};
use crate::scene::{build_geometry, candidate_sets, random_initial_layout};
use crate::Result;

/// Per-trial generator: stream `trial` of the scenario seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Which optimized design a trace belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    PassLossy,
    PassPerfect,
    PassLossless,
}

impl Series {
    pub fn name(self) -> &'static str {
        match self {
            Series::PassLossy => "pass_lossy",
            Series::PassPerfect => "pass_perfect",
            Series::PassLossless => "pass_lossless",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub user: [f64; 3],
    /// Norm bound applied to PASS.
    pub delta: f64,
    pub lossy: RobustSolution,
    /// The δ = 0 design on the same lossy waveguides.
    pub perfect: RobustSolution,
    /// The robust design with κ = 0.
    pub lossless: RobustSolution,
    pub baseline_wc_ar: f64,
    pub baseline_perfect_ar: f64,
    /// Only in the probabilistic model.
    pub nonoutage_ar: Option<f64>,
}

impl TrialOutcome {
    pub fn solution(&self, series: Series) -> &RobustSolution {
        match series {
            Series::PassLossy => &self.lossy,
            Series::PassPerfect => &self.perfect,
            Series::PassLossless => &self.lossless,
        }
    }
}

/// Means over all trials of one scenario (one CSV row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub pass_lossy_wc_ar: f64,
    pub pass_lossy_perfect_ar: f64,
    pub pass_lossless_wc_ar: f64,
    pub baseline_wc_ar: f64,
    pub baseline_perfect_ar: f64,
    /// NaN under the norm-bounded model.
    pub nonoutage_ar: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub row: SweepRow,
    pub outcomes: Vec<TrialOutcome>,
}

impl ScenarioRun {
    /// `(trial, series, entry)` for every recorded AO iteration.
    pub fn traces(&self) -> impl Iterator<Item = (usize, Series, &TraceEntry)> {
        self.outcomes.iter().flat_map(|o| {
            [Series::PassLossy, Series::PassPerfect, Series::PassLossless]
                .into_iter()
                .flat_map(move |s| o.solution(s).trace.iter().map(move |t| (o.trial, s, t)))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub runs: Vec<ScenarioRun>,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.runs.iter().map(|r| r.row).collect()
    }
}

struct Prepared {
    lossy: RobustProblem,
    array: FixedArray,
    opts: AoOptions,
}

fn run_trial(config: &ScenarioConfig, prepared: &Prepared, trial: usize) -> Result<TrialOutcome> {
    let base = &prepared.lossy;
    let mut rng = trial_rng(config.seed, trial as u64);
    let user = base.geometry.sample_user(&mut rng);
    let init = random_initial_layout(&base.geometry, base.constants.min_spacing, &mut rng)?;
    let normalized = |scale: f64| -> Result<f64> {
        match config.uncertainty {
            UncertaintyConfig::NormBounded { delta_bar } => Ok(delta_bar * scale),
            UncertaintyConfig::Probabilistic { epsilon_bar, rho } => {
                delta_from_probabilistic(epsilon_bar * scale, rho)
            }
        }
    };
    let h_init = estimated_channel_los(user, &init, &base.geometry, &base.constants);
    let delta = normalized(h_init.norm())?;

    let lossy = RobustProblem {
        user,
        delta,
        ..base.clone()
    };
    let perfect = RobustProblem {
        delta: 0.0,
        ..lossy.clone()
    };
    let lossless = RobustProblem {
        constants: lossy.constants.with_attenuation(0.0),
        ..lossy.clone()
    };
    let lossy_sol = alternating_optimize(&lossy, &init, &prepared.opts)?;
    let perfect_sol = alternating_optimize(&perfect, &init, &prepared.opts)?;
    let lossless_sol = alternating_optimize(&lossless, &init, &prepared.opts)?;

    let los = LosChannel::new(&base.constants);
    let h_fixed = fixed_array_response(&los, user, &prepared.array);
    let noise = base.constants.noise_power;
    let baseline = hybrid_baseline_solve(
        &h_fixed,
        prepared.array.chains,
        normalized(h_fixed.norm())?,
        base.constants.transmit_power,
        noise,
    )?;

    let nonoutage = config
        .uncertainty
        .is_probabilistic()
        .then(|| nonoutage_ar(lossy_sol.value.worst_case_amplitude, noise));
    Ok(TrialOutcome {
        trial,
        user,
        delta,
        baseline_wc_ar: baseline.value.worst_case_ar,
        baseline_perfect_ar: baseline.value.perfect_ar(noise),
        nonoutage_ar: nonoutage,
        lossy: lossy_sol,
        perfect: perfect_sol,
        lossless: lossless_sol,
    })
}

fn prepare(config: &ScenarioConfig) -> Result<Prepared> {
    config.validate()?;
    let (geometry, constants) = build_geometry(config)?;
    let candidates = candidate_sets(&geometry, config.activation)?;
    Ok(Prepared {
        array: FixedArray::new(&geometry, &constants),
        lossy: RobustProblem {
            geometry,
            constants,
            candidates,
            user: [0.0; 3],
            delta: 0.0,
        },
        opts: config.optimizer.into(),
    })
}

fn run_point(config: &ScenarioConfig, axis_value: f64) -> Result<ScenarioRun> {
    let prepared = prepare(config)?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &prepared, t))
        .collect::<Result<Vec<_>>>()?;

    let n = outcomes.len() as f64;
    let noise = prepared.lossy.constants.noise_power;
    let mean = |f: &dyn Fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let row = SweepRow {
        axis_value,
        pass_lossy_wc_ar: mean(&|o| o.lossy.value.worst_case_ar),
        pass_lossy_perfect_ar: mean(&|o| o.perfect.value.perfect_ar(noise)),
        pass_lossless_wc_ar: mean(&|o| o.lossless.value.worst_case_ar),
        baseline_wc_ar: mean(&|o| o.baseline_wc_ar),
        baseline_perfect_ar: mean(&|o| o.baseline_perfect_ar),
        nonoutage_ar: if config.uncertainty.is_probabilistic() {
            mean(&|o| o.nonoutage_ar.unwrap_or(f64::NAN))
        } else {
            f64::NAN
        },
        trials: config.trials,
        seed: config.seed,
    };
    Ok(ScenarioRun { row, outcomes })
}

/// Runs every trial of one scenario; `axis_value` is NaN.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    run_point(config, f64::NAN)
}

/// One scenario per value, all sharing the seed (and hence the users and
/// initial layouts), so rows differ only in the swept parameter.
pub fn run_sweep(config: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    let mut base = config.clone();
    base.sweep = None;
    base.validate()?;
    base.check_sweep(axis, values)?;
    let runs = values
        .iter()
        .map(|&v| run_point(&base.with_axis(axis, v), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axis, runs })
}

/// Draws the user and initial layout exactly as the trial loop does.
pub fn trial_inputs(config: &ScenarioConfig, trial: usize) -> Result<([f64; 3], crate::scene::PinchingLayout)> {
    let (geometry, constants) = build_geometry(config)?;
    let mut rng = trial_rng(config.seed, trial as u64);
    let user = geometry.sample_user(&mut rng);
    let init = random_initial_layout(&geometry, constants.min_spacing, &mut rng)?;
    Ok((user, init))
}
