//! Self-checks that compare the solvers with independent sampling and
//! brute-force oracles on random instances.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseband::{solve_baseband_barrier, solve_baseband_lossy, BarrierOptions, SOLVER_TOLERANCE};
use crate::channel::{
    estimated_channel_los, sample_error, waveguide_response, BlockResponse, LosChannel,
    UncertaintyModel,
};
use crate::linalg::hdot;
use crate::pinching::{build_tables, gs1d_sweep, snap_to_grid, waveguide_major_order, PinchingProblem};
use crate::robust::{adversarial_error, delta_from_probabilistic, monte_carlo_nonoutage, rayleigh_cdf};
use crate::scene::{
    candidate_sets, random_initial_layout, validate_layout, ActivationMode, ExclusionPolicy,
    RadioConstants, SystemGeometry,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationSuite {
    Lemma,
    Adversary,
    SocpOracle,
    Exclusion,
}

impl ValidationSuite {
    pub const ALL: [ValidationSuite; 4] = [
        ValidationSuite::Lemma,
        ValidationSuite::Adversary,
        ValidationSuite::SocpOracle,
        ValidationSuite::Exclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ValidationSuite::Lemma => "lemma",
            ValidationSuite::Adversary => "adversary",
            ValidationSuite::SocpOracle => "socp-oracle",
            ValidationSuite::Exclusion => "exclusion",
        }
    }
}

impl fmt::Display for ValidationSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ValidationSuite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ValidationSuite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "validate",
                    format!("unknown suite {s:?}; expected lemma, adversary, socp-oracle or exclusion"),
                )
            })
    }
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            passed: measured <= bound,
        }
    }

    fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            passed: measured >= bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub suite: &'static str,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Instance {
    h: Vec<Complex64>,
    g: BlockResponse,
    norm_h: f64,
}

fn default_scene(waveguides: usize) -> Result<(SystemGeometry, RadioConstants)> {
    Ok((
        SystemGeometry::uniform(waveguides, 4, 50.0, 50.0, 6.0, 5.0)?,
        RadioConstants::new(28e9, 1.4, 0.08, 1e-3, 1e-12, None)?,
    ))
}

fn random_instance(waveguides: usize, rng: &mut impl Rng) -> Result<Instance> {
    let (geometry, constants) = default_scene(waveguides)?;
    let layout = random_initial_layout(&geometry, constants.min_spacing, rng)?;
    let user = geometry.sample_user(rng);
    let h = estimated_channel_los(user, &layout, &geometry, &constants);
    Ok(Instance {
        norm_h: h.norm(),
        h: h.vector,
        g: waveguide_response(&layout, &geometry, &constants),
    })
}

fn random_beamformer(m: usize, power: f64, rng: &mut impl Rng) -> Vec<Complex64> {
    let w: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let scale = (power / crate::linalg::norm_sq(&w)).sqrt();
    w.iter().map(|x| x * scale).collect()
}

fn lemma(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let inst = random_instance(4, rng)?;
    let epsilon = 0.1 * inst.norm_h;
    let delta = 0.3 * inst.norm_h;
    let w = solve_baseband_lossy(&inst.h, &inst.g, delta, 1e-3, SOLVER_TOLERANCE)?.beamformer.w;
    let scale = epsilon * inst.g.product_norm(&w);
    let gain = hdot(&inst.h, &inst.g.apply(&w)).norm();

    let mc = monte_carlo_nonoutage(&inst.h, &inst.g, &w, epsilon, 0.0, 100_000, rng);
    let mut checks = vec![Check::at_most(
        "kolmogorov distance of |e^H G w| vs Rayleigh (1e5 draws)",
        mc.kolmogorov_distance(|x| rayleigh_cdf(x, scale)),
        0.01,
    )];
    for rho in [0.5, 0.9, 0.99] {
        let d = delta_from_probabilistic(epsilon, rho)?;
        let threshold = (gain - d * inst.g.product_norm(&w)).max(0.0);
        let mc = monte_carlo_nonoutage(&inst.h, &inst.g, &w, epsilon, threshold, 100_000, rng);
        checks.push(Check::at_least(
            format!("empirical nonoutage probability at rho = {rho}"),
            mc.probability,
            rho,
        ));
    }
    let fixed = delta_from_probabilistic(epsilon, 1.0 - (-1.0f64).exp())?;
    checks.push(Check::at_most(
        "relative |delta(eps, 1 - 1/e) - eps|",
        (fixed - epsilon).abs() / epsilon,
        4.0 * f64::EPSILON,
    ));
    Ok(checks)
}

fn adversary(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut worst_rel = 0.0f64;
    let mut undercut = 0usize;
    let mut instances = 0;
    while instances < 50 {
        let inst = random_instance(4, rng)?;
        let delta = 0.3 * inst.norm_h;
        let w = solve_baseband_lossy(&inst.h, &inst.g, delta, 1e-3, SOLVER_TOLERANCE)?.beamformer.w;
        let gw = inst.g.apply(&w);
        let closed = hdot(&inst.h, &gw).norm() - delta * inst.g.product_norm(&w);
        if closed <= 0.0 {
            continue;
        }
        instances += 1;
        let star = adversarial_error(&inst.h, &inst.g, &w, delta)?;
        let rel = (star.value - closed).abs() / closed;
        worst_rel = worst_rel.max(rel);
        let ball = UncertaintyModel::NormBounded { delta };
        for _ in 0..10_000 {
            let e = sample_error(&ball, gw.len(), rng);
            let perturbed: Vec<Complex64> = inst.h.iter().zip(&e.vector).map(|(a, b)| a + b).collect();
            if hdot(&perturbed, &gw).norm() < star.value {
                undercut += 1;
            }
        }
    }
    Ok(vec![
        Check::at_most("max relative gap of f(e*) to the closed form (50 instances)", worst_rel, 1e-12),
        Check::at_most("ball samples below f(e*) (50 x 1e4)", undercut as f64, 0.0),
    ])
}

fn socp_oracle(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let power = 1e-3;
    let mut worst_grid = 0.0f64;
    let mut worst_barrier = 0.0f64;
    let mut below = 0usize;
    let mut checked = 0;
    while checked < 5 {
        let inst = random_instance(2, rng)?;
        let delta = 0.3 * inst.norm_h;
        let sol = solve_baseband_lossy(&inst.h, &inst.g, delta, power, SOLVER_TOLERANCE)?;
        if !sol.worst_case_positive {
            continue;
        }
        checked += 1;
        // Dense search over w = √P (cos θ, sin θ e^{jφ}) on a 1000 × 1000 grid.
        let steps = 1000;
        let mut best = f64::INFINITY;
        for i in 0..steps {
            let theta = FRAC_PI_2 * i as f64 / (steps - 1) as f64;
            for j in 0..steps {
                let phi = TAU * j as f64 / steps as f64;
                let w = [
                    Complex64::new(theta.cos() * power.sqrt(), 0.0),
                    Complex64::from_polar(theta.sin() * power.sqrt(), phi),
                ];
                let value = delta * inst.g.product_norm(&w) - hdot(&inst.h, &inst.g.apply(&w)).norm();
                best = best.min(value);
            }
        }
        if sol.objective > best {
            below += usize::from((sol.objective - best) > 1e-12 * best.abs());
        }
        worst_grid = worst_grid.max((sol.objective - best).abs() / best.abs());
        let barrier = solve_baseband_barrier(&inst.h, &inst.g, delta, power, BarrierOptions::default())?;
        worst_barrier = worst_barrier.max((barrier.objective - sol.objective).abs() / sol.objective.abs());
    }
    Ok(vec![
        Check::at_most("M=2 relative gap to the 1e6-point search", worst_grid, 1e-4),
        Check::at_most("M=2 instances where the search beat the solver", below as f64, 0.0),
        Check::at_most("relative gap between the two baseband routes", worst_barrier, 1e-6),
    ])
}

fn exclusion(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (geometry, constants) = default_scene(4)?;
    let los = LosChannel::new(&constants);
    let mut violations = 0usize;
    let mut stuck = 0usize;
    let mut layouts = 0usize;
    for (mode, spacing) in [
        (ActivationMode::Continuous { samples: 10_000 }, constants.min_spacing),
        (ActivationMode::Discrete { positions: 100 }, constants.min_spacing),
        (ActivationMode::Continuous { samples: 10_000 }, 5.0),
    ] {
        let constants = RadioConstants {
            min_spacing: spacing,
            ..constants
        };
        let cands = candidate_sets(&geometry, mode)?;
        for policy in [ExclusionPolicy::AllOthers, ExclusionPolicy::Predecessors] {
            for _ in 0..20 {
                let init = random_initial_layout(&geometry, spacing, rng)?;
                violations += validate_layout(&init, &geometry, spacing).len();
                let user = geometry.sample_user(rng);
                let problem = PinchingProblem {
                    geometry: &geometry,
                    constants: &constants,
                    channel: &los,
                    user,
                    delta: 0.3 * estimated_channel_los(user, &init, &geometry, &constants).norm(),
                };
                let tables = build_tables(&problem, &cands);
                let layout = snap_to_grid(&init, &cands, spacing)?;
                violations += validate_layout(&layout, &geometry, spacing).len();
                let w = random_beamformer(4, 1e-3, rng);
                let out = gs1d_sweep(&problem, &layout, &w, &tables, &waveguide_major_order(4, 4), policy);
                violations += validate_layout(&out.layout, &geometry, spacing).len();
                stuck += out.stuck;
                layouts += 3;
            }
        }
    }
    Ok(vec![
        Check::at_most(format!("spacing/range violations over {layouts} layouts"), violations as f64, 0.0),
        Check::at_most("PAs left without an admissible candidate", stuck as f64, 0.0),
    ])
}

pub fn validate(suite: ValidationSuite, seed: u64) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        ValidationSuite::Lemma => lemma(&mut rng)?,
        ValidationSuite::Adversary => adversary(&mut rng)?,
        ValidationSuite::SocpOracle => socp_oracle(&mut rng)?,
        ValidationSuite::Exclusion => exclusion(&mut rng)?,
    };
    Ok(ValidationReport {
        suite: suite.name(),
        seed,
        checks,
    })
}
