use std::f64::consts::PI;

use num_complex::Complex64;
use pass_robust_core::baseband::{solve_baseband, solve_baseband_lossy, SOLVER_TOLERANCE};
use pass_robust_core::channel::{
    attenuation_eta, distance, estimated_channel_los, waveguide_response, LosChannel,
};
use pass_robust_core::driver::{alternating_optimize, AoOptions, RobustProblem};
use pass_robust_core::experiments::csv::format_float;
use pass_robust_core::linalg::{hdot, norm};
use pass_robust_core::pinching::{
    build_tables, gs1d_sweep, snap_to_grid, waveguide_major_order, PinchingProblem,
};
use pass_robust_core::robust::{
    adversarial_error, delta_from_probabilistic, rayleigh_cdf, worst_case_amplitude,
};
use pass_robust_core::scene::{
    candidate_set, candidate_sets, exclusion_ranges, random_initial_layout, validate_layout,
    ActivationMode, ExclusionPolicy, RadioConstants, SystemGeometry,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scene(m: usize, n: usize, kappa: f64) -> (SystemGeometry, RadioConstants) {
    (
        SystemGeometry::uniform(m, n, 50.0, 50.0, 6.0, 5.0).unwrap(),
        RadioConstants::new(28e9, 1.4, kappa, 1e-3, 1e-12, None).unwrap(),
    )
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn initial_layouts_are_feasible(m in 1usize..6, n in 1usize..8, spacing in 0.001f64..5.0, seed: u64) {
        let geometry = SystemGeometry::uniform(m, n, 50.0, 50.0, 6.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match random_initial_layout(&geometry, spacing, &mut rng) {
            Ok(layout) => prop_assert!(validate_layout(&layout, &geometry, spacing).is_empty()),
            Err(_) => prop_assert!((n as f64 - 1.0) * spacing > 50.0),
        }
    }

    #[test]
    fn exclusion_ranges_sorted_disjoint_and_cover_neighbours(
        q in 10usize..400, spacing in 0.01f64..8.0, seed: u64,
    ) {
        let (geometry, _) = scene(2, 4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Ok(layout) = random_initial_layout(&geometry, spacing, &mut rng) else { return Ok(()) };
        let cand = candidate_set(&geometry, 1, ActivationMode::Discrete { positions: q }).unwrap();
        for n in 0..4 {
            let ranges = exclusion_ranges(&layout, 1, n, &cand, spacing, ExclusionPolicy::AllOthers);
            for w in ranges.windows(2) {
                prop_assert!(w[0].end() + 1 < *w[1].start());
            }
            for i in 0..cand.len() {
                let too_close = (0..4)
                    .filter(|&k| k != n)
                    .any(|k| (cand.offset(i) - layout.get(1, k)).abs() < spacing - 1e-12);
                let blocked = ranges.iter().any(|r| r.contains(&i));
                prop_assert!(!too_close || blocked, "index {} is {} m from a neighbour", i, spacing);
            }
        }
    }

    #[test]
    fn free_space_magnitude_is_inverse_distance(x in 0.0f64..50.0, y in -3.0f64..3.0, p in 0.0f64..50.0) {
        let (geometry, constants) = scene(4, 1, 0.08);
        let layout = pass_robust_core::scene::PinchingLayout::from_rows(vec![vec![p]; 4]);
        let user = [x, y, 0.0];
        let h = estimated_channel_los(user, &layout, &geometry, &constants);
        for m in 0..4 {
            let r = distance(user, geometry.pa_position(m, p));
            prop_assert!((h.vector[m].norm() - constants.wavelength / (4.0 * PI * r)).abs()
                <= 1e-12 * h.vector[m].norm());
        }
    }

    #[test]
    fn attenuation_is_bounded(p in 0.0f64..50.0, kappa in 0.0f64..1.0, n in 1usize..10) {
        let eta = attenuation_eta(p, 0.0, kappa, n);
        prop_assert!(eta > 0.0 && eta <= 1.0 / n as f64 + 1e-15);
    }

    #[test]
    fn worst_case_never_exceeds_perfect(h in complex_vec(8), w in complex_vec(2), delta in 0.0f64..2.0) {
        let (geometry, constants) = scene(2, 4, 0.08);
        let layout = pass_robust_core::scene::PinchingLayout::from_rows(vec![vec![1.0, 2.0, 3.0, 4.0]; 2]);
        let g = waveguide_response(&layout, &geometry, &constants);
        let v = worst_case_amplitude(&h, &g, &w, delta, 1.0);
        prop_assert!(v.worst_case_amplitude <= v.perfect_amplitude);
        prop_assert!(v.worst_case_amplitude >= 0.0);
        if norm(&g.apply(&w)) > 1e-9 {
            let star = adversarial_error(&h, &g, &w, delta).unwrap();
            prop_assert!(norm(&star.error.vector) <= delta * (1.0 + 1e-12));
            prop_assert!((star.value - v.worst_case_amplitude).abs() <= 1e-12 * v.perfect_amplitude.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn chance_transform_is_monotone(eps in 0.001f64..10.0, a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let dl = delta_from_probabilistic(eps, lo).unwrap();
        let dh = delta_from_probabilistic(eps, hi).unwrap();
        prop_assert!(dl <= dh);
        let twice = delta_from_probabilistic(2.0 * eps, lo).unwrap();
        prop_assert!((twice - 2.0 * dl).abs() <= 1e-14 * twice);
    }

    #[test]
    fn rayleigh_cdf_is_a_cdf(x in 0.0f64..10.0, y in 0.0f64..10.0, s in 0.01f64..5.0) {
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let (a, b) = (rayleigh_cdf(lo, s), rayleigh_cdf(hi, s));
        prop_assert!((0.0..=1.0).contains(&a) && a <= b && b <= 1.0);
    }

    #[test]
    fn lossy_baseband_beats_random_feasible_points(seed: u64, delta_bar in 0.0f64..0.6, probe in complex_vec(4)) {
        let (geometry, constants) = scene(4, 4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = random_initial_layout(&geometry, constants.min_spacing, &mut rng).unwrap();
        let user = geometry.sample_user(&mut rng);
        let h = estimated_channel_los(user, &layout, &geometry, &constants);
        let g = waveguide_response(&layout, &geometry, &constants);
        let delta = delta_bar * h.norm();
        let sol = solve_baseband_lossy(&h.vector, &g, delta, 1e-3, SOLVER_TOLERANCE).unwrap();
        prop_assert!((sol.beamformer.power() - 1e-3).abs() <= 1e-12);
        let scale = 1e-3f64.sqrt() / norm(&probe).max(1e-12);
        let w: Vec<Complex64> = probe.iter().map(|x| x * scale).collect();
        let value = delta * g.product_norm(&w) - hdot(&h.vector, &g.apply(&w)).norm();
        prop_assert!(sol.objective <= value + 1e-12 * value.abs());
    }

    #[test]
    fn objective_scales_with_root_power(seed: u64, power in 1e-6f64..10.0) {
        let (geometry, constants) = scene(3, 4, 0.08);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layout = random_initial_layout(&geometry, constants.min_spacing, &mut rng).unwrap();
        let user = geometry.sample_user(&mut rng);
        let h = estimated_channel_los(user, &layout, &geometry, &constants);
        let g = waveguide_response(&layout, &geometry, &constants);
        let delta = 0.3 * h.norm();
        let unit = solve_baseband(&h.vector, &g, delta, 1.0, false, SOLVER_TOLERANCE).unwrap();
        let scaled = solve_baseband(&h.vector, &g, delta, power, false, SOLVER_TOLERANCE).unwrap();
        prop_assert!((scaled.objective - power.sqrt() * unit.objective).abs() <= 1e-9 * scaled.objective.abs());
    }

    #[test]
    fn format_float_keeps_nine_digits(x in -1e12f64..1e12) {
        prop_assume!(x != 0.0);
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert!(((back - x) / x).abs() <= 5e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweeps_are_monotone_for_any_policy(seed: u64, delta_bar in 0.0f64..0.6, kappa in 0.0f64..0.2, q in 2usize..500, predecessors: bool) {
        let (geometry, constants) = scene(3, 3, kappa);
        let los = LosChannel::new(&constants);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = random_initial_layout(&geometry, constants.min_spacing, &mut rng).unwrap();
        let user = geometry.sample_user(&mut rng);
        let delta = delta_bar * estimated_channel_los(user, &init, &geometry, &constants).norm();
        let problem = PinchingProblem { geometry: &geometry, constants: &constants, channel: &los, user, delta };
        let cands = candidate_sets(&geometry, ActivationMode::Discrete { positions: q }).unwrap();
        let Ok(start) = snap_to_grid(&init, &cands, constants.min_spacing) else { return Ok(()) };
        let tables = build_tables(&problem, &cands);
        let w = solve_baseband(&estimated_channel_los(user, &start, &geometry, &constants).vector,
            &waveguide_response(&start, &geometry, &constants), delta, 1e-3, constants.is_lossless(), SOLVER_TOLERANCE)
            .unwrap().beamformer.w;
        let policy = if predecessors { ExclusionPolicy::Predecessors } else { ExclusionPolicy::AllOthers };
        let out = gs1d_sweep(&problem, &start, &w, &tables, &waveguide_major_order(3, 3), policy);
        let mut prev = problem.objective(&start, &w);
        if policy == ExclusionPolicy::AllOthers {
            for v in &out.updates {
                prop_assert!(*v >= prev - 1e-18);
                prev = *v;
            }
        }
        prop_assert!(validate_layout(&out.layout, &geometry, constants.min_spacing).is_empty());
    }

    #[test]
    fn ao_traces_are_monotone(seed: u64, delta_bar in 0.0f64..0.8, kappa in 0.0f64..0.2, samples in 50usize..3000) {
        let (geometry, constants) = scene(4, 4, kappa);
        let candidates = candidate_sets(&geometry, ActivationMode::Continuous { samples }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let user = geometry.sample_user(&mut rng);
        let init = random_initial_layout(&geometry, constants.min_spacing, &mut rng).unwrap();
        let delta = delta_bar * estimated_channel_los(user, &init, &geometry, &constants).norm();
        let problem = RobustProblem { geometry, constants, candidates, user, delta };
        let Ok(sol) = alternating_optimize(&problem, &init, &AoOptions::default()) else {
            // Too coarse a grid to host every PA at the minimum spacing.
            prop_assume!(false);
            unreachable!()
        };
        let seq = sol.objective_sequence();
        for w in seq.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{:?}", seq);
        }
        prop_assert!(sol.iterations <= AoOptions::default().max_iters);
        prop_assert!(sol.value.worst_case_amplitude <= sol.value.perfect_amplitude);
    }
}
