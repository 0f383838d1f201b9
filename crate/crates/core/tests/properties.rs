use edgemore::harness::{Figure, Profile};
use edgemore::{
    brute_force, generate, option_utility, solve_exact, solve_greedy, solve_naive, total_utility,
    validate, GenParams, ResourceVector, SolveLimits, SweepConfig,
};
use proptest::prelude::*;

fn tiny() -> impl Strategy<Value = GenParams> {
    (1..=4usize, 1..=2usize, 1..=3usize, 1..=2usize, any::<u64>()).prop_map(|(n, m, j, z, seed)| {
        GenParams {
            n_providers: n,
            n_nodes: m,
            options_per_provider: j,
            containers_per_option: z,
            node_capacity: ResourceVector::new(vec![4.0, 8.0]).unwrap(),
            seed,
            ..GenParams::default()
        }
    })
}

fn desk() -> impl Strategy<Value = GenParams> {
    (
        2..=12usize,
        1..=4usize,
        1..=6usize,
        1..=4usize,
        any::<u64>(),
    )
        .prop_map(|(n, m, j, z, seed)| GenParams {
            n_providers: n,
            n_nodes: m,
            options_per_provider: j,
            containers_per_option: z,
            seed,
            ..GenParams::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_exhaustive_enumeration(p in tiny()) {
        let s = generate(&p).unwrap();
        let (_, exact) = solve_exact(&s, SolveLimits::unlimited());
        let (_, oracle) = brute_force(&s).unwrap();
        prop_assert!(exact.proven_optimal);
        prop_assert!((exact.objective - oracle.objective).abs() <= 1e-9);
    }

    #[test]
    fn every_solver_emits_a_feasible_allocation(p in desk()) {
        let s = generate(&p).unwrap();
        let limits = SolveLimits::unlimited().with_node_budget(20_000);
        for (alloc, report) in [
            solve_exact(&s, limits),
            solve_greedy(&s),
            solve_naive(&s, p.seed),
        ] {
            prop_assert_eq!(validate(&s, &alloc), Ok(()));
            let u = total_utility(&s, &alloc).unwrap();
            prop_assert!((u - report.objective).abs() <= 1e-9);
        }
    }

    #[test]
    fn exact_dominates_heuristics(p in desk()) {
        let s = generate(&p).unwrap();
        let limits = SolveLimits::unlimited().with_node_budget(20_000);
        let exact = solve_exact(&s, limits).1.objective;
        prop_assert!(exact + 1e-9 >= solve_greedy(&s).1.objective);
        prop_assert!(exact + 1e-9 >= solve_naive(&s, p.seed).1.objective);
    }

    /// Options sweeps nest: one more option per provider extends the previous
    /// scenario, so the optimum cannot drop.
    #[test]
    fn nested_options_never_lower_the_optimum(base_seed in any::<u64>(), run in 0..20usize, j in 1..4usize) {
        let mut config = SweepConfig::figure(Figure::Fig3, Profile::Desk);
        config.base_seed = base_seed;
        config.base_params.n_providers = 4;
        config.base_params.containers_per_option = 2;
        config.base_params.n_nodes = 2;
        let small = generate(&config.point_params(j, run)).unwrap();
        let big = generate(&config.point_params(j + 1, run)).unwrap();
        for (a, b) in small.providers().iter().zip(big.providers()) {
            prop_assert_eq!(&a.options[..], &b.options[..j]);
        }
        let a = solve_exact(&small, SolveLimits::unlimited()).1;
        let b = solve_exact(&big, SolveLimits::unlimited()).1;
        prop_assert!(a.proven_optimal && b.proven_optimal);
        prop_assert!(b.objective >= a.objective - 1e-9);
    }

    #[test]
    fn utility_is_bounded_and_monotone(
        alpha in 0.0..=1.0f64,
        beta_cpu in 1.0..5.0f64,
        beta_ram in 1.0..5.0f64,
        d in (0.0..200.0f64, 0.0..400.0f64),
        extra in (0.0..50.0f64, 0.0..50.0f64),
    ) {
        let totals = ResourceVector::new(vec![128.0, 256.0]).unwrap();
        let lo = ResourceVector::new(vec![d.0, d.1]).unwrap();
        let hi = ResourceVector::new(vec![d.0 + extra.0, d.1 + extra.1]).unwrap();
        let u_lo = option_utility(&lo, &totals, alpha, beta_cpu, beta_ram);
        let u_hi = option_utility(&hi, &totals, alpha, beta_cpu, beta_ram);
        prop_assert!((0.0..=1.0).contains(&u_lo));
        prop_assert!(u_hi >= u_lo);
    }

    #[test]
    fn generated_utilities_lie_in_unit_interval(p in desk()) {
        let s = generate(&p).unwrap();
        for o in s.providers().iter().flat_map(|p| &p.options) {
            prop_assert!((0.0..=1.0).contains(&o.utility));
        }
    }
}
