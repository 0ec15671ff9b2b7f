use proptest::prelude::*;

use ar_recurrence::classify::{frog_rho, log_partial_products, SeriesSpec};
use ar_recurrence::dist::InnovationLaw;
use ar_recurrence::harness::probe::{probe, ProbeSpec};
use ar_recurrence::harness::ProcessSpec;
use ar_recurrence::linalg::{vec_le, Matrix};
use ar_recurrence::matrix_env::{delta, variation_violations, Atom, MatrixEnsemble};
use ar_recurrence::processes::ar::{ArState, Environment};
use ar_recurrence::processes::{exchange_step, BranchingState, ExchangeState, OffspringFamily};
use ar_recurrence::rng;

fn matrix(d: usize, entries: &[f64]) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..d).map(|i| entries[i * d..(i + 1) * d].to_vec()).collect();
    Matrix::from_rows(&rows).unwrap()
}

fn positive_matrix(d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(1e-3f64..10.0, d * d).prop_map(move |e| matrix(d, &e))
}

fn nonneg_matrix(d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], d * d).prop_map(move |e| matrix(d, &e))
}

fn law() -> impl Strategy<Value = InnovationLaw> {
    prop_oneof![
        (0.1f64..3.0, 0.2f64..3.0).prop_map(|(b, p)| InnovationLaw::log_pareto(b, p)),
        (0.5f64..5.0).prop_map(InnovationLaw::pareto_tail),
        (0.05f64..0.95).prop_map(InnovationLaw::geometric),
        (0.1f64..20.0).prop_map(InnovationLaw::poisson),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_chain_holds(d in 1usize..4, seed in any::<u64>(), a in nonneg_matrix(3), b in nonneg_matrix(3)) {
        let sub = |m: &Matrix| {
            let rows: Vec<Vec<f64>> = m.rows().into_iter().take(d).map(|r| r[..d].to_vec()).collect();
            Matrix::from_rows(&rows).unwrap()
        };
        let ens = MatrixEnsemble::finite(vec![Atom::new(sub(&a), 0.5), Atom::new(sub(&b), 0.5)]).unwrap();
        let law = InnovationLaw::scaled_vector(InnovationLaw::log_pareto(1.0, 1.0), d);
        let env = Environment::draw(&ens, &law, 200, &mut rng::stream(seed)).unwrap();
        let mut s = ArState::new(env.innovations[0].clone()).unwrap();
        for (m, y) in env.matrices.iter().zip(&env.innovations[1..]) {
            s.advance(m, y).unwrap();
            prop_assert!(vec_le(&s.nvec, &s.m) && vec_le(&s.m, &s.x));
        }
    }

    #[test]
    fn variation_inequalities(
        (a, b, x) in (2usize..5).prop_flat_map(|d| (positive_matrix(d), positive_matrix(d), prop::collection::vec(0.0f64..10.0, d)))
    ) {
        prop_assert!(variation_violations(&a, &b, &x).is_empty());
    }

    #[test]
    fn delta_is_at_least_one(a in positive_matrix(3)) {
        prop_assert!(delta(&a).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn cdf_is_monotone_and_matches_log_tail(law in law(), x in 0.0f64..1e6, h in 0.0f64..100.0) {
        prop_assert!(law.cdf(x) <= law.cdf(x + h) + 1e-15);
        if x > 0.0 {
            prop_assert!((law.tail(x) - law.log_tail(x.ln())).abs() < 1e-9);
        }
    }

    #[test]
    fn floor_compatibility(law in law(), x in 0.0f64..1e4) {
        prop_assert!(law.clone().floored().cdf(x) <= law.cdf(x + 1.0) + 1e-12);
    }

    #[test]
    fn partial_products_nonincreasing(law in law(), y in 0.5f64..100.0, lambda in 0.05f64..3.0) {
        let lp = log_partial_products(&SeriesSpec::log(law, y, lambda), 2000);
        prop_assert!(lp.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn partial_products_monotone_in_lambda_and_anchor(
        law in law(), y in 0.5f64..100.0, lambda in 0.05f64..3.0, dl in 0.0f64..1.0, dy in 1.0f64..10.0,
    ) {
        let base = log_partial_products(&SeriesSpec::log(law.clone(), y, lambda), 500);
        let faster = log_partial_products(&SeriesSpec::log(law.clone(), y, lambda + dl), 500);
        let higher = log_partial_products(&SeriesSpec::log(law, y * dy, lambda), 500);
        for k in 0..base.len() {
            prop_assert!(faster[k] >= base[k] - 1e-12);
            prop_assert!(higher[k] >= base[k] - 1e-12);
        }
    }

    #[test]
    fn exchange_dominates_the_last_draw(r0 in -5.0f64..50.0, steps in prop::collection::vec((0.0f64..5.0, -5.0f64..20.0), 1..50)) {
        let mut s = ExchangeState { r: r0, step: 0 };
        for (t, w) in steps {
            s = exchange_step(&s, t, w);
            prop_assert!(s.r >= w);
        }
    }

    #[test]
    fn branching_totals_are_cohort_sums(seed in any::<u64>(), a in nonneg_matrix(2), imm in prop::collection::vec(0u64..5, 2)) {
        let mut s = BranchingState::new(vec![2, 1]);
        let mut r = rng::stream(seed);
        for _ in 0..15 {
            s.advance(OffspringFamily::Poisson, &a, &imm, &mut r).unwrap();
            let mut sum = [0u64; 2];
            for c in &s.cohorts {
                sum[0] += c.counts[0];
                sum[1] += c.counts[1];
            }
            prop_assert_eq!(sum.to_vec(), s.z.clone());
        }
    }

    #[test]
    fn frog_rho_solves_its_quadratic(p in 0.05f64..1.0, r in 0.01f64..0.99) {
        if let Ok(rho) = frog_rho(p, r) {
            prop_assert!(rho > 0.0 && rho < 1.0);
            prop_assert!((p * (1.0 - r) * rho * rho - rho + p * r).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn visit_counts_monotone(seed in any::<u64>(), beta in 0.5f64..2.0, p in 0.3f64..3.0) {
        let spec = ProbeSpec {
            process: ProcessSpec::Ar,
            ensemble: Some(MatrixEnsemble::constant(Matrix::scalar(0.5)).unwrap()),
            innovation: InnovationLaw::log_pareto(beta, p),
            b_grid: vec![1.0, 10.0, 100.0],
            horizon: 2000,
            replicas: 8,
            seed,
            budget: u64::MAX,
        };
        let rep = probe(&spec).unwrap();
        prop_assert!(rep.is_monotone());
        prop_assert!((0.0..=1.0).contains(&rep.divergence_fraction));
    }

    #[test]
    fn replicate_is_deterministic(seed in any::<u64>()) {
        let f = |_: usize, r: &mut rng::Stream| InnovationLaw::log_pareto(1.0, 1.0).sample(r);
        prop_assert_eq!(rng::replicate(seed, 32, f), rng::replicate(seed, 32, f));
    }
}
