use colphase::first_moment::{
    beta_star, exact_zero_degree, f_upper_bound, f_value, g_value, is_uncolourable_regime,
    maximize_f_grid, reduced_f, threshold, tuple_counts, PhasePair,
};
use proptest::prelude::*;

fn simplex(raw: Vec<f64>) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn alpha_strategy() -> impl Strategy<Value = Vec<f64>> {
    (2usize..5).prop_flat_map(|q| prop::collection::vec(0.05f64..1.0, q)).prop_map(simplex)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn beta_star_relaxed_constraints(alpha in alpha_strategy(), arity in 2u32..5) {
        let pp = beta_star(&alpha, arity).unwrap();
        let q = alpha.len() as u32;
        prop_assert!((pp.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (idx, &b) in pp.beta.iter().enumerate() {
            prop_assert!(b >= 0.0);
            if tuple_counts(idx, q, arity).iter().filter(|&&c| c > 0).count() == 1 {
                prop_assert_eq!(b, 0.0);
            }
        }
        let z = 1.0 - alpha.iter().map(|a| a.powi(arity as i32)).sum::<f64>();
        prop_assert!((g_value(&pp) - z.ln()).abs() < 1e-12);
    }

    #[test]
    fn f_is_bounded_by_reduced_f(raw in prop::collection::vec(0.0f64..1.0, 27), arity in 2u32..4, delta in 1u32..40) {
        // any distribution on non-monochromatic tuples, with alpha its marginal
        let q = 3u32;
        let n = 3usize.pow(arity);
        let mut beta: Vec<f64> = raw[..n].to_vec();
        for (idx, b) in beta.iter_mut().enumerate() {
            if tuple_counts(idx, q, arity).iter().filter(|&&c| c > 0).count() == 1 {
                *b = 0.0;
            }
        }
        let s: f64 = beta.iter().sum();
        prop_assume!(s > 1e-3);
        beta.iter_mut().for_each(|b| *b /= s);
        let mut alpha = vec![0.0; q as usize];
        for (idx, b) in beta.iter().enumerate() {
            for (i, c) in tuple_counts(idx, q, arity).iter().enumerate() {
                alpha[i] += f64::from(*c) * b / f64::from(arity);
            }
        }
        prop_assume!(alpha.iter().all(|&a| a > 1e-9));
        let pp = PhasePair { q, arity, alpha: alpha.clone(), beta };
        prop_assert!(pp.is_feasible(1e-12));
        prop_assert!(f_value(&pp, delta) <= reduced_f(&alpha, arity, delta) + 1e-10);
    }

    #[test]
    fn beta_star_maximises_g(alpha in alpha_strategy(), arity in 2u32..4, bump in 0.001f64..0.05, seed in 0usize..1000) {
        // moving mass between two tuples with equal colour content keeps feasibility
        let pp = beta_star(&alpha, arity).unwrap();
        let q = alpha.len() as u32;
        let n = pp.beta.len();
        let a = seed % n;
        let ca = tuple_counts(a, q, arity);
        let Some(b) = (0..n).find(|&b| b != a && tuple_counts(b, q, arity) == ca) else {
            return Ok(());
        };
        prop_assume!(pp.beta[a] > bump);
        let mut moved = pp.clone();
        moved.beta[a] -= bump * pp.beta[a];
        moved.beta[b] += bump * pp.beta[a];
        prop_assert!(g_value(&moved) <= g_value(&pp) + 1e-12);
    }

    #[test]
    fn uncolourable_regime_is_monotone(q in 2u32..6, arity in 2u32..5, delta in 1u32..300) {
        if is_uncolourable_regime(q, arity, delta) {
            prop_assert!(is_uncolourable_regime(q, arity, delta + 1));
        }
    }

    #[test]
    fn bound_dominates_reduced_f(alpha in alpha_strategy(), arity in 2u32..5, delta in 1u32..40) {
        let q = alpha.len() as u32;
        prop_assert!(reduced_f(&alpha, arity, delta) <= f_upper_bound(q, arity, delta) + 1e-12);
    }
}

#[test]
fn uniform_beta_star_is_feasible_and_exact() {
    for (q, arity) in [(2u32, 3u32), (3, 2), (3, 3), (4, 2)] {
        let u = vec![1.0 / f64::from(q); q as usize];
        let pp = beta_star(&u, arity).unwrap();
        assert!(pp.is_feasible(1e-12), "violation {}", pp.max_violation());
        for delta in [1u32, 7, 30] {
            let direct = f_value(&pp, delta);
            let closed = reduced_f(&u, arity, delta);
            assert!((direct - closed).abs() < 1e-12 * (1.0 + closed.abs()));
        }
    }
}

#[test]
fn uniform_attains_bound() {
    for (q, arity, delta) in [(2u32, 3u32, 10u32), (3, 2, 7), (4, 3, 50)] {
        let u = vec![1.0 / f64::from(q); q as usize];
        assert!((reduced_f(&u, arity, delta) - f_upper_bound(q, arity, delta)).abs() < 1e-12);
        let m = maximize_f_grid(q, arity, delta, 24).unwrap();
        assert!(m.value <= f_upper_bound(q, arity, delta) + 1e-9);
    }
}

#[test]
fn threshold_values() {
    assert!((threshold(2, 3) - 8.317766166719343).abs() < 1e-12);
    let z = exact_zero_degree(2, 3);
    assert!(f_upper_bound(2, 3, z.ceil() as u32) < 0.0);
    assert!(f_upper_bound(2, 3, z.floor() as u32) > 0.0);
}
