use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use qke::feature_map::{DataPoint, Entanglement, FeatureMapConfig};
use qke::kernels::{gram_matrix, KernelFamily};
use qke::shots::{correct_side_probability, n_ca_binomial_exact, n_ca_fq, n_spread_fq, SpreadTarget};

fn spread(kappa: f64, eps: f64, delta: f64, p: f64) -> u64 {
    n_spread_fq(kappa, &SpreadTarget::new(eps, delta, p).unwrap()).unwrap().shots
}

fn entanglement() -> impl Strategy<Value = Entanglement> {
    prop_oneof![Just(Entanglement::Linear), Just(Entanglement::Full)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spread_bound_is_monotone(
        kappa in 0.01f64..0.49,
        dk in 0.0f64..0.2,
        eps in 0.05f64..2.0,
        scale in 1.0f64..4.0,
        delta in 0.01f64..0.5,
        p in 0.5f64..0.98,
        dp in 0.0f64..0.01,
    ) {
        let base = spread(kappa, eps, delta, p);
        // Grows towards κ = ½, symmetric about it.
        prop_assert!(spread((kappa + dk).min(0.5), eps, delta, p) >= base);
        prop_assert_eq!(spread(1.0 - kappa, eps, delta, p), base);
        prop_assert!(spread(kappa, eps * scale, delta, p) <= base);
        prop_assert!(spread(kappa, eps, delta * scale, p) <= base);
        prop_assert!(spread(kappa, eps, delta, p + dp) >= base);
    }

    #[test]
    fn fidelity_ca_bound_is_minimal(m in 1e-4f64..0.999, p in 0.5f64..0.9999) {
        let n = n_ca_fq(m, p).unwrap().shots;
        let reach = |k: u64| 1.0 - (1.0 - m).powf(k as f64);
        prop_assert!(reach(n) >= p - 1e-12);
        prop_assert!(n == 1 || reach(n - 1) < p + 1e-12);
        prop_assert!(n_ca_fq((m * 1.5).min(0.999), p).unwrap().shots <= n);
    }

    #[test]
    fn exact_ca_bound_is_minimal(m in 0.6f64..0.95, p in 0.6f64..0.995) {
        let n = n_ca_binomial_exact(m, 0.5, p).unwrap().shots;
        prop_assert!(correct_side_probability(n, m, 0.5) >= p);
        for k in 1..n {
            prop_assert!(correct_side_probability(k, m, 0.5) < p, "N = {} already passes", k);
        }
    }

    #[test]
    fn gram_matrices_are_psd(
        n in 2usize..5,
        reps in 1usize..3,
        ent in entanglement(),
        gamma in 0.1f64..2.0,
        raw in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 3..7),
    ) {
        let points: Vec<DataPoint> = raw.iter().map(|r| DataPoint::new(r[..n].to_vec()).unwrap()).collect();
        let cfg = FeatureMapConfig::new(n, reps, ent);
        for family in [KernelFamily::FidelityQ, KernelFamily::ProjectedQ] {
            let k = gram_matrix(&points, &cfg, family, gamma).unwrap();
            let m = k.values.nrows();
            let dense = DMatrix::from_fn(m, m, |i, j| k.values[[i, j]]);
            let min = SymmetricEigen::new(dense).eigenvalues.min();
            prop_assert!(min >= -1e-10, "{:?}: min eigenvalue {}", family, min);
        }
    }
}
