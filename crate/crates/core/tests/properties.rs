use nalgebra::DMatrix;
use pconductance::assignment::{argmax_assign, transport_assign};
use pconductance::cli::config::ExperimentConfig;
use pconductance::graph::WeightedGraph;
use pconductance::prox::ProxSpec;
use pconductance::solvers::conductance_objective;
use proptest::prelude::*;

fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
    (
        (prop_oneof![1.0..10.0f64, Just(f64::INFINITY)], 0.0..5.0f64, 1usize..20, 1usize..500, any::<u64>()),
        (proptest::option::of(0.0..50.0f64), 0.0..=1.0f64, 1e-8..0.5f64, 1usize..1000, 1usize..100),
        (proptest::option::of(0.0..2.0f64), 1usize..30, 0usize..16, any::<bool>()),
    )
        .prop_map(|((p, t, lpc, trials, seed), (epsilon, corrupt, tol, max_outer, max_inner), (alpha_mbo, knn, workers, with_paths))| ExperimentConfig {
            p,
            t,
            labels_per_class: lpc,
            trials,
            seed,
            epsilon,
            corrupt,
            tol,
            max_outer,
            max_inner,
            alpha_mbo,
            knn,
            workers,
            graph: with_paths.then(|| "data/graph.txt".into()),
            labels: with_paths.then(|| "data/labels.csv".into()),
            ..Default::default()
        })
}

fn potentials(max_n: usize, max_k: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (2..=max_n, 2..=max_k).prop_flat_map(|(n, k)| proptest::collection::vec(-1.0..1.0f64, n * k).prop_map(move |v| DMatrix::from_vec(n, k, v)))
}

fn sizes_for(n: usize, k: usize, cuts: &[usize]) -> Vec<usize> {
    let mut bounds: Vec<usize> = cuts.iter().take(k - 1).map(|c| c % (n + 1)).collect();
    bounds.push(0);
    bounds.push(n);
    bounds.sort_unstable();
    bounds.windows(2).map(|w| w[1] - w[0]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(cfg in config_strategy()) {
        let text = cfg.serialize();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn exact_transport_is_integral(phi in potentials(12, 4), cuts in proptest::collection::vec(0usize..100, 3)) {
        let (n, k) = phi.shape();
        let m = sizes_for(n, k, &cuts);
        let a = transport_assign(&phi, &m, 0.0).unwrap();
        prop_assert!(a.is_binary());
        let mut counts = vec![0; k];
        a.labels().iter().for_each(|&c| counts[c] += 1);
        prop_assert_eq!(counts, m.clone());

        // No single swap of two nodes between classes improves the score.
        let labels = a.labels();
        for i in 0..n {
            for j in 0..n {
                let (ci, cj) = (labels[i], labels[j]);
                let gain = phi[(i, cj)] + phi[(j, ci)] - phi[(i, ci)] - phi[(j, cj)];
                prop_assert!(gain <= 1e-9, "swap {} {} gains {}", i, j, gain);
            }
        }
    }

    #[test]
    fn full_slack_is_argmax(phi in potentials(15, 5), cuts in proptest::collection::vec(0usize..100, 4)) {
        let (n, k) = phi.shape();
        let m = sizes_for(n, k, &cuts);
        prop_assert_eq!(transport_assign(&phi, &m, n as f64).unwrap().labels(), argmax_assign(&phi));
    }

    #[test]
    fn prox_is_a_nonexpansive_shrinkage(
        p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(3.0), Just(5.0), Just(f64::INFINITY)],
        lambda in 0.05..5.0f64,
        data in proptest::collection::vec((-4.0..4.0f64, -4.0..4.0f64, 0.2..3.0f64), 1..10),
    ) {
        let a: Vec<f64> = data.iter().map(|d| d.0).collect();
        let b: Vec<f64> = data.iter().map(|d| d.1).collect();
        let w: Vec<f64> = data.iter().map(|d| d.2).collect();
        let spec = ProxSpec::new(p, w, lambda).unwrap();
        let (pa, pb) = (spec.prox(&a).unwrap(), spec.prox(&b).unwrap());
        let dist = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(s, t)| (s - t).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dist(&pa, &pb) <= dist(&a, &b) * (1.0 + 1e-9) + 1e-12);
        for (x, v) in pa.iter().zip(&a) {
            prop_assert!(x.abs() <= v.abs() + 1e-12 && x * v >= -1e-12);
        }
        // The prox point minimizes λs(u) + ½‖u − v‖² against nearby points.
        let obj = |u: &[f64]| lambda * spec.penalty(u) + 0.5 * dist(u, &a).powi(2);
        let base = obj(&pa);
        for i in 0..pa.len() {
            for h in [-1e-3, 1e-3] {
                let mut u = pa.clone();
                u[i] += h;
                prop_assert!(obj(&u) >= base - 1e-10);
            }
        }
    }

    #[test]
    fn conductance_is_scale_invariant(n in 3usize..10, scale in 0.1..50.0f64, p in prop_oneof![Just(1.0), Just(2.0), Just(4.0), Just(f64::INFINITY)]) {
        let g = WeightedGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0 + i as f64))).unwrap();
        let mut r = vec![0.0; n];
        r[0] = 1.0;
        r[n / 2] = -1.0;
        let phi: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let scaled: Vec<f64> = phi.iter().map(|v| v * scale).collect();
        let (a, b) = (conductance_objective(&g, p, &phi, &r), conductance_objective(&g, p, &scaled, &r));
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn incidence_maps_are_adjoint(phi in proptest::collection::vec(-3.0..3.0f64, 6), flow in proptest::collection::vec(-3.0..3.0f64, 9)) {
        let g = WeightedGraph::new(6, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.0), (4, 5, 1.0), (0, 5, 3.0), (1, 4, 1.0), (0, 3, 1.0), (2, 5, 2.0)]).unwrap();
        let bt_phi = g.incidence_apply_t(&phi).unwrap();
        let b_flow = g.incidence_apply(&flow).unwrap();
        let lhs: f64 = bt_phi.iter().zip(&flow).map(|(a, b)| a * b).sum();
        let rhs: f64 = phi.iter().zip(&b_flow).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }
}
