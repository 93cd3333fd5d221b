use entropic_logistics::network::generate_random_document;
use entropic_logistics::oracles::{brute_force_plan, mc_feasible_tilt_check};
use entropic_logistics::planner::{plan_entropy, plan_objective, total_variation};
use entropic_logistics::prior::{build_rb_prior, kl_decomposition, kl_to_prior, rb_path_measure};
use entropic_logistics::resilience::{
    nominal_cost, single_edge_worst, variance_mass, worst_case_cost, worst_case_means,
};
use entropic_logistics::{
    edge_occupancy, solve_bridge, solve_gibbs, validate_network, CostModel, Demand, Network,
    NetworkDocument, Plan, Shape,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    net: Network,
    demand: Demand,
}

fn instance(max_layer: usize) -> impl Strategy<Value = Instance> {
    (1..=max_layer, 1..=max_layer, 1..=max_layer)
        .prop_flat_map(|(f, w, s)| {
            let shape = Shape::new(f, w, s).unwrap();
            let m = shape.num_edges();
            (
                Just(shape),
                prop::collection::vec(0.0..10.0f64, m),
                prop::collection::vec(0.0..4.0f64, m),
                prop::collection::vec(0.05..1.0f64, s),
            )
        })
        .prop_map(|(shape, cost, var, weights)| {
            let total: f64 = weights.iter().sum();
            Instance {
                net: Network::from_edge_costs(shape, cost, var).unwrap(),
                demand: Demand::new(weights.iter().map(|w| w / total).collect()).unwrap(),
            }
        })
}

/// A feasible plan with random per-outlet conditionals.
fn random_feasible_plan(shape: Shape, demand: &Demand, raw: &[f64], alpha: f64) -> Plan {
    let per = shape.paths_per_outlet();
    let mut probs = vec![0.0; shape.num_paths()];
    for s in 0..shape.outlets {
        let members: Vec<usize> = (0..per).map(|j| j * shape.outlets + s).collect();
        let total: f64 = members.iter().map(|&k| raw[k]).sum();
        for &k in &members {
            probs[k] = demand.values()[s] * raw[k] / total;
        }
    }
    Plan::new(shape, probs, alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_and_bridge_agree(inst in instance(4), alpha in 0.05..20.0f64) {
        let gibbs = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let bridge = solve_bridge(&inst.net, &inst.demand, alpha, 1e-10, 10_000).unwrap();
        prop_assert!(total_variation(&gibbs, &bridge.plan) <= 1e-8);
        prop_assert!(gibbs.marginal_error(&inst.demand) <= 1e-10);
    }

    #[test]
    fn occupancy_lies_on_the_scaled_simplex(inst in instance(4), alpha in 0.05..20.0f64) {
        let plan = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let occ = edge_occupancy(&plan, &inst.net.enumerate_paths()).unwrap();
        prop_assert!((occ.phi().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for s in occ.layer_sums() {
            prop_assert!((s - 1.0 / 3.0).abs() <= 1e-12);
        }
        prop_assert!(occ.phi().iter().all(|&p| (0.0..=1.0 / 3.0 + 1e-15).contains(&p)));
    }

    #[test]
    fn gibbs_plan_beats_other_feasible_plans(
        inst in instance(3),
        alpha in 0.1..10.0f64,
        raw in prop::collection::vec(0.01..1.0f64, 27 * 3),
    ) {
        let shape = inst.net.shape();
        let gibbs = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let other = random_feasible_plan(shape, &inst.demand, &raw, alpha);
        prop_assert!(
            plan_objective(&inst.net, &gibbs, alpha) <= plan_objective(&inst.net, &other, alpha) + 1e-10
        );
    }

    #[test]
    fn entropy_grows_with_alpha(inst in instance(4), a in 0.05..10.0f64, factor in 1.0..10.0f64) {
        let low = solve_gibbs(&inst.net, &inst.demand, a).unwrap();
        let high = solve_gibbs(&inst.net, &inst.demand, a * factor).unwrap();
        prop_assert!(plan_entropy(&high) >= plan_entropy(&low) - 1e-12);
    }

    #[test]
    fn worst_case_follows_the_square_root_law(
        inst in instance(3),
        alpha in 0.1..10.0f64,
        e1 in 0.0..20.0f64,
        e2 in 0.0..20.0f64,
    ) {
        let plan = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let occ = edge_occupancy(&plan, &inst.net.enumerate_paths()).unwrap();
        let cm = CostModel::from_network(&inst.net);
        let s = variance_mass(&cm, &occ).unwrap();
        let l0 = nominal_cost(&cm, &occ).unwrap();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let (l_lo, l_hi) = (worst_case_cost(&cm, lo, &occ).unwrap(), worst_case_cost(&cm, hi, &occ).unwrap());
        prop_assert!(l_lo <= l_hi);
        prop_assert!(l_lo >= l0);
        let expected = 2.0 * hi * s;
        prop_assert!(((l_hi - l0).powi(2) - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-24);
        // concavity at the midpoint
        let mid = worst_case_cost(&cm, 0.5 * (lo + hi), &occ).unwrap();
        prop_assert!(mid >= 0.5 * (l_lo + l_hi) - 1e-12);
    }

    #[test]
    fn worst_case_means_spend_the_whole_budget(inst in instance(3), alpha in 0.1..10.0f64, eps in 0.01..10.0f64) {
        let plan = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let occ = edge_occupancy(&plan, &inst.net.enumerate_paths()).unwrap();
        let cm = CostModel::from_network(&inst.net);
        prop_assume!(variance_mass(&cm, &occ).unwrap() > 1e-12);
        let means = worst_case_means(&cm, eps, &occ).unwrap();
        let kl: f64 = means
            .iter()
            .zip(cm.mean())
            .zip(cm.variance())
            .filter(|(_, v)| **v > 0.0)
            .map(|((a, b), v)| (a - b).powi(2) / (2.0 * v))
            .sum();
        prop_assert!((kl - eps).abs() <= 1e-9 * eps);
        let value: f64 = means.iter().zip(occ.phi()).map(|(a, p)| a * p).sum();
        prop_assert!((value - worst_case_cost(&cm, eps, &occ).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn single_edge_is_bounded_by_the_full_worst_case(inst in instance(3), alpha in 0.1..10.0f64, eps in 0.0..10.0f64) {
        let plan = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let occ = edge_occupancy(&plan, &inst.net.enumerate_paths()).unwrap();
        let cm = CostModel::from_network(&inst.net);
        let full = worst_case_cost(&cm, eps, &occ).unwrap();
        let nominal = nominal_cost(&cm, &occ).unwrap();
        for edge in inst.net.shape().edges() {
            let single = single_edge_worst(&cm, eps, &occ, &edge).unwrap();
            prop_assert!(single <= full + 1e-12);
            prop_assert!(single >= nominal);
        }
    }

    #[test]
    fn sampled_tilts_never_beat_the_bound(inst in instance(3), alpha in 0.1..10.0f64, eps in 0.0..10.0f64, seed in any::<u64>()) {
        let plan = solve_gibbs(&inst.net, &inst.demand, alpha).unwrap();
        let occ = edge_occupancy(&plan, &inst.net.enumerate_paths()).unwrap();
        let cm = CostModel::from_network(&inst.net);
        let best = mc_feasible_tilt_check(&cm, &occ, eps, 500, seed).unwrap();
        prop_assert!(best <= worst_case_cost(&cm, eps, &occ).unwrap() + 1e-9);
    }

    #[test]
    fn kl_decomposition_holds_for_any_feasible_plan(
        inst in instance(3),
        alpha in 0.2..10.0f64,
        raw in prop::collection::vec(0.01..1.0f64, 27 * 3),
    ) {
        let prior = build_rb_prior(&inst.net, alpha).unwrap();
        let plan = random_feasible_plan(inst.net.shape(), &inst.demand, &raw, alpha);
        let kl = kl_to_prior(&inst.net, &plan, &prior).unwrap();
        let parts = kl_decomposition(&inst.net, &inst.demand, &plan, &prior);
        prop_assert!((kl - parts.total()).abs() <= 1e-8 * (1.0 + kl.abs()));
        prop_assert!(kl >= -1e-10);
    }

    #[test]
    fn walk_measure_is_a_probability(inst in instance(2), alpha in 0.2..10.0f64) {
        let prior = build_rb_prior(&inst.net, alpha).unwrap();
        let n = prior.num_nodes();
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if let Ok(m) = rb_path_measure(&prior, &[a, b, c, d]) {
                            prop_assert!(m >= 0.0);
                            total += m;
                        }
                    }
                }
            }
        }
        prop_assert!((total - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn perron_root_matches_a_dense_eigensolver(inst in instance(3), alpha in 0.2..10.0f64) {
        let prior = build_rb_prior(&inst.net, alpha).unwrap();
        let n = prior.num_nodes();
        let b = DMatrix::from_fn(n, n, |i, j| prior.weights().get(i, j));
        let eig = b.symmetric_eigen();
        let top = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((prior.lambda() - top).abs() <= 1e-9 * top);
        let uv: f64 = prior.u().iter().zip(prior.v()).map(|(a, b)| a * b).sum();
        prop_assert!((uv - 1.0).abs() <= 1e-12);
        prop_assert!(prior.u().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn generated_documents_round_trip(kf in 1..5usize, kw in 1..5usize, ks in 1..5usize, seed in any::<u64>()) {
        let doc = generate_random_document(kf, kw, ks, seed, 10.0).unwrap();
        prop_assert_eq!(&generate_random_document(kf, kw, ks, seed, 10.0).unwrap(), &doc);
        let back = NetworkDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(&back, &doc);
        let (a, _) = validate_network(&doc).unwrap();
        let (b, _) = validate_network(&back).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gibbs_matches_grid_search_on_tiny_instances(
        costs in prop::collection::vec(0.0..3.0f64, 7),
        alpha in 0.3..5.0f64,
    ) {
        // 3 factories, 1 warehouse, 1 outlet: two free dimensions
        let shape = Shape::new(3, 1, 1).unwrap();
        let net = Network::from_edge_costs(shape, costs, vec![0.0; 7]).unwrap();
        let demand = Demand::uniform(1);
        let gibbs = solve_gibbs(&net, &demand, alpha).unwrap();
        let grid = brute_force_plan(&net, &demand, alpha, 2e-3).unwrap();
        prop_assert!(plan_objective(&net, &gibbs, alpha) <= plan_objective(&net, &grid, alpha) + 1e-12);
        prop_assert!(total_variation(&gibbs, &grid) <= 5e-3);
    }
}

#[test]
fn unit_chain_prior_matches_dense_eigenvector() {
    let shape = Shape::new(1, 1, 1).unwrap();
    let net = Network::from_edge_costs(shape, vec![1.0, 2.0, 0.5], vec![0.0; 3]).unwrap();
    let prior = build_rb_prior(&net, 1.0).unwrap();
    let b = DMatrix::from_fn(4, 4, |i, j| prior.weights().get(i, j));
    let eig = b.clone().symmetric_eigen();
    let (k, top) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &l)| {
                if l > best.1 {
                    (k, l)
                } else {
                    best
                }
            });
    assert!((prior.lambda() - top).abs() < 1e-12);
    let mut vec = eig.eigenvectors.column(k).into_owned();
    if vec[0] < 0.0 {
        vec = -vec;
    }
    // symmetric weights: u and v are the unit eigenvector up to the sqrt normalization
    for i in 0..4 {
        assert!((prior.u()[i] - vec[i]).abs() < 1e-10);
        assert!((prior.v()[i] - vec[i]).abs() < 1e-10);
    }
}
