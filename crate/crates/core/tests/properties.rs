//! Property checks of Φ, its divergence and the regret functional on random
//! small games.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regretlab::bounds::{experts_covariance, rademacher_average};
use regretlab::divergence::{
    bregman_divergence, bregman_with_action, concavity_gap, decomposition,
};
use regretlab::engine::joint::JointDistTree;
use regretlab::engine::pregret::p_regret_exact;
use regretlab::games::random_game;
use regretlab::{Game, IidStrategy, SimplexDist, DEFAULT_TIE_TOL};

const CAP: u64 = 1_000_000;

fn simplex(n: usize) -> impl Strategy<Value = SimplexDist> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|mut w| {
        w[0] += 1e-3;
        let s: f64 = w.iter().sum();
        SimplexDist::new(w.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

fn game() -> impl Strategy<Value = Game> {
    (2usize..=3, 1usize..=6, any::<u64>()).prop_map(|(n, k, seed)| random_game(n, k, seed).unwrap())
}

fn game_and_points(count: usize) -> impl Strategy<Value = (Game, Vec<SimplexDist>)> {
    game().prop_flat_map(move |g| {
        let n = g.n_outcomes();
        (Just(g), prop::collection::vec(simplex(n), count))
    })
}

fn joint(n: usize, horizon: usize, seed: u64) -> JointDistTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    JointDistTree::random(n, horizon, 0.3, &mut rng, CAP).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_concave((g, ps) in game_and_points(2), lambda in 0.0f64..=1.0) {
        let m = ps[0].mix(&ps[1], lambda);
        let lhs = g.phi_value(m.weights());
        let rhs = lambda * g.phi_value(ps[0].weights()) + (1.0 - lambda) * g.phi_value(ps[1].weights());
        prop_assert!(lhs >= rhs - 1e-9, "{lhs} < {rhs}");
    }

    #[test]
    fn phi_at_point_mass_is_the_row_minimum(g in game()) {
        for z in 0..g.n_outcomes() {
            let want = g.loss_row(z).iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(g.phi_value(SimplexDist::point_mass(g.n_outcomes(), z).weights()), want);
        }
    }

    #[test]
    fn fewer_actions_give_a_smaller_support_function(
        g in game(),
        x in prop::collection::vec(-2.0f64..2.0, 3),
        mask in prop::collection::vec(any::<bool>(), 6),
    ) {
        let mut keep: Vec<usize> = (0..g.n_actions()).filter(|&f| mask[f]).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let sub = g.restrict_actions(&keep).unwrap();
        let x = &x[..g.n_outcomes()];
        prop_assert!(sub.support_function(x).unwrap() <= g.support_function(x).unwrap());
    }

    #[test]
    fn support_function_commutes_with_linear_maps(
        g in game(),
        a in prop::collection::vec(-1.0f64..1.0, 9),
        y in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let n = g.n_outcomes();
        let a = |i: usize, j: usize| a[i * 3 + j] + if i == j { 2.0 } else { 0.0 };
        let image: Vec<Vec<f64>> = g
            .negated_loss_vectors()
            .iter()
            .map(|s| (0..n).map(|i| (0..n).map(|j| a(i, j) * s[j]).sum()).collect())
            .collect();
        let y = &y[..n];
        let aty: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a(i, j) * y[i]).sum()).collect();
        let lhs = regretlab::game::support_of_points(&image, y);
        let rhs = g.support_function(&aty).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn subgradients_support_phi_from_above((g, ps) in game_and_points(2)) {
        let (p, q) = (&ps[0], &ps[1]);
        for v in g.subdifferential(p, DEFAULT_TIE_TOL) {
            let lin: f64 = g.phi_value(p.weights())
                + v.iter().zip(q.weights().iter().zip(p.weights())).map(|(v, (a, b))| v * (a - b)).sum::<f64>();
            prop_assert!(g.phi_value(q.weights()) <= lin + 1e-9);
            let d = bregman_divergence(&g, q, p).unwrap().value;
            prop_assert!(d >= -1e-9, "{d}");
        }
    }

    #[test]
    fn divergence_ignores_the_tie_break_where_phi_is_smooth((g, ps) in game_and_points(2)) {
        let (q, p) = (&ps[0], &ps[1]);
        // Repeating the minimizer forces a tie that leaves Φ differentiable.
        let best = g.selected_action(p.weights());
        let mut keep: Vec<usize> = (0..g.n_actions()).collect();
        keep.push(best);
        let g = g.restrict_actions(&keep).unwrap();
        let face = g.phi(p, DEFAULT_TIE_TOL).argmin_indices;
        let loss_vectors: Vec<Vec<f64>> = face.iter().map(|&f| g.loss_vector(f)).collect();
        prop_assert!(face.len() >= 2);
        if loss_vectors.iter().all(|v| v == &loss_vectors[0]) {
            let base = bregman_divergence(&g, q, p).unwrap().value;
            for &f in &face {
                let d = bregman_with_action(&g, q, p, f).unwrap();
                prop_assert!((d - base).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn linear_term_cancels_in_expectation(
        (g, ps) in game_and_points(4),
        w in prop::collection::vec(0.01f64..1.0, 4),
    ) {
        let total: f64 = w.iter().sum();
        let mixture: Vec<(f64, SimplexDist)> =
            w.iter().zip(ps).map(|(x, q)| (x / total, q)).collect();
        let (gap, div) = concavity_gap(&g, &mixture).unwrap();
        prop_assert!((gap - div).abs() <= 1e-9, "{gap} vs {div}");
        prop_assert!(gap >= -1e-9);
    }

    #[test]
    fn iid_regret_is_nonnegative((g, ps) in game_and_points(1), horizon in 1usize..=4) {
        let s = IidStrategy::new(ps[0].clone(), horizon).unwrap();
        let r = p_regret_exact(&g, &s, CAP).unwrap();
        prop_assert!(r.value >= -1e-9, "{}", r.value);
        let recombined: f64 = r.conditional_phi_terms.iter().sum::<f64>() - r.comparator;
        prop_assert!((recombined - r.value).abs() <= 1e-12);
    }

    #[test]
    fn regret_is_concave_in_the_joint(
        g in game(),
        horizon in 1usize..=3,
        seeds in (any::<u64>(), any::<u64>()),
        lambda in 0.0f64..=1.0,
    ) {
        let n = g.n_outcomes();
        let (a, b) = (joint(n, horizon, seeds.0), joint(n, horizon, seeds.1));
        let m = JointDistTree::mixture(&a, &b, lambda).unwrap();
        let reg = |j: &JointDistTree| p_regret_exact(&g, j, CAP).unwrap().value;
        let (ra, rb, rm) = (reg(&a), reg(&b), reg(&m));
        prop_assert!(rm >= lambda * ra + (1.0 - lambda) * rb - 1e-9, "{rm} {ra} {rb}");
    }

    #[test]
    fn decomposition_recombines(g in game(), horizon in 1usize..=4, seed in any::<u64>()) {
        let j = joint(g.n_outcomes(), horizon, seed);
        let d = decomposition(&g, &j, CAP).unwrap();
        prop_assert!(d.residual <= 1e-9, "{d:?}");
        prop_assert!(d.delta0 >= -1e-9 && d.delta1 >= -1e-9 && d.delta2 >= -1e-9, "{d:?}");
    }

    #[test]
    fn rademacher_average_grows_with_the_class(
        g in game(),
        sample in prop::collection::vec(0usize..3, 1..=8),
        mask in prop::collection::vec(any::<bool>(), 6),
    ) {
        let sample: Vec<usize> = sample.into_iter().map(|z| z % g.n_outcomes()).collect();
        let mut keep: Vec<usize> = (0..g.n_actions()).filter(|&f| mask[f]).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let sub = g.restrict_actions(&keep).unwrap();
        let small = rademacher_average(&sub, &sample, 2, 0).unwrap().mean;
        let large = rademacher_average(&g, &sample, 2, 0).unwrap().mean;
        prop_assert!(small <= large + 1e-12, "{small} > {large}");
    }
}

#[test]
fn experts_covariance_is_psd() {
    for n in 2..=12 {
        let c = experts_covariance(n).unwrap();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| c[i][j]);
        for i in 0..n {
            for j in 0..n {
                assert!((c[i][j] - c[j][i]).abs() <= 1e-10);
            }
        }
        let min = nalgebra::SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "N={n}: {min}");
    }
}
