//! Bregman divergences of −Φ and the three-term regret decomposition.
//!
//! With `f_p` the selected minimizer at `p`,
//! `D(q, p) = Φ(p) - Φ(q) + ⟨ℓ(·, f_p), q - p⟩`. It is evaluated as
//! `(E_q ℓ_{f_p} - Φ(q)) - (E_p ℓ_{f_p} - Φ(p))`, so `D(p, p)` is exactly
//! zero and each bracket is a nonnegative gap read off one loss vector.

use rayon::prelude::*;

use crate::engine::enumerate::{check_compatible, visit_subtree, LeafBudget};
use crate::engine::pregret::p_regret_exact;
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::numerics::{
    composition_count, for_each_composition, ln_factorials, multinomial_pmf, NeumaierSum,
};
use crate::strategy::{AdversaryStrategy, IidStrategy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub value: f64,
    /// Action whose loss vector is the subgradient at `p`.
    pub subgradient_action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    /// Spread of the marginals around their average.
    pub delta0: f64,
    /// Spread of the conditionals around their marginals.
    pub delta1: f64,
    /// Spread of the empirical distribution around the average marginal.
    pub delta2: f64,
    pub regret_over_t: f64,
    /// `|regret_over_t - (-delta0 - delta1 + delta2)|`.
    pub residual: f64,
}

impl DecompositionReport {
    pub fn recombined(&self) -> f64 {
        -self.delta0 - self.delta1 + self.delta2
    }
}

fn check_dims(game: &Game, dims: &[usize]) -> Result<()> {
    if let Some(&d) = dims.iter().find(|&&d| d != game.n_outcomes()) {
        return Err(Error::invalid(format!(
            "distribution has dimension {d}, game has {} outcomes",
            game.n_outcomes()
        )));
    }
    Ok(())
}

/// `E_q ℓ_f - Φ(q)`.
pub(crate) fn gap(game: &Game, q: &[f64], f: usize) -> f64 {
    let e = game.expected_losses(q);
    let phi = e.iter().copied().fold(f64::INFINITY, f64::min);
    e[f] - phi
}

pub(crate) fn divergence_raw(game: &Game, q: &[f64], p: &[f64], f: usize) -> f64 {
    gap(game, q, f) - gap(game, p, f)
}

/// `D(q, p)` with the subgradient `ℓ(·, f)` for a caller-chosen `f`.
pub fn bregman_with_action(
    game: &Game,
    q: &SimplexDist,
    p: &SimplexDist,
    action: usize,
) -> Result<f64> {
    check_dims(game, &[q.len(), p.len()])?;
    if action >= game.n_actions() {
        return Err(Error::Index {
            what: "action",
            index: action,
            len: game.n_actions(),
        });
    }
    Ok(divergence_raw(game, q.weights(), p.weights(), action))
}

/// `D(q, p)` with the deterministic tie-break at `p`.
pub fn bregman_divergence(
    game: &Game,
    q: &SimplexDist,
    p: &SimplexDist,
) -> Result<DivergenceValue> {
    check_dims(game, &[q.len(), p.len()])?;
    let f = game.selected_action(p.weights());
    Ok(DivergenceValue {
        value: divergence_raw(game, q.weights(), p.weights(), f),
        subgradient_action: f,
    })
}

/// `(Φ(E q) - E Φ(q), E D(q, E q))` for a finitely supported random
/// distribution given as `(probability, point)` pairs. The two agree because
/// the linear term of `D` vanishes in expectation.
pub fn concavity_gap(game: &Game, mixture: &[(f64, SimplexDist)]) -> Result<(f64, f64)> {
    if mixture.is_empty() {
        return Err(Error::invalid("empty mixture"));
    }
    check_dims(
        game,
        &mixture.iter().map(|(_, q)| q.len()).collect::<Vec<_>>(),
    )?;
    let total: f64 = mixture.iter().map(|(w, _)| w).sum();
    if mixture.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("mixture weights must form a distribution"));
    }
    let n = game.n_outcomes();
    let mut mean = vec![NeumaierSum::new(); n];
    for (w, q) in mixture {
        for (m, x) in mean.iter_mut().zip(q.weights()) {
            m.add(w * x);
        }
    }
    let mean = SimplexDist::from_weights(mean.iter().map(NeumaierSum::value).collect())?;
    let f = game.selected_action(mean.weights());
    let mut phi_avg = NeumaierSum::new();
    let mut div_avg = NeumaierSum::new();
    for (w, q) in mixture {
        phi_avg.add(w * game.phi_value(q.weights()));
        div_avg.add(w * divergence_raw(game, q.weights(), mean.weights(), f));
    }
    Ok((
        game.phi_value(mean.weights()) - phi_avg.value(),
        div_avg.value(),
    ))
}

/// `E D(Unif_T, p)` over the multinomial law of the counts, and
/// `Reg(p^T)/T` by sequence enumeration.
pub fn iid_regret_as_divergence(
    game: &Game,
    p: &SimplexDist,
    horizon: usize,
    cap: u64,
) -> Result<(f64, f64)> {
    check_dims(game, &[p.len()])?;
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = game.n_outcomes();
    let size = composition_count(horizon, n);
    if size > cap as u128 {
        return Err(Error::limit("count vectors", size, cap));
    }
    let lf = ln_factorials(horizon);
    let f = game.selected_action(p.weights());
    let p_gap = gap(game, p.weights(), f);
    let t = horizon as f64;
    let mut acc = NeumaierSum::new();
    let mut unif = vec![0.0; n];
    for_each_composition(horizon, n, |c| {
        let w = multinomial_pmf(c, p.weights(), &lf);
        if w > 0.0 {
            for (u, &k) in unif.iter_mut().zip(c) {
                *u = k as f64 / t;
            }
            acc.add(w * (gap(game, &unif, f) - p_gap));
        }
    });
    let strategy = IidStrategy::new(p.clone(), horizon)?;
    let regret = p_regret_exact(game, &strategy, cap)?.value / t;
    Ok((acc.value(), regret))
}

fn merge_into(acc: &mut [NeumaierSum], part: &[NeumaierSum]) {
    for (a, b) in acc.iter_mut().zip(part) {
        a.merge(b);
    }
}

/// Visits every first-level subtree in parallel and merges the
/// partial sums in outcome order.
pub(crate) fn fold_subtrees<N, L>(
    strategy: &dyn AdversaryStrategy,
    cap: u64,
    width: usize,
    on_node: N,
    on_leaf: L,
) -> Result<Vec<NeumaierSum>>
where
    N: Fn(&mut [NeumaierSum], &[usize], f64, &SimplexDist) + Sync,
    L: Fn(&mut [NeumaierSum], &[usize], f64) + Sync,
{
    let budget = LeafBudget::new(strategy, cap);
    let root = strategy.conditional(&[]);
    let mut acc = vec![NeumaierSum::new(); width];
    on_node(&mut acc, &[], 1.0, &root);
    let children: Vec<(usize, f64)> = root
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(z, &p)| (z, p))
        .collect();
    let parts: Vec<Result<Vec<NeumaierSum>>> = children
        .par_iter()
        .map(|&(z, pz)| {
            let cell = std::cell::RefCell::new(vec![NeumaierSum::new(); width]);
            let mut prefix = vec![z];
            visit_subtree(
                strategy,
                &mut prefix,
                pz,
                &budget,
                &mut |h, prob, cond| on_node(&mut cell.borrow_mut(), h, prob, cond),
                &mut |seq, prob| on_leaf(&mut cell.borrow_mut(), seq, prob),
            )?;
            Ok(cell.into_inner())
        })
        .collect();
    for part in parts {
        merge_into(&mut acc, &part?);
    }
    Ok(acc)
}

/// Marginal law of each round: `p_t^m[z] = Σ_h P(h)·p_t(z | h)`.
pub fn marginals(strategy: &dyn AdversaryStrategy, cap: u64) -> Result<Vec<SimplexDist>> {
    let n = strategy.n_outcomes();
    let horizon = strategy.horizon();
    if horizon == 0 {
        return Err(Error::invalid("strategy horizon must be at least 1"));
    }
    let sums = fold_subtrees(
        strategy,
        cap,
        horizon * n,
        |acc, h, prob, cond| {
            let t = h.len();
            for (z, &w) in cond.weights().iter().enumerate() {
                acc[t * n + z].add(prob * w);
            }
        },
        |_, _, _| {},
    )?;
    sums.chunks(n)
        .map(|c| SimplexDist::from_weights(c.iter().map(NeumaierSum::value).collect()))
        .collect()
}

/// Marginals, their average, and the three divergence terms; the residual
/// is measured against [`p_regret_exact`].
pub fn decomposition(
    game: &Game,
    strategy: &dyn AdversaryStrategy,
    cap: u64,
) -> Result<DecompositionReport> {
    check_compatible(game, strategy)?;
    let horizon = strategy.horizon();
    let t = horizon as f64;
    let n = game.n_outcomes();
    let margs = marginals(strategy, cap)?;
    let mut avg = vec![NeumaierSum::new(); n];
    for m in &margs {
        for (a, &w) in avg.iter_mut().zip(m.weights()) {
            a.add(w / t);
        }
    }
    let avg = SimplexDist::from_weights(avg.iter().map(NeumaierSum::value).collect())?;
    let f_avg = game.selected_action(avg.weights());
    let avg_gap = gap(game, avg.weights(), f_avg);

    let delta0: NeumaierSum = margs
        .iter()
        .map(|m| divergence_raw(game, m.weights(), avg.weights(), f_avg) / t)
        .collect();

    let marg_actions: Vec<usize> = margs
        .iter()
        .map(|m| game.selected_action(m.weights()))
        .collect();
    let marg_gaps: Vec<f64> = margs
        .iter()
        .zip(&marg_actions)
        .map(|(m, &f)| gap(game, m.weights(), f))
        .collect();
    let sums = fold_subtrees(
        strategy,
        cap,
        2,
        |acc, h, prob, cond| {
            let k = h.len();
            let d = gap(game, cond.weights(), marg_actions[k]) - marg_gaps[k];
            acc[0].add(prob * d / t);
        },
        |acc, seq, prob| {
            let mut unif = vec![0.0; n];
            for &z in seq {
                unif[z] += 1.0 / t;
            }
            acc[1].add(prob * (gap(game, &unif, f_avg) - avg_gap));
        },
    )?;
    let regret_over_t = p_regret_exact(game, strategy, cap)?.value / t;
    let mut report = DecompositionReport {
        delta0: delta0.value(),
        delta1: sums[0].value(),
        delta2: sums[1].value(),
        regret_over_t,
        residual: 0.0,
    };
    report.residual = (regret_over_t - report.recombined()).abs();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::JointDistTree;
    use crate::games::{experts_simple_game, quadratic_game, ShrinkageAdversary};

    #[test]
    fn pyramid_example_with_first_action() {
        let g = experts_simple_game(2).unwrap();
        let q = SimplexDist::new(vec![0.8, 0.2]).unwrap();
        let p = SimplexDist::uniform(2);
        let d = bregman_divergence(&g, &q, &p).unwrap();
        assert_eq!(d.subgradient_action, 0);
        assert!((d.value - 0.6).abs() < 1e-15);
        assert_eq!(bregman_divergence(&g, &p, &p).unwrap().value, 0.0);
    }

    #[test]
    fn iid_identity_examples() {
        let g = quadratic_game(33, None).unwrap();
        let (a, b) = iid_regret_as_divergence(&g, &SimplexDist::uniform(2), 4, 1_000_000).unwrap();
        assert!(
            (a - 0.25).abs() < 1e-9 && (b - 0.25).abs() < 1e-9,
            "{a} {b}"
        );
        let (a, b) =
            iid_regret_as_divergence(&g, &SimplexDist::point_mass(2, 1), 3, 1_000_000).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        // Reg = 2·Φ(p) - E min(n_1, n_2) = 1 - 1/2, so Reg/T = 1/4.
        let e = experts_simple_game(2).unwrap();
        let (a, b) = iid_regret_as_divergence(&e, &SimplexDist::uniform(2), 2, 1000).unwrap();
        assert!(
            (a - 0.25).abs() < 1e-12 && (b - 0.25).abs() < 1e-12,
            "{a} {b}"
        );
    }

    #[test]
    fn shrinkage_marginals_and_decomposition() {
        let g = quadratic_game(257, Some(2)).unwrap();
        let s = ShrinkageAdversary::new(2).unwrap();
        let m = marginals(&s, 1000).unwrap();
        for dist in &m {
            assert!((dist[0] - 0.5).abs() < 1e-15);
        }
        let r = decomposition(&g, &s, 1000).unwrap();
        assert!(r.residual <= 1e-9, "{r:?}");
        assert!((r.recombined() - 0.625).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn iid_joint_has_no_dependence_terms() {
        let g = experts_simple_game(3).unwrap();
        let p = SimplexDist::new(vec![0.2, 0.3, 0.5]).unwrap();
        let j = JointDistTree::iid(&p, 3, 1000).unwrap();
        let r = decomposition(&g, &j, 1000).unwrap();
        assert!(r.delta0.abs() < 1e-15 && r.delta1.abs() < 1e-15, "{r:?}");
        assert!(r.residual <= 1e-12);
    }
}
