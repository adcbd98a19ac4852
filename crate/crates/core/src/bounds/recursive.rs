//! Per-round upper bound on the stochastic regret,
//! `Reg(p) ≤ Σ_t t·E D(Unif_t, Ū_t)` with
//! `Ū_t = ((t-1)/t)·Unif_{t-1} + (1/t)·p_t(·|Z_1..Z_{t-1})`.

use crate::divergence::{fold_subtrees, gap};
use crate::engine::enumerate::check_compatible;
use crate::error::Result;
use crate::game::Game;
use crate::numerics::NeumaierSum;
use crate::strategy::AdversaryStrategy;

#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveBound {
    /// `t·E D(Unif_t, Ū_t)` for `t = 1..T`.
    pub terms: Vec<f64>,
    pub total: f64,
}

pub fn recursive_upper_bound_terms(
    game: &Game,
    strategy: &dyn AdversaryStrategy,
    cap: u64,
) -> Result<RecursiveBound> {
    check_compatible(game, strategy)?;
    let n = game.n_outcomes();
    let horizon = strategy.horizon();
    let sums = fold_subtrees(
        strategy,
        cap,
        horizon,
        |acc, h, prob, cond| {
            let t = (h.len() + 1) as f64;
            let mut counts = vec![0.0; n];
            for &z in h {
                counts[z] += 1.0;
            }
            let bar: Vec<f64> = counts
                .iter()
                .zip(cond.weights())
                .map(|(c, p)| (c + p) / t)
                .collect();
            let f = game.selected_action(&bar);
            let bar_gap = gap(game, &bar, f);
            let mut unif = vec![0.0; n];
            for (z, &pz) in cond.weights().iter().enumerate() {
                if pz > 0.0 {
                    for (u, c) in unif.iter_mut().zip(&counts) {
                        *u = c / t;
                    }
                    unif[z] += 1.0 / t;
                    acc[h.len()].add(prob * pz * t * (gap(game, &unif, f) - bar_gap));
                }
            }
        },
        |_, _, _| {},
    )?;
    let terms: Vec<f64> = sums.iter().map(NeumaierSum::value).collect();
    let total = terms.iter().copied().collect::<NeumaierSum>().value();
    Ok(RecursiveBound { terms, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pregret::p_regret_exact;
    use crate::games::{quadratic_game, ShrinkageAdversary};
    use crate::strategy::IidStrategy;

    #[test]
    fn bound_dominates_regret() {
        let g = quadratic_game(257, Some(5)).unwrap();
        let s = ShrinkageAdversary::new(5).unwrap();
        let b = recursive_upper_bound_terms(&g, &s, 10_000).unwrap();
        let reg = p_regret_exact(&g, &s, 10_000).unwrap().value;
        assert!(b.total >= reg - 1e-12, "{} < {reg}", b.total);
        for (i, term) in b.terms.iter().enumerate() {
            assert!(*term <= 64.0 / (i + 1) as f64);
        }
    }

    #[test]
    fn point_mass_terms_vanish() {
        let g = quadratic_game(33, None).unwrap();
        let s = IidStrategy::point_mass(2, 1, 4).unwrap();
        let b = recursive_upper_bound_terms(&g, &s, 100).unwrap();
        assert!(b.terms.iter().all(|&t| t == 0.0), "{b:?}");
    }
}
