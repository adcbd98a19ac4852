//! Minimax regret by backward induction with a randomized player.
//!
//! `V(z_1..z_T) = -min_f Σ_t ℓ(z_t, f)` and, for shorter histories,
//! `V(h) = min_q max_z [Σ_f q_f ℓ(z, f) + V(h z)]`. Both depend on `h` only
//! through its outcome counts, so the induction runs over count vectors.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::engine::solver::MatrixGameSolver;
use crate::error::{Error, Result};
use crate::game::{Game, History, MixedAction};
use crate::numerics::{composition_count, for_each_composition};

/// Default cap on the number of count-vector states.
pub const DEFAULT_STATE_CAP: u64 = 5_000_000;

/// One interior node of the induction.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNode {
    /// A representative history (outcomes in ascending order).
    pub history: History,
    pub counts: Vec<usize>,
    pub continuation_value: f64,
    pub optimal_mixed_action: MixedAction,
    /// Outcomes attaining `max_z` against the optimal mixed action.
    pub worst_outcome_set: Vec<usize>,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct MinimaxResult {
    pub value: f64,
    /// Interior nodes level by level, root first.
    pub nodes: Vec<ValueNode>,
    /// Largest matrix-game gap reported by the solver.
    pub max_gap: f64,
    pub solver: String,
}

impl MinimaxResult {
    pub fn root(&self) -> &ValueNode {
        &self.nodes[0]
    }
}

/// Count vectors of each length `0..=T` with a lookup from vector to index.
pub(crate) struct CountLevels {
    pub levels: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl CountLevels {
    pub fn new(n_outcomes: usize, horizon: usize, cap: u64) -> Result<Self> {
        let total: u128 = (0..=horizon)
            .map(|t| composition_count(t, n_outcomes))
            .fold(0, |a, b| a.saturating_add(b));
        if total > cap as u128 {
            return Err(Error::limit("count-vector states", total, cap));
        }
        let mut levels = Vec::with_capacity(horizon + 1);
        let mut index = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            let mut level = Vec::new();
            for_each_composition(t, n_outcomes, |c| level.push(c.to_vec()));
            index.push(
                level
                    .iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, c)| (c, i))
                    .collect(),
            );
            levels.push(level);
        }
        Ok(Self { levels, index })
    }

    pub fn child(&self, t: usize, state: usize, z: usize) -> usize {
        let mut c = self.levels[t][state].clone();
        c[z] += 1;
        self.index[t + 1][&c]
    }

    pub fn lookup(&self, counts: &[usize]) -> usize {
        let t: usize = counts.iter().sum();
        self.index[t][counts]
    }
}

pub(crate) fn representative(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(z, &c)| std::iter::repeat_n(z, c))
        .collect()
}

/// `-min_f Σ_z counts[z]·ℓ(z, f)` for every full-length count vector.
pub(crate) fn terminal_values(game: &Game, states: &[Vec<usize>]) -> Vec<f64> {
    states
        .par_iter()
        .map(|c| {
            let mut tot = vec![0.0; game.n_actions()];
            for (z, &k) in c.iter().enumerate() {
                if k > 0 {
                    for (a, l) in tot.iter_mut().zip(game.loss_row(z)) {
                        *a += k as f64 * l;
                    }
                }
            }
            -tot.into_iter().fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn check_horizon(horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    Ok(())
}

/// Value of the `T`-round game with a randomized player, and its tree.
pub fn minimax_value(
    game: &Game,
    horizon: usize,
    solver: &dyn MatrixGameSolver,
    state_cap: u64,
) -> Result<MinimaxResult> {
    check_horizon(horizon)?;
    let n = game.n_outcomes();
    let levels = CountLevels::new(n, horizon, state_cap)?;
    let mut next = terminal_values(game, &levels.levels[horizon]);
    let mut per_level: Vec<Vec<ValueNode>> = Vec::with_capacity(horizon);
    for t in (0..horizon).rev() {
        let solved: Vec<Result<ValueNode>> = levels.levels[t]
            .par_iter()
            .enumerate()
            .map(|(s, counts)| {
                let children: Vec<f64> = (0..n).map(|z| next[levels.child(t, s, z)]).collect();
                let payoff: Vec<Vec<f64>> = (0..game.n_actions())
                    .map(|f| (0..n).map(|z| game.loss(z, f) + children[z]).collect())
                    .collect();
                let sol = solver.solve(&payoff)?;
                let against: Vec<f64> = (0..n)
                    .map(|z| (0..payoff.len()).map(|f| sol.q[f] * payoff[f][z]).sum())
                    .collect();
                let worst = against
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v >= sol.value - 1e-9)
                    .map(|(z, _)| z)
                    .collect();
                Ok(ValueNode {
                    history: History::new(representative(counts), n)?,
                    counts: counts.clone(),
                    continuation_value: sol.value,
                    optimal_mixed_action: sol.q,
                    worst_outcome_set: worst,
                    gap: sol.gap,
                })
            })
            .collect();
        let nodes = solved.into_iter().collect::<Result<Vec<_>>>()?;
        next = nodes.iter().map(|v| v.continuation_value).collect();
        per_level.push(nodes);
    }
    per_level.reverse();
    let nodes: Vec<ValueNode> = per_level.into_iter().flatten().collect();
    let max_gap = nodes.iter().map(|v| v.gap).fold(0.0, f64::max);
    Ok(MinimaxResult {
        value: nodes[0].continuation_value,
        nodes,
        max_gap,
        solver: solver.name().to_string(),
    })
}

/// Value when the player must commit to a single action each round.
pub fn minimax_value_deterministic(game: &Game, horizon: usize, state_cap: u64) -> Result<f64> {
    check_horizon(horizon)?;
    let n = game.n_outcomes();
    let levels = CountLevels::new(n, horizon, state_cap)?;
    let mut next = terminal_values(game, &levels.levels[horizon]);
    for t in (0..horizon).rev() {
        next = (0..levels.levels[t].len())
            .into_par_iter()
            .map(|s| {
                let children: Vec<f64> = (0..n).map(|z| next[levels.child(t, s, z)]).collect();
                (0..game.n_actions())
                    .map(|f| {
                        (0..n)
                            .map(|z| game.loss(z, f) + children[z])
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
    }
    Ok(next[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::solver::{ExhaustiveSolver, LpSolver};
    use crate::games::experts_simple_game;

    #[test]
    fn experts_one_round() {
        for n in 2..=5 {
            let g = experts_simple_game(n).unwrap();
            let r = minimax_value(&g, 1, &LpSolver, DEFAULT_STATE_CAP).unwrap();
            assert!((r.value - 1.0 / n as f64).abs() < 1e-12, "N = {n}");
            for w in r.root().optimal_mixed_action.weights() {
                assert!((w - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solvers_agree_and_deterministic_is_larger() {
        let g = experts_simple_game(2).unwrap();
        for t in 1..=4 {
            let a = minimax_value(&g, t, &LpSolver, DEFAULT_STATE_CAP).unwrap();
            let b = minimax_value(&g, t, &ExhaustiveSolver::default(), DEFAULT_STATE_CAP).unwrap();
            assert!((a.value - b.value).abs() < 1e-10);
            let det = minimax_value_deterministic(&g, t, DEFAULT_STATE_CAP).unwrap();
            assert!(det >= a.value - 1e-12);
        }
    }

    #[test]
    fn state_cap() {
        let g = experts_simple_game(4).unwrap();
        assert!(matches!(
            minimax_value(&g, 10, &LpSolver, 50),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
