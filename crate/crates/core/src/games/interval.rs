//! Absolute loss on `[0, 1]` with a product adversary that moves through
//! disjoint intervals, one per round.

use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game, Point, SimplexDist};
use crate::strategy::{AdversaryStrategy, StrategyKind};

/// `ℓ(z, f) = |z - f|` with outcomes at the midpoints `(i + 1/2)/G` of `G`
/// equal cells and actions at `j/(2G)` for `j = 0..=2G`, so every outcome
/// and every cell boundary is an action.
pub fn disjoint_interval_game(grid: usize) -> Result<Game> {
    if grid == 0 {
        return Err(Error::invalid("interval grid must be positive"));
    }
    let g = grid as f64;
    let outcomes = (0..grid)
        .map(|i| {
            let x = (i as f64 + 0.5) / g;
            Point::at(format!("{x}"), vec![x])
        })
        .collect();
    let actions = (0..=2 * grid)
        .map(|j| {
            let x = j as f64 / (2.0 * g);
            Point::at(format!("{x}"), vec![x])
        })
        .collect();
    Game::from_fn(
        format!("disjoint-interval(grid={grid})"),
        outcomes,
        actions,
        Some(EmbeddingNorm::Abs1d),
        |z, f| (z.coords.as_ref().unwrap()[0] - f.coords.as_ref().unwrap()[0]).abs(),
    )
}

/// Round `t` is uniform over the outcomes in `[(t-1)/T, t/T]`.
#[derive(Debug, Clone)]
pub struct DisjointIntervalStrategy {
    rounds: Vec<SimplexDist>,
}

impl DisjointIntervalStrategy {
    pub fn new(horizon: usize, grid: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if grid < horizon {
            return Err(Error::invalid(format!(
                "grid {grid} is too coarse for T = {horizon}: some round would have no outcome"
            )));
        }
        let (t_f, g_f) = (horizon as f64, grid as f64);
        let rounds = (1..=horizon)
            .map(|t| {
                let lo = (t - 1) as f64 / t_f;
                let hi = t as f64 / t_f;
                let w: Vec<f64> = (0..grid)
                    .map(|i| {
                        let x = (i as f64 + 0.5) / g_f;
                        if x >= lo - 1e-12 && x <= hi + 1e-12 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                SimplexDist::from_weights(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rounds })
    }

    pub fn rounds(&self) -> &[SimplexDist] {
        &self.rounds
    }
}

impl AdversaryStrategy for DisjointIntervalStrategy {
    fn name(&self) -> &str {
        "disjoint-interval"
    }

    fn horizon(&self) -> usize {
        self.rounds.len()
    }

    fn n_outcomes(&self) -> usize {
        self.rounds[0].len()
    }

    fn kind(&self) -> StrategyKind {
        StrategyKind::Product
    }

    fn conditional(&self, history: &[usize]) -> SimplexDist {
        self.rounds[history.len()].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_cover_disjoint_cells() {
        let s = DisjointIntervalStrategy::new(4, 16).unwrap();
        for (t, p) in s.rounds().iter().enumerate() {
            let support: Vec<usize> = (0..16).filter(|&i| p[i] > 0.0).collect();
            assert_eq!(support, (4 * t..4 * t + 4).collect::<Vec<_>>());
        }
        assert!(DisjointIntervalStrategy::new(8, 4).is_err());
    }

    #[test]
    fn game_losses() {
        let g = disjoint_interval_game(4).unwrap();
        assert_eq!(g.n_actions(), 9);
        assert_eq!(g.loss(0, 1), 0.0);
        assert_eq!(g.loss(0, 0), 0.125);
    }
}
