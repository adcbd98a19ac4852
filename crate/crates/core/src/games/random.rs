//! Games with random loss matrices, for property checks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{Game, Point};
use crate::rng::substream;

/// Losses drawn uniformly from `[0, 1)`; outcomes and actions carry labels
/// only.
pub fn random_game(n_outcomes: usize, n_actions: usize, seed: u64) -> Result<Game> {
    if n_outcomes == 0 || n_actions == 0 {
        return Err(Error::invalid(
            "random game needs at least one outcome and one action",
        ));
    }
    let mut rng = substream(seed, "random-game", 0);
    let loss = (0..n_outcomes)
        .map(|_| (0..n_actions).map(|_| rng.random::<f64>()).collect())
        .collect();
    Game::new(
        format!("random({n_outcomes}x{n_actions},seed={seed})"),
        (0..n_outcomes)
            .map(|z| Point::labelled(format!("z{z}")))
            .collect(),
        (0..n_actions)
            .map(|f| Point::labelled(format!("f{f}")))
            .collect(),
        loss,
        None,
    )
}
