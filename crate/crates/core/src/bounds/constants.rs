//! Lipschitz constant `L`, strong-convexity constant `σ` (midpoint form
//! `avg - mid ≥ (σ/8)‖f - g‖²`) and `α = 2L²/σ`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game};

/// Largest action set for which all action pairs are examined.
pub const MAX_PAIR_ACTIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantEstimates {
    pub lipschitz: f64,
    pub sigma: f64,
    /// `2L²/σ`, or infinite when `σ = 0`.
    pub alpha: f64,
    pub alpha_infinite: bool,
    pub norm: EmbeddingNorm,
    /// Midpoint triples found among the actions.
    pub midpoint_triples: usize,
}

pub(crate) fn action_coords(game: &Game) -> Result<(Vec<&[f64]>, EmbeddingNorm)> {
    let norm = game
        .embedding_norm()
        .ok_or_else(|| Error::invalid(format!("game `{}` has no norm tag", game.name())))?;
    let coords = game
        .actions()
        .iter()
        .map(|a| a.coords.as_deref())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| {
            Error::invalid(format!("game `{}` lacks action coordinates", game.name()))
        })?;
    Ok((coords, norm))
}

fn key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v * 1e10).round() as i64).collect()
}

pub fn estimate_constants(game: &Game) -> Result<ConstantEstimates> {
    let (coords, norm) = action_coords(game)?;
    let k = coords.len();
    if k > MAX_PAIR_ACTIONS {
        return Err(Error::limit(
            "action pairs",
            (k * k) as u128,
            (MAX_PAIR_ACTIONS * MAX_PAIR_ACTIONS) as u64,
        ));
    }
    let index: HashMap<Vec<i64>, usize> = coords
        .iter()
        .enumerate()
        .map(|(i, c)| (key(c), i))
        .collect();
    let mut lipschitz: f64 = 0.0;
    let mut sigma = f64::INFINITY;
    let mut triples = 0;
    for f in 0..k {
        for g in f + 1..k {
            let dist = norm.distance(coords[f], coords[g]);
            if dist <= 0.0 {
                continue;
            }
            for z in 0..game.n_outcomes() {
                let diff = (game.loss(z, f) - game.loss(z, g)).abs();
                lipschitz = lipschitz.max(diff / dist);
            }
            let mid: Vec<f64> = coords[f]
                .iter()
                .zip(coords[g])
                .map(|(a, b)| (a + b) / 2.0)
                .collect();
            if let Some(&m) = index.get(&key(&mid)) {
                triples += 1;
                for z in 0..game.n_outcomes() {
                    let deficit = (game.loss(z, f) + game.loss(z, g)) / 2.0 - game.loss(z, m);
                    sigma = sigma.min(8.0 * deficit / (dist * dist));
                }
            }
        }
    }
    // Round-off on exactly linear losses leaves deficits near zero.
    if triples == 0 || sigma < 1e-9 {
        sigma = 0.0;
    }
    let alpha_infinite = sigma == 0.0;
    let alpha = if alpha_infinite {
        f64::INFINITY
    } else {
        2.0 * lipschitz * lipschitz / sigma
    };
    Ok(ConstantEstimates {
        lipschitz,
        sigma,
        alpha,
        alpha_infinite,
        norm,
        midpoint_triples: triples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Point;
    use crate::games::{ball_game, quadratic_game};

    #[test]
    fn quadratic_constants() {
        let g = quadratic_game(257, None).unwrap();
        let c = estimate_constants(&g).unwrap();
        let h = 2.0 / 256.0;
        assert!((c.lipschitz - (4.0 - h)).abs() < 1e-9, "{c:?}");
        assert!((c.sigma - 2.0).abs() < 1e-9, "{c:?}");
        assert!((c.alpha - c.lipschitz * c.lipschitz).abs() < 1e-6);
    }

    #[test]
    fn linear_and_constant_losses() {
        let c = estimate_constants(&ball_game(3, 8).unwrap()).unwrap();
        assert!(c.alpha_infinite && c.sigma == 0.0);
        let pts: Vec<Point> = (0..5)
            .map(|i| Point::at(format!("{i}"), vec![i as f64]))
            .collect();
        let g = Game::from_fn(
            "const",
            vec![Point::labelled("a"), Point::labelled("b")],
            pts,
            Some(EmbeddingNorm::Abs1d),
            |_, _| 1.0,
        )
        .unwrap();
        let c = estimate_constants(&g).unwrap();
        assert_eq!((c.lipschitz, c.sigma), (0.0, 0.0));
    }

    #[test]
    fn needs_embedding() {
        let g = Game::new(
            "bare",
            vec![Point::labelled("a")],
            vec![Point::labelled("x"), Point::labelled("y")],
            vec![vec![0.0, 1.0]],
            None,
        )
        .unwrap();
        assert!(matches!(
            estimate_constants(&g),
            Err(Error::InvalidArgument(_))
        ));
    }
}
