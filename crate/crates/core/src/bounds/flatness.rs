//! Flatness of −Φ in the ℓ₁ norm, stability of the selected minimizers and
//! the logarithmic regret bound that follows from flatness.

use rand::Rng;

use crate::bounds::constants::{action_coords, estimate_constants};
use crate::bounds::{BoundCheckResult, Witness};
use crate::divergence::divergence_raw;
use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game};
use crate::numerics::{l1_distance, random_simplex_point};
use crate::rng::parallel_map;

/// Additive allowance on every flatness and stability comparison.
pub const CHECK_TOL: f64 = 1e-9;

/// Largest distance between neighbouring actions: the biggest gap of the
/// sorted grid for one-dimensional games, the largest nearest-neighbour
/// distance otherwise.
pub fn action_spacing(game: &Game) -> Result<f64> {
    let (coords, norm) = action_coords(game)?;
    if coords.len() < 2 {
        return Ok(0.0);
    }
    if norm == EmbeddingNorm::Abs1d {
        let mut xs: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Ok(xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max));
    }
    let mut worst: f64 = 0.0;
    for (i, a) in coords.iter().enumerate() {
        let nearest = coords
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| norm.distance(a, b))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Discretization allowance for flatness: `h²/2` for one-dimensional grids
/// with spacing `h`, zero otherwise.
fn flatness_slack(game: &Game) -> f64 {
    match game.embedding_norm() {
        Some(EmbeddingNorm::Abs1d) => action_spacing(game).map_or(0.0, |h| h * h / 2.0),
        _ => 0.0,
    }
}

fn divergence(game: &Game, q: &[f64], p: &[f64]) -> f64 {
    divergence_raw(game, q, p, game.selected_action(p))
}

fn lerp(p: &[f64], q: &[f64], lambda: f64) -> Vec<f64> {
    p.iter().zip(q).map(|(a, b)| a + lambda * (b - a)).collect()
}

/// Pairs close to a point on the segment `[p, q]` where the selected
/// minimizer changes, on either side of it at ℓ₁ distance `2δ`.
fn straddle_pairs(game: &Game, p: &[f64], q: &[f64], alpha: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let f0 = game.selected_action(p);
    if game.selected_action(q) == f0 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if game.selected_action(&lerp(p, q, mid)) == f0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kink = 0.5 * (lo + hi);
    let len = l1_distance(p, q);
    let scale = if alpha > 1.0 { 1.0 / alpha } else { 1.0 };
    let mut out = Vec::new();
    for k in 1..=4 {
        let step = 10f64.powi(-k) * scale / len;
        let a = (kink - step).max(0.0);
        let b = (kink + step).min(1.0);
        let (x, y) = (lerp(p, q, a), lerp(p, q, b));
        out.push((x.clone(), y.clone()));
        out.push((y, x));
    }
    out
}

/// Samples `pairs` random pairs from the uniform law on the simplex; about
/// half of them also contribute pairs straddling a change of the selected
/// minimizer along their segment. Checks `D(q, p) ≤ α‖p - q‖₁² + slack + 1e-9` for each, where
/// the slack is the discretization allowance of one-dimensional grids.
///
/// `observed_value` is the largest `(D - slack)/‖p - q‖₁²` seen.
pub fn flatness_check(
    game: &Game,
    alpha: f64,
    pairs: usize,
    seed: u64,
) -> Result<BoundCheckResult> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::invalid("alpha must be nonnegative"));
    }
    let n = game.n_outcomes();
    let slack = flatness_slack(game);
    let results = parallel_map(seed, "flatness", pairs, |rng| {
        let p = random_simplex_point(n, rng);
        let q = random_simplex_point(n, rng);
        let mut cands = vec![(p.clone(), q.clone())];
        if rng.random::<bool>() {
            cands.extend(straddle_pairs(game, &p, &q, alpha));
        }
        let mut ratio = f64::NEG_INFINITY;
        let mut violation = None;
        for (p, q) in cands {
            let dist = l1_distance(&p, &q);
            if dist == 0.0 {
                continue;
            }
            let d = divergence(game, &q, &p);
            ratio = ratio.max((d - slack) / (dist * dist));
            if violation.is_none() && d > alpha * dist * dist + slack + CHECK_TOL {
                violation = Some(Witness::Pair { p, q });
            }
        }
        (ratio, violation)
    });
    let observed = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let witness = results.into_iter().find_map(|r| r.1);
    Ok(BoundCheckResult {
        bound_value: alpha,
        observed_value: observed,
        tolerance: slack + CHECK_TOL,
        holds: witness.is_none(),
        witness,
    })
}

/// Largest `(‖f_p - f_q‖ - h)⁺ / ‖p - q‖₁` over sampled pairs, with `h` the
/// action spacing, against `2L/σ`.
pub fn stability_check(game: &Game, pairs: usize, seed: u64) -> Result<BoundCheckResult> {
    let consts = estimate_constants(game)?;
    if consts.sigma == 0.0 {
        return Err(Error::NotApplicable(format!(
            "game `{}` has zero strong convexity",
            game.name()
        )));
    }
    let bound = 2.0 * consts.lipschitz / consts.sigma;
    let h = action_spacing(game)?;
    let (coords, norm) = action_coords(game)?;
    let n = game.n_outcomes();
    let results = parallel_map(seed, "stability", pairs, |rng| {
        let p = random_simplex_point(n, rng);
        let q = if rng.random::<bool>() {
            random_simplex_point(n, rng)
        } else {
            // A nearby point exercises the continuity end of the range.
            let other = random_simplex_point(n, rng);
            lerp(&p, &other, 1e-3)
        };
        let dist = l1_distance(&p, &q);
        let ratio = if dist == 0.0 {
            0.0
        } else {
            let fp = game.selected_action(&p);
            let fq = game.selected_action(&q);
            (norm.distance(coords[fp], coords[fq]) - h).max(0.0) / dist
        };
        (ratio, p, q)
    });
    let (observed, p, q) = results
        .into_iter()
        .fold((0.0, Vec::new(), Vec::new()), |best, r| {
            if r.0 > best.0 {
                r
            } else {
                best
            }
        });
    let holds = observed <= bound + CHECK_TOL;
    Ok(BoundCheckResult {
        bound_value: bound,
        observed_value: observed,
        tolerance: CHECK_TOL,
        holds,
        witness: (!holds).then_some(Witness::Pair { p, q }),
    })
}

/// `4α ln T`.
pub fn log_t_bound(alpha: f64, horizon: usize) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::invalid("the logarithmic bound needs T >= 2"));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::invalid("alpha must be nonnegative"));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * alpha * (horizon as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{experts_simple_game, quadratic_game};

    #[test]
    fn log_t_examples() {
        assert!((log_t_bound(16.0, 100).unwrap() - 64.0 * 100f64.ln()).abs() < 1e-12);
        assert!((log_t_bound(16.0, 100).unwrap() - 294.73).abs() < 0.01);
        assert_eq!(log_t_bound(0.0, 7).unwrap(), 0.0);
        assert!(log_t_bound(1.0, 1).is_err());
    }

    #[test]
    fn quadratic_is_flat_and_stable() {
        let g = quadratic_game(257, None).unwrap();
        let r = flatness_check(&g, 16.0, 2000, 3).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(!flatness_check(&g, 0.0, 200, 3).unwrap().holds);
        let s = stability_check(&g, 2000, 4).unwrap();
        assert!(s.holds && (s.bound_value - 4.0).abs() < 0.01, "{s:?}");
    }

    #[test]
    fn pyramid_is_not_flat() {
        let g = experts_simple_game(3).unwrap();
        for alpha in [1.0, 100.0, 1e4] {
            let r = flatness_check(&g, alpha, 200, 9).unwrap();
            assert!(!r.holds && r.witness.is_some(), "alpha {alpha}");
        }
        assert!(matches!(
            stability_check(&g, 10, 1),
            Err(Error::NotApplicable(_))
        ));
    }
}
