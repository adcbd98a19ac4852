//! Linear games on the Euclidean unit ball and the adversary strategies
//! used to lower-bound them.
//!
//! The strategy checks work with vectors in `R^d` directly. [`ball_game`]
//! gives a small finite version for the generic engines.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game, Point};
use crate::games::experts::fair_bit_count;
use crate::numerics::{binomial, MeanEstimate, NeumaierSum};
use crate::rng::{parallel_samples, substream};

/// Horizons up to this use the exact binomial expectation for the two-point
/// walk.
pub const EXACT_WALK_MAX_T: usize = 30;

/// Default number of polygon vertices for the planar game.
pub const DEFAULT_POLYGON: usize = 8;

/// Finite linear game `ℓ(z, f) = ⟨f, z⟩`.
///
/// For `d = 2` the outcomes are `±e_1, ±e_2` and the actions are the
/// vertices of a regular `polygon`-gon inscribed in the unit circle. For
/// `d >= 3` both outcomes and actions are `±e_k`.
pub fn ball_game(d: usize, polygon: usize) -> Result<Game> {
    if d < 2 {
        return Err(Error::invalid("ball game needs d >= 2"));
    }
    let axis_points = |prefix: &str| -> Vec<Point> {
        let mut pts = Vec::with_capacity(2 * d);
        for k in 0..d {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; d];
                v[k] = sign;
                let s = if sign > 0.0 { '+' } else { '-' };
                pts.push(Point::at(format!("{prefix}{s}e{}", k + 1), v));
            }
        }
        pts
    };
    let outcomes = axis_points("z");
    let actions = if d == 2 {
        if polygon < 4 || polygon % 2 == 1 {
            return Err(Error::invalid(
                "polygon must have an even number (>= 4) of vertices",
            ));
        }
        (0..polygon)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / polygon as f64;
                Point::at(format!("f{k}"), vec![a.cos(), a.sin()])
            })
            .collect()
    } else {
        axis_points("f")
    };
    Game::from_fn(
        format!("ball(d={d})"),
        outcomes,
        actions,
        Some(EmbeddingNorm::Euclidean),
        |z, f| {
            let zc = z.coords.as_ref().unwrap();
            let fc = f.coords.as_ref().unwrap();
            zc.iter().zip(fc).map(|(a, b)| a * b).sum()
        },
    )
}

/// Index of the outcome at `-coords(z)`, if present.
pub fn negated_outcome(game: &Game, z: usize) -> Option<usize> {
    let target: Vec<f64> = game.outcomes()[z]
        .coords
        .as_ref()?
        .iter()
        .map(|x| -x)
        .collect();
    game.outcomes().iter().position(|o| {
        o.coords
            .as_ref()
            .is_some_and(|c| c.iter().zip(&target).all(|(a, b)| (a - b).abs() < 1e-12))
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// One trajectory of the orthogonal strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTrace {
    pub steps: Vec<Vec<f64>>,
    /// `‖S_t‖` for `t = 1..T`.
    pub norms: Vec<f64>,
}

impl OrthogonalTrace {
    /// `max_t |‖S_t‖² - t|`.
    pub fn max_squared_norm_error(&self) -> f64 {
        self.norms
            .iter()
            .enumerate()
            .map(|(i, n)| (n * n - (i + 1) as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Samples `Z_t = ±u_t` with `u_t` a random unit vector orthogonal to the
/// running sum `S_{t-1}` and a fair sign.
pub fn ball_orthogonal_strategy(d: usize, horizon: usize, seed: u64) -> Result<OrthogonalTrace> {
    if d < 2 {
        return Err(Error::invalid("no orthogonal direction exists for d < 2"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut rng = substream(seed, "ball-orthogonal", 0);
    let mut sum = vec![0.0; d];
    let mut steps = Vec::with_capacity(horizon);
    let mut norms = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let s2: f64 = sum.iter().map(|x| x * x).sum();
        let u = loop {
            let mut g = gaussian_vector(d, &mut rng);
            if s2 > 0.0 {
                let proj = g.iter().zip(&sum).map(|(a, b)| a * b).sum::<f64>() / s2;
                for (gi, si) in g.iter_mut().zip(&sum) {
                    *gi -= proj * si;
                }
                // A second pass removes the component left by round-off.
                let proj = g.iter().zip(&sum).map(|(a, b)| a * b).sum::<f64>() / s2;
                for (gi, si) in g.iter_mut().zip(&sum) {
                    *gi -= proj * si;
                }
            }
            let n = norm(&g);
            if n > 1e-8 {
                break g.into_iter().map(|x| x / n).collect::<Vec<f64>>();
            }
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let z: Vec<f64> = u.into_iter().map(|x| sign * x).collect();
        for (si, zi) in sum.iter_mut().zip(&z) {
            *si += zi;
        }
        norms.push(norm(&sum));
        steps.push(z);
    }
    Ok(OrthogonalTrace { steps, norms })
}

/// `E|Σ_{t≤T} ε_t|` for fair signs: exact for `T ≤ 30`, otherwise Monte
/// Carlo.
pub fn ball_iid_two_point(horizon: usize, samples: usize, seed: u64) -> Result<MeanEstimate> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if horizon <= EXACT_WALK_MAX_T {
        let t = horizon as u64;
        let denom = (1u64 << t) as f64;
        let acc: NeumaierSum = (0..=t)
            .map(|k| binomial(t, k) as f64 / denom * (2.0 * k as f64 - t as f64).abs())
            .collect();
        return Ok(MeanEstimate::exact(acc.value()));
    }
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
    }
    let xs = parallel_samples(seed, "ball-two-point", samples, |rng| {
        let k = fair_bit_count(rng, horizon) as f64;
        (2.0 * k - horizon as f64).abs()
    });
    Ok(MeanEstimate::from_samples(&xs))
}

/// `sqrt(2T/π)`, the large-`T` length of the two-point walk.
pub fn walk_length_asymptote(horizon: usize) -> f64 {
    (2.0 * horizon as f64 / PI).sqrt()
}

/// Monte Carlo estimate of `E‖Σ_t Z_t‖` for `Z_t` i.i.d. uniform on the unit
/// sphere in `R^d`.
pub fn ball_symmetric_iid_check(
    d: usize,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if d == 0 || horizon == 0 {
        return Err(Error::invalid("sphere walk needs d >= 1 and T >= 1"));
    }
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
    }
    let xs = parallel_samples(seed, "ball-sphere-iid", samples, |rng| {
        let mut sum = vec![0.0; d];
        for _ in 0..horizon {
            let g = loop {
                let g = gaussian_vector(d, rng);
                let n = norm(&g);
                if n > 0.0 {
                    break g.into_iter().map(|x| x / n).collect::<Vec<f64>>();
                }
            };
            for (s, x) in sum.iter_mut().zip(g) {
                *s += x;
            }
        }
        norm(&sum)
    });
    Ok(MeanEstimate::from_samples(&xs))
}

/// `sqrt(T/2)`.
pub fn khintchine_kahane_floor(horizon: usize) -> f64 {
    (horizon as f64 / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_norms() {
        let tr = ball_orthogonal_strategy(2, 3, 1).unwrap();
        assert!((tr.norms[0] - 1.0).abs() < 1e-12);
        assert!((tr.norms[2] - 3f64.sqrt()).abs() < 1e-12);
        assert!(ball_orthogonal_strategy(1, 3, 1).is_err());
    }

    #[test]
    fn two_point_small_exact() {
        assert_eq!(ball_iid_two_point(1, 0, 0).unwrap().mean, 1.0);
        assert_eq!(ball_iid_two_point(2, 0, 0).unwrap().mean, 1.0);
        assert_eq!(ball_iid_two_point(3, 0, 0).unwrap().mean, 1.5);
    }

    #[test]
    fn one_dimensional_sphere_is_two_point() {
        let est = ball_symmetric_iid_check(1, 2, 4000, 3).unwrap();
        assert!((est.mean - 1.0).abs() < 4.0 * est.stderr + 1e-12);
    }

    #[test]
    fn planar_game_is_symmetric() {
        let g = ball_game(2, 8).unwrap();
        assert_eq!(g.n_outcomes(), 4);
        assert_eq!(g.n_actions(), 8);
        for z in 0..4 {
            let nz = negated_outcome(&g, z).unwrap();
            for f in 0..8 {
                assert!((g.loss(z, f) + g.loss(nz, f)).abs() < 1e-15);
            }
        }
        assert!(ball_game(2, 5).is_err());
    }
}
