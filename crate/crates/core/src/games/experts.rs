//! Experts games: one expert loses per round (simplified) or arbitrary 0/1
//! loss vectors (general).

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game, Point};
use crate::numerics::{
    composition_count, for_each_composition, ln_factorials, multinomial_coefficient,
    multinomial_pmf, pow_saturating, simplex_lattice, MeanEstimate, NeumaierSum,
};
use crate::rng::parallel_samples;

/// Largest `N` for which [`experts_general_game`] materializes all `2^N`
/// outcomes.
pub const GENERAL_GAME_MAX_N: usize = 6;

/// Default cap on the number of count vectors enumerated in exact mode.
pub const DEFAULT_EXACT_BUDGET: u64 = 10_000_000;

/// Exact enumeration or Monte Carlo with the given sample count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Exact { budget: u64 },
    MonteCarlo { samples: usize, seed: u64 },
}

fn lattice_label(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(","))
}

/// Simplified experts game with vertex actions only.
pub fn experts_simple_game(n: usize) -> Result<Game> {
    experts_simple_game_with_resolution(n, 1)
}

/// Simplified experts game: outcomes `e_1..e_N`, actions the simplex lattice
/// `{k / resolution}`, `ℓ(e_i, f) = f_i`. The centroid is an action iff `N`
/// divides `resolution`.
pub fn experts_simple_game_with_resolution(n: usize, resolution: usize) -> Result<Game> {
    if n < 2 {
        return Err(Error::invalid("experts game needs N >= 2"));
    }
    if resolution == 0 {
        return Err(Error::invalid("lattice resolution must be positive"));
    }
    let outcomes = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            Point::at(format!("e{}", i + 1), e)
        })
        .collect();
    let actions = simplex_lattice(n, resolution)
        .into_iter()
        .map(|p| Point::at(lattice_label(&p), p))
        .collect();
    Game::from_fn(
        format!("experts-simple(N={n})"),
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

/// Simplified experts game whose actions are the `N` vertices followed by
/// the centroid.
pub fn experts_simple_game_with_centroid(n: usize) -> Result<Game> {
    let g = experts_simple_game(n)?;
    let mut actions = g.actions().to_vec();
    actions.push(Point::at("centroid", vec![1.0 / n as f64; n]));
    Game::from_fn(
        format!("experts-simple(N={n},centroid)"),
        g.outcomes().to_vec(),
        actions,
        Some(EmbeddingNorm::Euclidean),
        |z, f| {
            let zc = z.coords.as_ref().unwrap();
            let fc = f.coords.as_ref().unwrap();
            zc.iter().zip(fc).map(|(a, b)| a * b).sum()
        },
    )
}

/// Index of the action at the simplex centroid, if present.
pub fn centroid_action(game: &Game) -> Option<usize> {
    let n = game.n_outcomes() as f64;
    game.actions().iter().position(|a| {
        a.coords
            .as_ref()
            .is_some_and(|c| c.iter().all(|x| (x - 1.0 / n).abs() < 1e-12))
    })
}

/// `E max_i [1/N - n_i/T]` for `(n_1..n_N)` multinomial with `T` trials and
/// uniform cells.
pub fn experts_simple_regret(n: usize, horizon: usize, eval: Evaluation) -> Result<MeanEstimate> {
    if n < 2 {
        return Err(Error::invalid("experts game needs N >= 2"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let inv_n = 1.0 / n as f64;
    let t = horizon as f64;
    match eval {
        Evaluation::Exact { budget } => {
            let count = composition_count(horizon, n);
            if count > budget as u128 {
                return Err(Error::limit("multinomial count vectors", count, budget));
            }
            let lf = ln_factorials(horizon);
            let p = vec![inv_n; n];
            // Integer multinomial coefficients keep small cases exact.
            let total = pow_saturating(n, horizon);
            let integer_weights = total < (1u128 << 53);
            let mut acc = NeumaierSum::new();
            for_each_composition(horizon, n, |c| {
                let min = *c.iter().min().unwrap() as f64;
                let prob = if integer_weights {
                    multinomial_coefficient(c) as f64 / total as f64
                } else {
                    multinomial_pmf(c, &p, &lf)
                };
                acc.add(prob * (inv_n - min / t));
            });
            Ok(MeanEstimate::exact(acc.value()))
        }
        Evaluation::MonteCarlo { samples, seed } => {
            let xs = parallel_samples(seed, "experts-simple-regret", samples, |rng| {
                let mut counts = vec![0usize; n];
                for _ in 0..horizon {
                    counts[rng.random_range(0..n)] += 1;
                }
                inv_n - *counts.iter().min().unwrap() as f64 / t
            });
            Ok(MeanEstimate::from_samples(&xs))
        }
    }
}

/// General experts game: outcomes are all `2^N` binary loss vectors, actions
/// the simplex vertices, `ℓ(b, e_i) = b_i`.
pub fn experts_general_game(n: usize) -> Result<Game> {
    if n == 0 {
        return Err(Error::invalid("experts game needs N >= 1"));
    }
    if n > GENERAL_GAME_MAX_N {
        return Err(Error::limit(
            "general experts outcome set 2^N",
            1u128 << n,
            1u64 << GENERAL_GAME_MAX_N,
        ));
    }
    let outcomes = (0..1usize << n)
        .map(|code| {
            let bits: Vec<f64> = (0..n).map(|i| ((code >> i) & 1) as f64).collect();
            let label: String = bits
                .iter()
                .map(|b| if *b > 0.0 { '1' } else { '0' })
                .collect();
            Point::at(label, bits)
        })
        .collect();
    let actions = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            Point::at(format!("e{}", i + 1), e)
        })
        .collect();
    Game::from_fn(
        format!("experts-general(N={n})"),
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

/// Number of ones among `horizon` fair bits.
pub(crate) fn fair_bit_count<R: Rng + ?Sized>(rng: &mut R, horizon: usize) -> u64 {
    let mut ones = 0u64;
    let mut left = horizon;
    while left >= 64 {
        ones += rng.next_u64().count_ones() as u64;
        left -= 64;
    }
    if left > 0 {
        ones += (rng.next_u64() & ((1u64 << left) - 1)).count_ones() as u64;
    }
    ones
}

/// Monte Carlo estimate of `E max_i [1/2 - K_i/T]` where `K_i` counts the
/// losses of expert `i` under i.i.d. uniform binary loss vectors.
///
/// Each coordinate of a uniform binary vector is an independent fair bit,
/// so the counts are sampled per expert.
pub fn experts_general_lb(
    n: usize,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    if n == 0 || horizon == 0 {
        return Err(Error::invalid(
            "experts lower bound needs N >= 1 and T >= 1",
        ));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    let t = horizon as f64;
    let xs = parallel_samples(seed, "experts-general-lb", samples, |rng| {
        let min = (0..n).map(|_| fair_bit_count(rng, horizon)).min().unwrap();
        0.5 - min as f64 / t
    });
    Ok(MeanEstimate::from_samples(&xs))
}

/// Reference scale `sqrt(ln N / (2T))`.
pub fn experts_general_scale(n: usize, horizon: usize) -> f64 {
    ((n as f64).ln() / (2.0 * horizon as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{SimplexDist, DEFAULT_TIE_TOL};

    #[test]
    fn phi_of_uniform_is_one_over_n() {
        for n in 2..=10 {
            let g = experts_simple_game(n).unwrap();
            let v = g.phi(&SimplexDist::uniform(n), DEFAULT_TIE_TOL).value;
            assert!((v - 1.0 / n as f64).abs() < 1e-15);
        }
        let g = experts_simple_game(2).unwrap();
        let v = g.phi(&SimplexDist::new(vec![0.3, 0.7]).unwrap(), 0.0).value;
        assert!((v - 0.3).abs() < 1e-15);
        assert!(experts_simple_game(1).is_err());
    }

    #[test]
    fn exact_regret_small_cases() {
        let exact = Evaluation::Exact { budget: 1000 };
        assert_eq!(experts_simple_regret(2, 2, exact).unwrap().mean, 0.25);
        assert_eq!(experts_simple_regret(2, 1, exact).unwrap().mean, 0.5);
        assert!(matches!(
            experts_simple_regret(10, 40, exact),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn lattice_contains_centroid_when_divisible() {
        let g = experts_simple_game_with_resolution(3, 3).unwrap();
        assert_eq!(g.n_actions(), 10);
        assert!(centroid_action(&g).is_some());
        assert!(centroid_action(&experts_simple_game(3).unwrap()).is_none());
    }

    #[test]
    fn general_game_shape() {
        let g = experts_general_game(3).unwrap();
        assert_eq!(g.n_outcomes(), 8);
        assert_eq!(g.n_actions(), 3);
        let v = g.phi(&SimplexDist::uniform(8), DEFAULT_TIE_TOL).value;
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_expert_lower_bound_is_centered() {
        let est = experts_general_lb(1, 100, 20_000, 5).unwrap();
        assert!(est.mean.abs() < 4.0 * est.stderr, "{est:?}");
    }
}
