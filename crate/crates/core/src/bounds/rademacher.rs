//! Rademacher averages of the loss class on a fixed outcome sequence,
//! `(1/√T)·E_ε sup_f |Σ_t ε_t ℓ(z_t, f)|`, and the `2√T·Rad` upper bound on
//! the minimax regret.

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{BoundCheckResult, Witness};
use crate::engine::minimax::minimax_value;
use crate::engine::pregret::p_regret_exact;
use crate::engine::solver::MatrixGameSolver;
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::games::ball::negated_outcome;
use crate::numerics::{composition_count, for_each_composition, MeanEstimate, NeumaierSum};
use crate::rng::{parallel_samples, substream};
use crate::strategy::ProductStrategy;

/// Sequences up to this length average over all sign vectors exactly.
pub const EXACT_SIGNS_MAX_T: usize = 20;

/// Sign vectors per parallel work item in exact mode.
const SIGN_CHUNK: u64 = 4096;

fn sup_abs(sums: &[f64]) -> f64 {
    sums.iter().fold(0.0, |m, s| m.max(s.abs()))
}

fn check_sample(game: &Game, sample: &[usize]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid("Rademacher average needs a nonempty sample"));
    }
    if let Some(&z) = sample.iter().find(|&&z| z >= game.n_outcomes()) {
        return Err(Error::Index {
            what: "outcome",
            index: z,
            len: game.n_outcomes(),
        });
    }
    Ok(())
}

/// Exact average over sign vectors with `ε_1 = +1`; the supremum of an
/// absolute value is unchanged by a global sign flip. Sign vectors are
/// walked in Gray-code order within each chunk.
fn exact_average(game: &Game, sample: &[usize]) -> f64 {
    let t = sample.len();
    let k = game.n_actions();
    let total = 1u64 << (t - 1);
    let chunks = total.div_ceil(SIGN_CHUNK);
    let parts: Vec<NeumaierSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * SIGN_CHUNK;
            let end = (start + SIGN_CHUNK).min(total);
            let gray = start ^ (start >> 1);
            let mut signs: Vec<f64> = (0..t)
                .map(|i| {
                    if i > 0 && (gray >> (i - 1)) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut sums = vec![0.0; k];
            for (i, &z) in sample.iter().enumerate() {
                for (s, l) in sums.iter_mut().zip(game.loss_row(z)) {
                    *s += signs[i] * l;
                }
            }
            let mut acc = NeumaierSum::new();
            acc.add(sup_abs(&sums));
            for code in start + 1..end {
                let pos = code.trailing_zeros() as usize + 1;
                let delta = -2.0 * signs[pos];
                signs[pos] = -signs[pos];
                for (s, l) in sums.iter_mut().zip(game.loss_row(sample[pos])) {
                    *s += delta * l;
                }
                acc.add(sup_abs(&sums));
            }
            acc
        })
        .collect();
    let mut acc = NeumaierSum::new();
    for p in &parts {
        acc.merge(p);
    }
    acc.value() / total as f64
}

/// Rademacher average of the game's loss class on `sample`: exact over all
/// sign vectors when `T ≤ 20`, otherwise Monte Carlo over `eps_draws`.
pub fn rademacher_average(
    game: &Game,
    sample: &[usize],
    eps_draws: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    check_sample(game, sample)?;
    let t = sample.len();
    let root_t = (t as f64).sqrt();
    if t <= EXACT_SIGNS_MAX_T {
        return Ok(MeanEstimate::exact(exact_average(game, sample) / root_t));
    }
    if eps_draws < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 sign draws"));
    }
    let xs = parallel_samples(seed, "rademacher", eps_draws, |rng| {
        let mut sums = vec![0.0; game.n_actions()];
        for &z in sample {
            let e = if rng.random::<bool>() { 1.0 } else { -1.0 };
            for (s, l) in sums.iter_mut().zip(game.loss_row(z)) {
                *s += e * l;
            }
        }
        sup_abs(&sums) / root_t
    });
    Ok(MeanEstimate::from_samples(&xs))
}

/// Controls the search for the outcome sequence maximizing the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RademacherSearch {
    /// Maximum number of sequences evaluated.
    pub budget: u64,
    /// Sign draws per evaluation when `T > 20`.
    pub eps_draws: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RademacherSearch {
    fn default() -> Self {
        Self {
            budget: 20_000,
            eps_draws: 10_000,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Best sequence found and its average. The average depends on the
/// sequence only through its outcome counts, so all count vectors are tried
/// when they fit in the budget; otherwise random restarts are improved by
/// greedy single-position replacement.
pub fn search_supremum(
    game: &Game,
    horizon: usize,
    search: &RademacherSearch,
) -> Result<(MeanEstimate, Vec<usize>)> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = game.n_outcomes();
    let eval = |seq: &[usize]| rademacher_average(game, seq, search.eps_draws, search.seed);
    if composition_count(horizon, n) <= search.budget as u128 {
        let mut seqs = Vec::new();
        for_each_composition(horizon, n, |c| {
            seqs.push(
                c.iter()
                    .enumerate()
                    .flat_map(|(z, &k)| std::iter::repeat_n(z, k))
                    .collect::<Vec<usize>>(),
            );
        });
        let values = seqs
            .par_iter()
            .map(|s| eval(s))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if v.mean > values[best].mean {
                best = i;
            }
        }
        return Ok((values[best], seqs.swap_remove(best)));
    }
    let mut evals = 0u64;
    let mut best: Option<(MeanEstimate, Vec<usize>)> = None;
    for r in 0..search.restarts.max(1) {
        if evals >= search.budget {
            break;
        }
        let mut rng = substream(search.seed, "rademacher-search", r as u64);
        let mut seq: Vec<usize> = (0..horizon).map(|_| rng.random_range(0..n)).collect();
        let mut cur = eval(&seq)?;
        evals += 1;
        let mut improved = true;
        while improved && evals < search.budget {
            improved = false;
            for t in 0..horizon {
                for z in 0..n {
                    if z == seq[t] || evals >= search.budget {
                        continue;
                    }
                    let old = seq[t];
                    seq[t] = z;
                    let v = eval(&seq)?;
                    evals += 1;
                    if v.mean > cur.mean + 1e-15 {
                        cur = v;
                        improved = true;
                    } else {
                        seq[t] = old;
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|b| cur.mean > b.0.mean) {
            best = Some((cur, seq));
        }
    }
    Ok(best.expect("at least one restart runs"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RademacherCheck {
    /// Bound `2√T·Rad` against the minimax value.
    pub result: BoundCheckResult,
    pub minimax: f64,
    /// Largest average found over outcome sequences.
    pub sup: MeanEstimate,
    pub argmax: Vec<usize>,
}

/// Checks `Reg_T ≤ 2√T·Rad + 4·stderr`, where `Rad` is the searched
/// supremum (a lower estimate of the true one) and `stderr` the standard
/// error of `2√T·Rad`.
pub fn rademacher_upper_bound(
    game: &Game,
    horizon: usize,
    search: &RademacherSearch,
    solver: &dyn MatrixGameSolver,
    state_cap: u64,
) -> Result<RademacherCheck> {
    let minimax = minimax_value(game, horizon, solver, state_cap)?.value;
    let (sup, argmax) = search_supremum(game, horizon, search)?;
    let scale = 2.0 * (horizon as f64).sqrt();
    let bound = scale * sup.mean;
    let tolerance = 4.0 * scale * sup.stderr;
    let holds = minimax <= bound + tolerance;
    Ok(RademacherCheck {
        result: BoundCheckResult {
            bound_value: bound,
            observed_value: minimax,
            tolerance,
            holds,
            witness: (!holds).then(|| Witness::Sequence(argmax.clone())),
        },
        minimax,
        sup,
        argmax,
    })
}

/// The product distribution with round `t` uniform on `{z_t, -z_t}` for
/// the maximizing sequence `z`, next to the minimax value and `2√T·Rad(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSandwich {
    pub product_regret: f64,
    pub minimax: f64,
    /// `2√T·Rad(z)` at the maximizing sequence.
    pub upper: f64,
    pub sequence: Vec<usize>,
    /// `upper / product_regret`.
    pub ratio: f64,
    /// `product_regret ≤ minimax ≤ upper` and `ratio ≤ 2`, each within 1e-9.
    pub holds: bool,
}

/// Primal-dual sandwich for games whose outcome set is closed under
/// negation and whose loss is linear in the outcome.
pub fn ball_sandwich(
    game: &Game,
    horizon: usize,
    search: &RademacherSearch,
    solver: &dyn MatrixGameSolver,
    state_cap: u64,
) -> Result<BallSandwich> {
    let n = game.n_outcomes();
    let negation = (0..n)
        .map(|z| negated_outcome(game, z))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| {
            Error::NotApplicable(format!(
                "outcomes of `{}` are not closed under negation",
                game.name()
            ))
        })?;
    let check = rademacher_upper_bound(game, horizon, search, solver, state_cap)?;
    let rounds = check
        .argmax
        .iter()
        .map(|&z| {
            let mut w = vec![0.0; n];
            w[z] += 0.5;
            w[negation[z]] += 0.5;
            SimplexDist::new(w)
        })
        .collect::<Result<Vec<_>>>()?;
    let product_regret = p_regret_exact(game, &ProductStrategy::new(rounds)?, state_cap)?.value;
    let upper = check.result.bound_value;
    let ratio = upper / product_regret;
    let tol = 1e-9;
    let holds =
        product_regret <= check.minimax + tol && check.minimax <= upper + tol && ratio <= 2.0 + tol;
    Ok(BallSandwich {
        product_regret,
        minimax: check.minimax,
        upper,
        sequence: check.argmax,
        ratio,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::solver::LpSolver;
    use crate::game::{EmbeddingNorm, Point};
    use crate::games::{ball_game, experts_simple_game};

    fn unit_game(value: f64, actions: usize) -> Game {
        let pts = (0..actions)
            .map(|i| Point::at(format!("{i}"), vec![i as f64]))
            .collect();
        Game::from_fn(
            "unit",
            vec![Point::labelled("a"), Point::labelled("b")],
            pts,
            Some(EmbeddingNorm::Abs1d),
            move |_, _| value,
        )
        .unwrap()
    }

    #[test]
    fn zero_and_constant_losses() {
        let g = unit_game(0.0, 1);
        assert_eq!(rademacher_average(&g, &[0, 1, 0], 0, 0).unwrap().mean, 0.0);
        // E|Σε| over three signs is 3/2.
        let g = unit_game(1.0, 1);
        let r = rademacher_average(&g, &[0, 1, 0], 0, 0).unwrap().mean;
        assert!((r - 1.5 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gray_walk_matches_direct_sum() {
        let g = experts_simple_game(3).unwrap();
        let seq = [0, 1, 2, 2, 0, 1, 1, 0, 2, 0, 1, 2, 1, 0];
        let t = seq.len();
        let mut direct = 0.0;
        for code in 0..1u64 << t {
            let mut sums = vec![0.0; 3];
            for (i, &z) in seq.iter().enumerate() {
                let e = if (code >> i) & 1 == 1 { -1.0 } else { 1.0 };
                for (s, l) in sums.iter_mut().zip(g.loss_row(z)) {
                    *s += e * l;
                }
            }
            direct += sup_abs(&sums);
        }
        direct /= (1u64 << t) as f64 * (t as f64).sqrt();
        let r = rademacher_average(&g, &seq, 0, 0).unwrap().mean;
        assert!((r - direct).abs() < 1e-12, "{r} {direct}");
    }

    #[test]
    fn experts_bound_and_ball_sandwich() {
        let g = experts_simple_game(2).unwrap();
        let c =
            rademacher_upper_bound(&g, 2, &RademacherSearch::default(), &LpSolver, 10_000).unwrap();
        assert!(c.result.holds, "{c:?}");
        let b = ball_game(2, 8).unwrap();
        let s = ball_sandwich(&b, 3, &RademacherSearch::default(), &LpSolver, 100_000).unwrap();
        assert!(s.holds, "{s:?}");
        assert!((s.ratio - 2.0).abs() < 1e-9, "{s:?}");
    }
}
