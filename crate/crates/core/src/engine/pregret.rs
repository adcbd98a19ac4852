//! Stochastic regret of a joint distribution:
//! `E[Σ_t Φ(p_t(·|Z_1..Z_{t-1})) - min_f Σ_t ℓ(Z_t, f)]`.

use rayon::prelude::*;

use crate::engine::enumerate::{check_compatible, visit_subtree, LeafBudget};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::numerics::{sample_index, MeanEstimate, NeumaierSum};
use crate::rng::parallel_map;
use crate::strategy::AdversaryStrategy;

/// How a report's value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Exact => "exact",
            EvalMode::MonteCarlo => "mc",
        }
    }
}

/// Identifies the inputs behind a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub game: String,
    pub strategy: String,
    pub horizon: usize,
    pub n_outcomes: usize,
    pub n_actions: usize,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub value: f64,
    pub mode: EvalMode,
    /// Zero in exact mode.
    pub stderr: f64,
    /// `E Φ(p_t(·|history))` for `t = 1..T`.
    pub conditional_phi_terms: Vec<f64>,
    /// `E min_f Σ_t ℓ(Z_t, f)`, i.e. `T·E Φ(Unif)`.
    pub comparator: f64,
    pub meta: ReportMeta,
}

impl RegretReport {
    /// `value / T`.
    pub fn per_round(&self) -> f64 {
        self.value / self.meta.horizon as f64
    }
}

fn meta(game: &Game, strategy: &dyn AdversaryStrategy) -> ReportMeta {
    ReportMeta {
        game: game.name().to_string(),
        strategy: strategy.name().to_string(),
        horizon: strategy.horizon(),
        n_outcomes: game.n_outcomes(),
        n_actions: game.n_actions(),
        seed: None,
        samples: None,
    }
}

#[derive(Clone)]
struct Accumulator {
    rounds: Vec<NeumaierSum>,
    comparator: NeumaierSum,
}

impl Accumulator {
    fn new(horizon: usize) -> Self {
        Self {
            rounds: vec![NeumaierSum::new(); horizon],
            comparator: NeumaierSum::new(),
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.rounds.iter_mut().zip(&other.rounds) {
            a.merge(b);
        }
        self.comparator.merge(&other.comparator);
    }
}

fn explore(
    game: &Game,
    strategy: &dyn AdversaryStrategy,
    prefix: Vec<usize>,
    prob: f64,
    budget: &LeafBudget,
) -> Result<Accumulator> {
    let horizon = strategy.horizon();
    let n_actions = game.n_actions();
    let mut acc = Accumulator::new(horizon);
    // cumulative[d] holds the loss totals of the current path's first d outcomes.
    let mut cumulative = vec![vec![0.0; n_actions]; horizon + 1];
    for d in 1..=prefix.len() {
        let (done, rest) = cumulative.split_at_mut(d);
        for ((c, prev), l) in rest[0]
            .iter_mut()
            .zip(&done[d - 1])
            .zip(game.loss_row(prefix[d - 1]))
        {
            *c = prev + l;
        }
    }
    let start = prefix.len();
    let mut path = prefix;
    let cumulative = std::cell::RefCell::new(cumulative);
    let extend = |history: &[usize]| {
        let d = history.len();
        if d > start {
            let mut cum = cumulative.borrow_mut();
            let (done, rest) = cum.split_at_mut(d);
            for ((c, prev), l) in rest[0]
                .iter_mut()
                .zip(&done[d - 1])
                .zip(game.loss_row(history[d - 1]))
            {
                *c = prev + l;
            }
        }
    };
    let acc_cell = std::cell::RefCell::new(&mut acc);
    let mut on_node = |history: &[usize], p: f64, cond: &crate::game::SimplexDist| {
        extend(history);
        let phi = game.phi_value(cond.weights());
        acc_cell.borrow_mut().rounds[history.len()].add(p * phi);
    };
    let mut on_leaf = |history: &[usize], p: f64| {
        extend(history);
        let cum = cumulative.borrow();
        let best = cum[history.len()]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        acc_cell.borrow_mut().comparator.add(p * best);
    };
    visit_subtree(
        strategy,
        &mut path,
        prob,
        budget,
        &mut on_node,
        &mut on_leaf,
    )?;
    Ok(acc)
}

/// Exact stochastic regret by enumerating every reachable outcome sequence.
///
/// Fails with [`Error::ResourceLimit`] once more than `cap` sequences have
/// been reached.
pub fn p_regret_exact(
    game: &Game,
    strategy: &dyn AdversaryStrategy,
    cap: u64,
) -> Result<RegretReport> {
    check_compatible(game, strategy)?;
    let horizon = strategy.horizon();
    let budget = LeafBudget::new(strategy, cap);
    let root = strategy.conditional(&[]);
    let mut acc = Accumulator::new(horizon);
    acc.rounds[0].add(game.phi_value(root.weights()));
    let children: Vec<(usize, f64)> = root
        .weights()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(z, &p)| (z, p))
        .collect();
    let parts: Vec<Result<Accumulator>> = children
        .par_iter()
        .map(|&(z, p)| explore(game, strategy, vec![z], p, &budget))
        .collect();
    for part in parts {
        acc.merge(&part?);
    }
    let terms: Vec<f64> = acc.rounds.iter().map(NeumaierSum::value).collect();
    let comparator = acc.comparator.value();
    let value = terms.iter().copied().collect::<NeumaierSum>().value() - comparator;
    Ok(RegretReport {
        value,
        mode: EvalMode::Exact,
        stderr: 0.0,
        conditional_phi_terms: terms,
        comparator,
        meta: meta(game, strategy),
    })
}

/// Monte Carlo estimate over `samples` sampled trajectories. The per-round
/// Φ terms use the exact conditionals along each trajectory.
pub fn p_regret_mc(
    game: &Game,
    strategy: &dyn AdversaryStrategy,
    samples: usize,
    seed: u64,
) -> Result<RegretReport> {
    check_compatible(game, strategy)?;
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
    }
    let horizon = strategy.horizon();
    let draws = parallel_map(seed, "p-regret-mc", samples, |rng| {
        let mut history = Vec::with_capacity(horizon);
        let mut cum = vec![0.0; game.n_actions()];
        let mut phis = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let p = strategy.conditional(&history);
            phis.push(game.phi_value(p.weights()));
            let z = sample_index(p.weights(), rng);
            for (c, l) in cum.iter_mut().zip(game.loss_row(z)) {
                *c += l;
            }
            history.push(z);
        }
        let best = cum.into_iter().fold(f64::INFINITY, f64::min);
        (phis, best)
    });
    let totals: Vec<f64> = draws
        .iter()
        .map(|(phis, best)| phis.iter().copied().collect::<NeumaierSum>().value() - best)
        .collect();
    let est = MeanEstimate::from_samples(&totals);
    let n = samples as f64;
    let terms = (0..horizon)
        .map(|t| {
            draws
                .iter()
                .map(|(phis, _)| phis[t])
                .collect::<NeumaierSum>()
                .value()
                / n
        })
        .collect();
    let comparator = draws
        .iter()
        .map(|(_, b)| *b)
        .collect::<NeumaierSum>()
        .value()
        / n;
    let mut m = meta(game, strategy);
    m.seed = Some(seed);
    m.samples = Some(samples);
    Ok(RegretReport {
        value: est.mean,
        mode: EvalMode::MonteCarlo,
        stderr: est.stderr,
        conditional_phi_terms: terms,
        comparator,
        meta: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::DEFAULT_SEQUENCE_CAP;
    use crate::game::SimplexDist;
    use crate::games::{experts_simple_game, quadratic_game, ShrinkageAdversary};
    use crate::strategy::IidStrategy;

    #[test]
    fn shrinkage_two_rounds() {
        let g = quadratic_game(257, Some(2)).unwrap();
        let r = p_regret_exact(
            &g,
            &ShrinkageAdversary::new(2).unwrap(),
            DEFAULT_SEQUENCE_CAP,
        )
        .unwrap();
        assert!((r.value - 1.25).abs() < 1e-12, "{}", r.value);
        let recomposed: f64 = r.conditional_phi_terms.iter().sum::<f64>() - r.comparator;
        assert!((recomposed - r.value).abs() < 1e-12);
    }

    #[test]
    fn iid_uniform_quadratic_is_one() {
        let g = quadratic_game(257, Some(10)).unwrap();
        for t in [1, 3, 10] {
            let s = IidStrategy::new(SimplexDist::uniform(2), t).unwrap();
            let r = p_regret_exact(&g, &s, DEFAULT_SEQUENCE_CAP).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "T = {t}: {}", r.value);
        }
    }

    #[test]
    fn point_mass_has_zero_regret() {
        let g = experts_simple_game(3).unwrap();
        let s = IidStrategy::point_mass(3, 1, 4).unwrap();
        assert_eq!(p_regret_exact(&g, &s, 100).unwrap().value, 0.0);
        let mc = p_regret_mc(&g, &s, 50, 1).unwrap();
        assert_eq!(mc.value, 0.0);
        assert_eq!(mc.stderr, 0.0);
    }

    #[test]
    fn mc_agrees_with_exact_on_shrinkage() {
        let g = quadratic_game(257, Some(6)).unwrap();
        let s = ShrinkageAdversary::new(6).unwrap();
        let exact = p_regret_exact(&g, &s, DEFAULT_SEQUENCE_CAP).unwrap();
        let mc = p_regret_mc(&g, &s, 20_000, 11).unwrap();
        assert!(
            (exact.value - mc.value).abs() <= 4.0 * mc.stderr,
            "exact {} mc {} ± {}",
            exact.value,
            mc.value,
            mc.stderr
        );
    }

    #[test]
    fn mismatched_strategy_is_rejected() {
        let g = experts_simple_game(3).unwrap();
        let s = IidStrategy::new(SimplexDist::uniform(2), 2).unwrap();
        assert!(matches!(
            p_regret_exact(&g, &s, 100),
            Err(Error::InvalidArgument(_))
        ));
    }
}
