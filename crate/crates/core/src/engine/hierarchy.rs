//! Best stochastic regret over i.i.d., product and arbitrary joints, next to
//! the minimax value.

use crate::engine::dual::{dual_search, DualOptimizer, NodeObjective, OptimizerSettings};
use crate::engine::joint::JointDistTree;
use crate::engine::minimax::minimax_value;
use crate::engine::pregret::p_regret_exact;
use crate::engine::solver::MatrixGameSolver;
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::numerics::{
    composition_count, for_each_composition, ln_factorials, multinomial_pmf, pow_saturating,
    project_to_simplex, simplex_lattice, NeumaierSum,
};
use crate::strategy::{IidStrategy, ProductStrategy};

/// Lattice points evaluated before local refinement of the i.i.d. search.
const IID_LATTICE_POINTS: u128 = 2000;

/// Maximum sweeps over rounds in the product search.
const MAX_SWEEPS: usize = 50;

pub struct HierarchyConfig<'a> {
    pub solver: &'a dyn MatrixGameSolver,
    pub optimizer: &'a dyn DualOptimizer,
    pub settings: OptimizerSettings,
    /// Cap on enumerated sequences and states.
    pub cap: u64,
}

#[derive(Debug, Clone)]
pub struct HierarchyResult {
    pub iid: f64,
    pub indep: f64,
    pub joint: f64,
    pub minimax: f64,
    pub iid_distribution: SimplexDist,
    pub product_rounds: Vec<SimplexDist>,
    /// The joint search fell below the product value and the product joint
    /// was reported instead.
    pub joint_fell_back: bool,
    pub budget_exhausted: bool,
}

impl HierarchyResult {
    /// `0 ≤ iid ≤ indep ≤ joint ≤ minimax` up to `tol`.
    pub fn is_ordered(&self, tol: f64) -> bool {
        -tol <= self.iid
            && self.iid <= self.indep + tol
            && self.indep <= self.joint + tol
            && self.joint <= self.minimax + tol
    }
}

/// `T·Φ(p) - E_{p^T} min_f Σ_t ℓ(Z_t, f)` through the multinomial law of
/// the outcome counts.
struct IidObjective<'a> {
    game: &'a Game,
    horizon: usize,
    counts: Vec<Vec<usize>>,
    comparators: Vec<f64>,
    ln_fact: Vec<f64>,
}

impl<'a> IidObjective<'a> {
    fn new(game: &'a Game, horizon: usize, cap: u64) -> Result<Self> {
        let n = game.n_outcomes();
        let size = composition_count(horizon, n);
        if size > cap as u128 {
            return Err(Error::limit("count vectors", size, cap));
        }
        let mut counts = Vec::new();
        for_each_composition(horizon, n, |c| counts.push(c.to_vec()));
        let comparators = counts
            .iter()
            .map(|c| {
                let mut tot = vec![0.0; game.n_actions()];
                for (z, &k) in c.iter().enumerate() {
                    for (a, l) in tot.iter_mut().zip(game.loss_row(z)) {
                        *a += k as f64 * l;
                    }
                }
                tot.into_iter().fold(f64::INFINITY, f64::min)
            })
            .collect();
        Ok(Self {
            game,
            horizon,
            counts,
            comparators,
            ln_fact: ln_factorials(horizon),
        })
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let expected: NeumaierSum = self
            .counts
            .iter()
            .zip(&self.comparators)
            .map(|(c, v)| multinomial_pmf(c, p, &self.ln_fact) * v)
            .collect();
        self.horizon as f64 * self.game.phi_value(p) - expected.value()
    }
}

fn best_iid(game: &Game, horizon: usize, tol: f64, cap: u64) -> Result<Vec<f64>> {
    let n = game.n_outcomes();
    let obj = IidObjective::new(game, horizon, cap)?;
    let mut resolution = 1;
    while composition_count(resolution + 1, n) <= IID_LATTICE_POINTS {
        resolution += 1;
    }
    let mut best = vec![1.0 / n as f64; n];
    let mut best_val = obj.eval(&best);
    for p in simplex_lattice(n, resolution) {
        let v = obj.eval(&p);
        if v > best_val {
            best_val = v;
            best = p;
        }
    }
    let mut h = 1.0 / resolution as f64;
    while h >= tol {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || best[j] < h {
                        continue;
                    }
                    let mut cand = best.clone();
                    cand[i] += h;
                    cand[j] -= h;
                    let v = obj.eval(&cand);
                    if v > best_val + 1e-15 {
                        best_val = v;
                        best = cand;
                        improved = true;
                    }
                }
            }
        }
        h /= 2.0;
    }
    Ok(best)
}

/// Maximizes over round `t` with the other rounds fixed; the objective is
/// `Φ(p_t) + ⟨p_t, b⟩` with `b_z = -E[min_f (ℓ(z, f) + Σ_{s≠t} ℓ(Z_s, f))]`.
fn round_objective(game: &Game, rounds: &[SimplexDist], t: usize) -> Result<NodeObjective> {
    let n = game.n_outcomes();
    let k = game.n_actions();
    let others: Vec<&SimplexDist> = rounds
        .iter()
        .enumerate()
        .filter(|(s, _)| *s != t)
        .map(|(_, p)| p)
        .collect();
    let mut b = vec![NeumaierSum::new(); n];
    let mut stack = vec![(0usize, 1.0f64, vec![0.0; k])];
    while let Some((depth, prob, cum)) = stack.pop() {
        if depth == others.len() {
            for (z, bz) in b.iter_mut().enumerate() {
                let m = cum
                    .iter()
                    .zip(game.loss_row(z))
                    .map(|(c, l)| c + l)
                    .fold(f64::INFINITY, f64::min);
                bz.add(-prob * m);
            }
            continue;
        }
        for (z, &pz) in others[depth].weights().iter().enumerate() {
            if pz > 0.0 {
                let next: Vec<f64> = cum
                    .iter()
                    .zip(game.loss_row(z))
                    .map(|(c, l)| c + l)
                    .collect();
                stack.push((depth + 1, prob * pz, next));
            }
        }
    }
    let b: Vec<f64> = b.iter().map(NeumaierSum::value).collect();
    let vectors = (0..k)
        .map(|f| (0..n).map(|z| game.loss(z, f) + b[z]).collect())
        .collect();
    NodeObjective::new(vectors)
}

fn product_regret(game: &Game, rounds: &[SimplexDist], cap: u64) -> Result<f64> {
    Ok(p_regret_exact(game, &ProductStrategy::new(rounds.to_vec())?, cap)?.value)
}

/// Evaluates all four levels of the hierarchy for horizon `T`.
pub fn hierarchy_eval(
    game: &Game,
    horizon: usize,
    config: &HierarchyConfig<'_>,
) -> Result<HierarchyResult> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = game.n_outcomes();
    let worst = pow_saturating(n, horizon);
    if worst > config.cap as u128 {
        return Err(Error::limit("outcome sequences", worst, config.cap));
    }
    let tol = config.settings.tol;

    let iid_p = SimplexDist::from_weights(best_iid(game, horizon, tol, config.cap)?)?;
    let iid = p_regret_exact(game, &IidStrategy::new(iid_p.clone(), horizon)?, config.cap)?.value;

    let mut rounds = vec![iid_p.clone(); horizon];
    let mut indep = iid;
    let mut exhausted = false;
    for sweep in 0..MAX_SWEEPS {
        let before = indep;
        for t in 0..horizon {
            let obj = round_objective(game, &rounds, t)?;
            let stream = (sweep * horizon + t) as u64;
            let opt = config.optimizer.maximize(
                &obj,
                Some(rounds[t].weights()),
                &config.settings,
                stream,
            );
            exhausted |= opt.exhausted;
            let cand = SimplexDist::from_weights(project_to_simplex(&opt.point))?;
            let mut trial = rounds.clone();
            trial[t] = cand;
            let v = product_regret(game, &trial, config.cap)?;
            if v > indep {
                indep = v;
                rounds = trial;
            }
        }
        if indep - before <= tol {
            break;
        }
    }

    let dual = dual_search(
        game,
        horizon,
        config.optimizer,
        &config.settings,
        None,
        config.cap,
    )?;
    exhausted |= dual.budget_exhausted;
    let (joint, joint_fell_back) = if dual.value >= indep {
        (dual.value, false)
    } else {
        let product = JointDistTree::product(&rounds, config.cap)?;
        (p_regret_exact(game, &product, config.cap)?.value, true)
    };

    let minimax = minimax_value(game, horizon, config.solver, config.cap)?.value;
    Ok(HierarchyResult {
        iid,
        indep,
        joint,
        minimax,
        iid_distribution: iid_p,
        product_rounds: rounds,
        joint_fell_back,
        budget_exhausted: exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::dual::GridSearch;
    use crate::engine::solver::LpSolver;
    use crate::games::experts_simple_game;

    #[test]
    fn single_round_levels_coincide() {
        let g = experts_simple_game(2).unwrap();
        let config = HierarchyConfig {
            solver: &LpSolver,
            optimizer: &GridSearch::default(),
            settings: OptimizerSettings::default(),
            cap: 1_000_000,
        };
        let h = hierarchy_eval(&g, 1, &config).unwrap();
        for v in [h.iid, h.indep, h.joint, h.minimax] {
            assert!((v - 0.5).abs() < 1e-6, "{h:?}");
        }
        assert!(h.is_ordered(1e-9));
    }
}
