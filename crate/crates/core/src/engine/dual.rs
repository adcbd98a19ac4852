//! Search over joint distributions for the dual (stochastic) value.
//!
//! Backward over histories, each conditional is chosen to maximize
//! `g(p) = Φ(p) + E_p W(h z) = min_f ⟨p, a_f⟩` with
//! `a_f[z] = ℓ(z, f) + W(h z)`. `g` is concave, so each node is a concave
//! maximization over the simplex. As in the primal induction, `W(h)` depends
//! on `h` only through its outcome counts.

use rayon::prelude::*;

use crate::engine::enumerate::DEFAULT_SEQUENCE_CAP;
use crate::engine::joint::JointDistTree;
use crate::engine::minimax::{representative, terminal_values, CountLevels};
use crate::engine::pregret::p_regret_exact;
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::numerics::{project_to_simplex, random_simplex_point};
use crate::rng::substream;
use crate::strategy::AdversaryStrategy;

/// `p ↦ min_f ⟨p, a_f⟩` for a fixed family of vectors `a_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeObjective {
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl NodeObjective {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid(
                "objective vectors must be nonempty and equal length",
            ));
        }
        Ok(Self { vectors, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn inner(&self, p: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let p = p.to_vec();
        self.vectors
            .iter()
            .map(move |a| a.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>())
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.inner(p).fold(f64::INFINITY, f64::min)
    }

    /// `-τ log Σ_f exp(-⟨p, a_f⟩/τ)` and its gradient.
    fn smoothed(&self, p: &[f64], tau: f64) -> (f64, Vec<f64>) {
        let vals: Vec<f64> = self.inner(p).collect();
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = vals.iter().map(|v| (-(v - min) / tau).exp()).collect();
        let total: f64 = w.iter().sum();
        let value = min - tau * total.ln();
        let mut grad = vec![0.0; self.dim];
        for (a, wf) in self.vectors.iter().zip(&w) {
            for (g, x) in grad.iter_mut().zip(a) {
                *g += wf / total * x;
            }
        }
        (value, grad)
    }

    fn scale(&self) -> f64 {
        self.vectors
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Target accuracy of each node maximization.
    pub tol: f64,
    /// Objective evaluations allowed per node.
    pub max_evals: u64,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_evals: 5_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeOptimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    pub exhausted: bool,
}

/// Maximizes a [`NodeObjective`] over the simplex.
pub trait DualOptimizer: Send + Sync {
    fn name(&self) -> &str;

    /// `stream` distinguishes nodes for optimizers that draw random starts.
    fn maximize(
        &self,
        objective: &NodeObjective,
        warm: Option<&[f64]>,
        settings: &OptimizerSettings,
        stream: u64,
    ) -> NodeOptimum;
}

struct Tracker<'a> {
    objective: &'a NodeObjective,
    best_point: Vec<f64>,
    best_value: f64,
    evals: u64,
    max_evals: u64,
}

impl<'a> Tracker<'a> {
    fn new(objective: &'a NodeObjective, max_evals: u64) -> Self {
        Self {
            objective,
            best_point: vec![1.0 / objective.dim() as f64; objective.dim()],
            best_value: f64::NEG_INFINITY,
            evals: 0,
            max_evals,
        }
    }

    fn eval(&mut self, p: &[f64]) -> f64 {
        self.evals += 1;
        let v = self.objective.eval(p);
        if v > self.best_value {
            self.best_value = v;
            self.best_point = p.to_vec();
        }
        v
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    fn finish(self) -> NodeOptimum {
        let exhausted = self.exhausted();
        NodeOptimum {
            point: self.best_point,
            value: self.best_value,
            evaluations: self.evals,
            exhausted,
        }
    }
}

/// Nested one-dimensional zooming grids over `p_1, p_2, ...`, each inner
/// coordinate maximized for fixed outer ones. Partial maximization of a
/// concave function is concave, so each one-dimensional search is over a
/// unimodal function and the zoom keeps the maximizer in range.
#[derive(Debug, Clone, Copy)]
pub struct GridSearch {
    /// Points per one-dimensional grid.
    pub points: usize,
}

impl Default for GridSearch {
    fn default() -> Self {
        Self { points: 9 }
    }
}

impl GridSearch {
    fn search(
        &self,
        tracker: &mut Tracker<'_>,
        prefix: &mut Vec<f64>,
        remaining: f64,
        tol: f64,
    ) -> f64 {
        let dim = tracker.objective.dim();
        if prefix.len() + 1 == dim {
            prefix.push(remaining.max(0.0));
            let v = tracker.eval(prefix);
            prefix.pop();
            return v;
        }
        let (mut lo, mut hi) = (0.0, remaining.max(0.0));
        let mut best = (f64::NEG_INFINITY, 0.0);
        loop {
            let k = self.points.max(3);
            let step = (hi - lo) / (k - 1) as f64;
            let mut vals = Vec::with_capacity(k);
            for i in 0..k {
                let x = if i + 1 == k { hi } else { lo + step * i as f64 };
                prefix.push(x);
                let v = self.search(tracker, prefix, remaining - x, tol);
                prefix.pop();
                vals.push((v, x));
            }
            let (i_best, &(v, x)) = vals.iter().enumerate().fold((0, &vals[0]), |acc, cur| {
                if cur.1 .0 > acc.1 .0 {
                    cur
                } else {
                    acc
                }
            });
            if v > best.0 {
                best = (v, x);
            }
            if hi - lo <= tol || tracker.exhausted() {
                return best.0;
            }
            let new_lo = if i_best == 0 { lo } else { vals[i_best - 1].1 };
            let new_hi = if i_best + 1 == k {
                hi
            } else {
                vals[i_best + 1].1
            };
            lo = new_lo;
            hi = new_hi;
        }
    }
}

impl DualOptimizer for GridSearch {
    fn name(&self) -> &str {
        "grid"
    }

    fn maximize(
        &self,
        objective: &NodeObjective,
        warm: Option<&[f64]>,
        settings: &OptimizerSettings,
        _stream: u64,
    ) -> NodeOptimum {
        let mut tracker = Tracker::new(objective, settings.max_evals);
        if let Some(w) = warm {
            tracker.eval(w);
        }
        let mut prefix = Vec::with_capacity(objective.dim());
        self.search(&mut tracker, &mut prefix, 1.0, settings.tol);
        tracker.finish()
    }
}

/// Projected ascent on a log-sum-exp smoothing of the objective, with step
/// halving on non-improvement and the smoothing temperature annealed towards
/// zero. Keeps the best point under the exact objective.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateAscent {
    /// Random starting points in addition to the uniform (and warm) start.
    pub restarts: usize,
    pub iterations_per_temperature: usize,
}

impl Default for CoordinateAscent {
    fn default() -> Self {
        Self {
            restarts: 2,
            iterations_per_temperature: 300,
        }
    }
}

impl CoordinateAscent {
    fn run(&self, tracker: &mut Tracker<'_>, start: Vec<f64>, tol: f64) {
        let obj = tracker.objective;
        let scale = obj.scale();
        let n_vec = obj.vectors.len().max(2) as f64;
        let mut tau = 0.1 * scale;
        let tau_min = 0.1 * tol / n_vec.ln();
        let mut p = start;
        tracker.eval(&p);
        let mut step = 1.0 / scale;
        while tau >= tau_min && !tracker.exhausted() {
            let (mut val, mut grad) = obj.smoothed(&p, tau);
            for _ in 0..self.iterations_per_temperature {
                let cand: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
                let cand = project_to_simplex(&cand);
                let (cv, cg) = obj.smoothed(&cand, tau);
                tracker.eval(&cand);
                if cv > val {
                    let gain = cv - val;
                    p = cand;
                    val = cv;
                    grad = cg;
                    step *= 1.5;
                    if gain < 1e-3 * tol {
                        break;
                    }
                } else {
                    step *= 0.5;
                    if step < 1e-16 {
                        break;
                    }
                }
                if tracker.exhausted() {
                    return;
                }
            }
            tau /= 4.0;
            step = step.max(tau / (scale * scale));
        }
    }
}

impl DualOptimizer for CoordinateAscent {
    fn name(&self) -> &str {
        "coordinate-ascent"
    }

    fn maximize(
        &self,
        objective: &NodeObjective,
        warm: Option<&[f64]>,
        settings: &OptimizerSettings,
        stream: u64,
    ) -> NodeOptimum {
        let mut tracker = Tracker::new(objective, settings.max_evals);
        let dim = objective.dim();
        let mut starts = Vec::new();
        if let Some(w) = warm {
            starts.push(w.to_vec());
        }
        starts.push(vec![1.0 / dim as f64; dim]);
        let mut rng = substream(settings.seed, "coordinate-ascent", stream);
        for _ in 0..self.restarts {
            starts.push(random_simplex_point(dim, &mut rng));
        }
        for s in starts {
            self.run(&mut tracker, s, settings.tol);
        }
        tracker.finish()
    }
}

#[derive(Debug, Clone)]
pub struct DualSearchResult {
    pub joint: JointDistTree,
    /// Exact stochastic regret of `joint`.
    pub value: f64,
    /// Value of the backward recursion with the chosen conditionals.
    pub search_value: f64,
    pub budget_exhausted: bool,
    pub evaluations: u64,
    pub tolerance: f64,
    pub optimizer: String,
}

/// Builds a joint distribution by maximizing each node's concave objective
/// from the last round backwards; the returned value is the exact regret of
/// the resulting joint.
pub fn dual_search(
    game: &Game,
    horizon: usize,
    optimizer: &dyn DualOptimizer,
    settings: &OptimizerSettings,
    warm_start: Option<&dyn AdversaryStrategy>,
    state_cap: u64,
) -> Result<DualSearchResult> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let n = game.n_outcomes();
    if let Some(w) = warm_start {
        if w.n_outcomes() != n || w.horizon() != horizon {
            return Err(Error::invalid(
                "warm start does not match the game and horizon",
            ));
        }
    }
    let levels = CountLevels::new(n, horizon, state_cap)?;
    let mut next = terminal_values(game, &levels.levels[horizon]);
    let mut chosen: Vec<Vec<Vec<f64>>> = vec![Vec::new(); horizon];
    let mut exhausted = false;
    let mut evaluations = 0u64;
    let mut stream = 0u64;
    for t in (0..horizon).rev() {
        let base = stream;
        let results: Vec<Result<NodeOptimum>> = levels.levels[t]
            .par_iter()
            .enumerate()
            .map(|(s, counts)| {
                let children: Vec<f64> = (0..n).map(|z| next[levels.child(t, s, z)]).collect();
                let vectors = (0..game.n_actions())
                    .map(|f| (0..n).map(|z| game.loss(z, f) + children[z]).collect())
                    .collect();
                let objective = NodeObjective::new(vectors)?;
                let warm = warm_start.map(|w| w.conditional(&representative(counts)).into_inner());
                Ok(optimizer.maximize(&objective, warm.as_deref(), settings, base + s as u64))
            })
            .collect();
        stream += levels.levels[t].len() as u64;
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        exhausted |= results.iter().any(|r| r.exhausted);
        evaluations += results.iter().map(|r| r.evaluations).sum::<u64>();
        next = results.iter().map(|r| r.value).collect();
        chosen[t] = results.into_iter().map(|r| r.point).collect();
    }
    let search_value = next[0];
    let joint = JointDistTree::from_fn(n, horizon, DEFAULT_SEQUENCE_CAP.max(state_cap), |h| {
        let mut counts = vec![0; n];
        for &z in h {
            counts[z] += 1;
        }
        let p = project_to_simplex(&chosen[h.len()][levels.lookup(&counts)]);
        SimplexDist::from_trusted(p)
    })?;
    let value = p_regret_exact(game, &joint, DEFAULT_SEQUENCE_CAP.max(state_cap))?.value;
    Ok(DualSearchResult {
        joint,
        value,
        search_value,
        budget_exhausted: exhausted,
        evaluations,
        tolerance: settings.tol,
        optimizer: optimizer.name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::experts_simple_game;

    #[test]
    fn one_dimensional_pyramid() {
        let obj = NodeObjective::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let settings = OptimizerSettings::default();
        for opt in [
            &GridSearch::default() as &dyn DualOptimizer,
            &CoordinateAscent::default(),
        ] {
            let r = opt.maximize(&obj, None, &settings, 0);
            assert!((r.value - 0.5).abs() < 1e-6, "{}: {}", opt.name(), r.value);
        }
    }

    #[test]
    fn experts_single_round() {
        let g = experts_simple_game(2).unwrap();
        let r = dual_search(
            &g,
            1,
            &GridSearch::default(),
            &OptimizerSettings::default(),
            None,
            1000,
        )
        .unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
        assert!((r.joint.conditional_weights(&[])[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn eval_budget_is_flagged() {
        let g = experts_simple_game(3).unwrap();
        let settings = OptimizerSettings {
            max_evals: 10,
            ..OptimizerSettings::default()
        };
        let r = dual_search(&g, 1, &GridSearch::default(), &settings, None, 1000).unwrap();
        assert!(r.budget_exhausted);
    }
}
