//! Joint distributions over outcome sequences stored as a dense tree of
//! conditionals.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::SimplexDist;
use crate::numerics::{pow_saturating, random_simplex_point, renormalize};
use crate::strategy::{AdversaryStrategy, StrategyKind};

/// Conditionals `p_t(· | h)` for every history `h` of length `< T`.
///
/// Level `t` stores `|Z|^t` conditionals, indexed by the base-`|Z|` code of
/// the history with the first outcome most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistTree {
    n_outcomes: usize,
    levels: Vec<Vec<f64>>,
    kind: StrategyKind,
}

fn history_code(history: &[usize], n: usize) -> usize {
    history.iter().fold(0, |acc, &z| acc * n + z)
}

fn decode(mut code: usize, len: usize, n: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(len, 0);
    for slot in out.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
}

impl JointDistTree {
    fn check_size(n_outcomes: usize, horizon: usize, cap: u64) -> Result<()> {
        if n_outcomes == 0 || horizon == 0 {
            return Err(Error::invalid(
                "joint tree needs at least one outcome and one round",
            ));
        }
        let size = pow_saturating(n_outcomes, horizon);
        if size > cap as u128 {
            return Err(Error::limit("joint tree histories", size, cap));
        }
        Ok(())
    }

    fn build(
        n_outcomes: usize,
        horizon: usize,
        kind: StrategyKind,
        cap: u64,
        mut conditional: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        Self::check_size(n_outcomes, horizon, cap)?;
        let mut levels = Vec::with_capacity(horizon);
        let mut hist = Vec::with_capacity(horizon);
        let mut width = 1usize;
        for t in 0..horizon {
            let mut level = Vec::with_capacity(width * n_outcomes);
            for code in 0..width {
                decode(code, t, n_outcomes, &mut hist);
                let p = conditional(&hist);
                if p.len() != n_outcomes {
                    return Err(Error::invalid("conditional has the wrong dimension"));
                }
                level.extend(p);
            }
            levels.push(level);
            width *= n_outcomes;
        }
        Ok(Self {
            n_outcomes,
            levels,
            kind,
        })
    }

    /// Materializes every conditional of `strategy`.
    pub fn from_strategy(strategy: &dyn AdversaryStrategy, cap: u64) -> Result<Self> {
        Self::build(
            strategy.n_outcomes(),
            strategy.horizon(),
            strategy.kind(),
            cap,
            |h| strategy.conditional(h).into_inner(),
        )
    }

    /// Builds a tree from a rule that may depend on the whole history.
    pub fn from_fn(
        n_outcomes: usize,
        horizon: usize,
        cap: u64,
        mut conditional: impl FnMut(&[usize]) -> SimplexDist,
    ) -> Result<Self> {
        Self::build(n_outcomes, horizon, StrategyKind::Dependent, cap, |h| {
            conditional(h).into_inner()
        })
    }

    pub fn iid(p: &SimplexDist, horizon: usize, cap: u64) -> Result<Self> {
        Self::build(p.len(), horizon, StrategyKind::Iid, cap, |_| {
            p.weights().to_vec()
        })
    }

    pub fn product(rounds: &[SimplexDist], cap: u64) -> Result<Self> {
        let n = rounds
            .first()
            .ok_or_else(|| Error::invalid("product joint needs at least one round"))?
            .len();
        if rounds.iter().any(|p| p.len() != n) {
            return Err(Error::invalid(
                "round distributions have different supports",
            ));
        }
        Self::build(n, rounds.len(), StrategyKind::Product, cap, |h| {
            rounds[h.len()].weights().to_vec()
        })
    }

    /// Random conditionals, uniform on the simplex; with probability
    /// `sparsity` one outcome is removed from a conditional's support.
    pub fn random<R: Rng + ?Sized>(
        n_outcomes: usize,
        horizon: usize,
        sparsity: f64,
        rng: &mut R,
        cap: u64,
    ) -> Result<Self> {
        Self::build(n_outcomes, horizon, StrategyKind::Dependent, cap, |_| {
            random_conditional(n_outcomes, sparsity, rng)
        })
    }

    /// `λ·a + (1-λ)·b` formed on full path probabilities, with conditionals
    /// re-derived from the mixed prefix probabilities. Histories unreachable
    /// under both take the λ-mix of the two conditionals.
    pub fn mixture(a: &JointDistTree, b: &JointDistTree, lambda: f64) -> Result<Self> {
        if a.n_outcomes != b.n_outcomes || a.horizon() != b.horizon() {
            return Err(Error::invalid(
                "mixed joints must share outcomes and horizon",
            ));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid("mixture weight must lie in [0, 1]"));
        }
        let n = a.n_outcomes;
        let pa = a.prefix_probabilities();
        let pb = b.prefix_probabilities();
        let mut levels = Vec::with_capacity(a.horizon());
        for t in 0..a.horizon() {
            let width = pa[t].len();
            let mut level = Vec::with_capacity(width * n);
            for code in 0..width {
                let wa = lambda * pa[t][code];
                let wb = (1.0 - lambda) * pb[t][code];
                let ca = &a.levels[t][code * n..(code + 1) * n];
                let cb = &b.levels[t][code * n..(code + 1) * n];
                let mut c: Vec<f64> = if wa + wb > 0.0 {
                    ca.iter().zip(cb).map(|(x, y)| wa * x + wb * y).collect()
                } else {
                    ca.iter()
                        .zip(cb)
                        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
                        .collect()
                };
                renormalize(&mut c);
                level.extend(c);
            }
            levels.push(level);
        }
        let kind = if a.kind == StrategyKind::Iid && b.kind == StrategyKind::Iid && a == b {
            StrategyKind::Iid
        } else {
            StrategyKind::Dependent
        };
        Ok(Self {
            n_outcomes: n,
            levels,
            kind,
        })
    }

    pub fn horizon(&self) -> usize {
        self.levels.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// Conditional after `history`.
    pub fn conditional_weights(&self, history: &[usize]) -> &[f64] {
        let n = self.n_outcomes;
        let code = history_code(history, n);
        &self.levels[history.len()][code * n..(code + 1) * n]
    }

    /// Replaces the conditional after `history`.
    pub fn set_conditional(&mut self, history: &[usize], p: &SimplexDist) -> Result<()> {
        if p.len() != self.n_outcomes {
            return Err(Error::invalid("conditional has the wrong dimension"));
        }
        if history.len() >= self.horizon() || history.iter().any(|&z| z >= self.n_outcomes) {
            return Err(Error::invalid("history is not a node of this tree"));
        }
        let n = self.n_outcomes;
        let code = history_code(history, n);
        self.levels[history.len()][code * n..(code + 1) * n].copy_from_slice(p.weights());
        self.kind = StrategyKind::Dependent;
        Ok(())
    }

    /// `P(Z_1..Z_t = h)` for every history of each length `t < T`.
    pub fn prefix_probabilities(&self) -> Vec<Vec<f64>> {
        let n = self.n_outcomes;
        let mut out = Vec::with_capacity(self.horizon());
        out.push(vec![1.0]);
        for t in 1..self.horizon() {
            let prev = &out[t - 1];
            let cond = &self.levels[t - 1];
            let level: Vec<f64> = (0..prev.len() * n)
                .map(|code| prev[code / n] * cond[code])
                .collect();
            out.push(level);
        }
        out
    }
}

fn random_conditional<R: Rng + ?Sized>(n: usize, sparsity: f64, rng: &mut R) -> Vec<f64> {
    let mut p = random_simplex_point(n, rng);
    if n > 1 && rng.random::<f64>() < sparsity {
        let drop = rng.random_range(0..n);
        p[drop] = 0.0;
        renormalize(&mut p);
    }
    p
}

impl AdversaryStrategy for JointDistTree {
    fn name(&self) -> &str {
        "joint-tree"
    }

    fn horizon(&self) -> usize {
        self.levels.len()
    }

    fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    fn kind(&self) -> StrategyKind {
        self.kind
    }

    fn conditional(&self, history: &[usize]) -> SimplexDist {
        SimplexDist::from_trusted(self.conditional_weights(history).to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::ShrinkageAdversary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn materialized_shrinkage_matches_rule() {
        let adv = ShrinkageAdversary::new(3).unwrap();
        let tree = JointDistTree::from_strategy(&adv, 1000).unwrap();
        for h in [vec![], vec![1], vec![0, 1], vec![1, 1]] {
            assert_eq!(tree.conditional(&h), adv.conditional(&h));
        }
    }

    #[test]
    fn prefix_probabilities_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = JointDistTree::random(3, 4, 0.3, &mut rng, 1000).unwrap();
        for level in tree.prefix_probabilities() {
            assert!((level.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mixture_mixes_path_probabilities() {
        let a = JointDistTree::iid(&SimplexDist::point_mass(2, 0), 2, 100).unwrap();
        let b = JointDistTree::iid(&SimplexDist::point_mass(2, 1), 2, 100).unwrap();
        let m = JointDistTree::mixture(&a, &b, 0.25).unwrap();
        assert_eq!(m.conditional_weights(&[]), &[0.25, 0.75]);
        assert_eq!(m.conditional_weights(&[0]), &[1.0, 0.0]);
        assert_eq!(m.conditional_weights(&[1]), &[0.0, 1.0]);
    }

    #[test]
    fn size_cap() {
        let p = SimplexDist::uniform(4);
        assert!(matches!(
            JointDistTree::iid(&p, 20, 1000),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
