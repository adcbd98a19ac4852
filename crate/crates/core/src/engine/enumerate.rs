//! Depth-first traversal of the outcome histories a strategy can reach.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::numerics::pow_saturating;
use crate::strategy::AdversaryStrategy;

/// Default cap on the number of full outcome sequences enumerated.
pub const DEFAULT_SEQUENCE_CAP: u64 = 10_000_000;

pub(crate) fn check_compatible(game: &Game, strategy: &dyn AdversaryStrategy) -> Result<()> {
    if game.n_outcomes() != strategy.n_outcomes() {
        return Err(Error::invalid(format!(
            "strategy `{}` has {} outcomes, game `{}` has {}",
            strategy.name(),
            strategy.n_outcomes(),
            game.name(),
            game.n_outcomes()
        )));
    }
    if strategy.horizon() == 0 {
        return Err(Error::invalid("strategy horizon must be at least 1"));
    }
    Ok(())
}

/// Shared count of visited leaves, checked against a cap.
#[derive(Debug)]
pub struct LeafBudget {
    visited: AtomicU64,
    cap: u64,
    worst_case: u128,
}

impl LeafBudget {
    pub fn new(strategy: &dyn AdversaryStrategy, cap: u64) -> Self {
        Self {
            visited: AtomicU64::new(0),
            cap,
            worst_case: pow_saturating(strategy.n_outcomes(), strategy.horizon()),
        }
    }

    fn charge(&self) -> Result<()> {
        let n = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.cap {
            return Err(Error::limit(
                "reachable outcome sequences",
                self.worst_case.max(n as u128),
                self.cap,
            ));
        }
        Ok(())
    }

    pub fn visited(&self) -> u64 {
        self.visited.load(Ordering::Relaxed)
    }
}

/// Visits every positive-probability history extending `prefix`.
///
/// `on_node(history, prob, conditional)` runs for each history shorter than
/// the horizon, `on_leaf(sequence, prob)` for each full sequence. Parents are
/// visited before their children and children in outcome order.
pub fn visit_subtree<N, L>(
    strategy: &dyn AdversaryStrategy,
    prefix: &mut Vec<usize>,
    prob: f64,
    budget: &LeafBudget,
    on_node: &mut N,
    on_leaf: &mut L,
) -> Result<()>
where
    N: FnMut(&[usize], f64, &SimplexDist),
    L: FnMut(&[usize], f64),
{
    if prefix.len() == strategy.horizon() {
        budget.charge()?;
        on_leaf(prefix, prob);
        return Ok(());
    }
    let p = strategy.conditional(prefix);
    on_node(prefix, prob, &p);
    for (z, &pz) in p.weights().iter().enumerate() {
        if pz > 0.0 {
            prefix.push(z);
            let r = visit_subtree(strategy, prefix, prob * pz, budget, on_node, on_leaf);
            prefix.pop();
            r?;
        }
    }
    Ok(())
}

/// [`visit_subtree`] from the empty history.
pub fn visit_paths<N, L>(
    strategy: &dyn AdversaryStrategy,
    cap: u64,
    mut on_node: N,
    mut on_leaf: L,
) -> Result<()>
where
    N: FnMut(&[usize], f64, &SimplexDist),
    L: FnMut(&[usize], f64),
{
    let budget = LeafBudget::new(strategy, cap);
    let mut prefix = Vec::with_capacity(strategy.horizon());
    visit_subtree(
        strategy,
        &mut prefix,
        1.0,
        &budget,
        &mut on_node,
        &mut on_leaf,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::ShrinkageAdversary;

    #[test]
    fn leaf_probabilities_sum_to_one() {
        let s = ShrinkageAdversary::new(5).unwrap();
        let mut total = 0.0;
        let mut leaves = 0;
        visit_paths(
            &s,
            1000,
            |_, _, _| {},
            |_, p| {
                total += p;
                leaves += 1;
            },
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(leaves, 32);
    }

    #[test]
    fn cap_is_enforced() {
        let s = ShrinkageAdversary::new(5).unwrap();
        let r = visit_paths(&s, 10, |_, _, _| {}, |_, _| {});
        assert!(matches!(r, Err(Error::ResourceLimit { cap: 10, .. })));
    }
}
