//! Adversary strategies given by their per-round conditionals.

use crate::error::{Error, Result};
use crate::game::SimplexDist;

/// How a strategy's conditionals depend on the round and the history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Same distribution every round, regardless of history.
    Iid,
    /// Round-dependent, history-independent.
    Product,
    Dependent,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Iid => "iid",
            StrategyKind::Product => "product",
            StrategyKind::Dependent => "dependent",
        }
    }
}

/// A joint distribution over outcome sequences of length `horizon`,
/// described by `p_t(· | Z_1..Z_{t-1})`.
pub trait AdversaryStrategy: Send + Sync {
    fn name(&self) -> &str;

    fn horizon(&self) -> usize;

    fn n_outcomes(&self) -> usize;

    fn kind(&self) -> StrategyKind;

    /// Conditional distribution of the next outcome. `history.len()` is in
    /// `0..horizon`.
    fn conditional(&self, history: &[usize]) -> SimplexDist;
}

/// The same distribution `p` in every round.
#[derive(Debug, Clone)]
pub struct IidStrategy {
    p: SimplexDist,
    horizon: usize,
}

impl IidStrategy {
    pub fn new(p: SimplexDist, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(Self { p, horizon })
    }

    /// Repeated point mass at outcome `z`.
    pub fn point_mass(n_outcomes: usize, z: usize, horizon: usize) -> Result<Self> {
        if z >= n_outcomes {
            return Err(Error::Index {
                what: "outcome",
                index: z,
                len: n_outcomes,
            });
        }
        Self::new(SimplexDist::point_mass(n_outcomes, z), horizon)
    }

    pub fn distribution(&self) -> &SimplexDist {
        &self.p
    }
}

impl AdversaryStrategy for IidStrategy {
    fn name(&self) -> &str {
        "iid"
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn n_outcomes(&self) -> usize {
        self.p.len()
    }

    fn kind(&self) -> StrategyKind {
        StrategyKind::Iid
    }

    fn conditional(&self, _history: &[usize]) -> SimplexDist {
        self.p.clone()
    }
}

/// Independent rounds with round-specific distributions.
#[derive(Debug, Clone)]
pub struct ProductStrategy {
    rounds: Vec<SimplexDist>,
}

impl ProductStrategy {
    pub fn new(rounds: Vec<SimplexDist>) -> Result<Self> {
        let n = rounds
            .first()
            .ok_or_else(|| Error::invalid("product strategy needs at least one round"))?
            .len();
        if rounds.iter().any(|p| p.len() != n) {
            return Err(Error::invalid(
                "round distributions have different supports",
            ));
        }
        Ok(Self { rounds })
    }

    pub fn rounds(&self) -> &[SimplexDist] {
        &self.rounds
    }
}

impl AdversaryStrategy for ProductStrategy {
    fn name(&self) -> &str {
        "product"
    }

    fn horizon(&self) -> usize {
        self.rounds.len()
    }

    fn n_outcomes(&self) -> usize {
        self.rounds[0].len()
    }

    fn kind(&self) -> StrategyKind {
        StrategyKind::Product
    }

    fn conditional(&self, history: &[usize]) -> SimplexDist {
        self.rounds[history.len()].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_and_product_conditionals() {
        let p = SimplexDist::new(vec![0.25, 0.75]).unwrap();
        let s = IidStrategy::new(p.clone(), 3).unwrap();
        assert_eq!(s.conditional(&[]), p);
        assert_eq!(s.conditional(&[1, 0]), p);
        assert_eq!(s.kind(), StrategyKind::Iid);

        let q = SimplexDist::uniform(2);
        let prod = ProductStrategy::new(vec![p.clone(), q.clone()]).unwrap();
        assert_eq!(prod.conditional(&[]), p);
        assert_eq!(prod.conditional(&[0]), q);
        assert_eq!(prod.horizon(), 2);

        assert!(IidStrategy::point_mass(2, 2, 1).is_err());
        assert!(IidStrategy::new(q, 0).is_err());
    }
}
