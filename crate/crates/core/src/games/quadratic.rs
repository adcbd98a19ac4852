//! Quadratic loss on `{-1, +1}` and the shrinkage adversary.

use crate::error::{Error, Result};
use crate::game::{EmbeddingNorm, Game, Point, SimplexDist};
use crate::numerics::{pow_saturating, NeumaierSum};
use crate::strategy::{AdversaryStrategy, StrategyKind};

/// Outcome index of `-1`.
pub const MINUS: usize = 0;
/// Outcome index of `+1`.
pub const PLUS: usize = 1;

/// Default number of grid points on `[-1, 1]`.
pub const DEFAULT_GRID: usize = 257;

/// Largest horizon accepted by [`q_invariant_sequence`].
pub const Q_INVARIANT_MAX_T: usize = 20;

/// Signed value of an outcome index.
pub fn signed(z: usize) -> f64 {
    if z == PLUS {
        1.0
    } else {
        -1.0
    }
}

/// Quadratic game `ℓ(z, f) = (f - z)²` with `Z = {-1, +1}` and actions on a
/// uniform grid of `grid` points over `[-1, 1]`.
///
/// With `horizon = Some(T)` the grid is augmented by every conditional mean
/// the shrinkage adversary can produce within `T` rounds and every empirical
/// mean of up to `T` outcomes, so Φ and the comparator agree with their
/// continuous counterparts on all reachable distributions.
pub fn quadratic_game(grid: usize, horizon: Option<usize>) -> Result<Game> {
    if grid < 2 {
        return Err(Error::invalid("quadratic grid needs at least 2 points"));
    }
    let mut xs: Vec<f64> = (0..grid)
        .map(|i| -1.0 + 2.0 * i as f64 / (grid - 1) as f64)
        .collect();
    if let Some(t_max) = horizon {
        let schedule = c_sequence(t_max)?;
        for t in 1..=t_max {
            let c = schedule.c(t);
            let s_max = t as i64 - 1;
            for s in -s_max..=s_max {
                xs.push(c * s as f64);
            }
            for s in -(t as i64)..=(t as i64) {
                xs.push(s as f64 / t as f64);
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let outcomes = vec![Point::at("-1", vec![-1.0]), Point::at("+1", vec![1.0])];
    let actions = xs
        .iter()
        .map(|&x| Point::at(format!("{x}"), vec![x]))
        .collect();
    let name = match horizon {
        Some(t) => format!("quadratic(grid={grid},T={t})"),
        None => format!("quadratic(grid={grid})"),
    };
    Game::from_fn(
        name,
        outcomes,
        actions,
        Some(EmbeddingNorm::Abs1d),
        |z, f| {
            let d = f.coords.as_ref().unwrap()[0] - z.coords.as_ref().unwrap()[0];
            d * d
        },
    )
}

/// Shrinkage factors `c_1..c_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageSchedule {
    c: Vec<f64>,
    sum: f64,
}

impl ShrinkageSchedule {
    pub fn horizon(&self) -> usize {
        self.c.len()
    }

    /// `c_t` for `t` in `1..=T`.
    pub fn c(&self, t: usize) -> f64 {
        self.c[t - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    /// `Σ_t c_t`.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// `Σ_{s > t} c_s`.
    pub fn tail_sum(&self, t: usize) -> f64 {
        self.c[t..].iter().copied().collect::<NeumaierSum>().value()
    }
}

/// `c_T = 1/T`, `c_{t-1} = c_t + c_t²`.
pub fn c_sequence(horizon: usize) -> Result<ShrinkageSchedule> {
    if horizon == 0 {
        return Err(Error::invalid("shrinkage schedule needs T >= 1"));
    }
    let mut c = vec![0.0; horizon];
    c[horizon - 1] = 1.0 / horizon as f64;
    for t in (1..horizon).rev() {
        c[t - 1] = c[t] + c[t] * c[t];
    }
    let sum = c.iter().copied().collect::<NeumaierSum>().value();
    Ok(ShrinkageSchedule { c, sum })
}

/// `Σ_t c_t - (ln T - ln ln T)`; requires `T >= 3` so `ln ln T` is defined
/// and positive.
pub fn series_deficit(horizon: usize) -> Result<f64> {
    if horizon < 3 {
        return Err(Error::invalid("series deficit needs T >= 3"));
    }
    let s = c_sequence(horizon)?.sum();
    let lt = (horizon as f64).ln();
    Ok(s - (lt - lt.ln()))
}

/// Dependent adversary whose conditional mean is the running sum scaled by
/// `c_t`.
#[derive(Debug, Clone)]
pub struct ShrinkageAdversary {
    schedule: ShrinkageSchedule,
}

impl ShrinkageAdversary {
    pub fn new(horizon: usize) -> Result<Self> {
        Ok(Self {
            schedule: c_sequence(horizon)?,
        })
    }

    pub fn schedule(&self) -> &ShrinkageSchedule {
        &self.schedule
    }

    /// `P(+1)` after a history with signed sum `partial_sum` in round `t`.
    pub fn prob_plus(&self, t: usize, partial_sum: f64) -> f64 {
        (1.0 + self.schedule.c(t) * partial_sum) / 2.0
    }
}

impl AdversaryStrategy for ShrinkageAdversary {
    fn name(&self) -> &str {
        "shrinkage"
    }

    fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    fn n_outcomes(&self) -> usize {
        2
    }

    fn kind(&self) -> StrategyKind {
        StrategyKind::Dependent
    }

    fn conditional(&self, history: &[usize]) -> SimplexDist {
        let s: f64 = history.iter().map(|&z| signed(z)).sum();
        let plus = self.prob_plus(history.len() + 1, s);
        SimplexDist::from_trusted(vec![1.0 - plus, plus])
    }
}

/// `Q_0..Q_T` of the backward-induction argument for the shrinkage
/// adversary, each computed by exact enumeration of `{-1, +1}^T`.
///
/// `Q_t = E[Σ_{s≤t} (Z_s - E_s Z_s)² + c_t S_t² - Σ_{s≤t} Z_s² + Σ_{s>t} c_s]`
/// where `S_t` is the signed partial sum and `c_0 S_0² = 0`.
pub fn q_invariant_sequence(horizon: usize) -> Result<Vec<f64>> {
    if horizon > Q_INVARIANT_MAX_T {
        return Err(Error::limit(
            "q-invariant enumeration of {-1,+1}^T",
            pow_saturating(2, horizon),
            1u64 << Q_INVARIANT_MAX_T,
        ));
    }
    let adv = ShrinkageAdversary::new(horizon)?;
    let schedule = adv.schedule();
    let tails: Vec<f64> = (0..=horizon).map(|t| schedule.tail_sum(t)).collect();
    let mut acc = vec![NeumaierSum::new(); horizon + 1];
    for code in 0u64..(1u64 << horizon) {
        let mut prob = 1.0;
        let mut sum = 0.0;
        let mut sq_dev = 0.0;
        let mut terms = Vec::with_capacity(horizon + 1);
        terms.push(tails[0]);
        for t in 1..=horizon {
            let z = if code >> (t - 1) & 1 == 1 { 1.0 } else { -1.0 };
            let mean = schedule.c(t) * sum;
            let plus = (1.0 + mean) / 2.0;
            prob *= if z > 0.0 { plus } else { 1.0 - plus };
            sq_dev += (z - mean) * (z - mean);
            sum += z;
            terms.push(sq_dev + schedule.c(t) * sum * sum - t as f64 + tails[t]);
        }
        if prob == 0.0 {
            continue;
        }
        for (a, term) in acc.iter_mut().zip(terms) {
            a.add(prob * term);
        }
    }
    Ok(acc.iter().map(NeumaierSum::value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_small_cases() {
        let s = c_sequence(1).unwrap();
        assert_eq!(s.values(), &[1.0]);
        assert_eq!(s.sum(), 1.0);
        let s = c_sequence(2).unwrap();
        assert_eq!(s.values(), &[0.75, 0.5]);
        assert_eq!(s.sum(), 1.25);
        assert!(c_sequence(0).is_err());
    }

    #[test]
    fn schedule_is_bounded_by_one_over_t() {
        let s = c_sequence(1000).unwrap();
        for t in 1..=1000 {
            assert!(s.c(t) <= 1.0 / t as f64 + 1e-15, "t = {t}");
        }
    }

    #[test]
    fn shrinkage_conditionals() {
        let adv = ShrinkageAdversary::new(2).unwrap();
        assert_eq!(adv.conditional(&[]).weights(), &[0.5, 0.5]);
        assert_eq!(adv.conditional(&[PLUS]).weights(), &[0.25, 0.75]);
        assert_eq!(adv.conditional(&[MINUS]).weights(), &[0.75, 0.25]);
    }

    #[test]
    fn q_invariant_small_horizons() {
        for q in q_invariant_sequence(2).unwrap() {
            assert!((q - 1.25).abs() < 1e-12);
        }
        for q in q_invariant_sequence(1).unwrap() {
            assert!((q - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            q_invariant_sequence(21),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn augmented_grid_contains_conditional_means() {
        let g = quadratic_game(5, Some(3)).unwrap();
        let xs: Vec<f64> = g
            .actions()
            .iter()
            .map(|a| a.coords.as_ref().unwrap()[0])
            .collect();
        let s = c_sequence(3).unwrap();
        for target in [s.c(3) * 2.0, s.c(2), -1.0 / 3.0, 0.0] {
            assert!(xs.iter().any(|x| (x - target).abs() < 1e-13), "{target}");
        }
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
