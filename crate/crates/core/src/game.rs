//! Finite games, distributions over outcomes, the minimum-expected-loss
//! functional Φ, and its support-function geometry.
//!
//! A [`Game`] holds a dense loss matrix `L[z][f]` over a finite outcome set
//! and a finite action set. Continuous games are represented by grids.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, dot};

/// Default absolute tolerance for ties in the argmin of Φ.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Tolerance on the total mass of a probability vector.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Norm used to measure distances between embedded actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingNorm {
    Euclidean,
    Sup,
    #[serde(rename = "abs-1d")]
    Abs1d,
}

impl EmbeddingNorm {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            EmbeddingNorm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            EmbeddingNorm::Sup => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            EmbeddingNorm::Abs1d => (a[0] - b[0]).abs(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingNorm::Euclidean => "euclidean",
            EmbeddingNorm::Sup => "sup",
            EmbeddingNorm::Abs1d => "abs-1d",
        }
    }
}

impl std::str::FromStr for EmbeddingNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(EmbeddingNorm::Euclidean),
            "sup" => Ok(EmbeddingNorm::Sup),
            "abs-1d" => Ok(EmbeddingNorm::Abs1d),
            other => Err(Error::invalid(format!("unknown embedding norm `{other}`"))),
        }
    }
}

/// A labelled outcome or action with an optional coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Point {
    pub fn labelled(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            coords: None,
        }
    }

    pub fn at(label: impl Into<String>, coords: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            coords: Some(coords),
        }
    }
}

/// Probability vector over outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexDist(Vec<f64>);

/// Probability vector over actions (a randomized player move).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedAction(Vec<f64>);

fn check_simplex(weights: &[f64], what: &str) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::invalid(format!("{what}: empty weight vector")));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::invalid(format!(
            "{what}: weight {w} is not a nonnegative number"
        )));
    }
    let total = compensated_sum(weights.iter().copied());
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::invalid(format!(
            "{what}: weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

macro_rules! simplex_vector {
    ($ty:ident, $what:literal) => {
        impl $ty {
            pub fn new(weights: Vec<f64>) -> Result<Self> {
                check_simplex(&weights, $what)?;
                Ok(Self(weights))
            }

            /// Normalizes nonnegative weights to unit mass.
            pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::invalid(concat!(
                        $what,
                        ": negative or non-finite weight"
                    )));
                }
                let total = compensated_sum(weights.iter().copied());
                if total <= 0.0 {
                    return Err(Error::invalid(concat!($what, ": weights have zero mass")));
                }
                for w in weights.iter_mut() {
                    *w /= total;
                }
                Self::new(weights)
            }

            pub fn uniform(n: usize) -> Self {
                Self(vec![1.0 / n as f64; n])
            }

            pub fn point_mass(n: usize, index: usize) -> Self {
                let mut w = vec![0.0; n];
                w[index] = 1.0;
                Self(w)
            }

            pub fn weights(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl std::ops::Index<usize> for $ty {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }
    };
}

simplex_vector!(SimplexDist, "distribution");
simplex_vector!(MixedAction, "mixed action");

impl SimplexDist {
    /// `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &SimplexDist, lambda: f64) -> SimplexDist {
        let w = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        SimplexDist(w)
    }

    /// Skip validation; callers guarantee the invariant.
    pub(crate) fn from_trusted(weights: Vec<f64>) -> Self {
        SimplexDist(weights)
    }
}

/// Φ(p) with the set of (near-)minimizing actions.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiResult {
    pub value: f64,
    /// Ascending action indices within the tie tolerance of the minimum.
    pub argmin_indices: Vec<usize>,
}

impl PhiResult {
    /// Deterministic subgradient selection: lowest index among minimizers.
    pub fn selected(&self) -> usize {
        self.argmin_indices[0]
    }
}

/// An outcome history `Z_1..Z_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct History(Vec<usize>);

impl History {
    pub fn new(seq: Vec<usize>, n_outcomes: usize) -> Result<Self> {
        if let Some(&z) = seq.iter().find(|&&z| z >= n_outcomes) {
            return Err(Error::Index {
                what: "outcome",
                index: z,
                len: n_outcomes,
            });
        }
        Ok(History(seq))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for History {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// A finite game: outcomes, actions, and the loss matrix `L[z][f]`.
#[derive(Clone, PartialEq)]
pub struct Game {
    name: String,
    outcomes: Vec<Point>,
    actions: Vec<Point>,
    loss: Vec<f64>,
    norm: Option<EmbeddingNorm>,
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Game")
            .field("name", &self.name)
            .field("outcomes", &self.outcomes.len())
            .field("actions", &self.actions.len())
            .field("norm", &self.norm)
            .finish()
    }
}

fn check_dims(points: &[Point], what: &str) -> Result<()> {
    let dims: Vec<usize> = points
        .iter()
        .filter_map(|p| p.coords.as_ref().map(Vec::len))
        .collect();
    if let Some(&d) = dims.first() {
        if dims.len() != points.len() {
            return Err(Error::invalid(format!(
                "{what}: coordinates given for some points only"
            )));
        }
        if dims.iter().any(|&x| x != d) {
            return Err(Error::invalid(format!(
                "{what}: coordinate dimensions differ"
            )));
        }
    }
    Ok(())
}

impl Game {
    /// Builds a game from a loss matrix indexed `[outcome][action]`.
    pub fn new(
        name: impl Into<String>,
        outcomes: Vec<Point>,
        actions: Vec<Point>,
        loss: Vec<Vec<f64>>,
        norm: Option<EmbeddingNorm>,
    ) -> Result<Self> {
        if outcomes.is_empty() || actions.is_empty() {
            return Err(Error::invalid(
                "a game needs at least one outcome and one action",
            ));
        }
        if loss.len() != outcomes.len() || loss.iter().any(|row| row.len() != actions.len()) {
            return Err(Error::invalid(format!(
                "loss matrix must be {}x{}",
                outcomes.len(),
                actions.len()
            )));
        }
        check_dims(&outcomes, "outcomes")?;
        check_dims(&actions, "actions")?;
        let flat: Vec<f64> = loss.into_iter().flatten().collect();
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("loss entries must be finite"));
        }
        Ok(Game {
            name: name.into(),
            outcomes,
            actions,
            loss: flat,
            norm,
        })
    }

    /// Builds a game by evaluating `loss(z, f)` on every pair.
    pub fn from_fn(
        name: impl Into<String>,
        outcomes: Vec<Point>,
        actions: Vec<Point>,
        norm: Option<EmbeddingNorm>,
        loss: impl Fn(&Point, &Point) -> f64,
    ) -> Result<Self> {
        let matrix = outcomes
            .iter()
            .map(|z| actions.iter().map(|f| loss(z, f)).collect())
            .collect();
        Game::new(name, outcomes, actions, matrix, norm)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn outcomes(&self) -> &[Point] {
        &self.outcomes
    }

    pub fn actions(&self) -> &[Point] {
        &self.actions
    }

    pub fn embedding_norm(&self) -> Option<EmbeddingNorm> {
        self.norm
    }

    /// `ℓ(z, f)`, bounds-checked.
    pub fn loss_at(&self, z: usize, f: usize) -> Result<f64> {
        if z >= self.n_outcomes() {
            return Err(Error::Index {
                what: "outcome",
                index: z,
                len: self.n_outcomes(),
            });
        }
        if f >= self.n_actions() {
            return Err(Error::Index {
                what: "action",
                index: f,
                len: self.n_actions(),
            });
        }
        Ok(self.loss(z, f))
    }

    #[inline]
    pub fn loss(&self, z: usize, f: usize) -> f64 {
        self.loss[z * self.actions.len() + f]
    }

    /// Losses of every action against outcome `z`.
    #[inline]
    pub fn loss_row(&self, z: usize) -> &[f64] {
        let n = self.actions.len();
        &self.loss[z * n..(z + 1) * n]
    }

    /// The loss vector `ℓ(·, f)` over outcomes.
    pub fn loss_vector(&self, f: usize) -> Vec<f64> {
        (0..self.n_outcomes()).map(|z| self.loss(z, f)).collect()
    }

    /// `E_p ℓ(Z, f)` for every action.
    pub fn expected_losses(&self, p: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_actions()];
        for (z, &pz) in p.iter().enumerate() {
            if pz == 0.0 {
                continue;
            }
            for (a, &l) in acc.iter_mut().zip(self.loss_row(z)) {
                *a += pz * l;
            }
        }
        acc
    }

    /// Φ(p) without the argmin set.
    pub fn phi_value(&self, p: &[f64]) -> f64 {
        self.expected_losses(p)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Φ(p) = min_f Σ_z p[z]·L[z][f] and the actions within `tie_tol` of it.
    pub fn phi(&self, p: &SimplexDist, tie_tol: f64) -> PhiResult {
        self.phi_weights(p.weights(), tie_tol)
    }

    pub(crate) fn phi_weights(&self, p: &[f64], tie_tol: f64) -> PhiResult {
        let expected = self.expected_losses(p);
        let value = expected.iter().copied().fold(f64::INFINITY, f64::min);
        let argmin_indices = expected
            .iter()
            .enumerate()
            .filter(|(_, &e)| e <= value + tie_tol)
            .map(|(i, _)| i)
            .collect();
        PhiResult {
            value,
            argmin_indices,
        }
    }

    /// Action selected as the subgradient representative at `p`: the lowest
    /// index among the minimizers within [`DEFAULT_TIE_TOL`].
    pub fn selected_action(&self, p: &[f64]) -> usize {
        self.phi_weights(p, DEFAULT_TIE_TOL).selected()
    }

    /// Support function of `-ℓ(F)`: `max_f ⟨-ℓ(·,f), x⟩`.
    pub fn support_function(&self, direction: &[f64]) -> Result<f64> {
        if direction.len() != self.n_outcomes() {
            return Err(Error::invalid(format!(
                "direction has dimension {}, game has {} outcomes",
                direction.len(),
                self.n_outcomes()
            )));
        }
        Ok(-self.phi_value(direction))
    }

    /// Loss vectors of the minimizers at `p`; the subdifferential of Φ.
    pub fn subdifferential(&self, p: &SimplexDist, tie_tol: f64) -> Vec<Vec<f64>> {
        self.phi(p, tie_tol)
            .argmin_indices
            .into_iter()
            .map(|f| self.loss_vector(f))
            .collect()
    }

    /// Empirical distribution of a nonempty history.
    pub fn empirical_distribution(&self, history: &[usize]) -> Result<SimplexDist> {
        if history.is_empty() {
            return Err(Error::invalid("empirical distribution of an empty history"));
        }
        let mut counts = vec![0usize; self.n_outcomes()];
        for &z in history {
            if z >= self.n_outcomes() {
                return Err(Error::Index {
                    what: "outcome",
                    index: z,
                    len: self.n_outcomes(),
                });
            }
            counts[z] += 1;
        }
        let n = history.len() as f64;
        Ok(SimplexDist(
            counts.into_iter().map(|c| c as f64 / n).collect(),
        ))
    }

    /// The point set `-ℓ(F) ⊂ R^{|Z|}`.
    pub fn negated_loss_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.n_actions())
            .map(|f| self.loss_vector(f).into_iter().map(|x| -x).collect())
            .collect()
    }

    /// Same outcomes, only the listed actions (in the given order).
    pub fn restrict_actions(&self, keep: &[usize]) -> Result<Game> {
        if let Some(&f) = keep.iter().find(|&&f| f >= self.n_actions()) {
            return Err(Error::Index {
                what: "action",
                index: f,
                len: self.n_actions(),
            });
        }
        let actions = keep.iter().map(|&f| self.actions[f].clone()).collect();
        let loss = (0..self.n_outcomes())
            .map(|z| keep.iter().map(|&f| self.loss(z, f)).collect())
            .collect();
        Game::new(
            format!("{}[restricted]", self.name),
            self.outcomes.clone(),
            actions,
            loss,
            self.norm,
        )
    }

    pub fn max_abs_loss(&self) -> f64 {
        self.loss.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `max_{s ∈ S} ⟨s, x⟩` for a finite point set.
pub fn support_of_points(points: &[Vec<f64>], x: &[f64]) -> f64 {
    points
        .iter()
        .map(|s| dot(s, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{experts_simple_game, quadratic_game};

    fn quad() -> Game {
        quadratic_game(257, None).unwrap()
    }

    #[test]
    fn loss_lookup() {
        let q = quad();
        let plus = q.n_outcomes() - 1;
        let one = q.n_actions() - 1;
        assert_eq!(q.loss_at(plus, one).unwrap(), 0.0);
        let e = experts_simple_game(3).unwrap();
        assert_eq!(e.loss_at(0, 0).unwrap(), 1.0);
        assert_eq!(e.loss_at(0, 1).unwrap(), 0.0);
        assert!(matches!(e.loss_at(3, 0), Err(Error::Index { .. })));
        assert!(matches!(e.loss_at(0, 3), Err(Error::Index { .. })));
    }

    #[test]
    fn empirical_distribution_counts() {
        let g = experts_simple_game(2).unwrap();
        let u = g.empirical_distribution(&[0, 0, 1]).unwrap();
        assert!((u[0] - 2.0 / 3.0).abs() < 1e-15 && (u[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            g.empirical_distribution(&[0]).unwrap().weights(),
            &[1.0, 0.0]
        );
        assert_eq!(
            g.empirical_distribution(&[0, 1, 0, 1]).unwrap().weights(),
            &[0.5, 0.5]
        );
        assert!(matches!(
            g.empirical_distribution(&[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn phi_examples() {
        let e = experts_simple_game(3).unwrap();
        let r = e.phi(
            &SimplexDist::new(vec![0.2, 0.3, 0.5]).unwrap(),
            DEFAULT_TIE_TOL,
        );
        assert!((r.value - 0.2).abs() < 1e-15);
        assert_eq!(r.argmin_indices, vec![0]);

        let q = quad();
        let r = q.phi(&SimplexDist::uniform(2), DEFAULT_TIE_TOL);
        assert!((r.value - 1.0).abs() < 1e-15);
        let f = &q.actions()[r.selected()];
        assert_eq!(f.coords.as_ref().unwrap()[0], 0.0);

        for z in 0..2 {
            let r = q.phi(&SimplexDist::point_mass(2, z), DEFAULT_TIE_TOL);
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn support_function_examples() {
        let e = experts_simple_game(3).unwrap();
        let p = [0.2, 0.3, 0.5];
        assert_eq!(e.support_function(&p).unwrap(), -e.phi_value(&p));
        assert_eq!(e.support_function(&[0.0; 3]).unwrap(), 0.0);
        let scaled: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
        let s = e.support_function(&scaled).unwrap();
        assert!((s - 2.0 * e.support_function(&p).unwrap()).abs() < 1e-15);
        assert!(matches!(
            e.support_function(&[1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn subdifferential_examples() {
        let e = experts_simple_game(2).unwrap();
        let apex = e.subdifferential(&SimplexDist::uniform(2), DEFAULT_TIE_TOL);
        assert_eq!(apex, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let side = e.subdifferential(&SimplexDist::new(vec![0.3, 0.7]).unwrap(), DEFAULT_TIE_TOL);
        assert_eq!(side, vec![vec![1.0, 0.0]]);
        let q = quad();
        for w in [0.1, 0.37, 0.5, 0.81] {
            let p = SimplexDist::new(vec![1.0 - w, w]).unwrap();
            assert_eq!(q.subdifferential(&p, 0.0).len(), 1, "p = {w}");
        }
    }

    #[test]
    fn invalid_games_are_rejected() {
        let pts = vec![Point::labelled("a")];
        assert!(Game::new("g", pts.clone(), pts.clone(), vec![vec![f64::NAN]], None).is_err());
        assert!(Game::new("g", vec![], pts.clone(), vec![], None).is_err());
        let mixed = vec![Point::at("a", vec![0.0]), Point::at("b", vec![0.0, 1.0])];
        assert!(Game::new("g", mixed, pts, vec![vec![0.0], vec![0.0]], None).is_err());
        assert!(SimplexDist::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexDist::new(vec![-0.1, 1.1]).is_err());
        assert!(MixedAction::new(vec![1.0]).is_ok());
        assert!(History::new(vec![0, 2], 2).is_err());
    }
}
