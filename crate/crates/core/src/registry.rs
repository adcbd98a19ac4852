//! Name-addressable games, matrix-game solvers, dual optimizers and
//! adversary strategies.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::dual::{CoordinateAscent, DualOptimizer, GridSearch};
use crate::engine::solver::{ExhaustiveSolver, LpSolver, MatrixGameSolver, MultiplicativeWeights};
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist};
use crate::games::ball::{ball_game, DEFAULT_POLYGON};
use crate::games::experts::{experts_general_game, experts_simple_game_with_resolution};
use crate::games::interval::{disjoint_interval_game, DisjointIntervalStrategy};
use crate::games::quadratic::{quadratic_game, ShrinkageAdversary, DEFAULT_GRID};
use crate::strategy::{AdversaryStrategy, IidStrategy};

/// Largest horizon for which the quadratic game's grid is augmented with
/// the reachable means.
pub const QUADRATIC_AUGMENT_MAX_T: usize = 64;

/// Default grid of the disjoint-interval game.
pub const DEFAULT_INTERVAL_GRID: usize = 64;

/// Parameters shared by the built-in builders; each builder reads the ones
/// it needs and falls back to its default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GameParams {
    pub n: Option<usize>,
    pub horizon: Option<usize>,
    pub d: Option<usize>,
    pub grid: Option<usize>,
}

pub type GameBuilder = dyn Fn(&GameParams) -> Result<Game> + Send + Sync;
pub type StrategyBuilder =
    dyn Fn(&Game, &GameParams) -> Result<Box<dyn AdversaryStrategy>> + Send + Sync;

/// Entries of one kind, kept in name order.
pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Arc<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: impl Into<String>, entry: Arc<T>) -> Result<()> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(Error::invalid(format!(
                "{} `{name}` is already registered",
                self.kind
            )));
        }
        self.entries.insert(name, entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "unknown {} `{name}` (known: {})",
                self.kind,
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}

fn horizon(params: &GameParams) -> Result<usize> {
    params
        .horizon
        .ok_or_else(|| Error::invalid("a horizon T is required"))
}

pub fn builtin_games() -> Registry<GameBuilder> {
    let mut r: Registry<GameBuilder> = Registry::new("game");
    let entries: Vec<(&str, Arc<GameBuilder>)> = vec![
        (
            "quadratic",
            Arc::new(|p: &GameParams| {
                let augment = p.horizon.filter(|&t| t <= QUADRATIC_AUGMENT_MAX_T);
                quadratic_game(p.grid.unwrap_or(DEFAULT_GRID), augment)
            }),
        ),
        (
            "experts-simple",
            Arc::new(|p: &GameParams| {
                experts_simple_game_with_resolution(p.n.unwrap_or(2), p.grid.unwrap_or(1))
            }),
        ),
        (
            "experts-general",
            Arc::new(|p: &GameParams| experts_general_game(p.n.unwrap_or(2))),
        ),
        (
            "ball",
            Arc::new(|p: &GameParams| {
                ball_game(p.d.unwrap_or(2), p.grid.unwrap_or(DEFAULT_POLYGON))
            }),
        ),
        (
            "disjoint-interval",
            Arc::new(|p: &GameParams| {
                disjoint_interval_game(p.grid.unwrap_or(DEFAULT_INTERVAL_GRID))
            }),
        ),
    ];
    for (name, b) in entries {
        r.register(name, b).expect("built-in names are distinct");
    }
    r
}

pub fn builtin_solvers() -> Registry<dyn MatrixGameSolver> {
    let mut r: Registry<dyn MatrixGameSolver> = Registry::new("solver");
    let entries: Vec<Arc<dyn MatrixGameSolver>> = vec![
        Arc::new(LpSolver),
        Arc::new(ExhaustiveSolver::default()),
        Arc::new(MultiplicativeWeights::default()),
    ];
    for s in entries {
        r.register(s.name().to_string(), s)
            .expect("built-in names are distinct");
    }
    r
}

pub fn builtin_optimizers() -> Registry<dyn DualOptimizer> {
    let mut r: Registry<dyn DualOptimizer> = Registry::new("optimizer");
    let entries: Vec<Arc<dyn DualOptimizer>> = vec![
        Arc::new(GridSearch::default()),
        Arc::new(CoordinateAscent::default()),
    ];
    for o in entries {
        r.register(o.name().to_string(), o)
            .expect("built-in names are distinct");
    }
    r
}

pub fn builtin_strategies() -> Registry<StrategyBuilder> {
    let mut r: Registry<StrategyBuilder> = Registry::new("strategy");
    let entries: Vec<(&str, Arc<StrategyBuilder>)> = vec![
        (
            "shrinkage",
            Arc::new(|g: &Game, p: &GameParams| {
                if g.n_outcomes() != 2 {
                    return Err(Error::invalid(
                        "the shrinkage adversary needs a two-outcome game",
                    ));
                }
                Ok(Box::new(ShrinkageAdversary::new(horizon(p)?)?) as Box<dyn AdversaryStrategy>)
            }),
        ),
        (
            "uniform-iid",
            Arc::new(|g: &Game, p: &GameParams| {
                let s = IidStrategy::new(SimplexDist::uniform(g.n_outcomes()), horizon(p)?)?;
                Ok(Box::new(s) as Box<dyn AdversaryStrategy>)
            }),
        ),
        (
            "disjoint-interval",
            Arc::new(|g: &Game, p: &GameParams| {
                let s = DisjointIntervalStrategy::new(horizon(p)?, g.n_outcomes())?;
                Ok(Box::new(s) as Box<dyn AdversaryStrategy>)
            }),
        ),
    ];
    for (name, b) in entries {
        r.register(name, b).expect("built-in names are distinct");
    }
    r
}

/// Strategy used when none is named: the shrinkage adversary for the
/// quadratic game, the interval strategy for its game, uniform i.i.d.
/// otherwise.
pub fn default_strategy(game_name: &str) -> &'static str {
    match game_name {
        "quadratic" => "shrinkage",
        "disjoint-interval" => "disjoint-interval",
        _ => "uniform-iid",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        let games = builtin_games();
        assert_eq!(
            games.names(),
            vec![
                "ball",
                "disjoint-interval",
                "experts-general",
                "experts-simple",
                "quadratic"
            ]
        );
        let g = games.get("experts-simple").unwrap()(&GameParams {
            n: Some(3),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(g.n_outcomes(), 3);
        assert!(matches!(games.get("nope"), Err(Error::InvalidArgument(_))));
        assert_eq!(builtin_solvers().names(), vec!["exhaustive", "lp", "mw"]);
        assert_eq!(
            builtin_optimizers().names(),
            vec!["coordinate-ascent", "grid"]
        );
        let params = GameParams {
            horizon: Some(3),
            ..Default::default()
        };
        let q = games.get("quadratic").unwrap()(&params).unwrap();
        let s = builtin_strategies().get("shrinkage").unwrap()(&q, &params).unwrap();
        assert_eq!(s.horizon(), 3);
    }

    #[test]
    fn duplicate_registration_fails() {
        let mut r: Registry<dyn MatrixGameSolver> = Registry::new("solver");
        r.register("lp", Arc::new(LpSolver)).unwrap();
        assert!(r.register("lp", Arc::new(LpSolver)).is_err());
    }
}
