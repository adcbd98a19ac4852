//! Exact and estimated minimax regret for finite online convex optimization
//! games.
//!
//! The crate is organised bottom-up:
//!
//! - [`game`]: finite games, distributions, Φ and its support-function geometry
//! - [`games`]: built-in games and adversary strategies
//! - [`engine`]: stochastic regret of joint distributions, minimax values by
//!   backward induction, dual search and the i.i.d./product/joint hierarchy
//! - [`divergence`]: Bregman divergences of −Φ and the regret decomposition
//! - [`bounds`]: upper-bound certification and lower-bound estimators
//! - [`registry`]: name-addressable games, solvers, optimizers and strategies

pub mod bounds;
pub mod divergence;
pub mod engine;
pub mod error;
pub mod game;
pub mod games;
pub mod numerics;
pub mod registry;
pub mod rng;
pub mod strategy;

pub use error::{Error, Result};
pub use game::{
    EmbeddingNorm, Game, History, MixedAction, PhiResult, Point, SimplexDist, DEFAULT_TIE_TOL,
};
pub use strategy::{AdversaryStrategy, IidStrategy, ProductStrategy, StrategyKind};
