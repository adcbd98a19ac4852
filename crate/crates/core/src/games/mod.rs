//! Built-in games and adversary strategies.

pub mod ball;
pub mod experts;
pub mod interval;
pub mod quadratic;
pub mod random;

pub use ball::{
    ball_game, ball_iid_two_point, ball_orthogonal_strategy, ball_symmetric_iid_check,
    OrthogonalTrace,
};
pub use experts::{
    experts_general_game, experts_general_lb, experts_simple_game,
    experts_simple_game_with_resolution, experts_simple_regret, Evaluation,
};
pub use interval::{disjoint_interval_game, DisjointIntervalStrategy};
pub use quadratic::{
    c_sequence, q_invariant_sequence, quadratic_game, ShrinkageAdversary, ShrinkageSchedule,
};
pub use random::random_game;
