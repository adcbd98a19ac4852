//! Game specification files (TOML): either an explicit loss matrix or a
//! built-in game with parameters.
//!
//! ```toml
//! outcomes = ["heads", { label = "tails", coords = [1.0] }]
//! actions = ["a", "b"]
//! loss = [[0.0, 1.0], [1.0, 0.0]]   # loss[outcome][action]
//! embedding_norm = "euclidean"      # optional
//! ```
//!
//! ```toml
//! builtin = "experts-simple"
//! [params]
//! N = 3
//! ```

use std::path::Path;

use serde::Deserialize;

use regretlab::game::Point;
use regretlab::registry::GameParams;
use regretlab::{EmbeddingNorm, Game};

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointSpec {
    Label(String),
    Full(Point),
}

impl From<PointSpec> for Point {
    fn from(p: PointSpec) -> Self {
        match p {
            PointSpec::Label(l) => Point::labelled(l),
            PointSpec::Full(p) => p,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSpec {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "T")]
    horizon: Option<usize>,
    d: Option<usize>,
    grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    name: Option<String>,
    outcomes: Option<Vec<PointSpec>>,
    actions: Option<Vec<PointSpec>>,
    loss: Option<Vec<Vec<f64>>>,
    embedding_norm: Option<EmbeddingNorm>,
    builtin: Option<String>,
    params: Option<ParamsSpec>,
}

/// What a specification file describes.
#[derive(Debug)]
pub enum GameSpec {
    Explicit(Game),
    Builtin { name: String, params: GameParams },
}

pub fn parse_spec(text: &str) -> CliResult<GameSpec> {
    let spec: FileSpec =
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("game file: {e}")))?;
    let explicit = spec.outcomes.is_some() || spec.actions.is_some() || spec.loss.is_some();
    match (spec.builtin, explicit) {
        (Some(_), true) => Err(CliError::Invalid(
            "game file: give either `builtin` or `outcomes`/`actions`/`loss`, not both".into(),
        )),
        (Some(name), false) => {
            if spec.embedding_norm.is_some() || spec.name.is_some() {
                return Err(CliError::Invalid(
                    "game file: `name` and `embedding_norm` do not apply to built-in games".into(),
                ));
            }
            let p = spec.params.unwrap_or_default();
            Ok(GameSpec::Builtin {
                name,
                params: GameParams {
                    n: p.n,
                    horizon: p.horizon,
                    d: p.d,
                    grid: p.grid,
                },
            })
        }
        (None, _) => {
            if spec.params.is_some() {
                return Err(CliError::Invalid(
                    "game file: `params` needs `builtin`".into(),
                ));
            }
            let missing = |f: &str| CliError::Invalid(format!("game file: missing `{f}`"));
            let outcomes = spec.outcomes.ok_or_else(|| missing("outcomes"))?;
            let actions = spec.actions.ok_or_else(|| missing("actions"))?;
            let loss = spec.loss.ok_or_else(|| missing("loss"))?;
            let game = Game::new(
                spec.name.unwrap_or_else(|| "custom".into()),
                outcomes.into_iter().map(Point::from).collect(),
                actions.into_iter().map(Point::from).collect(),
                loss,
                spec.embedding_norm,
            )?;
            Ok(GameSpec::Explicit(game))
        }
    }
}

pub fn load_spec(path: &Path) -> CliResult<GameSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_game() {
        let spec = parse_spec(
            r#"
            outcomes = ["h", { label = "t", coords = [1.0] }]
            actions = ["a", "b"]
            loss = [[0.0, 1.0], [1.0, 0.0]]
            "#,
        );
        // Coordinates on some outcomes only are rejected by the game.
        assert!(matches!(spec, Err(CliError::Invalid(_))));
        let spec = parse_spec(
            r#"
            name = "coin"
            outcomes = ["h", "t"]
            actions = [{ label = "a", coords = [0.0] }, { label = "b", coords = [1.0] }]
            loss = [[0.0, 1.0], [1.0, 0.0]]
            embedding_norm = "abs-1d"
            "#,
        )
        .unwrap();
        match spec {
            GameSpec::Explicit(g) => {
                assert_eq!(g.name(), "coin");
                assert_eq!(g.loss(1, 0), 1.0);
                assert_eq!(g.embedding_norm(), Some(EmbeddingNorm::Abs1d));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn builtin_game() {
        let spec = parse_spec("builtin = \"ball\"\n[params]\nd = 3\nT = 2\n").unwrap();
        match spec {
            GameSpec::Builtin { name, params } => {
                assert_eq!(name, "ball");
                assert_eq!(params.d, Some(3));
                assert_eq!(params.horizon, Some(2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_files() {
        for text in [
            "builtin = \"ball\"\nloss = [[1.0]]",
            "outcomes = [\"a\"]\nactions = [\"b\"]",
            "[params]\nN = 2",
            "builtin = \"ball\"\n[params]\nM = 2",
            "outcomes = [\"a\"]\nactions = [\"b\"]\nloss = [[1.0]]\nembedding_norm = \"l7\"",
            "not toml at all",
        ] {
            assert!(
                matches!(parse_spec(text), Err(CliError::Invalid(_))),
                "{text}"
            );
        }
    }
}
