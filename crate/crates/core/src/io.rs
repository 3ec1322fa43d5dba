//! JSON game, profile and result files.
//!
//! Game file:
//!
//! ```json
//! {"players": 2, "actions": [2, 2], "states": 2,
//!  "utilities": [<player 0 tensor>, <player 1 tensor>],
//!  "labels": {"players": [..], "actions": [[..], [..]], "states": [..]}}
//! ```
//!
//! Each tensor is nested lists indexed `[a_1][a_2]...[a_N][state]`. Profile file:
//! `{"strategies": [[..], ..], "priors": [[..], ..]}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::equilibrium::EquilibriumReport;
use crate::game::{CompleteProfile, Game, GameError, Labels, SimplexError, SimplexPoint};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("simplex violation at `{field}`: {source}")]
    Simplex {
        field: String,
        source: SimplexError,
    },
    #[error("invalid game: {0}")]
    Game(#[from] GameError),
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

/// Deserializes with the failing field path attached to data errors.
fn parse_typed<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let result: Result<T, _> = serde_path_to_error::deserialize(&mut de);
    let value = result.map_err(|err| {
        let field = err.path().to_string();
        let inner = err.into_inner();
        if inner.is_data() {
            schema(field, inner.to_string())
        } else {
            IoError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        }
    })?;
    de.end().map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    players: usize,
    actions: Vec<usize>,
    states: usize,
    utilities: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Labels>,
}

/// Flattens one player's nested tensor, checking shape and entry types.
fn flatten_tensor(value: &Value, dims: &[usize], field: String, out: &mut Vec<f64>) -> Result<(), IoError> {
    match dims.split_first() {
        None => {
            let x = value
                .as_f64()
                .ok_or_else(|| schema(&field, format!("expected a number, found {value}")))?;
            out.push(x);
            Ok(())
        }
        Some((&len, rest)) => {
            let items = value
                .as_array()
                .ok_or_else(|| schema(&field, format!("expected an array of length {len}")))?;
            if items.len() != len {
                return Err(schema(
                    &field,
                    format!("expected {len} entries, found {}", items.len()),
                ));
            }
            for (k, item) in items.iter().enumerate() {
                flatten_tensor(item, rest, format!("{field}[{k}]"), out)?;
            }
            Ok(())
        }
    }
}

pub fn parse_game(text: &str) -> Result<Game, IoError> {
    let file: GameFile = parse_typed(text)?;
    if file.actions.len() != file.players {
        return Err(schema(
            "actions",
            format!("{} action counts for {} players", file.actions.len(), file.players),
        ));
    }
    if file.utilities.len() != file.players {
        return Err(schema(
            "utilities",
            format!("{} tensors for {} players", file.utilities.len(), file.players),
        ));
    }
    if let Some(k) = file.actions.iter().position(|&a| a == 0) {
        return Err(GameError::EmptyActionSet { player: k }.into());
    }
    if file.states == 0 {
        return Err(GameError::EmptyStateSet.into());
    }
    let mut dims = file.actions.clone();
    dims.push(file.states);
    let utilities = file
        .utilities
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut flat = Vec::new();
            flatten_tensor(v, &dims, format!("utilities[{i}]"), &mut flat).map(|_| flat)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Game::with_labels(file.actions, file.states, utilities, file.labels)?)
}

pub fn load_game(path: impl AsRef<Path>) -> Result<Game, IoError> {
    parse_game(&read(path.as_ref())?)
}

fn nest(flat: &[f64], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => Value::from(flat[0]),
        Some((&len, rest)) => {
            let chunk = flat.len() / len;
            Value::Array((0..len).map(|k| nest(&flat[k * chunk..(k + 1) * chunk], rest)).collect())
        }
    }
}

/// The game in file form.
pub fn game_to_json(game: &Game) -> Value {
    let mut dims = game.action_counts().to_vec();
    dims.push(game.state_count());
    let file = GameFile {
        players: game.n_players(),
        actions: game.action_counts().to_vec(),
        states: game.state_count(),
        utilities: (0..game.n_players())
            .map(|i| nest(game.utilities(i), &dims))
            .collect(),
        labels: game.labels().cloned(),
    };
    serde_json::to_value(file).expect("game serializes")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    strategies: Vec<Vec<f64>>,
    priors: Vec<Vec<f64>>,
}

fn simplex_list(raw: Vec<Vec<f64>>, name: &str) -> Result<Vec<SimplexPoint>, IoError> {
    raw.into_iter()
        .enumerate()
        .map(|(k, w)| {
            SimplexPoint::new(w).map_err(|source| IoError::Simplex {
                field: format!("{name}[{k}]"),
                source,
            })
        })
        .collect()
}

pub fn parse_profile(text: &str) -> Result<CompleteProfile, IoError> {
    let file: ProfileFile = parse_typed(text)?;
    Ok(CompleteProfile::new(
        simplex_list(file.strategies, "strategies")?,
        simplex_list(file.priors, "priors")?,
    ))
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<CompleteProfile, IoError> {
    parse_profile(&read(path.as_ref())?)
}

/// Hex SHA-256 of the input bytes.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Record of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub tool_version: String,
    pub command: String,
    pub game_digest: String,
    pub profiles: Vec<CompleteProfile>,
    pub reports: Vec<EquilibriumReport>,
    /// Free-form solver or scan metadata; `wall_time_seconds` is the only
    /// field that varies between identical runs.
    pub diagnostics: Value,
}

impl RunResult {
    pub fn new(command: &str, game_bytes: &[u8]) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            game_digest: digest(game_bytes),
            profiles: Vec::new(),
            reports: Vec::new(),
            diagnostics: Value::Object(Default::default()),
        }
    }

    pub fn push(&mut self, profile: CompleteProfile, report: EquilibriumReport) {
        self.profiles.push(profile);
        self.reports.push(report);
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

pub fn save_result(result: &RunResult, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let mut text = result.to_json_string();
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_result(path: impl AsRef<Path>) -> Result<RunResult, IoError> {
    parse_typed(&read(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const GW: &str = r#"{"players": 2, "actions": [2, 2], "states": 2,
        "utilities": [[[[1, 1], [0, 0]], [[0, 1], [1, 1]]],
                      [[[0, 0], [1, 1]], [[1, 0], [0, 0]]]]}"#;

    #[test]
    fn parses_gw() {
        let g = parse_game(GW).unwrap();
        let reference = fixtures::gw_game();
        for i in 0..2 {
            assert_eq!(g.utilities(i), reference.utilities(i));
        }
    }

    fn gw_with_tensor(tensor: &str) -> String {
        format!(
            r#"{{"players": 2, "actions": [2, 2], "states": 2,
            "utilities": [{tensor}, [[[0, 0], [1, 1]], [[1, 0], [0, 0]]]]}}"#
        )
    }

    #[test]
    fn string_entry_names_field() {
        let bad = gw_with_tensor(r#"[[[1, 1], ["x", 0]], [[0, 1], [1, 1]]]"#);
        match parse_game(&bad) {
            Err(IoError::Schema { field, .. }) => assert_eq!(field, "utilities[0][0][1][0]"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = gw_with_tensor(r#"["x", [[0, 1], [1, 1]]]"#);
        match parse_game(&bad) {
            Err(IoError::Schema { field, .. }) => assert_eq!(field, "utilities[0][0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn typed_field_errors_name_path() {
        let bad = GW.replace(r#""actions": [2, 2]"#, r#""actions": [2, "two"]"#);
        match parse_game(&bad) {
            Err(IoError::Schema { field, .. }) => assert_eq!(field, "actions[1]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_game("{\"players\": 2,"), Err(IoError::Parse { .. })));
    }

    #[test]
    fn shape_errors() {
        let bad = gw_with_tensor("[[[1, 1, 0], [0, 0]], [[0, 1], [1, 1]]]");
        match parse_game(&bad) {
            Err(IoError::Schema { field, .. }) => assert_eq!(field, "utilities[0][0][0]"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = GW.replace(r#""players": 2"#, r#""players": 3"#);
        assert!(matches!(parse_game(&bad), Err(IoError::Schema { .. })));
    }

    #[test]
    fn profile_parsing() {
        let p = parse_profile(r#"{"strategies": [[0.5, 0.5]], "priors": [[0.5, 0, 0.5]]}"#).unwrap();
        assert!(p.check_dimensions(&fixtures::single_player_irregular()).is_ok());
        match parse_profile(r#"{"strategies": [[0.5, 0.6]], "priors": [[1]]}"#) {
            Err(IoError::Simplex { field, .. }) => assert_eq!(field, "strategies[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn game_json_round_trip() {
        for (_, g) in fixtures::fixture_games() {
            let text = serde_json::to_string(&game_to_json(&g)).unwrap();
            assert_eq!(parse_game(&text).unwrap(), g);
        }
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
