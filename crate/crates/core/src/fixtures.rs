//! Reference games and random instance generators.

use rand::Rng;

use crate::game::{CompleteProfile, Game, Labels, SimplexPoint};

pub use crate::bayes_gw::gw_game;

/// One player, actions {U, D}, states {L, C, R}; the equilibrium prior puts zero
/// weight on C.
pub fn single_player_irregular() -> Game {
    let labels = Labels {
        players: Some(vec!["Player".into()]),
        actions: Some(vec![vec!["U".into(), "D".into()]]),
        states: Some(vec!["L".into(), "C".into(), "R".into()]),
    };
    Game::with_labels(
        vec![2],
        3,
        vec![vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]],
        Some(labels),
    )
    .expect("fixture is well formed")
}

/// The unique extended equilibrium of [`single_player_irregular`].
pub fn single_player_irregular_equilibrium() -> CompleteProfile {
    CompleteProfile::new(
        vec![SimplexPoint::uniform(2)],
        vec![SimplexPoint::new(vec![0.5, 0.0, 0.5]).expect("valid prior")],
    )
}

/// Matching pennies with two states that do not affect any payoff.
pub fn matching_pennies_dummy_theta() -> Game {
    // (a1, a2, state); player 0 wins on a match.
    let matcher = vec![1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0];
    let mismatcher = matcher.iter().map(|u: &f64| -u).collect();
    Game::new(vec![2, 2], 2, vec![matcher, mismatcher]).expect("fixture is well formed")
}

/// Every player receives `value` everywhere.
pub fn constant_game(action_counts: &[usize], states: usize, value: f64) -> Game {
    let size = action_counts.iter().product::<usize>() * states;
    Game::new(
        action_counts.to_vec(),
        states,
        vec![vec![value; size]; action_counts.len()],
    )
    .expect("constant game is well formed")
}

/// Utilities drawn uniformly from `[0, 1)`.
pub fn random_game<R: Rng + ?Sized>(rng: &mut R, action_counts: &[usize], states: usize) -> Game {
    let size = action_counts.iter().product::<usize>() * states;
    let utilities = (0..action_counts.len())
        .map(|_| (0..size).map(|_| rng.gen::<f64>()).collect())
        .collect();
    Game::new(action_counts.to_vec(), states, utilities).expect("random game is well formed")
}

/// A random game with `1..=max_players` players, `1..=max_actions` actions each and
/// `1..=max_states` states.
pub fn random_small_game<R: Rng + ?Sized>(
    rng: &mut R,
    max_players: usize,
    max_actions: usize,
    max_states: usize,
) -> Game {
    let n = rng.gen_range(1..=max_players);
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_actions)).collect();
    let states = rng.gen_range(1..=max_states);
    random_game(rng, &counts, states)
}

/// All shipped fixture games with their file stems.
pub fn fixture_games() -> Vec<(&'static str, Game)> {
    vec![
        ("gw", gw_game()),
        ("single_player_irregular", single_player_irregular()),
        ("matching_pennies_dummy_theta", matching_pennies_dummy_theta()),
    ]
}
