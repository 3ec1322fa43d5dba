#![allow(dead_code)]

use exteq::expectation::effective_utility_table;
use exteq::fixtures::random_game;
use exteq::{Game, SimplexPoint};
use rand::Rng;

/// Whether, in a two-player game where both players have two actions, the state
/// changes `player`'s strict best response against every opponent mix. The
/// action-utility gap in each state is linear in the opponent's mix, so checking
/// the opponent's pure strategies is exact.
pub fn relevant_everywhere(game: &Game, player: usize) -> bool {
    assert_eq!(game.n_players(), 2);
    let opponent = 1 - player;
    let gaps: Vec<Vec<f64>> = (0..game.action_count(opponent))
        .map(|b| {
            let mut strategies = vec![SimplexPoint::uniform(2); 2];
            strategies[opponent] = SimplexPoint::vertex(game.action_count(opponent), b);
            let t = effective_utility_table(game, player, &strategies);
            (0..game.state_count()).map(|s| t.get(0, s) - t.get(1, s)).collect()
        })
        .collect();
    let sign = |s: usize| -> Option<bool> {
        if gaps.iter().all(|g| g[s] > 0.0) {
            Some(true)
        } else if gaps.iter().all(|g| g[s] < 0.0) {
            Some(false)
        } else {
            None
        }
    };
    matches!((sign(0), sign(1)), (Some(a), Some(b)) if a != b)
}

/// Random 2x2x2 game whose state matters to both players at every background.
pub fn relevant_game<R: Rng + ?Sized>(rng: &mut R) -> Game {
    loop {
        let g = random_game(rng, &[2, 2], 2);
        if relevant_everywhere(&g, 0) && relevant_everywhere(&g, 1) {
            return g;
        }
    }
}
