//! Expected utilities and regrets.
//!
//! Every quantity is available through two independent routes:
//!
//! * the direct route sums over full action profiles (and states) weighted by
//!   product probabilities, with regret taken from [`personal_regret`];
//! * the table route first builds the per-player effective utility table
//!   (opponents marginalized out), derives the effective regret table from it and
//!   then weights rows by the player's own strategy and columns by their prior.
//!
//! The equilibrium machinery runs on the table route; the verifier and the tests
//! use the direct route as a cross-check.

use serde::Serialize;

use crate::game::{profile_probability, ActionProfiles, CompleteProfile, Game, MixedStrategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Utility,
    Regret,
}

/// A player's `|A_i| x |Theta|` table of expected utility or regret against a
/// fixed background of opponent strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveTable {
    pub player: usize,
    pub kind: TableKind,
    pub n_actions: usize,
    pub n_states: usize,
    /// Row-major `(action, state)`.
    pub values: Vec<f64>,
    #[serde(skip)]
    pub context: Vec<MixedStrategy>,
}

impl EffectiveTable {
    pub fn get(&self, action: usize, state: usize) -> f64 {
        self.values[action * self.n_states + state]
    }

    pub fn row(&self, action: usize) -> &[f64] {
        &self.values[action * self.n_states..(action + 1) * self.n_states]
    }

    pub fn column(&self, state: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_actions).map(move |a| self.get(a, state))
    }

    /// Rows as nested vectors, for display and serialization.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_actions).map(|a| self.row(a).to_vec()).collect()
    }

    /// `sum_a weights(a) * table(a, state)`.
    pub fn weighted_column(&self, weights: &[f64], state: usize) -> f64 {
        self.column(state).zip(weights).map(|(v, w)| v * w).sum()
    }

    /// `sum_state weights(state) * table(action, state)`.
    pub fn weighted_row(&self, action: usize, weights: &[f64]) -> f64 {
        self.row(action).iter().zip(weights).map(|(v, w)| v * w).sum()
    }
}

/// `EU_i(a_i; state | sigma)` for every `(a_i, state)`.
///
/// Only the opponents' strategies enter; player `i`'s own mixing is marginalized
/// away.
pub fn effective_utility_table(
    game: &Game,
    player: usize,
    strategies: &[MixedStrategy],
) -> EffectiveTable {
    let n_actions = game.action_count(player);
    let n_states = game.state_count();
    let stride = game.action_stride(player);
    let utilities = game.utilities(player);
    let mut values = vec![0.0; n_actions * n_states];

    let mut opponent_counts = game.action_counts().to_vec();
    opponent_counts[player] = 1;
    for b in ActionProfiles::new(opponent_counts) {
        let weight: f64 = b
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .map(|(j, &bj)| strategies[j][bj])
            .product();
        if weight == 0.0 {
            continue;
        }
        let base = game.profile_index(&b);
        for a in 0..n_actions {
            let off = (base + a * stride) * n_states;
            let row = &mut values[a * n_states..(a + 1) * n_states];
            for (v, u) in row.iter_mut().zip(&utilities[off..off + n_states]) {
                *v += weight * u;
            }
        }
    }

    EffectiveTable {
        player,
        kind: TableKind::Utility,
        n_actions,
        n_states,
        values,
        context: strategies.to_vec(),
    }
}

/// Converts an effective utility table into the effective regret table:
/// column maximum minus entry.
pub fn regret_from_utility(table: &EffectiveTable) -> EffectiveTable {
    let mut values = table.values.clone();
    for state in 0..table.n_states {
        let best = table.column(state).fold(f64::NEG_INFINITY, f64::max);
        for a in 0..table.n_actions {
            values[a * table.n_states + state] = best - table.get(a, state);
        }
    }
    EffectiveTable {
        kind: TableKind::Regret,
        values,
        ..table.clone()
    }
}

/// `ER_i(a_i; state | sigma)`; nonnegative with a zero in every column.
pub fn effective_regret_table(
    game: &Game,
    player: usize,
    strategies: &[MixedStrategy],
) -> EffectiveTable {
    regret_from_utility(&effective_utility_table(game, player, strategies))
}

fn substituted(actions: &[usize], player: usize, action: usize) -> Vec<usize> {
    let mut b = actions.to_vec();
    b[player] = action;
    b
}

/// `max_c sum_b U_i(b^[i<-c]; state) Pi(b | sigma)`, summed over full profiles.
fn best_response_value(game: &Game, player: usize, state: usize, strategies: &[MixedStrategy]) -> f64 {
    (0..game.action_count(player))
        .map(|c| {
            game.action_profiles()
                .map(|b| {
                    game.utility(player, &substituted(&b, player, c), state)
                        * profile_probability(&b, strategies)
                })
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Personal regret `R_i(a; state | sigma)`. Can be negative.
pub fn personal_regret(
    game: &Game,
    player: usize,
    actions: &[usize],
    state: usize,
    strategies: &[MixedStrategy],
) -> f64 {
    best_response_value(game, player, state, strategies) - game.utility(player, actions, state)
}

/// Harsh regret: average of the per-profile best response instead of the best
/// response to the average.
pub fn harsh_regret(
    game: &Game,
    player: usize,
    actions: &[usize],
    state: usize,
    strategies: &[MixedStrategy],
) -> f64 {
    let averaged_best: f64 = game
        .action_profiles()
        .map(|b| {
            let best = (0..game.action_count(player))
                .map(|c| game.utility(player, &substituted(&b, player, c), state))
                .fold(f64::NEG_INFINITY, f64::max);
            best * profile_probability(&b, strategies)
        })
        .sum();
    averaged_best - game.utility(player, actions, state)
}

/// `EU_i(sigma; pi)` by direct summation over profiles and states.
pub fn expected_utility(game: &Game, player: usize, profile: &CompleteProfile) -> f64 {
    let mut total = 0.0;
    for a in game.action_profiles() {
        for state in 0..game.state_count() {
            total += game.utility(player, &a, state) * profile.joint_probability(player, &a, state);
        }
    }
    total
}

/// `EU_i(a_i | sigma; pi)` by direct summation.
pub fn expected_utility_of_action(
    game: &Game,
    player: usize,
    action: usize,
    profile: &CompleteProfile,
) -> f64 {
    let mut total = 0.0;
    for b in game.action_profiles() {
        let deviated = substituted(&b, player, action);
        for state in 0..game.state_count() {
            total += game.utility(player, &deviated, state)
                * profile.joint_probability(player, &b, state);
        }
    }
    total
}

/// `ER_i(state | sigma) = sum_a R_i(a; state | sigma) Pi(a | sigma)`.
pub fn expected_regret_given_theta(
    game: &Game,
    player: usize,
    state: usize,
    strategies: &[MixedStrategy],
) -> f64 {
    let best = best_response_value(game, player, state, strategies);
    game.action_profiles()
        .map(|a| (best - game.utility(player, &a, state)) * profile_probability(&a, strategies))
        .sum()
}

/// `ER_i(sigma; pi)` by direct summation of personal regrets.
pub fn expected_regret(game: &Game, player: usize, profile: &CompleteProfile) -> f64 {
    let best: Vec<f64> = (0..game.state_count())
        .map(|s| best_response_value(game, player, s, &profile.strategies))
        .collect();
    let mut total = 0.0;
    for a in game.action_profiles() {
        for (state, &b) in best.iter().enumerate() {
            total += (b - game.utility(player, &a, state)) * profile.joint_probability(player, &a, state);
        }
    }
    total
}

/// All expected quantities of one player at one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerExpectations {
    pub player: usize,
    /// `EU_i(a_i | rho)` per action.
    pub eu_by_action: Vec<f64>,
    /// `EU_i(rho)`.
    pub eu: f64,
    /// `ER_i(state | rho)` per state.
    pub er_by_state: Vec<f64>,
    /// `ER_i(rho)`.
    pub er: f64,
}

impl PlayerExpectations {
    /// Table route: effective tables weighted by the player's own prior and strategy.
    pub fn from_tables(game: &Game, player: usize, profile: &CompleteProfile) -> Self {
        let utility = effective_utility_table(game, player, &profile.strategies);
        let regret = regret_from_utility(&utility);
        let sigma = profile.strategies[player].weights();
        let prior = profile.priors[player].weights();

        let eu_by_action: Vec<f64> = (0..utility.n_actions)
            .map(|a| utility.weighted_row(a, prior))
            .collect();
        let eu = eu_by_action.iter().zip(sigma).map(|(u, w)| u * w).sum();
        let er_by_state: Vec<f64> = (0..regret.n_states)
            .map(|s| regret.weighted_column(sigma, s))
            .collect();
        let er = er_by_state.iter().zip(prior).map(|(r, w)| r * w).sum();
        Self {
            player,
            eu_by_action,
            eu,
            er_by_state,
            er,
        }
    }

    /// Direct route: sums over full profiles with personal regrets.
    pub fn direct(game: &Game, player: usize, profile: &CompleteProfile) -> Self {
        let eu_by_action = (0..game.action_count(player))
            .map(|a| expected_utility_of_action(game, player, a, profile))
            .collect();
        let er_by_state = (0..game.state_count())
            .map(|s| expected_regret_given_theta(game, player, s, &profile.strategies))
            .collect();
        Self {
            player,
            eu_by_action,
            eu: expected_utility(game, player, profile),
            er_by_state,
            er: expected_regret(game, player, profile),
        }
    }
}
