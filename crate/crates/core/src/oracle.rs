//! Independent checks on solver output: an exhaustive grid scan over rational
//! profiles, and the analyzer for degenerate (pure) equilibrium priors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equilibrium::verify_equilibrium;
use crate::expectation::effective_utility_table;
use crate::game::{CompleteProfile, Game, SimplexPoint};

/// Largest number of grid profiles a scan will evaluate unless told otherwise.
pub const DEFAULT_SCAN_BUDGET: u128 = 10_000_000;
/// Seed of the random priors used as degeneracy probes.
pub const PROBE_SEED: u64 = 0x5eed_f417;
pub const RANDOM_PROBES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid needs {required} profiles, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("grid resolution must be positive")]
    ZeroResolution,
    #[error("profile is not an extended equilibrium at tolerance {tol} (worst violation {worst})")]
    NotAnEquilibrium { tol: f64, worst: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridHit {
    pub profile: CompleteProfile,
    pub worst_violation: f64,
}

/// All compositions of `m` into `parts` nonnegative parts, lexicographic.
fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in 0..=m {
        for mut rest in compositions(m - first, parts - 1) {
            let mut c = Vec::with_capacity(parts);
            c.push(first);
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

fn block_sizes(game: &Game) -> Vec<usize> {
    game.action_counts()
        .iter()
        .copied()
        .chain(std::iter::repeat_n(game.state_count(), game.n_players()))
        .collect()
}

/// Number of grid profiles at resolution `m`.
pub fn grid_size(game: &Game, m: usize) -> u128 {
    block_sizes(game)
        .iter()
        .map(|&k| binomial((m + k - 1) as u128, (k - 1) as u128))
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX)
}

/// Default hit tolerance `2 L / m`, where `L` is the utility range times the
/// total number of actions.
pub fn default_scan_tol(game: &Game, m: usize) -> f64 {
    let actions: usize = game.action_counts().iter().sum();
    2.0 * game.utility_range() * actions as f64 / m as f64
}

pub fn grid_scan(game: &Game, resolution: usize, tol: f64) -> Result<Vec<GridHit>, OracleError> {
    grid_scan_with_budget(game, resolution, tol, DEFAULT_SCAN_BUDGET)
}

/// Evaluates every profile whose coordinates are multiples of `1 / resolution`
/// and keeps those whose worst violation is at least `-tol`. Hits come back in
/// lexicographic grid order.
pub fn grid_scan_with_budget(
    game: &Game,
    resolution: usize,
    tol: f64,
    budget: u128,
) -> Result<Vec<GridHit>, OracleError> {
    if resolution == 0 {
        return Err(OracleError::ZeroResolution);
    }
    let required = grid_size(game, resolution);
    if required > budget {
        return Err(OracleError::BudgetExceeded { required, budget });
    }
    let m = resolution as f64;
    let sizes = block_sizes(game);
    let tables: Vec<Vec<SimplexPoint>> = sizes
        .iter()
        .map(|&k| {
            compositions(resolution, k)
                .into_iter()
                .map(|c| SimplexPoint::from_raw(c.into_iter().map(|x| x as f64 / m).collect()))
                .collect()
        })
        .collect();
    let n = game.n_players();

    let hits = (0..required as u64)
        .into_par_iter()
        .filter_map(|index| {
            // Mixed radix, last block fastest.
            let mut rest = index as usize;
            let mut picks = vec![0; tables.len()];
            for (b, table) in tables.iter().enumerate().rev() {
                picks[b] = rest % table.len();
                rest /= table.len();
            }
            let mut points = picks.iter().zip(&tables).map(|(&k, t)| t[k].clone());
            let strategies = points.by_ref().take(n).collect();
            let priors = points.collect();
            let profile = CompleteProfile::new(strategies, priors);
            let report = verify_equilibrium(game, &profile, tol);
            report.accepted.then_some(GridHit {
                profile,
                worst_violation: report.worst_violation,
            })
        })
        .collect();
    Ok(hits)
}

/// The hits with the largest worst violation (ties kept, in grid order).
pub fn best_hits(hits: &[GridHit]) -> Vec<&GridHit> {
    let best = hits
        .iter()
        .map(|h| h.worst_violation)
        .fold(f64::NEG_INFINITY, f64::max);
    hits.iter().filter(|h| h.worst_violation == best).collect()
}

/// Pure-prior analysis of one player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerFaith {
    pub player: usize,
    /// State carrying at least `1 - tol` of the prior, if any.
    pub pure_state: Option<usize>,
    /// Every supported action has effective regret at most `tol` in every state.
    /// `None` when the prior is not pure.
    pub irrelevance_verified: Option<bool>,
    /// Every probe prior substituted for this player's prior keeps the profile
    /// certified. `None` when the prior is not pure.
    pub degeneracy_verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaithReport {
    pub pure_prior_players: Vec<usize>,
    pub players: Vec<PlayerFaith>,
}

/// Vertices, barycenter and seeded random points of the state simplex.
pub fn probe_priors(states: usize) -> Vec<SimplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..states)
        .map(|s| SimplexPoint::vertex(states, s))
        .chain(std::iter::once(SimplexPoint::uniform(states)))
        .chain((0..RANDOM_PROBES).map(|_| SimplexPoint::random(&mut rng, states)))
        .collect()
}

/// Checks an equilibrium for pure priors. A pure prior should only appear when
/// the parameter is irrelevant to its holder, and then any prior can replace it.
pub fn no_fictional_faith_check(
    game: &Game,
    equilibrium: &CompleteProfile,
    tol: f64,
) -> Result<FaithReport, OracleError> {
    let base = verify_equilibrium(game, equilibrium, tol);
    if !base.accepted {
        return Err(OracleError::NotAnEquilibrium {
            tol,
            worst: base.worst_violation,
        });
    }
    let probes = probe_priors(game.state_count());
    let players: Vec<PlayerFaith> = (0..game.n_players())
        .map(|i| {
            let pure_state = equilibrium.priors[i]
                .weights()
                .iter()
                .position(|&w| w >= 1.0 - tol);
            if pure_state.is_none() {
                return PlayerFaith {
                    player: i,
                    pure_state,
                    irrelevance_verified: None,
                    degeneracy_verified: None,
                };
            }
            let regret = crate::expectation::regret_from_utility(&effective_utility_table(
                game,
                i,
                &equilibrium.strategies,
            ));
            let irrelevant = equilibrium.strategies[i]
                .support()
                .all(|a| regret.row(a).iter().all(|&r| r <= tol));
            let degenerate = probes.iter().all(|p| {
                verify_equilibrium(game, &equilibrium.with_prior(i, p.clone()), tol).accepted
            });
            PlayerFaith {
                player: i,
                pure_state,
                irrelevance_verified: Some(irrelevant),
                degeneracy_verified: Some(degenerate),
            }
        })
        .collect();
    Ok(FaithReport {
        pure_prior_players: players
            .iter()
            .filter(|p| p.pure_state.is_some())
            .map(|p| p.player)
            .collect(),
        players,
    })
}

/// Whether the state changes `player`'s pure best response for at least one of
/// `samples` random opponent backgrounds, i.e. no action is a best response in
/// every state.
pub fn parameter_relevant<R: Rng + ?Sized>(
    game: &Game,
    player: usize,
    samples: usize,
    rng: &mut R,
) -> bool {
    (0..samples).any(|_| {
        let background = CompleteProfile::random(rng, game).strategies;
        let table = effective_utility_table(game, player, &background);
        let best: Vec<f64> = (0..table.n_states)
            .map(|s| table.column(s).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        !(0..table.n_actions).any(|a| {
            table
                .row(a)
                .iter()
                .zip(&best)
                .all(|(u, b)| *u >= b - 1e-12)
        })
    })
}
