//! Extended equilibrium conditions, the fixed-point map whose fixed points are
//! exactly the extended equilibria, and a merit function built from it.
//!
//! A complete profile is an extended equilibrium when, for every player,
//!
//! * no action has higher expected utility than the player's mixed strategy
//!   (`EU_i(rho) >= EU_i(a_i | rho)`), and
//! * no state has higher expected regret than the player's prior
//!   (`ER_i(rho) >= ER_i(state | rho)`).
//!
//! The verifier evaluates these inequalities through the direct summation route,
//! while [`upsilon`] and [`merit`] run on the effective tables. Agreement of the
//! two is one of the property tests.

use serde::{Deserialize, Serialize};

use crate::expectation::PlayerExpectations;
use crate::game::{CompleteProfile, Game, SimplexPoint};

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// One inequality of the equilibrium system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Inequality {
    /// `EU_i(rho) >= EU_i(action | rho)`.
    Action { player: usize, action: usize },
    /// `ER_i(rho) >= ER_i(state | rho)`.
    State { player: usize, state: usize },
}

impl std::fmt::Display for Inequality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Inequality::Action { player, action } => {
                write!(f, "EU_{player}(rho) >= EU_{player}(action {action} | rho)")
            }
            Inequality::State { player, state } => {
                write!(f, "ER_{player}(rho) >= ER_{player}(state {state} | rho)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// `EU_i(rho) - EU_i(a_i | rho)` per player and action.
    pub eu_slacks: Vec<Vec<f64>>,
    /// `ER_i(rho) - ER_i(state | rho)` per player and state.
    pub er_slacks: Vec<Vec<f64>>,
    /// Most negative slack, or 0 when none is negative.
    pub worst_violation: f64,
    /// The inequality attaining `worst_violation`, if any slack is negative.
    pub worst: Option<Inequality>,
    pub accepted: bool,
    pub tol: f64,
    pub eu_values: Vec<f64>,
    pub er_values: Vec<f64>,
}

impl EquilibriumReport {
    pub fn slack(&self, inequality: Inequality) -> f64 {
        match inequality {
            Inequality::Action { player, action } => self.eu_slacks[player][action],
            Inequality::State { player, state } => self.er_slacks[player][state],
        }
    }

    /// All slacks with their inequalities, actions first.
    pub fn slacks(&self) -> impl Iterator<Item = (Inequality, f64)> + '_ {
        let actions = self.eu_slacks.iter().enumerate().flat_map(|(player, row)| {
            row.iter()
                .enumerate()
                .map(move |(action, &s)| (Inequality::Action { player, action }, s))
        });
        let states = self.er_slacks.iter().enumerate().flat_map(|(player, row)| {
            row.iter()
                .enumerate()
                .map(move |(state, &s)| (Inequality::State { player, state }, s))
        });
        actions.chain(states)
    }
}

/// Evaluates every equilibrium inequality at `profile`.
///
/// Accepts iff the most negative slack is at least `-tol`.
pub fn verify_equilibrium(game: &Game, profile: &CompleteProfile, tol: f64) -> EquilibriumReport {
    let per_player: Vec<PlayerExpectations> = (0..game.n_players())
        .map(|i| PlayerExpectations::direct(game, i, profile))
        .collect();
    report_from(per_player, tol)
}

fn report_from(per_player: Vec<PlayerExpectations>, tol: f64) -> EquilibriumReport {
    let eu_slacks: Vec<Vec<f64>> = per_player
        .iter()
        .map(|e| e.eu_by_action.iter().map(|u| e.eu - u).collect())
        .collect();
    let er_slacks: Vec<Vec<f64>> = per_player
        .iter()
        .map(|e| e.er_by_state.iter().map(|r| e.er - r).collect())
        .collect();
    let mut report = EquilibriumReport {
        eu_slacks,
        er_slacks,
        worst_violation: 0.0,
        worst: None,
        accepted: true,
        tol,
        eu_values: per_player.iter().map(|e| e.eu).collect(),
        er_values: per_player.iter().map(|e| e.er).collect(),
    };
    let mut worst = (0.0, None);
    for (which, slack) in report.slacks() {
        if slack < worst.0 {
            worst = (slack, Some(which));
        }
    }
    report.worst_violation = worst.0;
    report.worst = worst.1;
    report.accepted = report.worst_violation >= -tol;
    report
}

/// Per-application quantities of the fixed-point map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationDiagnostics {
    /// `phi_{i,a} = relu(EU_i(a | rho) - EU_i(rho))`.
    pub phi: Vec<Vec<f64>>,
    /// `psi_{i,state} = relu(ER_i(state | rho) - ER_i(rho))`.
    pub psi: Vec<Vec<f64>>,
    /// `lambda_i = sum_a phi_{i,a}`.
    pub lambda: Vec<f64>,
    /// `mu_i = sum_state psi_{i,state}`.
    pub mu: Vec<f64>,
    /// Sum of squares of all `phi` and `psi`.
    pub merit: f64,
    pub step: usize,
}

fn gains(game: &Game, profile: &CompleteProfile) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    (0..game.n_players())
        .map(|i| {
            let e = PlayerExpectations::from_tables(game, i, profile);
            let phi = e.eu_by_action.iter().map(|u| relu(u - e.eu)).collect();
            let psi = e.er_by_state.iter().map(|r| relu(r - e.er)).collect();
            (phi, psi)
        })
        .unzip()
}

fn sum_squares(rows: &[Vec<f64>]) -> f64 {
    rows.iter().flatten().map(|x| x * x).sum()
}

fn boost(point: &SimplexPoint, gain: &[f64]) -> SimplexPoint {
    let total: f64 = gain.iter().sum();
    let raw = point
        .weights()
        .iter()
        .zip(gain)
        .map(|(w, g)| (w + g) / (1.0 + total))
        .collect();
    SimplexPoint::normalized(raw)
}

/// One application of the map: every action (state) whose expected utility
/// (regret) beats the current mix gets its surplus added, then each component is
/// renormalized.
pub fn upsilon(game: &Game, profile: &CompleteProfile) -> (CompleteProfile, IterationDiagnostics) {
    let (phi, psi) = gains(game, profile);
    let strategies = profile
        .strategies
        .iter()
        .zip(&phi)
        .map(|(s, g)| boost(s, g))
        .collect();
    let priors = profile
        .priors
        .iter()
        .zip(&psi)
        .map(|(p, g)| boost(p, g))
        .collect();
    let diag = IterationDiagnostics {
        lambda: phi.iter().map(|g| g.iter().sum()).collect(),
        mu: psi.iter().map(|g| g.iter().sum()).collect(),
        merit: sum_squares(&phi) + sum_squares(&psi),
        phi,
        psi,
        step: 0,
    };
    (CompleteProfile::new(strategies, priors), diag)
}

/// Sum of squared positive parts of all equilibrium-inequality violations.
/// Zero exactly at extended equilibria.
pub fn merit(game: &Game, profile: &CompleteProfile) -> f64 {
    let (phi, psi) = gains(game, profile);
    sum_squares(&phi) + sum_squares(&psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_gw::gw_exact_equilibrium;
    use crate::fixtures;

    #[test]
    fn relu_values() {
        assert_eq!(relu(-1.0), 0.0);
        assert_eq!(relu(0.0), 0.0);
        assert_eq!(relu(2.5), 2.5);
    }

    #[test]
    fn gw_equilibrium_is_fixed() {
        let g = fixtures::gw_game();
        let (rho, _) = gw_exact_equilibrium();
        let (next, diag) = upsilon(&g, &rho);
        assert!(next.linf_distance(&rho) < 1e-15);
        assert!(diag.lambda.iter().chain(&diag.mu).all(|&x| x < 1e-15));
        assert!(merit(&g, &rho) <= 1e-18);
    }

    #[test]
    fn gw_uniform_step() {
        // Frozen from an exact rational evaluation of the map on the uniform profile.
        let g = fixtures::gw_game();
        let rho = CompleteProfile::uniform(&g);
        let (next, diag) = upsilon(&g, &rho);
        for s in next.strategies.iter().chain(&next.priors) {
            assert!((s[0] - 4.0 / 9.0).abs() < 1e-15);
            assert!((s[1] - 5.0 / 9.0).abs() < 1e-15);
        }
        assert_eq!(diag.phi, vec![vec![0.0, 0.125], vec![0.0, 0.125]]);
        assert_eq!(diag.psi, vec![vec![0.0, 0.125], vec![0.0, 0.125]]);
        assert_eq!(diag.lambda, vec![0.125, 0.125]);
        assert_eq!(merit(&g, &rho), 1.0 / 16.0);
    }

    #[test]
    fn constant_game_has_zero_merit() {
        let g = fixtures::constant_game(&[2, 3], 2, 0.7);
        let mut rng = rand::thread_rng();
        for _ in 0..10 {
            let rho = CompleteProfile::random(&mut rng, &g);
            assert!(merit(&g, &rho) < 1e-28);
            let (next, _) = upsilon(&g, &rho);
            assert!(next.linf_distance(&rho) < 1e-15);
        }
    }

    #[test]
    fn verifier_on_gw() {
        let g = fixtures::gw_game();
        let (rho, _) = gw_exact_equilibrium();
        let report = verify_equilibrium(&g, &rho, 1e-12);
        assert!(report.accepted);
        assert!(report.slacks().all(|(_, s)| s.abs() <= 1e-12));
        assert_eq!(report.eu_slacks.iter().flatten().count(), 4);
        assert_eq!(report.er_slacks.iter().flatten().count(), 4);
    }

    #[test]
    fn verifier_rejects_perturbed_gw() {
        let g = fixtures::gw_game();
        let (mut rho, c) = gw_exact_equilibrium();
        rho.strategies[0] = SimplexPoint::new(vec![c.p + 0.1, c.p_bar - 0.1]).unwrap();
        let report = verify_equilibrium(&g, &rho, 1e-9);
        assert!(!report.accepted);
        // Attacker now strictly prefers Down: slack = -0.2 (sqrt 2 - 1).
        assert_eq!(report.worst, Some(Inequality::Action { player: 1, action: 1 }));
        let expected = -0.2 * (std::f64::consts::SQRT_2 - 1.0);
        assert!((report.worst_violation - expected).abs() < 1e-12);
    }

    #[test]
    fn verifier_on_irregular_example() {
        let g = fixtures::single_player_irregular();
        let rho = fixtures::single_player_irregular_equilibrium();
        let report = verify_equilibrium(&g, &rho, 1e-12);
        assert!(report.accepted);
        assert_eq!(report.worst, None);
    }
}
