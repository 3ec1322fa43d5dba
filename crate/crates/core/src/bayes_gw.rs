//! The "Generals and the weather" game and its comparison with a Bayesian
//! (common prior) treatment of the same weather uncertainty.
//!
//! Player 0 defends, player 1 attacks; both choose Up or Down, and the state is
//! Calm or Storm. Utilities are winning chances, so the game is constant-sum.

use serde::Serialize;
use thiserror::Error;

use crate::game::{CompleteProfile, Game, Labels, MixedStrategy, SimplexPoint};

const R2: f64 = std::f64::consts::SQRT_2;

/// Symmetry residuals below this size would not rule out a common prior.
pub const SYMMETRY_WITNESS_MIN: f64 = 0.1;
/// Step of the common-prior grid used by [`gw_no_common_prior_check`].
pub const COMMON_PRIOR_GRID_STEP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("common prior {0} is outside [0, 1]")]
    PriorOutOfRange(f64),
}

/// Defender utilities, index `(a_defender, a_attacker, state)`.
const DEFENDER: [f64; 8] = [1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0];

pub fn gw_game() -> Game {
    let attacker = DEFENDER.iter().map(|u| 1.0 - u).collect();
    let labels = Labels {
        players: Some(vec!["Defender".into(), "Attacker".into()]),
        actions: Some(vec![
            vec!["Up".into(), "Down".into()],
            vec!["Up".into(), "Down".into()],
        ]),
        states: Some(vec!["Calm".into(), "Storm".into()]),
    };
    Game::with_labels(vec![2, 2], 2, vec![DEFENDER.to_vec(), attacker], Some(labels))
        .expect("GW game is well formed")
}

/// Closed-form extended equilibrium of the GW game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GwClosedForm {
    /// Defender's probability of Up.
    pub p: f64,
    /// Attacker's probability of Up.
    pub q: f64,
    /// Defender's prior on Calm.
    pub big_p: f64,
    /// Attacker's prior on Calm.
    pub big_q: f64,
    pub p_bar: f64,
    pub q_bar: f64,
    pub big_p_bar: f64,
    pub big_q_bar: f64,
    pub eu1: f64,
    pub eu2: f64,
    pub er1: f64,
    pub er2: f64,
}

impl GwClosedForm {
    pub fn new() -> Self {
        let p = 1.0 - 1.0 / R2;
        let q = 2.0 - R2;
        let big_p = 1.0 / R2;
        let big_q = R2 - 1.0;
        Self {
            p,
            q,
            big_p,
            big_q,
            p_bar: 1.0 / R2,
            q_bar: R2 - 1.0,
            big_p_bar: 1.0 - 1.0 / R2,
            big_q_bar: 2.0 - R2,
            eu1: 2.0 - R2,
            eu2: 1.0 - 1.0 / R2,
            er1: 3.0 / R2 - 2.0,
            er2: 3.0 - 2.0 * R2,
        }
    }

    /// `p`, `q`, `P`, `Q` in that order.
    pub fn parameters(&self) -> [f64; 4] {
        [self.p, self.q, self.big_p, self.big_q]
    }
}

impl Default for GwClosedForm {
    fn default() -> Self {
        Self::new()
    }
}

/// Reads `(p, q, P, Q)` off a GW profile.
pub fn gw_parameters(profile: &CompleteProfile) -> [f64; 4] {
    [
        profile.strategies[0][0],
        profile.strategies[1][0],
        profile.priors[0][0],
        profile.priors[1][0],
    ]
}

fn two_point(x: f64, x_bar: f64) -> SimplexPoint {
    SimplexPoint::new(vec![x, x_bar]).expect("closed-form weights lie on the simplex")
}

pub fn gw_exact_equilibrium() -> (CompleteProfile, GwClosedForm) {
    let c = GwClosedForm::new();
    let profile = CompleteProfile::new(
        vec![two_point(c.p, c.p_bar), two_point(c.q, c.q_bar)],
        vec![two_point(c.big_p, c.big_p_bar), two_point(c.big_q, c.big_q_bar)],
    );
    (profile, c)
}

fn check_prior(p_c: f64) -> Result<(), BayesError> {
    if (0.0..=1.0).contains(&p_c) {
        Ok(())
    } else {
        Err(BayesError::PriorOutOfRange(p_c))
    }
}

/// Bayesian equilibrium strategies when Calm has common prior probability `p_c`.
pub fn gw_bayes_equilibrium(p_c: f64) -> Result<(MixedStrategy, MixedStrategy), BayesError> {
    check_prior(p_c)?;
    let d = 1.0 + p_c;
    Ok((
        SimplexPoint::normalized(vec![p_c / d, 1.0 / d]),
        SimplexPoint::normalized(vec![1.0 / d, p_c / d]),
    ))
}

/// The GW game with the weather averaged out under the common prior `(p_c, 1 - p_c)`,
/// as a single-state game.
pub fn common_prior_game(p_c: f64) -> Result<Game, BayesError> {
    check_prior(p_c)?;
    let g = gw_game();
    let utilities = (0..2)
        .map(|i| {
            g.utilities(i)
                .chunks(2)
                .map(|u| p_c * u[0] + (1.0 - p_c) * u[1])
                .collect()
        })
        .collect();
    Ok(Game::new(vec![2, 2], 1, utilities).expect("averaged GW game is well formed"))
}

/// Expected utilities of both generals at the Bayesian equilibrium for `p_c`.
pub fn bayes_expected_utilities(p_c: f64) -> Result<(f64, f64), BayesError> {
    let game = common_prior_game(p_c)?;
    let (s1, s2) = gw_bayes_equilibrium(p_c)?;
    let profile = CompleteProfile::new(vec![s1, s2], vec![SimplexPoint::uniform(1); 2]);
    Ok((
        crate::expectation::expected_utility(&game, 0, &profile),
        crate::expectation::expected_utility(&game, 1, &profile),
    ))
}

/// Common prior under which the defender's Bayesian strategy plays Up with
/// probability `up`. `None` when no prior in `[0, 1]` does.
pub fn as_if_prior_defender(up: f64) -> Option<f64> {
    // up = P / (1 + P)
    if !(0.0..1.0).contains(&up) {
        return None;
    }
    let prior = up / (1.0 - up);
    (0.0..=1.0).contains(&prior).then_some(prior)
}

/// Common prior under which the attacker's Bayesian strategy plays Up with
/// probability `up`. `None` when no prior in `[0, 1]` does.
pub fn as_if_prior_attacker(up: f64) -> Option<f64> {
    // up = 1 / (1 + P)
    if up <= 0.0 {
        return None;
    }
    let prior = 1.0 / up - 1.0;
    (0.0..=1.0).contains(&prior).then_some(prior)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsIfPriors {
    pub defender: f64,
    pub attacker: f64,
}

/// "As if" common priors implied by each general's extended-equilibrium strategy.
pub fn gw_as_if_priors() -> AsIfPriors {
    let c = GwClosedForm::new();
    AsIfPriors {
        defender: as_if_prior_defender(c.p).expect("p is interior"),
        attacker: as_if_prior_attacker(c.q).expect("q is interior"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoCommonPrior {
    /// Whether no common prior reproduces the extended equilibrium strategies.
    pub holds: bool,
    /// `p - q_bar`; a Bayesian equilibrium always has this equal to zero.
    pub symmetry_residual: f64,
    /// Smallest L-infinity distance between Bayesian and extended strategies over the grid.
    pub min_distance: f64,
    /// Grid prior attaining `min_distance`.
    pub closest_prior: f64,
}

/// L-infinity distance between the Bayesian strategies for `p_c` and the
/// extended equilibrium strategies.
pub fn bayes_extended_distance(p_c: f64) -> Result<f64, BayesError> {
    let (s1, s2) = gw_bayes_equilibrium(p_c)?;
    let (star, _) = gw_exact_equilibrium();
    Ok(s1
        .weights()
        .iter()
        .chain(s2.weights())
        .zip(star.strategies[0].weights().iter().chain(star.strategies[1].weights()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

pub fn gw_no_common_prior_check() -> NoCommonPrior {
    let c = GwClosedForm::new();
    let symmetry_residual = c.p - c.q_bar;
    let steps = (1.0 / COMMON_PRIOR_GRID_STEP).round() as usize;
    let (min_distance, closest_prior) = (0..=steps)
        .map(|k| {
            let p_c = k as f64 / steps as f64;
            (bayes_extended_distance(p_c).expect("grid prior in range"), p_c)
        })
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best });
    NoCommonPrior {
        holds: symmetry_residual.abs() > SYMMETRY_WITNESS_MIN,
        symmetry_residual,
        min_distance,
        closest_prior,
    }
}

/// Side-by-side summary of the extended and Bayesian treatments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GwComparison {
    pub extended: GwClosedForm,
    pub extended_eu_sum: f64,
    pub as_if_priors: AsIfPriors,
    pub no_common_prior: NoCommonPrior,
    pub bayes: Vec<BayesRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesRow {
    pub p_c: f64,
    pub defender_up: f64,
    pub attacker_up: f64,
    pub eu1: f64,
    pub eu2: f64,
}

/// Comparison table with Bayesian rows at `p_c = 0, 0.1, ..., 1`.
pub fn gw_comparison() -> GwComparison {
    let extended = GwClosedForm::new();
    let bayes = (0..=10)
        .map(|k| {
            let p_c = k as f64 / 10.0;
            let (s1, s2) = gw_bayes_equilibrium(p_c).expect("in range");
            let (eu1, eu2) = bayes_expected_utilities(p_c).expect("in range");
            BayesRow {
                p_c,
                defender_up: s1[0],
                attacker_up: s2[0],
                eu1,
                eu2,
            }
        })
        .collect();
    GwComparison {
        extended_eu_sum: extended.eu1 + extended.eu2,
        extended,
        as_if_priors: gw_as_if_priors(),
        no_common_prior: gw_no_common_prior_check(),
        bayes,
    }
}
