//! Game and profile data model.
//!
//! A [`Game`] is a finite normal-form game whose payoffs additionally depend on a
//! parameter drawn from a finite state set that no player has a prior over. Each
//! player's utility tensor is stored row-major with index order
//! `(a_1, ..., a_N, state)`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Entries are accepted when the weights sum to one within this tolerance.
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// Entries down to this negative value are clamped to zero on ingestion.
pub const SIMPLEX_NEG_TOL: f64 = 1e-12;
/// Rounding slack under which a nonnegative vector already counts as on the simplex.
const ON_SIMPLEX_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("game must have at least one player")]
    NoPlayers,
    #[error("player {player} has an empty action set")]
    EmptyActionSet { player: usize },
    #[error("the state set is empty")]
    EmptyStateSet,
    #[error("expected utilities for {expected} players, got {got}")]
    PlayerCountMismatch { expected: usize, got: usize },
    #[error("utility tensor of player {player} has {got} entries, expected {expected}")]
    DimensionMismatch {
        player: usize,
        expected: usize,
        got: usize,
    },
    #[error("utility of player {player} at flat index {index} is not finite")]
    NonFinite { player: usize, index: usize },
    #[error("label set `{field}` has {got} entries, expected {expected}")]
    LabelMismatch {
        field: String,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimplexError {
    #[error("empty weight vector")]
    Empty,
    #[error("weight {index} is not finite")]
    NonFinite { index: usize },
    #[error("weight {index} = {value} is negative")]
    Negative { index: usize, value: f64 },
    #[error("weights sum to {sum}, not 1")]
    BadSum { sum: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("profile has {got} strategies, game has {expected} players")]
    StrategyCount { expected: usize, got: usize },
    #[error("profile has {got} priors, game has {expected} players")]
    PriorCount { expected: usize, got: usize },
    #[error("strategy of player {player} has {got} weights, expected {expected}")]
    StrategyLength {
        player: usize,
        expected: usize,
        got: usize,
    },
    #[error("prior of player {player} has {got} weights, expected {expected}")]
    PriorLength {
        player: usize,
        expected: usize,
        got: usize,
    },
}

/// Optional display names. Computation never looks at these.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
}

/// A finite game with a globally uncertain parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    action_counts: Vec<usize>,
    state_count: usize,
    utilities: Vec<Vec<f64>>,
    labels: Option<Labels>,
}

impl Game {
    /// Builds and validates a game. `utilities[i]` is player `i`'s flat tensor.
    pub fn new(
        action_counts: Vec<usize>,
        state_count: usize,
        utilities: Vec<Vec<f64>>,
    ) -> Result<Self, GameError> {
        Self::with_labels(action_counts, state_count, utilities, None)
    }

    pub fn with_labels(
        action_counts: Vec<usize>,
        state_count: usize,
        utilities: Vec<Vec<f64>>,
        labels: Option<Labels>,
    ) -> Result<Self, GameError> {
        validate_game(Game {
            action_counts,
            state_count,
            utilities,
            labels,
        })
    }

    pub fn n_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn action_count(&self, player: usize) -> usize {
        self.action_counts[player]
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// Number of pure action profiles, `prod_j |A_j|`.
    pub fn profile_count(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn utilities(&self, player: usize) -> &[f64] {
        &self.utilities[player]
    }

    /// Flat index of the action profile `actions` (state excluded).
    pub fn profile_index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.n_players());
        actions
            .iter()
            .zip(&self.action_counts)
            .fold(0, |acc, (&a, &n)| acc * n + a)
    }

    /// `U_i(a; state)`.
    pub fn utility(&self, player: usize, actions: &[usize], state: usize) -> f64 {
        self.utilities[player][self.profile_index(actions) * self.state_count + state]
    }

    /// Stride of player `i`'s action digit in the flat profile index.
    pub(crate) fn action_stride(&self, player: usize) -> usize {
        self.action_counts[player + 1..].iter().product()
    }

    /// Iterator over all pure action profiles in row-major order.
    pub fn action_profiles(&self) -> ActionProfiles {
        ActionProfiles::new(self.action_counts.clone())
    }

    /// Degrees of freedom of the profile space, `sum_i (|A_i|-1) + N (|Theta|-1)`.
    pub fn profile_dimension(&self) -> usize {
        let strat: usize = self.action_counts.iter().map(|n| n - 1).sum();
        strat + self.n_players() * (self.state_count - 1)
    }

    /// Spread `max U - min U` over all players' utilities.
    pub fn utility_range(&self) -> f64 {
        let (lo, hi) = self
            .utilities
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
                (lo.min(u), hi.max(u))
            });
        hi - lo
    }
}

/// Checks every structural invariant of a game and returns it unchanged.
pub fn validate_game(game: Game) -> Result<Game, GameError> {
    let n = game.action_counts.len();
    if n == 0 {
        return Err(GameError::NoPlayers);
    }
    if let Some(player) = game.action_counts.iter().position(|&c| c == 0) {
        return Err(GameError::EmptyActionSet { player });
    }
    if game.state_count == 0 {
        return Err(GameError::EmptyStateSet);
    }
    if game.utilities.len() != n {
        return Err(GameError::PlayerCountMismatch {
            expected: n,
            got: game.utilities.len(),
        });
    }
    let expected = game.profile_count() * game.state_count;
    for (player, u) in game.utilities.iter().enumerate() {
        if u.len() != expected {
            return Err(GameError::DimensionMismatch {
                player,
                expected,
                got: u.len(),
            });
        }
        if let Some(index) = u.iter().position(|x| !x.is_finite()) {
            return Err(GameError::NonFinite { player, index });
        }
    }
    if let Some(labels) = &game.labels {
        check_labels(&game, labels)?;
    }
    Ok(game)
}

fn check_labels(game: &Game, labels: &Labels) -> Result<(), GameError> {
    let mismatch = |field: String, expected: usize, got: usize| {
        if expected == got {
            Ok(())
        } else {
            Err(GameError::LabelMismatch {
                field,
                expected,
                got,
            })
        }
    };
    if let Some(p) = &labels.players {
        mismatch("players".into(), game.n_players(), p.len())?;
    }
    if let Some(acts) = &labels.actions {
        mismatch("actions".into(), game.n_players(), acts.len())?;
        for (i, a) in acts.iter().enumerate() {
            mismatch(format!("actions[{i}]"), game.action_count(i), a.len())?;
        }
    }
    if let Some(s) = &labels.states {
        mismatch("states".into(), game.state_count, s.len())?;
    }
    Ok(())
}

/// Row-major odometer over pure action profiles.
#[derive(Debug, Clone)]
pub struct ActionProfiles {
    counts: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl ActionProfiles {
    pub fn new(counts: Vec<usize>) -> Self {
        let done = counts.contains(&0);
        let current = vec![0; counts.len()];
        Self {
            counts,
            current,
            done,
        }
    }
}

impl Iterator for ActionProfiles {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut k = self.counts.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.current[k] += 1;
            if self.current[k] < self.counts[k] {
                break;
            }
            self.current[k] = 0;
        }
        Some(out)
    }
}

/// A point on a finite probability simplex.
///
/// Used both for mixed strategies over an action set and for subjective priors
/// over the state set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

pub type MixedStrategy = SimplexPoint;
pub type SubjectivePrior = SimplexPoint;

impl SimplexPoint {
    /// Accepts `weights` if they are a probability vector up to float noise.
    ///
    /// Slightly negative entries are clamped to zero and the result is renormalized.
    pub fn new(weights: Vec<f64>) -> Result<Self, SimplexError> {
        if weights.is_empty() {
            return Err(SimplexError::Empty);
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(SimplexError::NonFinite { index });
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, &w)| w < -SIMPLEX_NEG_TOL)
        {
            return Err(SimplexError::Negative { index, value });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(SimplexError::BadSum { sum });
        }
        if weights.iter().all(|&w| w >= 0.0) && (sum - 1.0).abs() <= ON_SIMPLEX_TOL {
            return Ok(SimplexPoint(weights));
        }
        Ok(Self::normalized(weights))
    }

    /// Clamps negatives and rescales. The caller guarantees a positive total mass.
    pub(crate) fn normalized(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum != 1.0 {
            for w in weights.iter_mut() {
                *w /= sum;
            }
        }
        SimplexPoint(weights)
    }

    /// Wraps weights without any check. Used for finite-difference probes that
    /// deliberately leave the simplex.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        SimplexPoint(weights)
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        SimplexPoint(vec![1.0 / len as f64; len])
    }

    /// The vertex with all mass on `index`.
    pub fn vertex(len: usize, index: usize) -> Self {
        let mut w = vec![0.0; len];
        w[index] = 1.0;
        SimplexPoint(w)
    }

    /// Uniform (Dirichlet(1)) sample.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let draws: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        Self::normalized(draws)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices carrying positive weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, _)| k)
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        SimplexPoint::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// Sort-based algorithm (Held, Wolfe and Crowder); the output is renormalized so
/// that it is a valid simplex point exactly.
pub fn project_to_simplex(v: &[f64]) -> Result<SimplexPoint, SimplexError> {
    if v.is_empty() {
        return Err(SimplexError::Empty);
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(SimplexError::NonFinite { index });
    }
    let sum: f64 = v.iter().sum();
    if v.iter().all(|&x| x >= 0.0) && (sum - 1.0).abs() <= ON_SIMPLEX_TOL {
        return Ok(SimplexPoint(v.to_vec()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    let out: Vec<f64> = v.iter().map(|x| (x - shift).max(0.0)).collect();
    Ok(SimplexPoint::normalized(out))
}

/// `Pi(a | sigma) = prod_j sigma_j(a_j)`.
pub fn profile_probability(actions: &[usize], strategies: &[MixedStrategy]) -> f64 {
    debug_assert_eq!(actions.len(), strategies.len());
    actions
        .iter()
        .zip(strategies)
        .map(|(&a, s)| s[a])
        .product()
}

/// Complete strategy profile: a mixed strategy and a subjective prior per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteProfile {
    pub strategies: Vec<MixedStrategy>,
    pub priors: Vec<SubjectivePrior>,
}

impl CompleteProfile {
    pub fn new(
        strategies: Vec<MixedStrategy>,
        priors: Vec<SubjectivePrior>,
    ) -> Self {
        Self { strategies, priors }
    }

    /// Every player mixing and believing uniformly.
    pub fn uniform(game: &Game) -> Self {
        Self {
            strategies: game
                .action_counts()
                .iter()
                .map(|&n| SimplexPoint::uniform(n))
                .collect(),
            priors: (0..game.n_players())
                .map(|_| SimplexPoint::uniform(game.state_count()))
                .collect(),
        }
    }

    /// Independent Dirichlet(1) draws for every component.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, game: &Game) -> Self {
        let strategies = game
            .action_counts()
            .iter()
            .map(|&n| SimplexPoint::random(rng, n))
            .collect();
        let priors = (0..game.n_players())
            .map(|_| SimplexPoint::random(rng, game.state_count()))
            .collect();
        Self { strategies, priors }
    }

    /// Checks that the profile's dimensions match `game`.
    pub fn check_dimensions(&self, game: &Game) -> Result<(), ProfileError> {
        let n = game.n_players();
        if self.strategies.len() != n {
            return Err(ProfileError::StrategyCount {
                expected: n,
                got: self.strategies.len(),
            });
        }
        if self.priors.len() != n {
            return Err(ProfileError::PriorCount {
                expected: n,
                got: self.priors.len(),
            });
        }
        for (player, s) in self.strategies.iter().enumerate() {
            if s.len() != game.action_count(player) {
                return Err(ProfileError::StrategyLength {
                    player,
                    expected: game.action_count(player),
                    got: s.len(),
                });
            }
        }
        for (player, p) in self.priors.iter().enumerate() {
            if p.len() != game.state_count() {
                return Err(ProfileError::PriorLength {
                    player,
                    expected: game.state_count(),
                    got: p.len(),
                });
            }
        }
        Ok(())
    }

    /// `Pi_i(a; state | rho) = Pi(a | sigma) * pi_i(state)`.
    pub fn joint_probability(&self, player: usize, actions: &[usize], state: usize) -> f64 {
        profile_probability(actions, &self.strategies) * self.priors[player][state]
    }

    /// Strategies then priors, concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        self.strategies
            .iter()
            .chain(&self.priors)
            .flat_map(|s| s.weights().iter().copied())
            .collect()
    }

    /// Copy of this profile with player `i`'s prior replaced.
    pub fn with_prior(&self, player: usize, prior: SubjectivePrior) -> Self {
        let mut out = self.clone();
        out.priors[player] = prior;
        out
    }

    /// L-infinity distance over concatenated coordinates.
    pub fn linf_distance(&self, other: &CompleteProfile) -> f64 {
        self.to_flat()
            .iter()
            .zip(other.to_flat())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gw_utilities() -> Vec<Vec<f64>> {
        // (a1, a2, state) row-major; states Calm, Storm.
        let u1 = vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let u2 = u1.iter().map(|u| 1.0 - u).collect();
        vec![u1, u2]
    }

    #[test]
    fn accepts_gw_game() {
        let g = Game::new(vec![2, 2], 2, gw_utilities()).unwrap();
        assert_eq!(g.n_players(), 2);
        assert_eq!(g.utility(0, &[1, 0], 1), 1.0);
        assert_eq!(g.utility(0, &[1, 0], 0), 0.0);
        assert_eq!(g.profile_dimension(), 4);
    }

    #[test]
    fn accepts_minimal_game() {
        let g = Game::new(vec![1], 1, vec![vec![0.0]]).unwrap();
        assert_eq!(g.profile_count(), 1);
        assert_eq!(g.profile_dimension(), 0);
    }

    #[test]
    fn rejects_short_tensor() {
        let mut u = gw_utilities();
        u[0] = vec![1.0, 0.0, 0.0];
        assert_eq!(
            Game::new(vec![2, 2], 2, u),
            Err(GameError::DimensionMismatch {
                player: 0,
                expected: 8,
                got: 3
            })
        );
    }

    #[test]
    fn rejects_non_finite_and_empty_sets() {
        let mut u = gw_utilities();
        u[1][5] = f64::NAN;
        assert_eq!(
            Game::new(vec![2, 2], 2, u),
            Err(GameError::NonFinite {
                player: 1,
                index: 5
            })
        );
        assert_eq!(Game::new(vec![], 1, vec![]), Err(GameError::NoPlayers));
        assert_eq!(
            Game::new(vec![2, 0], 1, vec![vec![], vec![]]),
            Err(GameError::EmptyActionSet { player: 1 })
        );
        assert_eq!(
            Game::new(vec![1], 0, vec![vec![]]),
            Err(GameError::EmptyStateSet)
        );
    }

    #[test]
    fn label_lengths_checked() {
        let labels = Labels {
            states: Some(vec!["Calm".into()]),
            ..Default::default()
        };
        assert!(matches!(
            Game::with_labels(vec![2, 2], 2, gw_utilities(), Some(labels)),
            Err(GameError::LabelMismatch { .. })
        ));
    }

    #[test]
    fn odometer_order() {
        let all: Vec<_> = ActionProfiles::new(vec![2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        let g = Game::new(vec![2, 3], 1, vec![vec![0.0; 6]; 2]).unwrap();
        for (k, a) in g.action_profiles().enumerate() {
            assert_eq!(g.profile_index(&a), k);
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]).unwrap().weights(), &[0.2, 0.8]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]).unwrap().weights(), &[1.0, 0.0]);
        assert_eq!(project_to_simplex(&[]), Err(SimplexError::Empty));
    }

    #[test]
    fn projection_matches_grid_search() {
        // Brute force: minimize squared distance over a fine grid of the 1-simplex.
        let target = [0.6, 0.6];
        let steps = 100_000;
        let best = (0..=steps)
            .map(|k| {
                let x = k as f64 / steps as f64;
                let d = (x - target[0]).powi(2) + (1.0 - x - target[1]).powi(2);
                (d, x)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1;
        assert_eq!(best, 0.5);
        let p = project_to_simplex(&target).unwrap();
        assert!((p[0] - best).abs() < 1e-12 && (p[1] - (1.0 - best)).abs() < 1e-12);
    }

    #[test]
    fn simplex_ingestion_tolerance() {
        let p = SimplexPoint::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let p = SimplexPoint::new(vec![-1e-13, 1.0]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!(matches!(
            SimplexPoint::new(vec![0.5, 0.6]),
            Err(SimplexError::BadSum { .. })
        ));
        assert!(matches!(
            SimplexPoint::new(vec![-0.1, 1.1]),
            Err(SimplexError::Negative { index: 0, .. })
        ));
    }

    #[test]
    fn product_probability() {
        let half = SimplexPoint::uniform(2);
        let s = vec![half.clone(), half];
        assert_eq!(profile_probability(&[0, 0], &s), 0.25);

        let r = std::f64::consts::SQRT_2;
        let p = 1.0 - 1.0 / r;
        let q = 2.0 - r;
        let star = vec![
            SimplexPoint::new(vec![p, 1.0 - p]).unwrap(),
            SimplexPoint::new(vec![q, 1.0 - q]).unwrap(),
        ];
        assert!((profile_probability(&[0, 0], &star) - (3.0 - 2.0 * r)).abs() < 1e-15);

        let pure = vec![SimplexPoint::vertex(2, 1), SimplexPoint::uniform(2)];
        assert_eq!(profile_probability(&[0, 1], &pure), 0.0);
    }

    #[test]
    fn dimension_checks() {
        let g = Game::new(vec![2, 3], 2, vec![vec![0.0; 12]; 2]).unwrap();
        let mut rho = CompleteProfile::uniform(&g);
        assert!(rho.check_dimensions(&g).is_ok());
        rho.strategies[1] = SimplexPoint::uniform(2);
        assert_eq!(
            rho.check_dimensions(&g),
            Err(ProfileError::StrategyLength {
                player: 1,
                expected: 3,
                got: 2
            })
        );
    }
}
