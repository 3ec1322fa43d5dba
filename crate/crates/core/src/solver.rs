//! Multistart search for certified extended equilibria.
//!
//! Each restart draws a uniformly random complete profile, runs the damped
//! fixed-point iteration `rho <- (1 - d) rho + d upsilon(rho)` and, when that
//! stalls, minimizes the merit function by projected block-coordinate descent
//! over the product of simplices. Only profiles accepted by
//! [`verify_equilibrium`] are returned.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{merit, upsilon, verify_equilibrium, EquilibriumReport};
use crate::game::{project_to_simplex, CompleteProfile, Game, SimplexPoint};

/// Relative central-difference step for merit gradients.
const FD_STEP: f64 = 1e-7;
/// Iterations without a halving of the best merit before the fixed-point phase stalls.
const STALL_WINDOW: usize = 2_000;
/// Sufficient-decrease constant of the descent line search.
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_STEP: f64 = 1e6;
/// Upper bound on the difference step relative to `sqrt(merit)`.
const KINK_FRACTION: f64 = 1e-3;
const MIN_FD_STEP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub damping: f64,
    pub restarts: usize,
    pub seed: u64,
    pub merit_tol: f64,
    pub verify_tol: f64,
    pub descent_fallback: bool,
    pub dedup_distance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200_000,
            damping: 0.5,
            restarts: 64,
            seed: 0,
            merit_tol: 1e-16,
            verify_tol: 1e-9,
            descent_fallback: true,
            dedup_distance: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |what: &str| Err(SolveError::InvalidConfig(what.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        let positive = |x: f64| x > 0.0;
        if ![self.merit_tol, self.verify_tol, self.dedup_distance].into_iter().all(positive) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }

    /// Merit level at which a restart stops searching. Merit below `verify_tol^2`
    /// guarantees every violation is within `verify_tol`.
    fn merit_target(&self) -> f64 {
        self.merit_tol.min(self.verify_tol * self.verify_tol)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("no restart out of {restarts} produced a certified equilibrium (one exists; the search missed it)")]
    SearchFailure { restarts: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedProfile {
    pub profile: CompleteProfile,
    pub report: EquilibriumReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartOutcome {
    /// The fixed-point iteration alone reached the merit target.
    FixedPoint,
    /// The descent phase reached a certified profile.
    Descent,
    /// The final profile failed verification.
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub fixed_point_iterations: usize,
    pub descent_sweeps: usize,
    pub final_merit: f64,
    pub outcome: RestartOutcome,
}

/// Everything a solve produced, including restarts that did not certify.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveRun {
    pub solutions: Vec<CertifiedProfile>,
    pub restarts: Vec<RestartSummary>,
}

/// Runs the multistart search and returns the distinct certified profiles.
pub fn solve(game: &Game, config: &SolverConfig) -> Result<Vec<CertifiedProfile>, SolveError> {
    let run = solve_detailed(game, config)?;
    if run.solutions.is_empty() {
        return Err(SolveError::SearchFailure {
            restarts: config.restarts,
        });
    }
    Ok(run.solutions)
}

/// Like [`solve`] but an empty result is not an error and per-restart statistics
/// are kept.
pub fn solve_detailed(game: &Game, config: &SolverConfig) -> Result<SolveRun, SolveError> {
    config.validate()?;
    let results: Vec<(RestartSummary, Option<CertifiedProfile>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(game, config, r))
        .collect();

    let mut solutions: Vec<CertifiedProfile> = Vec::new();
    let mut restarts = Vec::with_capacity(results.len());
    for (summary, found) in results {
        restarts.push(summary);
        if let Some(c) = found {
            let duplicate = solutions
                .iter()
                .any(|s| s.profile.linf_distance(&c.profile) < config.dedup_distance);
            if !duplicate {
                solutions.push(c);
            }
        }
    }
    Ok(SolveRun {
        solutions,
        restarts,
    })
}

/// Deterministic per-restart generator: one ChaCha stream per restart index.
fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(
    game: &Game,
    config: &SolverConfig,
    restart: usize,
) -> (RestartSummary, Option<CertifiedProfile>) {
    let mut rng = restart_rng(config.seed, restart);
    let start = CompleteProfile::random(&mut rng, game);
    let target = config.merit_target();

    let (mut profile, iterations, mut current) = damped_iteration(game, start, config, target);
    let mut outcome = RestartOutcome::FixedPoint;
    let mut sweeps = 0;
    if current > target && config.descent_fallback {
        let layout = Layout::new(game);
        let mut x = layout.flatten(&profile);
        let (m, s) = descend(game, &layout, &mut x, target, config.max_iterations);
        profile = layout.profile(&x);
        current = m;
        sweeps = s;
        outcome = RestartOutcome::Descent;
    }

    let report = verify_equilibrium(game, &profile, config.verify_tol);
    if !report.accepted {
        outcome = RestartOutcome::Uncertified;
    }
    let summary = RestartSummary {
        restart,
        fixed_point_iterations: iterations,
        descent_sweeps: sweeps,
        final_merit: current,
        outcome,
    };
    let certified = report
        .accepted
        .then_some(CertifiedProfile { profile, report });
    (summary, certified)
}

fn mix(current: &SimplexPoint, mapped: &SimplexPoint, damping: f64) -> SimplexPoint {
    let raw = current
        .weights()
        .iter()
        .zip(mapped.weights())
        .map(|(a, b)| (1.0 - damping) * a + damping * b)
        .collect();
    SimplexPoint::normalized(raw)
}

/// Damped fixed-point iteration. Returns the best profile seen, the number of
/// map applications and its merit.
fn damped_iteration(
    game: &Game,
    start: CompleteProfile,
    config: &SolverConfig,
    target: f64,
) -> (CompleteProfile, usize, f64) {
    let mut profile = start;
    let mut best = (profile.clone(), f64::INFINITY);
    let mut last_progress = 0;
    let mut step = 0;
    while step < config.max_iterations {
        let (mapped, diag) = upsilon(game, &profile);
        if diag.merit < best.1 {
            if diag.merit < 0.5 * best.1 {
                last_progress = step;
            }
            best = (profile.clone(), diag.merit);
        }
        if diag.merit <= target || step - last_progress > STALL_WINDOW {
            break;
        }
        let strategies = profile
            .strategies
            .iter()
            .zip(&mapped.strategies)
            .map(|(a, b)| mix(a, b, config.damping))
            .collect();
        let priors = profile
            .priors
            .iter()
            .zip(&mapped.priors)
            .map(|(a, b)| mix(a, b, config.damping))
            .collect();
        profile = CompleteProfile::new(strategies, priors);
        step += 1;
    }
    (best.0, step, best.1)
}

/// Offsets of each simplex block in the flat coordinate vector.
struct Layout {
    blocks: Vec<(usize, usize)>,
    n_players: usize,
}

impl Layout {
    fn new(game: &Game) -> Self {
        let sizes = game
            .action_counts()
            .iter()
            .copied()
            .chain(std::iter::repeat_n(game.state_count(), game.n_players()));
        let mut blocks = Vec::new();
        let mut start = 0;
        for len in sizes {
            blocks.push((start, len));
            start += len;
        }
        Self {
            blocks,
            n_players: game.n_players(),
        }
    }

    fn flatten(&self, profile: &CompleteProfile) -> Vec<f64> {
        profile.to_flat()
    }

    fn profile(&self, x: &[f64]) -> CompleteProfile {
        let mut parts = self
            .blocks
            .iter()
            .map(|&(s, l)| SimplexPoint::from_raw(x[s..s + l].to_vec()));
        let strategies = parts.by_ref().take(self.n_players).collect();
        let priors = parts.collect();
        CompleteProfile::new(strategies, priors)
    }
}

fn flat_merit(game: &Game, layout: &Layout, x: &[f64]) -> f64 {
    merit(game, &layout.profile(x))
}

/// Central-difference gradient of the merit over one block.
///
/// The step shrinks with `sqrt(merit)` so that near an equilibrium the probes stay
/// on one side of the kinks where a violation changes sign.
fn block_gradient(game: &Game, layout: &Layout, x: &mut [f64], f: f64, start: usize, len: usize) -> Vec<f64> {
    let mut grad = vec![0.0; len];
    for (k, g) in grad.iter_mut().enumerate() {
        let at = start + k;
        let orig = x[at];
        let h = (FD_STEP * orig.abs().max(1.0))
            .min(KINK_FRACTION * f.sqrt())
            .max(MIN_FD_STEP);
        x[at] = orig + h;
        let up = flat_merit(game, layout, x);
        x[at] = orig - h;
        let down = flat_merit(game, layout, x);
        x[at] = orig;
        *g = (up - down) / (2.0 * h);
    }
    // Tangent to the simplex.
    let mean = grad.iter().sum::<f64>() / len as f64;
    grad.iter_mut().for_each(|g| *g -= mean);
    grad
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected block-coordinate descent on the merit function.
///
/// Each block (one simplex) gets a finite-difference gradient; the trial step
/// starts from the Barzilai-Borwein estimate of that block and is halved until
/// the Armijo condition holds. Returns the final merit and the number of sweeps.
fn descend(
    game: &Game,
    layout: &Layout,
    x: &mut [f64],
    target: f64,
    max_sweeps: usize,
) -> (f64, usize) {
    let mut f = flat_merit(game, layout, x);
    let mut steps = vec![1.0_f64; layout.blocks.len()];
    let mut previous: Vec<Option<(Vec<f64>, Vec<f64>)>> = vec![None; layout.blocks.len()];
    let mut sweep = 0;
    while sweep < max_sweeps && f > target {
        sweep += 1;
        let before = f;
        for (b, &(start, len)) in layout.blocks.iter().enumerate() {
            if len < 2 {
                continue;
            }
            let grad = block_gradient(game, layout, x, f, start, len);
            if grad.iter().all(|&g| g == 0.0) {
                continue;
            }
            let block = x[start..start + len].to_vec();
            let mut t = (steps[b] * 2.0).min(MAX_STEP);
            if let Some((px, pg)) = &previous[b] {
                let s: Vec<f64> = block.iter().zip(px).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 0.0 {
                    t = (dot(&s, &s) / sy).min(MAX_STEP);
                }
            }
            previous[b] = Some((block.clone(), grad.clone()));

            for _ in 0..MAX_HALVINGS {
                let trial: Vec<f64> = block.iter().zip(&grad).map(|(v, g)| v - t * g).collect();
                let cand = project_to_simplex(&trial)
                    .expect("finite trial point")
                    .into_inner();
                let decrease: f64 = grad
                    .iter()
                    .zip(block.iter().zip(&cand))
                    .map(|(g, (v, c))| g * (v - c))
                    .sum();
                x[start..start + len].copy_from_slice(&cand);
                let fc = flat_merit(game, layout, x);
                if fc < f && fc <= f - ARMIJO * decrease {
                    f = fc;
                    steps[b] = t;
                    break;
                }
                x[start..start + len].copy_from_slice(&block);
                t *= 0.5;
            }
            if f <= target {
                break;
            }
        }
        if f >= before {
            break;
        }
    }
    (f, sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let c = SolverConfig {
            damping: 1.5,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(SolveError::InvalidConfig(_))));
        let c = SolverConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn layout_round_trip() {
        let g = fixtures::single_player_irregular();
        let layout = Layout::new(&g);
        let rho = fixtures::single_player_irregular_equilibrium();
        assert_eq!(layout.profile(&layout.flatten(&rho)), rho);
    }

    #[test]
    fn trivial_game_certifies_immediately() {
        let g = fixtures::constant_game(&[2], 2, 1.0);
        let run = solve_detailed(&g, &SolverConfig { restarts: 2, ..Default::default() }).unwrap();
        assert!(run.restarts.iter().all(|r| r.outcome == RestartOutcome::FixedPoint));
        assert_eq!(run.solutions.len(), 2);
    }
}
