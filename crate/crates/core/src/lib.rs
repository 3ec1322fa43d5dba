//! Extended equilibria of finite games with a globally uncertain parameter.
//!
//! Players choose mixed strategies and, at the same time, subjective priors over
//! an unknown state. At an extended equilibrium no player gains expected utility
//! by deviating, and every prior maximizes its holder's expected regret.

pub mod bayes_gw;
pub mod equilibrium;
pub mod expectation;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod oracle;
pub mod solver;

pub use equilibrium::{merit, relu, upsilon, verify_equilibrium, EquilibriumReport, Inequality, IterationDiagnostics};
pub use game::{project_to_simplex, CompleteProfile, Game, MixedStrategy, SimplexPoint, SubjectivePrior};
pub use solver::{solve, solve_detailed, CertifiedProfile, SolveError, SolverConfig};
