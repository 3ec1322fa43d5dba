//! Command-line front end for the `exteq` library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use exteq::bayes_gw::gw_comparison;
use exteq::expectation::{effective_utility_table, regret_from_utility, EffectiveTable, PlayerExpectations};
use exteq::io::{load_profile, parse_game, save_result, RunResult};
use exteq::oracle::{best_hits, default_scan_tol, grid_scan_with_budget, no_fictional_faith_check, OracleError, DEFAULT_SCAN_BUDGET};
use exteq::{solve_detailed, verify_equilibrium, CompleteProfile, EquilibriumReport, Game, Inequality, SolverConfig};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_SEARCH_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "exteq", version, about = "Extended equilibria of games with an uncertain parameter")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for extended equilibria and print every certified profile.
    Solve {
        game: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Certification tolerance on the worst slack.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Skip the projected descent phase.
        #[arg(long)]
        no_fallback: bool,
        /// Also write the JSON result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check every equilibrium inequality at a profile.
    Verify {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Print effective utility and regret tables at a profile.
    Regret { game: PathBuf, profile: PathBuf },
    /// Exhaustive scan of the rational grid with denominator `resolution`.
    Scan {
        game: PathBuf,
        #[arg(long)]
        resolution: usize,
        /// Hit tolerance; defaults to 2 * range * total actions / resolution.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SCAN_BUDGET)]
        budget: u128,
    },
    /// Pure-prior analysis of a certified equilibrium.
    Nff {
        game: PathBuf,
        profile: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Extended versus Bayesian equilibria of the generals-and-weather game.
    GwBayes,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_game(path: &Path) -> anyhow::Result<(Game, Vec<u8>)> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let game = parse_game(&text).with_context(|| format!("in {}", path.display()))?;
    Ok((game, bytes))
}

fn read_profile(game: &Game, path: &Path) -> anyhow::Result<CompleteProfile> {
    let profile = load_profile(path).with_context(|| format!("in {}", path.display()))?;
    profile
        .check_dimensions(game)
        .with_context(|| format!("{} does not fit the game", path.display()))?;
    Ok(profile)
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Solve {
            game,
            restarts,
            damping,
            seed,
            tol,
            max_iterations,
            no_fallback,
            out,
        } => {
            let mut config = SolverConfig::default();
            if let Some(r) = restarts {
                config.restarts = *r;
            }
            if let Some(d) = damping {
                config.damping = *d;
            }
            if let Some(s) = seed {
                config.seed = *s;
            }
            if let Some(t) = tol {
                config.verify_tol = *t;
            }
            if let Some(m) = max_iterations {
                config.max_iterations = *m;
            }
            config.descent_fallback = !no_fallback;
            solve_command(cli.json, game, &config, out.as_deref())
        }
        Command::Verify { game, profile, tol } => verify_command(cli.json, game, profile, *tol),
        Command::Regret { game, profile } => regret_command(cli.json, game, profile),
        Command::Scan {
            game,
            resolution,
            tol,
            budget,
        } => scan_command(cli.json, game, *resolution, *tol, *budget),
        Command::Nff { game, profile, tol } => nff_command(cli.json, game, profile, *tol),
        Command::GwBayes => gw_bayes_command(cli.json),
    }
}

fn solve_command(as_json: bool, path: &Path, config: &SolverConfig, out: Option<&Path>) -> anyhow::Result<u8> {
    let (game, bytes) = read_game(path)?;
    config.validate()?;
    let start = Instant::now();
    let run = solve_detailed(&game, config)?;
    let wall = start.elapsed().as_secs_f64();

    let mut result = RunResult::new("solve", &bytes);
    for c in &run.solutions {
        result.push(c.profile.clone(), c.report.clone());
    }
    let certified = run.restarts.iter().filter(|r| r.outcome != exteq::solver::RestartOutcome::Uncertified).count();
    result.diagnostics = json!({
        "config": config,
        "certified_restarts": certified,
        "fixed_point_iterations": run.restarts.iter().map(|r| r.fixed_point_iterations).sum::<usize>(),
        "descent_sweeps": run.restarts.iter().map(|r| r.descent_sweeps).sum::<usize>(),
        "restarts": run.restarts,
        "wall_time_seconds": wall,
    });
    if let Some(out) = out {
        save_result(&result, out)?;
    }

    if as_json {
        println!("{}", result.to_json_string());
    } else {
        println!(
            "{} distinct certified profile(s) from {} restarts ({certified} certified) in {wall:.3} s",
            result.profiles.len(),
            config.restarts
        );
        for (k, (profile, report)) in result.profiles.iter().zip(&result.reports).enumerate() {
            println!("\nprofile {k}:");
            print_profile(&game, profile);
            print_values(&game, report);
            println!("  worst_violation = {:e}", report.worst_violation);
        }
    }
    if result.profiles.is_empty() {
        eprintln!("no restart produced a certified profile");
        return Ok(EXIT_SEARCH_FAILURE);
    }
    Ok(EXIT_OK)
}

fn verify_command(as_json: bool, game_path: &Path, profile_path: &Path, tol: f64) -> anyhow::Result<u8> {
    anyhow::ensure!(tol.is_finite() && tol >= 0.0, "tolerance must be finite and nonnegative");
    let (game, bytes) = read_game(game_path)?;
    let profile = read_profile(&game, profile_path)?;
    let report = verify_equilibrium(&game, &profile, tol);
    let accepted = report.accepted;
    if as_json {
        let mut result = RunResult::new("verify", &bytes);
        result.push(profile, report);
        println!("{}", result.to_json_string());
    } else {
        print_values(&game, &report);
        println!("worst_violation = {:e}", report.worst_violation);
        if accepted {
            println!("accepted at tol {tol:e}");
        } else {
            let worst = report.worst.expect("rejection has a worst inequality");
            println!(
                "rejected at tol {tol:e}: most violated inequality {} (slack {:e})",
                describe(&game, worst),
                report.slack(worst)
            );
        }
    }
    Ok(if accepted { EXIT_OK } else { EXIT_REJECTED })
}

fn regret_command(as_json: bool, game_path: &Path, profile_path: &Path) -> anyhow::Result<u8> {
    let (game, _) = read_game(game_path)?;
    let profile = read_profile(&game, profile_path)?;
    let tables: Vec<(EffectiveTable, EffectiveTable, PlayerExpectations)> = (0..game.n_players())
        .map(|i| {
            let utility = effective_utility_table(&game, i, &profile.strategies);
            let regret = regret_from_utility(&utility);
            (utility, regret, PlayerExpectations::from_tables(&game, i, &profile))
        })
        .collect();
    if as_json {
        let players: Vec<Value> = tables
            .iter()
            .map(|(u, r, e)| {
                json!({
                    "player": e.player,
                    "utility": u.rows(),
                    "regret": r.rows(),
                    "eu_by_action": e.eu_by_action,
                    "eu": e.eu,
                    "er_by_state": e.er_by_state,
                    "er": e.er,
                })
            })
            .collect();
        print_json(&json!({ "players": players }));
    } else {
        for (u, r, e) in &tables {
            let i = e.player;
            println!("{}", player_name(&game, i));
            println!("  effective utility");
            print_table(&game, u);
            println!("  effective regret");
            print_table(&game, r);
            println!("  EU = {:.6}  ER = {:.6}", e.eu, e.er);
        }
    }
    Ok(EXIT_OK)
}

fn scan_command(as_json: bool, path: &Path, resolution: usize, tol: Option<f64>, budget: u128) -> anyhow::Result<u8> {
    let (game, bytes) = read_game(path)?;
    anyhow::ensure!(resolution > 0, "resolution must be positive");
    let tol = tol.unwrap_or_else(|| default_scan_tol(&game, resolution));
    anyhow::ensure!(tol.is_finite() && tol >= 0.0, "tolerance must be finite and nonnegative");
    let start = Instant::now();
    let hits = grid_scan_with_budget(&game, resolution, tol, budget)?;
    let wall = start.elapsed().as_secs_f64();
    let best: Vec<&CompleteProfile> = best_hits(&hits).into_iter().map(|h| &h.profile).collect();
    if as_json {
        let mut result = RunResult::new("scan", &bytes);
        for h in &hits {
            result.push(h.profile.clone(), verify_equilibrium(&game, &h.profile, tol));
        }
        result.diagnostics = json!({
            "resolution": resolution,
            "tol": tol,
            "grid_size": exteq::oracle::grid_size(&game, resolution).to_string(),
            "hits": hits.len(),
            "best_hits": best,
            "wall_time_seconds": wall,
        });
        println!("{}", result.to_json_string());
    } else {
        println!(
            "{} hit(s) at resolution {resolution}, tol {tol:e} ({} grid profiles, {wall:.3} s)",
            hits.len(),
            exteq::oracle::grid_size(&game, resolution)
        );
        if let Some(first) = hits.iter().find(|h| best.first() == Some(&&h.profile)) {
            println!("best worst_violation = {:e}, {} tied profile(s); first:", first.worst_violation, best.len());
            print_profile(&game, &first.profile);
        }
    }
    Ok(EXIT_OK)
}

fn nff_command(as_json: bool, game_path: &Path, profile_path: &Path, tol: f64) -> anyhow::Result<u8> {
    let (game, bytes) = read_game(game_path)?;
    let profile = read_profile(&game, profile_path)?;
    let faith = match no_fictional_faith_check(&game, &profile, tol) {
        Ok(f) => f,
        Err(OracleError::NotAnEquilibrium { tol, worst }) => {
            eprintln!("profile is not certified at tol {tol:e} (worst violation {worst:e})");
            return Ok(EXIT_REJECTED);
        }
        Err(e) => return Err(e.into()),
    };
    if as_json {
        let mut result = RunResult::new("nff", &bytes);
        result.push(profile.clone(), verify_equilibrium(&game, &profile, tol));
        result.diagnostics = serde_json::to_value(&faith)?;
        println!("{}", result.to_json_string());
    } else {
        for p in &faith.players {
            let name = player_name(&game, p.player);
            match p.pure_state {
                None => println!("{name}: prior is not pure"),
                Some(s) => println!(
                    "{name}: prior pure on {}; parameter irrelevant: {}; any prior works: {}",
                    state_name(&game, s),
                    yes_no(p.irrelevance_verified),
                    yes_no(p.degeneracy_verified)
                ),
            }
        }
    }
    Ok(EXIT_OK)
}

fn gw_bayes_command(as_json: bool) -> anyhow::Result<u8> {
    let c = gw_comparison();
    if as_json {
        print_json(&serde_json::to_value(&c)?);
        return Ok(EXIT_OK);
    }
    let e = &c.extended;
    println!("extended equilibrium");
    println!("  defender Up = {:.6}  attacker Up = {:.6}", e.p, e.q);
    println!("  defender prior Calm = {:.6}  attacker prior Calm = {:.6}", e.big_p, e.big_q);
    println!("  EU = ({:.6}, {:.6})  sum = {:.6}", e.eu1, e.eu2, c.extended_eu_sum);
    println!("  ER = ({:.6}, {:.6})", e.er1, e.er2);
    println!(
        "as-if common priors: defender {:.6}, attacker {:.6}",
        c.as_if_priors.defender, c.as_if_priors.attacker
    );
    println!("\nBayesian equilibria");
    println!("  {:>5}  {:>11}  {:>11}  {:>8}  {:>8}", "P_c", "defender Up", "attacker Up", "EU_1", "EU_2");
    for row in &c.bayes {
        println!(
            "  {:>5.2}  {:>11.6}  {:>11.6}  {:>8.6}  {:>8.6}",
            row.p_c, row.defender_up, row.attacker_up, row.eu1, row.eu2
        );
    }
    let n = &c.no_common_prior;
    println!(
        "\nno common prior reproduces the extended equilibrium: {} (min distance {:.6} at P_c = {:.3}, symmetry residual {:.6})",
        n.holds, n.min_distance, n.closest_prior, n.symmetry_residual
    );
    Ok(EXIT_OK)
}

fn yes_no(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

fn player_name(game: &Game, i: usize) -> String {
    game.labels()
        .and_then(|l| l.players.as_ref())
        .map(|p| p[i].clone())
        .unwrap_or_else(|| format!("player {i}"))
}

fn action_name(game: &Game, i: usize, a: usize) -> String {
    game.labels()
        .and_then(|l| l.actions.as_ref())
        .map(|acts| acts[i][a].clone())
        .unwrap_or_else(|| format!("a{a}"))
}

fn state_name(game: &Game, s: usize) -> String {
    game.labels()
        .and_then(|l| l.states.as_ref())
        .map(|st| st[s].clone())
        .unwrap_or_else(|| format!("s{s}"))
}

fn describe(game: &Game, which: Inequality) -> String {
    match which {
        Inequality::Action { player, action } => format!(
            "EU({p}) >= EU({p} plays {a})",
            p = player_name(game, player),
            a = action_name(game, player, action)
        ),
        Inequality::State { player, state } => format!(
            "ER({p}) >= ER({p} | {s})",
            p = player_name(game, player),
            s = state_name(game, state)
        ),
    }
}

fn weights(values: &[f64]) -> String {
    values.iter().map(|w| format!("{w:.9}")).collect::<Vec<_>>().join(", ")
}

fn print_profile(game: &Game, profile: &CompleteProfile) {
    for i in 0..game.n_players() {
        println!(
            "  {}: strategy [{}]  prior [{}]",
            player_name(game, i),
            weights(profile.strategies[i].weights()),
            weights(profile.priors[i].weights())
        );
    }
}

fn print_values(game: &Game, report: &EquilibriumReport) {
    for i in 0..game.n_players() {
        println!(
            "  {}: EU = {:.9}  ER = {:.9}",
            player_name(game, i),
            report.eu_values[i],
            report.er_values[i]
        );
    }
}

fn print_table(game: &Game, table: &EffectiveTable) {
    let header: Vec<String> = (0..table.n_states).map(|s| format!("{:>10}", state_name(game, s))).collect();
    println!("    {:>10}{}", "", header.join(""));
    for a in 0..table.n_actions {
        let cells: Vec<String> = table.row(a).iter().map(|v| format!("{v:>10.6}")).collect();
        println!("    {:>10}{}", action_name(game, table.player, a), cells.join(""));
    }
}
