//! The JSON files under `fixtures/` must match the in-code generators.

use std::path::PathBuf;

use exteq::bayes_gw::gw_exact_equilibrium;
use exteq::io::{game_to_json, load_game, load_profile, parse_game};
use exteq::{fixtures, CompleteProfile};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn game_files_match_generators() {
    for (name, game) in fixtures::fixture_games() {
        let loaded = load_game(fixture(&format!("{name}.json"))).unwrap();
        assert_eq!(loaded, game, "{name}");
        let text = serde_json::to_string(&game_to_json(&loaded)).unwrap();
        assert_eq!(parse_game(&text).unwrap(), game);
    }
}

#[test]
fn profile_files_match_generators() {
    let (gw_star, _) = gw_exact_equilibrium();
    assert_eq!(load_profile(fixture("gw_star.json")).unwrap(), gw_star);
    assert_eq!(
        load_profile(fixture("single_player_irregular_star.json")).unwrap(),
        fixtures::single_player_irregular_equilibrium()
    );
    assert_eq!(
        load_profile(fixture("uniform.json")).unwrap(),
        CompleteProfile::uniform(&fixtures::gw_game())
    );
}
