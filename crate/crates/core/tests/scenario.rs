use std::path::PathBuf;

use mevlab_core::model::{AccountId, BlockchainState};
use mevlab_core::presets;
use mevlab_core::rational::int;
use mevlab_core::scenario::{Scenario, ScenarioError};

fn bundled() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    files
}

fn load(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::load(&path).unwrap()
}

fn line_of(err: ScenarioError) -> usize {
    match err {
        ScenarioError::At { line, .. } => line,
        other => panic!("expected a located error, got {other}"),
    }
}

const HEAD: &str = "adversary = [\"M\"]\ndelta = [\"Airdrop\"]\n\n[tokens.T]\nprice = 1\n\n[users.M]\nwallet = {}\n\n";

#[test]
fn every_bundled_scenario_round_trips() {
    let files = bundled();
    assert!(files.len() >= 10);
    for path in files {
        let scn = Scenario::load(&path).unwrap();
        let again = Scenario::parse(&scn.to_toml()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(scn, again, "{}", path.display());
    }
}

/// Presets price ETH even when no account holds it, so only accounts are compared.
fn same_accounts(a: &BlockchainState, b: &BlockchainState) {
    assert_eq!(a.users(), b.users());
    assert_eq!(a.contracts(), b.contracts());
}

#[test]
fn bundled_states_match_presets() {
    same_accounts(&load("airdrop.scn").state, &presets::airdrop(10).unwrap().state);
    same_accounts(&load("doubler.scn").state, &presets::doubler(true).unwrap().state);
    let bet = load("bet_attack.scn");
    assert_eq!(bet.state, presets::amm_bet(10, 10, 4, 14, int(4)).unwrap().state);
    assert_eq!(bet.transactions.len(), 4);
}

#[test]
fn negative_balance_is_located() {
    let text = format!("{HEAD}[contracts.Airdrop]\nkind = \"airdrop\"\ntoken = \"T\"\nwallet = {{ T = -3 }}\n");
    assert_eq!(line_of(Scenario::parse(&text).unwrap_err()), 13);
}

#[test]
fn unknown_kind_is_located() {
    let text = format!("{HEAD}[contracts.Airdrop]\nkind = \"vault\"\nwallet = {{}}\n");
    assert_eq!(line_of(Scenario::parse(&text).unwrap_err()), 11);
}

#[test]
fn unknown_key_is_rejected() {
    let text = format!("{HEAD}[contracts.Airdrop]\nkind = \"airdrop\"\ntoken = \"T\"\nwallet = {{}}\ncolour = \"red\"\n");
    assert!(Scenario::parse(&text).is_err());
}

#[test]
fn delta_must_name_contracts() {
    let text = HEAD.to_string();
    assert!(Scenario::parse(&text).is_err());
}

#[test]
fn unpriced_token_is_rejected() {
    let text = format!("{HEAD}[contracts.Airdrop]\nkind = \"airdrop\"\ntoken = \"U\"\nwallet = {{ U = 1 }}\n");
    assert!(Scenario::parse(&text).is_err());
}

#[test]
fn transaction_from_unknown_user_is_located() {
    let text = format!(
        "{HEAD}[contracts.Airdrop]\nkind = \"airdrop\"\ntoken = \"T\"\nwallet = {{ T = 1 }}\n\n\
         [[transactions]]\nsigner = \"Z\"\ncallee = \"Airdrop\"\nfunction = \"withdraw\"\nargs = [{{ int = 1 }}]\n"
    );
    assert_eq!(line_of(Scenario::parse(&text).unwrap_err()), 16);
}

#[test]
fn targets_and_callees_default() {
    let scn = load("airdrop.scn");
    assert_eq!(scn.targets(), scn.delta);
    assert_eq!(scn.callees(), scn.state.contract_ids());
    let strip = load("stripping.scn");
    assert!(strip.targets().contains(&AccountId::contract("C0")));
}

#[test]
fn missing_file_is_an_io_error() {
    let err = Scenario::load(std::path::Path::new("/nonexistent/x.scn")).unwrap_err();
    assert!(matches!(err, ScenarioError::Io { .. }));
}
