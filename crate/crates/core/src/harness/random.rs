//! Seeded generator of small random states and the suites that run every
//! property over them.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::properties::{
    check_basic_interference, check_context_monotonicity, check_front_running_invariance, check_mev_lemmas,
    check_stripping_lemma, check_wallet_irrelevance, check_zero_wealth, HarnessConfig,
};
use super::{PropertyVerdict, Status};
use crate::contracts::{deploy, ContractKind};
use crate::engine::{AdversaryModel, EngineError, SearchBudget};
use crate::model::{AccountId, Amount, BlockchainState, ContractInstance, Environment, PriceTable, TokenId, Wallet};
use crate::rational::{frac, int, Rational};

/// Per-token cap on the generated supply.
pub const SUPPLY_CAP: Amount = 8;

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub index: usize,
    pub state: BlockchainState,
    pub adversary: AdversaryModel,
    /// A non-empty suffix of the generated contracts.
    pub delta: BTreeSet<AccountId>,
    /// A standalone contract usable as extra context.
    pub extra: BTreeMap<AccountId, ContractInstance>,
    /// Callee set for the local-MEV checks.
    pub callees: BTreeSet<AccountId>,
}

struct Supply {
    left: BTreeMap<TokenId, Amount>,
}

impl Supply {
    fn take(&mut self, rng: &mut ChaCha8Rng, token: &TokenId, lo: Amount, hi: Amount) -> Amount {
        let left = self.left.entry(token.clone()).or_insert(SUPPLY_CAP);
        let hi = hi.min(*left);
        let a = if lo > hi { hi } else { rng.gen_range(lo..=hi) };
        *left -= a;
        a
    }
}

fn tokens() -> (TokenId, TokenId) {
    (TokenId::new("T"), TokenId::new("U"))
}

fn pick<T: Clone>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.gen_range(0..items.len())].clone()
}

/// Case `index` of the suite seeded with `seed`. With `zero_delta` the new
/// contracts start with empty wallets, except AMMs, which need reserves.
pub fn generate(seed: u64, index: usize, zero_delta: bool) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (t, u) = tokens();
    let m = AccountId::user("M");
    let owner = AccountId::user("A");
    let prices = PriceTable::new()
        .with(&t, pick(&mut rng, &[int(1), int(2)]))
        .and_then(|p| p.with(&u, pick(&mut rng, &[int(1), frac(1, 2)])))
        .and_then(|p| p.with(&TokenId::new("V"), int(1)))
        .expect("positive prices");
    let mut supply = Supply { left: BTreeMap::new() };

    let wallet = |rng: &mut ChaCha8Rng, supply: &mut Supply, entries: &[(&TokenId, Amount, Amount)]| {
        let mut w = Wallet::new();
        for (tok, lo, hi) in entries {
            let a = supply.take(rng, tok, *lo, *hi);
            if a > 0 {
                w.set(tok, a);
            }
        }
        w
    };

    let m_wallet = wallet(&mut rng, &mut supply, &[(&t, 0, 2), (&u, 0, 2)]);
    let mut state = BlockchainState::new(prices, Environment::default())
        .with_user(m.clone(), m_wallet)
        .and_then(|s| s.with_user(owner.clone(), Wallet::new()))
        .expect("fresh users");
    if rng.gen_bool(0.5) {
        let b_wallet = wallet(&mut rng, &mut supply, &[(&t, 1, 3)]);
        state.insert_user(AccountId::user("B"), b_wallet).expect("fresh user");
    }

    let count = rng.gen_range(1..=3);
    let delta_from = rng.gen_range(0..count);
    let mut amm: Option<AccountId> = None;
    let mut ids = Vec::new();
    let mut i = 0;
    while ids.len() < count {
        let in_delta = ids.len() >= delta_from;
        let empty = zero_delta && in_delta;
        let cap = if empty { 0 } else { 2 };
        let id = AccountId::contract(&format!("K{i}"));
        i += 1;
        let choice = rng.gen_range(0..8);
        let tok = pick(&mut rng, &[t.clone(), u.clone()]);
        let placed = match choice {
            0 => Some((ContractKind::Airdrop { token: tok.clone() }, wallet(&mut rng, &mut supply, &[(&tok, 0, cap)]))),
            1 => Some((ContractKind::Doubler { token: tok.clone() }, wallet(&mut rng, &mut supply, &[(&tok, 0, cap)]))),
            2 => {
                let (tin, tout) = if tok == t { (t.clone(), u.clone()) } else { (u.clone(), t.clone()) };
                let rate: Rational = pick(&mut rng, &[frac(1, 2), int(1), int(2)]);
                let who = if rng.gen_bool(0.15) { m.clone() } else { owner.clone() };
                let w = wallet(&mut rng, &mut supply, &[(&tout, 0, cap)]);
                Some((ContractKind::Exchange { tin, tout, rate, owner: who }, w))
            }
            3 if amm.is_none() => {
                let w = wallet(&mut rng, &mut supply, &[(&u, 1, 2), (&t, 1, 2)]);
                (w.balance(&u) > 0 && w.balance(&t) > 0).then(|| (ContractKind::Amm { t0: u.clone(), t1: t.clone() }, w))
            }
            4 if amm.is_some() => {
                let kind = ContractKind::Bet {
                    oracle: amm.clone().expect("checked"),
                    native: u.clone(),
                    token: t.clone(),
                    deadline: 5,
                    rate: pick(&mut rng, &[frac(1, 2), int(1), int(2)]),
                    owner: owner.clone(),
                };
                Some((kind, wallet(&mut rng, &mut supply, &[(&u, 0, cap)])))
            }
            5 if amm.is_some() => {
                let cmin = pick(&mut rng, &[int(1), frac(3, 2)]);
                Some((ContractKind::Lp { oracle: amm.clone().expect("checked"), cmin }, wallet(&mut rng, &mut supply, &[(&t, 0, cap), (&u, 0, cap)])))
            }
            6 if count - ids.len() >= 2 && !in_delta => {
                let who = if rng.gen_bool(0.2) { m.clone() } else { owner.clone() };
                let fee_rate = pick(&mut rng, &[0, 50, 100]);
                Some((ContractKind::FeeManager { owner: who, fee_rate }, Wallet::new()))
            }
            _ => None,
        };
        let Some((kind, w)) = placed else { continue };
        let is_amm = matches!(kind, ContractKind::Amm { .. });
        let is_fee = matches!(kind, ContractKind::FeeManager { .. });
        if deploy(&mut state, id.clone(), ContractInstance::new(kind, w)).is_err() {
            continue;
        }
        if is_amm {
            amm = Some(id.clone());
        }
        ids.push(id.clone());
        if is_fee {
            let follower = AccountId::contract(&format!("K{i}"));
            i += 1;
            let follows_in_delta = ids.len() >= delta_from;
            let cap = if zero_delta && follows_in_delta { 0 } else { 2 };
            let w = wallet(&mut rng, &mut supply, &[(&t, 0, cap)]);
            let kind = ContractKind::AirdropFee { token: t.clone(), fee_manager: id };
            deploy(&mut state, follower.clone(), ContractInstance::new(kind, w)).expect("fee manager deployed");
            ids.push(follower);
        }
    }

    let delta: BTreeSet<AccountId> = ids[delta_from.min(ids.len() - 1)..].iter().cloned().collect();
    let extra_tok = pick(&mut rng, &[t.clone(), u.clone()]);
    let extra_kind = match rng.gen_range(0..3) {
        0 => ContractKind::Airdrop { token: extra_tok.clone() },
        1 => ContractKind::Doubler { token: extra_tok.clone() },
        _ => ContractKind::Airdrop { token: TokenId::new("V") },
    };
    let extra_wallet = match &extra_kind {
        ContractKind::Airdrop { token } | ContractKind::Doubler { token } => wallet(&mut rng, &mut supply, &[(token, 1, 2)]),
        _ => Wallet::new(),
    };
    let mut extra = BTreeMap::new();
    extra.insert(AccountId::contract("X0"), ContractInstance::new(extra_kind, extra_wallet));

    let mut callees: BTreeSet<AccountId> = ids.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
    if callees.is_empty() {
        callees.insert(ids[rng.gen_range(0..ids.len())].clone());
    }

    RandomCase { index, state, adversary: AdversaryModel::single(&m), delta, extra, callees }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    pub harness: HarnessConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let budget = SearchBudget { max_states: 20_000, ..SearchBudget::exact() };
        SuiteConfig {
            seed: 0,
            cases: 200,
            harness: HarnessConfig { budget, flow_states: 5_000, agnostic_trials: 40, seed: 0 },
        }
    }
}

pub const SUITE_PROPERTIES: [&str; 7] = [
    "basic_interference",
    "zero_wealth",
    "context_monotonicity",
    "wallet_irrelevance",
    "front_running_invariance",
    "mev_lemmas",
    "contract_stripping",
];

fn run_case(cfg: &SuiteConfig, index: usize) -> Result<Vec<PropertyVerdict>, EngineError> {
    let h = HarnessConfig { seed: cfg.harness.seed.wrapping_add(index as u64), ..cfg.harness.clone() };
    let case = generate(cfg.seed, index, false);
    let zero = generate(cfg.seed, index, true);
    let state = &case.state;
    let adv = &case.adversary;
    Ok(vec![
        check_basic_interference(state, &case.delta, adv, &h)?,
        check_zero_wealth(&zero.state, &zero.delta, &zero.adversary, &h)?,
        check_context_monotonicity(state, &case.extra, &case.delta, adv, &h)?,
        check_wallet_irrelevance(state, &case.delta, adv, &h)?,
        check_front_running_invariance(state, &case.extra, &case.delta, adv, &h)?,
        check_mev_lemmas(state, &case.delta, &case.callees, adv, &case.extra, &h)?,
        check_stripping_lemma(state, &case.delta, &case.callees, adv, &h)?,
    ])
}

/// Runs every property over `cfg.cases` generated cases. Cases run in
/// parallel; verdicts are merged in case order, so the result depends only
/// on the configuration.
pub fn run_suites(cfg: &SuiteConfig) -> Result<Vec<PropertyVerdict>, EngineError> {
    let per_case: Vec<Vec<PropertyVerdict>> =
        (0..cfg.cases).into_par_iter().map(|i| run_case(cfg, i)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (p, name) in SUITE_PROPERTIES.iter().enumerate() {
        let mut agg = PropertyVerdict::new(name);
        agg.trials = 0;
        let (mut inconclusive, mut vacuous, mut hyps_held) = (0, 0, 0);
        for (i, verdicts) in per_case.iter().enumerate() {
            let v = &verdicts[p];
            match v.status {
                Status::Inconclusive => inconclusive += 1,
                Status::Violated if agg.status != Status::Violated => {
                    agg.status = Status::Violated;
                    let mut cx = v.counterexample.clone().expect("violations carry a counterexample");
                    cx.detail = format!("case {i}: {}", cx.detail);
                    agg.counterexample = Some(cx);
                }
                _ => {}
            }
            if v.trials == 0 {
                vacuous += 1;
            } else {
                agg.trials += 1;
            }
            if !v.hypotheses.is_empty() && v.hypotheses_hold() {
                hyps_held += 1;
            }
        }
        agg.exhaustive = inconclusive == 0;
        agg.record("cases", cfg.cases);
        agg.record("inconclusive", inconclusive);
        if vacuous > 0 {
            agg.record("vacuous", vacuous);
        }
        if per_case.first().is_some_and(|v| !v[p].hypotheses.is_empty()) {
            agg.record("hypotheses held", hyps_held);
        }
        agg.notes.push(format!("seed {}", cfg.seed));
        out.push(agg);
    }
    Ok(out)
}
