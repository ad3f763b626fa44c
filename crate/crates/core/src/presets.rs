//! Ready-made states for the worked examples: adversary `M`, owner `A`,
//! tokens `T` and `ETH` priced at 1.

use std::collections::BTreeSet;

use crate::contracts::{deploy, ContractKind};
use crate::engine::AdversaryModel;
use crate::model::{AccountId, Amount, BlockchainState, ContractInstance, Environment, ModelError, PriceTable, TokenId, Wallet};
use crate::rational::{int, Rational};

#[derive(Debug, Clone)]
pub struct Preset {
    pub state: BlockchainState,
    pub adversary: AdversaryModel,
    /// Contracts treated as newly deployed.
    pub delta: BTreeSet<AccountId>,
}

pub fn t() -> TokenId {
    TokenId::new("T")
}

pub fn eth() -> TokenId {
    TokenId::new("ETH")
}

pub fn m() -> AccountId {
    AccountId::user("M")
}

pub fn owner() -> AccountId {
    AccountId::user("A")
}

fn base(block: u64) -> Result<BlockchainState, ModelError> {
    let prices = PriceTable::new().with(&t(), int(1))?.with(&eth(), int(1))?;
    Ok(BlockchainState::new(prices, Environment { block_number: block }))
}

fn wallet(entries: &[(Amount, TokenId)]) -> Wallet {
    let mut w = Wallet::new();
    for (a, tok) in entries {
        w.credit(tok, *a).expect("preset balances are small");
    }
    w
}

fn put(state: &mut BlockchainState, name: &str, kind: ContractKind, w: Wallet) -> Result<AccountId, ModelError> {
    let id = AccountId::contract(name);
    deploy(state, id.clone(), ContractInstance::new(kind, w))?;
    Ok(id)
}

fn preset(state: BlockchainState, delta: &[&AccountId]) -> Preset {
    Preset { state, adversary: AdversaryModel::single(&m()), delta: delta.iter().map(|c| (*c).clone()).collect() }
}

pub fn airdrop(n: Amount) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), Wallet::new())?;
    let a = put(&mut s, "Airdrop", ContractKind::Airdrop { token: t() }, wallet(&[(n, t())]))?;
    Ok(preset(s, &[&a]))
}

pub fn airdrop_fee(n: Amount, fee_rate: i128) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), Wallet::new())?.with_user(owner(), Wallet::new())?;
    let fm = put(&mut s, "FeeManager", ContractKind::FeeManager { owner: owner(), fee_rate }, Wallet::new())?;
    let a = put(&mut s, "AirdropFee", ContractKind::AirdropFee { token: t(), fee_manager: fm }, wallet(&[(n, t())]))?;
    Ok(preset(s, &[&a]))
}

/// `M[n_m:T] | Airdrop[n_a:T]` with `Exchange[n_e:ETH]` swapping T for ETH.
pub fn airdrop_exchange(n_m: Amount, n_a: Amount, n_e: Amount, rate: Rational) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), wallet(&[(n_m, t())]))?.with_user(owner(), Wallet::new())?;
    put(&mut s, "Airdrop", ContractKind::Airdrop { token: t() }, wallet(&[(n_a, t())]))?;
    let e = put(
        &mut s,
        "Exchange",
        ContractKind::Exchange { tin: t(), tout: eth(), rate, owner: owner() },
        wallet(&[(n_e, eth())]),
    )?;
    Ok(preset(s, &[&e]))
}

/// `M[0:T]`, optionally `Airdrop[1:T]`, and `Doubler[2:T]` as the new contract.
pub fn doubler(with_airdrop: bool) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), Wallet::new())?;
    if with_airdrop {
        put(&mut s, "Airdrop", ContractKind::Airdrop { token: t() }, wallet(&[(1, t())]))?;
    }
    let d = put(&mut s, "Doubler", ContractKind::Doubler { token: t() }, wallet(&[(2, t())]))?;
    Ok(preset(s, &[&d]))
}

/// `M[m:ETH] | AMM[r0:ETH, r1:T]` with a Bet on the AMM rate holding a pot
/// of `b` ETH; the deadline lies ahead of the current block.
pub fn amm_bet(r0: Amount, r1: Amount, b: Amount, m_eth: Amount, rate: Rational) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), wallet(&[(m_eth, eth())]))?.with_user(owner(), Wallet::new())?;
    let amm = put(&mut s, "AMM", ContractKind::Amm { t0: eth(), t1: t() }, wallet(&[(r0, eth()), (r1, t())]))?;
    let bet = put(
        &mut s,
        "Bet",
        ContractKind::Bet { oracle: amm, native: eth(), token: t(), deadline: 10, rate, owner: owner() },
        wallet(&[(b, eth())]),
    )?;
    Ok(preset(s, &[&bet]))
}

/// `M[n:ETH] | AMM[r:ETH, r:T]` with a lending pool holding `reserve` T.
pub fn amm_lp(n: Amount, r: Amount, cmin: Rational, reserve: Amount) -> Result<Preset, ModelError> {
    let mut s = base(0)?.with_user(m(), wallet(&[(n, eth())]))?;
    let amm = put(&mut s, "AMM", ContractKind::Amm { t0: eth(), t1: t() }, wallet(&[(r, eth()), (r, t())]))?;
    let lp = put(&mut s, "LP", ContractKind::Lp { oracle: amm, cmin }, wallet(&[(reserve, t())]))?;
    Ok(preset(s, &[&lp]))
}
