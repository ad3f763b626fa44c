//! The four small C0 to C3 systems used to probe the stripping lemma, written as
//! fixed scripts over a handful of operations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{arity, unknown, ContractKind};
use crate::model::{
    AccountId, Amount, BlockchainState, ContractInstance, Environment, ModelError, Payment, PriceTable, TokenId,
    Value, Wallet,
};
use crate::rational::int;
use crate::vm::{require, revert, Frame, Step};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    RequireSender(AccountId),
    /// Exactly `amount` of `token` must be attached, or any amount if `None`.
    Accept { token: TokenId, amount: Option<Amount> },
    Transfer { to: AccountId, amount: Amount, token: TokenId },
    Call { target: AccountId, function: String, payment: Option<Payment> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Script {
    pub system: FixtureSystem,
    pub role: String,
    pub functions: BTreeMap<String, Vec<Op>>,
    /// Parameters the script was built from.
    pub token: TokenId,
    pub beneficiary: AccountId,
    pub peers: BTreeMap<String, AccountId>,
}

impl Script {
    pub fn call_targets(&self) -> BTreeSet<AccountId> {
        self.ops()
            .filter_map(|op| match op {
                Op::Call { target, .. } => Some(target.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn checks_sender(&self) -> bool {
        self.ops().any(|op| matches!(op, Op::RequireSender(_)))
    }

    /// The payment a function expects: `Some(Some(a))` for a fixed amount,
    /// `Some(None)` for any amount, `None` for no payment.
    pub fn expected_payment(&self, function: &str) -> Option<(TokenId, Option<Amount>)> {
        self.functions.get(function)?.iter().find_map(|op| match op {
            Op::Accept { token, amount } => Some((token.clone(), *amount)),
            _ => None,
        })
    }

    fn ops(&self) -> impl Iterator<Item = &Op> {
        self.functions.values().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FixtureSystem {
    Stripping,
    TokenDependence,
    SenderAgnosticism,
    Inclusion,
}

impl FixtureSystem {
    pub const ALL: [FixtureSystem; 4] = [
        FixtureSystem::Stripping,
        FixtureSystem::TokenDependence,
        FixtureSystem::SenderAgnosticism,
        FixtureSystem::Inclusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureSystem::Stripping => "stripping",
            FixtureSystem::TokenDependence => "token_dependence",
            FixtureSystem::SenderAgnosticism => "sender_agnosticism",
            FixtureSystem::Inclusion => "inclusion",
        }
    }

    pub fn roles(self) -> &'static [&'static str] {
        match self {
            FixtureSystem::Stripping | FixtureSystem::TokenDependence => &["C0", "C1", "C2", "C3"],
            FixtureSystem::SenderAgnosticism | FixtureSystem::Inclusion => &["C0", "C1"],
        }
    }

    /// Initial balance of each role, in the fixture token.
    pub fn initial_balance(self, role: &str) -> Amount {
        match (self, role) {
            (FixtureSystem::Stripping, "C0" | "C1") => 2,
            (FixtureSystem::TokenDependence, "C0") => 2,
            (FixtureSystem::TokenDependence, "C1" | "C2") => 1,
            (FixtureSystem::SenderAgnosticism | FixtureSystem::Inclusion, "C0") => 1,
            _ => 0,
        }
    }

    /// Target set C and callable set D of the accompanying example.
    pub fn sets(self) -> (Vec<&'static str>, Vec<&'static str>) {
        match self {
            FixtureSystem::Stripping | FixtureSystem::TokenDependence => (vec!["C0", "C1"], vec!["C0", "C1", "C3"]),
            FixtureSystem::SenderAgnosticism => (vec!["C0"], vec!["C0", "C1"]),
            FixtureSystem::Inclusion => (vec!["C0"], vec!["C1"]),
        }
    }

    /// Builds the script for `role`. `peer` maps a role name to the account
    /// playing it.
    pub fn script(
        self,
        role: &str,
        token: &TokenId,
        beneficiary: &AccountId,
        peer: &dyn Fn(&str) -> AccountId,
    ) -> Result<Script, String> {
        let call = |r: &str, function: &str, pay: Option<Amount>| Op::Call {
            target: peer(r),
            function: function.to_string(),
            payment: pay.map(|a| Payment::new(a, token)),
        };
        let send = |amount: Amount| Op::Transfer { to: beneficiary.clone(), amount, token: token.clone() };
        let accept = |amount: Option<Amount>| Op::Accept { token: token.clone(), amount };
        let mut functions: BTreeMap<String, Vec<Op>> = BTreeMap::new();
        match (self, role) {
            (FixtureSystem::Stripping, "C0") => {
                functions.insert("f".into(), vec![accept(Some(1)), send(2)]);
            }
            (FixtureSystem::Stripping, "C1") => {
                functions.insert("f".into(), vec![call("C0", "f", Some(1))]);
            }
            (FixtureSystem::Stripping, "C2") => {
                functions.insert("f".into(), vec![Op::RequireSender(peer("C3")), call("C1", "f", None)]);
            }
            (FixtureSystem::Stripping | FixtureSystem::TokenDependence, "C3") => {
                functions.insert("f".into(), vec![call("C2", "f", None), call("C1", "f", None)]);
            }
            (FixtureSystem::TokenDependence, "C0") => {
                functions.insert("f".into(), vec![accept(Some(2)), send(4)]);
            }
            (FixtureSystem::TokenDependence, "C1") => {
                functions.insert("f".into(), vec![call("C0", "f", Some(2))]);
                functions.insert("receive".into(), vec![accept(None)]);
            }
            (FixtureSystem::TokenDependence, "C2") => {
                functions.insert("f".into(), vec![call("C1", "receive", Some(1))]);
            }
            (FixtureSystem::SenderAgnosticism, "C0") => {
                functions.insert("f".into(), vec![Op::RequireSender(peer("C1")), send(1)]);
            }
            (FixtureSystem::SenderAgnosticism | FixtureSystem::Inclusion, "C1") => {
                functions.insert("f".into(), vec![call("C0", "f", None)]);
            }
            (FixtureSystem::Inclusion, "C0") => {
                functions.insert("f".into(), vec![send(1)]);
            }
            _ => return Err(format!("system {} has no role {role}", self.name())),
        }
        let peers = self.roles().iter().map(|r| (r.to_string(), peer(r))).collect();
        Ok(Script {
            system: self,
            role: role.to_string(),
            functions,
            token: token.clone(),
            beneficiary: beneficiary.clone(),
            peers,
        })
    }

    /// The example state: adversary `M` with an empty wallet and every role
    /// deployed under its own name, holding its listed balance of `T`.
    pub fn build(self) -> Result<FixtureInstance, ModelError> {
        let token = TokenId::new("T");
        let m = AccountId::user("M");
        let prices = PriceTable::new().with(&token, int(1))?;
        let mut state = BlockchainState::new(prices, Environment::default()).with_user(m.clone(), Wallet::new())?;
        let peer = |r: &str| AccountId::contract(r);
        for role in self.roles() {
            let script = self.script(role, &token, &m, &peer).expect("every listed role has a script");
            let wallet = Wallet::of(&[(self.initial_balance(role), &token)]);
            super::deploy(&mut state, AccountId::contract(role), ContractInstance::new(ContractKind::Fixture(script), wallet))?;
        }
        let (targets, callees) = self.sets();
        Ok(FixtureInstance {
            system: self,
            state,
            adversary: m,
            targets: targets.into_iter().map(AccountId::contract).collect(),
            callees: callees.into_iter().map(AccountId::contract).collect(),
        })
    }
}

impl fmt::Display for FixtureSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FixtureSystem::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown fixture system {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct FixtureInstance {
    pub system: FixtureSystem,
    pub state: BlockchainState,
    pub adversary: AccountId,
    pub targets: BTreeSet<AccountId>,
    pub callees: BTreeSet<AccountId>,
}

pub(super) fn dispatch(f: &mut Frame<'_>, script: &Script, function: &str, args: &[Value]) -> Step<Option<Value>> {
    let body = match script.functions.get(function) {
        Some(b) => b,
        None => return unknown(function),
    };
    arity(args, 0)?;
    if !body.iter().any(|op| matches!(op, Op::Accept { .. })) && f.ctx.payments.iter().any(|p| p.amount > 0) {
        return revert("function does not accept payments");
    }
    for op in body {
        match op {
            Op::RequireSender(who) => require(f.sender() == who, &format!("sender == {who}"))?,
            Op::Accept { token, amount } => {
                let paid = f.paid_only(token)?;
                if let Some(expected) = amount {
                    require(paid == *expected, &format!("pays {expected}:{token}"))?;
                }
            }
            Op::Transfer { to, amount, token } => f.transfer(to, *amount, token)?,
            Op::Call { target, function, payment } => {
                let payments = payment.iter().cloned().collect();
                f.call(target, function, &[], payments)?;
            }
        }
    }
    Ok(None)
}
