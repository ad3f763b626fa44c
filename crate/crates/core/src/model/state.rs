use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::Zero;

use super::{AccountId, Amount, ModelError, TokenId, Value, Wallet};
use crate::contracts::ContractKind;
use crate::rational::{self, Rational};

pub type Storage = BTreeMap<Arc<str>, Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractInstance {
    pub wallet: Wallet,
    pub storage: Storage,
    pub kind: Arc<ContractKind>,
    pub static_deps: Arc<BTreeSet<AccountId>>,
    pub declared_sender_agnostic: bool,
}

impl ContractInstance {
    /// Storage starts from the kind's constructor values; dependencies and the
    /// sender-agnosticism declaration are derived from the kind.
    pub fn new(kind: ContractKind, wallet: Wallet) -> Self {
        let storage = kind.initial_storage();
        let static_deps = kind.references();
        let declared_sender_agnostic = kind.declared_sender_agnostic();
        ContractInstance {
            wallet,
            storage,
            kind: Arc::new(kind),
            static_deps: Arc::new(static_deps),
            declared_sender_agnostic,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.storage.get(key)
    }

    pub fn with_storage(mut self, key: &str, value: Value) -> Self {
        self.storage.insert(Arc::from(key), value);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PriceTable(BTreeMap<TokenId, Rational>);

impl PriceTable {
    pub fn new() -> Self {
        PriceTable(BTreeMap::new())
    }

    pub fn with(mut self, token: &TokenId, price: Rational) -> Result<Self, ModelError> {
        self.insert(token, price)?;
        Ok(self)
    }

    pub fn insert(&mut self, token: &TokenId, price: Rational) -> Result<(), ModelError> {
        if price <= Rational::zero() {
            return Err(ModelError::NonPositivePrice(token.clone()));
        }
        self.0.insert(token.clone(), price);
        Ok(())
    }

    pub fn price(&self, token: &TokenId) -> Option<Rational> {
        self.0.get(token).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TokenId, &Rational)> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Environment {
    pub block_number: u64,
}

/// Users' wallets, contract states, environment and the constant price table.
///
/// The per-token total supply is recorded whenever accounts are added or
/// removed; execution never changes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockchainState {
    users: BTreeMap<AccountId, Wallet>,
    contracts: BTreeMap<AccountId, ContractInstance>,
    pub env: Environment,
    prices: Arc<PriceTable>,
    supply: Arc<BTreeMap<TokenId, u128>>,
}

// Prices, supply, kinds and dependency sets are fixed for the lifetime of a
// search, so hashing the mutable parts is enough.
impl Hash for BlockchainState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.env.hash(state);
        for (id, w) in &self.users {
            id.hash(state);
            w.hash(state);
        }
        for (id, c) in &self.contracts {
            id.hash(state);
            c.wallet.hash(state);
            c.storage.hash(state);
        }
    }
}

/// `M[3:T] | Airdrop[2:T]`, users first, then contracts with their
/// storage after a semicolon.
impl fmt::Display for BlockchainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.users.iter().map(|(id, w)| format!("{id}{w}")).collect();
        for (id, c) in &self.contracts {
            let w = c.wallet.to_string();
            let body = &w[1..w.len() - 1];
            let fields: Vec<String> = c.storage.iter().map(|(k, v)| format!("{k}={v}")).collect();
            if fields.is_empty() {
                parts.push(format!("{id}[{body}]"));
            } else if body.is_empty() {
                parts.push(format!("{id}[{}]", fields.join(", ")));
            } else {
                parts.push(format!("{id}[{body}; {}]", fields.join(", ")));
            }
        }
        f.write_str(&parts.join(" | "))
    }
}

impl BlockchainState {
    pub fn new(prices: PriceTable, env: Environment) -> Self {
        BlockchainState {
            users: BTreeMap::new(),
            contracts: BTreeMap::new(),
            env,
            prices: Arc::new(prices),
            supply: Arc::new(BTreeMap::new()),
        }
    }

    pub fn with_user(mut self, id: AccountId, wallet: Wallet) -> Result<Self, ModelError> {
        self.insert_user(id, wallet)?;
        Ok(self)
    }

    pub fn with_contract(mut self, id: AccountId, instance: ContractInstance) -> Result<Self, ModelError> {
        self.insert_contract(id, instance)?;
        Ok(self)
    }

    pub fn insert_user(&mut self, id: AccountId, wallet: Wallet) -> Result<(), ModelError> {
        if !id.is_user() {
            return Err(ModelError::NotAUser(id));
        }
        if self.users.contains_key(&id) {
            return Err(ModelError::DuplicateAccount(id));
        }
        self.users.insert(id, wallet);
        self.record_supply();
        Ok(())
    }

    pub fn insert_contract(&mut self, id: AccountId, instance: ContractInstance) -> Result<(), ModelError> {
        if !id.is_contract() {
            return Err(ModelError::NotAContract(id));
        }
        if self.contracts.contains_key(&id) {
            return Err(ModelError::DuplicateAccount(id));
        }
        self.contracts.insert(id, instance);
        self.record_supply();
        Ok(())
    }

    pub fn remove_user(&mut self, id: &AccountId) -> Option<Wallet> {
        let w = self.users.remove(id);
        self.record_supply();
        w
    }

    pub fn remove_contract(&mut self, id: &AccountId) -> Option<ContractInstance> {
        let c = self.contracts.remove(id);
        self.record_supply();
        c
    }

    /// Keeps only the named contracts (users, env and prices are kept).
    pub fn restrict_contracts(&self, keep: &BTreeSet<AccountId>) -> BlockchainState {
        let mut out = self.clone();
        out.contracts.retain(|id, _| keep.contains(id));
        out.record_supply();
        out
    }

    fn record_supply(&mut self) {
        self.supply = Arc::new(self.current_totals());
    }

    pub fn current_totals(&self) -> BTreeMap<TokenId, u128> {
        let mut totals: BTreeMap<TokenId, u128> = BTreeMap::new();
        let wallets = self.users.values().chain(self.contracts.values().map(|c| &c.wallet));
        for w in wallets {
            for (t, a) in w.iter() {
                *totals.entry(t.clone()).or_default() += a as u128;
            }
        }
        totals
    }

    pub fn supply(&self) -> &BTreeMap<TokenId, u128> {
        &self.supply
    }

    pub fn supply_of(&self, token: &TokenId) -> u128 {
        self.supply.get(token).copied().unwrap_or(0)
    }

    pub fn prices(&self) -> &PriceTable {
        &self.prices
    }

    pub fn users(&self) -> &BTreeMap<AccountId, Wallet> {
        &self.users
    }

    pub fn contracts(&self) -> &BTreeMap<AccountId, ContractInstance> {
        &self.contracts
    }

    pub fn contract(&self, id: &AccountId) -> Option<&ContractInstance> {
        self.contracts.get(id)
    }

    pub fn contract_mut(&mut self, id: &AccountId) -> Option<&mut ContractInstance> {
        self.contracts.get_mut(id)
    }

    pub fn contract_ids(&self) -> BTreeSet<AccountId> {
        self.contracts.keys().cloned().collect()
    }

    pub fn user_ids(&self) -> BTreeSet<AccountId> {
        self.users.keys().cloned().collect()
    }

    pub fn wallet(&self, id: &AccountId) -> Option<&Wallet> {
        if id.is_user() {
            self.users.get(id)
        } else {
            self.contracts.get(id).map(|c| &c.wallet)
        }
    }

    pub fn balance(&self, id: &AccountId, token: &TokenId) -> Amount {
        self.wallet(id).map(|w| w.balance(token)).unwrap_or(0)
    }

    /// User wallets are created on first credit; contracts must exist.
    pub(crate) fn wallet_mut(&mut self, id: &AccountId) -> Option<&mut Wallet> {
        if id.is_user() {
            Some(self.users.entry(id.clone()).or_default())
        } else {
            self.contracts.get_mut(id).map(|c| &mut c.wallet)
        }
    }

    pub fn tokens(&self) -> BTreeSet<TokenId> {
        self.supply.keys().cloned().collect()
    }

    /// Σ balance·price over the target contracts.
    pub fn wealth(&self, targets: &BTreeSet<AccountId>) -> Result<Rational, ModelError> {
        let mut total = Rational::zero();
        for id in targets {
            let c = self.contracts.get(id).ok_or_else(|| ModelError::UnknownContract(id.clone()))?;
            for (t, a) in c.wallet.iter() {
                let p = self.prices.price(t).ok_or_else(|| ModelError::UnpricedToken(t.clone()))?;
                total += rational::amount(a) * p;
            }
        }
        Ok(total)
    }

    /// Reflexive-transitive closure of `static_deps`.
    pub fn deps(&self, roots: &BTreeSet<AccountId>) -> Result<BTreeSet<AccountId>, ModelError> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<AccountId> = roots.iter().cloned().collect();
        while let Some(id) = stack.pop() {
            if out.contains(&id) {
                continue;
            }
            let c = self.contracts.get(&id).ok_or_else(|| ModelError::UnknownContract(id.clone()))?;
            stack.extend(c.static_deps.iter().cloned());
            out.insert(id);
        }
        Ok(out)
    }

    pub fn check_well_formed(&self) -> Result<(), Violation> {
        for (id, c) in &self.contracts {
            for d in c.static_deps.iter() {
                if !d.is_contract() {
                    return Err(Violation::NonContractDependency { contract: id.clone(), dependency: d.clone() });
                }
                if !self.contracts.contains_key(d) {
                    return Err(Violation::MissingDependency { contract: id.clone(), missing: d.clone() });
                }
            }
        }
        // Depth-first search with colours detects call cycles.
        let mut colour: BTreeMap<&AccountId, u8> = BTreeMap::new();
        for root in self.contracts.keys() {
            if let Some(c) = self.find_cycle(root, &mut colour) {
                return Err(Violation::CyclicDependency { contract: c });
            }
        }
        let totals = self.current_totals();
        if totals != *self.supply {
            let token = totals
                .keys()
                .chain(self.supply.keys())
                .find(|t| totals.get(*t) != self.supply.get(*t))
                .cloned()
                .expect("mismatching maps differ somewhere");
            return Err(Violation::SupplyMismatch {
                recorded: self.supply_of(&token),
                actual: totals.get(&token).copied().unwrap_or(0),
                token,
            });
        }
        for t in totals.keys() {
            if self.prices.price(t).is_none() {
                return Err(Violation::UnpricedToken(t.clone()));
            }
        }
        Ok(())
    }

    fn find_cycle<'a>(&'a self, id: &'a AccountId, colour: &mut BTreeMap<&'a AccountId, u8>) -> Option<AccountId> {
        match colour.get(id) {
            Some(1) => return Some(id.clone()),
            Some(2) => return None,
            _ => {}
        }
        colour.insert(id, 1);
        if let Some(c) = self.contracts.get(id) {
            for d in c.static_deps.iter() {
                if let Some(found) = self.find_cycle(d, colour) {
                    return Some(found);
                }
            }
        }
        colour.insert(id, 2);
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("missing dependency {missing} of {contract}")]
    MissingDependency { contract: AccountId, missing: AccountId },
    #[error("dependency {dependency} of {contract} is not a contract")]
    NonContractDependency { contract: AccountId, dependency: AccountId },
    #[error("cyclic dependency through {contract}")]
    CyclicDependency { contract: AccountId },
    #[error("supply of {token} recorded as {recorded} but wallets hold {actual}")]
    SupplyMismatch { token: TokenId, recorded: u128, actual: u128 },
    #[error("token {0} has no price")]
    UnpricedToken(TokenId),
}
