//! Scenario files: a TOML description of tokens, users, deployed contracts,
//! the adversary, the new contracts Δ and analysis settings.
//!
//! ```toml
//! adversary = ["M"]
//! delta = ["Airdrop"]
//!
//! [tokens.T]
//! price = 1
//!
//! [users.M]
//! wallet = {}
//!
//! [contracts.Airdrop]
//! kind = "airdrop"
//! token = "T"
//! wallet = { T = 10 }
//!
//! [[transactions]]
//! signer = "M"
//! callee = "Airdrop"
//! function = "withdraw"
//! args = [{ int = 10 }]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::contracts::{deploy, ContractKind, FixtureSystem};
use crate::engine::{AdversaryModel, SearchBudget, SearchMode};
use crate::model::{
    AccountId, Amount, BlockchainState, ContractInstance, Environment, Payment, PriceTable, TokenId, Transaction, Value,
    Wallet,
};
use crate::rational::{self, Rational};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    At { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Analysis settings carried by a scenario. Command-line flags override them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub mode: SearchMode,
    /// Seed heuristic amounts with closed-form optima where they apply.
    pub hints: bool,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    pub grid: Option<usize>,
    pub beam: Option<usize>,
    pub seed: Option<u64>,
    /// Targets of local-MEV checks; defaults to Δ.
    pub targets: Option<BTreeSet<AccountId>>,
    /// Callees of local-MEV checks; defaults to every contract.
    pub callees: Option<BTreeSet<AccountId>>,
    /// Context contracts whose addition is tested for monotonicity.
    pub extra: BTreeSet<AccountId>,
    /// Contracts deployed by the adversary ahead of Δ.
    pub adversary_contracts: BTreeSet<AccountId>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            mode: SearchMode::Exact,
            hints: true,
            max_states: None,
            max_depth: None,
            grid: None,
            beam: None,
            seed: None,
            targets: None,
            callees: None,
            extra: BTreeSet::new(),
            adversary_contracts: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: Option<String>,
    pub description: Option<String>,
    pub state: BlockchainState,
    pub adversary: AdversaryModel,
    pub delta: BTreeSet<AccountId>,
    pub analysis: Analysis,
    /// Sequence replayed by `exec`.
    pub transactions: Vec<Transaction>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
enum RawValue {
    Null,
    Int(i64),
    Rat(String),
    User(String),
    Contract(String),
    Token(String),
    Bool(bool),
    Pair(Box<RawValue>, Box<RawValue>),
    Map(Vec<(RawValue, RawValue)>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawToken {
    price: Spanned<Num>,
    supply: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    #[serde(default)]
    wallet: BTreeMap<String, Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnv {
    #[serde(default)]
    block_number: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContract {
    kind: Spanned<String>,
    #[serde(default)]
    wallet: BTreeMap<String, Spanned<i64>>,
    #[serde(default)]
    storage: BTreeMap<String, Spanned<RawValue>>,
    token: Option<Spanned<String>>,
    tin: Option<Spanned<String>>,
    tout: Option<Spanned<String>>,
    t0: Option<Spanned<String>>,
    t1: Option<Spanned<String>>,
    native: Option<Spanned<String>>,
    owner: Option<Spanned<String>>,
    fee_manager: Option<Spanned<String>>,
    oracle: Option<Spanned<String>>,
    beneficiary: Option<Spanned<String>>,
    rate: Option<Spanned<Num>>,
    cmin: Option<Spanned<Num>>,
    fee_rate: Option<Spanned<i64>>,
    deadline: Option<Spanned<i64>>,
    system: Option<Spanned<String>>,
    role: Option<Spanned<String>>,
    peers: Option<BTreeMap<String, Spanned<String>>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPayment {
    amount: i64,
    token: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransaction {
    signer: Spanned<String>,
    callee: Spanned<String>,
    function: String,
    #[serde(default)]
    args: Vec<Spanned<RawValue>>,
    #[serde(default)]
    pay: Vec<Spanned<RawPayment>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    mode: Option<Spanned<String>>,
    hints: Option<bool>,
    max_states: Option<usize>,
    max_depth: Option<usize>,
    grid: Option<usize>,
    beam: Option<usize>,
    seed: Option<u64>,
    targets: Option<Vec<Spanned<String>>>,
    callees: Option<Vec<Spanned<String>>>,
    extra: Option<Vec<Spanned<String>>>,
    adversary_contracts: Option<Vec<Spanned<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    description: Option<String>,
    adversary: Vec<Spanned<String>>,
    #[serde(default)]
    delta: Vec<Spanned<String>>,
    #[serde(default)]
    env: RawEnv,
    tokens: BTreeMap<String, RawToken>,
    #[serde(default)]
    users: BTreeMap<String, RawUser>,
    #[serde(default)]
    contracts: BTreeMap<String, RawContract>,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    transactions: Vec<RawTransaction>,
}

/// Turns byte spans into line-numbered errors.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError::At { line: self.line(span), message: message.into() })
    }

    fn rational(&self, n: &Spanned<Num>, what: &str) -> Result<Rational, ScenarioError> {
        match n.get_ref() {
            Num::Int(i) => Ok(Rational::from_integer(*i as i128)),
            Num::Text(t) => match rational::parse(t) {
                Ok(r) => Ok(r),
                Err(e) => self.err(n.span(), format!("{what}: {e}")),
            },
        }
    }

    fn amount(&self, n: &Spanned<i64>, what: &str) -> Result<Amount, ScenarioError> {
        if *n.get_ref() < 0 {
            return self.err(n.span(), format!("negative balance {} for {what}", n.get_ref()));
        }
        Ok(*n.get_ref() as Amount)
    }
}

struct Names<'a> {
    src: &'a Source<'a>,
    tokens: &'a BTreeSet<String>,
    users: &'a BTreeSet<String>,
    contracts: &'a BTreeSet<String>,
}

impl Names<'_> {
    fn transaction(&self, raw: &RawTransaction) -> Result<Transaction, ScenarioError> {
        let mut tx = Transaction::new(&self.user(&raw.signer)?, &self.contract(&raw.callee)?, &raw.function);
        for a in &raw.args {
            match self.value(a.get_ref()) {
                Ok(v) => tx.args.push(v),
                Err(e) => return self.src.err(a.span(), e),
            }
        }
        for p in &raw.pay {
            let RawPayment { amount, token } = p.get_ref();
            if !self.tokens.contains(token) {
                return self.src.err(p.span(), format!("undeclared token {token:?} in payment"));
            }
            if *amount < 0 {
                return self.src.err(p.span(), format!("negative payment {amount}"));
            }
            tx.payments.push(Payment::new(*amount as Amount, &TokenId::new(token)));
        }
        Ok(tx)
    }

    fn token(&self, s: &Spanned<String>) -> Result<TokenId, ScenarioError> {
        if self.tokens.contains(s.get_ref()) {
            Ok(TokenId::new(s.get_ref()))
        } else {
            self.src.err(s.span(), format!("undeclared token {:?}", s.get_ref()))
        }
    }

    fn user(&self, s: &Spanned<String>) -> Result<AccountId, ScenarioError> {
        if self.users.contains(s.get_ref()) {
            Ok(AccountId::user(s.get_ref()))
        } else {
            self.src.err(s.span(), format!("{:?} is not a declared user", s.get_ref()))
        }
    }

    fn contract(&self, s: &Spanned<String>) -> Result<AccountId, ScenarioError> {
        if self.contracts.contains(s.get_ref()) {
            Ok(AccountId::contract(s.get_ref()))
        } else {
            self.src.err(s.span(), format!("{:?} is not a declared contract", s.get_ref()))
        }
    }

    fn contracts(&self, list: &[Spanned<String>]) -> Result<BTreeSet<AccountId>, ScenarioError> {
        list.iter().map(|s| self.contract(s)).collect()
    }

    fn wallet(&self, raw: &BTreeMap<String, Spanned<i64>>, owner: &str) -> Result<Wallet, ScenarioError> {
        let mut w = Wallet::new();
        for (tok, amount) in raw {
            if !self.tokens.contains(tok) {
                return self.src.err(amount.span(), format!("undeclared token {tok:?} in the wallet of {owner}"));
            }
            w.set(&TokenId::new(tok), self.src.amount(amount, owner)?);
        }
        Ok(w)
    }

    fn value(&self, raw: &RawValue) -> Result<Value, String> {
        Ok(match raw {
            RawValue::Null => Value::Null,
            RawValue::Int(n) => Value::Int(*n as i128),
            RawValue::Rat(t) => Value::Rat(rational::parse(t).map_err(|e| e.to_string())?),
            RawValue::User(u) if self.users.contains(u) => Value::Account(AccountId::user(u)),
            RawValue::Contract(c) if self.contracts.contains(c) => Value::Account(AccountId::contract(c)),
            RawValue::User(a) | RawValue::Contract(a) => return Err(format!("unknown account {a:?}")),
            RawValue::Token(t) if self.tokens.contains(t) => Value::Token(TokenId::new(t)),
            RawValue::Token(t) => return Err(format!("undeclared token {t:?}")),
            RawValue::Bool(b) => Value::Bool(*b),
            RawValue::Pair(a, b) => Value::pair(self.value(a)?, self.value(b)?),
            RawValue::Map(entries) => {
                let mut m = BTreeMap::new();
                for (k, v) in entries {
                    m.insert(self.value(k)?, self.value(v)?);
                }
                Value::Map(m)
            }
        })
    }
}

const KIND_FIELDS: [(&str, &[&str]); 9] = [
    ("airdrop", &["token"]),
    ("fee_manager", &["owner", "fee_rate"]),
    ("airdrop_fee", &["token", "fee_manager"]),
    ("exchange", &["tin", "tout", "rate", "owner"]),
    ("amm", &["t0", "t1"]),
    ("bet", &["oracle", "native", "token", "deadline", "rate", "owner"]),
    ("lp", &["oracle", "cmin"]),
    ("doubler", &["token"]),
    ("fixture", &["system", "role", "token", "beneficiary", "peers"]),
];

impl RawContract {
    fn present(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("token", self.token.is_some()),
            ("tin", self.tin.is_some()),
            ("tout", self.tout.is_some()),
            ("t0", self.t0.is_some()),
            ("t1", self.t1.is_some()),
            ("native", self.native.is_some()),
            ("owner", self.owner.is_some()),
            ("fee_manager", self.fee_manager.is_some()),
            ("oracle", self.oracle.is_some()),
            ("beneficiary", self.beneficiary.is_some()),
            ("rate", self.rate.is_some()),
            ("cmin", self.cmin.is_some()),
            ("fee_rate", self.fee_rate.is_some()),
            ("deadline", self.deadline.is_some()),
            ("system", self.system.is_some()),
            ("role", self.role.is_some()),
            ("peers", self.peers.is_some()),
        ]
    }

    fn kind(&self, name: &str, n: &Names<'_>) -> Result<ContractKind, ScenarioError> {
        let src = n.src;
        let kind_span = self.kind.span();
        let kind = self.kind.get_ref().as_str();
        let Some((_, fields)) = KIND_FIELDS.iter().find(|(k, _)| *k == kind) else {
            let known: Vec<&str> = KIND_FIELDS.iter().map(|(k, _)| *k).collect();
            return src.err(kind_span, format!("unknown contract kind {kind:?} (known: {})", known.join(", ")));
        };
        for (field, present) in self.present() {
            if present && !fields.contains(&field) {
                return src.err(kind_span.clone(), format!("field {field:?} does not apply to {kind} contract {name}"));
            }
        }
        let need = |field: &str| ScenarioError::At {
            line: src.line(kind_span.clone()),
            message: format!("{kind} contract {name} needs field {field:?}"),
        };
        macro_rules! req {
            ($f:ident) => {
                self.$f.as_ref().ok_or_else(|| need(stringify!($f)))?
            };
        }
        Ok(match kind {
            "airdrop" => ContractKind::Airdrop { token: n.token(req!(token))? },
            "doubler" => ContractKind::Doubler { token: n.token(req!(token))? },
            "fee_manager" => {
                ContractKind::FeeManager { owner: n.user(req!(owner))?, fee_rate: *req!(fee_rate).get_ref() as i128 }
            }
            "airdrop_fee" => {
                ContractKind::AirdropFee { token: n.token(req!(token))?, fee_manager: n.contract(req!(fee_manager))? }
            }
            "exchange" => ContractKind::Exchange {
                tin: n.token(req!(tin))?,
                tout: n.token(req!(tout))?,
                rate: src.rational(req!(rate), "rate")?,
                owner: n.user(req!(owner))?,
            },
            "amm" => ContractKind::Amm { t0: n.token(req!(t0))?, t1: n.token(req!(t1))? },
            "bet" => {
                let deadline = req!(deadline);
                if *deadline.get_ref() < 0 {
                    return src.err(deadline.span(), "deadline must be a block number");
                }
                ContractKind::Bet {
                    oracle: n.contract(req!(oracle))?,
                    native: n.token(req!(native))?,
                    token: n.token(req!(token))?,
                    deadline: *deadline.get_ref() as u64,
                    rate: src.rational(req!(rate), "rate")?,
                    owner: n.user(req!(owner))?,
                }
            }
            "lp" => ContractKind::Lp { oracle: n.contract(req!(oracle))?, cmin: src.rational(req!(cmin), "cmin")? },
            "fixture" => {
                let system_s = req!(system);
                let system: FixtureSystem = match system_s.get_ref().parse() {
                    Ok(s) => s,
                    Err(e) => return src.err(system_s.span(), e),
                };
                let role = req!(role);
                let token = n.token(req!(token))?;
                let beneficiary = n.user(req!(beneficiary))?;
                let mut peers = BTreeMap::new();
                if let Some(raw) = &self.peers {
                    for (r, c) in raw {
                        peers.insert(r.clone(), n.contract(c)?);
                    }
                }
                let peer = |r: &str| peers.get(r).cloned().unwrap_or_else(|| AccountId::contract(r));
                match system.script(role.get_ref(), &token, &beneficiary, &peer) {
                    Ok(script) => ContractKind::Fixture(script),
                    Err(e) => return src.err(role.span(), e),
                }
            }
            _ => unreachable!("kind listed in KIND_FIELDS"),
        })
    }
}

impl Scenario {
    pub fn new(state: BlockchainState, adversary: AdversaryModel, delta: BTreeSet<AccountId>) -> Self {
        Scenario {
            name: None,
            description: None,
            state,
            adversary,
            delta,
            analysis: Analysis::default(),
            transactions: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let src = Source { text };
        let raw: RawScenario = toml::from_str(text).map_err(|e| match e.span() {
            Some(span) => ScenarioError::At { line: src.line(span), message: e.message().to_string() },
            None => ScenarioError::Invalid(e.message().to_string()),
        })?;

        let token_names: BTreeSet<String> = raw.tokens.keys().cloned().collect();
        let user_names: BTreeSet<String> = raw.users.keys().cloned().collect();
        let contract_names: BTreeSet<String> = raw.contracts.keys().cloned().collect();
        if let Some(clash) = user_names.intersection(&contract_names).next() {
            return Err(ScenarioError::Invalid(format!("{clash:?} names both a user and a contract")));
        }
        for name in token_names.iter().chain(&user_names).chain(&contract_names) {
            if name.is_empty() {
                return Err(ScenarioError::Invalid("names must be non-empty".into()));
            }
        }
        let names = Names { src: &src, tokens: &token_names, users: &user_names, contracts: &contract_names };

        let mut prices = PriceTable::new();
        for (t, tok) in &raw.tokens {
            let p = src.rational(&tok.price, "price")?;
            if prices.insert(&TokenId::new(t), p).is_err() {
                return src.err(tok.price.span(), format!("price of {t} must be positive"));
            }
        }
        let mut state = BlockchainState::new(prices, Environment { block_number: raw.env.block_number });
        for (u, user) in &raw.users {
            let w = names.wallet(&user.wallet, u)?;
            state.insert_user(AccountId::user(u), w).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }

        // Deploy in dependency order so constructors can query their oracles.
        let mut kinds = BTreeMap::new();
        for (c, raw_c) in &raw.contracts {
            kinds.insert(c.clone(), raw_c.kind(c, &names)?);
        }
        let mut pending: Vec<&String> = kinds.keys().collect();
        while !pending.is_empty() {
            let ready = pending.iter().position(|c| {
                kinds[*c].references().iter().all(|d| state.contract(d).is_some() || d.name() == c.as_str())
            });
            let Some(i) = ready else {
                let stuck: Vec<&str> = pending.iter().map(|c| c.as_str()).collect();
                return Err(ScenarioError::Invalid(format!("cyclic contract dependencies among {}", stuck.join(", "))));
            };
            let c = pending.remove(i);
            let raw_c = &raw.contracts[c];
            let wallet = names.wallet(&raw_c.wallet, c)?;
            let id = AccountId::contract(c);
            if let Err(e) = deploy(&mut state, id.clone(), ContractInstance::new(kinds[c].clone(), wallet)) {
                return src.err(raw_c.kind.span(), e.to_string());
            }
            if raw_c.storage.is_empty() {
                continue;
            }
            let kind = kinds[c].clone();
            let inst = state.contract_mut(&id).expect("just deployed");
            for (key, v) in &raw_c.storage {
                if !kind.storage_keys().contains(&key.as_str()) {
                    return src.err(v.span(), format!("{} contracts have no storage field {key:?}", kind.name()));
                }
                match names.value(v.get_ref()) {
                    Ok(value) => {
                        inst.storage.insert(key.as_str().into(), value);
                    }
                    Err(e) => return src.err(v.span(), e),
                }
            }
            if let Err(reason) = kind.check_constructor(&id, &state) {
                return src.err(raw_c.kind.span(), format!("storage of {c} rejected: {reason}"));
            }
        }
        state.check_well_formed().map_err(|v| ScenarioError::Invalid(v.to_string()))?;

        for (t, tok) in &raw.tokens {
            if let Some(s) = &tok.supply {
                let actual = state.supply_of(&TokenId::new(t));
                if *s.get_ref() < 0 || *s.get_ref() as u128 != actual {
                    return src.err(s.span(), format!("declared supply {} of {t} differs from the balances, which total {actual}", s.get_ref()));
                }
            }
        }

        let mut adversary = BTreeSet::new();
        for a in &raw.adversary {
            adversary.insert(names.user(a)?);
        }
        let adversary = AdversaryModel::new(adversary).map_err(|e| ScenarioError::Invalid(e.to_string()))?;

        let mut delta = BTreeSet::new();
        for d in &raw.delta {
            if !contract_names.contains(d.get_ref()) {
                return src.err(d.span(), format!("delta member {:?} is not a declared contract", d.get_ref()));
            }
            delta.insert(AccountId::contract(d.get_ref()));
        }
        for (id, c) in state.contracts() {
            if delta.contains(id) {
                continue;
            }
            if let Some(d) = c.static_deps.iter().find(|d| delta.contains(*d)) {
                return Err(ScenarioError::Invalid(format!("context contract {id} depends on new contract {d}")));
            }
        }

        let a = &raw.analysis;
        let mode = match &a.mode {
            None => SearchMode::Exact,
            Some(m) => match m.get_ref().as_str() {
                "exact" => SearchMode::Exact,
                "heuristic" => SearchMode::Heuristic,
                other => return src.err(m.span(), format!("unknown mode {other:?} (exact or heuristic)")),
            },
        };
        let list = |l: &Option<Vec<Spanned<String>>>| l.as_deref().map(|l| names.contracts(l)).transpose();
        let analysis = Analysis {
            mode,
            hints: a.hints.unwrap_or(true),
            max_states: a.max_states,
            max_depth: a.max_depth,
            grid: a.grid,
            beam: a.beam,
            seed: a.seed,
            targets: list(&a.targets)?,
            callees: list(&a.callees)?,
            extra: list(&a.extra)?.unwrap_or_default(),
            adversary_contracts: list(&a.adversary_contracts)?.unwrap_or_default(),
        };

        let transactions = raw.transactions.iter().map(|t| names.transaction(t)).collect::<Result<_, _>>()?;

        Ok(Scenario { name: raw.name, description: raw.description, state, adversary, delta, analysis, transactions })
    }

    /// Search limits from the analysis section over the defaults of its mode.
    pub fn budget(&self) -> SearchBudget {
        let mut b = match self.analysis.mode {
            SearchMode::Exact => SearchBudget::exact(),
            SearchMode::Heuristic => SearchBudget::heuristic(),
        };
        let a = &self.analysis;
        b.max_states = a.max_states.unwrap_or(b.max_states);
        b.max_depth = a.max_depth.unwrap_or(b.max_depth);
        b.grid = a.grid.unwrap_or(b.grid);
        b.beam = a.beam.unwrap_or(b.beam);
        b
    }

    pub fn targets(&self) -> BTreeSet<AccountId> {
        self.analysis.targets.clone().unwrap_or_else(|| self.delta.clone())
    }

    pub fn callees(&self) -> BTreeSet<AccountId> {
        self.analysis.callees.clone().unwrap_or_else(|| self.state.contract_ids())
    }

    /// Canonical TOML text; parsing it gives back an equal scenario.
    pub fn to_toml(&self) -> String {
        let mut root = toml::Table::new();
        if let Some(n) = &self.name {
            root.insert("name".into(), n.clone().into());
        }
        if let Some(d) = &self.description {
            root.insert("description".into(), d.clone().into());
        }
        root.insert("adversary".into(), names(&self.adversary.accounts));
        root.insert("delta".into(), names(&self.delta));
        if self.state.env.block_number != 0 {
            let mut env = toml::Table::new();
            env.insert("block_number".into(), (self.state.env.block_number as i64).into());
            root.insert("env".into(), env.into());
        }

        let mut tokens = toml::Table::new();
        for (t, p) in self.state.prices().iter() {
            let mut tok = toml::Table::new();
            tok.insert("price".into(), rat(p));
            tokens.insert(t.to_string(), tok.into());
        }
        root.insert("tokens".into(), tokens.into());

        let mut users = toml::Table::new();
        for (u, w) in self.state.users() {
            let mut user = toml::Table::new();
            user.insert("wallet".into(), wallet(w));
            users.insert(u.to_string(), user.into());
        }
        root.insert("users".into(), users.into());

        let mut contracts = toml::Table::new();
        for (id, c) in self.state.contracts() {
            let mut t = kind_table(&c.kind);
            t.insert("wallet".into(), wallet(&c.wallet));
            let initial = c.kind.initial_storage();
            let mut storage = toml::Table::new();
            for (k, v) in &c.storage {
                if initial.get(k) != Some(v) {
                    let raw = raw_value(v);
                    storage.insert(k.to_string(), toml::Value::try_from(&raw).expect("storage values serialise"));
                }
            }
            if !storage.is_empty() {
                t.insert("storage".into(), storage.into());
            }
            contracts.insert(id.to_string(), t.into());
        }
        root.insert("contracts".into(), contracts.into());

        let analysis = self.analysis_table();
        if !analysis.is_empty() {
            root.insert("analysis".into(), analysis.into());
        }
        if !self.transactions.is_empty() {
            let txs = self.transactions.iter().map(transaction_table).map(toml::Value::Table).collect();
            root.insert("transactions".into(), toml::Value::Array(txs));
        }
        toml::to_string(&root).expect("scenario tables serialise")
    }

    fn analysis_table(&self) -> toml::Table {
        let a = &self.analysis;
        let mut t = toml::Table::new();
        if a.mode != SearchMode::Exact {
            t.insert("mode".into(), a.mode.to_string().into());
        }
        if !a.hints {
            t.insert("hints".into(), false.into());
        }
        for (k, v) in [("max_states", a.max_states), ("max_depth", a.max_depth), ("grid", a.grid), ("beam", a.beam)] {
            if let Some(v) = v {
                t.insert(k.into(), (v as i64).into());
            }
        }
        if let Some(s) = a.seed {
            t.insert("seed".into(), (s as i64).into());
        }
        if let Some(x) = &a.targets {
            t.insert("targets".into(), names(x));
        }
        if let Some(x) = &a.callees {
            t.insert("callees".into(), names(x));
        }
        if !a.extra.is_empty() {
            t.insert("extra".into(), names(&a.extra));
        }
        if !a.adversary_contracts.is_empty() {
            t.insert("adversary_contracts".into(), names(&a.adversary_contracts));
        }
        t
    }
}

fn names(ids: &BTreeSet<AccountId>) -> toml::Value {
    toml::Value::Array(ids.iter().map(|a| a.to_string().into()).collect())
}

fn rat(r: &Rational) -> toml::Value {
    if r.is_integer() && i64::try_from(*r.numer()).is_ok() {
        (*r.numer() as i64).into()
    } else {
        rational::render(r).into()
    }
}

fn wallet(w: &Wallet) -> toml::Value {
    let mut t = toml::Table::new();
    for (tok, a) in w.iter() {
        t.insert(tok.to_string(), (a as i64).into());
    }
    t.into()
}

fn raw_value(v: &Value) -> RawValue {
    match v {
        Value::Null => RawValue::Null,
        Value::Int(n) => RawValue::Int(*n as i64),
        Value::Rat(r) => RawValue::Rat(rational::render(r)),
        Value::Account(a) if a.is_user() => RawValue::User(a.to_string()),
        Value::Account(a) => RawValue::Contract(a.to_string()),
        Value::Token(t) => RawValue::Token(t.to_string()),
        Value::Bool(b) => RawValue::Bool(*b),
        Value::Pair(a, b) => RawValue::Pair(Box::new(raw_value(a)), Box::new(raw_value(b))),
        Value::Map(m) => RawValue::Map(m.iter().map(|(k, v)| (raw_value(k), raw_value(v))).collect()),
    }
}

fn transaction_table(tx: &Transaction) -> toml::Table {
    let mut t = toml::Table::new();
    t.insert("signer".into(), tx.signer.to_string().into());
    t.insert("callee".into(), tx.callee.to_string().into());
    t.insert("function".into(), tx.function.to_string().into());
    if !tx.args.is_empty() {
        let args = tx.args.iter().map(|a| toml::Value::try_from(raw_value(a)).expect("arguments serialise")).collect();
        t.insert("args".into(), toml::Value::Array(args));
    }
    if !tx.payments.is_empty() {
        let pays = tx
            .payments
            .iter()
            .map(|p| {
                let raw = RawPayment { amount: p.amount as i64, token: p.token.to_string() };
                toml::Value::try_from(raw).expect("payments serialise")
            })
            .collect();
        t.insert("pay".into(), toml::Value::Array(pays));
    }
    t
}

fn kind_table(kind: &ContractKind) -> toml::Table {
    let mut t = toml::Table::new();
    t.insert("kind".into(), kind.name().into());
    let mut put = |k: &str, v: toml::Value| {
        t.insert(k.into(), v);
    };
    let s = |x: &dyn ToString| toml::Value::String(x.to_string());
    match kind {
        ContractKind::Airdrop { token } | ContractKind::Doubler { token } => put("token", s(token)),
        ContractKind::FeeManager { owner, fee_rate } => {
            put("owner", s(owner));
            put("fee_rate", (*fee_rate as i64).into());
        }
        ContractKind::AirdropFee { token, fee_manager } => {
            put("token", s(token));
            put("fee_manager", s(fee_manager));
        }
        ContractKind::Exchange { tin, tout, rate, owner } => {
            put("tin", s(tin));
            put("tout", s(tout));
            put("rate", rat(rate));
            put("owner", s(owner));
        }
        ContractKind::Amm { t0, t1 } => {
            put("t0", s(t0));
            put("t1", s(t1));
        }
        ContractKind::Bet { oracle, native, token, deadline, rate, owner } => {
            put("oracle", s(oracle));
            put("native", s(native));
            put("token", s(token));
            put("deadline", (*deadline as i64).into());
            put("rate", rat(rate));
            put("owner", s(owner));
        }
        ContractKind::Lp { oracle, cmin } => {
            put("oracle", s(oracle));
            put("cmin", rat(cmin));
        }
        ContractKind::Fixture(script) => {
            put("system", s(&script.system));
            put("role", s(&script.role));
            put("token", s(&script.token));
            put("beneficiary", s(&script.beneficiary));
            let renamed: toml::Table = script
                .peers
                .iter()
                .filter(|(r, c)| c.name() != r.as_str())
                .map(|(r, c)| (r.clone(), s(c)))
                .collect();
            if !renamed.is_empty() {
                put("peers", renamed.into());
            }
        }
    }
    t
}
