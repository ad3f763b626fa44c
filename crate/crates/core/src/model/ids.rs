use std::fmt;
use std::sync::Arc;

/// Token balances are natural numbers of token units.
pub type Amount = u64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId(Arc<str>);

impl TokenId {
    /// Panics on an empty symbol; use [`TokenId::parse`] for untrusted input.
    pub fn new(symbol: &str) -> Self {
        Self::parse(symbol).expect("token symbol must be non-empty")
    }

    pub fn parse(symbol: &str) -> Option<Self> {
        if symbol.is_empty() {
            None
        } else {
            Some(TokenId(Arc::from(symbol)))
        }
    }

    pub fn symbol(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccountKind {
    User,
    Contract,
}

/// Field order matters: derived `Ord` compares by name first, which is the
/// ordering used for deterministic witness tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId {
    name: Arc<str>,
    kind: AccountKind,
}

impl AccountId {
    pub fn user(name: &str) -> Self {
        AccountId { name: Arc::from(name), kind: AccountKind::User }
    }

    pub fn contract(name: &str) -> Self {
        AccountId { name: Arc::from(name), kind: AccountKind::Contract }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AccountKind {
        self.kind
    }

    pub fn is_user(&self) -> bool {
        self.kind == AccountKind::User
    }

    pub fn is_contract(&self) -> bool {
        self.kind == AccountKind::Contract
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
