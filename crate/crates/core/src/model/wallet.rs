use std::collections::BTreeMap;
use std::fmt;

use super::{Amount, TokenId};

/// Token balances. Zero balances are never stored, so structural equality
/// coincides with equality of the balance functions.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wallet(BTreeMap<TokenId, Amount>);

impl Wallet {
    pub fn new() -> Self {
        Wallet(BTreeMap::new())
    }

    pub fn of(entries: &[(Amount, &TokenId)]) -> Self {
        let mut w = Wallet::new();
        for (a, t) in entries {
            w.credit(t, *a).expect("wallet literal overflows");
        }
        w
    }

    pub fn balance(&self, token: &TokenId) -> Amount {
        self.0.get(token).copied().unwrap_or(0)
    }

    pub fn set(&mut self, token: &TokenId, amount: Amount) {
        if amount == 0 {
            self.0.remove(token);
        } else {
            self.0.insert(token.clone(), amount);
        }
    }

    /// Returns `None` on overflow.
    pub fn credit(&mut self, token: &TokenId, amount: Amount) -> Option<()> {
        let next = self.balance(token).checked_add(amount)?;
        self.set(token, next);
        Some(())
    }

    /// Returns `None` when the balance is insufficient.
    pub fn debit(&mut self, token: &TokenId, amount: Amount) -> Option<()> {
        let next = self.balance(token).checked_sub(amount)?;
        self.set(token, next);
        Some(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TokenId, Amount)> {
        self.0.iter().map(|(t, a)| (t, *a))
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TokenId> {
        self.0.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Wallet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(t, a)| format!("{a}:{t}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
