use std::fmt;
use std::sync::Arc;

use super::{AccountId, Amount, TokenId, Value};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Payment {
    pub amount: Amount,
    pub token: TokenId,
}

impl Payment {
    pub fn new(amount: Amount, token: &TokenId) -> Self {
        Payment { amount, token: token.clone() }
    }
}

impl fmt::Display for Payment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.amount, self.token)
    }
}

/// `signer:callee.function(args)` with attached payments.
///
/// Field order gives the derived `Ord` used to break ties between witnesses:
/// callee, then function, then arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transaction {
    pub callee: AccountId,
    pub function: Arc<str>,
    pub args: Vec<Value>,
    pub payments: Vec<Payment>,
    pub signer: AccountId,
}

impl Transaction {
    pub fn new(signer: &AccountId, callee: &AccountId, function: &str) -> Self {
        Transaction {
            callee: callee.clone(),
            function: Arc::from(function),
            args: Vec::new(),
            payments: Vec::new(),
            signer: signer.clone(),
        }
    }

    pub fn arg(mut self, v: Value) -> Self {
        self.args.push(v);
        self
    }

    pub fn pay(mut self, amount: Amount, token: &TokenId) -> Self {
        self.payments.push(Payment::new(amount, token));
        self
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "{}:{}.{}({})", self.signer, self.callee, self.function, args.join(", "))?;
        if !self.payments.is_empty() {
            let pays: Vec<String> = self.payments.iter().map(|p| p.to_string()).collect();
            write!(f, " pays {}", pays.join(", "))?;
        }
        Ok(())
    }
}
