//! Tokens, accounts, wallets, contract instances, blockchain states and
//! transactions.

mod ids;
mod state;
mod tx;
mod value;
mod wallet;

pub use ids::{AccountId, AccountKind, Amount, TokenId};
pub use state::{BlockchainState, ContractInstance, Environment, PriceTable, Storage, Violation};
pub use tx::{Payment, Transaction};
pub use value::Value;
pub use wallet::Wallet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown contract {0}")]
    UnknownContract(AccountId),
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("{0} is not a user account")]
    NotAUser(AccountId),
    #[error("{0} is not a contract account")]
    NotAContract(AccountId),
    #[error("duplicate account {0}")]
    DuplicateAccount(AccountId),
    #[error("price of {0} must be positive")]
    NonPositivePrice(TokenId),
    #[error("token {0} has no price")]
    UnpricedToken(TokenId),
    #[error("ill-formed state: {0}")]
    IllFormed(#[from] Violation),
    #[error("constructor of {contract} rejected: {reason}")]
    Constructor { contract: AccountId, reason: String },
}
