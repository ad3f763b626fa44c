//! Deterministic transition relation: payments, synchronous internal calls,
//! transfers to users, and all-or-nothing revert.

use std::fmt;

use crate::contracts;
use crate::model::{AccountId, Amount, BlockchainState, Payment, TokenId, Transaction, Value};

/// Internal calls cannot nest deeper than this; acyclic dependencies make it
/// unreachable in well-formed states.
const MAX_CALL_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallContext {
    pub sender: AccountId,
    pub origin: AccountId,
    pub payments: Vec<Payment>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExecutionEvent {
    Call { sender: AccountId, callee: AccountId, function: String, args: Vec<Value> },
    Transfer { from: AccountId, to: AccountId, amount: Amount, token: TokenId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Committed,
    Reverted(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub events: Vec<ExecutionEvent>,
    pub outcome: Outcome,
}

impl ExecutionTrace {
    pub fn committed(&self) -> bool {
        self.outcome == Outcome::Committed
    }
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub state: BlockchainState,
    pub trace: ExecutionTrace,
    /// Return value of the outermost call, if committed.
    pub output: Option<Value>,
}

/// Model bugs. These are never produced by ordinary guard failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Fault {
    #[error("{caller} called {callee}, which is not among its static dependencies")]
    UndeclaredCall { caller: AccountId, callee: AccountId },
    #[error("{from} attempted a direct transfer to contract {to}")]
    TransferToContract { from: AccountId, to: AccountId },
    #[error("call to unknown contract {0}")]
    UnknownCallee(AccountId),
    #[error("transaction signer {0} is not a user account")]
    SignerNotUser(AccountId),
    #[error("total supply of {0} changed during execution")]
    SupplyChanged(TokenId),
    #[error("call depth limit exceeded")]
    DepthExceeded,
}

#[derive(Debug)]
pub(crate) enum Abort {
    Revert(String),
    Fault(Fault),
}

impl From<Fault> for Abort {
    fn from(f: Fault) -> Self {
        Abort::Fault(f)
    }
}

pub(crate) type Step<T> = Result<T, Abort>;

pub(crate) fn revert<T>(reason: impl fmt::Display) -> Step<T> {
    Err(Abort::Revert(reason.to_string()))
}

pub(crate) fn require(cond: bool, reason: &str) -> Step<()> {
    if cond {
        Ok(())
    } else {
        revert(format!("require: {reason}"))
    }
}

/// A call issued against a state, with an explicit payer. Transactions use
/// the signer as sender, origin and payer; the property harness varies the
/// sender alone.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub sender: AccountId,
    pub origin: AccountId,
    pub payer: AccountId,
    pub callee: AccountId,
    pub function: String,
    pub args: Vec<Value>,
    pub payments: Vec<Payment>,
}

impl From<&Transaction> for Invocation {
    fn from(tx: &Transaction) -> Self {
        Invocation {
            sender: tx.signer.clone(),
            origin: tx.signer.clone(),
            payer: tx.signer.clone(),
            callee: tx.callee.clone(),
            function: tx.function.to_string(),
            args: tx.args.clone(),
            payments: tx.payments.clone(),
        }
    }
}

pub fn execute(state: &BlockchainState, tx: &Transaction) -> Result<Execution, Fault> {
    if !tx.signer.is_user() {
        return Err(Fault::SignerNotUser(tx.signer.clone()));
    }
    invoke(state, &Invocation::from(tx))
}

/// Folds [`execute`] left to right; reverted transactions leave the state
/// unchanged and the fold continues.
pub fn execute_sequence(
    state: &BlockchainState,
    txs: &[Transaction],
) -> Result<(BlockchainState, Vec<ExecutionTrace>), Fault> {
    let mut current = state.clone();
    let mut traces = Vec::with_capacity(txs.len());
    for tx in txs {
        let ex = execute(&current, tx)?;
        current = ex.state;
        traces.push(ex.trace);
    }
    Ok((current, traces))
}

pub fn invoke(state: &BlockchainState, inv: &Invocation) -> Result<Execution, Fault> {
    let mut m = Machine { state: state.clone(), events: Vec::new(), depth: 0 };
    let ctx = CallContext { sender: inv.sender.clone(), origin: inv.origin.clone(), payments: inv.payments.clone() };
    match m.call(&inv.payer, ctx, &inv.callee, &inv.function, &inv.args) {
        Ok(output) => {
            m.check_conservation(state)?;
            Ok(Execution {
                state: m.state,
                trace: ExecutionTrace { events: m.events, outcome: Outcome::Committed },
                output,
            })
        }
        Err(Abort::Revert(reason)) => Ok(Execution {
            state: state.clone(),
            trace: ExecutionTrace { events: m.events, outcome: Outcome::Reverted(reason) },
            output: None,
        }),
        Err(Abort::Fault(f)) => Err(f),
    }
}

/// Runs a read-only call and returns its result, or `None` if it reverts.
pub fn view(
    state: &BlockchainState,
    caller: &AccountId,
    callee: &AccountId,
    function: &str,
    args: &[Value],
) -> Result<Option<Value>, Fault> {
    let inv = Invocation {
        sender: caller.clone(),
        origin: caller.clone(),
        payer: caller.clone(),
        callee: callee.clone(),
        function: function.to_string(),
        args: args.to_vec(),
        payments: Vec::new(),
    };
    let ex = invoke(state, &inv)?;
    Ok(if ex.trace.committed() { ex.output } else { None })
}

pub(crate) struct Machine {
    pub(crate) state: BlockchainState,
    events: Vec<ExecutionEvent>,
    depth: usize,
}

impl Machine {
    fn check_conservation(&self, before: &BlockchainState) -> Result<(), Fault> {
        let totals = self.state.current_totals();
        for (t, recorded) in before.supply() {
            if totals.get(t).copied().unwrap_or(0) != *recorded {
                return Err(Fault::SupplyChanged(t.clone()));
            }
        }
        if let Some(t) = totals.keys().find(|t| !before.supply().contains_key(*t)) {
            return Err(Fault::SupplyChanged(t.clone()));
        }
        Ok(())
    }

    fn move_tokens(&mut self, from: &AccountId, to: &AccountId, amount: Amount, token: &TokenId) -> Step<()> {
        if amount == 0 {
            // Zero transfers must not materialise empty user wallets.
            self.events.push(ExecutionEvent::Transfer { from: from.clone(), to: to.clone(), amount, token: token.clone() });
            return Ok(());
        }
        let src = match self.state.wallet_mut(from) {
            Some(w) => w,
            None => return Err(Fault::UnknownCallee(from.clone()).into()),
        };
        if src.debit(token, amount).is_none() {
            return revert(format!("insufficient balance: {from} holds less than {amount}:{token}"));
        }
        let dst = self.state.wallet_mut(to).ok_or_else(|| Fault::UnknownCallee(to.clone()))?;
        dst.credit(token, amount).ok_or_else(|| Abort::Revert("balance overflow".into()))?;
        self.events.push(ExecutionEvent::Transfer { from: from.clone(), to: to.clone(), amount, token: token.clone() });
        Ok(())
    }

    fn call(
        &mut self,
        payer: &AccountId,
        ctx: CallContext,
        callee: &AccountId,
        function: &str,
        args: &[Value],
    ) -> Step<Option<Value>> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(Fault::DepthExceeded.into());
        }
        let kind = match self.state.contract(callee) {
            Some(c) => c.kind.clone(),
            None => return Err(Fault::UnknownCallee(callee.clone()).into()),
        };
        self.events.push(ExecutionEvent::Call {
            sender: ctx.sender.clone(),
            callee: callee.clone(),
            function: function.to_string(),
            args: args.to_vec(),
        });
        for p in &ctx.payments {
            self.move_tokens(payer, callee, p.amount, &p.token)?;
        }
        self.depth += 1;
        let mut frame = Frame { machine: self, me: callee.clone(), ctx };
        let out = contracts::dispatch(&kind, &mut frame, function, args);
        self.depth -= 1;
        out
    }
}

/// The view of the machine available to a running contract behavior.
pub(crate) struct Frame<'a> {
    machine: &'a mut Machine,
    me: AccountId,
    pub(crate) ctx: CallContext,
}

impl Frame<'_> {
    pub(crate) fn sender(&self) -> &AccountId {
        &self.ctx.sender
    }

    pub(crate) fn block_number(&self) -> u64 {
        self.machine.state.env.block_number
    }

    pub(crate) fn balance(&self, token: &TokenId) -> Amount {
        self.machine.state.balance(&self.me, token)
    }

    pub(crate) fn get(&self, key: &str) -> Value {
        self.machine
            .state
            .contract(&self.me)
            .and_then(|c| c.get(key))
            .cloned()
            .unwrap_or(Value::Null)
    }

    pub(crate) fn set(&mut self, key: &str, value: Value) {
        if let Some(c) = self.machine.state.contract_mut(&self.me) {
            c.storage.insert(key.into(), value);
        }
    }

    /// Sum of attached payments in `token`; payments in any other token make
    /// the call revert.
    pub(crate) fn paid_only(&self, token: &TokenId) -> Step<Amount> {
        let mut total: Amount = 0;
        for p in &self.ctx.payments {
            if &p.token != token {
                return revert(format!("unexpected payment in {}", p.token));
            }
            total = total.checked_add(p.amount).ok_or_else(|| Abort::Revert("payment overflow".into()))?;
        }
        Ok(total)
    }

    /// Direct transfers may only target user accounts.
    pub(crate) fn transfer(&mut self, to: &AccountId, amount: Amount, token: &TokenId) -> Step<()> {
        if !to.is_user() {
            return Err(Fault::TransferToContract { from: self.me.clone(), to: to.clone() }.into());
        }
        let me = self.me.clone();
        self.machine.move_tokens(&me, to, amount, token)
    }

    pub(crate) fn call(
        &mut self,
        callee: &AccountId,
        function: &str,
        args: &[Value],
        payments: Vec<Payment>,
    ) -> Step<Option<Value>> {
        let declared = self
            .machine
            .state
            .contract(&self.me)
            .map(|c| c.static_deps.contains(callee))
            .unwrap_or(false);
        if !declared {
            return Err(Fault::UndeclaredCall { caller: self.me.clone(), callee: callee.clone() }.into());
        }
        let ctx = CallContext { sender: self.me.clone(), origin: self.ctx.origin.clone(), payments };
        let me = self.me.clone();
        self.machine.call(&me, ctx, callee, function, args)
    }
}
