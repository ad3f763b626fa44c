//! Search results set against the closed forms of [`crate::oracles`], for
//! the contract kinds that have one.

use std::collections::BTreeSet;

use crate::contracts::ContractKind;
use crate::engine::{AdversaryModel, MevReport};
use crate::model::{AccountId, BlockchainState, TokenId, Value};
use crate::oracles::{self, ClosedFormResult, OracleError};
use crate::rational::{amount, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    Differs,
    /// The closed form is an upper bound and the search stays below it.
    WithinBound,
    ExceedsBound,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Equal => "equal",
            Relation::Differs => "differs",
            Relation::WithinBound => "within bound",
            Relation::ExceedsBound => "exceeds bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    pub quantity: &'static str,
    pub closed_form: ClosedFormResult,
    pub search: Rational,
    pub search_lower_bound: bool,
    pub relation: Relation,
    /// `search - closed_form`.
    pub gap: Rational,
}

impl Comparison {
    fn new(quantity: &'static str, closed_form: ClosedFormResult, search: Rational, search_lower_bound: bool) -> Self {
        let relation = if closed_form.is_upper_bound {
            if search <= closed_form.value {
                Relation::WithinBound
            } else {
                Relation::ExceedsBound
            }
        } else if search == closed_form.value {
            Relation::Equal
        } else {
            Relation::Differs
        };
        let gap = search - closed_form.value;
        Comparison { quantity, closed_form, search, search_lower_bound, relation, gap }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleComparison {
    /// Kind of the analysed contract, or `None` when no closed form applies.
    pub family: Option<&'static str>,
    pub parameters: Vec<(&'static str, Rational)>,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
}

fn price_notes(state: &BlockchainState, tokens: &[&TokenId], notes: &mut Vec<String>) {
    for t in tokens {
        if state.prices().price(t) != Some(int(1)) {
            notes.push(format!("the closed form assumes unit prices but {t} is not priced at 1"));
        }
    }
}

fn held(state: &BlockchainState, accounts: &BTreeSet<AccountId>, token: &TokenId) -> Rational {
    accounts.iter().map(|a| amount(state.balance(a, token))).sum()
}

/// Reads the closed-form parameters off `state` for the single contract in
/// `delta` and compares them with `report`.
pub fn compare(
    state: &BlockchainState,
    delta: &BTreeSet<AccountId>,
    adv: &AdversaryModel,
    report: &MevReport,
) -> Result<OracleComparison, OracleError> {
    let mut out = OracleComparison { family: None, parameters: Vec::new(), comparisons: Vec::new(), notes: Vec::new() };
    let mut it = delta.iter();
    let (Some(id), None) = (it.next(), it.next()) else {
        out.notes.push("closed forms cover a single new contract".into());
        return Ok(out);
    };
    let Some(contract) = state.contract(id) else { return Ok(out) };
    let unrestricted = report.unrestricted.value;
    let restricted = report.restricted.value;
    let lower = report.unrestricted.lower_bound;
    let lower_r = report.restricted.lower_bound;
    let push = |out: &mut OracleComparison, q, cf: ClosedFormResult, v, lb| {
        out.comparisons.push(Comparison::new(q, cf, v, lb));
    };

    match contract.kind.as_ref() {
        ContractKind::Airdrop { token } => {
            out.family = Some("airdrop");
            let n = amount(state.balance(id, token));
            out.parameters.push(("n", n));
            price_notes(state, &[token], &mut out.notes);
            push(&mut out, "unrestricted", ClosedFormResult::exact(n, "any sender"), unrestricted, lower);
            push(&mut out, "restricted", ClosedFormResult::exact(n, "any sender"), restricted, lower_r);
            push(&mut out, "interference", ClosedFormResult::exact(int(0), "any sender"), report.interference, false);
        }
        ContractKind::AirdropFee { token, fee_manager } => {
            out.family = Some("airdrop_fee");
            let n = state.balance(id, token);
            let fee = state.contract(fee_manager).and_then(|c| c.get("feeRate")).and_then(Value::as_int).unwrap_or(0);
            out.parameters.push(("n", amount(n)));
            out.parameters.push(("fee_rate", int(fee)));
            price_notes(state, &[token], &mut out.notes);
            let v = oracles::fee_interference(n, fee)?;
            push(&mut out, "interference", ClosedFormResult::exact(v, "floor fee"), report.interference, false);
        }
        ContractKind::Exchange { tin, tout, .. } => {
            out.family = Some("exchange");
            let rate = contract.get("rate").and_then(Value::as_rational).unwrap_or(int(0));
            let n_m = held(state, &adv.accounts, tin);
            let airdrops: BTreeSet<AccountId> = state
                .contracts()
                .iter()
                .filter(|(c, inst)| !delta.contains(*c) && matches!(inst.kind.as_ref(), ContractKind::Airdrop { token } if token == tin))
                .map(|(c, _)| c.clone())
                .collect();
            let n_a = held(state, &airdrops, tin);
            let n_e = amount(state.balance(id, tout));
            out.parameters.extend([("n_M", n_m), ("n_A", n_a), ("n_E", n_e), ("rate", rate)]);
            price_notes(state, &[tin, tout], &mut out.notes);
            let (u, r) = oracles::exchange_mev(n_m, n_a, n_e, rate)?;
            push(&mut out, "unrestricted", u, unrestricted, lower);
            push(&mut out, "restricted", r, restricted, lower_r);
            let i = oracles::exchange_interference(n_m, n_a, n_e, rate)?;
            push(&mut out, "interference", i, report.interference, false);
        }
        ContractKind::Bet { oracle, native, token, rate, .. } => {
            out.family = Some("bet");
            let r0 = amount(state.balance(oracle, native));
            let r1 = amount(state.balance(oracle, token));
            let b = amount(state.balance(id, native));
            let m = held(state, &adv.accounts, native);
            out.parameters.extend([("r0", r0), ("r1", r1), ("b", b), ("m", m), ("rate", *rate)]);
            price_notes(state, &[native, token], &mut out.notes);
            push(&mut out, "restricted", oracles::bet_mev_restricted(b, r0, r1, *rate)?, restricted, lower_r);
            if m >= b {
                let u = oracles::bet_mev_unrestricted_bound(m, b, r0, r1, *rate)?;
                push(&mut out, "unrestricted", u, unrestricted, lower);
            } else {
                out.notes.push("the adversary cannot cover the pot, so no unrestricted bound applies".into());
            }
        }
        ContractKind::Lp { oracle, cmin } => {
            out.family = Some("lp");
            let Some(ContractKind::Amm { t0, t1 }) = state.contract(oracle).map(|c| c.kind.as_ref()) else {
                out.notes.push(format!("oracle {oracle} is not an AMM"));
                return Ok(out);
            };
            let n = held(state, &adv.accounts, t0);
            let r = amount(state.balance(oracle, t0));
            if r != amount(state.balance(oracle, t1)) {
                out.notes.push("the closed form assumes balanced AMM reserves".into());
            }
            out.parameters.extend([("n", n), ("r", r), ("cmin", *cmin)]);
            price_notes(state, &[t0, t1], &mut out.notes);
            let x = oracles::lp_optimal_x(n, r)?;
            out.parameters.push(("x_opt", x));
            let (u, rs) = oracles::lp_mev(n, r, *cmin)?;
            push(&mut out, "unrestricted", u, unrestricted, lower);
            push(&mut out, "restricted", rs, restricted, lower_r);
            push(&mut out, "interference", oracles::lp_interference(n, r, *cmin)?, report.interference, false);
        }
        _ => out.notes.push(format!("no closed form for {} contracts", contract.kind.name())),
    }
    Ok(out)
}
