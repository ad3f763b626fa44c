//! Candidate values suggested by the closed forms, fed to the heuristic grid.

use std::collections::BTreeSet;
use std::fmt;

use crate::contracts::ContractKind;
use crate::model::{AccountId, Amount, BlockchainState, TokenId};
use crate::oracles;
use crate::rational::{self, amount, int, Rational};

use super::AdversaryModel;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hints {
    pub amounts: BTreeSet<Amount>,
    pub rationals: BTreeSet<Rational>,
}

impl Hints {
    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty() && self.rationals.is_empty()
    }

    pub fn merge(&mut self, other: &Hints) {
        self.amounts.extend(other.amounts.iter().copied());
        self.rationals.extend(other.rationals.iter().copied());
    }
}

impl fmt::Display for Hints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.amounts.iter().map(|x| x.to_string()).collect();
        let r: Vec<String> = self.rationals.iter().map(rational::render).collect();
        write!(f, "amounts [{}], rationals [{}]", a.join(", "), r.join(", "))
    }
}

fn amm_reserves(state: &BlockchainState, amm: &AccountId) -> Option<(TokenId, TokenId, Amount, Amount)> {
    match state.contract(amm)?.kind.as_ref() {
        ContractKind::Amm { t0, t1 } => Some((t0.clone(), t1.clone(), state.balance(amm, t0), state.balance(amm, t1))),
        _ => None,
    }
}

fn around(x: &Rational, out: &mut BTreeSet<Amount>) {
    let lo = x.floor().to_integer();
    for k in lo - 1..=lo + 2 {
        if k > 0 {
            out.insert(k as Amount);
        }
    }
}

/// Hints for every LP and Bet contract in `targets` whose oracle is an AMM.
pub fn analytic(state: &BlockchainState, targets: &BTreeSet<AccountId>, adv: &AdversaryModel) -> Hints {
    let mut hints = Hints::default();
    for id in targets {
        let Some(inst) = state.contract(id) else { continue };
        match inst.kind.as_ref() {
            ContractKind::Lp { oracle, .. } => {
                let Some((t0, t1, b0, b1)) = amm_reserves(state, oracle) else { continue };
                for a in &adv.accounts {
                    for (t, r) in [(&t0, b0), (&t1, b1)] {
                        let n = state.balance(a, t);
                        if n == 0 || r == 0 {
                            continue;
                        }
                        if let Ok(x) = oracles::lp_optimal_x(amount(n), amount(r)) {
                            let mut xs = BTreeSet::new();
                            around(&x, &mut xs);
                            for x in xs.iter().copied().filter(|x| *x <= n) {
                                hints.amounts.insert(x);
                                hints.amounts.insert(n - x);
                            }
                            hints.amounts.insert(n);
                        }
                    }
                }
            }
            ContractKind::Bet { oracle, native, rate, .. } => {
                let Some((t0, _, b0, b1)) = amm_reserves(state, oracle) else { continue };
                let (r0, r1) = if &t0 == native { (b0, b1) } else { (b1, b0) };
                let pot = state.balance(id, native);
                if r1 == 0 {
                    continue;
                }
                hints.rationals.insert((amount(r0) / (*rate * amount(r1))).min(int(1)));
                for a in &adv.accounts {
                    let m = state.balance(a, native);
                    if m < pot {
                        continue;
                    }
                    let x = m - pot;
                    if x > 0 {
                        hints.amounts.insert(x);
                    }
                    let y = (x as u128 * r1 as u128 / (r0 as u128 + x as u128)) as Amount;
                    if y < r1 {
                        let p = amount(r0 + x) / (*rate * amount(r1 - y));
                        hints.rationals.insert(p.min(int(1)));
                    }
                }
            }
            _ => {}
        }
    }
    hints
}
