//! Executable checks of the interference and local-MEV properties, the
//! sender-agnosticism and token-independence tests they depend on, and
//! seeded randomised suites over small states.

mod agnostic;
mod flows;
mod properties;
pub mod random;

use std::fmt;

use crate::model::Transaction;

pub use agnostic::{test_sender_agnostic, AgnosticReport};
pub use flows::{compute_token_flows, token_independent, Exploration, TokenFlowSets};
pub use properties::{
    check_basic_interference, check_context_monotonicity, check_front_running_invariance, check_mev_lemmas,
    check_stripping, check_stripping_lemma, check_token_independence, check_wallet_irrelevance, check_zero_wealth,
    HarnessConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Violated,
    /// The search could not finish within budget.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Holds => "holds",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A theorem or lemma precondition and whether it was found to hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// The offending state as scenario text.
    pub scenario: String,
    pub detail: String,
    pub witnesses: Vec<(String, Vec<Transaction>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyVerdict {
    pub property: String,
    pub status: Status,
    pub trials: usize,
    pub exhaustive: bool,
    /// Named quantities computed along the way, in computation order.
    pub values: Vec<(String, String)>,
    pub hypotheses: Vec<Hypothesis>,
    pub notes: Vec<String>,
    pub counterexample: Option<Counterexample>,
}

impl PropertyVerdict {
    pub fn new(property: &str) -> Self {
        PropertyVerdict {
            property: property.to_string(),
            status: Status::Holds,
            trials: 1,
            exhaustive: true,
            values: Vec::new(),
            hypotheses: Vec::new(),
            notes: Vec::new(),
            counterexample: None,
        }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn value(&self, name: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }

    pub(crate) fn record(&mut self, name: &str, value: impl fmt::Display) {
        self.values.push((name.to_string(), value.to_string()));
    }

    pub(crate) fn fail(&mut self, detail: String, scenario: String, witnesses: Vec<(String, Vec<Transaction>)>) {
        if self.status != Status::Violated {
            self.status = Status::Violated;
            self.counterexample = Some(Counterexample { scenario, detail, witnesses });
        }
    }
}
