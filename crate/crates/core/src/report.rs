//! Reports: one canonical JSON document with sorted keys, plus a plain-text
//! rendering of the same content. Nothing in a report depends on timing, so
//! equal inputs give byte-equal output.

use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

use crate::compare::OracleComparison;
use crate::engine::{Lmev, MevReport, SearchBudget};
use crate::harness::PropertyVerdict;
use crate::model::{BlockchainState, Transaction};
use crate::oracles::ClosedFormResult;
use crate::rational::{self, Rational};
use crate::vm::{ExecutionTrace, Outcome};

/// Digits after the point in decimal renderings.
pub const DECIMAL_PLACES: u32 = 6;

pub fn rational_json(r: &Rational) -> Json {
    json!({ "exact": rational::render(r), "decimal": rational::render_decimal(r, DECIMAL_PLACES) })
}

fn rational_text(r: &Rational) -> String {
    let exact = rational::render(r);
    if r.is_integer() {
        exact
    } else {
        format!("{exact} (~{})", rational::render_decimal(r, DECIMAL_PLACES))
    }
}

fn txs_json(txs: &[Transaction]) -> Json {
    Json::Array(txs.iter().map(|t| Json::String(t.to_string())).collect())
}

pub fn scenario_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// What produced a report.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: String,
    pub scenario: Option<String>,
    pub scenario_sha256: String,
    pub seed: u64,
    pub budget: SearchBudget,
    pub workers: usize,
}

/// One step of a replayed sequence.
#[derive(Debug, Clone)]
pub struct ExecStep {
    pub transaction: Transaction,
    pub trace: ExecutionTrace,
    pub state: BlockchainState,
    /// Cumulative wealth lost by Δ up to and including this step.
    pub loss: Rational,
}

#[derive(Debug, Clone)]
pub struct Report {
    body: Map<String, Json>,
    text: Vec<String>,
}

impl Report {
    pub fn new(h: &Header) -> Self {
        let b = &h.budget;
        let budget = json!({
            "mode": b.mode.to_string(),
            "max_states": b.max_states,
            "max_depth": b.max_depth,
            "grid": b.grid,
            "beam": b.beam,
            "exhaustive_supply_bound": b.exhaustive_supply_bound.to_string(),
        });
        let mut body = Map::new();
        body.insert("command".into(), json!(h.command));
        body.insert("scenario".into(), json!(h.scenario));
        body.insert("scenario_sha256".into(), json!(h.scenario_sha256));
        body.insert("seed".into(), json!(h.seed));
        body.insert("workers".into(), json!(h.workers));
        body.insert("budget".into(), budget);
        let text = vec![
            format!("mevlab {} {}", h.command, h.scenario.as_deref().unwrap_or("(unnamed)")),
            format!("scenario sha256 {}", h.scenario_sha256),
            format!(
                "seed {}  workers {}  mode {}  max_states {}  depth {}  grid {}  beam {}",
                h.seed, h.workers, b.mode, b.max_states, b.max_depth, b.grid, b.beam
            ),
        ];
        Report { body, text }
    }

    pub fn json(&self) -> &Map<String, Json> {
        &self.body
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.body).expect("report values serialise");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = self.text.join("\n");
        s.push('\n');
        s
    }

    pub fn exec(&mut self, initial: &BlockchainState, steps: &[ExecStep]) {
        self.text.push(String::new());
        self.text.push(format!("   {initial}"));
        let mut out = Vec::new();
        for (i, s) in steps.iter().enumerate() {
            let (outcome, reason) = match &s.trace.outcome {
                Outcome::Committed => ("committed", None),
                Outcome::Reverted(r) => ("reverted", Some(r.clone())),
            };
            out.push(json!({
                "index": i + 1,
                "transaction": s.transaction.to_string(),
                "outcome": outcome,
                "reason": reason,
                "state": s.state.to_string(),
                "loss": rational_json(&s.loss),
            }));
            let tag = reason.map(|r| format!(" [reverted: {r}]")).unwrap_or_default();
            self.text.push(format!("-> {}{tag}", s.transaction));
            self.text.push(format!("   {}", s.state));
        }
        let total = steps.last().map(|s| s.loss).unwrap_or_default();
        self.text.push(format!("loss of delta: {}", rational_text(&total)));
        self.body.insert("initial_state".into(), json!(initial.to_string()));
        self.body.insert("steps".into(), Json::Array(out));
        self.body.insert("loss".into(), rational_json(&total));
    }

    fn lmev_json(l: &Lmev) -> Json {
        json!({
            "value": rational_json(&l.value),
            "witness": txs_json(&l.witness),
            "mode": l.mode.to_string(),
            "states_explored": l.states_explored,
            "depth": l.depth,
            "lower_bound": l.lower_bound,
        })
    }

    fn lmev_text(&mut self, label: &str, l: &Lmev) {
        let bound = if l.lower_bound { " (lower bound)" } else { "" };
        self.text.push(format!(
            "{label}: {}{bound}  [{} states, depth {}]",
            rational_text(&l.value),
            l.states_explored,
            l.depth
        ));
        for tx in &l.witness {
            self.text.push(format!("    {tx}"));
        }
    }

    /// A single local-MEV search.
    pub fn lmev(&mut self, targets: &[String], callees: &[String], l: &Lmev) {
        self.body.insert("targets".into(), json!(targets));
        self.body.insert("callees".into(), json!(callees));
        self.body.insert("lmev".into(), Self::lmev_json(l));
        self.text.push(String::new());
        self.text.push(format!("targets {{{}}}  callees {{{}}}", targets.join(", "), callees.join(", ")));
        self.lmev_text("lmev", l);
    }

    pub fn mev(&mut self, m: &MevReport) {
        let targets: Vec<String> = m.targets.iter().map(|t| t.to_string()).collect();
        self.body.insert(
            "mev".into(),
            json!({
                "targets": targets,
                "restricted": Self::lmev_json(&m.restricted),
                "unrestricted": Self::lmev_json(&m.unrestricted),
                "interference": rational_json(&m.interference),
                "hints": m.hints.to_string(),
            }),
        );
        self.text.push(String::new());
        self.text.push(format!("delta {{{}}}", targets.join(", ")));
        self.lmev_text("unrestricted", &m.unrestricted);
        self.lmev_text("restricted", &m.restricted);
        self.text.push(format!("interference: {}", rational_text(&m.interference)));
    }

    fn closed_form_json(c: &ClosedFormResult) -> Json {
        json!({
            "value": rational_json(&c.value),
            "case": c.case,
            "upper_bound": c.is_upper_bound,
            "note": c.note,
        })
    }

    pub fn comparison(&mut self, c: &OracleComparison) {
        let params: Map<String, Json> = c.parameters.iter().map(|(k, v)| (k.to_string(), rational_json(v))).collect();
        let rows: Vec<Json> = c
            .comparisons
            .iter()
            .map(|x| {
                json!({
                    "quantity": x.quantity,
                    "closed_form": Self::closed_form_json(&x.closed_form),
                    "search": rational_json(&x.search),
                    "search_lower_bound": x.search_lower_bound,
                    "relation": x.relation.as_str(),
                    "gap": rational_json(&x.gap),
                })
            })
            .collect();
        self.body.insert(
            "oracle_compare".into(),
            json!({ "family": c.family, "parameters": params, "comparisons": rows, "notes": c.notes }),
        );
        self.text.push(String::new());
        match c.family {
            Some(f) => {
                let ps: Vec<String> = c.parameters.iter().map(|(k, v)| format!("{k}={}", rational_text(v))).collect();
                self.text.push(format!("closed form family {f}: {}", ps.join(", ")));
            }
            None => self.text.push("no closed form applies".into()),
        }
        for x in &c.comparisons {
            let kind = if x.closed_form.is_upper_bound { "bound" } else { "exact" };
            self.text.push(format!(
                "{:<13} search {:<18} closed form {} [{}, {kind}]  {}",
                x.quantity,
                rational_text(&x.search),
                rational_text(&x.closed_form.value),
                x.closed_form.case,
                x.relation.as_str()
            ));
            if let Some(n) = &x.closed_form.note {
                self.text.push(format!("    note: {n}"));
            }
        }
        for n in &c.notes {
            self.text.push(format!("note: {n}"));
        }
    }

    pub fn properties(&mut self, verdicts: &[PropertyVerdict]) {
        let list: Vec<Json> = verdicts.iter().map(verdict_json).collect();
        self.body.insert("properties".into(), Json::Array(list));
        self.text.push(String::new());
        for v in verdicts {
            let scope = if v.exhaustive { String::new() } else { " (bounded)".into() };
            self.text.push(format!("{:<40} {}{scope}  trials {}", v.property, v.status, v.trials));
            for (k, val) in &v.values {
                self.text.push(format!("    {k} = {val}"));
            }
            for h in &v.hypotheses {
                let mark = if h.holds { "holds" } else { "fails" };
                self.text.push(format!("    hypothesis {}: {mark}  {}", h.name, h.detail));
            }
            for n in &v.notes {
                self.text.push(format!("    note: {n}"));
            }
            if let Some(c) = &v.counterexample {
                self.text.push(format!("    counterexample: {}", c.detail));
                for (label, txs) in &c.witnesses {
                    let seq: Vec<String> = txs.iter().map(|t| t.to_string()).collect();
                    self.text.push(format!("    {label}: [{}]", seq.join("; ")));
                }
                for line in c.scenario.lines() {
                    self.text.push(format!("    | {line}"));
                }
            }
        }
    }
}

fn verdict_json(v: &PropertyVerdict) -> Json {
    let values: Map<String, Json> = v.values.iter().map(|(k, x)| (k.clone(), json!(x))).collect();
    let hyps: Vec<Json> =
        v.hypotheses.iter().map(|h| json!({ "name": h.name, "holds": h.holds, "detail": h.detail })).collect();
    let counterexample = v.counterexample.as_ref().map(|c| {
        let witnesses: Map<String, Json> = c.witnesses.iter().map(|(k, txs)| (k.clone(), txs_json(txs))).collect();
        json!({ "detail": c.detail, "scenario": c.scenario, "witnesses": witnesses })
    });
    json!({
        "property": v.property,
        "status": v.status.to_string(),
        "trials": v.trials,
        "exhaustive": v.exhaustive,
        "values": values,
        "hypotheses": hyps,
        "notes": v.notes,
        "counterexample": counterexample,
    })
}
