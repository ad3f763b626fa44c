use std::collections::{BTreeMap, BTreeSet};

use mevlab_core::compare::compare;
use mevlab_core::engine::{self, hints, CraftPolicy, EngineError, Hints, SearchBudget, SearchMode};
use mevlab_core::harness::random::{run_suites, SuiteConfig};
use mevlab_core::harness::{self, HarnessConfig, PropertyVerdict, Status};
use mevlab_core::model::{AccountId, BlockchainState, ContractInstance};
use mevlab_core::oracles::OracleError;
use mevlab_core::report::{scenario_digest, ExecStep, Header, Report};
use mevlab_core::scenario::{Scenario, ScenarioError};
use mevlab_core::vm;

use crate::{Common, Format, Mode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("closed form: {0}")]
    Oracle(#[from] OracleError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot start worker pool: {0}")]
    Workers(String),
}

pub struct Outcome {
    pub violated: bool,
}

fn budget(scn: &Scenario, c: &Common) -> SearchBudget {
    let mut b = scn.budget();
    match c.mode {
        Some(Mode::Exact) => b.mode = SearchMode::Exact,
        Some(Mode::Heuristic) => b.mode = SearchMode::Heuristic,
        None => {}
    }
    b.max_states = c.max_states.unwrap_or(b.max_states);
    b.max_depth = c.depth.unwrap_or(b.max_depth);
    b.grid = c.grid.unwrap_or(b.grid);
    b.beam = c.beam.unwrap_or(b.beam);
    b
}

fn names(ids: &BTreeSet<AccountId>) -> Vec<String> {
    ids.iter().map(|a| a.to_string()).collect()
}

/// Removes `ids` from `state`, returning the rest and the removed instances.
fn split(
    state: &BlockchainState,
    ids: &BTreeSet<AccountId>,
) -> Result<(BlockchainState, BTreeMap<AccountId, ContractInstance>), ScenarioError> {
    let mut base = state.clone();
    let mut removed = BTreeMap::new();
    for id in ids {
        if let Some(c) = base.remove_contract(id) {
            removed.insert(id.clone(), c);
        }
    }
    for (id, c) in base.contracts() {
        if let Some(d) = c.static_deps.iter().find(|d| ids.contains(*d)) {
            return Err(ScenarioError::Invalid(format!("{id} depends on {d}, which the analysis removes")));
        }
    }
    Ok((base, removed))
}

fn scenario_hints(scn: &Scenario, targets: &BTreeSet<AccountId>) -> Hints {
    if scn.analysis.hints {
        hints::analytic(&scn.state, targets, &scn.adversary)
    } else {
        Hints::default()
    }
}

fn exec(scn: &Scenario, report: &mut Report) -> Result<(), CliError> {
    let targets = scn.targets();
    let start = scn.state.wealth(&targets).map_err(EngineError::from)?;
    let mut current = scn.state.clone();
    let mut steps = Vec::with_capacity(scn.transactions.len());
    for tx in &scn.transactions {
        let ex = vm::execute(&current, tx).map_err(EngineError::from)?;
        current = ex.state;
        let loss = start - current.wealth(&targets).map_err(EngineError::from)?;
        steps.push(ExecStep { transaction: tx.clone(), trace: ex.trace, state: current.clone(), loss });
    }
    report.exec(&scn.state, &steps);
    Ok(())
}

fn properties(scn: &Scenario, cfg: &HarnessConfig, suite: Option<usize>) -> Result<Vec<PropertyVerdict>, CliError> {
    let (state, adv, delta) = (&scn.state, &scn.adversary, &scn.delta);
    let (targets, callees) = (scn.targets(), scn.callees());
    let mut out = vec![
        harness::check_basic_interference(state, delta, adv, cfg)?,
        harness::check_zero_wealth(state, delta, adv, cfg)?,
        harness::check_wallet_irrelevance(state, delta, adv, cfg)?,
    ];
    let extra = &scn.analysis.extra;
    if extra.is_empty() {
        out.push(harness::check_mev_lemmas(state, &targets, &callees, adv, &BTreeMap::new(), cfg)?);
    } else {
        let (base, removed) = split(state, extra)?;
        out.push(harness::check_context_monotonicity(&base, &removed, delta, adv, cfg)?);
        let kept = callees.iter().filter(|c| !extra.contains(*c)).cloned().collect();
        out.push(harness::check_mev_lemmas(&base, &targets, &kept, adv, &removed, cfg)?);
    }
    if !scn.analysis.adversary_contracts.is_empty() {
        let (base, removed) = split(state, &scn.analysis.adversary_contracts)?;
        out.push(harness::check_front_running_invariance(&base, &removed, delta, adv, cfg)?);
    }
    out.push(harness::check_stripping_lemma(state, &targets, &callees, adv, cfg)?);
    if let Some(cases) = suite {
        let mut sc = SuiteConfig { seed: cfg.seed, ..SuiteConfig::default() };
        sc.cases = cases;
        out.extend(run_suites(&sc)?);
    }
    Ok(out)
}

fn build(command: &str, c: &Common, suite: Option<usize>, text: &str) -> Result<(Report, bool), CliError> {
    let scn = Scenario::parse(text)?;
    let budget = budget(&scn, c);
    let seed = c.seed.or(scn.analysis.seed).unwrap_or(0);
    let header = Header {
        command: command.to_string(),
        scenario: scn.name.clone(),
        scenario_sha256: scenario_digest(text),
        seed,
        budget: budget.clone(),
        workers: c.workers,
    };
    let mut report = Report::new(&header);
    let mut violated = false;
    match command {
        "exec" => exec(&scn, &mut report)?,
        "mev" => {
            let targets = scn.targets();
            let hints = scenario_hints(&scn, &targets);
            let m = engine::interference(&scn.state, &targets, &scn.adversary, &budget, &hints)?;
            report.mev(&m);
            if let Some(callees) = &scn.analysis.callees {
                let policy = CraftPolicy::only(callees.iter().cloned()).with_hints(hints);
                let l = engine::lmev(&scn.state, &targets, &policy, &scn.adversary, &budget)?;
                report.lmev(&names(&targets), &names(callees), &l);
            }
        }
        "interference" => {
            let hints = scenario_hints(&scn, &scn.delta);
            let m = engine::interference(&scn.state, &scn.delta, &scn.adversary, &budget, &hints)?;
            report.mev(&m);
        }
        "oracle-compare" => {
            let hints = scenario_hints(&scn, &scn.delta);
            let m = engine::interference(&scn.state, &scn.delta, &scn.adversary, &budget, &hints)?;
            report.mev(&m);
            report.comparison(&compare(&scn.state, &scn.delta, &scn.adversary, &m)?);
        }
        "properties" => {
            let cfg = HarnessConfig { budget, seed, ..HarnessConfig::default() };
            let verdicts = properties(&scn, &cfg, suite)?;
            violated = verdicts.iter().any(|v| v.status == Status::Violated);
            report.properties(&verdicts);
        }
        other => unreachable!("unknown command {other}"),
    }
    Ok((report, violated))
}

/// Runs `command` and prints the report. Nothing is written unless the whole
/// analysis succeeds.
pub fn run(command: &str, c: &Common, suite: Option<usize>) -> Result<Outcome, CliError> {
    let path = c.scenario.display().to_string();
    let text = std::fs::read_to_string(&c.scenario)
        .map_err(|source| ScenarioError::Io { path: path.clone(), source })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.workers.max(1))
        .build()
        .map_err(|e| CliError::Workers(e.to_string()))?;
    let (report, violated) = pool.install(|| build(command, c, suite, &text))?;
    if let Some(out) = &c.out {
        std::fs::write(out, report.to_json())
            .map_err(|source| CliError::Io { path: out.display().to_string(), source })?;
    }
    match c.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    Ok(Outcome { violated })
}
