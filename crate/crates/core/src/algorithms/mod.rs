//! Collaborative successive-elimination runners.
//!
//! * [`run_star`]: `M` agents around one coordinator, halving the active set
//!   each round using a G-optimal allocation.
//! * [`run_gen`]: every block of a dominating-set partition runs the star
//!   procedure with its hub as coordinator (the hub pulls too); a top-level
//!   server takes a plurality vote, ties going to the lowest reported
//!   uncertainty.
//! * [`run_ma_od`]: `M` independent single-agent runs plus a plurality vote.
//!
//! All three are single-threaded and deterministic given an [`RngStream`].

mod elimination;
mod ledger;
mod state;

pub use elimination::{run_block, BlockResult, RoundTrace};
pub use ledger::{ledger_closed_form, CommLedger, LedgerKind};
pub use state::{AgentState, ServerState};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{LinearBanditInstance, RngStream};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{validate_partition, AgentGraph, Partition};

/// Child index of the trial stream reserved for vote tie-breaking.
pub const VOTE_STREAM: u64 = u64::MAX;

/// `⌈log₂ K⌉`
pub fn num_rounds(num_arms: usize) -> usize {
    assert!(num_arms >= 1);
    (usize::BITS - (num_arms - 1).leading_zeros()) as usize
}

/// Arms still active after round `p`: `max(⌈K / 2^p⌉, 1)`.
pub fn survivors_after(num_arms: usize, round: usize) -> usize {
    if round >= usize::BITS as usize {
        return 1;
    }
    num_arms.div_ceil(1usize << round).max(1)
}

/// Per-agent, per-round pull budget `⌊T / ⌈log₂ K⌉⌋`.
pub fn round_budget(budget: usize, num_arms: usize) -> usize {
    budget / num_rounds(num_arms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Star,
    Gen,
    MaOd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Star => "star",
            Algorithm::Gen => "gen",
            Algorithm::MaOd => "ma-od",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Algorithm::Star),
            "gen" => Ok(Algorithm::Gen),
            "ma-od" | "ma_od" | "maod" => Ok(Algorithm::MaOd),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// One block's (or independent agent's) report to the top-level server.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockReport<T> {
    /// Hub vertex for network blocks; agent index for independent runs.
    pub hub: usize,
    pub members: Vec<usize>,
    pub chosen_arm: usize,
    /// `ãᵀ V⁻¹ ã` of the chosen arm under the final-round aggregate.
    pub uncertainty: T,
    pub rounds: Vec<RoundTrace<T>>,
}

/// Result of one run. Field order is the JSON order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutcome<T> {
    pub algorithm: Algorithm,
    pub chosen_arm: usize,
    pub best_arm: usize,
    pub correct: bool,
    pub rounds: Vec<RoundTrace<T>>,
    pub blocks: Vec<BlockReport<T>>,
    pub ledger: CommLedger,
}

impl<T: Scalar> RunOutcome<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

fn check_budget<T: Scalar>(inst: &LinearBanditInstance<T>, budget: usize) -> Result<()> {
    let needed = num_rounds(inst.num_arms()) * inst.dim();
    if budget < needed {
        return Err(Error::InsufficientBudget { budget, needed });
    }
    Ok(())
}

/// Star network with `agents` agents and per-agent budget `budget`.
///
/// `trial` is the trial-level stream; agent `r` in round `p` draws from
/// `trial / 0 / r / p`.
pub fn run_star<T: Scalar>(
    inst: &LinearBanditInstance<T>,
    agents: usize,
    budget: usize,
    trial: &RngStream,
) -> Result<RunOutcome<T>> {
    if agents == 0 {
        return Err(Error::InvalidConfig("need at least one agent".into()));
    }
    check_budget(inst, budget)?;
    let block = run_block(inst, agents, budget, &trial.child(0))?;
    let rounds = block.rounds.len() as u64;
    let ledger = CommLedger {
        allocation: agents as u64 * rounds,
        statistics: agents as u64 * rounds,
        votes: 0,
        index_broadcasts: (agents * inst.num_arms()) as u64,
    };
    let best = inst.best_arm()?;
    Ok(RunOutcome {
        algorithm: Algorithm::Star,
        chosen_arm: block.chosen_arm,
        best_arm: best,
        correct: block.chosen_arm == best,
        rounds: block.rounds,
        blocks: Vec::new(),
        ledger,
    })
}

/// Plurality vote over `(arm, uncertainty)` reports. Ties go to the tied arm
/// with the lowest reported uncertainty, then the lowest index.
pub fn plurality_vote<T: Scalar>(votes: &[(usize, T)]) -> Option<usize> {
    let tied = top_voted(votes.iter().map(|v| v.0));
    tied.into_iter().min_by(|&a, &b| {
        let unc = |arm| {
            votes
                .iter()
                .filter(|v| v.0 == arm)
                .map(|v| v.1)
                .fold(T::infinity(), T::min)
        };
        unc(a)
            .partial_cmp(&unc(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    })
}

/// Plurality vote with ties broken uniformly at random.
pub fn plurality_vote_random<R: Rng + ?Sized>(votes: &[usize], rng: &mut R) -> Option<usize> {
    let tied = top_voted(votes.iter().copied());
    if tied.is_empty() {
        return None;
    }
    Some(tied[rng.random_range(0..tied.len())])
}

/// Arms with the maximal vote count, ascending.
fn top_voted(votes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut counts = std::collections::BTreeMap::new();
    for v in votes {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    counts
        .into_iter()
        .filter(|&(_, c)| c == top && top > 0)
        .map(|(a, _)| a)
        .collect()
}

/// Generic network: one star run per partition block, then a vote.
///
/// Block `i` draws from `trial / i / rank / round`, where rank 0 is the hub
/// and the remaining members follow in ascending vertex order.
pub fn run_gen<T: Scalar>(
    inst: &LinearBanditInstance<T>,
    graph: &AgentGraph,
    partition: &Partition,
    budget: usize,
    trial: &RngStream,
) -> Result<RunOutcome<T>> {
    let report = validate_partition(graph, partition);
    if let Some(v) = report.violation {
        return Err(Error::InvalidPartition(v.to_string()));
    }
    check_budget(inst, budget)?;
    let mut ledger = CommLedger::default();
    let mut blocks = Vec::with_capacity(partition.num_blocks());
    for (i, (members, &hub)) in partition.blocks.iter().zip(&partition.hubs).enumerate() {
        let ordered: Vec<usize> = std::iter::once(hub)
            .chain(members.iter().copied().filter(|&v| v != hub))
            .collect();
        let res = run_block(inst, ordered.len(), budget, &trial.child(i as u64))?;
        // the hub pulls arms but exchanges no round messages with itself
        let per_round = (ordered.len() - 1) as u64;
        let rounds = res.rounds.len() as u64;
        ledger.allocation += per_round * rounds;
        ledger.statistics += per_round * rounds;
        ledger.votes += 1;
        ledger.index_broadcasts += (ordered.len() * inst.num_arms()) as u64;
        blocks.push(BlockReport {
            hub,
            members: ordered,
            chosen_arm: res.chosen_arm,
            uncertainty: res.uncertainty,
            rounds: res.rounds,
        });
    }
    let votes: Vec<(usize, T)> = blocks
        .iter()
        .map(|b| (b.chosen_arm, b.uncertainty))
        .collect();
    let chosen = plurality_vote(&votes).expect("partition has at least one block");
    let best = inst.best_arm()?;
    Ok(RunOutcome {
        algorithm: Algorithm::Gen,
        chosen_arm: chosen,
        best_arm: best,
        correct: chosen == best,
        rounds: Vec::new(),
        blocks,
        ledger,
    })
}

/// `agents` independent single-agent eliminations and a plurality vote whose
/// ties are broken from the `trial / VOTE_STREAM` substream.
pub fn run_ma_od<T: Scalar>(
    inst: &LinearBanditInstance<T>,
    agents: usize,
    budget: usize,
    trial: &RngStream,
) -> Result<RunOutcome<T>> {
    if agents == 0 {
        return Err(Error::InvalidConfig("need at least one agent".into()));
    }
    check_budget(inst, budget)?;
    let mut blocks = Vec::with_capacity(agents);
    for m in 0..agents {
        let res = run_block(inst, 1, budget, &trial.child(m as u64))?;
        blocks.push(BlockReport {
            hub: m,
            members: vec![m],
            chosen_arm: res.chosen_arm,
            uncertainty: res.uncertainty,
            rounds: res.rounds,
        });
    }
    let votes: Vec<usize> = blocks.iter().map(|b| b.chosen_arm).collect();
    let chosen = plurality_vote_random(&votes, &mut trial.child(VOTE_STREAM).generator())
        .expect("at least one agent");
    let best = inst.best_arm()?;
    Ok(RunOutcome {
        algorithm: Algorithm::MaOd,
        chosen_arm: chosen,
        best_arm: best,
        correct: chosen == best,
        rounds: Vec::new(),
        blocks,
        ledger: ledger_closed_form(LedgerKind::MaOd, agents, inst.num_arms()),
    })
}
