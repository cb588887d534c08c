use serde::{Deserialize, Serialize};

use super::num_rounds;

/// Message counts of one run, by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommLedger {
    /// Coordinator → agent `(index, pulls)` allocation messages.
    pub allocation: u64,
    /// Agent → coordinator `(V_m, D_m)` statistics messages.
    pub statistics: u64,
    /// Hub (or independent agent) → top-level server best-arm votes.
    pub votes: u64,
    /// One-off `(index, arm)` broadcasts before the first round.
    pub index_broadcasts: u64,
}

impl CommLedger {
    /// Messages counted by the communication-cost formulas (broadcasts excluded).
    pub fn data_messages(&self) -> u64 {
        self.allocation + self.statistics + self.votes
    }

    pub fn merge(&mut self, other: &CommLedger) {
        self.allocation += other.allocation;
        self.statistics += other.statistics;
        self.votes += other.votes;
        self.index_broadcasts += other.index_broadcasts;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerKind {
    Star,
    /// Generic network split into `blocks` star blocks.
    Gen {
        blocks: usize,
    },
    MaOd,
}

/// Closed-form counts: star `2M⌈log₂K⌉`; gen `2(M − |P|)⌈log₂K⌉ + |P|`;
/// independent agents `M` votes. Every agent receives the `K` arm indices once.
pub fn ledger_closed_form(kind: LedgerKind, agents: usize, arms: usize) -> CommLedger {
    let rounds = num_rounds(arms) as u64;
    let m = agents as u64;
    let index_broadcasts = m * arms as u64;
    match kind {
        LedgerKind::Star => CommLedger {
            allocation: m * rounds,
            statistics: m * rounds,
            votes: 0,
            index_broadcasts,
        },
        LedgerKind::Gen { blocks } => {
            let non_hubs = m.saturating_sub(blocks as u64);
            CommLedger {
                allocation: non_hubs * rounds,
                statistics: non_hubs * rounds,
                votes: blocks as u64,
                index_broadcasts,
            }
        }
        LedgerKind::MaOd => CommLedger {
            allocation: 0,
            statistics: 0,
            votes: m,
            index_broadcasts,
        },
    }
}
