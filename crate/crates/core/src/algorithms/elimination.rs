use serde::Serialize;

use super::state::{AgentState, ServerState};
use super::{num_rounds, round_budget, survivors_after};
use crate::bandit::{LinearBanditInstance, RngStream};
use crate::design::{
    ensure_spanning, g_optimal_design, prune_support, round_allocation, DEFAULT_EPSILON,
    DEFAULT_MAX_ITER, DEFAULT_PRUNE_THRESHOLD,
};
use crate::error::Result;
use crate::linalg::{dot, rank_basis, Cholesky};
use crate::scalar::Scalar;

/// What the coordinator saw and decided in one round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrace<T> {
    pub round: usize,
    /// Rank of the active arms (dimension of the projected problem).
    pub rank: usize,
    pub active_before: Vec<usize>,
    pub active_after: Vec<usize>,
    /// Design weights, aligned with `active_before`.
    pub weights: Vec<T>,
    pub g_value: T,
    /// Per-agent pull counts, aligned with `active_before`.
    pub allocation: Vec<usize>,
    /// Estimated expected rewards, aligned with `active_before`.
    pub estimates: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockResult<T> {
    pub chosen_arm: usize,
    pub uncertainty: T,
    pub rounds: Vec<RoundTrace<T>>,
}

/// One star block: `participants` agents (ranks `0..participants`) run the
/// halving elimination for `⌈log₂K⌉` rounds with a shared coordinator.
///
/// Agent `r` in round `p` (1-based) samples from `block / r / p`.
pub fn run_block<T: Scalar>(
    inst: &LinearBanditInstance<T>,
    participants: usize,
    budget: usize,
    block: &RngStream,
) -> Result<BlockResult<T>> {
    let k = inst.num_arms();
    let rounds = num_rounds(k);
    let per_round = round_budget(budget, k);
    let two = T::of(2.0);
    let mut server = ServerState::<T>::new((0..k).collect());
    let mut agents: Vec<AgentState<T>> = (0..participants).map(|r| AgentState::new(r, 0)).collect();
    let mut traces = Vec::with_capacity(rounds);
    let mut uncertainty = T::zero();

    for p in 1..=rounds {
        server.round = p;
        let active = server.active_set.clone();
        let raw: Vec<Vec<T>> = active.iter().map(|&i| inst.arms()[i].clone()).collect();
        let basis = rank_basis(&raw, T::rank_tol())?;
        let dim = basis.rank();
        let projected = raw
            .iter()
            .map(|a| basis.project(a))
            .collect::<Result<Vec<_>>>()?;

        let design = g_optimal_design(&projected, T::of(DEFAULT_EPSILON), DEFAULT_MAX_ITER)?;
        let pruned = prune_support(&design, &projected, T::of(DEFAULT_PRUNE_THRESHOLD))?;
        let design = if pruned.g_value <= two * T::of_usize(dim) || pruned.g_value <= design.g_value
        {
            pruned
        } else {
            design
        };
        let alloc = round_allocation(&design, per_round);
        let alloc = ensure_spanning(&projected, &design, alloc)?;

        server.reset(dim);
        for (rank, agent) in agents.iter_mut().enumerate() {
            agent.reset(dim);
            let mut rng = block.child(rank as u64).child(p as u64).generator();
            let mut rewards = Vec::new();
            for (slot, &arm) in active.iter().enumerate() {
                let pulls = alloc.counts[slot];
                rewards.clear();
                for _ in 0..pulls {
                    rewards.push(inst.sample_reward(arm, &mut rng)?);
                }
                agent.record_pulls(&projected[slot], &rewards);
            }
        }
        server.aggregate(&agents);
        let theta_hat = server.estimate()?;
        let estimates: Vec<T> = projected.iter().map(|a| dot(&theta_hat, a)).collect();

        let keep = survivors_after(k, p);
        let mut order: Vec<usize> = (0..active.len()).collect();
        order.sort_by(|&a, &b| {
            estimates[b]
                .partial_cmp(&estimates[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(active[a].cmp(&active[b]))
        });
        let mut kept: Vec<usize> = order.iter().take(keep).map(|&s| active[s]).collect();
        kept.sort_unstable();

        if p == rounds {
            let slot = active
                .iter()
                .position(|&a| a == kept[0])
                .expect("survivor was active");
            uncertainty = Cholesky::new(&server.gram)?.quad_norm_sq(&projected[slot]);
        }
        traces.push(RoundTrace {
            round: p,
            rank: dim,
            active_before: active,
            active_after: kept.clone(),
            weights: design.weights,
            g_value: design.g_value,
            allocation: alloc.counts,
            estimates,
        });
        server.active_set = kept;
    }
    Ok(BlockResult {
        chosen_arm: server.active_set[0],
        uncertainty,
        rounds: traces,
    })
}
