use serde::Serialize;

use crate::error::Result;
use crate::linalg::{solve_psd, SymMatrix};
use crate::scalar::Scalar;

/// One agent's per-round statistics: Gram matrix `V_m` and reward-weighted
/// arm sum `D_m`, both in projected coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgentState<T> {
    pub agent_id: usize,
    pub gram: SymMatrix<T>,
    pub moment: Vec<T>,
}

impl<T: Scalar> AgentState<T> {
    pub fn new(agent_id: usize, dim: usize) -> Self {
        Self {
            agent_id,
            gram: SymMatrix::zeros(dim),
            moment: vec![T::zero(); dim],
        }
    }

    pub fn reset(&mut self, dim: usize) {
        self.gram = SymMatrix::zeros(dim);
        self.moment = vec![T::zero(); dim];
    }

    /// Adds `rewards.len()` pulls of the same (projected) arm.
    pub fn record_pulls(&mut self, arm: &[T], rewards: &[T]) {
        if rewards.is_empty() {
            return;
        }
        self.gram.add_outer(arm, T::of_usize(rewards.len()));
        let total = rewards.iter().fold(T::zero(), |acc, &r| acc + r);
        for (m, &a) in self.moment.iter_mut().zip(arm) {
            *m = *m + a * total;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gram.is_zero() && self.moment.iter().all(|x| x.is_zero())
    }
}

/// Coordinator aggregate `V_S = Σ V_m`, `D_S = Σ D_m` and the active arm set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServerState<T> {
    pub gram: SymMatrix<T>,
    pub moment: Vec<T>,
    pub active_set: Vec<usize>,
    pub round: usize,
}

impl<T: Scalar> ServerState<T> {
    pub fn new(active_set: Vec<usize>) -> Self {
        Self {
            gram: SymMatrix::zeros(0),
            moment: Vec::new(),
            active_set,
            round: 0,
        }
    }

    pub fn reset(&mut self, dim: usize) {
        self.gram = SymMatrix::zeros(dim);
        self.moment = vec![T::zero(); dim];
    }

    pub fn aggregate<'a, I>(&mut self, agents: I)
    where
        I: IntoIterator<Item = &'a AgentState<T>>,
    {
        for a in agents {
            self.gram.add_assign(&a.gram);
            for (s, &m) in self.moment.iter_mut().zip(&a.moment) {
                *s = *s + m;
            }
        }
    }

    /// OLS estimate `V_S⁻¹ D_S`.
    pub fn estimate(&self) -> Result<Vec<T>> {
        solve_psd(&self.gram, &self.moment)
    }
}
