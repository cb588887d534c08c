//! Approximate G-optimal design over a finite arm set and its integer rounding.
//!
//! The solver is the Fedorov–Wynn form of Frank–Wolfe: start uniform, move
//! toward the arm with the largest `‖a‖²_{V(π)⁻¹}` using the closed-form
//! log-det step, stop once `g(π) ≤ (1 + ε) d`. By the Kiefer–Wolfowitz
//! equivalence the optimum of `g` is exactly `d`, so the stopping rule is a
//! certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank_basis, Cholesky, SymMatrix};
use crate::scalar::Scalar;

pub const DEFAULT_EPSILON: f64 = 1.0;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-6;

/// Probability design over the arms passed to the solver (same order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignWeights<T> {
    pub weights: Vec<T>,
    /// `max_a ‖a‖²_{V(π)⁻¹}`; infinite when `V(π)` is singular.
    pub g_value: T,
    /// Dimension the design lives in.
    pub rank: usize,
    pub iterations: usize,
    /// False when `max_iter` ran out before the `(1 + ε) d` target.
    pub converged: bool,
    /// Best-so-far `g` after each iteration.
    #[serde(skip)]
    pub g_trace: Vec<T>,
}

impl<T: Scalar> DesignWeights<T> {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > T::zero())
            .map(|(i, _)| i)
    }
}

/// Integer pull counts per arm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullAllocation {
    pub counts: Vec<usize>,
    pub total: usize,
}

impl PullAllocation {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(i, _)| i)
    }
}

/// `V(π) = Σ πᵢ aᵢ aᵢᵀ`
pub fn weighted_gram<T: Scalar>(arms: &[Vec<T>], weights: &[T]) -> SymMatrix<T> {
    let d = arms.first().map_or(0, Vec::len);
    let mut v = SymMatrix::zeros(d);
    for (a, &w) in arms.iter().zip(weights) {
        if w > T::zero() {
            v.add_outer(a, w);
        }
    }
    v
}

/// `V = Σ bᵢ aᵢ aᵢᵀ` for integer counts.
pub fn design_matrix<T: Scalar>(arms: &[Vec<T>], alloc: &PullAllocation) -> SymMatrix<T> {
    let d = arms.first().map_or(0, Vec::len);
    let mut v = SymMatrix::zeros(d);
    for (a, &c) in arms.iter().zip(&alloc.counts) {
        if c > 0 {
            v.add_outer(a, T::of_usize(c));
        }
    }
    v
}

/// Largest quadratic norm and the first arm attaining it.
fn max_quad_norm<T: Scalar>(chol: &Cholesky<T>, arms: &[Vec<T>]) -> (T, usize) {
    let mut best = (T::neg_infinity(), 0);
    for (i, a) in arms.iter().enumerate() {
        let q = chol.quad_norm_sq(a);
        if q > best.0 {
            best = (q, i);
        }
    }
    best
}

/// `g(π)`, or infinity when `V(π)` is singular.
pub fn g_value<T: Scalar>(arms: &[Vec<T>], weights: &[T]) -> T {
    match Cholesky::checked(&weighted_gram(arms, weights)) {
        Ok(chol) => max_quad_norm(&chol, arms).0,
        Err(_) => T::infinity(),
    }
}

/// Frank–Wolfe solve for a `(1 + epsilon)`-approximate G-optimal design.
///
/// `arms` must span their ambient space; project rank-deficient sets first.
pub fn g_optimal_design<T: Scalar>(
    arms: &[Vec<T>],
    epsilon: T,
    max_iter: usize,
) -> Result<DesignWeights<T>> {
    let k = arms.len();
    let d = match arms.first() {
        Some(a) if !a.is_empty() => a.len(),
        _ => return Err(Error::EmptyArmSet),
    };
    if let Some(bad) = arms.iter().find(|a| a.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if epsilon.is_nan() || epsilon <= T::zero() {
        return Err(Error::InvalidConfig(
            "design epsilon must be positive".into(),
        ));
    }
    if k < d {
        return Err(Error::DegenerateSpan);
    }
    let dim = T::of_usize(d);
    let target = (T::one() + epsilon) * dim;
    let mut pi = vec![T::one() / T::of_usize(k); k];
    let mut chol =
        Cholesky::checked(&weighted_gram(arms, &pi)).map_err(|_| Error::DegenerateSpan)?;
    let (mut g, mut j) = max_quad_norm(&chol, arms);
    let mut best = (pi.clone(), g);
    let mut trace = vec![g];
    let mut iterations = 0;
    while g > target && iterations < max_iter {
        let gamma = if g > T::one() {
            (g / dim - T::one()) / (g - T::one())
        } else {
            T::one()
        };
        for w in pi.iter_mut() {
            *w = *w * (T::one() - gamma);
        }
        pi[j] = pi[j] + gamma;
        iterations += 1;
        chol = match Cholesky::new(&weighted_gram(arms, &pi)) {
            Ok(c) => c,
            Err(_) => break,
        };
        (g, j) = max_quad_norm(&chol, arms);
        if g < best.1 {
            best = (pi.clone(), g);
        }
        trace.push(best.1);
    }
    let (weights, g_best) = best;
    debug_assert!(
        g_best >= dim * (T::one() - T::of(1e-6)),
        "design value {g_best} below the Kiefer-Wolfowitz bound {dim}"
    );
    Ok(DesignWeights {
        weights,
        g_value: g_best,
        rank: d,
        iterations,
        converged: g_best <= target,
        g_trace: trace,
    })
}

/// Drops weights below `threshold`, renormalizes, and recomputes `g`
/// (infinite if the remaining support no longer spans).
pub fn prune_support<T: Scalar>(
    design: &DesignWeights<T>,
    arms: &[Vec<T>],
    threshold: T,
) -> Result<DesignWeights<T>> {
    if design.weights.iter().all(|&w| w >= threshold) {
        return Ok(design.clone());
    }
    let kept: Vec<T> = design
        .weights
        .iter()
        .map(|&w| if w >= threshold { w } else { T::zero() })
        .collect();
    let total = kept.iter().fold(T::zero(), |acc, &w| acc + w);
    if total.is_nan() || total <= T::zero() {
        return Err(Error::AllPruned);
    }
    let weights: Vec<T> = kept.iter().map(|&w| w / total).collect();
    let g = g_value(arms, &weights);
    Ok(DesignWeights {
        weights,
        g_value: g,
        rank: design.rank,
        iterations: design.iterations,
        converged: design.converged && g.is_finite(),
        g_trace: design.g_trace.clone(),
    })
}

/// Rounds `budget · π` to integers: floors first, then leftover pulls by
/// largest fractional part (lower index on ties). Zero-weight arms get nothing.
pub fn round_allocation<T: Scalar>(design: &DesignWeights<T>, budget: usize) -> PullAllocation {
    let total_w = design
        .weights
        .iter()
        .fold(T::zero(), |acc, &w| acc + w.max(T::zero()));
    let b = T::of_usize(budget);
    let mut counts = vec![0usize; design.weights.len()];
    let mut fracs: Vec<(T, usize)> = Vec::new();
    let mut assigned = 0usize;
    for (i, &w) in design.weights.iter().enumerate() {
        if w.is_nan() || w <= T::zero() {
            continue;
        }
        let exact = b * w / total_w;
        let fl = exact.floor();
        counts[i] = fl.to_usize().unwrap_or(0);
        assigned += counts[i];
        fracs.push((exact - fl, i));
    }
    fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then(a.1.cmp(&b.1)));
    let mut leftover = budget.saturating_sub(assigned);
    while leftover > 0 && !fracs.is_empty() {
        for &(_, i) in &fracs {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
    }
    PullAllocation {
        counts,
        total: budget,
    }
}

fn allocation_spans<T: Scalar>(arms: &[Vec<T>], alloc: &PullAllocation, dim: usize) -> bool {
    let chosen: Vec<Vec<T>> = alloc.support().map(|i| arms[i].clone()).collect();
    !chosen.is_empty() && rank_basis(&chosen, T::rank_tol()).is_ok_and(|b| b.rank() == dim)
}

/// Repairs a rounded allocation whose pulled arms fail to span: one pull at a
/// time moves from the largest-count arm to the highest-weight support arm
/// that received none.
pub fn ensure_spanning<T: Scalar>(
    arms: &[Vec<T>],
    design: &DesignWeights<T>,
    mut alloc: PullAllocation,
) -> Result<PullAllocation> {
    let dim = design.rank;
    if alloc.total < dim {
        return Err(Error::InsufficientBudget {
            budget: alloc.total,
            needed: dim,
        });
    }
    let mut moves = 0;
    while !allocation_spans(arms, &alloc, dim) {
        let target = design
            .support()
            .filter(|&i| alloc.counts[i] == 0)
            .max_by(|&a, &b| {
                design.weights[a]
                    .partial_cmp(&design.weights[b])
                    .expect("finite")
                    .then(b.cmp(&a))
            });
        let source = (0..alloc.counts.len())
            .filter(|&i| alloc.counts[i] >= 2)
            .max_by(|&a, &b| alloc.counts[a].cmp(&alloc.counts[b]).then(b.cmp(&a)));
        match (target, source) {
            (Some(t), Some(s)) if moves < alloc.total * arms.len() => {
                alloc.counts[s] -= 1;
                alloc.counts[t] += 1;
                moves += 1;
            }
            _ => return Err(Error::DegenerateSpan),
        }
    }
    Ok(alloc)
}
