//! Linear bandit instances: arms, hidden parameter, Gaussian reward noise.

mod io;
mod rng;

pub use io::{read_arms_csv, read_instance_json, write_arms_csv, write_instance_json};
pub use rng::RngStream;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::scalar::Scalar;

/// Ground truth for an experiment. Arms are indexed from 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance<T>", bound = "T: Scalar")]
pub struct LinearBanditInstance<T> {
    arms: Vec<Vec<T>>,
    theta: Vec<T>,
    noise_std: T,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawInstance<T> {
    arms: Vec<Vec<T>>,
    theta: Vec<T>,
    #[serde(default = "T::one")]
    noise_std: T,
}

impl<T: Scalar> TryFrom<RawInstance<T>> for LinearBanditInstance<T> {
    type Error = Error;
    fn try_from(raw: RawInstance<T>) -> Result<Self> {
        Self::new(raw.arms, raw.theta, raw.noise_std)
    }
}

/// Per-arm sub-optimality gaps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapProfile<T> {
    pub best_index: usize,
    pub gaps: Vec<T>,
    pub delta_min: T,
}

fn tie_tolerance<T: Scalar>(scale: T) -> T {
    T::of(1e-12).max(T::epsilon() * T::of(4.0)) * scale.abs().max(T::one())
}

impl<T: Scalar> LinearBanditInstance<T> {
    /// Validates and builds an instance; a tied best arm is rejected.
    pub fn new(arms: Vec<Vec<T>>, theta: Vec<T>, noise_std: T) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 arms, got {}",
                arms.len()
            )));
        }
        let d = theta.len();
        if d == 0 {
            return Err(Error::InvalidInstance("dimension must be positive".into()));
        }
        for a in &arms {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.len(),
                });
            }
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !arms.iter().all(|a| finite(a)) || !finite(&theta) {
            return Err(Error::InvalidInstance(
                "non-finite arm or parameter entry".into(),
            ));
        }
        if !noise_std.is_finite() || noise_std < T::zero() {
            return Err(Error::InvalidInstance(
                "noise_std must be finite and >= 0".into(),
            ));
        }
        let inst = Self {
            arms,
            theta,
            noise_std,
        };
        inst.gap_profile()?;
        Ok(inst)
    }

    pub fn arms(&self) -> &[Vec<T>] {
        &self.arms
    }

    pub fn arm(&self, i: usize) -> Result<&[T]> {
        self.arms
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.arms.len(),
            })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn noise_std(&self) -> T {
        self.noise_std
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Same arms and parameter with a different noise scale.
    pub fn with_noise_std(mut self, noise_std: T) -> Result<Self> {
        if !noise_std.is_finite() || noise_std < T::zero() {
            return Err(Error::InvalidInstance(
                "noise_std must be finite and >= 0".into(),
            ));
        }
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn expected_reward(&self, i: usize) -> Result<T> {
        Ok(dot(&self.theta, self.arm(i)?))
    }

    /// `⟨θ, a_i⟩ + noise_std · z` with `z ~ N(0, 1)` drawn from `rng`.
    ///
    /// One normal variate is consumed even when `noise_std` is zero so that
    /// stream positions do not depend on the noise level.
    pub fn sample_reward<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<T> {
        let mean = self.expected_reward(i)?;
        let z: f64 = rng.sample(StandardNormal);
        if self.noise_std.is_zero() {
            return Ok(mean);
        }
        Ok(mean + self.noise_std * T::of(z))
    }

    pub fn gap_profile(&self) -> Result<GapProfile<T>> {
        let rewards: Vec<T> = self.arms.iter().map(|a| dot(&self.theta, a)).collect();
        let mut best = 0;
        for (i, &r) in rewards.iter().enumerate().skip(1) {
            if r > rewards[best] {
                best = i;
            }
        }
        let top = rewards[best];
        let tol = tie_tolerance(top);
        if let Some(j) = (0..rewards.len()).find(|&j| j != best && top - rewards[j] <= tol) {
            let (first, second) = if j < best { (j, best) } else { (best, j) };
            return Err(Error::TiedBestArm { first, second });
        }
        let gaps: Vec<T> = rewards.iter().map(|&r| top - r).collect();
        let delta_min = gaps
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &g)| g)
            .fold(T::infinity(), T::min);
        Ok(GapProfile {
            best_index: best,
            gaps,
            delta_min,
        })
    }

    pub fn best_arm(&self) -> Result<usize> {
        Ok(self.gap_profile()?.best_index)
    }

    /// `Σ Δᵢ⁻²` over the `d` highest-reward arms, the best arm's undefined
    /// term taken as `Δ_min⁻²`.
    pub fn hardness(&self) -> Result<T> {
        let gp = self.gap_profile()?;
        let mut order: Vec<usize> = (0..self.arms.len()).collect();
        order.sort_by(|&a, &b| {
            gp.gaps[a]
                .partial_cmp(&gp.gaps[b])
                .expect("finite gap")
                .then(a.cmp(&b))
        });
        Ok(order
            .iter()
            .take(self.dim())
            .map(|&i| {
                let g = if i == gp.best_index {
                    gp.delta_min
                } else {
                    gp.gaps[i]
                };
                T::one() / (g * g)
            })
            .fold(T::zero(), |acc, x| acc + x))
    }
}
