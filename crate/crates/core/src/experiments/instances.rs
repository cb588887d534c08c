use rand::Rng;
use rand_distr::StandardNormal;

use crate::bandit::LinearBanditInstance;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::Scalar;

pub const SPHERE_MAX_ATTEMPTS: usize = 100;

/// Canonical arms `e₁..e_d` with `θ = Δ e₁` and unit noise.
pub fn gen_standard_instance<T: Scalar>(d: usize, delta: T) -> Result<LinearBanditInstance<T>> {
    if d < 2 {
        return Err(Error::InvalidConfig(
            "standard instance needs d >= 2".into(),
        ));
    }
    if delta.is_nan() || delta <= T::zero() {
        return Err(Error::InvalidConfig(
            "standard instance needs delta > 0".into(),
        ));
    }
    let arms = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let mut theta = vec![T::zero(); d];
    theta[0] = delta;
    LinearBanditInstance::new(arms, theta, T::one())
}

fn unit_vector<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.iter().map(|x| T::of(x / n)).collect();
        }
    }
}

/// Indices of the closest pair by Euclidean distance (first pair on ties).
pub fn closest_pair<T: Scalar>(points: &[Vec<T>]) -> (usize, usize) {
    let mut best = (T::infinity(), 0, 1);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let diff: Vec<T> = points[i]
                .iter()
                .zip(&points[j])
                .map(|(&a, &b)| a - b)
                .collect();
            let dist = norm(&diff);
            if dist < best.0 {
                best = (dist, i, j);
            }
        }
    }
    (best.1, best.2)
}

/// `K` uniform points on the unit sphere of `ℝᵈ`; with `(u, v)` the closest
/// pair, `θ = u + 0.01 (u − v)`. Resamples until `u` is the strict best arm.
pub fn gen_random_sphere_instance<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    k: usize,
    rng: &mut R,
) -> Result<LinearBanditInstance<T>> {
    if d < 2 || k < 2 {
        return Err(Error::InvalidConfig(
            "sphere instance needs d >= 2 and K >= 2".into(),
        ));
    }
    let margin = T::of(0.01);
    for _ in 0..SPHERE_MAX_ATTEMPTS {
        let arms: Vec<Vec<T>> = (0..k).map(|_| unit_vector(d, rng)).collect();
        let (i, j) = closest_pair(&arms);
        let (u, v) = (&arms[i], &arms[j]);
        let theta: Vec<T> = u
            .iter()
            .zip(v)
            .map(|(&a, &b)| a + margin * (a - b))
            .collect();
        let ru = dot(&theta, u);
        let strict = arms
            .iter()
            .enumerate()
            .all(|(idx, a)| idx == i || dot(&theta, a) < ru);
        if !strict {
            continue;
        }
        match LinearBanditInstance::new(arms, theta, T::one()) {
            Ok(inst) => return Ok(inst),
            Err(Error::TiedBestArm { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed {
        attempts: SPHERE_MAX_ATTEMPTS,
    })
}
