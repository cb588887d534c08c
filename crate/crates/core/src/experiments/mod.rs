//! Synthetic instance families, theoretical bound evaluators and the
//! Monte-Carlo sweep harness.

mod bounds;
mod instances;
mod sweep;

pub use bounds::{lower_bound_exponent, theorem1_bound, theorem2_bound};
pub use instances::{
    closest_pair, gen_random_sphere_instance, gen_standard_instance, SPHERE_MAX_ATTEMPTS,
};
pub use sweep::{
    estimate_error, grid_instances, monte_carlo, spearman, write_sweep_outputs, ErrorEstimate,
    GraphSpec, InstanceFamily, SweepConfig, Topology, INSTANCE_STREAM,
};

use std::collections::BTreeMap;
use std::path::Path;

use crate::bandit::{read_instance_json, LinearBanditInstance, RngStream};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Instance source given on the command line: a generator spec such as
/// `std:d=10,delta=0.3,noise=0` or `sphere:d=5,k=100,seed=3`, or a JSON path.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    Standard {
        d: usize,
        delta: f64,
        noise: Option<f64>,
    },
    Sphere {
        d: usize,
        k: usize,
        seed: u64,
        noise: Option<f64>,
    },
    File(String),
}

fn parse_kv(body: &str) -> Result<BTreeMap<&str, &str>> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))
        })
        .collect()
}

fn take<V: std::str::FromStr>(kv: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<V>> {
    kv.remove(key)
        .map(|v| {
            v.parse::<V>()
                .map_err(|_| Error::Parse(format!("bad value '{v}' for '{key}'")))
        })
        .transpose()
}

fn need<V>(v: Option<V>, key: &str) -> Result<V> {
    v.ok_or_else(|| Error::Parse(format!("missing '{key}'")))
}

impl InstanceSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, body) = match s.split_once(':') {
            Some((k, b)) if k == "std" || k == "sphere" => (k, b),
            _ => return Ok(InstanceSpec::File(s.to_string())),
        };
        let mut kv = parse_kv(body)?;
        let spec = if kind == "std" {
            InstanceSpec::Standard {
                d: need(take(&mut kv, "d")?, "d")?,
                delta: need(take(&mut kv, "delta")?, "delta")?,
                noise: take(&mut kv, "noise")?,
            }
        } else {
            InstanceSpec::Sphere {
                d: need(take(&mut kv, "d")?, "d")?,
                k: take(&mut kv, "k")?.unwrap_or(100),
                seed: take(&mut kv, "seed")?.unwrap_or(0),
                noise: take(&mut kv, "noise")?,
            }
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::Parse(format!("unknown key '{extra}' in '{s}'")));
        }
        Ok(spec)
    }

    pub fn build<T: Scalar>(&self) -> Result<LinearBanditInstance<T>> {
        let (inst, noise) = match self {
            InstanceSpec::Standard { d, delta, noise } => {
                (gen_standard_instance(*d, T::of(*delta))?, *noise)
            }
            InstanceSpec::Sphere { d, k, seed, noise } => {
                let mut rng = RngStream::new(*seed).generator();
                (gen_random_sphere_instance(*d, *k, &mut rng)?, *noise)
            }
            InstanceSpec::File(path) => (read_instance_json(Path::new(path))?, None),
        };
        match noise {
            Some(s) => inst.with_noise_std(T::of(s)),
            None => Ok(inst),
        }
    }
}
