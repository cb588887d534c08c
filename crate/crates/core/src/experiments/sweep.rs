use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{theorem1_bound, theorem2_bound};
use super::instances::{gen_random_sphere_instance, gen_standard_instance};
use crate::algorithms::{run_gen, run_ma_od, run_star, Algorithm, CommLedger};
use crate::bandit::{read_instance_json, LinearBanditInstance, RngStream};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{build_partition, greedy_dominating_set, AgentGraph, Partition};

/// Child index under a grid point reserved for instance generation.
pub const INSTANCE_STREAM: u64 = u64::MAX - 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFamily {
    /// Canonical basis of `ℝᵈ`, one grid point per gap.
    Standard { d: usize, deltas: Vec<f64> },
    /// `k` random unit arms, one grid point (one instance) per dimension.
    Sphere { k: usize, dims: Vec<usize> },
    /// A single instance read from a JSON file.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSpec {
    /// Star on `m` vertices centred at vertex 1.
    Star,
    File {
        path: PathBuf,
    },
    Random {
        p: f64,
        seed: u64,
    },
}

/// Monte-Carlo sweep over one parameter of an instance family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub algorithm: Algorithm,
    pub family: InstanceFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    pub m: usize,
    pub t: usize,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PathBuf>,
}

/// Error rate and communication statistics at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub algorithm: Algorithm,
    /// Swept value: the gap for standard instances, the dimension for sphere ones.
    pub param: f64,
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub trials: usize,
    pub errors: usize,
    pub p_hat: f64,
    pub stderr: f64,
    pub delta_min: f64,
    pub mean_messages: f64,
    pub mean_index_broadcasts: f64,
    pub bound: f64,
}

/// Network used by generic-network runs.
#[derive(Clone, Debug)]
pub struct Topology {
    pub graph: AgentGraph,
    pub partition: Partition,
}

impl Topology {
    pub fn greedy(graph: AgentGraph) -> Result<Self> {
        let dom = greedy_dominating_set(&graph);
        let partition = build_partition(&graph, &dom)?;
        Ok(Self { graph, partition })
    }
}

/// Instances for every grid point, with their swept parameter value.
pub fn grid_instances<T: Scalar>(cfg: &SweepConfig) -> Result<Vec<(f64, LinearBanditInstance<T>)>> {
    let root = RngStream::new(cfg.master_seed);
    let mut out = Vec::new();
    match &cfg.family {
        InstanceFamily::Standard { d, deltas } => {
            for &delta in deltas {
                out.push((delta, gen_standard_instance(*d, T::of(delta))?));
            }
        }
        InstanceFamily::Sphere { k, dims } => {
            for (g, &d) in dims.iter().enumerate() {
                let mut rng = root.child(g as u64).child(INSTANCE_STREAM).generator();
                out.push((d as f64, gen_random_sphere_instance(d, *k, &mut rng)?));
            }
        }
        InstanceFamily::File { path } => {
            let inst = read_instance_json::<T>(path)?;
            out.push((inst.dim() as f64, inst));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("parameter grid is empty".into()));
    }
    match cfg.noise_std {
        Some(s) => out
            .into_iter()
            .map(|(p, inst)| Ok((p, inst.with_noise_std(T::of(s))?)))
            .collect(),
        None => Ok(out),
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be >= 1".into()));
        }
        let empty = match &self.family {
            InstanceFamily::Standard { deltas, .. } => deltas.is_empty(),
            InstanceFamily::Sphere { dims, .. } => dims.is_empty(),
            InstanceFamily::File { .. } => false,
        };
        if empty {
            return Err(Error::InvalidConfig("parameter grid is empty".into()));
        }
        if self.algorithm != Algorithm::Gen && (self.graph.is_some() || self.partition.is_some()) {
            return Err(Error::InvalidConfig(
                "graph/partition only apply to gen".into(),
            ));
        }
        Ok(())
    }

    /// Graph and partition for gen runs (star on `m` agents by default).
    pub fn topology(&self) -> Result<Option<Topology>> {
        if self.algorithm != Algorithm::Gen {
            return Ok(None);
        }
        let graph = match self.graph.as_ref().unwrap_or(&GraphSpec::Star) {
            GraphSpec::Star => AgentGraph::star(self.m)?,
            GraphSpec::File { path } => AgentGraph::read(path)?,
            GraphSpec::Random { p, seed } => {
                AgentGraph::random_connected(self.m, *p, &mut RngStream::new(*seed).generator())?
            }
        };
        if graph.num_vertices() != self.m {
            return Err(Error::InvalidConfig(format!(
                "graph has {} vertices but m = {}",
                graph.num_vertices(),
                self.m
            )));
        }
        let topo = match &self.partition {
            Some(p) => Topology {
                partition: Partition::read(p)?,
                graph,
            },
            None => Topology::greedy(graph)?,
        };
        Ok(Some(topo))
    }
}

struct TrialResult {
    correct: bool,
    ledger: CommLedger,
}

fn run_one<T: Scalar>(
    algorithm: Algorithm,
    inst: &LinearBanditInstance<T>,
    m: usize,
    t: usize,
    topo: Option<&Topology>,
    stream: &RngStream,
) -> Result<TrialResult> {
    let out = match algorithm {
        Algorithm::Star => run_star(inst, m, t, stream)?,
        Algorithm::MaOd => run_ma_od(inst, m, t, stream)?,
        Algorithm::Gen => {
            let topo = topo.ok_or_else(|| Error::InvalidConfig("gen needs a topology".into()))?;
            run_gen(inst, &topo.graph, &topo.partition, t, stream)?
        }
    };
    Ok(TrialResult {
        correct: out.correct,
        ledger: out.ledger,
    })
}

/// Runs `trials` independent runs on one instance. Trial `i` uses the
/// substream `root / i`; results do not depend on scheduling.
pub fn estimate_error<T: Scalar>(
    algorithm: Algorithm,
    inst: &LinearBanditInstance<T>,
    m: usize,
    t: usize,
    trials: usize,
    topo: Option<&Topology>,
    root: &RngStream,
) -> Result<(usize, CommLedger)> {
    let results: Vec<Result<TrialResult>> = (0..trials)
        .into_par_iter()
        .map(|i| run_one(algorithm, inst, m, t, topo, &root.child(i as u64)))
        .collect();
    let mut errors = 0;
    let mut total = CommLedger::default();
    for (i, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| Error::Trial {
            trial: i,
            source: Box::new(e),
        })?;
        errors += usize::from(!r.correct);
        total.merge(&r.ledger);
    }
    Ok((errors, total))
}

/// Error estimates for every grid point of `cfg`. Grid point `g`, trial `i`
/// draws from `master_seed / g / i`.
pub fn monte_carlo<T: Scalar>(cfg: &SweepConfig) -> Result<Vec<ErrorEstimate>> {
    cfg.validate()?;
    let topo = cfg.topology()?;
    let root = RngStream::new(cfg.master_seed);
    let mut out = Vec::new();
    for (g, (param, inst)) in grid_instances::<T>(cfg)?.into_iter().enumerate() {
        let (errors, ledger) = estimate_error(
            cfg.algorithm,
            &inst,
            cfg.m,
            cfg.t,
            cfg.trials,
            topo.as_ref(),
            &root.child(g as u64),
        )?;
        let n = cfg.trials as f64;
        let p_hat = errors as f64 / n;
        let delta_min = inst.gap_profile()?.delta_min.as_f64();
        let (d, k) = (inst.dim() as f64, inst.num_arms() as f64);
        let bound = match cfg.algorithm {
            Algorithm::Star => theorem1_bound(cfg.t as f64, cfg.m as f64, d, k, delta_min),
            Algorithm::MaOd => theorem1_bound(cfg.t as f64, 1.0, d, k, delta_min),
            Algorithm::Gen => theorem2_bound(cfg.t as f64, d, k, delta_min),
        };
        out.push(ErrorEstimate {
            algorithm: cfg.algorithm,
            param,
            d: inst.dim(),
            k: inst.num_arms(),
            m: cfg.m,
            t: cfg.t,
            trials: cfg.trials,
            errors,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / n).sqrt(),
            delta_min,
            mean_messages: ledger.data_messages() as f64 / n,
            mean_index_broadcasts: ledger.index_broadcasts as f64 / n,
            bound,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct ResultsDocument<'a> {
    config: &'a SweepConfig,
    estimates: &'a [ErrorEstimate],
}

#[derive(Serialize)]
struct PlotRow {
    x: f64,
    y: f64,
    y_err: f64,
}

/// Writes `results.csv`, `results.json` and `plotdata.csv` into `dir`.
pub fn write_sweep_outputs(
    dir: &Path,
    cfg: &SweepConfig,
    estimates: &[ErrorEstimate],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for e in estimates {
        w.serialize(e)?;
    }
    w.flush()?;
    let doc = ResultsDocument {
        config: cfg,
        estimates,
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    fs::write(dir.join("results.json"), json)?;
    let mut p = csv::Writer::from_path(dir.join("plotdata.csv"))?;
    for e in estimates {
        p.serialize(PlotRow {
            x: e.param,
            y: e.p_hat,
            y_err: e.stderr,
        })?;
    }
    p.flush()?;
    Ok(())
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite"));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}
