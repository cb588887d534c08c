//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use malinbai::algorithms::{num_rounds, run_gen, run_star, AgentState, Algorithm, ServerState};
use malinbai::bandit::RngStream;
use malinbai::design::{g_optimal_design, weighted_gram, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use malinbai::experiments::{
    gen_standard_instance, monte_carlo, spearman, theorem1_bound, InstanceFamily, SweepConfig,
};
use malinbai::linalg::{quad_norm_sq, SymMatrix};
use malinbai::topology::{
    build_partition, greedy_dominating_set, validate_partition, AgentGraph, Partition,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || {
        format!("took {elapsed:.1?}, limit {limit:?}")
    })
}

fn noiseless_soundness() -> Check {
    let start = Instant::now();
    let mut runs = 0;
    for d in [2usize, 4, 8, 10] {
        let inst = gen_standard_instance::<f64>(d, 0.1)
            .and_then(|i| i.with_noise_std(0.0))
            .map_err(|e| e.to_string())?;
        let t = 40 * num_rounds(d);
        for m in [1usize, 3] {
            let graph = AgentGraph::star(m).map_err(|e| e.to_string())?;
            let part = build_partition(&graph, &greedy_dominating_set(&graph))
                .map_err(|e| e.to_string())?;
            let root = RngStream::new(1000 + (d * 10 + m) as u64);
            for trial in 0..50u64 {
                let s = root.child(trial);
                let star = run_star(&inst, m, t, &s).map_err(|e| e.to_string())?;
                let gen = run_gen(&inst, &graph, &part, t, &s).map_err(|e| e.to_string())?;
                ensure(star.correct && gen.correct, || {
                    format!(
                        "d={d} M={m} trial {trial}: star {} gen {}",
                        star.chosen_arm, gen.chosen_arm
                    )
                })?;
                runs += 2;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "{runs}/{runs} runs correct in {:.1?}",
        start.elapsed()
    ))
}

fn canonical(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Minimum over a simplex grid of `max_a aᵀ V(π)⁻¹ a` for three 2-d arms.
fn grid_optimum(arms: &[Vec<f64>], steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let w = [i as f64, j as f64, (steps - i - j) as f64].map(|x| x / steps as f64);
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (arm, &wi) in arms.iter().zip(&w) {
                a += wi * arm[0] * arm[0];
                b += wi * arm[0] * arm[1];
                c += wi * arm[1] * arm[1];
            }
            let det = a * c - b * b;
            if det <= 1e-12 {
                continue;
            }
            let g = arms
                .iter()
                .map(|x| (c * x[0] * x[0] - 2.0 * b * x[0] * x[1] + a * x[1] * x[1]) / det)
                .fold(0.0, f64::max);
            best = best.min(g);
        }
    }
    best
}

fn design_quality() -> Check {
    for d in 2..=25 {
        let des = g_optimal_design(&canonical(d), DEFAULT_EPSILON, DEFAULT_MAX_ITER)
            .map_err(|e| e.to_string())?;
        let dev = des
            .weights
            .iter()
            .map(|w| (w - 1.0 / d as f64).abs())
            .fold(0.0, f64::max);
        ensure(
            dev <= 1e-6 && (des.g_value - d as f64).abs() <= 1e-6,
            || format!("canonical d={d}: weight dev {dev:e}, g {}", des.g_value),
        )?;
    }
    let root = RngStream::new(42);
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = root.child(i).generator();
        let arms: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let des = g_optimal_design(&arms, DEFAULT_EPSILON, DEFAULT_MAX_ITER)
            .map_err(|e| e.to_string())?;
        ensure(des.converged && des.g_value <= 10.0 + 1e-9, || {
            format!(
                "random set {i}: g {} converged {}",
                des.g_value, des.converged
            )
        })?;
        worst = worst.max(des.g_value);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut sets = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]]];
    let mut rng = RngStream::new(43).generator();
    for _ in 0..4 {
        sets.push(
            (0..3)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect(),
        );
    }
    let mut max_gap = 0.0f64;
    for arms in &sets {
        let des = g_optimal_design(arms, 0.01, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
        let gap = (des.g_value - grid_optimum(arms, 1000)).abs();
        ensure(gap <= 0.05, || {
            format!("3-arm oracle gap {gap} for {arms:?}")
        })?;
        max_gap = max_gap.max(gap);
    }
    Ok(format!(
        "canonical exact; random max g {worst:.3} ≤ 10; oracle gap {max_gap:.2e}"
    ))
}

fn aggregation_identity() -> Check {
    let root = RngStream::new(4);
    let mut worst = 0.0f64;
    for cfg in 0..20u64 {
        let mut rng = root.child(cfg).generator();
        let d = rng.random_range(2..=6);
        let k = rng.random_range(d..=d + 4);
        let agents = rng.random_range(1..=8);
        let arms: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let counts: Vec<usize> = (0..k).map(|_| rng.random_range(1..=6)).collect();
        let b: usize = counts.iter().sum();
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / b as f64).collect();
        let states: Vec<AgentState<f64>> = (0..agents)
            .map(|id| {
                let mut s = AgentState::new(id, d);
                for (a, &c) in arms.iter().zip(&counts) {
                    s.record_pulls(a, &vec![1.0; c]);
                }
                s
            })
            .collect();
        let mut server = ServerState::new((0..k).collect());
        server.reset(d);
        server.aggregate(&states);
        let v_pi: SymMatrix<f64> = weighted_gram(&arms, &weights);
        for a in &arms {
            let lhs =
                quad_norm_sq(&server.gram, a).map_err(|e| e.to_string())? * (b * agents) as f64;
            let rhs = quad_norm_sq(&v_pi, a).map_err(|e| e.to_string())?;
            let rel = (lhs - rhs).abs() / rhs.abs();
            ensure(rel <= 1e-9, || format!("config {cfg}: {lhs} vs {rhs}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("20 configurations, max relative error {worst:.1e}"))
}

fn theorem1_consistency() -> Check {
    let start = Instant::now();
    let cfg = SweepConfig {
        algorithm: Algorithm::Star,
        family: InstanceFamily::Standard {
            d: 10,
            deltas: vec![0.5],
        },
        noise_std: None,
        m: 15,
        t: 2000,
        trials: 200,
        master_seed: 7,
        graph: None,
        partition: None,
    };
    let bound = theorem1_bound(2000.0, 15.0, 10.0, 10.0, 0.5);
    ensure((bound - 1.147e-2).abs() <= 1e-5, || {
        format!("bound {bound}")
    })?;
    let est = monte_carlo::<f64>(&cfg).map_err(|e| e.to_string())?;
    let e = &est[0];
    ensure(e.bound <= 0.05, || format!("grid bound {}", e.bound))?;
    ensure(e.p_hat <= e.bound + 3.0 * e.stderr, || {
        format!("p_hat {} > bound {} + 3·{}", e.p_hat, e.bound, e.stderr)
    })?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "p_hat {} ≤ {:.4e} + 3·{:.3}",
        e.p_hat, e.bound, e.stderr
    ))
}

fn delta_sweep_shape() -> Check {
    let start = Instant::now();
    let deltas: Vec<f64> = (1..=10).map(|i| i as f64 * 0.05).collect();
    let cfg = SweepConfig {
        algorithm: Algorithm::Star,
        family: InstanceFamily::Standard {
            d: 10,
            deltas: deltas.clone(),
        },
        noise_std: None,
        m: 15,
        t: 150,
        trials: 100,
        master_seed: 2024,
        graph: None,
        partition: None,
    };
    let est = monte_carlo::<f64>(&cfg).map_err(|e| e.to_string())?;
    let p: Vec<f64> = est.iter().map(|e| e.p_hat).collect();
    let rho = if p.iter().any(|&x| x > 0.0) {
        let rho = spearman(&deltas, &p).ok_or("spearman undefined")?;
        ensure(rho <= -0.8, || format!("spearman {rho}, p_hat {p:?}"))?;
        Some(rho)
    } else {
        None
    };
    let last = *p.last().expect("ten grid points");
    ensure(last <= 0.05, || format!("p_hat at 0.5 is {last}"))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "spearman {rho:.3?}, p_hat(0.5) = {last}, p_hat = {p:?}"
    ))
}

fn random_graph<R: Rng>(n: usize, rng: &mut R) -> Result<AgentGraph, String> {
    let p = rng.random_range(0.05..0.6);
    AgentGraph::random_connected(n, p, rng).map_err(|e| e.to_string())
}

fn ledger_exactness() -> Check {
    let root = RngStream::new(6);
    for cfg in 0..50u64 {
        let mut rng = root.child(cfg).generator();
        let m = rng.random_range(1..=20);
        let k = rng.random_range(2..=16);
        let inst = gen_standard_instance::<f64>(k, rng.random_range(0.05..0.5))
            .map_err(|e| e.to_string())?;
        let r = num_rounds(k) as u64;
        let t = num_rounds(k) * k;
        let graph = random_graph(m, &mut rng)?;
        let part =
            build_partition(&graph, &greedy_dominating_set(&graph)).map_err(|e| e.to_string())?;
        let s = root.child(1000 + cfg);
        let star = run_star(&inst, m, t, &s)
            .map_err(|e| e.to_string())?
            .ledger
            .data_messages();
        let gen = run_gen(&inst, &graph, &part, t, &s)
            .map_err(|e| e.to_string())?
            .ledger
            .data_messages();
        let (mm, pp) = (m as u64, part.num_blocks() as u64);
        ensure(star == 2 * mm * r, || {
            format!("config {cfg}: star {star} != {}", 2 * mm * r)
        })?;
        let expect = 2 * (mm - pp) * r + pp;
        ensure(gen == expect, || {
            format!("config {cfg}: gen {gen} != {expect}")
        })?;
    }
    Ok("50 configurations match both closed forms".into())
}

fn gen_star_reduction() -> Check {
    let root = RngStream::new(8);
    for cfg in 0..20u64 {
        let mut rng = root.child(cfg).generator();
        let m = rng.random_range(1..=12);
        let k = rng.random_range(2..=12);
        let inst = gen_standard_instance::<f64>(k, rng.random_range(0.05..0.5))
            .map_err(|e| e.to_string())?;
        let t = num_rounds(k) * k + rng.random_range(0..50);
        let graph = AgentGraph::star(m).map_err(|e| e.to_string())?;
        let part = Partition::single_block(&graph, 1);
        let s = root.child(500 + cfg);
        let gen = run_gen(&inst, &graph, &part, t, &s).map_err(|e| e.to_string())?;
        let star = run_star(&inst, m, t, &s).map_err(|e| e.to_string())?;
        let gj = serde_json::to_string(&(gen.chosen_arm, &gen.blocks[0].rounds))
            .map_err(|e| e.to_string())?;
        let sj =
            serde_json::to_string(&(star.chosen_arm, &star.rounds)).map_err(|e| e.to_string())?;
        ensure(gj == sj, || {
            format!("config {cfg} (M={m}, K={k}, T={t}) differs")
        })?;
    }
    Ok("20 configurations byte-identical".into())
}

fn topology_validity() -> Check {
    let root = RngStream::new(99);
    for i in 0..100u64 {
        let mut rng = root.child(i).generator();
        let n = rng.random_range(1..=50);
        let g = random_graph(n, &mut rng)?;
        let p = build_partition(&g, &greedy_dominating_set(&g)).map_err(|e| e.to_string())?;
        let report = validate_partition(&g, &p);
        ensure(report.valid, || {
            format!("graph {i}: {:?}", report.violation)
        })?;
    }
    let fixture = AgentGraph::parse_edge_list(
        "n 8\n1 2\n1 5\n1 6\n2 3\n2 6\n5 6\n3 4\n4 7\n4 8\n3 7\n7 8\n6 7\n",
    )
    .map_err(|e| e.to_string())?;
    let p = build_partition(&fixture, &[1, 4]).map_err(|e| e.to_string())?;
    ensure(
        p.blocks == vec![vec![1, 2, 5, 6], vec![3, 4, 7, 8]] && p.hubs == vec![1, 4],
        || format!("fixture partition {p:?}"),
    )?;
    ensure(validate_partition(&fixture, &p).valid, || {
        "fixture partition invalid".into()
    })?;
    Ok("100 random graphs valid; eight-agent fixture reproduced".into())
}

fn invoke(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_malinbai"))
        .args(["--threads", threads])
        .args(args)
        .env_remove("MALINBAI_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn sweep_files(config: &Path, threads: &str) -> Result<Vec<Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().ok_or("non-utf8 temp path")?;
    invoke(
        &[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out,
        ],
        threads,
    )?;
    ["results.csv", "results.json", "plotdata.csv"]
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).map_err(|e| e.to_string()))
        .collect()
}

fn cli_determinism() -> Check {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let graph = work.path().join("ring.txt");
    std::fs::write(&graph, AgentGraph::cycle(6).unwrap().to_edge_list())
        .map_err(|e| e.to_string())?;
    let arms = work.path().join("arms.csv");
    std::fs::write(&arms, "1,0,0\n0,1,0\n0,0,1\n0.6,0.8,0\n").map_err(|e| e.to_string())?;
    let config = work.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{"algorithm":"gen","family":{"kind":"standard","d":6,"deltas":[0.1,0.3]},
            "m":6,"t":60,"trials":40,"master_seed":3,"graph":{"kind":"random","p":0.3,"seed":1}}"#,
    )
    .map_err(|e| e.to_string())?;
    let g = graph.to_str().unwrap();
    let a = arms.to_str().unwrap();
    let invocations: Vec<Vec<&str>> = vec![
        vec![
            "run",
            "--algo",
            "star",
            "--instance",
            "std:d=8,delta=0.2",
            "--M",
            "4",
            "--T",
            "60",
            "--seed",
            "5",
        ],
        vec![
            "run",
            "--algo",
            "gen",
            "--instance",
            "sphere:d=5,k=30,seed=2",
            "--M",
            "6",
            "--T",
            "90",
            "--seed",
            "5",
            "--graph",
            g,
        ],
        vec![
            "run",
            "--algo",
            "ma-od",
            "--instance",
            "std:d=6,delta=0.1",
            "--M",
            "4",
            "--T",
            "60",
            "--seed",
            "11",
        ],
        vec!["design", "--arms", a],
        vec!["domset", "--graph", g],
        vec![
            "bound", "--thm", "1", "--T", "2000", "--M", "15", "--d", "10", "--K", "10", "--delta",
            "0.5",
        ],
    ];
    for args in &invocations {
        let first = invoke(args, "1")?;
        ensure(first == invoke(args, "1")?, || {
            format!("{args:?} differs across runs")
        })?;
        ensure(first == invoke(args, "4")?, || {
            format!("{args:?} differs across thread counts")
        })?;
    }
    let base = sweep_files(&config, "1")?;
    ensure(base == sweep_files(&config, "1")?, || {
        "sweep differs across runs".into()
    })?;
    ensure(base == sweep_files(&config, "4")?, || {
        "sweep differs across thread counts".into()
    })?;
    Ok(format!(
        "{} invocations plus a sweep byte-identical",
        invocations.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("noiseless soundness", noiseless_soundness),
        ("G-optimal design quality", design_quality),
        ("aggregated design identity", aggregation_identity),
        ("error bound consistency", theorem1_consistency),
        ("gap sweep shape", delta_sweep_shape),
        ("communication ledger exactness", ledger_exactness),
        ("gen/star reduction", gen_star_reduction),
        ("topology validity", topology_validity),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
