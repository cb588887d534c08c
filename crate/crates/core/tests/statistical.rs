use malinbai::algorithms::{run_gen, Algorithm};
use malinbai::bandit::RngStream;
use malinbai::design::g_optimal_design;
use malinbai::experiments::{
    estimate_error, gen_standard_instance, monte_carlo, theorem1_bound, write_sweep_outputs,
    InstanceFamily, SweepConfig, Topology,
};
use malinbai::topology::AgentGraph;
use rand::Rng;

fn standard_sweep(m: usize, t: usize, trials: usize, deltas: Vec<f64>, seed: u64) -> SweepConfig {
    SweepConfig {
        algorithm: Algorithm::Star,
        family: InstanceFamily::Standard { d: 10, deltas },
        noise_std: None,
        m,
        t,
        trials,
        master_seed: seed,
        graph: None,
        partition: None,
    }
}

fn error_rate(m: usize, t: usize, trials: usize, delta: f64, seed: u64) -> f64 {
    monte_carlo::<f64>(&standard_sweep(m, t, trials, vec![delta], seed)).unwrap()[0].p_hat
}

#[test]
fn error_non_increasing_in_agents() {
    let n = 500.0;
    let p: Vec<f64> = [1, 5, 15]
        .iter()
        .map(|&m| error_rate(m, 60, 500, 0.1, 31))
        .collect();
    for w in p.windows(2) {
        let pooled = (w[0] + w[1]) / 2.0;
        let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
        assert!(w[1] <= w[0] + 2.0 * se, "{p:?}");
    }
    assert!(p[0] > p[2], "{p:?}");
}

#[test]
fn log_error_slope_in_agents_is_negative() {
    let ms = [1.0, 2.0, 3.0, 4.0];
    let logs: Vec<f64> = ms
        .iter()
        .map(|&m| error_rate(m as usize, 60, 400, 0.1, 77))
        .map(|p| {
            assert!(p > 0.0, "errors must be measurable");
            p.ln()
        })
        .collect();
    let mx = ms.iter().sum::<f64>() / 4.0;
    let my = logs.iter().sum::<f64>() / 4.0;
    let cov: f64 = ms.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    assert!(cov < 0.0, "log errors {logs:?}");
}

#[test]
fn bound_holds_where_informative() {
    let mut checked = 0;
    for (t, delta) in [
        (1500, 0.5),
        (2000, 0.5),
        (2500, 0.45),
        (3000, 0.4),
        (1000, 0.3),
    ] {
        let bound = theorem1_bound(t as f64, 15.0, 10.0, 10.0, delta);
        if bound > 0.05 {
            continue;
        }
        checked += 1;
        let e = &monte_carlo::<f64>(&standard_sweep(15, t, 200, vec![delta], t as u64)).unwrap()[0];
        assert!(e.p_hat <= e.bound + 3.0 * e.stderr, "{e:?}");
        assert_eq!(e.bound, bound);
    }
    assert!(checked >= 2);
}

#[test]
fn gen_error_matches_star_on_star_graph() {
    let inst = gen_standard_instance::<f64>(10, 0.15).unwrap();
    let topo = Topology::greedy(AgentGraph::star(15).unwrap()).unwrap();
    let root = RngStream::new(3);
    let (star, _) = estimate_error(Algorithm::Star, &inst, 15, 150, 100, None, &root).unwrap();
    let (gen, ledger) =
        estimate_error(Algorithm::Gen, &inst, 15, 150, 100, Some(&topo), &root).unwrap();
    assert_eq!(star, gen);
    assert_eq!(ledger.votes, 100);
}

#[test]
fn generic_network_is_sound_without_noise() {
    let inst = gen_standard_instance::<f64>(6, 0.2)
        .unwrap()
        .with_noise_std(0.0)
        .unwrap();
    let root = RngStream::new(12);
    for i in 0..20u64 {
        let mut rng = root.child(i).generator();
        let n = rng.random_range(2..=25);
        let g = AgentGraph::random_connected(n, 0.2, &mut rng).unwrap();
        let topo = Topology::greedy(g).unwrap();
        let out = run_gen(
            &inst,
            &topo.graph,
            &topo.partition,
            18,
            &root.child(100 + i),
        )
        .unwrap();
        assert!(out.correct);
    }
}

fn grid_optimum(arms: &[Vec<f64>], steps: usize) -> f64 {
    let k = arms.len();
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; k];
    fn visit(
        arms: &[Vec<f64>],
        counts: &mut Vec<usize>,
        slot: usize,
        left: usize,
        steps: usize,
        best: &mut f64,
    ) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (x, &n) in arms.iter().zip(counts.iter()) {
                let w = n as f64 / steps as f64;
                a += w * x[0] * x[0];
                b += w * x[0] * x[1];
                c += w * x[1] * x[1];
            }
            let det = a * c - b * b;
            if det > 1e-12 {
                let g = arms
                    .iter()
                    .map(|x| (c * x[0] * x[0] - 2.0 * b * x[0] * x[1] + a * x[1] * x[1]) / det)
                    .fold(0.0, f64::max);
                *best = best.min(g);
            }
            return;
        }
        for n in 0..=left {
            counts[slot] = n;
            visit(arms, counts, slot + 1, left - n, steps, best);
        }
    }
    visit(arms, &mut counts, 0, steps, steps, &mut best);
    best
}

#[test]
fn four_arm_plane_designs_match_grid() {
    let root = RngStream::new(404);
    for i in 0..10u64 {
        let mut rng = root.child(i).generator();
        let arms: Vec<Vec<f64>> = (0..4)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let des = g_optimal_design(&arms, 0.01, 10_000).unwrap();
        let oracle = grid_optimum(&arms, 200);
        assert!(
            (des.g_value - oracle).abs() <= 0.05,
            "{} vs {oracle}",
            des.g_value
        );
    }
}

#[test]
fn result_headers_are_stable() {
    let cfg = standard_sweep(2, 40, 5, vec![0.3], 1);
    let est = monte_carlo::<f64>(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_sweep_outputs(dir.path(), &cfg, &est).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "algorithm,param,d,k,m,t,trials,errors,p_hat,stderr,delta_min,mean_messages,mean_index_broadcasts,bound"
    );
    let plot = std::fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "x,y,y_err");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["m"], 2);
    assert_eq!(doc["estimates"][0]["trials"], 5);
}
