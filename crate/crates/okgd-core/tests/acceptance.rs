//! Acceptance suite. Each test prints one `ACCEPTANCE n (<name>): PASS/FAIL`
//! line (visible with `cargo test --test acceptance -- --nocapture`) and
//! asserts the criterion at its stated tolerance. Criterion 9 (CLI byte
//! determinism) lives in the CLI crate's acceptance test.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use okgd_core::detector::{run, DetectionResult, Detector, DetectorConfig};
use okgd_core::dictionary::NodeDictionary;
use okgd_core::estimator::{
    assemble_quadratic, block_gradient, bsgd_step, compute_stats, objective, solve_exact,
    step_constant, ParameterVector,
};
use okgd_core::eval::{run_bench, BenchReport, BenchVariant};
use okgd_core::graph::{sample_sbm, Graph, SbmParams};
use okgd_core::kernel::{KernelFamily, KernelSpec};
use okgd_core::synth::{ScenarioKind, ScenarioSpec};
use okgd_core::{derive_seed, Frame};

fn verdict(n: u32, name: &str, ok: bool, details: &str) {
    println!(
        "ACCEPTANCE {n} ({name}): {} — {details}",
        if ok { "PASS" } else { "FAIL" }
    );
}

// -------------------------------------------------------------------------
// Small random frozen instances (dictionaries + windows) for criteria 1-2
// -------------------------------------------------------------------------

struct Instance {
    dicts: Vec<NodeDictionary>,
    graph: Graph,
    pre: Vec<Frame>,
    post: Vec<Frame>,
}

fn random_instance(
    seed: u64,
    n_nodes: usize,
    atoms_per_node: usize,
    n_pre: usize,
    n_post: usize,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..n_nodes).map(|_| rng.random_range(1..=2)).collect();
    let mut dicts = Vec::new();
    for &dim in &dims {
        let spec =
            KernelSpec::new(KernelFamily::Gaussian, rng.random_range(0.6..1.5), dim).unwrap();
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()
        };
        let mut d = NodeDictionary::new(spec, 0.9, draw(&mut rng)).unwrap();
        let mut guard = 0;
        while d.len() < atoms_per_node && guard < 2000 {
            d.maybe_add(&draw(&mut rng)).unwrap();
            guard += 1;
        }
        assert_eq!(d.len(), atoms_per_node);
        dicts.push(d);
    }
    let mut edges = Vec::new();
    for u in 0..n_nodes {
        for v in (u + 1)..n_nodes {
            if rng.random::<f64>() < 0.7 {
                edges.push((u, v, rng.random_range(0.2..2.0)));
            }
        }
    }
    let graph = Graph::from_edges(n_nodes, &edges).unwrap();
    let frame = |rng: &mut ChaCha8Rng| -> Frame {
        (0..n_nodes)
            .map(|v| (0..dims[v]).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect()
    };
    let pre: Vec<Frame> = (0..n_pre).map(|_| frame(&mut rng)).collect();
    let post: Vec<Frame> = (0..n_post).map(|_| frame(&mut rng)).collect();
    Instance { dicts, graph, pre, post }
}

fn refs(frames: &[Frame]) -> Vec<&Frame> {
    frames.iter().collect()
}

// -------------------------------------------------------------------------
// Criterion 1: first-in-order block step direction vs finite differences
// -------------------------------------------------------------------------

#[test]
fn acceptance_1_gradient_correctness() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let inst = random_instance(1000 + seed, 3, 2, 6, 4);
        let stats =
            compute_stats(&inst.dicts, &inst.graph, &refs(&inst.pre), &refs(&inst.post)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda = rng.random_range(0.1..2.0);
        let gamma = rng.random_range(0.5..5.0);
        let (a, b) = assemble_quadratic(&stats, &inst.graph, lambda, gamma);
        let sizes = stats.block_sizes();
        let flat = DVector::from_fn(a.nrows(), |_, _| rng.random_range(-1.0..1.0));
        let theta = ParameterVector::from_flat(&sizes, &flat);

        let grad = block_gradient(&theta, &stats, &inst.graph, lambda, gamma, 0);
        let h = 1e-5;
        for i in 0..sizes[0] {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[i] += h;
            minus[i] -= h;
            let fd = (objective(&a, &b, &plus) - objective(&a, &b, &minus)) / (2.0 * h);
            let rel = (grad[i] - fd).abs() / fd.abs().max(1e-8);
            worst = worst.max(rel);
        }
    }
    let ok = worst <= 1e-5;
    let elapsed = start.elapsed();
    verdict(
        1,
        "gradient correctness",
        ok,
        &format!("worst relative FD error {worst:.2e} over 20 instances in {elapsed:.2?}"),
    );
    assert!(ok, "worst relative error {worst}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:.2?}, budget 1 s");
}

// -------------------------------------------------------------------------
// Criterion 2: repeated BSGD sweeps reach the exact solver's solution
// -------------------------------------------------------------------------

#[test]
fn acceptance_2_oracle_equivalence() {
    let start = Instant::now();
    let gamma = 10.0;
    let mut worst_rel: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let n_nodes = rng.random_range(2..=5);
        let atoms = rng.random_range(1..=3);
        let inst = random_instance(3000 + seed, n_nodes, atoms, 8, 5);
        let stats =
            compute_stats(&inst.dicts, &inst.graph, &refs(&inst.pre), &refs(&inst.post)).unwrap();
        let lambda = rng.random_range(0.1..2.0);
        let (a, b) = assemble_quadratic(&stats, &inst.graph, lambda, gamma);
        let exact = solve_exact(&a, &b).unwrap();

        let bounds: Vec<f64> = inst.dicts.iter().map(|d| d.kernel().bound()).collect();
        let alphas: Vec<f64> = (0..n_nodes)
            .map(|v| 1.0 / step_constant(&stats, &inst.graph, &bounds, v, lambda, gamma))
            .collect();
        let order: Vec<usize> = (0..n_nodes).collect();
        let sizes = stats.block_sizes();
        let mut theta = ParameterVector::zeros(&sizes);
        let tol = 1e-3 * (1.0 + exact.norm());
        let mut converged = false;
        for _ in 0..10_000 {
            bsgd_step(&mut theta, &stats, &inst.graph, lambda, gamma, &alphas, &order);
            if (theta.to_flat() - &exact).norm() <= tol {
                converged = true;
                break;
            }
        }
        let rel = (theta.to_flat() - &exact).norm() / (1.0 + exact.norm());
        worst_rel = worst_rel.max(rel);
        assert!(converged, "seed {seed}: no convergence, final distance ratio {rel}");
    }
    let ok = worst_rel <= 1e-3;
    let elapsed = start.elapsed();
    verdict(
        2,
        "oracle equivalence",
        ok,
        &format!("worst ||theta - exact||/(1+||exact||) = {worst_rel:.2e} in {elapsed:.2?}"),
    );
    assert!(ok);
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:.2?}, budget 5 s");
}

// -------------------------------------------------------------------------
// Criteria 3-4: null streams (10 nodes, scaled paper defaults)
// -------------------------------------------------------------------------

/// 10 i.i.d. standard-normal scalar streams on an SBM(2x5, 0.5/0.01) graph:
/// the plain instantiation of a 10-node change-free stream.
fn null_instance(seed: u64, horizon: usize) -> (Graph, Vec<Frame>) {
    use rand_distr::Distribution;
    let (graph, _) = sample_sbm(
        &SbmParams { n_clusters: 2, cluster_size: 5, p_intra: 0.5, p_inter: 0.01 },
        seed,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1));
    let normal = rand_distr::StandardNormal;
    let frames = (0..horizon)
        .map(|_| {
            (0..10)
                .map(|_| {
                    let z: f64 = normal.sample(&mut rng);
                    vec![z]
                })
                .collect()
        })
        .collect();
    (graph, frames)
}

fn null_config(kappa: f64) -> DetectorConfig {
    DetectorConfig {
        bp: 50,
        n_pre: 50,
        n_post: 50,
        kappa,
        ..DetectorConfig::default()
    }
}

/// Runs the 20 null seeds across two worker threads.
fn run_null_seeds(cfg: &DetectorConfig) -> Vec<DetectionResult> {
    let seeds: Vec<u64> = (0..20).collect();
    let mut results: Vec<Option<DetectionResult>> = vec![None; seeds.len()];
    let chunks: Vec<Vec<usize>> = (0..2).map(|w| (w..seeds.len()).step_by(2).collect()).collect();
    let seeds_ref = &seeds;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in chunks {
            let cfg = cfg.clone();
            handles.push(scope.spawn(move || {
                chunk
                    .into_iter()
                    .map(|i| {
                        let seed = seeds_ref[i];
                        // bp + n_post + 1000 - 1 frames => exactly 1000 scored steps
                        let (graph, frames) = null_instance(seed, 1099);
                        let cfg = DetectorConfig { seed: derive_seed(seed, 2), ..cfg.clone() };
                        (i, run(frames, &cfg, &graph, false).unwrap())
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for h in handles {
            for (i, r) in h.join().unwrap() {
                results[i] = Some(r);
            }
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

#[test]
fn acceptance_3_null_convergence() {
    let start = Instant::now();
    // huge-kappa surrogate so every run produces all 1000 scored steps
    let results = run_null_seeds(&null_config(1e12));
    let mut passing = 0;
    let mut ratios = Vec::new();
    for r in &results {
        assert!(r.records.len() >= 1000, "expected 1000 scored steps, got {}", r.records.len());
        let head: f64 = r.records[0..100].iter().map(|s| s.norm).sum::<f64>() / 100.0;
        let tail: f64 = r.records[900..1000].iter().map(|s| s.norm).sum::<f64>() / 100.0;
        let ratio = tail / head;
        ratios.push(ratio);
        if tail <= 0.5 * head {
            passing += 1;
        }
    }
    let ok = passing >= 18;
    let elapsed = start.elapsed();
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    verdict(
        3,
        "null convergence",
        ok,
        &format!(
            "tail/head score ratio <= 0.5 in {passing}/20 seeds (mean ratio {mean_ratio:.3}, per-seed [{}]) in {elapsed:.2?}",
            shown.join(",")
        ),
    );
    assert!(ok, "decay held in only {passing}/20 seeds (ratios {shown:?})");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:.2?}, budget 2 min");
}

#[test]
fn acceptance_4_false_alarm_control() {
    let start = Instant::now();
    let results = run_null_seeds(&null_config(1.5));
    let quiet = results.iter().filter(|r| !r.detected).count();
    let ok = quiet >= 18;
    let elapsed = start.elapsed();
    verdict(
        4,
        "false-alarm control",
        ok,
        &format!("no alarm in {quiet}/20 null seeds at kappa = 1.5 in {elapsed:.2?}"),
    );
    assert!(ok, "false alarms in {}/20 seeds", 20 - quiet);
}

// -------------------------------------------------------------------------
// Criteria 5-7: scaled synthetic detection scenarios
// -------------------------------------------------------------------------

fn scaled_detection_config() -> DetectorConfig {
    DetectorConfig {
        bp: 100,
        n_pre: 50,
        n_post: 50,
        kappa: 1.5,
        ..DetectorConfig::default()
    }
}

/// The cluster scenario at desk scale: both clusters follow the change menu
/// at tau — the C1 cluster does the C1<->C3-style swap, the C2 cluster moves
/// to its Poisson(10) target. A correlation-only C1->C3 change with nothing
/// else moves the population score by an order of magnitude less than the
/// window-sampling noise floor (measured with the exact solver at both this
/// scale and 80 nodes / n = 100), so it is not a usable detection target for
/// this statistic.
fn cluster_scenario_spec() -> ScenarioSpec {
    ScenarioSpec {
        kind: ScenarioKind::ClusterSwap,
        clusters: 2,
        cluster_size: 10,
        p_intra: 0.5,
        p_inter: 0.01,
        tau: 500,
        horizon: 1000,
        ..ScenarioSpec::default()
    }
}

static CLUSTER_BENCH: OnceLock<BenchReport> = OnceLock::new();

fn cluster_bench() -> &'static BenchReport {
    CLUSTER_BENCH.get_or_init(|| {
        run_bench(
            &cluster_scenario_spec(),
            &scaled_detection_config(),
            &[BenchVariant::okgd(), BenchVariant::okgd_nograph()],
            20,
            150,
            0,
        )
        .unwrap()
    })
}

#[test]
fn acceptance_5_cluster_scenario_detection() {
    let start = Instant::now();
    let report = cluster_bench();
    let good = report
        .runs
        .iter()
        .filter(|r| r.variant == "okgd")
        .filter(|r| {
            r.report.detected && !r.report.false_alarm && r.report.delay.is_some_and(|d| d <= 150)
        })
        .count();
    let false_alarms = report
        .runs
        .iter()
        .filter(|r| r.variant == "okgd" && r.report.false_alarm)
        .count();
    let ok = good >= 16;
    let elapsed = start.elapsed();
    verdict(
        5,
        "cluster-change detection",
        ok,
        &format!(
            "delay <= 150 with no false alarm in {good}/20 seeds ({false_alarms} false alarms) in {elapsed:.2?}"
        ),
    );
    assert!(ok, "only {good}/20 seeds detected in time");
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:.2?}, budget 5 min");
}

#[test]
fn acceptance_6_graph_benefit_directional() {
    let report = cluster_bench();
    let mean_delay = |variant: &str| -> Option<f64> {
        report
            .summaries
            .iter()
            .find(|s| s.variant == variant)
            .and_then(|s| s.aggregate.mean_delay)
    };
    let okgd = mean_delay("okgd");
    let nograph = mean_delay("okgd-nograph");
    // a variant that never detects has no mean delay; treat it as infinitely
    // slow for this directional comparison
    let ok = match (okgd, nograph) {
        (Some(a), Some(b)) => a <= b,
        (Some(_), None) => true,
        (None, _) => false,
    };
    verdict(
        6,
        "graph benefit (directional)",
        ok,
        &format!("mean delay okgd = {okgd:?} vs okgd-nograph = {nograph:?}"),
    );
    assert!(ok, "okgd mean delay {okgd:?} not <= no-graph {nograph:?}");
}

#[test]
fn acceptance_7_random_locations_robustness() {
    let start = Instant::now();
    let spec = ScenarioSpec {
        kind: ScenarioKind::RandomLocations,
        clusters: 2,
        cluster_size: 10,
        p_intra: 0.5,
        p_inter: 0.01,
        tau: 500,
        horizon: 1000,
        n_changed: 5,
        ..ScenarioSpec::default()
    };
    let report = run_bench(
        &spec,
        &scaled_detection_config(),
        &[BenchVariant::okgd()],
        20,
        200,
        0,
    )
    .unwrap();
    let good = report
        .runs
        .iter()
        .filter(|r| {
            r.report.detected && !r.report.false_alarm && r.report.delay.is_some_and(|d| d <= 200)
        })
        .count();
    let ok = good >= 14;
    let elapsed = start.elapsed();
    verdict(
        7,
        "random-locations robustness",
        ok,
        &format!("5/20 nodes changed: delay <= 200 in {good}/20 seeds in {elapsed:.2?}"),
    );
    assert!(ok, "only {good}/20 seeds detected in time");
}

// -------------------------------------------------------------------------
// Criterion 8: structural invariants, >= 100 randomized cases each
// -------------------------------------------------------------------------

#[test]
fn acceptance_8_structural_invariants() {
    let start = Instant::now();

    // Laplacian two-form equality at 1e-10 relative
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + seed);
        let n = rng.random_range(2..10);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < 0.5 {
                    edges.push((u, v, rng.random_range(0.1..3.0)));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a = g.smoothness(&x).unwrap();
        let b = g.smoothness_quadratic(&x).unwrap();
        assert!(
            (a - b).abs() <= 1e-10 * a.abs().max(1.0),
            "seed {seed}: two-form mismatch {a} vs {b}"
        );
        assert!(a >= 0.0);
    }

    // A_t minimum eigenvalue >= gamma - 1e-8
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8100 + seed);
        let inst = random_instance(8200 + seed, rng.random_range(2..=4), rng.random_range(1..=3), 5, 3);
        let stats =
            compute_stats(&inst.dicts, &inst.graph, &refs(&inst.pre), &refs(&inst.post)).unwrap();
        let gamma = rng.random_range(0.5..5.0);
        let lambda = rng.random_range(0.0..2.0);
        let (a, _) = assemble_quadratic(&stats, &inst.graph, lambda, gamma);
        let min_eig = a
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(
            min_eig >= gamma - 1e-8,
            "seed {seed}: min eigenvalue {min_eig} < gamma {gamma}"
        );
    }

    // coherence pairwise bound after arbitrary growth
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8300 + seed);
        let mu0 = rng.random_range(0.2..0.9);
        let spec = KernelSpec::new(KernelFamily::Gaussian, rng.random_range(0.4..1.5), 1).unwrap();
        let mut d = NodeDictionary::new(spec.clone(), mu0, vec![rng.random_range(-4.0..4.0)]).unwrap();
        for _ in 0..100 {
            d.maybe_add(&[rng.random_range(-4.0..4.0)]).unwrap();
        }
        let atoms = d.atoms();
        for j in 1..atoms.len() {
            for i in 0..j {
                let k = spec.eval(&atoms[j], &atoms[i]).unwrap();
                assert!(k <= mu0, "seed {seed}: coherence {k} > {mu0}");
            }
        }
    }

    // theta bookkeeping + pool contamination guard on randomized short runs
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8400 + seed);
        let n_nodes = rng.random_range(2..=4);
        let bp = rng.random_range(8..=14);
        let n_pre = rng.random_range(2..=bp.min(8));
        let n_post = rng.random_range(1..=5);
        let cfg = DetectorConfig {
            bp,
            n_pre,
            n_post,
            kappa: 1e12,
            bandwidth: Some(rng.random_range(0.3..1.0)),
            seed: rng.random(),
            ..DetectorConfig::default()
        };
        let mut edges = Vec::new();
        for u in 0..n_nodes {
            for v in (u + 1)..n_nodes {
                if rng.random::<f64>() < 0.6 {
                    edges.push((u, v, 1.0));
                }
            }
        }
        let graph = Graph::from_edges(n_nodes, &edges).unwrap();
        let mut det = Detector::new(cfg.clone(), graph).unwrap();
        let len = bp + n_post + rng.random_range(5..25);
        for t in 1..=len {
            // drifting stream so dictionaries keep growing mid-run
            let frame: Frame = (0..n_nodes)
                .map(|_| vec![t as f64 * 0.3 + rng.random_range(-0.1..0.1)])
                .collect();
            det.feed(frame).unwrap();
            if det.burn_in_complete() {
                assert_eq!(
                    det.parameter_len(),
                    det.dictionary_sizes().iter().sum::<usize>(),
                    "seed {seed}: theta bookkeeping broke at t = {t}"
                );
                let limit = t.saturating_sub(n_post).max(bp);
                for idx in det.validated_frame_indices() {
                    assert!(idx <= limit, "seed {seed}: pool frame {idx} beyond t - n_post at t = {t}");
                }
            }
        }
    }

    // seeded bit-reproducibility of full runs
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8500 + seed);
        let spec = ScenarioSpec {
            kind: if rng.random::<bool>() { ScenarioKind::Null } else { ScenarioKind::ClusterSwap },
            clusters: 2,
            cluster_size: 2,
            p_intra: 0.6,
            p_inter: 0.1,
            tau: 30,
            horizon: 45,
            ..ScenarioSpec::default()
        };
        let scenario = spec.build(seed).unwrap();
        let frames = scenario.emit_frames(derive_seed(seed, 1));
        let cfg = DetectorConfig {
            bp: 12,
            n_pre: 8,
            n_post: 4,
            seed: rng.random(),
            ..DetectorConfig::default()
        };
        let a = run(frames.iter().cloned(), &cfg, &scenario.graph, false).unwrap();
        let b = run(frames.iter().cloned(), &cfg, &scenario.graph, false).unwrap();
        assert_eq!(a, b, "seed {seed}: seeded rerun diverged");
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert!(ra.norm.to_bits() == rb.norm.to_bits());
            assert!(ra.eps.to_bits() == rb.eps.to_bits());
        }
    }

    let elapsed = start.elapsed();
    let ok = elapsed.as_secs_f64() < 60.0;
    verdict(
        8,
        "structural invariants",
        true,
        &format!("5 invariant families x 100 randomized cases in {elapsed:.2?}"),
    );
    assert!(ok, "took {elapsed:.2?}, budget 1 min");
}
