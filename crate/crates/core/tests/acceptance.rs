//! Acceptance criteria, one pass/fail line each. Exits non-zero if any fail.

use std::process::{Command, ExitCode};
use std::time::Instant;

use heate_core::experiment::{placement_seed, run_experiment, ExperimentReport, ExperimentSpec};
use heate_core::fixtures;
use heate_core::heate::{run, run_heate, run_observed, Algorithm};
use heate_core::milp::{brute_force_optimal, validate_certificate, Regime, SolutionCertificate};
use heate_core::routing::load_flows_ecmp;
use heate_core::sdn_alloc::{apply_allocation, candidate_paths, flow_allocation};
use heate_core::topology::{NodeId, Topology, TopologyBuilder};
use heate_core::traffic::{capacity_matrix, draw_sigmas, generate_matrix, GeneratorParams, TrafficMatrix};
use heate_core::weight_search::{neighboring_region_search, SearchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn four_node_walkthrough() -> Outcome {
    let start = Instant::now();
    let topo = fixtures::triangle();
    let tm = TrafficMatrix::parse("demand A B 1\ndemand A C 3\ndemand C B 3\n", &topo).unwrap();
    let ab = topo.link_between("A", "B").unwrap();
    let ac = topo.link_between("A", "C").unwrap();
    let cb = topo.link_between("C", "B").unwrap();
    let loads = |t: &Topology| {
        let s = load_flows_ecmp(t, &tm).unwrap();
        [s.flow(ab), s.flow(ac), s.flow(cb)]
    };
    let close = |got: [f64; 3], want: [f64; 3]| got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12);

    ensure(close(loads(&topo), [1.0, 3.0, 3.0]), format!("initial loads {:?}", loads(&topo)))?;
    let mut tuned = topo.clone();
    for (iteration, weight, want) in [(1, 2.0, [0.5, 3.5, 3.5]), (2, 2.5, [0.0, 4.0, 4.0])] {
        let w = neighboring_region_search(&topo, &tm, &SearchConfig::with_beta(0.8).iterations(iteration)).unwrap();
        tuned.set_weights(&w).unwrap();
        ensure((w[ab.0] - weight).abs() <= 1e-12, format!("iteration {iteration}: w(A,B) = {}", w[ab.0]))?;
        ensure(close(loads(&tuned), want), format!("iteration {iteration}: loads {:?}", loads(&tuned)))?;
    }

    // D's two units enter at switch A and are split by the controller.
    let mut state = load_flows_ecmp(&tuned, &tm).unwrap();
    let candidates = candidate_paths(&tuned, &state, NodeId(0), NodeId(1), 0.8).unwrap();
    let allocation = flow_allocation(candidates, 2.0, NodeId(0), NodeId(1)).unwrap();
    apply_allocation(&mut state, &allocation);
    let after = [state.flow(ab), state.flow(ac), state.flow(cb)];
    ensure(close(after, [0.0, 6.0, 6.0]), format!("after allocation {after:?}"))?;

    let (full, full_tm) = fixtures::fig3();
    let result = run_heate(&full, &full_tm, &SearchConfig::with_beta(0.8).iterations(2)).unwrap();
    let full_ab = full.link_between("A", "B").unwrap();
    ensure(result.removed == vec![full_ab.physical()], format!("removed {:?}", result.removed))?;
    let flow = |s, d| result.state.flow(full.link_between(s, d).unwrap());
    ensure(close([flow("A", "B"), flow("A", "C"), flow("C", "B")], [0.0, 6.0, 6.0]), "final loads")?;

    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!("loads (1,3,3) -> (0.5,3.5,3.5) -> (0,4,4) -> (0,6,6), (A,B) off, {elapsed:.2?}"))
}

/// Tiny hand-picked shapes, each with every node pair possibly demanding.
fn tiny_instances() -> Vec<(String, Topology, TrafficMatrix)> {
    let shapes: [(&str, &str); 6] = [
        ("pair", "node a ip\nnode b ip\nlink a b 10\n"),
        ("path", "node a ip\nnode b ip\nnode c ip\nlink a b 10\nlink b c 10\n"),
        ("triangle", fixtures::TRIANGLE),
        ("star", "node h sdn\nnode a ip\nnode b ip\nnode c ip\nlink h a 10\nlink h b 10\nlink h c 2.5\n"),
        ("square", "node a ip\nnode b sdn\nnode c ip\nnode d ip\nlink a b 10\nlink b c 10\nlink c d 10\nlink d a 10\n"),
        ("fig3", fixtures::FIG3),
    ];
    let mut out = Vec::new();
    for (name, text) in shapes {
        let topo = Topology::parse(text).unwrap();
        let n = topo.node_count();
        out.push((format!("{name}/zero"), topo.clone(), TrafficMatrix::zeros(n)));
        let mut single = TrafficMatrix::zeros(n);
        single.set(NodeId(0), NodeId(n - 1), 1.0).unwrap();
        out.push((format!("{name}/single"), topo.clone(), single));
        for seed in 0..3 {
            let params = GeneratorParams { sigma_max: 0.4, seed };
            out.push((format!("{name}/gen{seed}"), topo.clone(), generate_matrix(&topo, &params).unwrap()));
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let cfg = SearchConfig::with_beta(0.8).iterations(200);
    let (mut compared, mut equal, mut infeasible) = (0, 0, 0);
    for (name, topo, tm) in tiny_instances() {
        ensure(topo.node_count() <= 4 && topo.link_count() <= 8, format!("{name} too large"))?;
        let oracle = match brute_force_optimal(&topo, &tm, 0.8, &[1.0, 2.0, 3.0, 4.0]) {
            Ok(o) => o,
            Err(e) => {
                ensure(
                    run(&topo, &tm, &cfg, Algorithm::Heate).is_err(),
                    format!("{name}: oracle {e}, HEATE feasible"),
                )?;
                infeasible += 1;
                continue;
            }
        };
        let report = validate_certificate(&topo, &tm, &oracle.certificate, 0.8, Regime::Strict).unwrap();
        ensure(report.is_empty(), format!("{name}: oracle witness violates {:?}", report.violations))?;
        let heate = run(&topo, &tm, &cfg, Algorithm::Heate).map_err(|e| format!("{name}: HEATE {e}"))?;
        let active = heate.topology.active_link_count();
        ensure(active >= oracle.objective, format!("{name}: HEATE {active} < optimum {}", oracle.objective))?;
        if name.ends_with("/zero") || name.ends_with("/single") {
            ensure(active == oracle.objective, format!("{name}: HEATE {active} != optimum {}", oracle.objective))?;
        }
        compared += 1;
        equal += usize::from(active == oracle.objective);
    }
    ensure(compared >= 10, format!("only {compared} instances compared"))?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 60.0, format!("took {elapsed:?}"))?;
    Ok(format!("{compared} instances, {equal} at the optimum, {infeasible} infeasible for both, {elapsed:.2?}"))
}

fn feasibility_suite() -> Outcome {
    let geant = fixtures::geant();
    let cfg = SearchConfig::default().iterations(1000);
    let mut states = 0;
    let mut failure = None;
    for k in [0, 3, 6, 12, 18, 23] {
        let mut topo = geant.clone();
        topo.place_sdn(k, placement_seed(0, k)).unwrap();
        for seed in 0..4 {
            let tm = generate_matrix(&geant, &GeneratorParams { sigma_max: 0.1, seed }).unwrap();
            for alg in Algorithm::ALL {
                let observed = run_observed(&topo, &tm, &cfg, alg, |e| {
                    states += 1;
                    let cert = SolutionCertificate::from_evaluation(e);
                    let report = validate_certificate(&e.topology, &tm, &cert, cfg.beta, Regime::Ecmp)
                        .unwrap()
                        .only(&[2, 3, 4, 5, 11]);
                    if !report.is_empty() && failure.is_none() {
                        failure = Some(format!("{alg} sdn={k} seed={seed}: {:?}", report.violations));
                    }
                });
                if let Err(e) = observed {
                    return Err(format!("{alg} sdn={k} seed={seed}: {e}"));
                }
            }
        }
    }
    if let Some(f) = failure {
        return Err(f);
    }
    Ok(format!("{states} committed states, zero violations of (2)-(5), (11)"))
}

fn sweep() -> ExperimentReport {
    let geant = fixtures::geant();
    let cfg = SearchConfig::default().iterations(1000);
    let trend = ExperimentSpec {
        algorithms: vec![Algorithm::Heate, Algorithm::EaOspf],
        config: cfg,
        sdn_counts: (0..=geant.node_count()).collect(),
        matrices: 50,
        ..ExperimentSpec::new(geant.clone())
    };
    let mut report = run_experiment(&trend).unwrap();
    let fa = ExperimentSpec {
        algorithms: vec![Algorithm::EaFa],
        config: cfg,
        sdn_counts: vec![6],
        matrices: 50,
        ..ExperimentSpec::new(geant)
    };
    report.rows.extend(run_experiment(&fa).unwrap().rows);
    report
}

fn baseline_dominance(report: &ExperimentReport) -> Outcome {
    let mean = |alg| report.mean_ratio(alg, 6).map(|(m, _)| m).unwrap_or(f64::NAN);
    let (heate, ospf, fa) = (mean(Algorithm::Heate), mean(Algorithm::EaOspf), mean(Algorithm::EaFa));
    let detail = format!("HEATE {heate:.4}, EA-OSPF {ospf:.4}, EA-FA {fa:.4}");
    ensure(heate - ospf > 0.0 && heate - fa > 0.0, detail.clone())?;
    Ok(format!("{detail} (gaps {:+.4}, {:+.4})", heate - ospf, heate - fa))
}

/// Ranks with ties sharing their average position.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        for &k in &order[i..=j] {
            out[k] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    out
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var = |v: &[f64], m: f64| v.iter().map(|a| (a - m) * (a - m)).sum::<f64>();
    cov / (var(&rx, mx) * var(&ry, my)).sqrt()
}

fn trend_shape(report: &ExperimentReport) -> Outcome {
    let counts: Vec<usize> = (0..=23).collect();
    let heate: Vec<f64> = counts.iter().map(|&k| report.mean_ratio(Algorithm::Heate, k).unwrap().0).collect();
    let x: Vec<f64> = counts.iter().map(|&k| k as f64).collect();
    let rho = spearman(&x, &heate);
    let ospf: Vec<Vec<Option<f64>>> = counts.iter().map(|&k| report.series(Algorithm::EaOspf, k)).collect();
    let constant = ospf.windows(2).all(|w| w[0] == w[1]);
    let detail = format!(
        "Spearman {rho:.3}, HEATE mean {:.3} at 0 -> {:.3} at 23, EA-OSPF {}",
        heate[0],
        heate[23],
        if constant { "identical per matrix at every count" } else { "varies" }
    );
    ensure(rho >= 0.8 && constant, detail.clone())?;
    Ok(detail)
}

fn scaled(topo: &Topology, factor: f64) -> Topology {
    let mut b = TopologyBuilder::new();
    for node in topo.nodes() {
        b.add_node(&node.name, node.kind).unwrap();
    }
    for link in topo.links().iter().step_by(2) {
        b.add_link(link.src, link.dst, link.capacity * factor).unwrap();
    }
    b.build().unwrap()
}

fn generator() -> Outcome {
    let topo = fixtures::triangle();
    let tm = capacity_matrix(&topo, &[0.05, 0.0, 0.0]).unwrap();
    let (a, b) = (topo.node_by_name("A").unwrap(), topo.node_by_name("B").unwrap());
    ensure(tm.get(a, b) == 0.5, format!("d_AB = {}", tm.get(a, b)))?;

    let geant = fixtures::geant();
    let doubled = scaled(&geant, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..1000 {
        let params = GeneratorParams { sigma_max: rng.gen_range(0.01..1.0), seed: rng.gen() };
        let first = generate_matrix(&geant, &params).unwrap();
        ensure(first == generate_matrix(&geant, &params).unwrap(), format!("trial {trial}: not deterministic"))?;
        let sigmas = draw_sigmas(geant.node_count(), &params).unwrap();
        ensure(first == capacity_matrix(&geant, &sigmas).unwrap(), format!("trial {trial}: sigma stream"))?;
        let twice = capacity_matrix(&doubled, &sigmas).unwrap();
        for (v, t, d) in first.demands() {
            let s = twice.get(v, t);
            ensure((s - 2.0 * d).abs() <= 1e-12 * s.max(1.0), format!("trial {trial}: {v}->{t} {s} vs 2*{d}"))?;
        }
    }
    Ok("d_AB = 0.5 exactly; 1000 determinism and homogeneity trials".into())
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("heate-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.join(format!("sweep{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_heate"))
            .args(["sweep", "--topology", "geant", "--algorithm", "all", "--sdn-count", "0-23,1"])
            .args(["--matrices", "2", "--iterations", "200", "--seed", "5", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("sweep exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0] == outputs[1], "CSV differs between runs")?;
    Ok(format!("{} bytes, identical", outputs[0].len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: u8, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("criterion {n} FAIL  {name}: {detail}");
        }
    };
    report(1, "four-node walkthrough", four_node_walkthrough());
    report(2, "oracle equivalence", oracle_equivalence());
    report(3, "feasibility suite", feasibility_suite());
    let sweep = sweep();
    report(4, "baseline dominance", baseline_dominance(&sweep));
    report(5, "trend shape", trend_shape(&sweep));
    report(6, "traffic generator", generator());
    report(7, "sweep determinism", determinism());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
