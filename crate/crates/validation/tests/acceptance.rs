//! Acceptance criteria, one check per criterion. Runs without the libtest
//! harness so every verdict line is printed, and exits non-zero if any fail.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use qmaxcut::circuit::{
    check_star_bounds, epr_edge_energies, optimize_beta, qmc_edge_energies_expected, run_epr, run_qmc, Branch,
    CircuitPlan, QmcOptions, BETA_STAR, EPR_AXIS,
};
use qmaxcut::graph::{fixtures, WeightedGraph};
use qmaxcut::lasserre::{build_sdp, check_monogamy};
use qmaxcut::oracle::{
    apply_circuit, build_hamiltonian, edge_energy, energy, graph_energy, max_eigenvalue, moment_matrix_from_state,
    monte_carlo_qmc, plan_state, Statevector,
};
use qmaxcut::product::{f_lower_bound, product_energies, BlochAssignment};
use qmaxcut::Kind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use validation::{bipartite_corpus, corpus, random_graph, solved, Instance};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (beta, ratio) = optimize_beta();
    let elapsed = start.elapsed();

    let mut x_min = 0.0;
    let mut v_min = f64::INFINITY;
    let steps = 20_000;
    for k in 1..=steps {
        let x = -1.0 + 2.0 * k as f64 / steps as f64;
        let v = f_lower_bound(x) / (1.0 + x);
        if v < v_min {
            (x_min, v_min) = (x, v);
        }
    }

    let beta_ok = (beta - 0.340).abs() <= 0.005;
    let ratio_ok = (ratio - 0.5828).abs() <= 0.0005;
    let time_ok = elapsed < Duration::from_secs(60);
    let curve_ok = (v_min - 0.498).abs() <= 0.001 && (x_min - 0.949).abs() <= 0.005;
    verdict(
        beta_ok && ratio_ok && time_ok && curve_ok,
        format!(
            "beta*={beta:.5} (target 0.340+-0.005: {}), ratio={ratio:.5} (target 0.5828+-0.0005: {}), \
             time={:.2}s ({}), product curve min={v_min:.5} at x={x_min:.4} ({})",
            ok(beta_ok),
            ok(ratio_ok),
            elapsed.as_secs_f64(),
            ok(time_ok),
            ok(curve_ok),
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISS"
    }
}

fn criterion_2() -> Verdict {
    let inst = Instance { name: "single_edge".into(), graph: fixtures::single_edge() };
    let g = &inst.graph;
    let mut failures = Vec::new();
    let mut notes = Vec::new();

    for kind in [Kind::Qmc, Kind::Epr] {
        let s = solved(&inst, kind);
        if (s.objective_value - 2.0).abs() > 1e-4 {
            failures.push(format!("{kind} sdp bound {}", s.objective_value));
        }
        let norm = max_eigenvalue(&build_hamiltonian(g, kind).unwrap()).unwrap();
        if (norm - 2.0).abs() > 1e-9 {
            failures.push(format!("{kind} norm {norm}"));
        }
    }

    let (epr, _) = run_epr(g, &solved(&inst, Kind::Epr));
    if (epr.total_energy - 2.0).abs() > 1e-5 || (epr.ratio - 1.0).abs() > 1e-5 {
        failures.push(format!("epr energy {} ratio {}", epr.total_energy, epr.ratio));
    }

    let s = solved(&inst, Kind::Qmc);
    let (qmc, plan) = run_qmc(g, &s, &QmcOptions::default()).unwrap();
    let e = product_energies(&plan.bloch, g, Kind::Qmc)[0];
    let x = s.edge_values[0];
    let analytic = e * (1.0 + 2.0 / PI * BETA_STAR * x);
    if (qmc.per_edge_energy[0] - analytic).abs() > 1e-12 {
        failures.push(format!("qmc expected {} vs formula {analytic}", qmc.per_edge_energy[0]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mean, se) = monte_carlo_qmc(g, &plan.bloch, &plan.theta, 20_000, &mut rng).unwrap()[0];
    if (mean - analytic).abs() > 3.0 * se + 1e-12 {
        failures.push(format!("monte carlo {mean} +- {se} vs {analytic}"));
    }
    notes.push(format!(
        "epr energy {:.6} ratio {:.6}; qmc E={e:.6} x={x:.6} analytic {analytic:.6}, monte carlo {mean:.6} (se {se:.1e})",
        epr.total_energy, epr.ratio
    ));

    verdict(failures.is_empty(), join(failures, notes))
}

fn join(failures: Vec<String>, notes: Vec<String>) -> String {
    if failures.is_empty() {
        notes.join("; ")
    } else {
        format!("failures: {}", failures.join("; "))
    }
}

fn common_neighbor(g: &WeightedGraph, i: usize, j: usize) -> bool {
    let a = g.neighbors(i).unwrap();
    g.neighbors(j).unwrap().iter().any(|k| a.contains(k))
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut worst_open: f64 = 0.0;
    let mut in_triangle = 0;
    let graphs = 60;
    for k in 0..graphs {
        let n = 2 + k % 9;
        let g = random_graph(n, 0.5, &mut rng);
        let theta: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(0.0..=FRAC_PI_4)).collect();
        let analytic = epr_edge_energies(&g, &theta);
        let plan = CircuitPlan {
            kind: Kind::Epr,
            edges: g.edges().to_vec(),
            bloch: BlochAssignment::all_up(n),
            axes: vec![EPR_AXIS; n],
            theta,
            sign: vec![1; g.num_edges()],
        };
        let v = apply_circuit(&Statevector::zero_state(n).unwrap(), &plan);
        for (e, a) in g.edges().iter().zip(&analytic) {
            let d = (edge_energy(&v, e.i, e.j, Kind::Epr) - a).abs();
            worst = worst.max(d);
            if common_neighbor(&g, e.i, e.j) {
                in_triangle += 1;
            } else {
                worst_open = worst_open.max(d);
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-10 && elapsed < Duration::from_secs(300),
        format!(
            "{graphs} graphs (n 2..10), worst per-edge deviation {worst:.2e}; {in_triangle} edges lie in a triangle, \
             worst deviation over the other edges {worst_open:.2e}; time {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// Worst |z| of the QMC expectation against Monte Carlo on bipartite,
/// triangle-free graphs started from an antipodal product state.
fn antipodal_control(samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for g in [fixtures::path(5), fixtures::cycle(6), fixtures::star(4)] {
        let side = g.bipartition().unwrap();
        let up = [0.48, -0.6, 0.64];
        let b = BlochAssignment::from_unnormalized(
            side.iter().map(|&s| if s { up } else { [-up[0], -up[1], -up[2]] }).collect(),
        )
        .unwrap();
        let theta: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(0.0..=FRAC_PI_4)).collect();
        let expected = qmc_edge_energies_expected(&g, &theta, &product_energies(&b, &g, Kind::Qmc));
        let mc = monte_carlo_qmc(&g, &b, &theta, samples, rng).unwrap();
        for ((mean, se), want) in mc.iter().zip(&expected) {
            worst = worst.max((mean - want).abs() / se.max(1e-300));
        }
    }
    worst
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples = 10_000;
    let mut edges = 0;
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..10 {
        let n = 4 + k % 5;
        let inst = Instance { name: format!("mc{k}"), graph: random_graph(n, 0.5, &mut rng) };
        let g = &inst.graph;
        let s = solved(&inst, Kind::Qmc);
        let (_, plan) = run_qmc(g, &s, &QmcOptions { seed: k as u64, ..QmcOptions::default() }).unwrap();
        let e = product_energies(&plan.bloch, g, Kind::Qmc);
        let expected = qmc_edge_energies_expected(g, &plan.theta, &e);
        let mc = monte_carlo_qmc(g, &plan.bloch, &plan.theta, samples, &mut rng).unwrap();
        for (idx, ((mean, se), want)) in mc.iter().zip(&expected).enumerate() {
            edges += 1;
            let diff = (mean - want).abs();
            let z = if *se > 0.0 {
                diff / se
            } else if diff > 1e-12 {
                f64::INFINITY
            } else {
                0.0
            };
            worst_z = worst_z.max(z);
            if diff > 3.0 * se + 1e-12 {
                failures.push(format!("{} edge {idx}: {mean:.5} +- {se:.1e} vs {want:.5}", inst.name));
            }
        }
    }
    let control = antipodal_control(samples, &mut rng);
    let summary = format!(
        "10 graphs, {edges} edges, {samples} samples each, {} edges off by more than 3 se, worst |z| = {worst_z:.1}; \
         control (triangle-free, antipodal start state): worst |z| = {control:.2}",
        failures.len()
    );
    if failures.is_empty() {
        verdict(true, summary)
    } else {
        verdict(false, format!("{summary}; first: {}", failures[0]))
    }
}

fn criterion_5() -> Verdict {
    let insts = corpus();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut star_checks = 0;
    for inst in &insts {
        for kind in [Kind::Qmc, Kind::Epr] {
            let s = solved(inst, kind);
            let rep = check_monogamy(&s.edge_values, &inst.graph, 1e-5);
            worst = worst.max(rep.worst_sum);
            if !rep.holds() {
                failures.push(format!("{} {kind}: monogamy sum {}", inst.name, rep.worst_sum));
            }
            for beta in [0.34, 1.0] {
                star_checks += 1;
                let v = check_star_bounds(&inst.graph, &s.edge_values, beta, 1e-6);
                if let Some(first) = v.first() {
                    failures.push(format!("{} {kind} beta={beta}: {first:?}", inst.name));
                }
            }
        }
    }
    let notes = vec![format!(
        "{} instances x 2 kinds, worst vertex sum {worst:.7}, {star_checks} star-bound sweeps clean",
        insts.len()
    )];
    verdict(failures.is_empty(), join(failures, notes))
}

const QMC_TRIALS: usize = 1024;

fn criterion_6() -> Verdict {
    let insts = corpus();
    let mut failures = Vec::new();
    let (mut min_epr, mut min_qmc) = (f64::INFINITY, f64::INFINITY);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut min_epr_state = f64::INFINITY;
    for inst in &insts {
        let g = &inst.graph;
        let se = solved(inst, Kind::Epr);
        let (epr, plan) = run_epr(g, &se);
        min_epr = min_epr.min(epr.ratio);
        if epr.ratio < FRAC_1_SQRT_2 - 1e-6 {
            failures.push(format!("{} epr ratio {}", inst.name, epr.ratio));
        }
        let h = build_hamiltonian(g, Kind::Epr).unwrap();
        let state_energy = energy(&plan_state(&plan).unwrap(), &h);
        min_epr_state = min_epr_state.min(state_energy / se.objective_value);
        let excess = state_energy - max_eigenvalue(&h).unwrap();
        worst_excess = worst_excess.max(excess);
        if excess > 1e-8 {
            failures.push(format!("{} epr state above norm by {excess}", inst.name));
        }

        let sq = solved(inst, Kind::Qmc);
        let opts = QmcOptions { trials: QMC_TRIALS, ..QmcOptions::default() };
        let (qmc, plan) = run_qmc(g, &sq, &opts).unwrap();
        let mean_ratio = qmc.mean_trial_energy.unwrap() / qmc.sdp_upper_bound;
        min_qmc = min_qmc.min(mean_ratio);
        if mean_ratio < 0.582 - 0.005 {
            failures.push(format!("{} qmc mean ratio {mean_ratio}", inst.name));
        }
        let h = build_hamiltonian(g, Kind::Qmc).unwrap();
        let excess = energy(&plan_state(&plan).unwrap(), &h) - max_eigenvalue(&h).unwrap();
        worst_excess = worst_excess.max(excess);
        if excess > 1e-8 {
            failures.push(format!("{} qmc state above norm by {excess}", inst.name));
        }
    }
    let notes = vec![format!(
        "{} instances, min epr ratio {min_epr:.5} (statevector energy of the epr state: {min_epr_state:.5}), \
         min qmc {QMC_TRIALS}-trial mean ratio {min_qmc:.5}, max (state energy - norm) {worst_excess:.2e}",
        insts.len()
    )];
    verdict(failures.is_empty(), join(failures, notes))
}

fn criterion_7() -> Verdict {
    let insts = corpus();
    let mut failures = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut worst_violation: f64 = 0.0;
    for inst in &insts {
        for kind in [Kind::Qmc, Kind::Epr] {
            let s = solved(inst, kind);
            let h = build_hamiltonian(&inst.graph, kind).unwrap();
            let (norm, top) = h.top_eigenpair().unwrap();
            let gap = s.objective_value - norm;
            min_gap = min_gap.min(gap);
            if gap < -1e-5 {
                failures.push(format!("{} {kind}: sdp {} < norm {norm}", inst.name, s.objective_value));
            }
            let p = build_sdp(&inst.graph, kind).unwrap();
            let m = moment_matrix_from_state(&top, p.monomials());
            let v = p.classes().max_violation(|r, c| m[(r, c)]);
            worst_violation = worst_violation.max(v);
            if v > 1e-9 {
                failures.push(format!("{} {kind}: ground-state moment violation {v:.2e}", inst.name));
            }
        }
    }
    let notes = vec![format!(
        "{} instances x 2 kinds, min (sdp - norm) {min_gap:.2e}, worst moment-constraint violation {worst_violation:.2e}",
        insts.len()
    )];
    verdict(failures.is_empty(), join(failures, notes))
}

fn criterion_8() -> Verdict {
    let insts = bipartite_corpus();
    let mut failures = Vec::new();
    let (mut worst_obj, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for inst in &insts {
        let g = &inst.graph;
        let se = solved(inst, Kind::Epr);
        let sq = solved(inst, Kind::Qmc);
        let d_obj = (se.objective_value - sq.objective_value).abs();
        worst_obj = worst_obj.max(d_obj);
        if d_obj > 2e-5 {
            failures.push(format!("{}: objectives {} vs {}", inst.name, se.objective_value, sq.objective_value));
        }

        let (route_a, _) = run_epr(g, &se);
        let (via_x, plan) = run_epr(g, &sq);
        let side = g.bipartition().expect("bipartite instance");
        let v = plan_state(&plan).unwrap().rotate_y(&side);
        let ratio_b = graph_energy(&v, g, Kind::Qmc) / sq.objective_value;
        let d_ratio = (route_a.ratio - ratio_b).abs();
        worst_ratio = worst_ratio.max(d_ratio);
        if d_ratio > 1e-3 || route_a.branch != via_x.branch {
            failures.push(format!(
                "{}: ratios {} ({}) vs {ratio_b} ({})",
                inst.name,
                route_a.ratio,
                route_a.branch.name(),
                via_x.branch.name()
            ));
        }
    }
    let rotated = insts.iter().filter(|i| run_epr(&i.graph, &solved(i, Kind::Epr)).0.branch == Branch::Rotated).count();
    let notes = vec![format!(
        "{} bipartite instances ({rotated} rotated), worst objective gap {worst_obj:.2e}, worst ratio gap {worst_ratio:.2e}",
        insts.len()
    )];
    verdict(failures.is_empty(), join(failures, notes))
}

fn main() {
    let criteria: [(usize, fn() -> Verdict); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| verdict(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {n}: {tag} [{:.1}s] {}", start.elapsed().as_secs_f64(), v.detail);
        if !v.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
