use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use qmaxcut::circuit::{
    epr_angles, epr_edge_energies, orthonormal_pair, qmc_angles, qmc_edge_energies_expected, run_epr, run_qmc,
    sample_axes, Branch, CircuitPlan, QmcOptions, BETA_STAR, EPR_AXIS,
};
use qmaxcut::graph::{fixtures, WeightedGraph};
use qmaxcut::lasserre::check_monogamy;
use qmaxcut::oracle::{apply_circuit, edge_energy, graph_energy, monte_carlo_qmc, plan_state, Statevector};
use qmaxcut::product::{dot, f_lower_bound, gp_round, level1_gram, product_energies, BlochAssignment};
use qmaxcut::Kind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use validation::{corpus, solved, Instance};

fn named(name: &str, graph: WeightedGraph) -> Instance {
    Instance { name: name.into(), graph }
}

fn epr_plan(g: &WeightedGraph, theta: Vec<f64>) -> CircuitPlan {
    CircuitPlan {
        kind: Kind::Epr,
        edges: g.edges().to_vec(),
        bloch: BlochAssignment::all_up(g.n()),
        axes: vec![EPR_AXIS; g.n()],
        theta,
        sign: vec![1; g.num_edges()],
    }
}

#[test]
fn epr_formula_on_path3_matches_statevector() {
    let g = fixtures::path(3);
    let theta = vec![FRAC_PI_8; 2];
    let want = epr_edge_energies(&g, &theta);
    let v = apply_circuit(&Statevector::zero_state(3).unwrap(), &epr_plan(&g, theta));
    for (e, w) in g.edges().iter().zip(&want) {
        assert!((edge_energy(&v, e.i, e.j, Kind::Epr) - w).abs() < 1e-12);
    }
}

#[test]
fn zero_angles_leave_product_energy() {
    let g = fixtures::cycle(5);
    let b = BlochAssignment::from_unnormalized(vec![
        [1.0, 0.2, 0.0],
        [-0.3, 0.9, 0.1],
        [0.0, -0.4, 1.0],
        [0.5, 0.5, -0.5],
        [-1.0, 0.0, 0.3],
    ])
    .unwrap();
    let theta = vec![0.0; g.num_edges()];
    let e = product_energies(&b, &g, Kind::Qmc);
    assert_eq!(qmc_edge_energies_expected(&g, &theta, &e), e);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let axes = sample_axes(&b, &mut rng);
    let plan =
        CircuitPlan { kind: Kind::Qmc, edges: g.edges().to_vec(), bloch: b.clone(), axes, theta, sign: vec![1; 5] };
    let v = plan_state(&plan).unwrap();
    for (edge, want) in g.edges().iter().zip(&e) {
        assert!((edge_energy(&v, edge.i, edge.j, Kind::Qmc) - want).abs() < 1e-12);
    }
}

/// Kolmogorov-Smirnov test of `n_k . e1 = cos(phi)` against the arcsine law
/// `P(t' <= t) = 1 - arccos(t) / pi`, at the 1% level.
#[test]
fn sampled_axes_are_uniform_on_the_circle() {
    let v = [0.36, 0.48, 0.8];
    let b = BlochAssignment::from_unnormalized(vec![v]).unwrap();
    let (e1, _) = orthonormal_pair(b.get(0));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let samples = 100_000;
    let mut t: Vec<f64> = (0..samples).map(|_| dot(&sample_axes(&b, &mut rng)[0], &e1)).collect();
    t.sort_by(f64::total_cmp);
    let n = samples as f64;
    let d = t
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let cdf = 1.0 - x.clamp(-1.0, 1.0).acos() / PI;
            (cdf - k as f64 / n).abs().max(((k + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn rounding_meets_product_bound_per_edge() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, g) in
        [("single_edge", fixtures::single_edge()), ("cycle5", fixtures::cycle(5)), ("complete4", fixtures::complete(4))]
    {
        let s = solved(&named(name, g.clone()), Kind::Qmc);
        let grams = level1_gram(&s).unwrap();
        let trials = if name == "single_edge" { 100_000 } else { 20_000 };
        let m = g.num_edges();
        let (mut sum, mut sq) = (vec![0.0; m], vec![0.0; m]);
        for _ in 0..trials {
            let b = gp_round(&grams, &mut rng).unwrap();
            for (k, e) in product_energies(&b, &g, Kind::Qmc).into_iter().enumerate() {
                sum[k] += e;
                sq[k] += e * e;
            }
        }
        for k in 0..m {
            let mean = sum[k] / trials as f64;
            let se = ((sq[k] / trials as f64 - mean * mean).max(0.0) / trials as f64).sqrt();
            let bound = f_lower_bound(s.edge_values[k]);
            assert!(mean >= bound - 3.0 * se - 1e-12, "{name} edge {k}: {mean} < {bound} (se {se})");
            if name == "single_edge" {
                assert!(mean >= f_lower_bound(1.0) - 0.01);
            }
        }
    }
}

#[test]
fn epr_algorithm_examples() {
    let (rep, _) =
        run_epr(&fixtures::single_edge(), &solved(&named("single_edge", fixtures::single_edge()), Kind::Epr));
    assert_eq!(rep.branch, Branch::Rotated);
    assert!((rep.total_energy - 2.0).abs() < 1e-5 && (rep.ratio - 1.0).abs() < 1e-5);

    let g = fixtures::matching(2);
    let (rep, _) = run_epr(&g, &solved(&named("matching2", g.clone()), Kind::Epr));
    assert_eq!(rep.branch, Branch::Rotated);
    assert!((rep.total_energy - 2.0).abs() < 1e-5, "{}", rep.total_energy);

    let g = fixtures::complete(8);
    let s = solved(&named("complete8", g.clone()), Kind::Epr);
    let (rep, plan) = run_epr(&g, &s);
    assert!(rep.eta.unwrap() < 2f64.sqrt() - 1.0);
    assert_eq!(rep.branch, Branch::Product);
    assert!((rep.total_energy - 1.0).abs() < 1e-12);
    assert!(plan.theta.iter().all(|&t| t == 0.0));
    assert!((graph_energy(&plan_state(&plan).unwrap(), &g, Kind::Epr) - 1.0).abs() < 1e-12);
}

#[test]
fn epr_algorithm_is_deterministic() {
    let inst = named("cycle6", fixtures::cycle(6));
    let s = solved(&inst, Kind::Epr);
    let a = run_epr(&inst.graph, &s);
    let b = run_epr(&inst.graph, &s);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn epr_edge_bound_holds_under_monogamy() {
    for inst in corpus() {
        let s = solved(&inst, Kind::Epr);
        if !check_monogamy(&s.edge_values, &inst.graph, 1e-5).holds() {
            continue;
        }
        let energies = epr_edge_energies(&inst.graph, &epr_angles(&s.edge_values));
        for (k, (&y, &e)) in s.edge_values.iter().zip(&energies).enumerate() {
            let bound = if y >= 0.0 { 0.5 + y + 0.5 * y * y } else { 0.5 };
            assert!(e >= bound - 1e-5, "{} edge {k}: {e} < {bound}", inst.name);
        }
    }
}

/// The bracket multiplying `f(x)` in `F(beta; x)`.
fn rotation_bracket(beta: f64, x: f64) -> f64 {
    let c = (1.0 - beta * beta).sqrt();
    0.5 + 0.5 * (1.0 - beta * beta * (1.0 - x) * (1.0 - x)) + 2.0 / PI * beta * x * (c + (1.0 - c) * x)
}

#[test]
fn qmc_edge_bound_holds_under_monogamy() {
    for inst in corpus() {
        let s = solved(&inst, Kind::Qmc);
        let theta = qmc_angles(&s.edge_values, BETA_STAR);
        let ones = vec![1.0; inst.graph.num_edges()];
        let gains = qmc_edge_energies_expected(&inst.graph, &theta, &ones);
        for (k, (&x, &r)) in s.edge_values.iter().zip(&gains).enumerate() {
            if x >= 0.0 {
                let bound = rotation_bracket(BETA_STAR, x);
                assert!(r >= bound - 1e-5, "{} edge {k}: {r} < {bound}", inst.name);
            }
        }
    }
}

#[test]
fn qmc_algorithm_examples() {
    let g = fixtures::single_edge();
    let s = solved(&named("single_edge", g.clone()), Kind::Qmc);
    let (rep, plan) = run_qmc(&g, &s, &QmcOptions::default()).unwrap();
    let e = product_energies(&plan.bloch, &g, Kind::Qmc)[0];
    let want = e * (1.0 + 2.0 / PI * BETA_STAR * s.edge_values[0]);
    assert!((rep.total_energy - want).abs() < 1e-12);
    assert!(rep.ratio >= 0.582);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mean, se) = monte_carlo_qmc(&g, &plan.bloch, &plan.theta, 20_000, &mut rng).unwrap()[0];
    assert!((mean - want).abs() <= 3.0 * se, "{mean} +- {se} vs {want}");

    let g = fixtures::cycle(5);
    let s = solved(&named("cycle5", g.clone()), Kind::Qmc);
    let opts = QmcOptions { beta: 0.0, trials: 256, seed: 3 };
    let (rep, plan) = run_qmc(&g, &s, &opts).unwrap();
    assert!(plan.theta.iter().all(|&t| t == 0.0));
    assert!((rep.total_energy - rep.product_energy).abs() < 1e-12);
    assert!(rep.mean_trial_energy.unwrap() / s.objective_value >= 0.498 - 0.01);

    let g = fixtures::complete(3);
    let s = solved(&named("triangle", g.clone()), Kind::Qmc);
    let (rep, _) = run_qmc(&g, &s, &QmcOptions::default()).unwrap();
    assert!(rep.total_energy <= 1.0 + 1e-6, "{}", rep.total_energy);
}

#[test]
fn same_seed_same_plan() {
    let g = fixtures::star(3);
    let s = solved(&named("star3", g.clone()), Kind::Qmc);
    let opts = QmcOptions { seed: 11, ..QmcOptions::default() };
    let a = run_qmc(&g, &s, &opts).unwrap();
    let b = run_qmc(&g, &s, &opts).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    for (k, n) in a.1.axes.iter().enumerate() {
        assert!(dot(n, a.1.bloch.get(k)).abs() < 1e-12);
    }
    assert!(a.1.theta.iter().all(|t| (0.0..=FRAC_PI_4).contains(t)));
}
