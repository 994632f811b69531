use faer::Mat;
use proptest::prelude::*;
use sdp_ipm::{BlockSdp, ConicSolver, InteriorPoint, SolveStatus, SparseSym};

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect()
}

fn min_eigenvalue(m: &Mat<f64>) -> f64 {
    m.self_adjoint_eigenvalues(faer::Side::Lower).unwrap()[0]
}

/// `theta(G) = min t` s.t. `t I - J - sum_{ij in E} y_ij (E_ij + E_ji) >= 0`.
fn lovasz_theta(n: usize, edges: &[(usize, usize)]) -> BlockSdp {
    let mut constant = SparseSym::new();
    for i in 0..n {
        for j in i..n {
            constant.push(0, i, j, -1.0);
        }
    }
    let mut t = SparseSym::new();
    for i in 0..n {
        t.push(0, i, i, 1.0);
    }
    let mut coefficients = vec![t];
    let mut objective = vec![-1.0];
    for &(i, j) in edges {
        let mut a = SparseSym::new();
        a.push(0, i, j, -1.0);
        coefficients.push(a);
        objective.push(0.0);
    }
    BlockSdp { block_sizes: vec![n], constant, coefficients, objective }
}

/// Dual of the max-cut relaxation: `min sum_i y_i` s.t. `Diag(y) - L/4 >= 0`.
fn max_cut_dual(n: usize, edges: &[(usize, usize)]) -> BlockSdp {
    let mut constant = SparseSym::new();
    let mut degree = vec![0.0; n];
    for &(i, j) in edges {
        degree[i] += 1.0;
        degree[j] += 1.0;
        constant.push(0, i, j, 0.25);
    }
    for (i, d) in degree.iter().enumerate() {
        constant.push(0, i, i, -0.25 * d);
    }
    let coefficients = (0..n)
        .map(|i| {
            let mut a = SparseSym::new();
            a.push(0, i, i, 1.0);
            a
        })
        .collect();
    BlockSdp { block_sizes: vec![n], constant, coefficients, objective: vec![-1.0; n] }
}

#[test]
fn lovasz_theta_of_pentagon_is_sqrt5() {
    let p = lovasz_theta(5, &cycle_edges(5));
    let s = InteriorPoint::with_tolerance(1e-9).solve(&p).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((-s.objective - 5f64.sqrt()).abs() < 1e-6, "{}", s.objective);
    assert!((s.dual_objective - s.objective).abs() < 1e-6);
}

#[test]
fn lovasz_theta_of_complete_graph_is_one() {
    let edges: Vec<_> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
    let s = InteriorPoint::with_tolerance(1e-9).solve(&lovasz_theta(4, &edges)).unwrap();
    assert!((-s.objective - 1.0).abs() < 1e-6, "{}", s.objective);
}

#[test]
fn max_cut_relaxation_closed_forms() {
    // Triangle: Gram vectors at 120 degrees, 3 * (1 + 1/2) / 2.
    let s = InteriorPoint::with_tolerance(1e-9).solve(&max_cut_dual(3, &cycle_edges(3))).unwrap();
    assert!((-s.objective - 2.25).abs() < 1e-6, "{}", s.objective);
    // Pentagon: (5/2)(1 + cos(pi/5)).
    let s = InteriorPoint::with_tolerance(1e-9).solve(&max_cut_dual(5, &cycle_edges(5))).unwrap();
    let want = 2.5 * (1.0 + (std::f64::consts::PI / 5.0).cos());
    assert!((-s.objective - want).abs() < 1e-6, "{} vs {want}", s.objective);

    let x = &s.dual[0];
    for i in 0..5 {
        assert!((x[(i, i)] - 1.0).abs() < 1e-6);
    }
    assert!(min_eigenvalue(x) > -1e-8);
    assert!(min_eigenvalue(&s.slack[0]) > -1e-8);
}

#[test]
fn block_structure_is_respected() {
    // Two independent pentagon theta problems stacked as two blocks.
    let one = lovasz_theta(5, &cycle_edges(5));
    let mut constant = one.constant.clone();
    for e in &one.constant.entries {
        constant.push(1, e.row, e.col, e.value);
    }
    let mut coefficients = Vec::new();
    let mut objective = Vec::new();
    for (a, c) in one.coefficients.iter().zip(&one.objective) {
        for block in 0..2 {
            let mut b = SparseSym::new();
            for e in &a.entries {
                b.push(block, e.row, e.col, e.value);
            }
            coefficients.push(b);
            objective.push(*c);
        }
    }
    let p = BlockSdp { block_sizes: vec![5, 5], constant, coefficients, objective };
    let s = InteriorPoint::with_tolerance(1e-9).solve(&p).unwrap();
    assert!((-s.objective - 2.0 * 5f64.sqrt()).abs() < 1e-5, "{}", s.objective);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `max -t` s.t. `t I - C >= 0` is `-lambda_max(C)`; checked against a
    /// dense eigendecomposition.
    #[test]
    fn largest_eigenvalue_by_sdp(n in 2usize..7, seed in proptest::collection::vec(-1.0f64..1.0, 49)) {
        let mut c = Mat::<f64>::zeros(n, n);
        let mut constant = SparseSym::new();
        for i in 0..n {
            for j in i..n {
                let v = seed[i * 7 + j];
                c[(i, j)] = v;
                c[(j, i)] = v;
                constant.push(0, i, j, -v);
            }
        }
        let mut t = SparseSym::new();
        for i in 0..n {
            t.push(0, i, i, 1.0);
        }
        let p = BlockSdp { block_sizes: vec![n], constant, coefficients: vec![t], objective: vec![-1.0] };
        let s = InteriorPoint::with_tolerance(1e-9).solve(&p).unwrap();
        let eig = c.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let lmax = eig[n - 1];
        prop_assert!((-s.objective - lmax).abs() < 1e-6, "{} vs {}", -s.objective, lmax);
    }
}
