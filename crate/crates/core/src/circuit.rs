//! Entangling layer on top of a product state: angle selection from the
//! relaxation, random rotation axes, sign choice and the closed-form
//! energies of the resulting states.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, WeightedGraph};
use crate::lasserre::SdpSolution;
use crate::oracle::{axis_matrix, qubit_state};
use crate::product::{f_lower_bound, gp_round, level1_gram, product_energies, BlochAssignment, RoundingError, Vec3};
use crate::Kind;

/// `argmax_beta min_x F(beta; x) / (1 + x)`, as returned by [`optimize_beta`].
pub const BETA_STAR: f64 = 0.389_81;

/// `min_x F(BETA_STAR; x) / (1 + x)`.
pub const BETA_STAR_RATIO: f64 = 0.582_81;

/// The EPR algorithm keeps the rotated state when `eta` reaches this.
pub const EPR_THRESHOLD: f64 = SQRT_2 - 1.0;

/// Rotation axis used on every qubit by the EPR algorithm.
pub const EPR_AXIS: Vec3 = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Rotated,
    Product,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Rotated => "ROTATED",
            Branch::Product => "PRODUCT",
        }
    }
}

/// A product state followed by one commuting gate
/// `exp(i sign theta (n_i . sigma)(n_j . sigma))` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    pub kind: Kind,
    pub edges: Vec<Edge>,
    pub bloch: BlochAssignment,
    pub axes: Vec<Vec3>,
    pub theta: Vec<f64>,
    pub sign: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub per_edge_energy: Vec<f64>,
    pub total_energy: f64,
    pub sdp_upper_bound: f64,
    pub ratio: f64,
    pub branch: Branch,
    /// `sum_ij w_ij y_ij` (EPR only).
    pub eta: Option<f64>,
    /// Rotation strength (QMC only).
    pub beta_used: Option<f64>,
    /// Total product-state energy before rotation.
    pub product_energy: f64,
    /// Mean over rounding trials of the expected total (QMC only).
    pub mean_trial_energy: Option<f64>,
    /// Whether the reported energy reaches the proven ratio times the bound.
    pub meets_guarantee: bool,
}

/// `sin 2 theta = y` for `y >= 0`, else `theta = 0`.
pub fn epr_angles(y: &[f64]) -> Vec<f64> {
    qmc_angles(y, 1.0)
}

/// `sin 2 theta = beta x` for `x >= 0`, else `theta = 0`.
pub fn qmc_angles(x: &[f64], beta: f64) -> Vec<f64> {
    x.iter().map(|&v| if v >= 0.0 { 0.5 * (beta * v).clamp(0.0, 1.0).asin() } else { 0.0 }).collect()
}

/// Orthonormal `(e1, e2)` spanning the plane orthogonal to the unit `v`.
pub fn orthonormal_pair(v: &Vec3) -> (Vec3, Vec3) {
    // Cross with the coordinate axis least aligned with v.
    let k = (0..3).min_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).expect("three axes");
    let mut t = [0.0; 3];
    t[k] = 1.0;
    let e1 = normalize(cross(v, &t));
    let e2 = cross(v, &e1);
    (e1, e2)
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: Vec3) -> Vec3 {
    let r = crate::product::norm(&v);
    [v[0] / r, v[1] / r, v[2] / r]
}

/// One axis per vertex, uniform on the great circle orthogonal to its Bloch
/// vector.
pub fn sample_axes<R: Rng + ?Sized>(b: &BlochAssignment, rng: &mut R) -> Vec<Vec3> {
    b.vectors()
        .iter()
        .map(|v| {
            let (e1, e2) = orthonormal_pair(v);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let (s, c) = phi.sin_cos();
            [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]]
        })
        .collect()
}

/// `arg <v_i|P_j|v_j> <v_j|P_i|v_i>` with `P_k = n_k . sigma`, treating the
/// single-qubit states as plain 2-vectors. `None` when the product vanishes.
pub fn gamma(vi: &Vec3, vj: &Vec3, ni: &Vec3, nj: &Vec3) -> Option<f64> {
    let (si, sj) = (qubit_state(vi), qubit_state(vj));
    let sandwich = |bra: &[C64; 2], p: &[[C64; 2]; 2], ket: &[C64; 2]| -> C64 {
        (0..2).map(|r| bra[r].conj() * (p[r][0] * ket[0] + p[r][1] * ket[1])).sum()
    };
    let z = sandwich(&si, &axis_matrix(nj), &sj) * sandwich(&sj, &axis_matrix(ni), &si);
    (z.norm() > 1e-14).then(|| z.arg())
}

/// `+1` for `gamma` in `[0, pi)`, `-1` for `[-pi, 0)`; degenerate gives `+1`.
pub fn sign_for_gamma(gamma: Option<f64>) -> i8 {
    match gamma {
        Some(g) if (0.0..PI).contains(&g) => 1,
        Some(_) => -1,
        None => 1,
    }
}

pub fn choose_signs(b: &BlochAssignment, axes: &[Vec3], edges: &[Edge]) -> Vec<i8> {
    edges.iter().map(|e| sign_for_gamma(gamma(b.get(e.i), b.get(e.j), &axes[e.i], &axes[e.j]))).collect()
}

/// Per edge `(prod_{k ~ i, k != j} cos 2 theta_ik, prod_{l ~ j, l != i} cos 2 theta_lj)`.
pub fn neighbor_cos_products(g: &WeightedGraph, theta: &[f64]) -> Vec<(f64, f64)> {
    let cos2: Vec<f64> = theta.iter().map(|t| (2.0 * t).cos()).collect();
    let around = |v: usize, skip: usize| -> f64 {
        g.incident(v).expect("vertex in range").iter().filter(|&&k| k != skip).map(|&k| cos2[k]).product()
    };
    (0..g.num_edges())
        .map(|k| {
            let e = g.edges()[k];
            (around(e.i, k), around(e.j, k))
        })
        .collect()
}

/// Exact `<g_ij>` of the rotated all-zero state, per edge.
pub fn epr_edge_energies(g: &WeightedGraph, theta: &[f64]) -> Vec<f64> {
    neighbor_cos_products(g, theta)
        .into_iter()
        .zip(theta)
        .map(|((pk, pl), t)| 0.5 + 0.5 * pk * pl + 0.5 * (2.0 * t).sin() * (pk + pl))
        .collect()
}

/// `<h_ij>` averaged over axes (with signs chosen afterwards), given the
/// product energies `E_ij` of the starting state.
pub fn qmc_edge_energies_expected(g: &WeightedGraph, theta: &[f64], product: &[f64]) -> Vec<f64> {
    neighbor_cos_products(g, theta)
        .into_iter()
        .zip(theta)
        .zip(product)
        .map(|(((pk, pl), t), e)| e * (0.5 + 0.5 * pk * pl + (2.0 * t).sin() * (pk + pl) / PI))
        .collect()
}

fn weighted_total(g: &WeightedGraph, per_edge: &[f64]) -> f64 {
    g.edges().iter().zip(per_edge).map(|(e, v)| e.w * v).sum()
}

/// `F(beta; x)`: the per-edge lower bound on the rotated QMC energy.
pub fn f_beta(beta: f64, x: f64) -> f64 {
    f_beta_with(f_lower_bound(x), beta, x)
}

fn f_beta_with(fx: f64, beta: f64, x: f64) -> f64 {
    let c = (1.0 - beta * beta).sqrt();
    let one_minus = 1.0 - x;
    fx * (0.5 + 0.5 * (1.0 - beta * beta * one_minus * one_minus) + 2.0 / PI * beta * x * (c + (1.0 - c) * x))
}

const X_STEP: f64 = 1e-4;
const BETA_STEP: f64 = 1e-3;
const BETA_REFINE_TOL: f64 = 1e-5;

/// Grid of `(x, f(x))` on `(-1, 1]`.
pub fn f_grid() -> Vec<(f64, f64)> {
    let steps = (2.0 / X_STEP).round() as usize;
    (1..=steps)
        .map(|k| {
            let x = -1.0 + k as f64 * X_STEP;
            (x, f_lower_bound(x))
        })
        .collect()
}

/// `min_x F(beta; x) / (1 + x)` over a precomputed grid.
pub fn min_ratio(beta: f64, grid: &[(f64, f64)]) -> f64 {
    grid.iter().map(|&(x, fx)| f_beta_with(fx, beta, x) / (1.0 + x)).fold(f64::INFINITY, f64::min)
}

/// Maximin rotation strength and its guaranteed ratio: grid search over
/// `beta` then golden-section refinement around the best grid point.
pub fn optimize_beta() -> (f64, f64) {
    let grid = f_grid();
    let steps = (1.0 / BETA_STEP).round() as usize;
    let (mut best_b, mut best_r) = (0.0, f64::NEG_INFINITY);
    for k in 0..=steps {
        let b = k as f64 * BETA_STEP;
        let r = min_ratio(b, &grid);
        if r > best_r {
            (best_b, best_r) = (b, r);
        }
    }
    let (mut lo, mut hi) = ((best_b - BETA_STEP).max(0.0), (best_b + BETA_STEP).min(1.0));
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut ra, mut rb) = (min_ratio(a, &grid), min_ratio(b, &grid));
    while hi - lo > BETA_REFINE_TOL {
        if ra < rb {
            lo = a;
            (a, ra) = (b, rb);
            b = lo + inv_phi * (hi - lo);
            rb = min_ratio(b, &grid);
        } else {
            hi = b;
            (b, rb) = (a, ra);
            a = hi - inv_phi * (hi - lo);
            ra = min_ratio(a, &grid);
        }
    }
    let mid = 0.5 * (lo + hi);
    let r = min_ratio(mid, &grid);
    if r >= best_r {
        (mid, r)
    } else {
        (best_b, best_r)
    }
}

/// The EPR algorithm: rotate the all-zero state by angles read from `y`
/// when `eta` is large enough, otherwise keep the all-zero state.
pub fn run_epr(g: &WeightedGraph, s: &SdpSolution) -> (EnergyReport, CircuitPlan) {
    let y = &s.edge_values;
    let eta: f64 = g.edges().iter().zip(y).map(|(e, v)| e.w * v).sum();
    let branch = if eta >= EPR_THRESHOLD { Branch::Rotated } else { Branch::Product };
    let theta = match branch {
        Branch::Rotated => epr_angles(y),
        Branch::Product => vec![0.0; g.num_edges()],
    };
    let per_edge_energy = epr_edge_energies(g, &theta);
    let total_energy = weighted_total(g, &per_edge_energy);
    let product_energy = g.total_weight();
    let plan = CircuitPlan {
        kind: Kind::Epr,
        edges: g.edges().to_vec(),
        bloch: BlochAssignment::all_up(g.n()),
        axes: vec![EPR_AXIS; g.n()],
        theta,
        sign: vec![1; g.num_edges()],
    };
    let ratio = total_energy / s.objective_value;
    let report = EnergyReport {
        per_edge_energy,
        total_energy,
        sdp_upper_bound: s.objective_value,
        ratio,
        branch,
        eta: Some(eta),
        beta_used: None,
        product_energy,
        mean_trial_energy: None,
        meets_guarantee: ratio >= FRAC_1_SQRT_2 - 1e-9,
    };
    (report, plan)
}

#[derive(Debug, Clone, Copy)]
pub struct QmcOptions {
    pub seed: u64,
    pub trials: usize,
    pub beta: f64,
}

impl Default for QmcOptions {
    fn default() -> Self {
        Self { seed: 0, trials: 64, beta: BETA_STAR }
    }
}

/// Random stream for rounding trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// The QMC algorithm: best-of-`trials` product rounding, then the rotation
/// layer with strength `beta`. The reported energy is the expectation over
/// the random axes; the plan holds one concrete draw of them.
pub fn run_qmc(
    g: &WeightedGraph,
    s: &SdpSolution,
    opts: &QmcOptions,
) -> Result<(EnergyReport, CircuitPlan), RoundingError> {
    let grams = level1_gram(s)?;
    let theta = qmc_angles(&s.edge_values, opts.beta);
    let trials = opts.trials.max(1);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut sum = 0.0;
    for t in 0..trials {
        let b = gp_round(&grams, &mut trial_rng(opts.seed, t))?;
        let e = product_energies(&b, g, Kind::Qmc);
        let total = weighted_total(g, &qmc_edge_energies_expected(g, &theta, &e));
        sum += total;
        if best.as_ref().is_none_or(|(_, bt, _)| total > *bt) {
            best = Some((t, total, e));
        }
    }
    let (t, total_energy, e) = best.expect("at least one trial");
    let mut rng = trial_rng(opts.seed, t);
    let bloch = gp_round(&grams, &mut rng)?;
    let axes = sample_axes(&bloch, &mut rng);
    let sign = choose_signs(&bloch, &axes, g.edges());
    let per_edge_energy = qmc_edge_energies_expected(g, &theta, &e);
    let ratio = total_energy / s.objective_value;
    let report = EnergyReport {
        product_energy: weighted_total(g, &e),
        per_edge_energy,
        total_energy,
        sdp_upper_bound: s.objective_value,
        ratio,
        branch: Branch::Rotated,
        eta: None,
        beta_used: Some(opts.beta),
        mean_trial_energy: Some(sum / trials as f64),
        meets_guarantee: ratio >= BETA_STAR_RATIO,
    };
    let plan = CircuitPlan { kind: Kind::Qmc, edges: g.edges().to_vec(), bloch, axes, theta, sign };
    Ok((report, plan))
}

/// Violations of the star bounds implied by monogamy, for one `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBoundViolation {
    pub vertex: usize,
    /// Edge excluded from the product, if any.
    pub excluded: Option<usize>,
    pub product: f64,
    pub bound: f64,
}

/// Checks, for every vertex `i`,
/// `prod_{k ~ i, x_ik >= 0} sqrt(1 - beta^2 x_ik^2) >= sqrt(1 - beta^2)` and,
/// for every incident edge with `x_ij >= 0`, the product over the other
/// neighbours against `sqrt(1 - beta^2 (1 - x_ij)^2)`.
pub fn check_star_bounds(g: &WeightedGraph, x: &[f64], beta: f64, tol: f64) -> Vec<StarBoundViolation> {
    let term = |v: f64| if v >= 0.0 { (1.0 - beta * beta * v * v).max(0.0).sqrt() } else { 1.0 };
    let mut out = Vec::new();
    for v in 0..g.n() {
        let inc = g.incident(v).expect("vertex in range");
        let full: f64 = inc.iter().map(|&k| term(x[k])).product();
        let bound = (1.0 - beta * beta).sqrt();
        if full < bound - tol {
            out.push(StarBoundViolation { vertex: v, excluded: None, product: full, bound });
        }
        for &skip in inc {
            if x[skip] < 0.0 {
                continue;
            }
            let rest: f64 = inc.iter().filter(|&&k| k != skip).map(|&k| term(x[k])).product();
            let d = 1.0 - x[skip];
            let bound = (1.0 - beta * beta * d * d).max(0.0).sqrt();
            if rest < bound - tol {
                out.push(StarBoundViolation { vertex: v, excluded: Some(skip), product: rest, bound });
            }
        }
    }
    out
}
