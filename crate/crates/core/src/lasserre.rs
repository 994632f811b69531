//! Level-2 Lasserre relaxation: assembly, solution and extraction of the
//! per-edge values.
//!
//! The moment matrix `M` is indexed by the monomials of
//! [`enumerate_monomials`]`(n, 2)`. Entries sharing a product are one scalar,
//! so the solver only ever sees one variable per free constraint class.
//!
//! Conjugating every qubit by the same Pauli leaves both Hamiltonians and
//! all constraints invariant, and multiplies each monomial by a character of
//! `Z2 x Z2`. Averaging an optimal `M` over that group keeps it optimal and
//! zeroes every entry between monomials of different characters, so by
//! default the relaxation is solved as four independent diagonal blocks with
//! only the character-neutral classes free.

use std::io;

use faer::Mat;
use log::warn;
use sdp_ipm::{BlockSdp, ConicSolver, InteriorPoint, SolveStatus, SolverError, SparseSym};

use crate::graph::{Edge, WeightedGraph};
use crate::pauli::{
    constraint_classes, enumerate_monomials, pair_index, Axis, ClassPartition, PairClass, PauliMonomial,
};
use crate::Kind;

pub const DEFAULT_TOL: f64 = 1e-7;

/// Clipping of an edge value by more than this is reported.
pub const CLIP_WARN: f64 = 1e-5;

#[derive(Debug, thiserror::Error)]
pub enum LasserreError {
    #[error("tolerance {0} outside (0, 1e-4]")]
    BadTolerance(f64),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    kind: Kind,
    n: usize,
    monomials: Vec<PauliMonomial>,
    classes: ClassPartition,
    /// `(class id, coefficient)`; the objective is `constant + sum coeff * value`.
    objective: Vec<(usize, f64)>,
    constant: f64,
    edges: Vec<Edge>,
}

/// Index of the diagonal block a monomial lands in under the global Pauli
/// symmetry: one bit for the parity of `Y`/`Z` factors and one for `X`/`Y`.
pub fn charge(m: &PauliMonomial) -> usize {
    let (mut yz, mut xy) = (0, 0);
    for &(_, a) in m.support() {
        yz ^= usize::from(a != Axis::X);
        xy ^= usize::from(a != Axis::Z);
    }
    2 * yz + xy
}

/// Assembles the relaxation. Weights are used as given; on a normalised
/// graph the optimum is `1 + sum_ij w_ij * value_ij`.
pub fn build_sdp(g: &WeightedGraph, kind: Kind) -> Result<SdpProblem, LasserreError> {
    let n = g.n();
    if n == 0 {
        return Err(LasserreError::EmptyGraph);
    }
    // A single qubit still gets the weight-2 basis of an empty pair set.
    let monomials = enumerate_monomials(n, 2).expect("n >= 1, d = 2");
    let classes = constraint_classes(&monomials);
    let mut coeff = vec![0.0; classes.classes().len()];
    let mut constant = 0.0;
    for e in g.edges() {
        constant += 0.5 * e.w;
        for (a, s) in Axis::ALL.into_iter().zip(kind.pauli_signs()) {
            let idx = pair_index(n, e.i, e.j, a, a);
            match classes.entry(0, idx) {
                PairClass::Member { id, sign } => coeff[id] += 0.5 * e.w * s * f64::from(sign),
                PairClass::Zero => unreachable!("a_i a_j is Hermitian"),
            }
        }
    }
    let objective = coeff.into_iter().enumerate().filter(|&(_, c)| c != 0.0).collect();
    Ok(SdpProblem { kind, n, monomials, classes, objective, constant, edges: g.edges().to_vec() })
}

/// How classes map to solver variables and monomials to blocks.
#[derive(Debug, Clone)]
pub struct Layout {
    /// Class id of every solver variable.
    pub var_class: Vec<usize>,
    /// `(block, position)` of every monomial.
    pub position: Vec<(usize, usize)>,
}

impl SdpProblem {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn monomials(&self) -> &[PauliMonomial] {
        &self.monomials
    }

    pub fn classes(&self) -> &ClassPartition {
        &self.classes
    }

    /// Non-zero objective coefficients by class id.
    pub fn objective_terms(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn objective_constant(&self) -> f64 {
        self.constant
    }

    /// Objective evaluated at an arbitrary matrix via class representatives.
    pub fn objective_at(&self, m: &Mat<f64>) -> f64 {
        self.constant
            + self
                .objective
                .iter()
                .map(|&(id, c)| {
                    let (r, col) = self.classes.classes()[id].representative;
                    c * m[(r, col)]
                })
                .sum::<f64>()
    }

    /// Conic form handed to the solver. With `reduce` the matrix splits into
    /// the four symmetry sectors; otherwise it is one dense block.
    pub fn to_block_sdp(&self, reduce: bool) -> (BlockSdp, Layout) {
        let mut block_sizes = vec![0usize; if reduce { 4 } else { 1 }];
        let position: Vec<(usize, usize)> = self
            .monomials
            .iter()
            .map(|m| {
                let b = if reduce { charge(m) } else { 0 };
                block_sizes[b] += 1;
                (b, block_sizes[b] - 1)
            })
            .collect();
        let mut constant = SparseSym::new();
        for &(b, p) in &position {
            constant.push(b, p, p, 1.0);
        }
        let mut coeff_of = vec![0.0; self.classes.classes().len()];
        for &(id, c) in &self.objective {
            coeff_of[id] = c;
        }
        let mut var_class = Vec::new();
        let mut coefficients = Vec::new();
        let mut objective = Vec::new();
        for (id, class) in self.classes.classes().iter().enumerate() {
            if class.pinned.is_some() {
                continue;
            }
            let (r0, _) = class.representative;
            let (b0, _) = position[r0];
            let (_, c0) = class.representative;
            if position[c0].0 != b0 {
                continue;
            }
            let mut a = SparseSym::new();
            for mem in &class.members {
                let (b, pr) = position[mem.row];
                let (_, pc) = position[mem.col];
                a.push(b, pr, pc, f64::from(mem.sign));
            }
            var_class.push(id);
            coefficients.push(a);
            objective.push(coeff_of[id]);
        }
        (BlockSdp { block_sizes, constant, coefficients, objective }, Layout { var_class, position })
    }

    /// Dense moment matrix from one value per class (pinned classes ignore
    /// their entry).
    pub fn matrix_from_class_values(&self, values: &[f64]) -> Mat<f64> {
        let dim = self.dim();
        Mat::from_fn(dim, dim, |r, c| match self.classes.entry(r, c) {
            PairClass::Zero => 0.0,
            PairClass::Member { id, sign } => {
                let v = self.classes.classes()[id].pinned.unwrap_or(values[id]);
                f64::from(sign) * v
            }
        })
    }

    /// Writes the reduced conic form in SDPA sparse format. Comment lines
    /// name the product monomial behind every variable.
    pub fn write_sdpa<W: io::Write>(&self, out: W) -> io::Result<()> {
        let (sdp, layout) = self.to_block_sdp(true);
        let mut comment =
            format!("{} level-2 relaxation, n = {}, objective constant {}\n", self.kind, self.n, self.constant);
        for (k, &id) in layout.var_class.iter().enumerate() {
            comment.push_str(&format!("var {} = <{}>\n", k + 1, self.classes.classes()[id].product));
        }
        sdp_ipm::write_sdpa(&sdp, &comment, out)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub kind: Kind,
    pub n: usize,
    /// Moment matrix, `dim x dim`, indexed by the monomial enumeration.
    pub m: Mat<f64>,
    /// Primal objective: the upper bound on the largest eigenvalue.
    pub objective_value: f64,
    /// Dual objective of the solver certificate.
    pub dual_bound: f64,
    pub solver_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// `x_ij` (QMC) or `y_ij` (EPR) in edge order, clipped to `[-1, 1]`.
    pub edge_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub symmetry_reduction: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, symmetry_reduction: true }
    }
}

pub fn solve_sdp(p: &SdpProblem, tol: f64) -> Result<SdpSolution, LasserreError> {
    solve_sdp_with(p, SolveOptions { tol, ..SolveOptions::default() })
}

pub fn solve_sdp_with(p: &SdpProblem, opts: SolveOptions) -> Result<SdpSolution, LasserreError> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-4) {
        return Err(LasserreError::BadTolerance(opts.tol));
    }
    solve_sdp_using(p, &InteriorPoint::with_tolerance(opts.tol), opts.symmetry_reduction)
}

/// Solves with any conic backend.
pub fn solve_sdp_using(p: &SdpProblem, solver: &dyn ConicSolver, reduce: bool) -> Result<SdpSolution, LasserreError> {
    let (sdp, layout) = p.to_block_sdp(reduce);
    let sol = solver.solve(&sdp)?;
    let mut values = vec![0.0; p.classes.classes().len()];
    for (&id, &y) in layout.var_class.iter().zip(&sol.y) {
        values[id] = y;
    }
    let m = p.matrix_from_class_values(&values);
    let objective_value = p.objective_at(&m);
    let g_edges = &p.edges;
    let edge_values = g_edges.iter().map(|e| clip_edge_value(raw_edge_value(&m, p.n, e, p.kind), e)).collect();
    Ok(SdpSolution {
        kind: p.kind,
        n: p.n,
        m,
        objective_value,
        dual_bound: p.constant + sol.dual_objective,
        solver_gap: sol.relative_gap,
        iterations: sol.iterations,
        status: sol.status,
        edge_values,
    })
}

/// `(1/2)(1 + sum_a s_a M(1, a_i a_j)) - 1` without clipping.
pub fn raw_edge_value(m: &Mat<f64>, n: usize, e: &Edge, kind: Kind) -> f64 {
    let sum: f64 =
        Axis::ALL.into_iter().zip(kind.pauli_signs()).map(|(a, s)| s * m[(0, pair_index(n, e.i, e.j, a, a))]).sum();
    0.5 * (1.0 + sum) - 1.0
}

fn clip_edge_value(v: f64, e: &Edge) -> f64 {
    let c = v.clamp(-1.0, 1.0);
    if (v - c).abs() > CLIP_WARN {
        warn!("edge ({}, {}) value {v:.6e} clipped to {c}", e.i, e.j);
    }
    c
}

/// `x_ij` or `y_ij` for every edge of `g`, read from the moment matrix and
/// clipped to `[-1, 1]`.
pub fn edge_values(m: &Mat<f64>, g: &WeightedGraph, kind: Kind) -> Vec<f64> {
    g.edges().iter().map(|e| clip_edge_value(raw_edge_value(m, g.n(), e, kind), e)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonogamyViolation {
    pub vertex: usize,
    /// Sum of the non-negative incident values.
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonogamyReport {
    /// Largest per-vertex sum of non-negative incident values.
    pub worst_sum: f64,
    pub violations: Vec<MonogamyViolation>,
}

impl MonogamyReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that, around every vertex, the non-negative edge values sum to at
/// most `1 + tol`. That subset is the worst case over all neighbour subsets.
pub fn check_monogamy(values: &[f64], g: &WeightedGraph, tol: f64) -> MonogamyReport {
    let mut worst_sum: f64 = 0.0;
    let mut violations = Vec::new();
    for v in 0..g.n() {
        let sum: f64 = g
            .incident(v)
            .expect("vertex in range")
            .iter()
            .map(|&k| values[k])
            .filter(|&x| x >= 0.0)
            .fold(0.0, |a, b| a + b);
        worst_sum = worst_sum.max(sum);
        if sum > 1.0 + tol {
            violations.push(MonogamyViolation { vertex: v, sum });
        }
    }
    MonogamyReport { worst_sum, violations }
}
