//! Product-state rounding of the level-1 moment block and the hypergeometric
//! lower bound on its expected edge energy.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{Edge, WeightedGraph};
use crate::lasserre::SdpSolution;
use crate::Kind;

/// Eigenvalues of the level-1 block below this are an error, the rest of the
/// negative ones are treated as zero.
pub const NEGATIVE_EIG_TOL: f64 = 1e-7;

/// Eigenvalues at or below this are dropped from the factorisation; their
/// eigenvectors only carry rounding noise.
const RANK_CUTOFF: f64 = 1e-10;

/// Number of fresh Gaussian draws allowed when a projection vanishes.
pub const MAX_RESAMPLES: usize = 16;

const SERIES_EPS: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoundingError {
    #[error("level-1 block has eigenvalue {0:.3e}; solver output is not PSD")]
    Indefinite(f64),
    #[error("eigendecomposition failed")]
    Eigen,
    #[error("projection vanished after {0} resamples")]
    Degenerate(usize),
    #[error("hypergeometric argument {0} outside [-1, 1]")]
    Domain(f64),
    #[error("hypergeometric series did not converge within {0} terms")]
    SeriesNotConverged(usize),
}

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// One unit Bloch vector per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochAssignment {
    vectors: Vec<Vec3>,
}

impl BlochAssignment {
    /// Normalises every vector; `None` if one of them is (numerically) zero.
    pub fn from_unnormalized(vectors: Vec<Vec3>) -> Option<Self> {
        let vectors = vectors
            .into_iter()
            .map(|v| {
                let r = norm(&v);
                (r >= 1e-12).then(|| [v[0] / r, v[1] / r, v[2] / r])
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self { vectors })
    }

    /// Every qubit in `|0>`.
    pub fn all_up(n: usize) -> Self {
        Self { vectors: vec![[0.0, 0.0, 1.0]; n] }
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn get(&self, v: usize) -> &Vec3 {
        &self.vectors[v]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Vectors `u_i^a` whose Gram matrix is the level-1 block of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramVectors {
    n: usize,
    rank: usize,
    /// Row `3 i + a` holds `u_i^a`.
    data: Vec<f64>,
}

impl GramVectors {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the vectors.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vector(&self, vertex: usize, axis: usize) -> &[f64] {
        let r = 3 * vertex + axis;
        &self.data[r * self.rank..(r + 1) * self.rank]
    }

    /// `<u_r, u_c>` for level-1 rows `r = 3 i + a`.
    pub fn inner(&self, r: usize, c: usize) -> f64 {
        let (a, b) = (r * self.rank, c * self.rank);
        (0..self.rank).map(|k| self.data[a + k] * self.data[b + k]).sum()
    }
}

/// Factorises the level-1 block (indices `1 ..= 3n`) of the solution.
pub fn level1_gram(s: &SdpSolution) -> Result<GramVectors, RoundingError> {
    level1_gram_from_matrix(&s.m, s.n)
}

pub fn level1_gram_from_matrix(m: &Mat<f64>, n: usize) -> Result<GramVectors, RoundingError> {
    let k = 3 * n;
    let block = Mat::from_fn(k, k, |r, c| 0.5 * (m[(1 + r, 1 + c)] + m[(1 + c, 1 + r)]));
    let eig = block.self_adjoint_eigen(Side::Lower).map_err(|_| RoundingError::Eigen)?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut keep = Vec::new();
    for j in 0..k {
        let lam = s[j];
        if lam < -NEGATIVE_EIG_TOL {
            return Err(RoundingError::Indefinite(lam));
        }
        if lam > RANK_CUTOFF {
            keep.push((j, lam.sqrt()));
        }
    }
    let rank = keep.len();
    let mut data = vec![0.0; k * rank];
    for r in 0..k {
        for (col, &(j, root)) in keep.iter().enumerate() {
            data[r * rank + col] = u[(r, j)] * root;
        }
    }
    Ok(GramVectors { n, rank, data })
}

/// One rounding trial: a shared Gaussian `z`, per-vertex projections
/// `w_i = (<z,u_i^x>, <z,u_i^y>, <z,u_i^z>)`, normalised.
pub fn gp_round<R: Rng + ?Sized>(grams: &GramVectors, rng: &mut R) -> Result<BlochAssignment, RoundingError> {
    for _ in 0..=MAX_RESAMPLES {
        let z: Vec<f64> = (0..grams.rank).map(|_| rng.sample(StandardNormal)).collect();
        let w: Vec<Vec3> = (0..grams.n)
            .map(|i| {
                let mut out = [0.0; 3];
                for (a, slot) in out.iter_mut().enumerate() {
                    *slot = grams.vector(i, a).iter().zip(&z).map(|(u, z)| u * z).sum();
                }
                out
            })
            .collect();
        if let Some(b) = BlochAssignment::from_unnormalized(w) {
            return Ok(b);
        }
    }
    Err(RoundingError::Degenerate(MAX_RESAMPLES))
}

/// Energy of the product state on one edge term.
pub fn product_edge_energy(b: &BlochAssignment, e: &Edge, kind: Kind) -> f64 {
    let (vi, vj) = (b.get(e.i), b.get(e.j));
    let s = kind.pauli_signs();
    0.5 * (1.0 + s[0] * vi[0] * vj[0] + s[1] * vi[1] * vj[1] + s[2] * vi[2] * vj[2])
}

/// Per-edge product energies in edge order.
pub fn product_energies(b: &BlochAssignment, g: &WeightedGraph, kind: Kind) -> Vec<f64> {
    g.edges().iter().map(|e| product_edge_energy(b, e, kind)).collect()
}

/// `2F1(1/2, 1/2; 5/2; z)` by its power series, for `|z| <= 1`.
pub fn hyp2f1_half_half_fivehalf(z: f64) -> Result<f64, RoundingError> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(RoundingError::Domain(z));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (0.5 + kf) * (0.5 + kf) / ((2.5 + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() < SERIES_EPS {
            return Ok(sum);
        }
    }
    Err(RoundingError::SeriesNotConverged(SERIES_MAX_TERMS))
}

/// Lower bound on the expected product energy of an edge with relaxation
/// value `x`: `1/2 - (4 / 3 pi) rho 2F1(1/2, 1/2; 5/2; rho^2)` with
/// `rho = -(1 + 2x) / 3`.
pub fn f_lower_bound(x: f64) -> f64 {
    let rho = -(1.0 + 2.0 * x) / 3.0;
    let h = hyp2f1_half_half_fivehalf(rho * rho).expect("rho^2 <= 1 for x in [-1, 1]");
    0.5 - 4.0 / (3.0 * PI) * rho * h
}
