//! Exact small-instance reference: dense Hamiltonians, statevectors and
//! moment matrices of true states.
//!
//! Qubit 0 is the least significant bit of a basis-state index.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::circuit::{choose_signs, sample_axes, CircuitPlan};
use crate::graph::WeightedGraph;
use crate::pauli::{Axis, PauliMonomial};
use crate::product::{BlochAssignment, Vec3};
use crate::Kind;

/// Largest qubit count accepted by the dense routines.
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} qubits exceeds the dense limit of {MAX_QUBITS}")]
    TooLarge(usize),
    #[error("eigendecomposition failed")]
    Eigen,
}

/// Dense `2^n x 2^n` Hamiltonian. Both edge terms are real in the
/// computational basis, so the matrix is real symmetric.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub kind: Kind,
    pub n: usize,
    pub matrix: Mat<f64>,
}

fn check_size(n: usize) -> Result<(), OracleError> {
    if n > MAX_QUBITS {
        Err(OracleError::TooLarge(n))
    } else {
        Ok(())
    }
}

/// `sum_ij w_ij t_ij` with `t = h` (QMC) or `g` (EPR).
///
/// On a basis state `|b>`, with `b'` equal to `b` with bits `i` and `j`
/// flipped: `h|b> = |b> - |b'>` when the bits differ and `0` otherwise;
/// `g|b> = |b> + |b'>` when they agree and `0` otherwise.
pub fn build_hamiltonian(g: &WeightedGraph, kind: Kind) -> Result<DenseHamiltonian, OracleError> {
    let n = g.n();
    check_size(n)?;
    let dim = 1usize << n;
    let mut matrix = Mat::<f64>::zeros(dim, dim);
    for e in g.edges() {
        let mask = (1 << e.i) | (1 << e.j);
        for b in 0..dim {
            let differ = ((b >> e.i) ^ (b >> e.j)) & 1 == 1;
            let off = match (kind, differ) {
                (Kind::Qmc, true) => -1.0,
                (Kind::Epr, false) => 1.0,
                _ => continue,
            };
            matrix[(b, b)] += e.w;
            matrix[(b ^ mask, b)] += off * e.w;
        }
    }
    Ok(DenseHamiltonian { kind, n, matrix })
}

impl DenseHamiltonian {
    pub fn eigenvalues(&self) -> Result<Vec<f64>, OracleError> {
        let mut ev = self.matrix.self_adjoint_eigenvalues(Side::Lower).map_err(|_| OracleError::Eigen)?;
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Largest eigenvalue and a normalised eigenvector for it.
    pub fn top_eigenpair(&self) -> Result<(f64, Statevector), OracleError> {
        let eig = self.matrix.self_adjoint_eigen(Side::Lower).map_err(|_| OracleError::Eigen)?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let top = (0..s.nrows()).max_by(|&a, &b| s[a].total_cmp(&s[b])).expect("non-empty");
        let amps = (0..u.nrows()).map(|r| C64::new(u[(r, top)], 0.0)).collect();
        Ok((s[top], Statevector { n: self.n, amps }))
    }
}

/// `||H||`, the largest eigenvalue.
pub fn max_eigenvalue(h: &DenseHamiltonian) -> Result<f64, OracleError> {
    Ok(*h.eigenvalues()?.last().expect("non-empty"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

/// `n . sigma` as a 2x2 matrix, row-major.
pub fn axis_matrix(v: &Vec3) -> [[C64; 2]; 2] {
    [[C64::new(v[2], 0.0), C64::new(v[0], -v[1])], [C64::new(v[0], v[1]), C64::new(-v[2], 0.0)]]
}

/// Single-qubit state with Bloch vector `v` (global phase fixed so the
/// `|0>` amplitude is real and non-negative).
pub fn qubit_state(v: &Vec3) -> [C64; 2] {
    let c = (0.5 * (1.0 + v[2])).max(0.0).sqrt();
    let s = (0.5 * (1.0 - v[2])).max(0.0).sqrt();
    let phi = v[1].atan2(v[0]);
    [C64::new(c, 0.0), C64::from_polar(s, phi)]
}

impl Statevector {
    pub fn zero_state(n: usize) -> Result<Self, OracleError> {
        check_size(n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn product_state(b: &BlochAssignment) -> Result<Self, OracleError> {
        let n = b.len();
        check_size(n)?;
        let qubits: Vec<[C64; 2]> = b.vectors().iter().map(qubit_state).collect();
        let amps =
            (0..1usize << n).map(|idx| qubits.iter().enumerate().map(|(q, s)| s[(idx >> q) & 1]).product()).collect();
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a 2x2 matrix to qubit `q`.
    pub fn apply_single(&mut self, q: usize, u: &[[C64; 2]; 2]) {
        let bit = 1 << q;
        for idx in 0..self.amps.len() {
            if idx & bit == 0 {
                let (a0, a1) = (self.amps[idx], self.amps[idx | bit]);
                self.amps[idx] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[idx | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Applies `cos t I + i sign sin t (n_i . sigma)(n_j . sigma)`.
    pub fn apply_rotation(&mut self, i: usize, j: usize, theta: f64, sign: i8, ni: &Vec3, nj: &Vec3) {
        let mut pp = self.clone();
        pp.apply_single(i, &axis_matrix(ni));
        pp.apply_single(j, &axis_matrix(nj));
        let c = C64::new(theta.cos(), 0.0);
        let s = C64::new(0.0, f64::from(sign) * theta.sin());
        for (a, b) in self.amps.iter_mut().zip(&pp.amps) {
            *a = c * *a + s * b;
        }
    }

    /// Applies a Pauli monomial.
    pub fn apply_pauli(&self, m: &PauliMonomial) -> Self {
        let mut flip = 0usize;
        for &(q, a) in m.support() {
            if a != Axis::Z {
                flip |= 1 << q;
            }
        }
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (idx, &amp) in self.amps.iter().enumerate() {
            let mut phase = C64::new(1.0, 0.0);
            for &(q, a) in m.support() {
                let bit = (idx >> q) & 1;
                phase *= match (a, bit) {
                    (Axis::X, _) | (Axis::Z, 0) => C64::new(1.0, 0.0),
                    (Axis::Z, _) => C64::new(-1.0, 0.0),
                    (Axis::Y, 0) => C64::new(0.0, 1.0),
                    (Axis::Y, _) => C64::new(0.0, -1.0),
                };
            }
            out[idx ^ flip] = phase * amp;
        }
        Self { n: self.n, amps: out }
    }

    /// Applies `Y` on every qubit with `side[q]` set.
    pub fn rotate_y(&self, side: &[bool]) -> Self {
        let support = side.iter().enumerate().filter(|&(_, &s)| s).map(|(q, _)| (q, Axis::Y));
        self.apply_pauli(&PauliMonomial::from_sites(support))
    }
}

/// Applies every gate of `plan` in edge order (they commute).
pub fn apply_circuit(v: &Statevector, plan: &CircuitPlan) -> Statevector {
    let mut out = v.clone();
    for (k, e) in plan.edges.iter().enumerate() {
        if plan.theta[k] != 0.0 {
            out.apply_rotation(e.i, e.j, plan.theta[k], plan.sign[k], &plan.axes[e.i], &plan.axes[e.j]);
        }
    }
    out
}

/// Product state of the plan followed by its gates.
pub fn plan_state(plan: &CircuitPlan) -> Result<Statevector, OracleError> {
    Ok(apply_circuit(&Statevector::product_state(&plan.bloch)?, plan))
}

/// `<v| H |v>`; panics if the imaginary residue exceeds `1e-12`.
pub fn energy(v: &Statevector, h: &DenseHamiltonian) -> f64 {
    let dim = v.amps.len();
    assert_eq!(dim, h.matrix.nrows());
    let mut acc = C64::new(0.0, 0.0);
    for c in 0..dim {
        let vc = v.amps[c];
        if vc == C64::new(0.0, 0.0) {
            continue;
        }
        let col = h.matrix.col(c);
        let mut hv = C64::new(0.0, 0.0);
        for r in 0..dim {
            let x = col[r];
            if x != 0.0 {
                hv += v.amps[r].conj() * x;
            }
        }
        acc += hv * vc;
    }
    assert!(acc.im.abs() <= 1e-12, "imaginary energy residue {}", acc.im);
    acc.re
}

/// Expectation of one edge term, without building the Hamiltonian.
pub fn edge_energy(v: &Statevector, i: usize, j: usize, kind: Kind) -> f64 {
    let mask = (1 << i) | (1 << j);
    let mut acc = 0.0;
    for (b, amp) in v.amps.iter().enumerate() {
        let differ = ((b >> i) ^ (b >> j)) & 1 == 1;
        let off = match (kind, differ) {
            (Kind::Qmc, true) => -1.0,
            (Kind::Epr, false) => 1.0,
            _ => continue,
        };
        acc += amp.norm_sqr() + off * (amp.conj() * v.amps[b ^ mask]).re;
    }
    acc
}

/// Total energy `sum_ij w_ij <t_ij>` computed edge by edge.
pub fn graph_energy(v: &Statevector, g: &WeightedGraph, kind: Kind) -> f64 {
    g.edges().iter().map(|e| e.w * edge_energy(v, e.i, e.j, kind)).sum()
}

/// Monte Carlo estimate of the per-edge QMC energies of the rotated state,
/// resampling axes (and the signs that follow from them) `samples` times.
/// Returns `(mean, standard error)` per edge.
pub fn monte_carlo_qmc<R: rand::Rng + ?Sized>(
    g: &WeightedGraph,
    bloch: &BlochAssignment,
    theta: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<Vec<(f64, f64)>, OracleError> {
    let start = Statevector::product_state(bloch)?;
    let m = g.num_edges();
    let (mut sum, mut sq) = (vec![0.0; m], vec![0.0; m]);
    for _ in 0..samples {
        let axes = sample_axes(bloch, rng);
        let plan = CircuitPlan {
            kind: Kind::Qmc,
            edges: g.edges().to_vec(),
            bloch: bloch.clone(),
            sign: choose_signs(bloch, &axes, g.edges()),
            axes,
            theta: theta.to_vec(),
        };
        let v = apply_circuit(&start, &plan);
        for (k, e) in g.edges().iter().enumerate() {
            let x = edge_energy(&v, e.i, e.j, Kind::Qmc);
            sum[k] += x;
            sq[k] += x * x;
        }
    }
    let s = samples as f64;
    Ok(sum
        .into_iter()
        .zip(sq)
        .map(|(a, b)| {
            let mean = a / s;
            let var = (b / s - mean * mean).max(0.0) * s / (s - 1.0).max(1.0);
            (mean, (var / s).sqrt())
        })
        .collect())
}

/// `Re <v| A B |v>` over all pairs of `monomials`.
pub fn moment_matrix_from_state(v: &Statevector, monomials: &[PauliMonomial]) -> Mat<f64> {
    let images: Vec<Statevector> = monomials.iter().map(|m| v.apply_pauli(m)).collect();
    let dim = monomials.len();
    let mut out = Mat::<f64>::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let x = images[r].inner(&images[c]).re;
            out[(r, c)] = x;
            out[(c, r)] = x;
        }
    }
    out
}
