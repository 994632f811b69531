//! Relax-and-round approximation algorithms for Quantum Max-Cut and the EPR
//! Hamiltonian on weighted graphs.
//!
//! The pipeline solves the level-2 Lasserre relaxation, reads per-edge
//! entanglement values off the moment matrix, rounds the level-1 block to a
//! product state and then applies a layer of commuting two-qubit rotations
//! whose angles are chosen from the relaxation.

pub mod circuit;
pub mod graph;
pub mod lasserre;
pub mod oracle;
pub mod pauli;
pub mod product;
pub mod report;

use std::fmt;

/// Which two-qubit term sits on every edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `h = (1 - XX - YY - ZZ) / 2`, twice the singlet projector.
    Qmc,
    /// `g = (1 + XX - YY + ZZ) / 2`, twice the projector onto `(|00> + |11>)/sqrt 2`.
    Epr,
}

impl Kind {
    /// Coefficients of `XX`, `YY`, `ZZ` in twice the edge term.
    pub fn pauli_signs(self) -> [f64; 3] {
        match self {
            Kind::Qmc => [-1.0, -1.0, -1.0],
            Kind::Epr => [1.0, -1.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Qmc => "qmc",
            Kind::Epr => "epr",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
