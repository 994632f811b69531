//! Pauli monomials, exact phase-tracked multiplication, and the moment
//! matrix constraint classes they induce.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PauliError {
    #[error("monomial weight bound d = {0} is unsupported (only 1 and 2)")]
    UnsupportedDegree(usize),
    #[error("qubit count must be positive")]
    NoQubits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Single-qubit product `self * other` as a phase and the resulting
    /// axis (`None` for the identity).
    pub fn times(self, other: Axis) -> (Phase, Option<Axis>) {
        use Axis::*;
        match (self, other) {
            (a, b) if a == b => (Phase::PlusOne, None),
            (X, Y) => (Phase::PlusI, Some(Z)),
            (Y, Z) => (Phase::PlusI, Some(X)),
            (Z, X) => (Phase::PlusI, Some(Y)),
            (Y, X) => (Phase::MinusI, Some(Z)),
            (Z, Y) => (Phase::MinusI, Some(X)),
            (X, Z) => (Phase::MinusI, Some(Y)),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

/// A power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne = 0,
    PlusI = 1,
    MinusOne = 2,
    MinusI = 3,
}

impl Phase {
    fn from_power(p: u8) -> Self {
        match p % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn conj(self) -> Self {
        Self::from_power(4 - self as u8)
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }

    /// `+1` / `-1` for real phases.
    pub fn sign(self) -> Option<i8> {
        match self {
            Phase::PlusOne => Some(1),
            Phase::MinusOne => Some(-1),
            _ => None,
        }
    }
}

impl Mul for Phase {
    type Output = Phase;

    // Phases are powers of i; multiplying adds exponents.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self as u8 + rhs as u8)
    }
}

/// Tensor product of single-qubit Paulis; the empty support is the identity.
/// Support sites are kept strictly ascending by vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliMonomial {
    support: Vec<(usize, Axis)>,
}

impl PauliMonomial {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(v: usize, a: Axis) -> Self {
        Self { support: vec![(v, a)] }
    }

    pub fn pair(i: usize, a: Axis, j: usize, b: Axis) -> Self {
        assert_ne!(i, j, "pair on a single vertex");
        if i < j {
            Self { support: vec![(i, a), (j, b)] }
        } else {
            Self { support: vec![(j, b), (i, a)] }
        }
    }

    /// Builds a monomial from arbitrary sites; panics on a repeated vertex.
    pub fn from_sites(sites: impl IntoIterator<Item = (usize, Axis)>) -> Self {
        let mut support: Vec<_> = sites.into_iter().collect();
        support.sort_by_key(|s| s.0);
        assert!(support.windows(2).all(|w| w[0].0 != w[1].0), "repeated vertex");
        Self { support }
    }

    pub fn support(&self) -> &[(usize, Axis)] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    pub fn axis_at(&self, v: usize) -> Option<Axis> {
        self.support.binary_search_by_key(&v, |s| s.0).ok().map(|k| self.support[k].1)
    }

    /// Number of sites where both act with different axes.
    pub fn anticommuting_sites(&self, other: &Self) -> usize {
        let (mut a, mut b) = (self.support.iter().peekable(), other.support.iter().peekable());
        let mut count = 0;
        while let (Some(&&(va, xa)), Some(&&(vb, xb))) = (a.peek(), b.peek()) {
            match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    count += usize::from(xa != xb);
                    a.next();
                    b.next();
                }
            }
        }
        count
    }

    /// Operator product `self * other`.
    pub fn multiply(&self, other: &Self) -> SignedMonomial {
        let mut phase = Phase::PlusOne;
        let mut support = Vec::with_capacity(self.weight() + other.weight());
        let (mut a, mut b) = (0, 0);
        while a < self.support.len() || b < other.support.len() {
            let sa = self.support.get(a);
            let sb = other.support.get(b);
            match (sa, sb) {
                (Some(&(va, xa)), Some(&(vb, xb))) if va == vb => {
                    let (p, axis) = xa.times(xb);
                    phase = phase * p;
                    if let Some(axis) = axis {
                        support.push((va, axis));
                    }
                    a += 1;
                    b += 1;
                }
                (Some(&s), Some(&(vb, _))) if s.0 < vb => {
                    support.push(s);
                    a += 1;
                }
                (Some(&s), None) => {
                    support.push(s);
                    a += 1;
                }
                (_, Some(&s)) => {
                    support.push(s);
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        SignedMonomial { phase, mono: PauliMonomial { support } }
    }
}

impl fmt::Display for PauliMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return f.write_str("I");
        }
        for (k, (v, a)) in self.support.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedMonomial {
    pub phase: Phase,
    pub mono: PauliMonomial,
}

/// All Pauli monomials of weight at most `d` on `n` qubits, in the fixed
/// order: identity, weight one by `(vertex, axis)`, weight two by
/// `(i, j, axis_i, axis_j)`. Moment matrices are indexed by this order.
pub fn enumerate_monomials(n: usize, d: usize) -> Result<Vec<PauliMonomial>, PauliError> {
    if !(1..=2).contains(&d) {
        return Err(PauliError::UnsupportedDegree(d));
    }
    if n == 0 {
        return Err(PauliError::NoQubits);
    }
    let mut out = Vec::with_capacity(basis_size(n, d));
    out.push(PauliMonomial::identity());
    for v in 0..n {
        for a in Axis::ALL {
            out.push(PauliMonomial::single(v, a));
        }
    }
    if d == 2 {
        for i in 0..n {
            for j in i + 1..n {
                for a in Axis::ALL {
                    for b in Axis::ALL {
                        out.push(PauliMonomial::pair(i, a, j, b));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `|P_n^(d)|` for `d` in {1, 2}.
pub fn basis_size(n: usize, d: usize) -> usize {
    match d {
        1 => 1 + 3 * n,
        _ => 1 + 3 * n + 9 * n * n.saturating_sub(1) / 2,
    }
}

/// Position of `m` in `enumerate_monomials(n, 2)`.
pub fn index_of(n: usize, m: &PauliMonomial) -> Option<usize> {
    match m.support() {
        [] => Some(0),
        &[(v, a)] if v < n => Some(1 + 3 * v + a.index()),
        &[(i, a), (j, b)] if j < n => {
            let pair = i * (2 * n - i - 1) / 2 + (j - i - 1);
            Some(1 + 3 * n + 9 * pair + 3 * a.index() + b.index())
        }
        _ => None,
    }
}

/// Index of the two-site monomial `a_i a_j`.
pub fn pair_index(n: usize, i: usize, j: usize, a: Axis, b: Axis) -> usize {
    index_of(n, &PauliMonomial::pair(i, a, j, b)).expect("vertices in range")
}

/// What the moment-matrix entry `M(row, col)` is tied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    /// `row† col` has phase `±i`: the entry is pinned to zero.
    Zero,
    /// Entry equals `sign * M(representative of class id)`.
    Member { id: usize, sign: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassMember {
    pub row: usize,
    pub col: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintClass {
    /// Canonical product monomial shared by all members.
    pub product: PauliMonomial,
    /// Lexicographically least member pair; its sign is `+1`.
    pub representative: (usize, usize),
    /// Members with `row <= col`; the mirrored pair carries the same sign.
    pub members: Vec<ClassMember>,
    /// `Some(1.0)` for the diagonal (identity-product) class.
    pub pinned: Option<f64>,
}

/// Partition of all index pairs of a moment matrix.
#[derive(Debug, Clone)]
pub struct ClassPartition {
    dim: usize,
    classes: Vec<ConstraintClass>,
    zero_pairs: Vec<(usize, usize)>,
    lookup: Vec<PairClass>,
    by_product: HashMap<PauliMonomial, usize>,
}

impl ClassPartition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Classes in order of their representatives; index 0 is the diagonal.
    pub fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }

    /// Pairs `(row, col)`, `row < col`, pinned to zero.
    pub fn zero_pairs(&self) -> &[(usize, usize)] {
        &self.zero_pairs
    }

    pub fn entry(&self, row: usize, col: usize) -> PairClass {
        self.lookup[row * self.dim + col]
    }

    pub fn class_of_product(&self, product: &PauliMonomial) -> Option<usize> {
        self.by_product.get(product).copied()
    }

    /// Largest absolute violation of the class equalities, the zero pins and
    /// the unit diagonal by the matrix `m(row, col)`.
    pub fn max_violation(&self, m: impl Fn(usize, usize) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for class in &self.classes {
            let (r0, c0) = class.representative;
            let rep = class.pinned.unwrap_or_else(|| m(r0, c0));
            for mem in &class.members {
                let target = f64::from(mem.sign) * rep;
                worst = worst.max((m(mem.row, mem.col) - target).abs());
                worst = worst.max((m(mem.col, mem.row) - target).abs());
            }
        }
        for &(r, c) in &self.zero_pairs {
            worst = worst.max(m(r, c).abs()).max(m(c, r).abs());
        }
        worst
    }
}

/// Groups the entries of the moment matrix over `monomials` by the product
/// `A† B` (`= A B` for Paulis). Entries with imaginary phase are pinned to
/// zero; the rest share one scalar per product, up to sign.
pub fn constraint_classes(monomials: &[PauliMonomial]) -> ClassPartition {
    let dim = monomials.len();
    let mut lookup = vec![PairClass::Zero; dim * dim];
    let mut classes: Vec<ConstraintClass> = Vec::new();
    let mut rep_sign: Vec<i8> = Vec::new();
    let mut by_product: HashMap<PauliMonomial, usize> = HashMap::new();
    let mut zero_pairs = Vec::new();
    for r in 0..dim {
        for c in r..dim {
            let prod = monomials[r].multiply(&monomials[c]);
            let Some(sign) = prod.phase.sign() else {
                zero_pairs.push((r, c));
                continue;
            };
            let id = match by_product.get(&prod.mono) {
                Some(&id) => id,
                None => {
                    let id = classes.len();
                    let pinned = prod.mono.is_identity().then_some(1.0);
                    by_product.insert(prod.mono.clone(), id);
                    classes.push(ConstraintClass {
                        product: prod.mono,
                        representative: (r, c),
                        members: Vec::new(),
                        pinned,
                    });
                    rep_sign.push(sign);
                    id
                }
            };
            let rel = sign * rep_sign[id];
            classes[id].members.push(ClassMember { row: r, col: c, sign: rel });
            let pc = PairClass::Member { id, sign: rel };
            lookup[r * dim + c] = pc;
            lookup[c * dim + r] = pc;
        }
    }
    ClassPartition { dim, classes, zero_pairs, lookup, by_product }
}
