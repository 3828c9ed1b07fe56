//! Quantum and algebraic Yang-Baxter equations.

use crate::error::{Error, Result};
use crate::linalg::{frob_dist, is_unitary, kron, ComplexMatrix, ONE};

/// A gate on `V ⊗ V` with `dim V = d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQuditGate {
    d: usize,
    matrix: ComplexMatrix,
}

impl TwoQuditGate {
    pub fn new(d: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: matrix.dim() });
        }
        if matrix.determinant().norm() <= 1e-14 {
            return Err(Error::Singular);
        }
        Ok(TwoQuditGate { d, matrix })
    }

    /// Infers `d` from a `d² × d²` matrix.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let d = (matrix.dim() as f64).sqrt().round() as usize;
        Self::new(d, matrix)
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(&self.matrix, tol)
    }
}

/// Outcome of a Yang-Baxter check: never an error for non-solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YbeCheck {
    pub holds: bool,
    /// Frobenius distance between the two sides.
    pub residual: f64,
}

/// `T|a⊗b⟩ = |b⊗a⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            t[(b * d + a, a * d + b)] = ONE;
        }
    }
    t
}

/// `(R⊗I)(I⊗R)(R⊗I)` against `(I⊗R)(R⊗I)(I⊗R)`.
pub fn check_qybe(r: &TwoQuditGate, tol: f64) -> YbeCheck {
    let id = ComplexMatrix::identity(r.d);
    let r_i = kron(&r.matrix, &id);
    let i_r = kron(&id, &r.matrix);
    let lhs = &(&r_i * &i_r) * &r_i;
    let rhs = &(&i_r * &r_i) * &i_r;
    let residual = frob_dist(&lhs, &rhs).expect("same dimension");
    YbeCheck { holds: residual <= tol, residual }
}

/// `S₁₂ S₁₃ S₂₃` against `S₂₃ S₁₃ S₁₂`, with `S₁₃ = (I⊗T)(S⊗I)(I⊗T)`.
pub fn check_aybe(s: &TwoQuditGate, tol: f64) -> YbeCheck {
    let id = ComplexMatrix::identity(s.d);
    let s12 = kron(&s.matrix, &id);
    let s23 = kron(&id, &s.matrix);
    let i_t = kron(&id, &swap_operator(s.d));
    let s13 = &(&i_t * &s12) * &i_t;
    let lhs = &(&s12 * &s13) * &s23;
    let rhs = &(&s23 * &s13) * &s12;
    let residual = frob_dist(&lhs, &rhs).expect("same dimension");
    YbeCheck { holds: residual <= tol, residual }
}

/// `S = R·T`.
pub fn s_from_r(r: &TwoQuditGate) -> TwoQuditGate {
    TwoQuditGate { d: r.d, matrix: &r.matrix * &swap_operator(r.d) }
}

/// `R = S·T`.
pub fn r_from_s(s: &TwoQuditGate) -> TwoQuditGate {
    TwoQuditGate { d: s.d, matrix: &s.matrix * &swap_operator(s.d) }
}
