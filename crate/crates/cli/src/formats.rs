//! JSON documents read and written by the command line. Complex numbers are
//! `[re, im]` pairs and matrices are row lists of such pairs.

use serde::{Deserialize, Serialize};
use ybsim_core::clifford_sim::{Observable, ProductState};
use ybsim_core::linalg::{frob_dist, kron, ComplexMatrix, C64};
use ybsim_core::perm::Permutation;
use ybsim_core::solutions::{s4t_matrix, R4Gate, SwapFlag, YbNormalForm};

use crate::error::CliError;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Parameters of the qubit families; `Q = [[a, b], [c, d_entry]]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitParams {
    #[serde(default = "one")]
    pub a: C64,
    #[serde(default)]
    pub b: C64,
    #[serde(default)]
    pub c: Option<C64>,
    #[serde(default = "one")]
    pub d_entry: C64,
    #[serde(default = "one")]
    pub p: C64,
    #[serde(default = "one")]
    pub q: C64,
    #[serde(default = "one")]
    pub r_phase: C64,
    #[serde(default = "one")]
    pub k: C64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalParams {
    pub lambdas: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutingParams {
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    #[serde(rename = "B")]
    pub b: ComplexMatrix,
}

/// Input of `gate build`.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GateSpec {
    R1(QubitParams),
    R2(QubitParams),
    R3(QubitParams),
    R4(QubitParams),
    Diag(DiagonalParams),
    Commuting(CommutingParams),
}

/// A stored gate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateFile {
    NormalForm {
        d: usize,
        k: C64,
        q: ComplexMatrix,
        diag: Vec<C64>,
        swap: SwapFlag,
        perm: Permutation,
        matrix: ComplexMatrix,
    },
    CliffordR4 {
        k: C64,
        q1: ComplexMatrix,
        matrix: ComplexMatrix,
    },
    Matrix {
        matrix: ComplexMatrix,
    },
}

const STORED_TOL: f64 = 1e-9;

impl GateFile {
    pub fn from_normal_form(nf: &YbNormalForm) -> Result<Self, CliError> {
        Ok(GateFile::NormalForm {
            d: nf.d,
            k: nf.k,
            q: nf.q.clone(),
            diag: nf.diag.clone(),
            swap: nf.swap,
            perm: nf.perm.clone(),
            matrix: nf.reconstruct()?,
        })
    }

    pub fn from_r4(g: &R4Gate) -> Self {
        GateFile::CliffordR4 { k: g.k, q1: g.q1.clone(), matrix: g.matrix.clone() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GateFile::NormalForm { .. } => "normal_form",
            GateFile::CliffordR4 { .. } => "clifford_r4",
            GateFile::Matrix { .. } => "matrix",
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            GateFile::NormalForm { matrix, .. } | GateFile::CliffordR4 { matrix, .. } | GateFile::Matrix { matrix } => {
                matrix
            }
        }
    }

    /// The normal form, checked against the stored matrix.
    pub fn normal_form(&self) -> Result<Option<YbNormalForm>, CliError> {
        let GateFile::NormalForm { d, k, q, diag, swap, perm, matrix } = self else {
            return Ok(None);
        };
        let nf = YbNormalForm::new(*d, *k, q.clone(), diag.clone(), *swap, perm.clone())?;
        let err = frob_dist(&nf.reconstruct()?, matrix)?;
        if err > STORED_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(CliError::input(format!("stored matrix differs from its normal form by {err:.3e}")));
        }
        Ok(Some(nf))
    }

    /// The family-four record, checked against the stored matrix.
    pub fn r4(&self) -> Result<Option<R4Gate>, CliError> {
        let GateFile::CliffordR4 { k, q1, matrix } = self else {
            return Ok(None);
        };
        let qq = kron(q1, q1);
        let expected = (&(&qq * &s4t_matrix()) * &qq.adjoint()).scale(*k);
        let err = frob_dist(&expected, matrix)?;
        if err > STORED_TOL {
            return Err(CliError::input(format!("stored matrix differs from k(Q₁⊗Q₁)S₄T(Q₁⊗Q₁)† by {err:.3e}")));
        }
        Ok(Some(R4Gate { k: *k, q1: q1.clone(), matrix: matrix.clone() }))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableFile {
    pub wires: Vec<usize>,
    pub matrix: ComplexMatrix,
}

impl ObservableFile {
    pub fn into_observable(self) -> Result<Observable, CliError> {
        Ok(Observable::new(self.wires, self.matrix)?)
    }
}

/// A product state: one `[amp0, amp1]` pair per qubit.
pub fn product_state(pairs: Vec<[C64; 2]>) -> Result<ProductState, CliError> {
    Ok(ProductState::new(pairs)?)
}

/// Parses a digit string such as `0121` over `[d]`.
pub fn parse_ditstring(text: &str, d: usize) -> Result<Vec<usize>, CliError> {
    text.chars()
        .enumerate()
        .map(|(i, ch)| match ch.to_digit(10) {
            Some(v) if (v as usize) < d => Ok(v as usize),
            _ => Err(CliError::input(format!("`{text}`: character {i} is not a digit below {d}"))),
        })
        .collect()
}
