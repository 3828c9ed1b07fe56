//! Dense complex linear algebra at oracle scale.
//!
//! Basis ordering is big-endian throughout the crate: on `n` wires of local
//! dimension `d`, wire 0 is the most significant dit, so `|x_0 x_1 … x_{n-1}⟩`
//! has index `Σ x_w · d^(n-1-w)`. `kron(a, b)` maps `|i⟩⊗|j⟩` to
//! `i·b.dim() + j`, which is the same convention.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::braid::Circuit;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest `d^n` the dense oracle will build.
pub const ORACLE_CAP: usize = 4096;

/// Default tolerance for unitarity and equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` finite entries.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { dim, data })
    }

    /// Convenience constructor from real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let (row_out, row_b) = (&mut out.data[i * n..(i + 1) * n], &other.data[k * n..(k + 1) * n]);
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::Singular);
        }
        for col in 0..n {
            let pivot =
                (col..n).max_by(|&r, &s| a[(r, col)].norm().total_cmp(&a[(s, col)].norm())).expect("non-empty range");
            if a[(pivot, col)].norm() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a.data[col * n + j] *= p;
                inv.data[col * n + j] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a.data[col * n + j], inv.data[col * n + j]);
                    a.data[r * n + j] -= f * ac;
                    inv.data[r * n + j] -= f * ic;
                }
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> C64 {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot =
                (col..n).max_by(|&r, &s| a[(r, col)].norm().total_cmp(&a[(s, col)].norm())).expect("non-empty range");
            if a[(pivot, col)] == ZERO {
                return ZERO;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    let v = a.data[col * n + j];
                    a.data[r * n + j] -= f * v;
                }
            }
        }
        det
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        let n = self.dim;
        for j in 0..n {
            self.data.swap(a * n + j, b * n + j);
        }
    }

    /// Row-mixing by `gate` on `wires`: `self ← embed(gate) · self`.
    pub(crate) fn apply_gate_left(&mut self, gate: &ComplexMatrix, wires: &[usize], n: usize, d: usize) {
        let cols = self.dim;
        let layout = GateLayout::new(wires, n, d);
        let k = gate.dim;
        let mut tmp = vec![ZERO; k];
        for base in layout.bases() {
            for c in 0..cols {
                for (r, t) in tmp.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for s in 0..k {
                        acc += gate.data[r * k + s] * self.data[(base + layout.offsets[s]) * cols + c];
                    }
                    *t = acc;
                }
                for (r, &t) in tmp.iter().enumerate() {
                    self.data[(base + layout.offsets[r]) * cols + c] = t;
                }
            }
        }
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on dimension mismatch; use [`ComplexMatrix::matmul`] for a fallible product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for ComplexMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        ComplexMatrix::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect(),
        )
    }
}

impl From<ComplexMatrix> for Vec<Vec<[f64; 2]>> {
    fn from(m: ComplexMatrix) -> Self {
        (0..m.dim).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Index bookkeeping for applying a `k`-wire gate inside `n` wires.
struct GateLayout {
    offsets: Vec<usize>,
    wire_strides: Vec<usize>,
    d: usize,
    total: usize,
}

impl GateLayout {
    fn new(wires: &[usize], n: usize, d: usize) -> Self {
        let stride = |w: usize| d.pow((n - 1 - w) as u32);
        let k = wires.len();
        let local = d.pow(k as u32);
        let wire_strides: Vec<usize> = wires.iter().map(|&w| stride(w)).collect();
        let offsets = (0..local)
            .map(|mut l| {
                let mut off = 0;
                for i in (0..k).rev() {
                    off += (l % d) * wire_strides[i];
                    l /= d;
                }
                off
            })
            .collect();
        GateLayout { offsets, wire_strides, d, total: d.pow(n as u32) }
    }

    /// Indices whose dits on the gate wires are all zero.
    fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.total).filter(move |&i| self.wire_strides.iter().all(|&s| (i / s) % self.d == 0))
    }
}

/// Amplitudes over `[d]^n` in big-endian order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    d: usize,
    n: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The computational basis state `|x⟩`.
    pub fn basis(d: usize, x: &[usize]) -> Result<Self> {
        let n = x.len();
        let dim = checked_dim(d, n)?;
        let mut amps = vec![ZERO; dim];
        amps[ditstring_index(x, d)?] = ONE;
        Ok(StateVector { d, n, amps })
    }

    pub fn from_amplitudes(d: usize, n: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = checked_dim(d, n)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
        }
        Ok(StateVector { d, n, amps })
    }

    /// Tensor product of single-qudit states, wire 0 first.
    pub fn product(d: usize, factors: &[Vec<C64>]) -> Result<Self> {
        let n = factors.len();
        checked_dim(d, n)?;
        let mut amps = vec![ONE];
        for f in factors {
            if f.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: f.len() });
            }
            amps = amps.iter().flat_map(|&a| f.iter().map(move |&b| a * b)).collect();
        }
        Ok(StateVector { d, n, amps })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply_gate(&mut self, gate: &ComplexMatrix, wires: &[usize]) -> Result<()> {
        validate_wires(gate.dim, wires, self.n, self.d)?;
        let layout = GateLayout::new(wires, self.n, self.d);
        let k = gate.dim;
        let mut tmp = vec![ZERO; k];
        for base in layout.bases() {
            for (r, t) in tmp.iter_mut().enumerate() {
                *t = (0..k).map(|s| gate.data[r * k + s] * self.amps[base + layout.offsets[s]]).sum();
            }
            for (r, &t) in tmp.iter().enumerate() {
                self.amps[base + layout.offsets[r]] = t;
            }
        }
        Ok(())
    }
}

fn checked_dim(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::invalid("local dimension must be positive"));
    }
    d.checked_pow(n as u32)
        .filter(|&dim| dim <= ORACLE_CAP)
        .ok_or(Error::OracleCapExceeded { dim: d.saturating_pow(n as u32), cap: ORACLE_CAP })
}

/// Big-endian index of a ditstring.
pub fn ditstring_index(x: &[usize], d: usize) -> Result<usize> {
    x.iter().try_fold(0usize, |acc, &v| {
        if v >= d {
            Err(Error::invalid(format!("dit {v} out of range for d = {d}")))
        } else {
            Ok(acc * d + v)
        }
    })
}

/// Inverse of [`ditstring_index`].
pub fn index_ditstring(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for w in (0..n).rev() {
        out[w] = idx % d;
        idx /= d;
    }
    out
}

fn validate_wires(gate_dim: usize, wires: &[usize], n: usize, d: usize) -> Result<()> {
    for (i, &w) in wires.iter().enumerate() {
        if w >= n {
            return Err(Error::WireOutOfRange { wire: w, n });
        }
        if wires[..i].contains(&w) {
            return Err(Error::DuplicateWire(w));
        }
    }
    let expected = d.pow(wires.len() as u32);
    if gate_dim != expected {
        return Err(Error::DimensionMismatch { expected, found: gate_dim });
    }
    Ok(())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let x = a.data[i * na + j];
            if x == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out.data[(i * nb + k) * n + j * nb + l] = x * b.data[k * nb + l];
                }
            }
        }
    }
    out
}

/// `m^{⊗count}`; the 1×1 identity when `count == 0`.
pub fn kron_power(m: &ComplexMatrix, count: usize) -> ComplexMatrix {
    (0..count).fold(ComplexMatrix::identity(1), |acc, _| kron(&acc, m))
}

/// The `d^n × d^n` operator applying `gate` to `wires` (in the listed order) and identity elsewhere.
pub fn embed_gate(gate: &ComplexMatrix, wires: &[usize], n: usize, d: usize) -> Result<ComplexMatrix> {
    validate_wires(gate.dim, wires, n, d)?;
    let dim = checked_dim(d, n)?;
    let mut out = ComplexMatrix::identity(dim);
    out.apply_gate_left(gate, wires, n, d);
    Ok(out)
}

pub fn frob_dist(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

/// Frobenius distance of `m†m` from the identity.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let prod = &m.adjoint() * m;
    frob_dist(&prod, &ComplexMatrix::identity(m.dim)).expect("same dimension")
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    unitarity_residual(m) <= tol
}

/// Lookup of gate matrices by id for [`dense_circuit`].
pub trait GateRegistry {
    fn gate_matrix(&self, id: &str) -> Option<&ComplexMatrix>;
}

impl GateRegistry for BTreeMap<String, ComplexMatrix> {
    fn gate_matrix(&self, id: &str) -> Option<&ComplexMatrix> {
        self.get(id)
    }
}

impl GateRegistry for HashMap<String, ComplexMatrix> {
    fn gate_matrix(&self, id: &str) -> Option<&ComplexMatrix> {
        self.get(id)
    }
}

/// Exact inverse of a gate: the adjoint when unitary, otherwise Gauss-Jordan.
pub fn gate_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if is_unitary(m, 1e-12) {
        Ok(m.adjoint())
    } else {
        m.inverse()
    }
}

/// The operator `U_m ⋯ U_1` of a circuit whose ops are applied in sequence order.
pub fn dense_circuit<R: GateRegistry + ?Sized>(circuit: &Circuit, registry: &R) -> Result<ComplexMatrix> {
    let (n, d) = (circuit.n_wires(), circuit.local_dim());
    let dim = checked_dim(d, n)?;
    let mut out = ComplexMatrix::identity(dim);
    let mut inverses: HashMap<&str, ComplexMatrix> = HashMap::new();
    for op in circuit.ops() {
        let gate = registry.gate_matrix(&op.gate_id).ok_or_else(|| Error::UnknownGate(op.gate_id.clone()))?;
        validate_wires(gate.dim, &op.wires, n, d)?;
        if op.inverse {
            if !inverses.contains_key(op.gate_id.as_str()) {
                inverses.insert(op.gate_id.as_str(), gate_inverse(gate)?);
            }
            out.apply_gate_left(&inverses[op.gate_id.as_str()], &op.wires, n, d);
        } else {
            out.apply_gate_left(gate, &op.wires, n, d);
        }
    }
    Ok(out)
}

/// Applies a circuit to a state vector (the dense oracle for large `n` at one input).
pub fn apply_circuit<R: GateRegistry + ?Sized>(circuit: &Circuit, registry: &R, state: &mut StateVector) -> Result<()> {
    let mut inverses: HashMap<&str, ComplexMatrix> = HashMap::new();
    for op in circuit.ops() {
        let gate = registry.gate_matrix(&op.gate_id).ok_or_else(|| Error::UnknownGate(op.gate_id.clone()))?;
        if op.inverse {
            if !inverses.contains_key(op.gate_id.as_str()) {
                inverses.insert(op.gate_id.as_str(), gate_inverse(gate)?);
            }
            state.apply_gate(&inverses[op.gate_id.as_str()], &op.wires)?;
        } else {
            state.apply_gate(gate, &op.wires)?;
        }
    }
    Ok(())
}

/// Standard single- and two-qubit gates used across tests and the Clifford path.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::from_rows(vec![vec![ZERO, -i], vec![i, ZERO]]).unwrap()
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    pub fn phase() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[ONE, C64::new(0.0, 1.0)])
    }

    /// Control on the first wire, target on the second.
    pub fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use crate::braid::{Circuit, PlacedGate};
    use crate::ybe::swap_operator;

    fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        frob_dist(a, b).unwrap() <= tol
    }

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
        let xi = kron(&pauli_x(), &ComplexMatrix::identity(2));
        assert_eq!(xi[(0, 2)], ONE);
        assert_eq!(xi[(0, 1)], ZERO);
    }

    #[test]
    fn kron_hadamards_on_zero_state_are_uniform() {
        let hh = kron(&hadamard(), &hadamard());
        for i in 0..4 {
            assert!((hh[(i, 0)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_single_and_swap() {
        assert_eq!(embed_gate(&pauli_x(), &[0], 1, 2).unwrap(), pauli_x());
        let t = swap_operator(2);
        assert_eq!(embed_gate(&t, &[1, 0], 2, 2).unwrap(), t);
    }

    #[test]
    fn embed_non_adjacent_cnot_matches_swap_conjugation() {
        // S02 = (I⊗T)(T⊗I)(I⊗T) swaps wires 0 and 2.
        let t = swap_operator(2);
        let id2 = ComplexMatrix::identity(2);
        let (it, ti) = (kron(&id2, &t), kron(&t, &id2));
        let s02 = &(&it * &ti) * &it;
        let expected = &(&s02 * &kron(&cnot(), &id2)) * &s02;
        let got = embed_gate(&cnot(), &[2, 1], 3, 2).unwrap();
        assert!(approx_eq(&got, &expected, 1e-15));

        // control on wire 2, target on wire 0: |x0 x1 x2⟩ ↦ |(x0 ⊕ x2) x1 x2⟩
        let got = embed_gate(&cnot(), &[2, 0], 3, 2).unwrap();
        let mut by_def = ComplexMatrix::zeros(8);
        for col in 0..8 {
            let x = index_ditstring(col, 3, 2);
            let row = ditstring_index(&[x[0] ^ x[2], x[1], x[2]], 2).unwrap();
            by_def[(row, col)] = ONE;
        }
        assert_eq!(got, by_def);
    }

    #[test]
    fn embed_errors() {
        assert_eq!(embed_gate(&pauli_x(), &[3], 2, 2), Err(Error::WireOutOfRange { wire: 3, n: 2 }));
        assert!(matches!(embed_gate(&cnot(), &[0], 2, 2), Err(Error::DimensionMismatch { .. })));
        assert_eq!(embed_gate(&cnot(), &[1, 1], 2, 2), Err(Error::DuplicateWire(1)));
    }

    #[test]
    fn unitarity_and_distance() {
        assert!(is_unitary(&ComplexMatrix::identity(3), 1e-12));
        let a = hadamard();
        assert_eq!(frob_dist(&a, &a).unwrap(), 0.0);
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert!(!is_unitary(&m, 2.9));
        assert!(frob_dist(&a, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn inverse_and_determinant() {
        let m = ComplexMatrix::from_rows(vec![
            vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)],
            vec![C64::new(0.0, -1.0), C64::new(3.0, 0.5)],
        ])
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(approx_eq(&(&m * &inv), &ComplexMatrix::identity(2), 1e-14));
        let det = m.determinant();
        let expected = C64::new(1.0, 1.0) * C64::new(3.0, 0.5) - C64::new(2.0, 0.0) * C64::new(0.0, -1.0);
        assert!((det - expected).norm() < 1e-14);
        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(singular.inverse(), Err(Error::Singular));
    }

    #[test]
    fn dense_circuit_basics() {
        let mut reg = BTreeMap::new();
        reg.insert("T".to_string(), swap_operator(2));
        let empty = Circuit::new(3, 2);
        assert_eq!(dense_circuit(&empty, &reg).unwrap(), ComplexMatrix::identity(8));
        let mut c = Circuit::new(2, 2);
        c.push(PlacedGate::new("T", vec![0, 1], false)).unwrap();
        assert_eq!(dense_circuit(&c, &reg).unwrap(), swap_operator(2));
        let mut bad = Circuit::new(2, 2);
        bad.push(PlacedGate::new("R", vec![0, 1], false)).unwrap();
        assert_eq!(dense_circuit(&bad, &reg), Err(Error::UnknownGate("R".into())));
        assert!(matches!(dense_circuit(&Circuit::new(13, 2), &reg), Err(Error::OracleCapExceeded { .. })));
    }

    #[test]
    fn state_vector_agrees_with_embedded_matrix() {
        let g = kron(&hadamard(), &phase());
        let full = embed_gate(&g, &[2, 0], 3, 2).unwrap();
        let mut s = StateVector::basis(2, &[1, 0, 1]).unwrap();
        s.apply_gate(&g, &[2, 0]).unwrap();
        let col = ditstring_index(&[1, 0, 1], 2).unwrap();
        for i in 0..8 {
            assert!((s.amplitudes()[i] - full[(i, col)]).norm() < 1e-15);
        }
    }

    #[test]
    fn ditstring_index_round_trip() {
        for i in 0..27 {
            assert_eq!(ditstring_index(&index_ditstring(i, 3, 3), 3).unwrap(), i);
        }
        assert_eq!(ditstring_index(&[1, 0, 2], 3).unwrap(), 9 + 2);
    }
}
