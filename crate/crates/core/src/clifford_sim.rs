//! Exact expectation values for circuits of family-four gates.
//!
//! Every family-four gate is `k·(Q₁⊗Q₁)·S₄T·(Q₁⊗Q₁)†` with a shared unitary
//! `Q₁` and the Clifford `S₄T`, so a circuit is `Q₁^{⊗n}·V·Q₁^{†⊗n}` with `V`
//! Clifford. Expanding the observable over Paulis and pushing each term
//! through `V` leaves a product of single-qubit matrix elements.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::braid::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{
    apply_circuit, embed_gate, frob_dist, gates, kron_power, ComplexMatrix, StateVector, C64, ONE, ORACLE_CAP, ZERO,
};
use crate::solutions::R4Gate;

/// Largest observable support.
pub const MAX_OBSERVABLE_QUBITS: usize = 12;

const I_POWERS: [C64; 4] = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];

/// `i^phase · Π_j X_j^{x_j} Z_j^{z_j}`, each factor written `X` before `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliElement {
    pub phase: u8,
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl PauliElement {
    pub fn identity(n: usize) -> Self {
        PauliElement { phase: 0, x: vec![false; n], z: vec![false; n] }
    }

    pub fn new(phase: u8, x: Vec<bool>, z: Vec<bool>) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: z.len() });
        }
        Ok(PauliElement { phase: phase % 4, x, z })
    }

    /// `X`, `Y` or `Z` on one wire; `Y = i·XZ`.
    pub fn single(n: usize, wire: usize, kind: char) -> Result<Self> {
        if wire >= n {
            return Err(Error::WireOutOfRange { wire, n });
        }
        let mut p = Self::identity(n);
        match kind.to_ascii_uppercase() {
            'X' => p.x[wire] = true,
            'Z' => p.z[wire] = true,
            'Y' => {
                p.x[wire] = true;
                p.z[wire] = true;
                p.phase = 1;
            }
            'I' => {}
            other => return Err(Error::invalid(format!("unknown Pauli `{other}`"))),
        }
        Ok(p)
    }

    /// Parses strings like `"-iXIZY"`; wire 0 is leftmost.
    pub fn parse(text: &str) -> Result<Self> {
        let (phase, body) = match text {
            t if t.starts_with("-i") => (3, &t[2..]),
            t if t.starts_with("+i") => (1, &t[2..]),
            t if t.starts_with('i') => (1, &t[1..]),
            t if t.starts_with('-') => (2, &t[1..]),
            t if t.starts_with('+') => (0, &t[1..]),
            t => (0, t),
        };
        let n = body.chars().count();
        let mut p = Self::identity(n);
        for (j, ch) in body.chars().enumerate() {
            let s = Self::single(n, j, ch).map_err(|_| Error::Parse { pos: j, msg: format!("unexpected `{ch}`") })?;
            p = p.mul(&s);
        }
        p.phase = (p.phase + phase) % 4;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }

    pub fn coefficient(&self) -> C64 {
        I_POWERS[self.phase as usize]
    }

    /// `self · other`, using `Z X = -X Z` on each wire.
    pub fn mul(&self, other: &PauliElement) -> PauliElement {
        assert_eq!(self.n(), other.n(), "Pauli length mismatch");
        let flips = self.z.iter().zip(&other.x).filter(|(&z, &x)| z && x).count();
        PauliElement {
            phase: ((self.phase as usize + other.phase as usize + 2 * flips) % 4) as u8,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.n();
        let dim = 1usize << n;
        let (xm, zm) = (bits_to_mask(&self.x), bits_to_mask(&self.z));
        let mut m = ComplexMatrix::zeros(dim);
        for b in 0..dim {
            let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ xm, b)] = self.coefficient() * sign;
        }
        m
    }

    /// Copy of `self` on `n` wires with factor `j` placed on `wires[j]`.
    pub fn embed(&self, wires: &[usize], n: usize) -> Result<PauliElement> {
        if wires.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: wires.len() });
        }
        let mut out = Self::identity(n);
        out.phase = self.phase;
        for (j, &w) in wires.iter().enumerate() {
            if w >= n {
                return Err(Error::WireOutOfRange { wire: w, n });
            }
            out.x[w] = self.x[j];
            out.z[w] = self.z[j];
        }
        Ok(out)
    }
}

impl fmt::Display for PauliElement {
    /// Hermitian letters (`Y` for `iXZ`) with the leftover phase as a prefix.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ys = self.x.iter().zip(&self.z).filter(|(&x, &z)| x && z).count();
        let phase = (self.phase as usize + 4 - ys % 4) % 4;
        f.write_str(["", "i", "-", "-i"][phase])?;
        for (&x, &z) in self.x.iter().zip(&self.z) {
            f.write_str(match (x, z) {
                (false, false) => "I",
                (true, false) => "X",
                (false, true) => "Z",
                (true, true) => "Y",
            })?;
        }
        Ok(())
    }
}

/// Big-endian: wire 0 is the most significant bit.
fn bits_to_mask(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordKind {
    H,
    P,
    Cnot,
    X,
    Y,
    Z,
}

/// A Clifford generator. For `Cnot`, `wires = [control, target]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordGate {
    pub kind: CliffordKind,
    pub wires: Vec<usize>,
}

impl CliffordGate {
    pub fn single(kind: CliffordKind, wire: usize) -> Self {
        CliffordGate { kind, wires: vec![wire] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        CliffordGate { kind: CliffordKind::Cnot, wires: vec![control, target] }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self.kind {
            CliffordKind::H => gates::hadamard(),
            CliffordKind::P => gates::phase(),
            CliffordKind::Cnot => gates::cnot(),
            CliffordKind::X => gates::pauli_x(),
            CliffordKind::Y => gates::pauli_y(),
            CliffordKind::Z => gates::pauli_z(),
        }
    }

    /// Inverse as generators: `P⁻¹ = P³`, the rest are involutions.
    pub fn inverse(&self) -> Vec<CliffordGate> {
        match self.kind {
            CliffordKind::P => vec![self.clone(); 3],
            _ => vec![self.clone()],
        }
    }

    fn relabel(&self, map: &[usize]) -> CliffordGate {
        CliffordGate { kind: self.kind, wires: self.wires.iter().map(|&w| map[w]).collect() }
    }

    /// `g†·σ·g`, updated in place on the gate's wires.
    pub fn conjugate(&self, sigma: &mut PauliElement) {
        // (phase, x, z) of g†Xg and g†Zg for single-qubit gates
        let single = |kind| -> [(u8, bool, bool); 2] {
            match kind {
                CliffordKind::H => [(0, false, true), (0, true, false)],
                CliffordKind::P => [(3, true, true), (0, false, true)],
                CliffordKind::X => [(0, true, false), (2, false, true)],
                CliffordKind::Y => [(2, true, false), (2, false, true)],
                CliffordKind::Z => [(2, true, false), (0, false, true)],
                CliffordKind::Cnot => unreachable!(),
            }
        };
        match self.kind {
            CliffordKind::Cnot => {
                let (c, t) = (self.wires[0], self.wires[1]);
                // X_c → X_c X_t and Z_t → Z_c Z_t; both images keep X-before-Z order, no phase
                if sigma.x[c] {
                    sigma.x[t] ^= true;
                }
                if sigma.z[t] {
                    sigma.z[c] ^= true;
                }
            }
            kind => {
                let w = self.wires[0];
                let [img_x, img_z] = single(kind);
                let (xb, zb) = (sigma.x[w], sigma.z[w]);
                let mut phase = sigma.phase as usize;
                let (mut nx, mut nz) = (false, false);
                for (on, (ph, ix, iz)) in [(xb, img_x), (zb, img_z)] {
                    if on {
                        // (X^nx Z^nz)(X^ix Z^iz) = (-1)^{nz·ix} X^{nx⊕ix} Z^{nz⊕iz}
                        phase += ph as usize + if nz && ix { 2 } else { 0 };
                        nx ^= ix;
                        nz ^= iz;
                    }
                }
                sigma.x[w] = nx;
                sigma.z[w] = nz;
                sigma.phase = (phase % 4) as u8;
            }
        }
    }
}

/// Gates applied left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<CliffordGate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        CliffordCircuit { n, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: CliffordGate) -> Result<()> {
        let arity = if gate.kind == CliffordKind::Cnot { 2 } else { 1 };
        if gate.wires.len() != arity {
            return Err(Error::DimensionMismatch { expected: arity, found: gate.wires.len() });
        }
        for (i, &w) in gate.wires.iter().enumerate() {
            if w >= self.n {
                return Err(Error::WireOutOfRange { wire: w, n: self.n });
            }
            if gate.wires[..i].contains(&w) {
                return Err(Error::DuplicateWire(w));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn inverse(&self) -> CliffordCircuit {
        CliffordCircuit { n: self.n, gates: self.gates.iter().rev().flat_map(CliffordGate::inverse).collect() }
    }

    pub fn concat(&self, other: &CliffordCircuit) -> Result<CliffordCircuit> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(CliffordCircuit { n: self.n, gates: self.gates.iter().chain(&other.gates).cloned().collect() })
    }

    /// Appends `sub` with its wire `j` mapped to `wires[j]`.
    pub fn append_mapped(&mut self, sub: &CliffordCircuit, wires: &[usize]) -> Result<()> {
        if wires.len() != sub.n {
            return Err(Error::DimensionMismatch { expected: sub.n, found: wires.len() });
        }
        for g in &sub.gates {
            self.push(g.relabel(wires))?;
        }
        Ok(())
    }

    /// `g_m ⋯ g_1` as a dense matrix, subject to the oracle cap.
    pub fn dense(&self) -> Result<ComplexMatrix> {
        let dim = 2usize.saturating_pow(self.n as u32);
        if dim > ORACLE_CAP {
            return Err(Error::OracleCapExceeded { dim, cap: ORACLE_CAP });
        }
        let mut out = ComplexMatrix::identity(dim);
        for g in &self.gates {
            out = &embed_gate(&g.matrix(), &g.wires, self.n, 2)? * &out;
        }
        Ok(out)
    }
}

/// `V†·σ·V`: conjugate by the last gate first.
pub fn conjugate_pauli(circuit: &CliffordCircuit, sigma: &PauliElement) -> Result<PauliElement> {
    if sigma.n() != circuit.n {
        return Err(Error::DimensionMismatch { expected: circuit.n, found: sigma.n() });
    }
    let mut out = sigma.clone();
    for g in circuit.gates.iter().rev() {
        g.conjugate(&mut out);
    }
    Ok(out)
}

/// `S₄T` on two qubits: `Z⊗Z`, `CNOT(0→1)`, `X⊗Z`, `H` on wire 0, `CNOT(0→1)`.
pub fn s4t_clifford() -> CliffordCircuit {
    use CliffordKind::*;
    let mut c = CliffordCircuit::new(2);
    let gates = [
        CliffordGate::single(Z, 0),
        CliffordGate::single(Z, 1),
        CliffordGate::cnot(0, 1),
        CliffordGate::single(X, 0),
        CliffordGate::single(Z, 1),
        CliffordGate::single(H, 0),
        CliffordGate::cnot(0, 1),
    ];
    for g in gates {
        c.push(g).expect("two-qubit circuit");
    }
    c
}

/// Hermitian matrix on an ordered list of distinct qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    wires: Vec<usize>,
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(wires: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let m = wires.len();
        if m > MAX_OBSERVABLE_QUBITS {
            return Err(Error::ObservableTooLarge { m, cap: MAX_OBSERVABLE_QUBITS });
        }
        for (i, w) in wires.iter().enumerate() {
            if wires[..i].contains(w) {
                return Err(Error::DuplicateWire(*w));
            }
        }
        if matrix.dim() != 1 << m {
            return Err(Error::DimensionMismatch { expected: 1 << m, found: matrix.dim() });
        }
        let residual = frob_dist(&matrix, &matrix.adjoint())?;
        if residual > 1e-10 {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Observable { wires, matrix })
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.wires.len()
    }

    /// `a·self + b·other` on the same wires.
    pub fn combine(&self, a: f64, other: &Observable, b: f64) -> Result<Observable> {
        if self.wires != other.wires {
            return Err(Error::invalid("observables act on different wires"));
        }
        let m = self.matrix.scale(C64::new(a, 0.0)).add(&other.matrix.scale(C64::new(b, 0.0)))?;
        Observable::new(self.wires.clone(), m)
    }
}

/// `α_σ = Tr(σ M)/2^m` over Hermitian Paulis `σ = i^{x·z} X^x Z^z`, zero terms dropped.
pub fn pauli_expand(obs: &Observable) -> Vec<(PauliElement, f64)> {
    pauli_expand_matrix(&obs.matrix, obs.m())
}

fn pauli_expand_matrix(m: &ComplexMatrix, qubits: usize) -> Vec<(PauliElement, f64)> {
    let dim = 1usize << qubits;
    let norm = dim as f64;
    let mut terms = Vec::new();
    let mut v = vec![ZERO; dim];
    for xm in 0..dim {
        // v[c] = M[c][c⊕x]; Tr(X^x Z^z M) = Σ_c (-1)^{z·c} M[c][c⊕x]
        for (c, vc) in v.iter_mut().enumerate() {
            *vc = m[(c, c ^ xm)];
        }
        walsh_hadamard(&mut v);
        for (zm, &w) in v.iter().enumerate() {
            let k = (xm & zm).count_ones() as usize % 4;
            let alpha = (I_POWERS[k] * w).re / norm;
            if alpha != 0.0 {
                let bits = |mask: usize| (0..qubits).map(|j| mask >> (qubits - 1 - j) & 1 == 1).collect();
                terms.push((PauliElement { phase: k as u8, x: bits(xm), z: bits(zm) }, alpha));
            }
        }
    }
    terms
}

/// In-place `w[z] = Σ_c (-1)^{popcount(z & c)} v[c]`.
fn walsh_hadamard(v: &mut [C64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, t) = (*a + *b, *a - *b);
                *a = s;
                *b = t;
            }
        }
        h *= 2;
    }
}

/// `Σ α_σ σ`, for checking expansions.
pub fn pauli_sum_matrix(terms: &[(PauliElement, f64)], qubits: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(1 << qubits);
    for (p, a) in terms {
        out = out.add(&p.matrix().scale(C64::new(*a, 0.0))).expect("same dimension");
    }
    out
}

/// One (unnormalised) qubit state per wire.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    factors: Vec<[C64; 2]>,
}

impl ProductState {
    pub fn new(factors: Vec<[C64; 2]>) -> Result<Self> {
        if let Some(j) = factors.iter().position(|f| f[0].norm() == 0.0 && f[1].norm() == 0.0) {
            return Err(Error::invalid(format!("qubit {j} has a zero amplitude pair")));
        }
        if factors.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ProductState { factors })
    }

    /// `|x⟩` for a bit string.
    pub fn basis(bits: &[usize]) -> Result<Self> {
        Self::new(
            bits.iter()
                .map(|&b| match b {
                    0 => Ok([ONE, ZERO]),
                    1 => Ok([ZERO, ONE]),
                    _ => Err(Error::invalid(format!("bit {b} out of range"))),
                })
                .collect::<Result<_>>()?,
        )
    }

    pub fn factors(&self) -> &[[C64; 2]] {
        &self.factors
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        self.factors.iter().all(|f| (f[0].norm_sqr() + f[1].norm_sqr() - 1.0).abs() <= tol)
    }

    pub fn to_state_vector(&self) -> Result<StateVector> {
        StateVector::product(2, &self.factors.iter().map(|f| f.to_vec()).collect::<Vec<_>>())
    }
}

/// The shared unitary `Q₁` of the gates a circuit uses.
fn shared_q1(circuit: &Circuit, gates: &BTreeMap<String, R4Gate>) -> Result<ComplexMatrix> {
    let mut q1: Option<&ComplexMatrix> = None;
    for op in circuit.ops() {
        let g = gates.get(&op.gate_id).ok_or_else(|| Error::UnknownGate(op.gate_id.clone()))?;
        match q1 {
            None => q1 = Some(&g.q1),
            Some(q) if frob_dist(q, &g.q1)? > 1e-12 => return Err(Error::MixedQ),
            Some(_) => {}
        }
    }
    Ok(q1.or_else(|| gates.values().next().map(|g| &g.q1)).cloned().unwrap_or_else(|| ComplexMatrix::identity(2)))
}

/// The Clifford `V` with `U = k·Q₁^{⊗n}·V·Q₁^{†⊗n}`; inverse gates become reversed inverse generators.
pub fn clifford_core(circuit: &Circuit) -> Result<CliffordCircuit> {
    if circuit.local_dim() != 2 {
        return Err(Error::NotFamilyFour(format!("local dimension {} is not 2", circuit.local_dim())));
    }
    let s4t = s4t_clifford();
    let s4t_inv = s4t.inverse();
    let mut v = CliffordCircuit::new(circuit.n_wires());
    for op in circuit.ops() {
        v.append_mapped(if op.inverse { &s4t_inv } else { &s4t }, &op.wires)?;
    }
    Ok(v)
}

fn check_inputs(circuit: &Circuit, obs: &Observable, psi: &ProductState, phi: &ProductState) -> Result<usize> {
    let n = circuit.n_wires();
    for s in [psi, phi] {
        if s.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.n() });
        }
    }
    if let Some(&w) = obs.wires.iter().find(|&&w| w >= n) {
        return Err(Error::WireOutOfRange { wire: w, n });
    }
    Ok(n)
}

/// `⟨ψ|U†·(M ⊗ I)·U|φ⟩` for a circuit of family-four gates.
pub fn expectation(
    circuit: &Circuit,
    gates: &BTreeMap<String, R4Gate>,
    obs: &Observable,
    psi: &ProductState,
    phi: &ProductState,
) -> Result<C64> {
    let n = check_inputs(circuit, obs, psi, phi)?;
    let q1 = shared_q1(circuit, gates)?;
    let v = clifford_core(circuit)?;

    // M' = Q₁^{†⊗m}·M·Q₁^{⊗m}
    let qm = kron_power(&q1, obs.m());
    let m_prime = &(&qm.adjoint() * &obs.matrix) * &qm;
    let terms = pauli_expand_matrix(&m_prime, obs.m());

    // elements[j][x][z] = ⟨ψ_j|Q₁·X^x Z^z·Q₁†|φ_j⟩ = (Q₁†ψ_j)†·X^x Z^z·(Q₁†φ_j)
    let q1_adj = q1.adjoint();
    let rotate =
        |f: &[C64; 2]| [q1_adj[(0, 0)] * f[0] + q1_adj[(0, 1)] * f[1], q1_adj[(1, 0)] * f[0] + q1_adj[(1, 1)] * f[1]];
    let elements: Vec<[[C64; 2]; 2]> = psi
        .factors
        .iter()
        .zip(&phi.factors)
        .map(|(p, f)| {
            let (a, b) = (rotate(p), rotate(f));
            let z_b = [b[0], -b[1]];
            let x_of = |v: [C64; 2]| [v[1], v[0]];
            let dot = |u: [C64; 2], w: [C64; 2]| u[0].conj() * w[0] + u[1].conj() * w[1];
            [[dot(a, b), dot(a, z_b)], [dot(a, x_of(b)), dot(a, x_of(z_b))]]
        })
        .collect();

    let values: Vec<C64> = terms
        .par_iter()
        .map(|(sigma, alpha)| -> Result<C64> {
            let image = conjugate_pauli(&v, &sigma.embed(&obs.wires, n)?)?;
            let prod =
                (0..n).fold(image.coefficient(), |acc, j| acc * elements[j][image.x[j] as usize][image.z[j] as usize]);
            Ok(prod * *alpha)
        })
        .collect::<Result<_>>()?;
    // fixed summation order keeps results reproducible across thread counts
    Ok(values.into_iter().sum())
}

/// The same quantity by dense state-vector simulation, within the oracle cap.
pub fn dense_expectation(
    circuit: &Circuit,
    gates: &BTreeMap<String, R4Gate>,
    obs: &Observable,
    psi: &ProductState,
    phi: &ProductState,
) -> Result<C64> {
    check_inputs(circuit, obs, psi, phi)?;
    let registry: BTreeMap<String, ComplexMatrix> = gates.iter().map(|(k, g)| (k.clone(), g.matrix.clone())).collect();
    let mut left = psi.to_state_vector()?;
    let mut right = phi.to_state_vector()?;
    apply_circuit(circuit, &registry, &mut left)?;
    apply_circuit(circuit, &registry, &mut right)?;
    right.apply_gate(&obs.matrix, &obs.wires)?;
    Ok(left.inner(&right))
}
