//! Unitary Yang-Baxter solutions in conjugated-monomial normal form.
//!
//! Families one to three are returned as [`YbNormalForm`]s,
//! `R = (Q⊗Q)·D·P·(C⊗C)·(Q⊗Q)⁻¹` with `D` a diagonal unitary that already
//! includes the global phase `k`, `P ∈ {I, T}` and `C` a permutation of `[d]`.
//! Family four is not monomial and is returned as an [`R4Gate`] carrying a
//! unitary `Q₁` and the Clifford core `S₄T`.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frob_dist, is_unitary, kron, unitarity_residual, ComplexMatrix, C64, ONE, ZERO};
use crate::perm::Permutation;
use crate::ybe::{check_qybe, swap_operator, TwoQuditGate};

/// Validation tolerance for family constraints and built gates.
pub const BUILD_TOL: f64 = 1e-9;

/// Largest permutation group enumerated by [`check_property_g`].
pub const GROUP_ORDER_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    F1,
    F2,
    F3,
    F4,
}

/// Parameters of the qubit families. `Q = [[a, b], [c, d_entry]]`.
///
/// `c` is only read by family two; the other families derive it as
/// `c = -a·conj(b)/conj(d_entry)`. `r_phase` is the third family-one phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParams {
    pub family: Family,
    pub a: C64,
    pub b: C64,
    pub c: Option<C64>,
    pub d_entry: C64,
    pub p: C64,
    pub q: C64,
    pub r_phase: C64,
    pub k: C64,
}

impl FamilyParams {
    /// Identity `Q`, unit phases.
    pub fn new(family: Family) -> Self {
        FamilyParams { family, a: ONE, b: ZERO, c: None, d_entry: ONE, p: ONE, q: ONE, r_phase: ONE, k: ONE }
    }

    pub fn q_matrix(&self) -> Result<ComplexMatrix> {
        let c = match self.family {
            Family::F2 => self.c.ok_or_else(|| Error::Constraint("family two requires an explicit c".into()))?,
            _ => derived_c(self.a, self.b, self.d_entry)?,
        };
        Ok(q2(self.a, self.b, c, self.d_entry))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapFlag {
    Identity,
    Swap,
}

impl SwapFlag {
    pub fn is_swap(self) -> bool {
        self == SwapFlag::Swap
    }
}

/// `R = (Q⊗Q)·D·P·(C⊗C)·(Q⊗Q)⁻¹`; `diag` holds `D` (global phase included)
/// in big-endian `(i, j)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct YbNormalForm {
    pub d: usize,
    /// Global phase, informational: already folded into `diag`.
    pub k: C64,
    pub q: ComplexMatrix,
    pub diag: Vec<C64>,
    pub swap: SwapFlag,
    pub perm: Permutation,
}

impl YbNormalForm {
    pub fn new(d: usize, k: C64, q: ComplexMatrix, diag: Vec<C64>, swap: SwapFlag, perm: Permutation) -> Result<Self> {
        if q.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: q.dim() });
        }
        if diag.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: diag.len() });
        }
        if perm.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: perm.len() });
        }
        if let Some(z) = diag.iter().find(|z| (z.norm() - 1.0).abs() > BUILD_TOL) {
            return Err(Error::Constraint(format!("diagonal entry {z} is not a unit phase")));
        }
        if q.determinant().norm() <= 1e-12 {
            return Err(Error::Singular);
        }
        Ok(YbNormalForm { d, k, q, diag, swap, perm })
    }

    /// `D·P·(C⊗C)`.
    pub fn monomial_matrix(&self) -> ComplexMatrix {
        let c = self.perm.to_matrix();
        let mut m = kron(&c, &c);
        if self.swap.is_swap() {
            m = &swap_operator(self.d) * &m;
        }
        &ComplexMatrix::from_diagonal(&self.diag) * &m
    }

    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let qq = kron(&self.q, &self.q);
        let qq_inv = qq.inverse()?;
        Ok(&(&qq * &self.monomial_matrix()) * &qq_inv)
    }

    pub fn gate(&self) -> Result<TwoQuditGate> {
        TwoQuditGate::new(self.d, self.reconstruct()?)
    }

    /// Checks unitarity and the Yang-Baxter equation of the reconstructed gate.
    pub fn validate(&self, tol: f64) -> Result<ComplexMatrix> {
        let r = self.reconstruct()?;
        let residual = unitarity_residual(&r);
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        let check = check_qybe(&TwoQuditGate::new(self.d, r.clone())?, tol);
        if !check.holds {
            return Err(Error::Constraint(format!(
                "reconstructed gate fails the Yang-Baxter equation (residual {:.3e})",
                check.residual
            )));
        }
        Ok(r)
    }
}

/// Family-four gate `k·(Q₁⊗Q₁)·S₄T·(Q₁⊗Q₁)†` with `Q₁` unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct R4Gate {
    pub k: C64,
    pub q1: ComplexMatrix,
    pub matrix: ComplexMatrix,
}

impl R4Gate {
    /// Dense form of the Clifford core, identical to [`s4t_matrix`].
    pub fn core_matrix(&self) -> ComplexMatrix {
        s4t_matrix()
    }
}

/// `S₄T = (1/√2)[[1,0,0,1],[0,1,1,0],[0,-1,1,0],[-1,0,0,1]]`.
pub fn s4t_matrix() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, 0.0, 0.0, s], &[0.0, s, s, 0.0], &[0.0, -s, s, 0.0], &[-s, 0.0, 0.0, s]])
        .unwrap()
}

fn q2(a: C64, b: C64, c: C64, d: C64) -> ComplexMatrix {
    ComplexMatrix::from_rows(vec![vec![a, b], vec![c, d]]).expect("2x2")
}

/// `c = -a·conj(b)/conj(d_entry)`.
pub fn derived_c(a: C64, b: C64, d_entry: C64) -> Result<C64> {
    if d_entry.norm() <= 1e-12 {
        return Err(Error::Constraint("d_entry must be nonzero".into()));
    }
    Ok(-a * b.conj() / d_entry.conj())
}

fn check_unit(name: &str, z: C64) -> Result<()> {
    if (z.norm() - 1.0).abs() > BUILD_TOL {
        return Err(Error::Constraint(format!("{name}-modulus: |{name}| = {} but must be 1", z.norm())));
    }
    Ok(())
}

fn check_invertible(q: &ComplexMatrix) -> Result<()> {
    if q.determinant().norm() <= 1e-12 {
        return Err(Error::Singular);
    }
    Ok(())
}

/// Family one: `C = I`, `P = T`, `D = k·diag(1, p, q, r_phase)`.
pub fn build_r1(params: &FamilyParams) -> Result<YbNormalForm> {
    check_unit("k", params.k)?;
    check_unit("p", params.p)?;
    check_unit("q", params.q)?;
    check_unit("r_phase", params.r_phase)?;
    let c = derived_c(params.a, params.b, params.d_entry)?;
    let q = q2(params.a, params.b, c, params.d_entry);
    check_invertible(&q)?;
    let k = params.k;
    let diag = vec![k, k * params.p, k * params.q, k * params.r_phase];
    let nf = YbNormalForm::new(2, k, q, diag, SwapFlag::Swap, Permutation::identity(2))?;
    nf.validate(BUILD_TOL)?;
    Ok(nf)
}

/// The family-two phase `p` from `Q`; `q = 1/p`.
pub fn family_two_p(a: C64, b: C64, c: C64, d: C64) -> Result<C64> {
    let scale = [a, b, c, d].iter().map(|z| z.norm_sqr()).sum::<f64>();
    let cross = a * b.conj() + c * d.conj();
    if cross.norm() <= BUILD_TOL * scale {
        return Err(Error::DegenerateDenominator("a·conj(b) + c·conj(d_entry) = 0".into()));
    }
    let col0 = a.norm_sqr() + c.norm_sqr();
    if col0 <= 1e-12 * scale {
        return Err(Error::DegenerateDenominator("|a|² + |c|² = 0".into()));
    }
    let p = C64::new(b.norm_sqr() + d.norm_sqr(), 0.0) * cross.conj() / (col0 * cross);
    if p.norm() <= 1e-12 {
        return Err(Error::DegenerateDenominator("p = 0".into()));
    }
    Ok(p)
}

/// Closed-form eigendecomposition of a 2×2 unitary: `W = U·diag(λ)·U†`.
/// Returns `(U, [λ₀, λ₁])`; a scalar `W` yields `U = I`.
pub fn eigen_unitary_2x2(w: &ComplexMatrix) -> (ComplexMatrix, [C64; 2]) {
    let (w00, w01, w10, w11) = (w[(0, 0)], w[(0, 1)], w[(1, 0)], w[(1, 1)]);
    let half_tr = (w00 + w11) * 0.5;
    let det = w00 * w11 - w01 * w10;
    let disc = (half_tr * half_tr - det).sqrt();
    let (l0, l1) = (half_tr + disc, half_tr - disc);
    if (l0 - l1).norm() <= 1e-9 {
        return (ComplexMatrix::identity(2), [half_tr, half_tr]);
    }
    let cand_a = [w01, l0 - w00];
    let cand_b = [l0 - w11, w10];
    let norm = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = if norm(&cand_a) >= norm(&cand_b) { cand_a } else { cand_b };
    let nv = norm(&v);
    let u0 = [v[0] / nv, v[1] / nv];
    let u1 = [-u0[1].conj(), u0[0].conj()];
    let u = ComplexMatrix::from_rows(vec![vec![u0[0], u1[0]], vec![u0[1], u1[1]]]).expect("2x2");
    let rq = |x: &[C64; 2]| {
        let wx = [w00 * x[0] + w01 * x[1], w10 * x[0] + w11 * x[1]];
        x[0].conj() * wx[0] + x[1].conj() * wx[1]
    };
    (u, [rq(&u0), rq(&u1)])
}

/// Family two: `S₂ = M⊗M`, rewritten as `(U⊗U)·k(V⊗V)·T·(U⊗U)⁻¹` from the
/// spectral decomposition `Q·M·Q⁻¹ = U·V·U⁻¹`.
pub fn build_r2(params: &FamilyParams) -> Result<YbNormalForm> {
    check_unit("k", params.k)?;
    let c = params.c.ok_or_else(|| Error::Constraint("family two requires an explicit c".into()))?;
    let (a, b, d) = (params.a, params.b, params.d_entry);
    let q = q2(a, b, c, d);
    check_invertible(&q)?;
    let p = family_two_p(a, b, c, d)?;
    let sp = p.sqrt();
    let m = ComplexMatrix::from_rows(vec![vec![ZERO, sp], vec![sp.inv(), ZERO]])?;
    let s2 = family_two_s(p);
    let mm_err = frob_dist(&kron(&m, &m), &s2)?;
    if mm_err > 1e-12 * s2.frobenius_norm() {
        return Err(Error::Constraint(format!("M⊗M differs from S₂ by {mm_err:.3e}")));
    }
    let w = &(&q * &m) * &q.inverse()?;
    let residual = unitarity_residual(&w);
    if residual > BUILD_TOL {
        return Err(Error::NotUnitary { residual });
    }
    let (u, lambdas) = eigen_unitary_2x2(&w);
    let k = params.k;
    let diag = vec![
        k * lambdas[0] * lambdas[0],
        k * lambdas[0] * lambdas[1],
        k * lambdas[1] * lambdas[0],
        k * lambdas[1] * lambdas[1],
    ];
    let nf = YbNormalForm::new(2, k, u, diag, SwapFlag::Swap, Permutation::identity(2))?;
    nf.validate(BUILD_TOL)?;
    Ok(nf)
}

fn family_two_s(p: C64) -> ComplexMatrix {
    anti_diagonal_s(p, p.inv())
}

/// `[[0,0,0,p],[0,0,1,0],[0,1,0,0],[q,0,0,0]]`, the shape of `S₂` and `S₃`.
fn anti_diagonal_s(p: C64, q: C64) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(4);
    s[(0, 3)] = p;
    s[(1, 2)] = ONE;
    s[(2, 1)] = ONE;
    s[(3, 0)] = q;
    s
}

/// Family three: rescale by `N = diag(p^{-1/4}, p^{1/4})` so that `p = 1`,
/// then factor `S₃' = D·(X⊗X)` to get `C = X`, `P = T`.
pub fn build_r3(params: &FamilyParams) -> Result<YbNormalForm> {
    check_unit("k", params.k)?;
    let (a, b, d) = (params.a, params.b, params.d_entry);
    if a.norm() <= 1e-12 {
        return Err(Error::Constraint("a must be nonzero".into()));
    }
    let c = derived_c(a, b, d)?;
    let ratio = d.norm_sqr() / a.norm_sqr();
    if (params.p.norm() - ratio).abs() > BUILD_TOL * ratio.max(1.0) {
        return Err(Error::Constraint(format!("p-modulus: |p| = {} but |d_entry|²/|a|² = {ratio}", params.p.norm())));
    }
    if (params.q.norm() - ratio.recip()).abs() > BUILD_TOL * ratio.recip().max(1.0) {
        return Err(Error::Constraint(format!(
            "q-modulus: |q| = {} but |a|²/|d_entry|² = {}",
            params.q.norm(),
            ratio.recip()
        )));
    }
    let pq = params.p * params.q;
    if (pq.norm() - 1.0).abs() > BUILD_TOL {
        return Err(Error::Constraint(format!("pq-modulus: |pq| = {}", pq.norm())));
    }
    let q = q2(a, b, c, d);
    check_invertible(&q)?;

    let quarter = params.p.powf(0.25);
    let n = ComplexMatrix::from_diagonal(&[quarter.inv(), quarter]);
    let n_inv = ComplexMatrix::from_diagonal(&[quarter, quarter.inv()]);
    let q_prime = &q * &n_inv;
    let s3 = anti_diagonal_s(params.p, params.q);
    let s3_prime = &(&kron(&n, &n) * &s3) * &kron(&n_inv, &n_inv);
    if (s3_prime[(0, 3)] - ONE).norm() > BUILD_TOL {
        return Err(Error::Constraint(format!("rescaled p = {} is not 1", s3_prime[(0, 3)])));
    }
    if (s3_prime[(3, 0)].norm() - 1.0).abs() > BUILD_TOL {
        return Err(Error::Constraint(format!("rescaled |q| = {} is not 1", s3_prime[(3, 0)].norm())));
    }
    let x = Permutation::transposition(2, 0, 1);
    let xm = x.to_matrix();
    let dm = &s3_prime * &kron(&xm, &xm);
    if !dm.is_diagonal(BUILD_TOL) {
        return Err(Error::Constraint("S₃'(X⊗X) is not diagonal".into()));
    }
    let k = params.k;
    let diag = dm.diagonal().into_iter().map(|z| k * z).collect();
    let nf = YbNormalForm::new(2, k, q_prime, diag, SwapFlag::Swap, x)?;
    nf.validate(BUILD_TOL)?;
    Ok(nf)
}

/// Family four: `Q` is a scaled unitary, `Q₁ = Q/(|a|²+|b|²)^{1/2}`.
pub fn build_r4(params: &FamilyParams) -> Result<R4Gate> {
    check_unit("k", params.k)?;
    let (a, b, d) = (params.a, params.b, params.d_entry);
    if (a.norm() - d.norm()).abs() > BUILD_TOL * d.norm().max(1.0) {
        return Err(Error::Constraint(format!("a-modulus: |a| = {} but |d_entry| = {}", a.norm(), d.norm())));
    }
    let c = derived_c(a, b, d)?;
    let q = q2(a, b, c, d);
    check_invertible(&q)?;
    let alpha = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let q1 = q.scale(C64::new(alpha.recip(), 0.0));
    let residual = unitarity_residual(&q1);
    if residual > 1e-10 {
        return Err(Error::NotUnitary { residual });
    }
    let qq = kron(&q1, &q1);
    let matrix = (&(&qq * &s4t_matrix()) * &qq.adjoint()).scale(params.k);
    let check = check_qybe(&TwoQuditGate::new(2, matrix.clone())?, BUILD_TOL);
    if !check.holds {
        return Err(Error::Constraint(format!(
            "family-four gate fails the Yang-Baxter equation (residual {:.3e})",
            check.residual
        )));
    }
    Ok(R4Gate { k: params.k, q1, matrix })
}

/// `k·(Q⊗Q)·S_j·T·(Q⊗Q)⁻¹` assembled directly from the family's `S_j`,
/// without any normal-form rewriting.
pub fn direct_family_matrix(params: &FamilyParams) -> Result<ComplexMatrix> {
    let q = params.q_matrix()?;
    let s = match params.family {
        Family::F1 => ComplexMatrix::from_diagonal(&[ONE, params.p, params.q, params.r_phase]),
        Family::F2 => {
            let c = params.c.expect("checked by q_matrix");
            family_two_s(family_two_p(params.a, params.b, c, params.d_entry)?)
        }
        Family::F3 => anti_diagonal_s(params.p, params.q),
        Family::F4 => &s4t_matrix() * &swap_operator(2),
    };
    let qq = kron(&q, &q);
    Ok((&(&(&qq * &s) * &swap_operator(2)) * &qq.inverse()?).scale(params.k))
}

/// A built family member: monomial normal form or family-four Clifford record.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyGate {
    NormalForm(YbNormalForm),
    Clifford(R4Gate),
}

impl FamilyGate {
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        match self {
            FamilyGate::NormalForm(nf) => nf.reconstruct(),
            FamilyGate::Clifford(r4) => Ok(r4.matrix.clone()),
        }
    }
}

pub fn build_family(params: &FamilyParams) -> Result<FamilyGate> {
    Ok(match params.family {
        Family::F1 => FamilyGate::NormalForm(build_r1(params)?),
        Family::F2 => FamilyGate::NormalForm(build_r2(params)?),
        Family::F3 => FamilyGate::NormalForm(build_r3(params)?),
        Family::F4 => FamilyGate::Clifford(build_r4(params)?),
    })
}

pub type Magnitudes = Vec<Vec<f64>>;

/// Entrywise magnitudes `A = |Q|`, `B = |Q⁻¹|`.
pub fn magnitude_matrices(q: &ComplexMatrix) -> Result<(Magnitudes, Magnitudes)> {
    let inv = q.inverse()?;
    let abs = |m: &ComplexMatrix| (0..m.dim()).map(|i| m.row(i).iter().map(|z| z.norm()).collect()).collect();
    Ok((abs(q), abs(&inv)))
}

/// `Σ_j A[k][π j]·B[j][l]` (0-indexed).
pub fn property_g_sum(a: &[Vec<f64>], b: &[Vec<f64>], pi: &Permutation, k: usize, l: usize) -> f64 {
    (0..a.len()).map(|j| a[k][pi.apply(j)] * b[j][l]).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyGReport {
    pub group_order: usize,
    pub max_sum: f64,
    /// `(π, k, l)` attaining `max_sum`, 0-indexed.
    pub witness: (Permutation, usize, usize),
    pub holds: bool,
}

/// Breadth-first closure of the group generated by `generators` on `[d]`.
pub fn generate_group(d: usize, generators: &[Permutation], cap: usize) -> Result<Vec<Permutation>> {
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: g.len() });
    }
    let id = Permutation::identity(d);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for h in generators {
            let next = h.compose(&g);
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(Error::GroupOrderCap { cap });
                }
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

/// Maximises `Σ_j |Q|_{k,πj}·|Q⁻¹|_{jl}` over `π ∈ ⟨generators⟩` and all `k, l`.
pub fn check_property_g(q: &ComplexMatrix, generators: &[Permutation], tol: f64) -> Result<PropertyGReport> {
    let d = q.dim();
    let (a, b) = magnitude_matrices(q)?;
    let group = generate_group(d, generators, GROUP_ORDER_CAP)?;
    let mut best = (f64::NEG_INFINITY, (Permutation::identity(d), 0, 0));
    for pi in &group {
        for k in 0..d {
            for l in 0..d {
                let s = property_g_sum(&a, &b, pi, k, l);
                if s > best.0 {
                    best = (s, (pi.clone(), k, l));
                }
            }
        }
    }
    Ok(PropertyGReport { group_order: group.len(), max_sum: best.0, witness: best.1, holds: best.0 <= 1.0 + tol })
}

/// A solution that is a monomial gate up to a change of basis, with both forms.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialSolution {
    pub gate: TwoQuditGate,
    pub normal_form: YbNormalForm,
}

/// `S·T` with `S = diag(λ)` in lexicographic `(i, j)` order.
pub fn build_diagonal_solution(lambdas: &[Vec<C64>]) -> Result<MonomialSolution> {
    let d = lambdas.len();
    if d == 0 {
        return Err(Error::invalid("lambdas must be a non-empty d×d array"));
    }
    let mut diag = Vec::with_capacity(d * d);
    for row in lambdas {
        if row.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: row.len() });
        }
        for &z in row {
            if (z.norm() - 1.0).abs() > BUILD_TOL {
                return Err(Error::Constraint(format!("lambda-modulus: |{z}| = {} but must be 1", z.norm())));
            }
            diag.push(z);
        }
    }
    let matrix = &ComplexMatrix::from_diagonal(&diag) * &swap_operator(d);
    let normal_form =
        YbNormalForm::new(d, ONE, ComplexMatrix::identity(d), diag, SwapFlag::Swap, Permutation::identity(d))?;
    normal_form.validate(BUILD_TOL)?;
    Ok(MonomialSolution { gate: TwoQuditGate::new(d, matrix)?, normal_form })
}

/// `T·(A⊗B)` for commuting unitaries, with a simultaneous eigenbasis `Q`:
/// `T(A⊗B) = (Q⊗Q)·(D_B⊗D_A)·T·(Q⊗Q)⁻¹`.
pub fn build_commuting_swap_solution(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<MonomialSolution> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
    }
    for m in [a, b] {
        let residual = unitarity_residual(m);
        if residual > BUILD_TOL {
            return Err(Error::NotUnitary { residual });
        }
    }
    let norm = (a * b).sub(&(b * a))?.frobenius_norm();
    if norm > tol {
        return Err(Error::NonCommuting { norm });
    }
    let matrix = &swap_operator(d) * &kron(a, b);
    let q = simultaneous_eigenbasis(a, b)?;
    let qa = &(&q.adjoint() * a) * &q;
    let qb = &(&q.adjoint() * b) * &q;
    let diag =
        kron(&ComplexMatrix::from_diagonal(&qb.diagonal()), &ComplexMatrix::from_diagonal(&qa.diagonal())).diagonal();
    let normal_form = YbNormalForm::new(d, ONE, q, diag, SwapFlag::Swap, Permutation::identity(d))?;
    let rebuilt = normal_form.validate(BUILD_TOL)?;
    let err = frob_dist(&rebuilt, &matrix)?;
    if err > BUILD_TOL {
        return Err(Error::Constraint(format!("normal form differs from T(A⊗B) by {err:.3e}")));
    }
    Ok(MonomialSolution { gate: TwoQuditGate::new(d, matrix)?, normal_form })
}

/// Unitary `Q` with `Q†AQ` and `Q†BQ` diagonal, for commuting normal `A`, `B`.
///
/// Diagonalises a generic Hermitian combination of the Hermitian and
/// anti-Hermitian parts of `A` and `B`; its eigenspaces are joint eigenspaces.
fn simultaneous_eigenbasis(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = a.dim();
    let i = C64::new(0.0, 1.0);
    const WEIGHTS: [[f64; 3]; 3] = [
        [0.618_033_988_7, 0.414_213_562_4, 0.732_050_807_6],
        [1.324_717_957_2, 0.236_067_977_5, 0.577_215_664_9],
        [0.302_775_637_7, 1.131_370_849_9, 0.645_751_311_1],
    ];
    for [t1, t2, t3] in WEIGHTS {
        let h = DMatrix::from_fn(d, d, |r, c| {
            let (arc, acr) = (a[(r, c)], a[(c, r)].conj());
            let (brc, bcr) = (b[(r, c)], b[(c, r)].conj());
            (arc + acr) + i * t1 * (arc - acr) + t2 * (brc + bcr) + i * t3 * (brc - bcr)
        });
        let eig = h.symmetric_eigen();
        let z = ComplexMatrix::from_rows((0..d).map(|r| (0..d).map(|c| eig.eigenvectors[(r, c)]).collect()).collect())?;
        if !is_unitary(&z, 1e-9) {
            continue;
        }
        let za = &(&z.adjoint() * a) * &z;
        let zb = &(&z.adjoint() * b) * &z;
        if za.is_diagonal(1e-9) && zb.is_diagonal(1e-9) {
            return Ok(z);
        }
    }
    Err(Error::Constraint("failed to find a simultaneous eigenbasis".into()))
}
