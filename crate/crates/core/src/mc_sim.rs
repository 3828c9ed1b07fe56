//! Monte Carlo amplitude estimation for circuits over conjugated monomial gates.
//!
//! A circuit over gates `R_i = (Q⊗Q)·S_i·(Q⊗Q)⁻¹` collapses to
//! `Q^{⊗n}·V·(Q⁻¹)^{⊗n}` where `V` only permutes basis states and adds phases:
//!
//! ```text
//! V|y⟩ = e^{iφ(y)} |f_0(y_{π0}) … f_{n-1}(y_{π(n-1)})⟩
//! ```
//!
//! Expanding `⟨x|U|z⟩` over the intermediate basis gives a sum over `y` whose
//! magnitudes factor into a product distribution `P(y) = Π_j P_j(y_j)` with
//! normalisation `ρ`. Averaging `ρ·e^{iθ(y)}` over samples `y ~ P` is an
//! unbiased estimate of the amplitude, and property (G) guarantees `ρ ≤ 1`.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::braid::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{frob_dist, kron, ComplexMatrix, C64, ZERO};
use crate::perm::Permutation;
use crate::solutions::{check_property_g, PropertyGReport, SwapFlag, YbNormalForm};
use crate::ybe::swap_operator;

/// Samples per RNG stream. Stream `c` covers sample indices `[c·CHUNK, (c+1)·CHUNK)`.
pub const SAMPLES_PER_STREAM: usize = 1024;

/// Name of the generator recorded in [`SeedRecord`].
pub const RNG_NAME: &str = "chacha8";

/// Tolerance on property (G): the max sum may exceed 1 by at most this much.
pub const PROPERTY_G_TOL: f64 = 1e-12;

/// `D·P·(C⊗C)` placed on an ordered wire pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialGate {
    pub diag: Vec<C64>,
    pub swap: SwapFlag,
    pub perm: Permutation,
    pub wires: (usize, usize),
}

impl MonomialGate {
    /// Maps local values `(u, v)` on the gate's wires to the output values and
    /// the diagonal index picked up.
    #[inline]
    fn act(&self, u: usize, v: usize, d: usize) -> (usize, usize, usize) {
        let (cu, cv) = (self.perm.apply(u), self.perm.apply(v));
        let (ou, ov) = if self.swap.is_swap() { (cv, cu) } else { (cu, cv) };
        (ou, ov, ou * d + ov)
    }

    pub fn matrix(&self, d: usize) -> ComplexMatrix {
        let c = self.perm.to_matrix();
        let mut m = kron(&c, &c);
        if self.swap.is_swap() {
            m = &swap_operator(d) * &m;
        }
        &ComplexMatrix::from_diagonal(&self.diag) * &m
    }

    /// `(D·P·(C⊗C))⁻¹ = D'·P·(C⁻¹⊗C⁻¹)` with `D'(u,v) = conj(D(P(C⊗C)(u,v)))`.
    pub fn inverse(&self, d: usize) -> MonomialGate {
        let diag = (0..d * d)
            .map(|idx| {
                let (_, _, target) = self.act(idx / d, idx % d, d);
                self.diag[target].conj()
            })
            .collect();
        MonomialGate { diag, swap: self.swap, perm: self.perm.inverse(), wires: self.wires }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialCircuit {
    pub n: usize,
    pub d: usize,
    pub gates: Vec<MonomialGate>,
}

impl MonomialCircuit {
    /// As a placed-gate circuit plus registry, for the dense oracle.
    pub fn to_circuit(&self) -> (Circuit, BTreeMap<String, ComplexMatrix>) {
        let mut circuit = Circuit::new(self.n, self.d);
        let mut registry = BTreeMap::new();
        for (i, g) in self.gates.iter().enumerate() {
            let id = format!("v{i}");
            registry.insert(id.clone(), g.matrix(self.d));
            circuit
                .push(crate::braid::PlacedGate::new(id, vec![g.wires.0, g.wires.1], false))
                .expect("wires validated on expansion");
        }
        (circuit, registry)
    }

    /// Output basis state and accumulated phase `φ(y)` of `V|y⟩`.
    pub fn apply_basis(&self, y: &[usize]) -> (Vec<usize>, f64) {
        let mut vals = y.to_vec();
        let mut phi = 0.0;
        for g in &self.gates {
            let (a, b) = g.wires;
            let (ou, ov, idx) = g.act(vals[a], vals[b], self.d);
            vals[a] = ou;
            vals[b] = ov;
            phi += g.diag[idx].arg();
        }
        (vals, phi)
    }
}

/// `Q^{⊗n}·V·(Q⁻¹)^{⊗n}` split of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedCircuit {
    pub q: ComplexMatrix,
    pub v: MonomialCircuit,
    /// The permutations `C_i` of the gates used, generating `G` for property (G).
    pub generators: Vec<Permutation>,
}

/// Rewrites a circuit over normal-form gates into a shared `Q` and a monomial circuit.
pub fn expand_circuit(circuit: &Circuit, gates: &BTreeMap<String, YbNormalForm>) -> Result<ExpandedCircuit> {
    let (n, d) = (circuit.n_wires(), circuit.local_dim());
    let mut used: BTreeMap<&str, &YbNormalForm> = BTreeMap::new();
    for op in circuit.ops() {
        let nf = gates.get(&op.gate_id).ok_or_else(|| Error::UnknownGate(op.gate_id.clone()))?;
        if nf.d != d {
            return Err(Error::DimensionMismatch { expected: d, found: nf.d });
        }
        if op.wires.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: op.wires.len() });
        }
        used.insert(op.gate_id.as_str(), nf);
    }
    let q = match used.values().next().copied().or_else(|| gates.values().next()) {
        Some(nf) if nf.d == d => nf.q.clone(),
        Some(nf) => return Err(Error::DimensionMismatch { expected: d, found: nf.d }),
        None => ComplexMatrix::identity(d),
    };
    let scale = q.frobenius_norm();
    for nf in used.values() {
        if frob_dist(&nf.q, &q)? > 1e-12 * scale {
            return Err(Error::MixedQ);
        }
    }
    let mut generators: Vec<Permutation> = used.values().map(|nf| nf.perm.clone()).collect();
    generators.sort();
    generators.dedup();

    let mut cache: BTreeMap<(&str, bool), MonomialGate> = BTreeMap::new();
    let mut out = Vec::with_capacity(circuit.len());
    for op in circuit.ops() {
        let base = cache
            .entry((op.gate_id.as_str(), op.inverse))
            .or_insert_with(|| {
                let nf = used[op.gate_id.as_str()];
                let g = MonomialGate { diag: nf.diag.clone(), swap: nf.swap, perm: nf.perm.clone(), wires: (0, 0) };
                if op.inverse {
                    g.inverse(d)
                } else {
                    g
                }
            })
            .clone();
        out.push(MonomialGate { wires: (op.wires[0], op.wires[1]), ..base });
    }
    Ok(ExpandedCircuit { q, v: MonomialCircuit { n, d, gates: out }, generators })
}

/// The `y`-independent part of `V`'s basis action.
///
/// Output wire `j` carries `f[j](y[pi(j)])`; `sigma = pi⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicAction {
    pub pi: Permutation,
    pub f: Vec<Permutation>,
    pub sigma: Permutation,
}

impl SymbolicAction {
    pub fn apply(&self, y: &[usize]) -> Vec<usize> {
        (0..self.f.len()).map(|j| self.f[j].apply(y[self.pi.apply(j)])).collect()
    }
}

/// Propagates wire labels: `C` composes onto both wires' bijections, `P` swaps labels.
pub fn symbolic_action(v: &MonomialCircuit) -> SymbolicAction {
    let mut source: Vec<usize> = (0..v.n).collect();
    let mut f: Vec<Permutation> = vec![Permutation::identity(v.d); v.n];
    for g in &v.gates {
        let (a, b) = g.wires;
        f[a] = g.perm.compose(&f[a]);
        f[b] = g.perm.compose(&f[b]);
        if g.swap.is_swap() {
            source.swap(a, b);
            f.swap(a, b);
        }
    }
    let pi = Permutation::from_images(source).expect("labels stay a bijection");
    let sigma = pi.inverse();
    SymbolicAction { pi, f, sigma }
}

/// Overall phase `φ(y)` from the diagonal factors, accumulated without reduction.
pub fn phase_of(v: &MonomialCircuit, y: &[usize]) -> f64 {
    v.apply_basis(y).1
}

/// Magnitudes and phases of `Q` and `Q⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct QDecomposition {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl QDecomposition {
    pub fn new(q: &ComplexMatrix) -> Result<Self> {
        let inv = q.inverse()?;
        let split = |m: &ComplexMatrix, f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.dim()).map(|i| m.row(i).iter().map(f).collect()).collect()
        };
        Ok(QDecomposition {
            a: split(q, |z| z.norm()),
            b: split(&inv, |z| z.norm()),
            alpha: split(q, |z| z.arg()),
            beta: split(&inv, |z| z.arg()),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

/// `θ(y) = φ(y) + Σ_j α(x_{σj}, f_{σj} y_j) + β(y_j, z_j)`.
pub fn theta(y: &[usize], phi: f64, dec: &QDecomposition, x: &[usize], z: &[usize], action: &SymbolicAction) -> f64 {
    phi + (0..y.len())
        .map(|j| {
            let s = action.sigma.apply(j);
            dec.alpha[x[s]][action.f[s].apply(y[j])] + dec.beta[y[j]][z[j]]
        })
        .sum::<f64>()
}

/// Unnormalised weights `A(x_{σj}, f_{σj} l)·B(l, z_j)` for each coordinate.
fn weights(x: &[usize], z: &[usize], action: &SymbolicAction, dec: &QDecomposition) -> Vec<Vec<f64>> {
    let d = dec.dim();
    (0..x.len())
        .map(|j| {
            let s = action.sigma.apply(j);
            (0..d).map(|l| dec.a[x[s]][action.f[s].apply(l)] * dec.b[l][z[j]]).collect()
        })
        .collect()
}

/// `ρ = Π_j Σ_k A(x_{σj}, f_{σj} k)·B(k, z_j)`.
pub fn normalization_rho(x: &[usize], z: &[usize], action: &SymbolicAction, dec: &QDecomposition) -> f64 {
    weights(x, z, action, dec).iter().map(|w| w.iter().sum::<f64>()).product()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Marginals {
    /// One probability vector over `[d]` per coordinate.
    Product(Vec<Vec<f64>>),
    /// Some coordinate's normaliser vanishes, so every summand and the amplitude are 0.
    CertifiedZero,
}

pub fn marginals(x: &[usize], z: &[usize], action: &SymbolicAction, dec: &QDecomposition) -> Marginals {
    let mut out = Vec::with_capacity(x.len());
    for w in weights(x, z, action, dec) {
        let total: f64 = w.iter().sum();
        if total <= f64::MIN_POSITIVE {
            return Marginals::CertifiedZero;
        }
        out.push(w.into_iter().map(|v| v / total).collect());
    }
    Marginals::Product(out)
}

/// `ceil(3·n·log₂ d)`, at least 1.
pub fn min_coin_bits(n: usize, d: usize) -> u32 {
    ((3.0 * n as f64 * (d as f64).log2()).ceil() as u32).max(1)
}

/// Partition of `[0, 2^m)` into `d` consecutive intervals of sizes
/// `round(P(k)·2^m)`, the last absorbing the remainder.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPartition {
    m: u32,
    sizes: Vec<BigUint>,
    /// Exclusive cumulative upper bounds as big-endian 64-bit limbs.
    upper: Vec<Vec<u64>>,
    limbs: usize,
}

impl IntervalPartition {
    pub fn new(probs: &[f64], m: u32) -> Result<Self> {
        if probs.is_empty() || m == 0 {
            return Err(Error::invalid("need at least one outcome and one coin"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid("probabilities must be finite and nonnegative"));
        }
        let total = BigUint::one() << m;
        let mut remaining = total.clone();
        let mut sizes = Vec::with_capacity(probs.len());
        for &p in &probs[..probs.len() - 1] {
            let s = round_scaled(p, m).min(remaining.clone());
            remaining -= &s;
            sizes.push(s);
        }
        sizes.push(remaining);
        let limbs = (m as usize).div_ceil(64) + usize::from(m.is_multiple_of(64));
        let mut acc = BigUint::zero();
        let upper = sizes
            .iter()
            .map(|s| {
                acc += s;
                to_limbs(&acc, limbs)
            })
            .collect();
        Ok(IntervalPartition { m, sizes, upper, limbs })
    }

    pub fn coin_bits(&self) -> u32 {
        self.m
    }

    /// Exact output distribution `D(k) = size_k / 2^m`.
    pub fn probabilities(&self) -> Vec<f64> {
        let scale = (-(self.m as f64)).exp2();
        self.sizes.iter().map(|s| s.to_f64().unwrap_or(f64::INFINITY) * scale).collect()
    }

    /// Draws `m` fair bits and returns the interval they land in.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R, buf: &mut Vec<u64>) -> usize {
        buf.clear();
        let top_bits = self.m as usize - 64 * (self.limbs - 1);
        for i in 0..self.limbs {
            let w = rng.next_u64();
            buf.push(if i == 0 { mask(w, top_bits) } else { w });
        }
        // first interval whose exclusive upper bound exceeds the draw
        self.upper.partition_point(|u| u.as_slice() <= buf.as_slice()).min(self.upper.len() - 1)
    }
}

fn mask(w: u64, bits: usize) -> u64 {
    if bits >= 64 {
        w
    } else {
        w & ((1u64 << bits) - 1)
    }
}

fn to_limbs(x: &BigUint, limbs: usize) -> Vec<u64> {
    let mut digits = x.to_u64_digits();
    digits.resize(limbs, 0);
    digits.reverse();
    digits
}

/// `round(p·2^m)` computed exactly from the binary expansion of `p`.
fn round_scaled(p: f64, m: u32) -> BigUint {
    if p == 0.0 {
        return BigUint::zero();
    }
    let bits = p.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_field == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_field - 1075) };
    let shift = exp + m as i64;
    if shift >= 0 {
        BigUint::from(mantissa) << (shift as u64)
    } else {
        let s = (-shift) as u32;
        if s > 64 {
            BigUint::zero()
        } else {
            let v = (mantissa as u128 + (1u128 << (s - 1))) >> s;
            BigUint::from(v)
        }
    }
}

/// Independent per-coordinate interval samplers for a product distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSampler {
    parts: Vec<IntervalPartition>,
}

impl ProductSampler {
    /// Rejects `m < ceil(3·n·log₂ d)`.
    pub fn new(marginals: &[Vec<f64>], m: u32) -> Result<Self> {
        let n = marginals.len();
        let d = marginals.first().map_or(1, Vec::len);
        let min = min_coin_bits(n, d);
        if m < min {
            return Err(Error::CoinBitsTooSmall { m, min });
        }
        let parts = marginals.iter().map(|p| IntervalPartition::new(p, m)).collect::<Result<_>>()?;
        Ok(ProductSampler { parts })
    }

    pub fn partitions(&self) -> &[IntervalPartition] {
        &self.parts
    }

    pub fn sample_into<R: RngCore + ?Sized>(&self, rng: &mut R, out: &mut [usize], buf: &mut Vec<u64>) {
        for (o, part) in out.iter_mut().zip(&self.parts) {
            *o = part.sample(rng, buf);
        }
    }
}

/// One draw from `Π_j P_j` with `m` coin bits per coordinate.
pub fn sample_product<R: RngCore + ?Sized>(marginals: &[Vec<f64>], m: u32, rng: &mut R) -> Result<Vec<usize>> {
    let sampler = ProductSampler::new(marginals, m)?;
    let mut out = vec![0; marginals.len()];
    sampler.sample_into(rng, &mut out, &mut Vec::new());
    Ok(out)
}

/// `Pr[|S - μ| ≥ ε] ≤ 4·exp(-N·ε²/(8b²))` for the mean of `N` complex draws bounded by `b`.
pub fn chernoff_bound(n_samples: usize, epsilon: f64, b: f64) -> f64 {
    4.0 * (-(n_samples as f64) * epsilon * epsilon / (8.0 * b * b)).exp()
}

/// `ceil(8n/ε³)`.
pub fn default_sample_count(n: usize, epsilon: f64) -> usize {
    // guard against 8n/ε³ landing a hair above an integer
    (8.0 * n as f64 / epsilon.powi(3) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub rng: String,
    pub seed: u64,
    pub samples_per_stream: usize,
}

impl SeedRecord {
    pub fn new(seed: u64) -> Self {
        SeedRecord { rng: RNG_NAME.to_string(), seed, samples_per_stream: SAMPLES_PER_STREAM }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeEstimate {
    pub value: C64,
    pub n_samples: usize,
    pub epsilon: f64,
    /// `4·exp(-N·ε²/8)`, the probability that `|value - ⟨x|U|z⟩| ≥ ε`.
    pub failure_bound: f64,
    pub rho: f64,
    pub seed: SeedRecord,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub epsilon: f64,
    pub seed: u64,
    /// Overrides `ceil(8n/ε³)`.
    pub n_samples: Option<usize>,
    /// Worker threads; `None` uses the global pool. Output does not depend on it.
    pub threads: Option<usize>,
    /// Overrides `ceil(3·n·log₂ d)` coin bits per coordinate.
    pub coin_bits: Option<u32>,
}

impl EstimateConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        EstimateConfig { epsilon, seed, n_samples: None, threads: None, coin_bits: None }
    }
}

/// A circuit prepared for repeated amplitude queries.
#[derive(Clone, Debug)]
pub struct AmplitudeEstimator {
    expanded: ExpandedCircuit,
    action: SymbolicAction,
    dec: QDecomposition,
    property_g: PropertyGReport,
}

impl AmplitudeEstimator {
    /// Expands the circuit and refuses gate sets whose `Q` fails property (G)
    /// for the group generated by the gates' permutations.
    pub fn new(circuit: &Circuit, gates: &BTreeMap<String, YbNormalForm>) -> Result<Self> {
        let expanded = expand_circuit(circuit, gates)?;
        let property_g = check_property_g(&expanded.q, &expanded.generators, PROPERTY_G_TOL)?;
        if !property_g.holds {
            return Err(Error::PropertyGViolated { max_sum: property_g.max_sum });
        }
        let action = symbolic_action(&expanded.v);
        let dec = QDecomposition::new(&expanded.q)?;
        Ok(AmplitudeEstimator { expanded, action, dec, property_g })
    }

    pub fn expanded(&self) -> &ExpandedCircuit {
        &self.expanded
    }

    pub fn action(&self) -> &SymbolicAction {
        &self.action
    }

    pub fn decomposition(&self) -> &QDecomposition {
        &self.dec
    }

    pub fn property_g(&self) -> &PropertyGReport {
        &self.property_g
    }

    fn check_strings(&self, x: &[usize], z: &[usize]) -> Result<()> {
        let (n, d) = (self.expanded.v.n, self.expanded.v.d);
        for s in [x, z] {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.len() });
            }
            if let Some(v) = s.iter().find(|&&v| v >= d) {
                return Err(Error::invalid(format!("dit {v} out of range for d = {d}")));
            }
        }
        Ok(())
    }

    pub fn rho(&self, x: &[usize], z: &[usize]) -> Result<f64> {
        self.check_strings(x, z)?;
        Ok(normalization_rho(x, z, &self.action, &self.dec))
    }

    /// `E[X] = Σ_y ρ·e^{iθ(y)}·P(y)` by enumerating all `d^n` strings.
    pub fn exhaustive_mean(&self, x: &[usize], z: &[usize]) -> Result<C64> {
        self.check_strings(x, z)?;
        let (n, d) = (self.expanded.v.n, self.expanded.v.d);
        let probs = match marginals(x, z, &self.action, &self.dec) {
            Marginals::CertifiedZero => return Ok(ZERO),
            Marginals::Product(p) => p,
        };
        let rho = normalization_rho(x, z, &self.action, &self.dec);
        let total = d.checked_pow(n as u32).ok_or_else(|| Error::invalid("enumeration too large"))?;
        let mut sum = ZERO;
        for idx in 0..total {
            let y = crate::linalg::index_ditstring(idx, n, d);
            let p: f64 = y.iter().enumerate().map(|(j, &v)| probs[j][v]).product();
            if p == 0.0 {
                continue;
            }
            let th = theta(&y, phase_of(&self.expanded.v, &y), &self.dec, x, z, &self.action);
            sum += C64::from_polar(rho * p, th);
        }
        Ok(sum)
    }

    pub fn estimate(&self, x: &[usize], z: &[usize], config: &EstimateConfig) -> Result<AmplitudeEstimate> {
        let start = Instant::now();
        self.check_strings(x, z)?;
        let eps = config.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
        }
        let (n, d) = (self.expanded.v.n, self.expanded.v.d);
        let probs = match marginals(x, z, &self.action, &self.dec) {
            Marginals::CertifiedZero => {
                return Ok(AmplitudeEstimate {
                    value: ZERO,
                    n_samples: 0,
                    epsilon: eps,
                    failure_bound: 0.0,
                    rho: 0.0,
                    seed: SeedRecord::new(config.seed),
                    wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            }
            Marginals::Product(p) => p,
        };
        let rho = normalization_rho(x, z, &self.action, &self.dec);
        let n_samples = config.n_samples.unwrap_or_else(|| default_sample_count(n, eps));
        if n_samples == 0 {
            return Err(Error::invalid("n_samples must be positive"));
        }
        let m = config.coin_bits.unwrap_or_else(|| min_coin_bits(n, d));
        let sampler = ProductSampler::new(&probs, m)?;

        // θ(y) = φ(y) + Σ_j offsets[j][y_j]
        let offsets: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let s = self.action.sigma.apply(j);
                (0..d).map(|l| self.dec.alpha[x[s]][self.action.f[s].apply(l)] + self.dec.beta[l][z[j]]).collect()
            })
            .collect();

        let n_streams = n_samples.div_ceil(SAMPLES_PER_STREAM);
        let run_stream = |stream: usize| -> C64 {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream as u64);
            let lo = stream * SAMPLES_PER_STREAM;
            let hi = (lo + SAMPLES_PER_STREAM).min(n_samples);
            let mut y = vec![0usize; n];
            let mut buf = Vec::new();
            let mut acc = ZERO;
            for _ in lo..hi {
                sampler.sample_into(&mut rng, &mut y, &mut buf);
                let phi = phase_of(&self.expanded.v, &y);
                let th = phi + y.iter().enumerate().map(|(j, &v)| offsets[j][v]).sum::<f64>();
                acc += C64::from_polar(rho, th);
            }
            acc
        };
        let partials: Vec<C64> =
            crate::with_threads(config.threads, || (0..n_streams).into_par_iter().map(run_stream).collect())?;
        // fixed summation order keeps the result independent of the thread count
        let total: C64 = partials.into_iter().sum();
        Ok(AmplitudeEstimate {
            value: total / n_samples as f64,
            n_samples,
            epsilon: eps,
            failure_bound: chernoff_bound(n_samples, eps, 1.0),
            rho,
            seed: SeedRecord::new(config.seed),
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// Estimates `⟨x|U|z⟩` to additive error `epsilon`.
pub fn estimate_amplitude(
    circuit: &Circuit,
    gates: &BTreeMap<String, YbNormalForm>,
    x: &[usize],
    z: &[usize],
    epsilon: f64,
    seed: u64,
    n_samples: Option<usize>,
) -> Result<AmplitudeEstimate> {
    let est = AmplitudeEstimator::new(circuit, gates)?;
    est.estimate(x, z, &EstimateConfig { n_samples, ..EstimateConfig::new(epsilon, seed) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::PlacedGate;
    use crate::linalg::{dense_circuit, gates, ONE};
    use crate::solutions::{build_r1, Family, FamilyParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single_gate(diag: Vec<C64>, swap: SwapFlag, perm: Permutation, n: usize) -> MonomialCircuit {
        MonomialCircuit { n, d: 2, gates: vec![MonomialGate { diag, swap, perm, wires: (0, 1) }] }
    }

    #[test]
    fn empty_action_is_identity() {
        let v = MonomialCircuit { n: 3, d: 2, gates: vec![] };
        let act = symbolic_action(&v);
        assert!(act.pi.is_identity());
        assert!(act.f.iter().all(Permutation::is_identity));
        assert_eq!(phase_of(&v, &[1, 0, 1]), 0.0);
    }

    #[test]
    fn swap_gate_action_and_phase() {
        let v = single_gate(vec![ONE, ONE, ONE, -ONE], SwapFlag::Swap, Permutation::identity(2), 2);
        let act = symbolic_action(&v);
        assert_eq!(act.pi, Permutation::transposition(2, 0, 1));
        assert!((phase_of(&v, &[1, 1]).abs() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(act.apply(&[0, 1]), vec![1, 0]);
    }

    #[test]
    fn inverse_gate_is_inverse() {
        let g = MonomialGate {
            diag: (0..4).map(|k| C64::from_polar(1.0, 0.4 * k as f64 + 0.1)).collect(),
            swap: SwapFlag::Swap,
            perm: Permutation::transposition(2, 0, 1),
            wires: (0, 1),
        };
        let prod = &g.inverse(2).matrix(2) * &g.matrix(2);
        assert!(frob_dist(&prod, &ComplexMatrix::identity(4)).unwrap() < 1e-14);
    }

    #[test]
    fn theta_single_wire_entry() {
        let gamma = 0.7;
        let q = ComplexMatrix::from_diagonal(&[ONE, C64::from_polar(1.0, gamma)]);
        let dec = QDecomposition::new(&q).unwrap();
        let act = symbolic_action(&MonomialCircuit { n: 1, d: 2, gates: vec![] });
        // α(1,1) = γ and β(1,1) = -γ for the diagonal Q
        let th = theta(&[1], 0.0, &dec, &[1], &[1], &act);
        assert!(th.abs() < 1e-15);
        assert!((dec.alpha[1][1] - gamma).abs() < 1e-15);
        let id = QDecomposition::new(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(theta(&[0], 0.0, &id, &[0], &[0], &act), 0.0);
    }

    #[test]
    fn rho_and_marginals_simple_cases() {
        let act = symbolic_action(&MonomialCircuit { n: 2, d: 2, gates: vec![] });
        let id = QDecomposition::new(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(normalization_rho(&[0, 1], &[0, 1], &act, &id), 1.0);
        assert_eq!(normalization_rho(&[0, 1], &[1, 1], &act, &id), 0.0);
        assert_eq!(marginals(&[0, 1], &[1, 1], &act, &id), Marginals::CertifiedZero);
        assert_eq!(marginals(&[0, 1], &[0, 1], &act, &id), Marginals::Product(vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
        let h = QDecomposition::new(&gates::hadamard()).unwrap();
        assert!((normalization_rho(&[0, 1], &[1, 0], &act, &h) - 1.0).abs() < 1e-15);
        match marginals(&[0, 1], &[1, 0], &act, &h) {
            Marginals::Product(p) => {
                for pj in p {
                    assert!((pj[0] - 0.5).abs() < 1e-15 && (pj[1] - 0.5).abs() < 1e-15);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rho_below_one_for_unbalanced_family_one() {
        let params = FamilyParams { b: c(0.3, 0.0), d_entry: c(2.0, 0.0), ..FamilyParams::new(Family::F1) };
        let nf = build_r1(&params).unwrap();
        let dec = QDecomposition::new(&nf.q).unwrap();
        let act = symbolic_action(&MonomialCircuit { n: 1, d: 2, gates: vec![] });
        let rho = normalization_rho(&[0], &[1], &act, &dec);
        assert!(rho < 1.0 - 1e-3, "rho = {rho}");
    }

    #[test]
    fn interval_partition_exact_halves() {
        let part = IntervalPartition::new(&[0.5, 0.5], 8).unwrap();
        assert_eq!(part.probabilities(), vec![0.5, 0.5]);
        let point = IntervalPartition::new(&[0.0, 1.0, 0.0], 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut buf = Vec::new();
        for _ in 0..1000 {
            assert_eq!(point.sample(&mut rng, &mut buf), 1);
        }
    }

    #[test]
    fn interval_partition_wide_coins() {
        // more than two limbs, exercising the multi-word comparison
        let part = IntervalPartition::new(&[0.25, 0.25, 0.5], 150).unwrap();
        assert_eq!(part.probabilities(), vec![0.25, 0.25, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut buf = Vec::new();
        let mut counts = [0usize; 3];
        for _ in 0..40_000 {
            counts[part.sample(&mut rng, &mut buf)] += 1;
        }
        for (cnt, p) in counts.iter().zip([0.25f64, 0.25, 0.5]) {
            let sd = (40_000.0 * p * (1.0 - p)).sqrt();
            assert!((*cnt as f64 - 40_000.0 * p).abs() < 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn round_scaled_matches_float_rounding() {
        for (p, m) in [(0.3, 9u32), (1.0 / 3.0, 20), (0.999, 4), (1e-30, 9), (0.5, 1)] {
            let expected = (p * (m as f64).exp2()).round();
            assert_eq!(round_scaled(p, m).to_f64().unwrap(), expected, "p = {p}, m = {m}");
        }
    }

    #[test]
    fn sampler_rejects_few_coins() {
        let p = vec![vec![0.5, 0.5]; 3];
        assert_eq!(ProductSampler::new(&p, 8), Err(Error::CoinBitsTooSmall { m: 8, min: 9 }));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_product(&[vec![0.0, 1.0]], 3, &mut rng).unwrap(), vec![1]);
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_bound(0, 0.1, 1.0), 4.0);
        assert!(chernoff_bound(100, 0.5, 1.0) < chernoff_bound(100, 0.2, 1.0));
        let n = 6;
        let eps = 0.1;
        let r = default_sample_count(n, eps);
        assert_eq!(r, 48_000);
        let exact = 8.0 * n as f64 / eps.powi(3);
        assert!((chernoff_bound(r, eps, 1.0) - 4.0 * (-exact * eps * eps / 8.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_circuit_estimates() {
        let gates: BTreeMap<String, YbNormalForm> = BTreeMap::new();
        let circuit = Circuit::new(3, 2);
        let est = estimate_amplitude(&circuit, &gates, &[0, 1, 1], &[0, 1, 1], 0.1, 7, None).unwrap();
        assert!((est.value - ONE).norm() < 0.1);
        let zero = estimate_amplitude(&circuit, &gates, &[0, 1, 1], &[1, 1, 1], 0.1, 7, None).unwrap();
        assert_eq!(zero.value, ZERO);
        assert_eq!(zero.n_samples, 0);
    }

    #[test]
    fn mixed_q_rejected() {
        let a = build_r1(&FamilyParams::new(Family::F1)).unwrap();
        let b = build_r1(&FamilyParams { b: ONE, ..FamilyParams::new(Family::F1) }).unwrap();
        let gates = BTreeMap::from([("A".to_string(), a), ("B".to_string(), b)]);
        let mut circuit = Circuit::new(3, 2);
        circuit.push(PlacedGate::new("A", vec![0, 1], false)).unwrap();
        circuit.push(PlacedGate::new("B", vec![1, 2], false)).unwrap();
        assert_eq!(expand_circuit(&circuit, &gates).unwrap_err(), Error::MixedQ);
    }

    #[test]
    fn property_g_refusal() {
        // Q = [[1,1],[0,1]] with C = X violates property (G)
        let q = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let nf =
            YbNormalForm::new(2, ONE, q, vec![ONE; 4], SwapFlag::Swap, Permutation::transposition(2, 0, 1)).unwrap();
        let gates = BTreeMap::from([("R".to_string(), nf)]);
        let mut circuit = Circuit::new(2, 2);
        circuit.push(PlacedGate::new("R", vec![0, 1], false)).unwrap();
        assert!(matches!(AmplitudeEstimator::new(&circuit, &gates), Err(Error::PropertyGViolated { .. })));
    }

    #[test]
    fn expansion_of_single_gate() {
        let params = FamilyParams { b: c(0.5, 0.2), p: C64::from_polar(1.0, 0.3), ..FamilyParams::new(Family::F1) };
        let nf = build_r1(&params).unwrap();
        let gates = BTreeMap::from([("R".to_string(), nf.clone())]);
        let mut circuit = Circuit::new(2, 2);
        circuit.push(PlacedGate::new("R", vec![0, 1], false)).unwrap();
        let ex = expand_circuit(&circuit, &gates).unwrap();
        assert_eq!(ex.q, nf.q);
        assert_eq!(ex.v.gates.len(), 1);
        let (vc, reg) = ex.v.to_circuit();
        assert!(frob_dist(&dense_circuit(&vc, &reg).unwrap(), &nf.monomial_matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn estimates_are_thread_count_independent() {
        let params = FamilyParams { b: c(0.5, 0.2), p: C64::from_polar(1.0, 0.3), ..FamilyParams::new(Family::F1) };
        let gates = BTreeMap::from([("R".to_string(), build_r1(&params).unwrap())]);
        let mut circuit = Circuit::new(3, 2);
        circuit.push(PlacedGate::new("R", vec![0, 1], false)).unwrap();
        circuit.push(PlacedGate::new("R", vec![1, 2], true)).unwrap();
        let est = AmplitudeEstimator::new(&circuit, &gates).unwrap();
        let mut cfg = EstimateConfig { n_samples: Some(5000), ..EstimateConfig::new(0.1, 42) };
        cfg.threads = Some(1);
        let one = est.estimate(&[0, 1, 0], &[1, 0, 0], &cfg).unwrap();
        cfg.threads = Some(4);
        let four = est.estimate(&[0, 1, 0], &[1, 0, 0], &cfg).unwrap();
        assert_eq!(one.value, four.value);
    }
}
