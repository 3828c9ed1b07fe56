#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ybsim_core::braid::{Circuit, PlacedGate};
use ybsim_core::linalg::{ditstring_index, ComplexMatrix, C64};
use ybsim_core::solutions::{
    build_commuting_swap_solution, build_diagonal_solution, build_r1, build_r2, build_r3, build_r4, Family,
    FamilyParams, R4Gate, YbNormalForm,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn phase(rng: &mut impl Rng) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..TAU))
}

/// Modulus in `[lo, hi)`, uniform phase.
pub fn complex_in(rng: &mut impl Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..TAU))
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Gram-Schmidt on random columns.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian_complex(rng)).collect();
        for u in &cols {
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= dot * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_rows((0..d).map(|r| (0..d).map(|c| cols[c][r]).collect()).collect()).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, m: usize) -> ComplexMatrix {
    let dim = 1 << m;
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        h[(i, i)] = C64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let z = gaussian_complex(rng);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn f1_params(rng: &mut impl Rng) -> FamilyParams {
    FamilyParams {
        a: complex_in(rng, 0.3, 2.0),
        b: complex_in(rng, 0.0, 2.0),
        d_entry: complex_in(rng, 0.3, 2.0),
        p: phase(rng),
        q: phase(rng),
        r_phase: phase(rng),
        k: phase(rng),
        ..FamilyParams::new(Family::F1)
    }
}

pub fn f2_params(rng: &mut impl Rng) -> FamilyParams {
    FamilyParams {
        a: complex_in(rng, 0.3, 2.0),
        b: complex_in(rng, 0.3, 2.0),
        c: Some(complex_in(rng, 0.3, 2.0)),
        d_entry: complex_in(rng, 0.3, 2.0),
        k: phase(rng),
        ..FamilyParams::new(Family::F2)
    }
}

pub fn f3_params(rng: &mut impl Rng) -> FamilyParams {
    let a = complex_in(rng, 0.3, 2.0);
    let d_entry = complex_in(rng, 0.3, 2.0);
    let ratio = d_entry.norm_sqr() / a.norm_sqr();
    FamilyParams {
        a,
        b: complex_in(rng, 0.0, 2.0),
        d_entry,
        p: phase(rng) * ratio,
        q: phase(rng) / ratio,
        k: phase(rng),
        ..FamilyParams::new(Family::F3)
    }
}

pub fn f4_params(rng: &mut impl Rng) -> FamilyParams {
    let a = complex_in(rng, 0.3, 2.0);
    FamilyParams {
        a,
        b: complex_in(rng, 0.0, 2.0),
        d_entry: C64::from_polar(a.norm(), rng.random_range(0.0..TAU)),
        k: phase(rng),
        ..FamilyParams::new(Family::F4)
    }
}

pub fn random_f1(rng: &mut impl Rng) -> YbNormalForm {
    build_r1(&f1_params(rng)).unwrap()
}

pub fn random_f2(rng: &mut impl Rng) -> YbNormalForm {
    build_r2(&f2_params(rng)).unwrap()
}

pub fn random_f3(rng: &mut impl Rng) -> YbNormalForm {
    build_r3(&f3_params(rng)).unwrap()
}

pub fn random_r4(rng: &mut impl Rng) -> R4Gate {
    build_r4(&f4_params(rng)).unwrap()
}

pub fn random_diagonal(rng: &mut impl Rng, d: usize) -> YbNormalForm {
    let lambdas: Vec<Vec<C64>> = (0..d).map(|_| (0..d).map(|_| phase(rng)).collect()).collect();
    build_diagonal_solution(&lambdas).unwrap().normal_form
}

/// Commuting unitaries `A = U·diag·U†`, `B = U·diag'·U†`.
pub fn random_commuting_pair(rng: &mut impl Rng, d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let u = random_unitary(rng, d);
    let mk = |rng: &mut _| {
        let diag: Vec<C64> = (0..d).map(|_| phase(rng)).collect();
        &(&u * &ComplexMatrix::from_diagonal(&diag)) * &u.adjoint()
    };
    let a = mk(rng);
    let b = mk(rng);
    (a, b)
}

pub fn random_commuting(rng: &mut impl Rng, d: usize) -> YbNormalForm {
    let (a, b) = random_commuting_pair(rng, d);
    build_commuting_swap_solution(&a, &b, 1e-9).unwrap().normal_form
}

/// Gates on random distinct wire pairs with random inverse flags.
pub fn random_circuit(rng: &mut impl Rng, ids: &[&str], n: usize, d: usize, len: usize) -> Circuit {
    let mut circuit = Circuit::new(n, d);
    for _ in 0..len {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let id = ids[rng.random_range(0..ids.len())];
        circuit.push(PlacedGate::new(id, vec![a, b], rng.random_bool(0.3))).unwrap();
    }
    circuit
}

pub fn registry(gates: &BTreeMap<String, YbNormalForm>) -> BTreeMap<String, ComplexMatrix> {
    gates.iter().map(|(k, nf)| (k.clone(), nf.reconstruct().unwrap())).collect()
}

pub fn random_ditstring(rng: &mut impl Rng, n: usize, d: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..d)).collect()
}

pub fn amplitude(u: &ComplexMatrix, x: &[usize], z: &[usize], d: usize) -> C64 {
    u[(ditstring_index(x, d).unwrap(), ditstring_index(z, d).unwrap())]
}
