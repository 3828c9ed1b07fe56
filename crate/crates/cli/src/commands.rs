use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use ybsim_core::braid::{braid_to_circuit, parse_braid, Circuit, PlacedGate};
use ybsim_core::clifford_sim::{dense_expectation, expectation as clifford_expectation, ProductState};
use ybsim_core::linalg::{apply_circuit, ditstring_index, unitarity_residual, ComplexMatrix, StateVector, C64};
use ybsim_core::mc_sim::{AmplitudeEstimator, EstimateConfig};
use ybsim_core::perm::Permutation;
use ybsim_core::solutions::{
    build_commuting_swap_solution, build_diagonal_solution, build_r1, build_r2, build_r3, build_r4, check_property_g,
    Family, FamilyParams, PropertyGReport, YbNormalForm,
};
use ybsim_core::with_threads;
use ybsim_core::ybe::{check_qybe, TwoQuditGate};

use crate::error::CliError;
use crate::formats::{parse_ditstring, product_state, GateFile, GateSpec, ObservableFile, QubitParams};
use crate::{CircuitSource, ExpectationArgs, OutputFormat, PropertyGMode, SimulateArgs};

/// Tolerance for property (G), matching the estimator's refusal threshold.
const PROPERTY_G_TOL: f64 = ybsim_core::mc_sim::PROPERTY_G_TOL;

type CliResult<T> = Result<T, CliError>;

fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn render(value: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string_pretty(value).expect("values serialise") + "\n",
        OutputFormat::Text => {
            let mut out = String::new();
            flatten("", value, &mut out);
            out
        }
    }
}

/// `key.sub: value` lines; arrays of numbers stay inline.
fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::String(s) if s.contains('\n') => {
            out.push_str(&format!("{prefix}:\n"));
            for line in s.lines() {
                out.push_str(&format!("  {line}\n"));
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

fn property_g_json(report: &PropertyGReport, group: &str) -> Value {
    let (pi, k, l) = &report.witness;
    json!({
        "group": group,
        "group_order": report.group_order,
        "max_sum": report.max_sum,
        "holds": report.holds,
        "tolerance": PROPERTY_G_TOL,
        "witness": { "perm": pi.images(), "k": k, "l": l },
    })
}

/// Generators of the full symmetric group on `[d]`: a transposition and a `d`-cycle.
fn symmetric_generators(d: usize) -> Vec<Permutation> {
    if d < 2 {
        return Vec::new();
    }
    let cycle = Permutation::from_images((0..d).map(|i| (i + 1) % d).collect()).expect("cycle");
    vec![Permutation::transposition(d, 0, 1), cycle]
}

fn property_g(q: &ComplexMatrix, own: &[Permutation], mode: PropertyGMode) -> CliResult<Value> {
    let (generators, group) = match mode {
        PropertyGMode::None => return Ok(Value::Null),
        PropertyGMode::Gate => (own.to_vec(), "gate"),
        PropertyGMode::Full => (symmetric_generators(q.dim()), "full"),
    };
    Ok(property_g_json(&check_property_g(q, &generators, PROPERTY_G_TOL)?, group))
}

fn family_params(family: Family, p: &QubitParams) -> FamilyParams {
    FamilyParams { family, a: p.a, b: p.b, c: p.c, d_entry: p.d_entry, p: p.p, q: p.q, r_phase: p.r_phase, k: p.k }
}

enum Built {
    NormalForm(YbNormalForm),
    R4(ybsim_core::solutions::R4Gate),
}

pub fn gate_build(spec_path: &Path, out: Option<&Path>, tol: f64) -> CliResult<Value> {
    let spec: GateSpec = read_json(spec_path)?;
    let (name, constraints, built): (&str, &[&str], Built) = match &spec {
        GateSpec::R1(p) => (
            "r1",
            &["|k| = 1", "|p| = 1", "|q| = 1", "|r_phase| = 1", "d_entry != 0", "det Q != 0"],
            Built::NormalForm(build_r1(&family_params(Family::F1, p))?),
        ),
        GateSpec::R2(p) => (
            "r2",
            &[
                "|k| = 1",
                "c given",
                "det Q != 0",
                "a·conj(b) + c·conj(d_entry) != 0",
                "|a|² + |c|² != 0",
                "Q·M·Q⁻¹ unitary",
            ],
            Built::NormalForm(build_r2(&family_params(Family::F2, p))?),
        ),
        GateSpec::R3(p) => (
            "r3",
            &["|k| = 1", "a != 0", "d_entry != 0", "|p| = |d_entry|²/|a|²", "|q| = |a|²/|d_entry|²", "det Q != 0"],
            Built::NormalForm(build_r3(&family_params(Family::F3, p))?),
        ),
        GateSpec::R4(p) => (
            "r4",
            &["|k| = 1", "|a| = |d_entry|", "d_entry != 0", "Q/(|a|²+|b|²)^(1/2) unitary"],
            Built::R4(build_r4(&family_params(Family::F4, p))?),
        ),
        GateSpec::Diag(p) => {
            ("diag", &["|lambda| = 1"], Built::NormalForm(build_diagonal_solution(&p.lambdas)?.normal_form))
        }
        GateSpec::Commuting(p) => (
            "commuting",
            &["A unitary", "B unitary", "AB = BA"],
            Built::NormalForm(build_commuting_swap_solution(&p.a, &p.b, tol)?.normal_form),
        ),
    };
    let (file, prop_g) = match &built {
        Built::NormalForm(nf) => {
            (GateFile::from_normal_form(nf)?, property_g(&nf.q, std::slice::from_ref(&nf.perm), PropertyGMode::Gate)?)
        }
        Built::R4(g) => (GateFile::from_r4(g), Value::Null),
    };
    let matrix = file.matrix();
    let d = (matrix.dim() as f64).sqrt().round() as usize;
    let qybe = check_qybe(&TwoQuditGate::new(d, matrix.clone())?, tol);
    if let Some(path) = out {
        write_json(path, &file)?;
    }
    Ok(json!({
        "family": name,
        "kind": file.kind(),
        "d": d,
        "tolerance": tol,
        "constraints_checked": constraints,
        "qybe_residual": qybe.residual,
        "qybe_holds": qybe.holds,
        "unitarity_residual": unitarity_residual(matrix),
        "property_g": prop_g,
        "gate": serde_json::to_value(&file)?,
    }))
}

fn perfect_square_root(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r >= 2 && r * r == n).then_some(r)
}

pub fn gate_check(path: &Path, tol: f64, mode: PropertyGMode, as_q: bool) -> CliResult<Value> {
    let text = read(path)?;
    let file = match serde_json::from_str::<GateFile>(&text) {
        Ok(f) => f,
        Err(tagged) => match serde_json::from_str::<ComplexMatrix>(&text) {
            Ok(matrix) => GateFile::Matrix { matrix },
            Err(_) => return Err(CliError::input(format!("{}: {tagged}", path.display()))),
        },
    };
    let matrix = file.matrix();
    let d = perfect_square_root(matrix.dim());
    if as_q || d.is_none() {
        if !matches!(file, GateFile::Matrix { .. }) {
            return Err(CliError::input("--q-matrix applies to plain matrix files"));
        }
        return Ok(json!({
            "role": "q",
            "dim": matrix.dim(),
            "tolerance": tol,
            "unitarity_residual": unitarity_residual(matrix),
            "property_g": property_g(matrix, &[], mode)?,
        }));
    }
    let d = d.expect("checked above");
    let qybe = check_qybe(&TwoQuditGate::new(d, matrix.clone())?, tol);
    let prop_g = match (&file, mode) {
        (GateFile::NormalForm { .. }, _) => {
            let nf = file.normal_form()?.expect("normal form");
            property_g(&nf.q, std::slice::from_ref(&nf.perm), mode)?
        }
        (GateFile::CliffordR4 { .. }, _) => {
            let g = file.r4()?.expect("family four");
            property_g(&g.q1, &[], mode)?
        }
        (GateFile::Matrix { .. }, _) => Value::Null,
    };
    let residual = unitarity_residual(matrix);
    Ok(json!({
        "role": "gate",
        "kind": file.kind(),
        "d": d,
        "tolerance": tol,
        "qybe_residual": qybe.residual,
        "qybe_holds": qybe.holds,
        "unitarity_residual": residual,
        "unitary": residual <= tol,
        "property_g": prop_g,
    }))
}

pub fn read_braid(word: Option<String>, file: Option<&Path>) -> CliResult<String> {
    match (word, file) {
        (Some(w), None) => Ok(w),
        (None, Some(p)) => read(p),
        _ => Err(CliError::input("give a braid word or --file")),
    }
}

pub fn braid_parse(text: &str) -> CliResult<Value> {
    let word = parse_braid(text)?;
    let letters: Vec<Value> =
        word.letters().iter().map(|l| json!({ "index": l.index, "inverse": l.inverse })).collect();
    Ok(json!({
        "word": word.to_string(),
        "n_strands": word.n_strands(),
        "length": word.len(),
        "letters": letters,
    }))
}

pub fn braid_compile(text: &str, gate_id: &str, d: usize, out: Option<&Path>) -> CliResult<Value> {
    if d == 0 {
        return Err(CliError::input("local dimension must be positive"));
    }
    let word = parse_braid(text)?;
    let circuit = braid_to_circuit(&word, gate_id, d);
    let body = circuit.to_text();
    if let Some(path) = out {
        fs::write(path, &body)?;
    }
    Ok(json!({
        "word": word.to_string(),
        "n_wires": circuit.n_wires(),
        "d": d,
        "n_ops": circuit.len(),
        "circuit": body,
    }))
}

/// `[id=]path` pairs in command-line order.
fn load_gates(specs: &[String]) -> CliResult<Vec<(String, GateFile)>> {
    let mut out: Vec<(String, GateFile)> = Vec::new();
    for spec in specs {
        let (id, path) = match spec.split_once('=') {
            Some((id, path)) if !id.is_empty() => (id.to_string(), path),
            _ => ("R".to_string(), spec.as_str()),
        };
        if out.iter().any(|(existing, _)| *existing == id) {
            return Err(CliError::input(format!("gate id `{id}` given twice")));
        }
        let file: GateFile = read_json(Path::new(path))?;
        out.push((id, file));
    }
    Ok(out)
}

fn build_circuit(source: &CircuitSource, ids: &[&str], d: usize) -> CliResult<Circuit> {
    let circuit = match (&source.braid, &source.braid_file, &source.circuit) {
        (Some(_), _, _) | (_, Some(_), _) => {
            let text = match (&source.braid, &source.braid_file) {
                (Some(w), _) => w.clone(),
                (_, Some(p)) => read(p)?,
                _ => unreachable!(),
            };
            let [id] = ids else {
                return Err(CliError::input("a braid word needs exactly one gate"));
            };
            braid_to_circuit(&parse_braid(&text)?, id, d)
        }
        (None, None, Some(p)) => Circuit::from_text(&read(p)?, d)?,
        _ => return Err(CliError::input("one of --braid, --braid-file or --circuit is required")),
    };
    match source.wires {
        Some(n) if n != circuit.n_wires() => {
            let mut wider = Circuit::new(n, d);
            for op in circuit.ops() {
                wider.push(PlacedGate::new(op.gate_id.clone(), op.wires.clone(), op.inverse))?;
            }
            Ok(wider)
        }
        _ => Ok(circuit),
    }
}

fn check_epsilon(eps: f64) -> CliResult<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(CliError::input(format!("epsilon must lie in (0, 1), got {eps}")))
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<Value> {
    check_epsilon(args.epsilon)?;
    let mut gates: BTreeMap<String, YbNormalForm> = BTreeMap::new();
    let mut order = Vec::new();
    for (id, file) in load_gates(&args.source.gates)? {
        let nf = file.normal_form()?.ok_or_else(|| {
            CliError::mismatch(format!(
                "simulate requires monomial normal-form gates; `{id}` is a {} gate",
                file.kind()
            ))
        })?;
        order.push(id.clone());
        gates.insert(id, nf);
    }
    let d = gates[&order[0]].d;
    if let Some((id, nf)) = gates.iter().find(|(_, nf)| nf.d != d) {
        return Err(CliError::input(format!("gate `{id}` has d = {} but `{}` has d = {d}", nf.d, order[0])));
    }
    let ids: Vec<&str> = order.iter().map(String::as_str).collect();
    let circuit = build_circuit(&args.source, &ids, d)?;
    let x = parse_ditstring(&args.x, d)?;
    let z = parse_ditstring(&args.z, d)?;
    let n = circuit.n_wires();
    for s in [&x, &z] {
        if s.len() != n {
            return Err(CliError::input(format!("ditstring has {} digits but the circuit has {n} wires", s.len())));
        }
    }

    if args.exact {
        let registry: BTreeMap<String, ComplexMatrix> =
            gates.iter().map(|(k, nf)| Ok((k.clone(), nf.reconstruct()?))).collect::<CliResult<_>>()?;
        let mut state = StateVector::basis(d, &z)?;
        apply_circuit(&circuit, &registry, &mut state)?;
        let value = state.amplitudes()[ditstring_index(&x, d)?];
        return Ok(json!({
            "method": "exact",
            "value": complex(value),
            "n": n,
            "d": d,
            "x": args.x,
            "z": args.z,
        }));
    }

    let estimator = AmplitudeEstimator::new(&circuit, &gates)?;
    let config = EstimateConfig {
        n_samples: args.samples,
        threads: args.threads,
        coin_bits: args.coin_bits,
        ..EstimateConfig::new(args.epsilon, args.seed)
    };
    let est = estimator.estimate(&x, &z, &config)?;
    let mut record = json!({
        "method": "monte_carlo",
        "value": complex(est.value),
        "n_samples": est.n_samples,
        "epsilon": est.epsilon,
        "failure_bound": est.failure_bound,
        "rho": est.rho,
        "seed": serde_json::to_value(&est.seed)?,
        "n": n,
        "d": d,
        "x": args.x,
        "z": args.z,
        "property_g_max_sum": estimator.property_g().max_sum,
    });
    if !args.no_timing {
        record["wall_time_ms"] = json!(est.wall_time_ms);
    }
    Ok(record)
}

fn state_from(path: &Option<std::path::PathBuf>, bits: &Option<String>) -> CliResult<Option<ProductState>> {
    match (path, bits) {
        (Some(p), _) => Ok(Some(product_state(read_json::<Vec<[C64; 2]>>(p)?)?)),
        (_, Some(b)) => Ok(Some(ProductState::basis(&parse_ditstring(b, 2)?)?)),
        _ => Ok(None),
    }
}

pub fn expectation(args: &ExpectationArgs) -> CliResult<Value> {
    let mut gates = BTreeMap::new();
    let mut order = Vec::new();
    for (id, file) in load_gates(&args.source.gates)? {
        let g = file.r4()?.ok_or_else(|| {
            CliError::mismatch(format!("expectation requires family-four gates; `{id}` is a {} gate", file.kind()))
        })?;
        order.push(id.clone());
        gates.insert(id, g);
    }
    let ids: Vec<&str> = order.iter().map(String::as_str).collect();
    let circuit = build_circuit(&args.source, &ids, 2)?;
    let obs = read_json::<ObservableFile>(&args.observable)?.into_observable()?;
    let psi =
        state_from(&args.psi, &args.psi_bits)?.ok_or_else(|| CliError::input("--psi or --psi-bits is required"))?;
    let phi = state_from(&args.phi, &args.phi_bits)?.unwrap_or_else(|| psi.clone());
    let (method, value) = if args.exact {
        ("exact", dense_expectation(&circuit, &gates, &obs, &psi, &phi)?)
    } else {
        ("pauli", with_threads(args.threads, || clifford_expectation(&circuit, &gates, &obs, &psi, &phi))??)
    };
    Ok(json!({
        "method": method,
        "value": complex(value),
        "n": circuit.n_wires(),
        "observable_wires": obs.wires(),
        "tolerance": args.tolerance,
    }))
}
