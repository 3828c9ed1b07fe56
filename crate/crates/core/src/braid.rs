//! Braid words, placed-gate circuits and the braid-to-circuit compiler.
//!
//! Generators are 1-indexed (`s1 … s{n-1}`); circuit wires are 0-indexed, and
//! `σ_i` acts on wires `(i-1, i)`. Ops are listed in application order, so the
//! composed operator of `[U_1, …, U_m]` is `U_m ⋯ U_1`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{embed_gate, frob_dist, ComplexMatrix, ORACLE_CAP};
use crate::ybe::TwoQuditGate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BraidLetter {
    /// Generator index, `1 ≤ index ≤ n - 1`.
    pub index: usize,
    pub inverse: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidWord {
    n_strands: usize,
    letters: Vec<BraidLetter>,
}

impl BraidWord {
    pub fn new(n_strands: usize, letters: Vec<BraidLetter>) -> Result<Self> {
        if n_strands < 2 {
            return Err(Error::invalid(format!("a braid needs at least 2 strands, got {n_strands}")));
        }
        if let Some(bad) = letters.iter().find(|l| l.index == 0 || l.index >= n_strands) {
            return Err(Error::invalid(format!("generator s{} out of range for {} strands", bad.index, n_strands)));
        }
        Ok(BraidWord { n_strands, letters })
    }

    pub fn n_strands(&self) -> usize {
        self.n_strands
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The formal inverse: letters reversed with signs flipped.
    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            n_strands: self.n_strands,
            letters: self.letters.iter().rev().map(|l| BraidLetter { index: l.index, inverse: !l.inverse }).collect(),
        }
    }

    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.n_strands != other.n_strands {
            return Err(Error::DimensionMismatch { expected: self.n_strands, found: other.n_strands });
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { n_strands: self.n_strands, letters })
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.n_strands)?;
        for l in &self.letters {
            write!(f, " s{}", l.index)?;
            if l.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// Parses `[n=<int>] term*` where `term := s<index>[^-1]`, whitespace separated.
///
/// Without an `n=` declaration the strand count is `max index + 1` (2 for an
/// empty word). Error positions are byte offsets into `text`.
pub fn parse_braid(text: &str) -> Result<BraidWord> {
    let mut declared: Option<(usize, usize)> = None;
    let mut letters: Vec<(usize, BraidLetter)> = Vec::new();
    for (pos, token) in tokens(text) {
        if let Some(rest) = token.strip_prefix("n=") {
            if declared.is_some() || !letters.is_empty() {
                return Err(Error::Parse {
                    pos,
                    msg: "strand count must be declared once, before any generator".into(),
                });
            }
            let n =
                parse_uint(rest).ok_or_else(|| Error::Parse { pos, msg: format!("invalid strand count `{rest}`") })?;
            declared = Some((pos, n));
            continue;
        }
        let body = token
            .strip_prefix('s')
            .ok_or_else(|| Error::Parse { pos, msg: format!("expected `s<index>` or `n=<count>`, found `{token}`") })?;
        let (digits, inverse) = match body.strip_suffix("^-1") {
            Some(d) => (d, true),
            None => (body, false),
        };
        let index =
            parse_uint(digits).ok_or_else(|| Error::Parse { pos, msg: format!("malformed generator `{token}`") })?;
        if index == 0 {
            return Err(Error::Parse { pos, msg: "generator indices start at 1".into() });
        }
        letters.push((pos, BraidLetter { index, inverse }));
    }
    let n = match declared {
        Some((pos, n)) => {
            if n < 2 {
                return Err(Error::Parse { pos, msg: format!("strand count {n} < 2") });
            }
            if let Some((p, l)) = letters.iter().find(|(_, l)| l.index >= n) {
                return Err(Error::Parse {
                    pos: *p,
                    msg: format!("generator s{} out of range for {n} strands", l.index),
                });
            }
            n
        }
        None => letters.iter().map(|(_, l)| l.index + 1).max().unwrap_or(2),
    };
    BraidWord::new(n, letters.into_iter().map(|(_, l)| l).collect())
}

fn parse_uint(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = text;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let tok = (offset, &trimmed[..end]);
        offset += end;
        rest = &trimmed[end..];
        Some(tok)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedGate {
    pub gate_id: String,
    pub wires: Vec<usize>,
    pub inverse: bool,
}

impl PlacedGate {
    pub fn new(gate_id: impl Into<String>, wires: Vec<usize>, inverse: bool) -> Self {
        PlacedGate { gate_id: gate_id.into(), wires, inverse }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n_wires: usize,
    d: usize,
    ops: Vec<PlacedGate>,
}

impl Circuit {
    pub fn new(n_wires: usize, d: usize) -> Self {
        Circuit { n_wires, d, ops: Vec::new() }
    }

    pub fn push(&mut self, op: PlacedGate) -> Result<()> {
        if op.wires.is_empty() {
            return Err(Error::invalid("a gate must act on at least one wire"));
        }
        for (i, &w) in op.wires.iter().enumerate() {
            if w >= self.n_wires {
                return Err(Error::WireOutOfRange { wire: w, n: self.n_wires });
            }
            if op.wires[..i].contains(&w) {
                return Err(Error::DuplicateWire(w));
            }
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn ops(&self) -> &[PlacedGate] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// The circuit of the inverse operator: ops reversed, inverse flags toggled.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_wires: self.n_wires,
            d: self.d,
            ops: self
                .ops
                .iter()
                .rev()
                .map(|op| PlacedGate { gate_id: op.gate_id.clone(), wires: op.wires.clone(), inverse: !op.inverse })
                .collect(),
        }
    }

    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.n_wires != other.n_wires || self.d != other.d {
            return Err(Error::invalid("circuits differ in wire count or local dimension"));
        }
        let mut out = self.clone();
        out.ops.extend(other.ops.iter().cloned());
        Ok(out)
    }

    /// Line-oriented text form: a `wires <n>` header, then `gate_id w,w [inv]` per op.
    pub fn to_text(&self) -> String {
        let mut out = format!("wires {}\n", self.n_wires);
        for op in &self.ops {
            let wires: Vec<String> = op.wires.iter().map(|w| w.to_string()).collect();
            out.push_str(&op.gate_id);
            out.push(' ');
            out.push_str(&wires.join(","));
            if op.inverse {
                out.push_str(" inv");
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Blank lines and `#` comments are
    /// ignored; without a `wires` header the wire count is `max wire + 1`.
    pub fn from_text(text: &str, d: usize) -> Result<Circuit> {
        let mut n_wires: Option<usize> = None;
        let mut ops = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let pos = offset;
            offset += line.len();
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields[0] == "wires" {
                if fields.len() != 2 || n_wires.is_some() || !ops.is_empty() {
                    return Err(Error::Parse { pos, msg: "`wires <n>` must appear once, before any op".into() });
                }
                n_wires =
                    Some(parse_uint(fields[1]).ok_or_else(|| Error::Parse { pos, msg: "invalid wire count".into() })?);
                continue;
            }
            let inverse = match fields.len() {
                2 => false,
                3 if fields[2] == "inv" => true,
                _ => return Err(Error::Parse { pos, msg: format!("expected `gate_id w,w [inv]`, found `{content}`") }),
            };
            let wires = fields[1]
                .split(',')
                .map(|w| parse_uint(w.trim()).ok_or_else(|| Error::Parse { pos, msg: format!("invalid wire `{w}`") }))
                .collect::<Result<Vec<_>>>()?;
            ops.push(PlacedGate::new(fields[0], wires, inverse));
        }
        let n = n_wires.unwrap_or_else(|| ops.iter().flat_map(|op| op.wires.iter().map(|w| w + 1)).max().unwrap_or(1));
        let mut circuit = Circuit::new(n, d);
        for op in ops {
            circuit.push(op)?;
        }
        Ok(circuit)
    }
}

/// Compiles a braid through `ρ(R, n)`: one 2-wire gate per letter on wires `(i-1, i)`.
pub fn braid_to_circuit(word: &BraidWord, gate_id: &str, d: usize) -> Circuit {
    Circuit {
        n_wires: word.n_strands,
        d,
        ops: word.letters.iter().map(|l| PlacedGate::new(gate_id, vec![l.index - 1, l.index], l.inverse)).collect(),
    }
}

/// Checks far commutation for every `|i - j| ≥ 2` and the braid relation on
/// every adjacent triple, densely on `n` strands.
pub fn representation_check(gate: &TwoQuditGate, n: usize, tol: f64) -> Result<bool> {
    let d = gate.local_dim();
    let dim = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if dim > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { dim, cap: ORACLE_CAP });
    }
    if n < 2 {
        return Err(Error::invalid("need at least 2 strands"));
    }
    let generators: BTreeMap<usize, ComplexMatrix> =
        (1..n).map(|i| Ok((i, embed_gate(gate.matrix(), &[i - 1, i], n, d)?))).collect::<Result<_>>()?;
    for i in 1..n {
        for j in i + 2..n {
            let (a, b) = (&generators[&i], &generators[&j]);
            if frob_dist(&(a * b), &(b * a))? > tol {
                return Ok(false);
            }
        }
        if i + 1 < n {
            let (a, b) = (&generators[&i], &generators[&(i + 1)]);
            let lhs = &(a * b) * a;
            let rhs = &(b * a) * b;
            if frob_dist(&lhs, &rhs)? > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
